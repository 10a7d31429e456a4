#pragma once

#include <cstddef>
#include <vector>

#include "retrofit/tensor.hpp"

namespace retrofit::ops {

// Primitive forward/backward pairs used by the layer graph. Inputs with a
// leading batch dimension are processed per example; every backward takes the
// upstream gradient with the shape of the primitive's output.

// a: [n,k], b: [k,m] -> [n,m]
Tensor matmul(const Tensor& a, const Tensor& b);
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& gout, Tensor* ga, Tensor* gb);

// x: [..., m], bias: [m]; broadcast over all leading dimensions.
Tensor add_bias(const Tensor& x, const Tensor& bias);
void add_bias_backward(const Tensor& gout, std::size_t bias_len, Tensor* gx, Tensor* gbias);

// x: [n,h,w,cin], w: [kh,kw,cin,cout], bias: [cout]; stride 1, zero padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t pad);
void conv2d_backward(const Tensor& x, const Tensor& w, std::size_t pad, const Tensor& gout, Tensor* gx, Tensor* gw,
                     Tensor* gbias);

// 2x2 kernel, stride 2; height and width must be even. argmax, when given,
// records the flat input index of each pooled maximum for the backward pass.
Tensor maxpool2d(const Tensor& x, std::vector<std::size_t>* argmax = nullptr);
void maxpool2d_backward(const Tensor& x, const std::vector<std::size_t>& argmax, const Tensor& gout, Tensor* gx);

// [n, ...] -> [n, product of the rest].
Tensor flatten(const Tensor& x);

// Row-wise stable softmax over the last dimension of [n,c].
Tensor softmax(const Tensor& logits);

// Mean negative log-likelihood over the batch; fused log-softmax keeps it
// stable for large logits. Throws if a label is outside [0, classes).
double cross_entropy(const Tensor& logits, const std::vector<int>& labels);
Tensor cross_entropy_backward(const Tensor& logits, const std::vector<int>& labels);

// Row-wise argmax of [n,c].
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace retrofit::ops
