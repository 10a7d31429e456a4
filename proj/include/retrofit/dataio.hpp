#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retrofit/tensor.hpp"

namespace retrofit {

// Immutable after load; images live in [0,1] with shape [n,h,w,c] and labels
// in [0, classes).
struct Dataset {
    Tensor images;
    std::vector<int> labels;
    std::size_t classes = 10;
    std::string name;

    std::size_t size() const { return labels.size(); }

    // Copy of example i with a leading batch dimension of 1.
    Tensor example(std::size_t i) const;

    // Copy of examples [begin, begin+count) as one batch.
    Tensor batch(const std::vector<std::size_t>& indices) const;
    Tensor slice(std::size_t begin, std::size_t count) const;
    std::vector<int> label_slice(std::size_t begin, std::size_t count) const;

    Dataset subset(std::size_t begin, std::size_t count) const;
};

// IDX binary format: big-endian magic (0x803 images / 0x801 labels),
// big-endian u32 dimension sizes, then unsigned bytes. Pixels are scaled by
// 1/255. Bad magic, truncation, and image/label count mismatch raise
// distinct FormatErrors.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes images (scaled back by 255 and rounded) and labels in IDX format;
// the round trip through load_idx is byte-exact for byte-valued data.
void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

// Gaussian class clusters in [0,1]^dims as flat [n,1,1,dims] images. Larger
// separation shrinks the cluster spread so a nearest-centroid rule approaches
// perfect accuracy. Deterministic under seed; class counts balanced within
// rounding.
Dataset synthetic_blobs(std::size_t classes, std::size_t n, std::size_t dims, double separation, std::uint64_t seed);

// CIFAR10 binary batches: records of 1 label byte + 3072 RGB bytes (planar),
// emitted as [n,32,32,3]. Same interface as load_idx; not used by the MNIST
// acceptance path.
Dataset load_cifar10_bin(const std::vector<std::string>& batch_paths);

}  // namespace retrofit
