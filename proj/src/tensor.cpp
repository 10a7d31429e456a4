#include "retrofit/tensor.hpp"

#include <cmath>
#include <sstream>

#include "retrofit/error.hpp"

namespace retrofit {

std::size_t Tensor::element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_string());
    }
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    if (element_count(shape) != data_.size()) {
        throw ShapeError("cannot reshape tensor of " + std::to_string(data_.size()) + " elements to " +
                         Tensor(std::move(shape)).shape_string());
    }
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

void Tensor::alloc_grad() {
    if (!grad_) grad_.emplace(data_.size(), 0.0);
}

void Tensor::zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

std::vector<double>& Tensor::grad() {
    if (!grad_) throw ShapeError("gradient buffer not allocated");
    return *grad_;
}

const std::vector<double>& Tensor::grad() const {
    if (!grad_) throw ShapeError("gradient buffer not allocated");
    return *grad_;
}

void Tensor::set_grad(std::vector<double> g) {
    if (g.size() != data_.size()) throw ShapeError("gradient size mismatch");
    grad_ = std::move(g);
}

double Tensor::l2_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Tensor::linf_norm() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << "]";
    return os.str();
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    std::size_t off = 0;
    std::size_t i = 0;
    for (std::size_t v : idx) {
        off = off * shape_[i] + v;
        ++i;
    }
    return off;
}

}  // namespace retrofit
