#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace retrofit {

// Dense n-dimensional array of 64-bit floats in row-major order, with an
// optional same-shape gradient buffer.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    std::size_t size() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Multi-index access; bounds-unchecked beyond rank agreement.
    double& at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
    double at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

    // Same data, new shape; total element count must match.
    Tensor reshaped(std::vector<std::size_t> shape) const;

    // Gradient buffer management.
    bool has_grad() const { return grad_.has_value(); }
    void alloc_grad();
    void zero_grad();
    void drop_grad() { grad_.reset(); }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void set_grad(std::vector<double> g);

    double l2_norm() const;
    double linf_norm() const;

    std::string shape_string() const;

    static std::size_t element_count(const std::vector<std::size_t>& shape);

private:
    std::size_t offset(std::initializer_list<std::size_t> idx) const;

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::optional<std::vector<double>> grad_;
};

}  // namespace retrofit
