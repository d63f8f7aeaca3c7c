#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace motcap {

// Dense row-major matrix of 64-bit floats. Scalars are 1x1, column vectors
// are n x 1, row vectors 1 x n. Rank is fixed at 2; everything the model
// needs (including part/frame grids) maps onto it with a documented layout.
class Tensor {
public:
    Tensor() = default;

    Tensor(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(check_extent(rows, cols), fill) {}

    Tensor(int rows, int cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        if (static_cast<int>(data_.size()) != rows_ * cols_) {
            throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
        }
        check_extent(rows, cols);
    }

    static Tensor scalar(double v) { return Tensor(1, 1, {v}); }
    static Tensor row(std::vector<double> v) {
        const int n = static_cast<int>(v.size());
        return Tensor(1, n, std::move(v));
    }
    static Tensor col(std::vector<double> v) {
        const int n = static_cast<int>(v.size());
        return Tensor(n, 1, std::move(v));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int numel() const { return rows_ * cols_; }
    bool empty() const { return data_.empty(); }
    std::vector<int> shape() const { return {rows_, cols_}; }
    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    double item() const {
        if (numel() != 1) {
            throw std::invalid_argument("Tensor::item: tensor is " + shape_str() + ", not 1x1");
        }
        return data_[0];
    }

private:
    static int check_extent(int rows, int cols) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative extent");
        return rows * cols;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

}  // namespace motcap
