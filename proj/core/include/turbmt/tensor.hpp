#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace turbmt {

// Rank-4 row-major tensor with (T, H, W, C) axis semantics. This is the
// universal carrier for video data, coefficient fields and weight fields.
class Tensor {
public:
    Tensor() = default;
    Tensor(int t, int h, int w, int c, double fill = 0.0)
        : t_(t), h_(h), w_(w), c_(c) {
        if (t <= 0 || h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("Tensor: all dims must be positive");
        data_.assign(static_cast<size_t>(t) * h * w * c, fill);
    }

    int t() const { return t_; }
    int h() const { return h_; }
    int w() const { return w_; }
    int c() const { return c_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int t, int y, int x, int c) {
        return data_[idx(t, y, x, c)];
    }
    double operator()(int t, int y, int x, int c) const {
        return data_[idx(t, y, x, c)];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Tensor& o) const {
        return t_ == o.t_ && h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }

    std::string shape_str() const {
        return std::to_string(t_) + "x" + std::to_string(h_) + "x" +
               std::to_string(w_) + "x" + std::to_string(c_);
    }

private:
    size_t idx(int t, int y, int x, int c) const {
        return ((static_cast<size_t>(t) * h_ + y) * w_ + x) * c_ + c;
    }
    int t_ = 0, h_ = 0, w_ = 0, c_ = 0;
    std::vector<double> data_;
};

// 2D row-major grid, used for Zernike tables, phase maps and PSFs.
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, double fill = 0.0) : rows_(rows), cols_(cols) {
        if (rows <= 0 || cols <= 0)
            throw std::invalid_argument("Grid: dims must be positive");
        data_.assign(static_cast<size_t>(rows) * cols, fill);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                    a.shape_str() + " vs " + b.shape_str());
}

}  // namespace turbmt
