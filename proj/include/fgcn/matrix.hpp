#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fgcn/errors.hpp"
#include "fgcn/rng.hpp"

namespace fgcn {

// Dense row-major matrix of doubles. Row vectors (1 x n) double as the
// activation type throughout the networks here, so everything stays small
// and contiguous.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), v_(std::move(values)) {
        if (v_.size() != rows_ * cols_)
            throw shape_error("Matrix: " + std::to_string(v_.size()) + " values for " + dims() + " shape");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix row(std::vector<double> values) {
        const std::size_t n = values.size();
        return Matrix(1, n, std::move(values));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    double* row_ptr(std::size_t r) { return v_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return v_.data() + r * cols_; }

    const std::vector<double>& values() const { return v_; }

    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    std::string dims() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    void fill(double x) {
        for (auto& e : v_) e = x;
    }

    bool all_finite() const {
        for (double e : v_)
            if (!std::isfinite(e)) return false;
        return true;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && v_ == other.v_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

// out = a * b.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw shape_error("matmul: left is " + a.dims() + " but right is " + b.dims());
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

// out += a * b, shapes checked against out.
inline void matmul_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw shape_error("matmul_accumulate: left is " + a.dims() + " but right is " + b.dims());
    if (out.rows() != a.rows() || out.cols() != b.cols())
        throw shape_error("matmul_accumulate: output is " + out.dims() + " but product is " +
                          std::to_string(a.rows()) + "x" + std::to_string(b.cols()));
    const std::size_t n = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
        }
    }
}

// out += a * b^T. Used by backward passes (grad . W^T) without materializing
// the transpose.
inline void matmul_bt_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw shape_error("matmul_bt_accumulate: left is " + a.dims() + " but right is " + b.dims());
    if (out.rows() != a.rows() || out.cols() != b.rows())
        throw shape_error("matmul_bt_accumulate: output is " + out.dims() + " but product is " +
                          std::to_string(a.rows()) + "x" + std::to_string(b.rows()));
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += arow[k] * brow[k];
            orow[j] += acc;
        }
    }
}

// out += a^T * b. Used for weight gradients (x^T . grad).
inline void matmul_at_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw shape_error("matmul_at_accumulate: left is " + a.dims() + " but right is " + b.dims());
    if (out.rows() != a.cols() || out.cols() != b.cols())
        throw shape_error("matmul_at_accumulate: output is " + out.dims() + " but product is " +
                          std::to_string(a.cols()) + "x" + std::to_string(b.cols()));
    const std::size_t m = b.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* arow = a.row_ptr(r);
        const double* brow = b.row_ptr(r);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ari = arow[i];
            if (ari == 0.0) continue;
            double* orow = out.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) orow[j] += ari * brow[j];
        }
    }
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw shape_error("add: " + a.dims() + " vs " + b.dims());
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw shape_error("sub: " + a.dims() + " vs " + b.dims());
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

inline Matrix operator*(double s, const Matrix& a) {
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

// Scaled-uniform init in +-sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform(-limit, limit);
    return out;
}

}  // namespace fgcn
