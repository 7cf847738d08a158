#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "heatlab/errors.hpp"

namespace heatlab {

// Hard cap on matrix dimension; the whole toolkit is desk-scale by design.
inline constexpr std::size_t matrix_dimension_cap = 4096;

// Dense real matrix, row-major storage.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows > matrix_dimension_cap || cols > matrix_dimension_cap) {
            throw capacity_error("matrix dimension " + std::to_string(std::max(rows, cols)) +
                                 " exceeds cap " + std::to_string(matrix_dimension_cap));
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(const std::vector<double> &d) {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double *row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double *row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    const std::vector<double> &data() const { return data_; }
    std::vector<double> &data() { return data_; }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    DenseMatrix &operator+=(const DenseMatrix &o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    DenseMatrix &operator-=(const DenseMatrix &o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    DenseMatrix &operator*=(double a) {
        for (double &v : data_) v *= a;
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix &b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix &b) { return a -= b; }
    friend DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }
    friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

    friend DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
        if (a.cols_ != b.rows_) {
            throw dimension_error("matrix product shape mismatch: " + a.shape_string() + " * " +
                                  b.shape_string());
        }
        DenseMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            const double *arow = a.row_ptr(i);
            double *crow = c.row_ptr(i);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = arow[k];
                if (aik == 0.0) continue;
                const double *brow = b.row_ptr(k);
                for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
            }
        }
        return c;
    }

    std::vector<double> apply(const std::vector<double> &x) const {
        if (x.size() != cols_) {
            throw dimension_error("matrix-vector shape mismatch: " + shape_string() + " * vec(" +
                                  std::to_string(x.size()) + ")");
        }
        std::vector<double> y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double *arow = row_ptr(i);
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += arow[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    // Largest |m(i,j) - m(j,i)| relative to the matrix scale.
    double asymmetry() const {
        double scale = std::max(max_abs(), 1e-300);
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
        return worst / scale;
    }

private:
    void require_same_shape(const DenseMatrix &o, const char *op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw dimension_error(std::string(op) + " shape mismatch: " + shape_string() +
                                  " vs " + o.shape_string());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace heatlab
