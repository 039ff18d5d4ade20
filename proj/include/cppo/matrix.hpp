#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cppo {

// Dense row-major matrix of doubles. Small and boring on purpose; the
// nets in this project never exceed a few hundred rows.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// out[B x N] = in[B x M] * W^T[M x N] + b[N], W stored [N x M].
inline void linear_forward(const Matrix& in, const Matrix& w,
                           const std::vector<double>& b, Matrix& out) {
    if (in.cols() != w.cols() || b.size() != w.rows())
        throw std::invalid_argument("linear_forward: dimension mismatch");
    out = Matrix(in.rows(), w.rows());
    for (std::size_t i = 0; i < in.rows(); ++i) {
        const double* x = in.row(i);
        double* y = out.row(i);
        for (std::size_t j = 0; j < w.rows(); ++j) {
            const double* wr = w.row(j);
            double acc = b[j];
            for (std::size_t k = 0; k < in.cols(); ++k) acc += wr[k] * x[k];
            y[j] = acc;
        }
    }
}

// Gradients of the same affine map. d_out is [B x N]; accumulates into
// d_w [N x M], d_b [N] and writes d_in [B x M].
inline void linear_backward(const Matrix& in, const Matrix& w, const Matrix& d_out,
                            Matrix& d_w, std::vector<double>& d_b, Matrix& d_in) {
    d_in = Matrix(in.rows(), in.cols());
    for (std::size_t i = 0; i < in.rows(); ++i) {
        const double* x = in.row(i);
        const double* g = d_out.row(i);
        double* dx = d_in.row(i);
        for (std::size_t j = 0; j < w.rows(); ++j) {
            const double gj = g[j];
            if (gj == 0.0) continue;
            d_b[j] += gj;
            double* dwr = d_w.row(j);
            const double* wr = w.row(j);
            for (std::size_t k = 0; k < in.cols(); ++k) {
                dwr[k] += gj * x[k];
                dx[k] += gj * wr[k];
            }
        }
    }
}

} // namespace cppo
