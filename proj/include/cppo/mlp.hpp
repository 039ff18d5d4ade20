#pragma once

#include <string>

#include "cppo/matrix.hpp"
#include "cppo/params.hpp"
#include "cppo/rng.hpp"

namespace cppo {

// 3-layer fully connected MLP: input -> h1 -> h2 -> output, tanh hidden
// activations, identity output. The net owns no storage; weights live in a
// ParamVector under `<prefix>.w1 .b1 .w2 .b2 .w3 .b3` so policy, value and
// distribution parameters can share one flat vector and one optimizer state.
struct MlpNet {
    std::size_t in = 0, h1 = 64, h2 = 64, out = 0;
    std::string prefix;

    MlpNet() = default;
    MlpNet(std::size_t in_, std::size_t out_, std::string prefix_,
           std::size_t h1_ = 64, std::size_t h2_ = 64)
        : in(in_), h1(h1_), h2(h2_), out(out_), prefix(std::move(prefix_)) {}

    void add_params(ParamVector& pv) const {
        pv.add_segment(prefix + ".w1", {h1, in});
        pv.add_segment(prefix + ".b1", {h1});
        pv.add_segment(prefix + ".w2", {h2, h1});
        pv.add_segment(prefix + ".b2", {h2});
        pv.add_segment(prefix + ".w3", {out, h2});
        pv.add_segment(prefix + ".b3", {out});
    }

    // Forward-pass activations kept for backward().
    struct Cache {
        Matrix input, z1, a1, z2, a2, output;
    };

    Matrix forward(const ParamVector& pv, const Matrix& input, Cache* cache = nullptr) const {
        if (input.cols() != in)
            throw std::invalid_argument("MlpNet::forward: input dim mismatch");
        Matrix w1 = weight(pv, ".w1", h1, in);
        Matrix w2 = weight(pv, ".w2", h2, h1);
        Matrix w3 = weight(pv, ".w3", out, h2);
        std::vector<double> b1 = bias(pv, ".b1", h1);
        std::vector<double> b2 = bias(pv, ".b2", h2);
        std::vector<double> b3 = bias(pv, ".b3", out);

        Matrix z1, z2, output;
        linear_forward(input, w1, b1, z1);
        Matrix a1 = z1;
        for (double& v : a1.data()) v = std::tanh(v);
        linear_forward(a1, w2, b2, z2);
        Matrix a2 = z2;
        for (double& v : a2.data()) v = std::tanh(v);
        linear_forward(a2, w3, b3, output);
        if (!output.all_finite())
            throw std::runtime_error("MlpNet::forward: non-finite output");
        if (cache) *cache = Cache{input, z1, a1, z2, a2, output};
        return output;
    }

    std::vector<double> forward1(const ParamVector& pv, const std::vector<double>& x) const {
        Matrix m(1, x.size());
        for (std::size_t i = 0; i < x.size(); ++i) m(0, i) = x[i];
        Matrix y = forward(pv, m);
        return y.data();
    }

    // Accumulates parameter gradients into `grad` (same layout as pv).
    // d_output is dL/d(net output), shape [B x out].
    void backward(const ParamVector& pv, const Cache& cache, const Matrix& d_output,
                  ParamVector& grad) const {
        if (d_output.rows() != cache.input.rows() || d_output.cols() != out)
            throw std::invalid_argument("MlpNet::backward: upstream shape mismatch");
        Matrix w2 = weight(pv, ".w2", h2, h1);
        Matrix w3 = weight(pv, ".w3", out, h2);

        Matrix dw3(out, h2), dw2(h2, h1), dw1(h1, in);
        std::vector<double> db3(out, 0.0), db2(h2, 0.0), db1(h1, 0.0);
        Matrix d_a2, d_a1, d_in;

        linear_backward(cache.a2, w3, d_output, dw3, db3, d_a2);
        // through tanh: d_z = d_a * (1 - a^2)
        for (std::size_t i = 0; i < d_a2.size(); ++i)
            d_a2.data()[i] *= 1.0 - cache.a2.data()[i] * cache.a2.data()[i];
        linear_backward(cache.a1, w2, d_a2, dw2, db2, d_a1);
        for (std::size_t i = 0; i < d_a1.size(); ++i)
            d_a1.data()[i] *= 1.0 - cache.a1.data()[i] * cache.a1.data()[i];
        Matrix w1 = weight(pv, ".w1", h1, in);
        linear_backward(cache.input, w1, d_a1, dw1, db1, d_in);

        accumulate(grad, ".w1", dw1.data());
        accumulate(grad, ".b1", db1);
        accumulate(grad, ".w2", dw2.data());
        accumulate(grad, ".b2", db2);
        accumulate(grad, ".w3", dw3.data());
        accumulate(grad, ".b3", db3);
    }

    // Orthogonal init scaled by `gain` per layer; biases zero.
    void init(ParamVector& pv, Rng& rng, double hidden_gain, double out_gain) const {
        init_orthogonal(pv.segment(prefix + ".w1"), h1, in, hidden_gain, rng);
        init_orthogonal(pv.segment(prefix + ".w2"), h2, h1, hidden_gain, rng);
        init_orthogonal(pv.segment(prefix + ".w3"), out, h2, out_gain, rng);
    }

private:
    Matrix weight(const ParamVector& pv, const char* suffix, std::size_t r, std::size_t c) const {
        Matrix m(r, c);
        const double* p = pv.segment(prefix + suffix);
        std::copy(p, p + r * c, m.data().begin());
        return m;
    }
    std::vector<double> bias(const ParamVector& pv, const char* suffix, std::size_t n) const {
        const double* p = pv.segment(prefix + suffix);
        return std::vector<double>(p, p + n);
    }
    void accumulate(ParamVector& grad, const char* suffix, const std::vector<double>& g) const {
        double* p = grad.segment(prefix + suffix);
        for (std::size_t i = 0; i < g.size(); ++i) p[i] += g[i];
    }

    // Gaussian matrix orthogonalized row-by-row (Gram-Schmidt), scaled by gain.
    static void init_orthogonal(double* w, std::size_t rows, std::size_t cols,
                                double gain, Rng& rng) {
        std::vector<std::vector<double>> q;
        q.reserve(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> v(cols);
            for (double& x : v) x = rng.normal();
            for (const auto& u : q) {
                double dot = 0.0;
                for (std::size_t k = 0; k < cols; ++k) dot += v[k] * u[k];
                for (std::size_t k = 0; k < cols; ++k) v[k] -= dot * u[k];
            }
            double n = l2_norm(v);
            if (n < 1e-10) {
                // degenerate draw (or rows > cols); fall back to scaled gaussian
                for (double& x : v) x = rng.normal() / std::sqrt(static_cast<double>(cols));
                n = l2_norm(v);
            }
            for (double& x : v) x /= n;
            q.push_back(v);
            for (std::size_t k = 0; k < cols; ++k) w[r * cols + k] = gain * q.back()[k];
            if (q.size() >= cols) q.clear(); // restart basis when exhausted
        }
    }
};

} // namespace cppo
