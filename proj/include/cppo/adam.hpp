#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cppo/params.hpp"

namespace cppo {

// Adam with bias correction. `step` rejects non-finite gradients instead of
// poisoning the moments.
struct AdamState {
    std::vector<double> m, v;
    long step_count = 0;
    double lr = 2.5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n = 0, double lr_ = 2.5e-4)
        : m(n, 0.0), v(n, 0.0), lr(lr_) {}

    // Minimizes: params -= lr * m_hat / (sqrt(v_hat) + eps).
    // Returns false (and leaves params/state untouched) on non-finite grads.
    bool step(ParamVector& params, const ParamVector& grad) {
        if (params.size() != m.size() || grad.size() != m.size())
            throw std::invalid_argument("AdamState::step: length mismatch");
        for (double g : grad.values())
            if (!std::isfinite(g)) return false;

        ++step_count;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        auto& p = params.values();
        const auto& g = grad.values();
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
            if (!std::isfinite(p[i]))
                throw std::runtime_error("AdamState::step: non-finite parameter");
        }
        return true;
    }
};

// Global-norm gradient clipping: rescale to max_norm if the L2 norm exceeds it.
inline void clip_grad_norm(ParamVector& grad, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("clip_grad_norm: max_norm <= 0");
    const double n = l2_norm(grad.values());
    if (n > max_norm) {
        const double s = max_norm / n;
        for (double& g : grad.values()) g *= s;
    }
}

} // namespace cppo
