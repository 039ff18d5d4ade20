#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "cppo/params.hpp"

namespace cppo {

// Central finite differences against an analytic gradient.
// Returns max over coordinates of |analytic - numeric| / max(floor, |analytic| + |numeric|).
// The floor keeps FD roundoff (~1e-11 absolute at fd_step 1e-5 on O(1) losses)
// from dominating the relative error on near-zero coordinates.
inline double grad_check(const std::function<double(const ParamVector&)>& loss,
                         const ParamVector& params, const ParamVector& analytic_grad,
                         double fd_step = 1e-5, double floor = 1e-6) {
    if (!std::isfinite(loss(params)))
        throw std::runtime_error("grad_check: non-finite loss at params");
    ParamVector p = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p.values()[i];
        p.values()[i] = orig + fd_step;
        const double up = loss(p);
        p.values()[i] = orig - fd_step;
        const double down = loss(p);
        p.values()[i] = orig;
        const double numeric = (up - down) / (2.0 * fd_step);
        const double analytic = analytic_grad.values()[i];
        const double rel = std::fabs(analytic - numeric) /
                           std::max(floor, std::fabs(analytic) + std::fabs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace cppo
