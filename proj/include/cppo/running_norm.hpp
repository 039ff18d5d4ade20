#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cppo {

// Streaming mean/variance (Welford) for observation normalization.
struct RunningNorm {
    double count = 0.0;
    std::vector<double> mean;
    std::vector<double> m2; // sum of squared deviations

    explicit RunningNorm(std::size_t dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}

    std::size_t dim() const { return mean.size(); }

    void update(const std::vector<double>& x) {
        if (x.size() != mean.size())
            throw std::invalid_argument("RunningNorm::update: dim mismatch");
        count += 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - mean[i];
            mean[i] += d / count;
            m2[i] += d * (x[i] - mean[i]);
        }
    }

    double variance(std::size_t i) const { return count > 0.0 ? m2[i] / count : 0.0; }

    // (x - mean)/sqrt(var + 1e-8), clipped to [-10, 10].
    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != mean.size())
            throw std::invalid_argument("RunningNorm::apply: dim mismatch");
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = (x[i] - mean[i]) / std::sqrt(variance(i) + 1e-8);
            out[i] = std::clamp(v, -10.0, 10.0);
        }
        return out;
    }
};

// Scalar running variance used for reward scaling: rewards are divided by the
// running std of the discounted return.
struct RewardScaler {
    double gamma;
    double ret = 0.0;
    double count = 0.0, mean = 0.0, m2 = 0.0;

    explicit RewardScaler(double gamma_ = 0.99) : gamma(gamma_) {}

    double scale(double reward, bool done) {
        ret = gamma * ret + reward;
        count += 1.0;
        const double d = ret - mean;
        mean += d / count;
        m2 += d * (ret - mean);
        const double var = count > 1.0 ? m2 / count : 1.0;
        if (done) ret = 0.0;
        return reward / std::sqrt(var + 1e-8);
    }
};

} // namespace cppo
