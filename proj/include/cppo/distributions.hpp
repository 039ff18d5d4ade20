#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cppo/rng.hpp"

namespace cppo {

struct ActionSpaceSpec {
    enum class Kind { Discrete, Continuous };
    Kind kind = Kind::Discrete;
    // Discrete: class count per sub-action. Continuous: one entry per scalar
    // torque dimension (each dimension is its own sub-action for ratio purposes).
    std::vector<std::size_t> sub_dims;

    std::size_t num_sub_actions() const { return sub_dims.size(); }

    // Width of the policy-net output feeding this space: concatenated logits
    // for discrete heads, one mean per dimension for continuous.
    std::size_t head_width() const {
        if (kind == Kind::Continuous) return sub_dims.size();
        return std::accumulate(sub_dims.begin(), sub_dims.end(), std::size_t{0});
    }

    void validate() const {
        if (sub_dims.empty())
            throw std::invalid_argument("ActionSpaceSpec: need at least 1 sub-action");
        for (std::size_t d : sub_dims) {
            if (kind == Kind::Discrete && d < 1)
                throw std::invalid_argument("ActionSpaceSpec: discrete dims must be >= 1");
            if (kind == Kind::Continuous && d != 1)
                throw std::invalid_argument("ActionSpaceSpec: continuous sub-actions are scalar");
        }
    }
};

// One class index per discrete sub-action, or one real per continuous dimension.
struct CompoundAction {
    std::vector<std::size_t> indices;
    std::vector<double> values;

    std::size_t size() const {
        return indices.empty() ? values.size() : indices.size();
    }
};

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727; // 0.5 * ln(2*pi)

// Immutable compound distribution over independent sub-action heads.
// Discrete: softmax per head over a slice of `head`. Continuous: diagonal
// Gaussian with mean from `head` and state-independent log-std.
class CompoundDistribution {
public:
    CompoundDistribution(const ActionSpaceSpec& spec, std::vector<double> head,
                         std::vector<double> log_std = {})
        : spec_(spec), head_(std::move(head)) {
        spec_.validate();
        if (head_.size() != spec_.head_width())
            throw std::invalid_argument("CompoundDistribution: head width mismatch");
        if (spec_.kind == ActionSpaceSpec::Kind::Continuous) {
            if (log_std.size() != spec_.sub_dims.size())
                throw std::invalid_argument("CompoundDistribution: log_std size mismatch");
            log_std_ = std::move(log_std);
            for (double& s : log_std_) s = std::clamp(s, kLogStdMin, kLogStdMax);
        } else {
            // precompute per-head log-softmax
            log_probs_.resize(head_.size());
            std::size_t off = 0;
            for (std::size_t d : spec_.sub_dims) {
                double mx = head_[off];
                for (std::size_t k = 1; k < d; ++k) mx = std::max(mx, head_[off + k]);
                double sum = 0.0;
                for (std::size_t k = 0; k < d; ++k) sum += std::exp(head_[off + k] - mx);
                const double lse = mx + std::log(sum);
                for (std::size_t k = 0; k < d; ++k) log_probs_[off + k] = head_[off + k] - lse;
                off += d;
            }
        }
    }

    const ActionSpaceSpec& spec() const { return spec_; }
    const std::vector<double>& log_std() const { return log_std_; }

    CompoundAction sample(Rng& rng) const {
        CompoundAction a;
        if (discrete()) {
            a.indices.reserve(spec_.sub_dims.size());
            std::size_t off = 0;
            for (std::size_t d : spec_.sub_dims) {
                const double u = rng.uniform();
                double cum = 0.0;
                std::size_t pick = d - 1;
                for (std::size_t k = 0; k < d; ++k) {
                    cum += std::exp(log_probs_[off + k]);
                    if (u < cum) { pick = k; break; }
                }
                a.indices.push_back(pick);
                off += d;
            }
        } else {
            a.values.reserve(head_.size());
            for (std::size_t i = 0; i < head_.size(); ++i)
                a.values.push_back(head_[i] + std::exp(log_std_[i]) * rng.normal());
        }
        return a;
    }

    // Greedy action: per-head argmax (discrete) or mean (continuous).
    CompoundAction mode() const {
        CompoundAction a;
        if (discrete()) {
            std::size_t off = 0;
            for (std::size_t d : spec_.sub_dims) {
                std::size_t best = 0;
                for (std::size_t k = 1; k < d; ++k)
                    if (head_[off + k] > head_[off + best]) best = k;
                a.indices.push_back(best);
                off += d;
            }
        } else {
            a.values = head_;
        }
        return a;
    }

    // Per-sub-action log-probability (log density for continuous heads).
    std::vector<double> log_probs(const CompoundAction& action) const {
        std::vector<double> out;
        out.reserve(spec_.sub_dims.size());
        if (discrete()) {
            if (action.indices.size() != spec_.sub_dims.size())
                throw std::invalid_argument("log_probs: action arity mismatch");
            std::size_t off = 0;
            for (std::size_t i = 0; i < spec_.sub_dims.size(); ++i) {
                if (action.indices[i] >= spec_.sub_dims[i])
                    throw std::out_of_range("log_probs: class index out of range");
                out.push_back(log_probs_[off + action.indices[i]]);
                off += spec_.sub_dims[i];
            }
        } else {
            if (action.values.size() != head_.size())
                throw std::invalid_argument("log_probs: action arity mismatch");
            for (std::size_t i = 0; i < head_.size(); ++i) {
                const double z = (action.values[i] - head_[i]) / std::exp(log_std_[i]);
                out.push_back(-0.5 * z * z - log_std_[i] - kHalfLog2Pi);
            }
        }
        return out;
    }

    // Per-sub-action entropy. Discrete: -sum p log p. Gaussian: closed form.
    std::vector<double> entropy() const {
        std::vector<double> out;
        out.reserve(spec_.sub_dims.size());
        if (discrete()) {
            std::size_t off = 0;
            for (std::size_t d : spec_.sub_dims) {
                double h = 0.0;
                for (std::size_t k = 0; k < d; ++k)
                    h -= std::exp(log_probs_[off + k]) * log_probs_[off + k];
                out.push_back(h);
                off += d;
            }
        } else {
            for (double s : log_std_) out.push_back(s + 0.5 + kHalfLog2Pi);
        }
        return out;
    }

    double total_entropy() const {
        const auto e = entropy();
        return std::accumulate(e.begin(), e.end(), 0.0);
    }

    // Gradient of  sum_i logp_coeff[i] * logp_i(action) + ent_coeff * total_entropy
    // w.r.t. the head vector (accumulated into d_head) and, for continuous
    // spaces, the raw log-std parameters (accumulated into d_log_std).
    void backward(const CompoundAction& action, const std::vector<double>& logp_coeff,
                  double ent_coeff, std::vector<double>& d_head,
                  std::vector<double>* d_log_std = nullptr,
                  const std::vector<double>* raw_log_std = nullptr) const {
        if (logp_coeff.size() != spec_.sub_dims.size())
            throw std::invalid_argument("backward: coeff arity mismatch");
        if (d_head.size() != head_.size())
            throw std::invalid_argument("backward: d_head size mismatch");
        if (discrete()) {
            std::size_t off = 0;
            for (std::size_t i = 0; i < spec_.sub_dims.size(); ++i) {
                const std::size_t d = spec_.sub_dims[i];
                const std::size_t a = action.indices[i];
                double h = 0.0;
                if (ent_coeff != 0.0)
                    for (std::size_t k = 0; k < d; ++k)
                        h -= std::exp(log_probs_[off + k]) * log_probs_[off + k];
                for (std::size_t k = 0; k < d; ++k) {
                    const double p = std::exp(log_probs_[off + k]);
                    // d logp(a) / d z_k = [k==a] - p_k
                    d_head[off + k] += logp_coeff[i] * ((k == a ? 1.0 : 0.0) - p);
                    // d H / d z_k = -p_k (logp_k + H)
                    if (ent_coeff != 0.0)
                        d_head[off + k] += ent_coeff * (-p * (log_probs_[off + k] + h));
                }
                off += d;
            }
        } else {
            for (std::size_t i = 0; i < head_.size(); ++i) {
                const double sigma = std::exp(log_std_[i]);
                const double z = (action.values[i] - head_[i]) / sigma;
                d_head[i] += logp_coeff[i] * z / sigma;
                if (d_log_std) {
                    // clamp is flat outside [min,max]: zero gradient there
                    const double raw = raw_log_std ? (*raw_log_std)[i] : log_std_[i];
                    if (raw > kLogStdMin && raw < kLogStdMax)
                        (*d_log_std)[i] += logp_coeff[i] * (z * z - 1.0) + ent_coeff;
                }
            }
        }
    }

private:
    bool discrete() const { return spec_.kind == ActionSpaceSpec::Kind::Discrete; }

    ActionSpaceSpec spec_;
    std::vector<double> head_;
    std::vector<double> log_std_;  // clamped
    std::vector<double> log_probs_; // discrete log-softmax, concatenated
};

} // namespace cppo
