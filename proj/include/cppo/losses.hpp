#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cppo/matrix.hpp"

namespace cppo {

// The four policy-loss formulations. MixRatio clips a w-weighted blend of the
// joint ratio and the (mean-reduced) per-sub-action ratio; MixLoss blends the
// two clipped objectives.
struct LossVariant {
    enum class Tag { Compound, SubAction, MixRatio, MixLoss };
    Tag tag = Tag::Compound;
    double w = 0.5;
    bool sum_agg = false; // aggregate the sub-action term by sum instead of mean

    static LossVariant parse(const std::string& name, double w = 0.5) {
        LossVariant v;
        v.w = w;
        if (name == "compound") v.tag = Tag::Compound;
        else if (name == "sub-action") v.tag = Tag::SubAction;
        else if (name == "mix-ratio") v.tag = Tag::MixRatio;
        else if (name == "mix-loss") v.tag = Tag::MixLoss;
        else throw std::invalid_argument(
            "unknown loss '" + name + "' (expected compound|sub-action|mix-ratio|mix-loss)");
        if (v.w < 0.0 || v.w > 1.0) throw std::invalid_argument("loss weight w must be in [0,1]");
        return v;
    }

    std::string name() const {
        switch (tag) {
            case Tag::Compound: return "compound";
            case Tag::SubAction: return "sub-action";
            case Tag::MixRatio: return "mix-ratio";
            case Tag::MixLoss: return "mix-loss";
        }
        return "?";
    }
};

// Clip telemetry. "Samples" are state/compound-action pairs; "sub entries"
// are individual (sample, sub-action) ratio terms.
struct ClipStats {
    std::uint64_t total_samples = 0;
    std::uint64_t unclipped_samples = 0;
    std::uint64_t total_sub_entries = 0;
    std::uint64_t unclipped_sub_entries = 0;

    void operator+=(const ClipStats& o) {
        total_samples += o.total_samples;
        unclipped_samples += o.unclipped_samples;
        total_sub_entries += o.total_sub_entries;
        unclipped_sub_entries += o.unclipped_sub_entries;
    }
    double sample_fraction() const {
        return total_samples ? static_cast<double>(unclipped_samples) / total_samples : 0.0;
    }
    double sub_entry_fraction() const {
        return total_sub_entries ? static_cast<double>(unclipped_sub_entries) / total_sub_entries : 0.0;
    }
};

struct LossBreakdown {
    double policy_objective = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double total_objective = 0.0;
    ClipStats clip_stats;
};

// min(r*A, clip(r, 1-eps, 1+eps)*A). eps = +inf disables clipping.
inline double clipped_surrogate(double r, double adv, double eps) {
    if (!std::isfinite(eps)) return r * adv;
    const double clipped = std::clamp(r, 1.0 - eps, 1.0 + eps) * adv;
    return std::min(r * adv, clipped);
}

// d/dr of the surrogate: exactly 0 on the flat branches, adv otherwise.
inline double surrogate_grad(double r, double adv, double eps) {
    if (!std::isfinite(eps)) return adv;
    if ((r <= 1.0 - eps && adv < 0.0) || (r > 1.0 + eps && adv > 0.0)) return 0.0;
    return adv;
}

// A sample counts as clipped when its surrogate gradient is zero.
inline bool ratio_clipped(double r, double adv, double eps) {
    if (!std::isfinite(eps)) return false;
    return (r <= 1.0 - eps && adv < 0.0) || (r >= 1.0 + eps && adv > 0.0);
}

constexpr double kLogRatioClamp = 20.0;

namespace detail {
inline double exp_clamped(double log_ratio, bool* clamped = nullptr) {
    const bool c = std::fabs(log_ratio) > kLogRatioClamp;
    if (clamped) *clamped = c;
    const double r = std::exp(std::clamp(log_ratio, -kLogRatioClamp, kLogRatioClamp));
    if (!std::isfinite(r))
        throw std::runtime_error("ratio: non-finite (log-ratio " + std::to_string(log_ratio) + ")");
    return r;
}
} // namespace detail

// Joint ratio r1 = exp(sum(new) - sum(old)), computed in log space.
inline double compound_ratio(const std::vector<double>& new_logps,
                             const std::vector<double>& old_logps) {
    if (new_logps.empty() || new_logps.size() != old_logps.size())
        throw std::invalid_argument("compound_ratio: length mismatch");
    double lr = 0.0;
    for (std::size_t i = 0; i < new_logps.size(); ++i) lr += new_logps[i] - old_logps[i];
    return detail::exp_clamped(lr);
}

// Per-sub-action ratios r2_i = exp(new_i - old_i).
inline std::vector<double> sub_action_ratios(const std::vector<double>& new_logps,
                                             const std::vector<double>& old_logps) {
    if (new_logps.size() != old_logps.size())
        throw std::invalid_argument("sub_action_ratios: length mismatch");
    std::vector<double> out(new_logps.size());
    for (std::size_t i = 0; i < new_logps.size(); ++i)
        out[i] = detail::exp_clamped(new_logps[i] - old_logps[i]);
    return out;
}

struct PolicyLossResult {
    double objective = 0.0;  // batch mean, to be maximized
    ClipStats stats;
    // d(objective)/d(new_logps), same shape as the input batch (includes 1/B).
    Matrix d_logp;
};

// Batch-mean policy objective for the chosen variant, with analytic gradient
// w.r.t. the per-sub-action new log-probs and clip telemetry.
// new_logps/old_logps: [B x n]; adv: length B.
inline PolicyLossResult policy_loss(const LossVariant& variant, const Matrix& new_logps,
                                    const Matrix& old_logps, const std::vector<double>& adv,
                                    double eps) {
    const std::size_t B = new_logps.rows();
    const std::size_t n = new_logps.cols();
    if (B == 0) throw std::invalid_argument("policy_loss: empty batch");
    if (old_logps.rows() != B || old_logps.cols() != n || adv.size() != B)
        throw std::invalid_argument("policy_loss: shape mismatch");
    if (std::isfinite(eps) && eps <= 0.0) throw std::invalid_argument("policy_loss: eps <= 0");

    PolicyLossResult res;
    res.d_logp = Matrix(B, n);
    res.stats.total_samples = B;
    res.stats.total_sub_entries = B * n;
    const double inv_b = 1.0 / static_cast<double>(B);
    const double w = variant.w;

    std::vector<double> r2(n), r2_gs(n);
    for (std::size_t t = 0; t < B; ++t) {
        const double a = adv[t];
        double log_r1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            log_r1 += new_logps(t, i) - old_logps(t, i);
            bool clamped;
            r2[i] = detail::exp_clamped(new_logps(t, i) - old_logps(t, i), &clamped);
            r2_gs[i] = clamped ? 0.0 : r2[i]; // log-ratio clamp is flat: zero grad
        }
        bool r1_clamped;
        const double r1 = detail::exp_clamped(log_r1, &r1_clamped);
        const double r1_grad_scale = r1_clamped ? 0.0 : r1;

        // sub-entry telemetry is always per-sub-action ratio status
        bool any_sub_unclipped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!ratio_clipped(r2[i], a, eps)) {
                ++res.stats.unclipped_sub_entries;
                any_sub_unclipped = true;
            }
        }
        const bool r1_unclipped = !ratio_clipped(r1, a, eps);

        // compound term
        const double obj_c = clipped_surrogate(r1, a, eps);
        const double g_c = surrogate_grad(r1, a, eps); // dL/dr1

        // sub-action term (mean over sub-actions by default)
        const double agg = variant.sum_agg ? 1.0 : static_cast<double>(n);
        double obj_s = 0.0;
        std::vector<double> g_s(n);
        double r2_mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            obj_s += clipped_surrogate(r2[i], a, eps);
            g_s[i] = surrogate_grad(r2[i], a, eps);
            r2_mean += r2[i];
        }
        obj_s /= agg;
        r2_mean /= static_cast<double>(n);

        double obj = 0.0;
        bool sample_unclipped = false;
        switch (variant.tag) {
            case LossVariant::Tag::Compound: {
                obj = obj_c;
                sample_unclipped = r1_unclipped;
                for (std::size_t i = 0; i < n; ++i)
                    res.d_logp(t, i) = inv_b * g_c * r1_grad_scale;
                break;
            }
            case LossVariant::Tag::SubAction: {
                obj = obj_s;
                sample_unclipped = any_sub_unclipped;
                for (std::size_t i = 0; i < n; ++i)
                    res.d_logp(t, i) = inv_b * g_s[i] * r2_gs[i] / agg;
                break;
            }
            case LossVariant::Tag::MixRatio: {
                const double r_mix = w * r1 + (1.0 - w) * r2_mean;
                obj = clipped_surrogate(r_mix, a, eps);
                const double g = surrogate_grad(r_mix, a, eps);
                sample_unclipped = !ratio_clipped(r_mix, a, eps);
                for (std::size_t i = 0; i < n; ++i)
                    res.d_logp(t, i) = inv_b * g *
                        (w * r1_grad_scale + (1.0 - w) * r2_gs[i] / static_cast<double>(n));
                break;
            }
            case LossVariant::Tag::MixLoss: {
                obj = w * obj_c + (1.0 - w) * obj_s;
                // invalid only if both routes are fully clipped
                sample_unclipped = r1_unclipped || any_sub_unclipped;
                for (std::size_t i = 0; i < n; ++i)
                    res.d_logp(t, i) = inv_b *
                        (w * g_c * r1_grad_scale +
                         (1.0 - w) * g_s[i] * r2_gs[i] / agg);
                break;
            }
        }
        if (sample_unclipped) ++res.stats.unclipped_samples;
        res.objective += inv_b * obj;
    }
    if (!std::isfinite(res.objective))
        throw std::runtime_error("policy_loss: non-finite objective");
    return res;
}

// Counts clip status for a flat list of (ratio, advantage) pairs.
inline ClipStats count_unclipped(const std::vector<double>& ratios,
                                 const std::vector<double>& advs, double eps) {
    if (ratios.size() != advs.size())
        throw std::invalid_argument("count_unclipped: length mismatch");
    ClipStats s;
    s.total_samples = ratios.size();
    s.total_sub_entries = ratios.size();
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!ratio_clipped(ratios[i], advs[i], eps)) {
            ++s.unclipped_samples;
            ++s.unclipped_sub_entries;
        }
    }
    return s;
}

struct ValueLossResult {
    double loss = 0.0;
    std::vector<double> d_pred; // d(loss)/d(v_pred), includes 1/B
};

// Mean squared error; when `clip_eps` is finite the PPO clipped-value form
// max((v-t)^2, (v_old + clip(v - v_old, -eps, eps) - t)^2) is used.
inline ValueLossResult value_loss(const std::vector<double>& v_pred,
                                  const std::vector<double>& v_target,
                                  const std::vector<double>* v_old = nullptr,
                                  double clip_eps = std::numeric_limits<double>::infinity()) {
    if (v_pred.size() != v_target.size())
        throw std::invalid_argument("value_loss: length mismatch");
    const std::size_t B = v_pred.size();
    ValueLossResult res;
    res.d_pred.assign(B, 0.0);
    if (B == 0) return res;
    const double inv_b = 1.0 / static_cast<double>(B);
    const bool clip = v_old && std::isfinite(clip_eps);
    for (std::size_t t = 0; t < B; ++t) {
        const double e = v_pred[t] - v_target[t];
        if (!clip) {
            res.loss += inv_b * e * e;
            res.d_pred[t] = inv_b * 2.0 * e;
        } else {
            const double vc = (*v_old)[t] + std::clamp(v_pred[t] - (*v_old)[t], -clip_eps, clip_eps);
            const double ec = vc - v_target[t];
            if (e * e >= ec * ec) {
                res.loss += inv_b * e * e;
                res.d_pred[t] = inv_b * 2.0 * e;
            } else {
                res.loss += inv_b * ec * ec;
                const bool inside = std::fabs(v_pred[t] - (*v_old)[t]) < clip_eps;
                res.d_pred[t] = inside ? inv_b * 2.0 * ec : 0.0;
            }
        }
    }
    return res;
}

// J = L_policy - c1 * L_value + c2 * entropy. The trainer minimizes -J.
inline double total_objective(double policy_obj, double value_loss_, double entropy,
                              double c1, double c2) {
    return policy_obj - c1 * value_loss_ + c2 * entropy;
}

} // namespace cppo
