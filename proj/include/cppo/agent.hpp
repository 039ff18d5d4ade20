#pragma once

#include <limits>

#include "cppo/adam.hpp"
#include "cppo/distributions.hpp"
#include "cppo/losses.hpp"
#include "cppo/mlp.hpp"

namespace cppo {

// Policy + value pair over one flat ParamVector. Policy and value networks do
// not share parameters; continuous spaces add a state-independent learnable
// log-std segment ("policy.log_std") feeding the Gaussian heads.
class Agent {
public:
    Agent(std::size_t obs_dim, ActionSpaceSpec space,
          std::size_t hidden1 = 64, std::size_t hidden2 = 64)
        : obs_dim_(obs_dim), space_(std::move(space)),
          policy_(obs_dim, space_.head_width(), "policy", hidden1, hidden2),
          value_(obs_dim, 1, "value", hidden1, hidden2) {
        space_.validate();
    }

    const ActionSpaceSpec& space() const { return space_; }
    std::size_t obs_dim() const { return obs_dim_; }
    const MlpNet& policy_net() const { return policy_; }
    const MlpNet& value_net() const { return value_; }

    ParamVector make_params() const {
        ParamVector pv;
        policy_.add_params(pv);
        if (continuous()) pv.add_segment("policy.log_std", {space_.sub_dims.size()});
        value_.add_params(pv);
        return pv;
    }

    // Orthogonal init, gain sqrt(2) hidden / 0.01 policy output / 1.0 value
    // output; log-std starts at 0 (unit std).
    ParamVector init_params(Rng& rng) const {
        ParamVector pv = make_params();
        policy_.init(pv, rng, std::sqrt(2.0), 0.01);
        value_.init(pv, rng, std::sqrt(2.0), 1.0);
        return pv;
    }

    CompoundDistribution dist(const ParamVector& pv, const std::vector<double>& obs) const {
        return CompoundDistribution(space_, policy_.forward1(pv, obs), log_std_of(pv));
    }

    CompoundDistribution dist_from_head(const ParamVector& pv, const double* head_row) const {
        return CompoundDistribution(
            space_, std::vector<double>(head_row, head_row + space_.head_width()),
            log_std_of(pv));
    }

    double value_of(const ParamVector& pv, const std::vector<double>& obs) const {
        return value_.forward1(pv, obs)[0];
    }

    struct MinibatchInput {
        const Matrix* states = nullptr;      // [B x obs_dim]
        const std::vector<CompoundAction>* actions = nullptr;
        const Matrix* old_logps = nullptr;   // [B x n_sub]
        const std::vector<double>* advantages = nullptr;
        const std::vector<double>* returns = nullptr;
        const std::vector<double>* old_values = nullptr; // only for value clipping
        LossVariant variant;
        double clip_eps = 0.2;
        double c1 = 1.0;
        double c2 = 0.0;
        double value_clip_eps = std::numeric_limits<double>::infinity();
    };

    struct MinibatchResult {
        LossBreakdown breakdown;
        ParamVector grad; // gradient of -J (the minimized loss)
    };

    // Full objective J = L_policy - c1*L_value + c2*S over one minibatch, with
    // analytic gradients through both networks and the distribution heads.
    MinibatchResult compute(const ParamVector& pv, const MinibatchInput& in) const {
        const Matrix& states = *in.states;
        const std::size_t B = states.rows();
        const std::size_t n = space_.num_sub_actions();
        if (B == 0) throw std::invalid_argument("Agent::compute: empty minibatch");

        MinibatchResult res;
        res.grad = pv.zeros_like();

        // policy forward + per-sample new log-probs and entropy
        MlpNet::Cache pcache;
        Matrix heads = policy_.forward(pv, states, &pcache);
        Matrix new_logps(B, n);
        double entropy_mean = 0.0;
        std::vector<CompoundDistribution> dists;
        dists.reserve(B);
        for (std::size_t t = 0; t < B; ++t) {
            dists.push_back(dist_from_head(pv, heads.row(t)));
            const auto lp = dists.back().log_probs((*in.actions)[t]);
            for (std::size_t i = 0; i < n; ++i) new_logps(t, i) = lp[i];
            entropy_mean += dists.back().total_entropy();
        }
        entropy_mean /= static_cast<double>(B);

        PolicyLossResult pl =
            policy_loss(in.variant, new_logps, *in.old_logps, *in.advantages, in.clip_eps);

        // dJ/d(head) and dJ/d(log_std) via the distribution backward
        Matrix d_heads(B, space_.head_width());
        std::vector<double> d_log_std(continuous() ? n : 0, 0.0);
        std::vector<double> raw_log_std = log_std_of(pv);
        const double ent_coeff = in.c2 / static_cast<double>(B);
        std::vector<double> coeff(n), d_head_row(space_.head_width());
        for (std::size_t t = 0; t < B; ++t) {
            for (std::size_t i = 0; i < n; ++i) coeff[i] = pl.d_logp(t, i);
            std::fill(d_head_row.begin(), d_head_row.end(), 0.0);
            dists[t].backward((*in.actions)[t], coeff, ent_coeff, d_head_row,
                              continuous() ? &d_log_std : nullptr,
                              continuous() ? &raw_log_std : nullptr);
            for (std::size_t j = 0; j < d_head_row.size(); ++j) d_heads(t, j) = d_head_row[j];
        }
        policy_.backward(pv, pcache, d_heads, res.grad); // accumulates dJ/d(policy params)
        if (continuous()) {
            double* g = res.grad.segment("policy.log_std");
            for (std::size_t i = 0; i < n; ++i) g[i] += d_log_std[i];
        }

        // value head
        MlpNet::Cache vcache;
        Matrix v_out = value_.forward(pv, states, &vcache);
        std::vector<double> v_pred(B);
        for (std::size_t t = 0; t < B; ++t) v_pred[t] = v_out(t, 0);
        ValueLossResult vl = value_loss(v_pred, *in.returns, in.old_values, in.value_clip_eps);
        Matrix d_v(B, 1);
        for (std::size_t t = 0; t < B; ++t) d_v(t, 0) = -in.c1 * vl.d_pred[t]; // dJ/dv
        value_.backward(pv, vcache, d_v, res.grad);

        res.breakdown.policy_objective = pl.objective;
        res.breakdown.value_loss = vl.loss;
        res.breakdown.entropy = entropy_mean;
        res.breakdown.total_objective =
            total_objective(pl.objective, vl.loss, entropy_mean, in.c1, in.c2);
        res.breakdown.clip_stats = pl.stats;

        // the optimizer minimizes -J
        for (double& g : res.grad.values()) g = -g;
        return res;
    }

    // Objective value only (no gradient); used by the finite-difference checks.
    double objective(const ParamVector& pv, const MinibatchInput& in) const {
        // cheap path: reuse compute() minus the gradient work would complicate
        // the code; the batches involved are tiny.
        const Matrix& states = *in.states;
        const std::size_t B = states.rows();
        const std::size_t n = space_.num_sub_actions();
        Matrix heads = policy_.forward(pv, states);
        Matrix new_logps(B, n);
        double entropy_mean = 0.0;
        for (std::size_t t = 0; t < B; ++t) {
            auto d = dist_from_head(pv, heads.row(t));
            const auto lp = d.log_probs((*in.actions)[t]);
            for (std::size_t i = 0; i < n; ++i) new_logps(t, i) = lp[i];
            entropy_mean += d.total_entropy();
        }
        entropy_mean /= static_cast<double>(B);
        PolicyLossResult pl =
            policy_loss(in.variant, new_logps, *in.old_logps, *in.advantages, in.clip_eps);
        Matrix v_out = value_.forward(pv, states);
        std::vector<double> v_pred(B);
        for (std::size_t t = 0; t < B; ++t) v_pred[t] = v_out(t, 0);
        ValueLossResult vl = value_loss(v_pred, *in.returns, in.old_values, in.value_clip_eps);
        return total_objective(pl.objective, vl.loss, entropy_mean, in.c1, in.c2);
    }

    bool continuous() const {
        return space_.kind == ActionSpaceSpec::Kind::Continuous;
    }

private:
    std::vector<double> log_std_of(const ParamVector& pv) const {
        if (!continuous()) return {};
        const double* p = pv.segment("policy.log_std");
        return std::vector<double>(p, p + space_.sub_dims.size());
    }

    std::size_t obs_dim_;
    ActionSpaceSpec space_;
    MlpNet policy_, value_;
};

} // namespace cppo
