#pragma once

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include "cppo/agent.hpp"
#include "cppo/checkpoint.hpp"
#include "cppo/config.hpp"
#include "cppo/envs.hpp"
#include "cppo/metrics.hpp"
#include "cppo/rollout.hpp"
#include "cppo/running_norm.hpp"

namespace cppo {

inline Agent make_agent(const TrainConfig& cfg) {
    auto env = make_env(cfg.env, cfg.env_params);
    return Agent(env->spec().obs_dim, env->spec().action_space);
}

// Checkpoint metadata needed to rebuild the agent (and re-validate the env).
inline std::map<std::string, std::string> checkpoint_meta(const TrainConfig& cfg,
                                                          const Agent& agent) {
    std::map<std::string, std::string> meta;
    meta["env"] = cfg.env;
    for (const auto& [k, v] : cfg.env_params) meta["env." + k] = detail::fmt_double(v);
    meta["obs_dim"] = std::to_string(agent.obs_dim());
    meta["action_kind"] = agent.continuous() ? "continuous" : "discrete";
    std::string dims;
    for (std::size_t d : agent.space().sub_dims)
        dims += (dims.empty() ? "" : ",") + std::to_string(d);
    meta["sub_dims"] = dims;
    meta["obs_norm"] = cfg.obs_norm ? "true" : "false";
    return meta;
}

// Appends the observation-normalizer state to a checkpoint ParamVector so
// evaluation can apply the same normalization.
inline void attach_obs_norm(ParamVector& pv, const RunningNorm& norm) {
    pv.add_segment("obs_norm.mean", {norm.dim()});
    pv.add_segment("obs_norm.m2", {norm.dim()});
    pv.add_segment("obs_norm.count", {1});
    std::copy(norm.mean.begin(), norm.mean.end(), pv.segment("obs_norm.mean"));
    std::copy(norm.m2.begin(), norm.m2.end(), pv.segment("obs_norm.m2"));
    pv.segment("obs_norm.count")[0] = norm.count;
}

inline std::optional<RunningNorm> extract_obs_norm(const ParamVector& pv) {
    if (!pv.has_segment("obs_norm.mean")) return std::nullopt;
    RunningNorm n(pv.segment_size("obs_norm.mean"));
    const double* m = pv.segment("obs_norm.mean");
    const double* s = pv.segment("obs_norm.m2");
    std::copy(m, m + n.dim(), n.mean.begin());
    std::copy(s, s + n.dim(), n.m2.begin());
    n.count = pv.segment("obs_norm.count")[0];
    return n;
}

// One environment slot inside a rollout collector: live env, current
// observation (normalized if enabled), and raw-return bookkeeping.
struct EnvSlot {
    std::unique_ptr<Env> env;
    std::vector<double> obs;      // as fed to the nets
    double episode_return = 0.0;  // raw rewards
    RewardScaler reward_scaler;
    Rng reset_rng;

    EnvSlot(std::unique_ptr<Env> e, double gamma, Rng rng)
        : env(std::move(e)), reward_scaler(gamma), reset_rng(rng) {}
};

// Collects fixed-length rollouts from a set of environments with shared
// policy parameters. Owns the observation normalizer and reward scalers.
class RolloutCollector {
public:
    RolloutCollector(const TrainConfig& cfg, const Agent& agent, Rng& seed_rng)
        : cfg_(cfg), agent_(agent), norm_(agent.obs_dim()) {
        for (std::size_t i = 0; i < cfg.num_envs; ++i) {
            auto env = make_env(cfg.env, cfg.env_params);
            Rng r = seed_rng.fork(i);
            slots_.emplace_back(std::move(env), cfg.gamma, r);
            auto raw = slots_.back().env->reset(slots_.back().reset_rng.next_u64());
            slots_.back().obs = normalize(raw, true);
        }
        action_rng_ = seed_rng.fork(1000003);
    }

    RunningNorm& obs_norm() { return norm_; }

    // Rollout of cfg.rollout_len steps per env. Completed raw episode returns
    // from this rollout are appended to `episode_returns`.
    RolloutBatch collect(const ParamVector& params, std::vector<double>& episode_returns) {
        const std::size_t T = cfg_.rollout_len;
        const std::size_t E = slots_.size();
        const std::size_t n = agent_.space().num_sub_actions();
        RolloutBatch b;
        b.states = Matrix(T * E, agent_.obs_dim());
        b.old_logps = Matrix(T * E, n);
        b.actions.resize(T * E);
        b.rewards.assign(T * E, 0.0);
        b.values.assign(T * E, 0.0);
        b.dones.assign(T * E, 0);

        std::size_t row = 0;
        for (std::size_t e = 0; e < E; ++e) {
            b.starts.push_back(row);
            EnvSlot& slot = slots_[e];
            for (std::size_t t = 0; t < T; ++t, ++row) {
                auto d = agent_.dist(params, slot.obs);
                const CompoundAction action = d.sample(action_rng_);
                const auto logps = d.log_probs(action);
                const double value = agent_.value_of(params, slot.obs);

                StepResult sr = slot.env->step(action);
                slot.episode_return += sr.reward;
                double reward = sr.reward;
                if (cfg_.reward_scale) reward = slot.reward_scaler.scale(reward, sr.done);

                for (std::size_t i = 0; i < agent_.obs_dim(); ++i)
                    b.states(row, i) = slot.obs[i];
                for (std::size_t i = 0; i < n; ++i) b.old_logps(row, i) = logps[i];
                b.actions[row] = action;
                b.rewards[row] = reward;
                b.values[row] = value;
                b.dones[row] = sr.done ? 1 : 0;

                if (sr.done) {
                    episode_returns.push_back(slot.episode_return);
                    slot.episode_return = 0.0;
                    auto raw = slot.env->reset(slot.reset_rng.next_u64());
                    slot.obs = normalize(raw, true);
                } else {
                    slot.obs = normalize(sr.observation, true);
                }
            }
            // bootstrap with the current value net at the truncated tail
            b.bootstrap_values.push_back(agent_.value_of(params, slot.obs));
        }
        b.starts.push_back(row);
        return b;
    }

    std::vector<double> normalize(const std::vector<double>& raw, bool update) {
        if (!cfg_.obs_norm) return raw;
        if (update) norm_.update(raw);
        return norm_.apply(raw);
    }

private:
    TrainConfig cfg_;
    const Agent& agent_;
    RunningNorm norm_;
    std::vector<EnvSlot> slots_;
    Rng action_rng_{0};
};

struct TrainResult {
    ParamVector params;          // final parameters (with obs-norm attached)
    std::uint64_t updates = 0;
    std::uint64_t env_steps = 0;
    std::vector<MetricsRow> rows;
    bool aborted = false;
    std::string abort_reason;
};

// Runs one PPO update (epochs x minibatches) on a prepared batch. Shared by
// the serial and async loops. Returns the aggregated breakdown.
inline LossBreakdown run_update(const Agent& agent, const TrainConfig& cfg,
                                ParamVector& params, AdamState& adam,
                                RolloutBatch& batch, Rng& mb_rng) {
    compute_gae(batch, cfg.gamma, cfg.lam);
    std::vector<double> old_values = batch.values; // before normalization, for value clip
    if (cfg.adv_norm) normalize_advantages(batch.advantages);

    LossBreakdown agg;
    std::size_t n_mb = 0;
    const std::size_t mb_size = std::min(cfg.minibatch, batch.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& idx : minibatches(batch.size(), mb_size, mb_rng)) {
            // gather minibatch views
            Matrix states(idx.size(), batch.states.cols());
            Matrix old_logps(idx.size(), batch.old_logps.cols());
            std::vector<CompoundAction> actions(idx.size());
            std::vector<double> adv(idx.size()), ret(idx.size()), vold(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const std::size_t t = idx[j];
                for (std::size_t k = 0; k < states.cols(); ++k)
                    states(j, k) = batch.states(t, k);
                for (std::size_t k = 0; k < old_logps.cols(); ++k)
                    old_logps(j, k) = batch.old_logps(t, k);
                actions[j] = batch.actions[t];
                adv[j] = batch.advantages[t];
                ret[j] = batch.returns[t];
                vold[j] = old_values[t];
            }
            Agent::MinibatchInput in;
            in.states = &states;
            in.actions = &actions;
            in.old_logps = &old_logps;
            in.advantages = &adv;
            in.returns = &ret;
            in.old_values = cfg.value_clip ? &vold : nullptr;
            in.variant = cfg.variant();
            in.clip_eps = cfg.effective_clip_eps();
            in.c1 = cfg.c1;
            in.c2 = cfg.c2;
            in.value_clip_eps = cfg.value_clip ? cfg.value_clip_eps
                                               : std::numeric_limits<double>::infinity();
            auto mr = agent.compute(params, in);
            if (!std::isfinite(mr.breakdown.total_objective))
                throw std::runtime_error("non-finite loss in update");
            if (cfg.grad_clip) clip_grad_norm(mr.grad, cfg.max_grad_norm);
            if (!adam.step(params, mr.grad))
                throw std::runtime_error("non-finite gradient in update");

            agg.policy_objective += mr.breakdown.policy_objective;
            agg.value_loss += mr.breakdown.value_loss;
            agg.entropy += mr.breakdown.entropy;
            agg.total_objective += mr.breakdown.total_objective;
            agg.clip_stats += mr.breakdown.clip_stats;
            ++n_mb;
        }
    }
    if (n_mb > 0) {
        agg.policy_objective /= static_cast<double>(n_mb);
        agg.value_loss /= static_cast<double>(n_mb);
        agg.entropy /= static_cast<double>(n_mb);
        agg.total_objective /= static_cast<double>(n_mb);
    }
    return agg;
}

// Serial PPO: collect, GAE, minibatch updates. Fully deterministic per seed.
inline TrainResult serial_train(const TrainConfig& cfg, MetricsWriter* metrics = nullptr,
                                const std::string& run_dir = "",
                                const std::function<void(const MetricsRow&)>& on_update = {}) {
    cfg.validate();
    Agent agent = make_agent(cfg);
    Rng rng(cfg.seed);
    ParamVector params = agent.init_params(rng);
    AdamState adam(params.size(), cfg.lr);
    RolloutCollector collector(cfg, agent, rng);
    Rng mb_rng = rng.fork(424242);

    TrainResult result;
    double last_mean_return = 0.0;
    const std::uint64_t steps_per_update = cfg.rollout_len * cfg.num_envs;
    std::string last_good_checkpoint;

    auto save_ckpt = [&](const std::string& name) {
        if (run_dir.empty()) return std::string();
        std::filesystem::create_directories(run_dir + "/checkpoints");
        const std::string path = run_dir + "/checkpoints/" + name;
        ParamVector pv = params;
        if (cfg.obs_norm) attach_obs_norm(pv, collector.obs_norm());
        save_checkpoint(path, pv, checkpoint_meta(cfg, agent));
        return path;
    };

    while (result.env_steps < cfg.total_steps) {
        std::vector<double> ep_returns;
        RolloutBatch batch = collector.collect(params, ep_returns);
        LossBreakdown agg;
        try {
            agg = run_update(agent, cfg, params, adam, batch, mb_rng);
        } catch (const std::exception& ex) {
            result.aborted = true;
            result.abort_reason = ex.what();
            std::cerr << "training aborted at update " << result.updates << ": " << ex.what();
            if (!last_good_checkpoint.empty())
                std::cerr << " (last good checkpoint: " << last_good_checkpoint << ")";
            std::cerr << "\n";
            break;
        }
        result.env_steps += steps_per_update;
        ++result.updates;
        if (!ep_returns.empty()) {
            double s = 0.0;
            for (double r : ep_returns) s += r;
            last_mean_return = s / static_cast<double>(ep_returns.size());
        }

        MetricsRow row;
        row.step = result.env_steps;
        row.update = result.updates;
        row.loss_variant = cfg.loss;
        row.eps = cfg.effective_clip_eps();
        row.policy_obj = agg.policy_objective;
        row.value_loss = agg.value_loss;
        row.entropy = agg.entropy;
        row.total_obj = agg.total_objective;
        row.mean_ep_return = last_mean_return;
        row.unclipped_samples = agg.clip_stats.unclipped_samples;
        row.total_samples = agg.clip_stats.total_samples;
        row.unclipped_sub_entries = agg.clip_stats.unclipped_sub_entries;
        row.total_sub_entries = agg.clip_stats.total_sub_entries;
        row.staleness_mean = 0.0;
        result.rows.push_back(row);
        if (metrics) metrics->write(row);
        if (on_update) on_update(row);

        if (cfg.checkpoint_interval > 0 && result.updates % cfg.checkpoint_interval == 0)
            last_good_checkpoint = save_ckpt("step_" + std::to_string(result.env_steps));
    }

    result.params = params;
    if (cfg.obs_norm) attach_obs_norm(result.params, collector.obs_norm());
    if (!run_dir.empty()) {
        save_ckpt("final");
        save_checkpoint(run_dir + "/final", result.params, checkpoint_meta(cfg, agent));
    }
    return result;
}

} // namespace cppo
