#pragma once

#include <atomic>
#include <thread>

#include "cppo/experience_queue.hpp"
#include "cppo/param_store.hpp"
#include "cppo/training.hpp"

namespace cppo {

struct AsyncResult {
    TrainResult train;
    ExperienceQueue::Counters queue;
    std::uint64_t torn_reads = 0;
    std::vector<std::uint64_t> staleness;      // one entry per update
    std::vector<std::uint64_t> version_trace;  // published versions, in order
};

// Asynchronous sampler/trainer architecture. Samplers snapshot the parameter
// store, roll out one segment each, and push serialized frames; trainers pull
// frames, compute GAE from the frame's recorded values, and update under a
// shared token so parameter writes serialize. Staleness = trainer version at
// update time minus the version that produced the frame.
inline AsyncResult async_train(const TrainConfig& cfg, MetricsWriter* metrics = nullptr,
                               const std::string& run_dir = "") {
    cfg.validate();
    if (cfg.mode != "async") throw std::invalid_argument("async_train: mode must be async");

    Agent agent = make_agent(cfg);
    Rng rng(cfg.seed);
    ParamVector master = agent.init_params(rng);
    AdamState adam(master.size(), cfg.lr);

    ParamStore store;
    store.publish(master);
    ExperienceQueue queue(cfg.queue_capacity);

    const std::uint64_t target_updates =
        std::max<std::uint64_t>(1, cfg.total_steps / cfg.rollout_len);

    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> torn_reads{0};
    std::atomic<std::uint64_t> updates{0};

    AsyncResult result;
    std::mutex update_token;   // serializes trainer writes to master/adam/store
    std::mutex metrics_mutex;
    double last_mean_return = 0.0;

    auto sampler_fn = [&](std::size_t sampler_id) {
        TrainConfig scfg = cfg;
        scfg.num_envs = 1;
        Rng srng = Rng(cfg.seed).fork(7000 + sampler_id);
        RolloutCollector collector(scfg, agent, srng);
        const std::size_t n = agent.space().num_sub_actions();
        while (!stop.load()) {
            auto snap = store.read();
            if (!snap->valid()) {
                ++torn_reads;
                continue;
            }
            std::vector<double> ep_returns;
            RolloutBatch b = collector.collect(snap->params, ep_returns);
            if (!ep_returns.empty()) {
                double s = 0.0;
                for (double r : ep_returns) s += r;
                std::lock_guard<std::mutex> lock(metrics_mutex);
                last_mean_return = s / static_cast<double>(ep_returns.size());
            }
            ExperienceFrame f;
            f.policy_version = snap->version;
            f.obs_dim = static_cast<std::uint32_t>(agent.obs_dim());
            f.n_sub = static_cast<std::uint32_t>(n);
            f.discrete = !agent.continuous();
            f.states = std::move(b.states);
            f.old_logps = std::move(b.old_logps);
            f.actions = std::move(b.actions);
            f.rewards = std::move(b.rewards);
            f.values = std::move(b.values);
            f.dones = std::move(b.dones);
            f.bootstrap_value = b.bootstrap_values[0];
            queue.push(serialize_frame(f));
        }
    };

    auto trainer_fn = [&](std::size_t trainer_id) {
        Rng mb_rng = Rng(cfg.seed).fork(9000 + trainer_id);
        while (updates.load() < target_updates) {
            auto bytes = queue.pop();
            if (!bytes) break; // closed and drained
            ExperienceFrame f = deserialize_frame(*bytes);
            RolloutBatch batch;
            batch.states = std::move(f.states);
            batch.old_logps = std::move(f.old_logps);
            batch.actions = std::move(f.actions);
            batch.rewards = std::move(f.rewards);
            batch.values = std::move(f.values);
            batch.dones = std::move(f.dones);
            batch.starts = {0, batch.rewards.size()};
            batch.bootstrap_values = {f.bootstrap_value};

            std::lock_guard<std::mutex> token(update_token);
            if (updates.load() >= target_updates) break;
            const std::uint64_t version_before = store.version();
            LossBreakdown agg;
            try {
                agg = run_update(agent, cfg, master, adam, batch, mb_rng);
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lock(metrics_mutex);
                result.train.aborted = true;
                result.train.abort_reason = ex.what();
                stop.store(true);
                break;
            }
            store.publish(master);
            const std::uint64_t u = ++updates;
            const std::uint64_t staleness = version_before - f.policy_version;

            MetricsRow row;
            row.step = u * cfg.rollout_len;
            row.update = u;
            row.loss_variant = cfg.loss;
            row.eps = cfg.effective_clip_eps();
            row.policy_obj = agg.policy_objective;
            row.value_loss = agg.value_loss;
            row.entropy = agg.entropy;
            row.total_obj = agg.total_objective;
            row.unclipped_samples = agg.clip_stats.unclipped_samples;
            row.total_samples = agg.clip_stats.total_samples;
            row.unclipped_sub_entries = agg.clip_stats.unclipped_sub_entries;
            row.total_sub_entries = agg.clip_stats.total_sub_entries;
            row.staleness_mean = static_cast<double>(staleness);
            {
                std::lock_guard<std::mutex> lock(metrics_mutex);
                row.mean_ep_return = last_mean_return;
                result.staleness.push_back(staleness);
                result.version_trace.push_back(store.version());
                result.train.rows.push_back(row);
                if (metrics) metrics->write(row);
            }
            if (u >= target_updates) stop.store(true);
        }
    };

    std::vector<std::thread> samplers, trainers;
    for (std::size_t s = 0; s < cfg.samplers; ++s) samplers.emplace_back(sampler_fn, s);
    for (std::size_t t = 0; t < cfg.trainers; ++t) trainers.emplace_back(trainer_fn, t);

    for (auto& th : samplers) th.join(); // exit once stop is set by the trainers
    queue.close();
    for (auto& th : trainers) th.join();

    result.queue = queue.counters();
    result.torn_reads = torn_reads.load();
    result.train.updates = updates.load();
    result.train.env_steps = result.train.updates * cfg.rollout_len;
    result.train.params = master;
    if (!run_dir.empty()) {
        std::filesystem::create_directories(run_dir);
        // async obs-norm state lives in the samplers; checkpoints carry params only
        save_checkpoint(run_dir + "/final", master, checkpoint_meta(cfg, agent));
    }
    return result;
}

} // namespace cppo
