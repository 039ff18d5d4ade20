#pragma once

#include <cmath>
#include <sstream>

#include "cppo/agent.hpp"
#include "cppo/checkpoint.hpp"
#include "cppo/envs.hpp"
#include "cppo/training.hpp"

namespace cppo {

struct EvalResult {
    std::vector<double> episode_returns;
    double mean = 0.0;
    double ci95 = 0.0; // half-width, normal approximation
};

// Deterministic greedy evaluation (argmax / mean actions) of a checkpoint.
inline EvalResult evaluate(const Checkpoint& ck, Env& env, std::size_t episodes,
                           std::uint64_t seed) {
    if (episodes == 0) throw std::invalid_argument("evaluate: episodes must be > 0");

    // validate checkpoint against the env spec
    const auto& spec = env.spec();
    auto meta_at = [&](const char* k) -> std::string {
        auto it = ck.meta.find(k);
        return it == ck.meta.end() ? std::string() : it->second;
    };
    if (meta_at("obs_dim") != std::to_string(spec.obs_dim))
        throw std::runtime_error("evaluate: checkpoint obs_dim does not match env");
    std::string dims;
    for (std::size_t d : spec.action_space.sub_dims)
        dims += (dims.empty() ? "" : ",") + std::to_string(d);
    if (meta_at("sub_dims") != dims)
        throw std::runtime_error("evaluate: checkpoint action space does not match env");

    Agent agent(spec.obs_dim, spec.action_space);
    auto norm = extract_obs_norm(ck.params);

    EvalResult res;
    Rng reset_rng(seed);
    for (std::size_t e = 0; e < episodes; ++e) {
        std::vector<double> obs = env.reset(reset_rng.next_u64());
        double ep_return = 0.0;
        while (true) {
            const std::vector<double> net_obs = norm ? norm->apply(obs) : obs;
            const CompoundAction a = agent.dist(ck.params, net_obs).mode();
            StepResult sr = env.step(a);
            ep_return += sr.reward;
            if (sr.done) break;
            obs = sr.observation;
        }
        res.episode_returns.push_back(ep_return);
    }
    double s = 0.0;
    for (double r : res.episode_returns) s += r;
    res.mean = s / static_cast<double>(episodes);
    double var = 0.0;
    for (double r : res.episode_returns) var += (r - res.mean) * (r - res.mean);
    var /= static_cast<double>(episodes);
    res.ci95 = 1.96 * std::sqrt(var / static_cast<double>(episodes));
    return res;
}

// Rebuilds the env named in the checkpoint metadata.
inline std::unique_ptr<Env> env_from_checkpoint(const Checkpoint& ck) {
    auto it = ck.meta.find("env");
    if (it == ck.meta.end()) throw std::runtime_error("checkpoint has no env metadata");
    std::map<std::string, double> params;
    for (const auto& [k, v] : ck.meta)
        if (k.rfind("env.", 0) == 0) params[k.substr(4)] = std::stod(v);
    return make_env(it->second, params);
}

} // namespace cppo
