#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cppo/losses.hpp"

namespace cppo {

// Fully-resolved training configuration. Serializes to a plain "key = value"
// snapshot with every default materialized, so a run can be reproduced from
// its snapshot alone.
struct TrainConfig {
    std::string env = "gridharvest";
    std::map<std::string, double> env_params; // e.g. grid_size, resources, k, max_steps

    std::string loss = "compound";
    double w = 0.5;
    bool sub_agg_sum = false; // aggregate sub-action losses by sum instead of mean

    double gamma = 0.99;
    double lam = 0.95;
    double clip_eps = 0.2; // <= 0 or inf disables clipping
    double c1 = 1.0;
    double c2 = 0.01;
    double lr = 2.5e-4;

    std::size_t rollout_len = 128;
    std::size_t num_envs = 8;
    std::size_t minibatch = 256;
    std::size_t epochs = 4;
    std::size_t total_steps = 200000;
    std::uint64_t seed = 0;

    std::string mode = "serial"; // serial | async
    std::size_t samplers = 4;
    std::size_t trainers = 1;
    std::size_t queue_capacity = 16;

    bool adv_norm = true;
    bool grad_clip = true;
    double max_grad_norm = 0.5;
    bool value_clip = false;
    double value_clip_eps = 0.2;
    bool obs_norm = true;
    bool reward_scale = true;

    std::size_t checkpoint_interval = 0; // updates between checkpoints; 0 = final only
    std::string out_dir;

    LossVariant variant() const {
        LossVariant v = LossVariant::parse(loss, w);
        v.sum_agg = sub_agg_sum;
        return v;
    }

    double effective_clip_eps() const {
        return (clip_eps <= 0.0 || !std::isfinite(clip_eps))
                   ? std::numeric_limits<double>::infinity()
                   : clip_eps;
    }

    void validate() const {
        LossVariant::parse(loss, w);
        if (mode != "serial" && mode != "async")
            throw std::invalid_argument("mode must be serial|async");
        if (gamma < 0 || gamma > 1 || lam < 0 || lam > 1)
            throw std::invalid_argument("gamma/lam must be in [0,1]");
        if (lr <= 0) throw std::invalid_argument("lr must be > 0");
        if (rollout_len == 0 || num_envs == 0 || minibatch == 0 || epochs == 0)
            throw std::invalid_argument("rollout_len/num_envs/minibatch/epochs must be > 0");
        if (mode == "async" && (samplers == 0 || trainers == 0))
            throw std::invalid_argument("async mode needs samplers >= 1 and trainers >= 1");
        if (c1 < 0 || c2 < 0) throw std::invalid_argument("c1/c2 must be >= 0");
        if (max_grad_norm <= 0) throw std::invalid_argument("max_grad_norm must be > 0");
    }
};

namespace detail {
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace detail

inline std::string config_to_text(const TrainConfig& c) {
    std::ostringstream out;
    auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
    auto kvd = [&](const char* k, double v) { kv(k, detail::fmt_double(v)); };
    auto kvi = [&](const char* k, std::uint64_t v) { kv(k, std::to_string(v)); };
    auto kvb = [&](const char* k, bool v) { kv(k, v ? "true" : "false"); };
    kv("env", c.env);
    for (const auto& [k, v] : c.env_params) kv(("env." + k).c_str(), detail::fmt_double(v));
    kv("loss", c.loss);
    kvd("w", c.w);
    kvb("sub_agg_sum", c.sub_agg_sum);
    kvd("gamma", c.gamma);
    kvd("lam", c.lam);
    kvd("clip_eps", c.clip_eps);
    kvd("c1", c.c1);
    kvd("c2", c.c2);
    kvd("lr", c.lr);
    kvi("rollout_len", c.rollout_len);
    kvi("num_envs", c.num_envs);
    kvi("minibatch", c.minibatch);
    kvi("epochs", c.epochs);
    kvi("total_steps", c.total_steps);
    kvi("seed", c.seed);
    kv("mode", c.mode);
    kvi("samplers", c.samplers);
    kvi("trainers", c.trainers);
    kvi("queue_capacity", c.queue_capacity);
    kvb("adv_norm", c.adv_norm);
    kvb("grad_clip", c.grad_clip);
    kvd("max_grad_norm", c.max_grad_norm);
    kvb("value_clip", c.value_clip);
    kvd("value_clip_eps", c.value_clip_eps);
    kvb("obs_norm", c.obs_norm);
    kvb("reward_scale", c.reward_scale);
    kvi("checkpoint_interval", c.checkpoint_interval);
    kv("out_dir", c.out_dir);
    return out.str();
}

inline TrainConfig config_from_text(const std::string& text) {
    TrainConfig c;
    c.env_params.clear();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto d = [&] { return std::stod(val); };
        auto u = [&] { return static_cast<std::uint64_t>(std::stoull(val)); };
        auto b = [&] {
            if (val == "true") return true;
            if (val == "false") return false;
            throw std::runtime_error("bad bool for " + key + ": " + val);
        };
        if (key.rfind("env.", 0) == 0) c.env_params[key.substr(4)] = d();
        else if (key == "env") c.env = val;
        else if (key == "loss") c.loss = val;
        else if (key == "w") c.w = d();
        else if (key == "sub_agg_sum") c.sub_agg_sum = b();
        else if (key == "gamma") c.gamma = d();
        else if (key == "lam") c.lam = d();
        else if (key == "clip_eps") c.clip_eps = d();
        else if (key == "c1") c.c1 = d();
        else if (key == "c2") c.c2 = d();
        else if (key == "lr") c.lr = d();
        else if (key == "rollout_len") c.rollout_len = u();
        else if (key == "num_envs") c.num_envs = u();
        else if (key == "minibatch") c.minibatch = u();
        else if (key == "epochs") c.epochs = u();
        else if (key == "total_steps") c.total_steps = u();
        else if (key == "seed") c.seed = u();
        else if (key == "mode") c.mode = val;
        else if (key == "samplers") c.samplers = u();
        else if (key == "trainers") c.trainers = u();
        else if (key == "queue_capacity") c.queue_capacity = u();
        else if (key == "adv_norm") c.adv_norm = b();
        else if (key == "grad_clip") c.grad_clip = b();
        else if (key == "max_grad_norm") c.max_grad_norm = d();
        else if (key == "value_clip") c.value_clip = b();
        else if (key == "value_clip_eps") c.value_clip_eps = d();
        else if (key == "obs_norm") c.obs_norm = b();
        else if (key == "reward_scale") c.reward_scale = b();
        else if (key == "checkpoint_interval") c.checkpoint_interval = u();
        else if (key == "out_dir") c.out_dir = val;
        else throw std::runtime_error("unknown config key: " + key);
    }
    return c;
}

// Named hyperparameter presets for the two experiment regimes.
inline void apply_preset(TrainConfig& c, const std::string& name) {
    if (name == "mujoco-analogue") {
        // continuous-control regime with the serial stability tricks on
        c.env = "chainreach";
        c.gamma = 0.99;
        c.lam = 0.95;
        c.clip_eps = 0.2;
        c.c2 = 0.001;
        c.c1 = 1.0;
        c.lr = 2.5e-4;
        c.mode = "serial";
        c.adv_norm = true;
        c.grad_clip = true;
        c.value_clip = true;
        c.obs_norm = true;
        c.reward_scale = true;
    } else if (name == "urts-analogue") {
        // discrete compound-action regime, asynchronous architecture
        c.env = "gridharvest";
        c.gamma = 0.99;
        c.lam = 0.95;
        c.clip_eps = 0.2;
        c.c2 = 0.01;
        c.c1 = 0.5;
        c.lr = 2.5e-4;
        c.rollout_len = 512;
        c.num_envs = 8;
        c.epochs = 1;
        c.mode = "async";
        c.samplers = 4;
        c.trainers = 3;
        c.adv_norm = false;
        c.grad_clip = true;
        c.value_clip = false;
        c.obs_norm = false;
        c.reward_scale = false;
    } else {
        throw std::invalid_argument("unknown preset '" + name +
                                    "' (expected mujoco-analogue|urts-analogue)");
    }
}

} // namespace cppo
