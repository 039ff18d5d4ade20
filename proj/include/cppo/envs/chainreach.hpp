#pragma once

#include <stdexcept>

#include "cppo/env.hpp"
#include "cppo/rng.hpp"

namespace cppo {

// Continuous compound-action toy: a 1-D point-mass chain driven toward +x.
// k torque dimensions, one per mass; each dimension is its own sub-action.
//
// Dynamics (explicit Euler, step dt):
//   f_i  = a_i + ks*(x_{i+1} - x_i - rest) - ks*(x_i - x_{i-1} - rest)
//          (missing neighbor terms dropped at the chain ends)
//   v_i' = damping * (v_i + dt * f_i)
//   x_i' = clamp(x_i + dt * v_i', -wall, wall)
// Actions are clamped to [-1, 1] before use.
//
// Reward = delta(x_head) - 0.05*||a||^2 + 0.05 survival bonus, head = mass 0.
// Observation: [x_head, gap deviations (k-1), velocities (k)] -> dim 2k.
class ChainReach : public Env {
public:
    static constexpr double kDt = 0.05;
    static constexpr double kDamping = 0.95;
    static constexpr double kSpring = 2.0;
    static constexpr double kRest = 0.5;
    static constexpr double kWall = 10.0;
    static constexpr double kActionCost = 0.05;
    static constexpr double kSurvivalBonus = 0.05;

    explicit ChainReach(std::size_t k = 6, std::size_t max_steps = 200) : k_(k) {
        if (k_ < 1) throw std::invalid_argument("ChainReach: k must be >= 1");
        spec_.obs_dim = 2 * k_;
        spec_.action_space.kind = ActionSpaceSpec::Kind::Continuous;
        spec_.action_space.sub_dims.assign(k_, 1);
        spec_.max_episode_len = max_steps;
        spec_.reward_description =
            "head forward speed - 0.05*||a||^2 + 0.05 survival bonus";
    }

    const EnvSpec& spec() const override { return spec_; }

    // Chain starts at rest spacing (zero spring force), rigidly offset by a
    // seeded uniform draw in [-0.5, 0.5].
    std::vector<double> reset(std::uint64_t seed) override {
        Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x7654321);
        const double base = rng.uniform(-0.5, 0.5);
        x_.resize(k_);
        v_.assign(k_, 0.0);
        for (std::size_t i = 0; i < k_; ++i)
            x_[i] = base - static_cast<double>(i) * kRest;
        steps_ = 0;
        done_ = false;
        return observe();
    }

    StepResult step(const CompoundAction& action) override {
        if (done_) throw std::runtime_error("ChainReach::step: episode is done");
        if (action.values.size() != k_)
            throw std::invalid_argument("ChainReach::step: action arity mismatch");
        std::vector<double> a(k_);
        for (std::size_t i = 0; i < k_; ++i) a[i] = std::clamp(action.values[i], -1.0, 1.0);

        const double head_before = x_[0];
        std::vector<double> f(k_);
        for (std::size_t i = 0; i < k_; ++i) {
            f[i] = a[i];
            if (i + 1 < k_) f[i] += kSpring * (x_[i + 1] - x_[i] + kRest);
            if (i > 0) f[i] -= kSpring * (x_[i] - x_[i - 1] + kRest);
        }
        for (std::size_t i = 0; i < k_; ++i) {
            v_[i] = kDamping * (v_[i] + kDt * f[i]);
            x_[i] = std::clamp(x_[i] + kDt * v_[i], -kWall, kWall);
        }

        double cost = 0.0;
        for (double ai : a) cost += ai * ai;
        const double reward = (x_[0] - head_before) - kActionCost * cost + kSurvivalBonus;

        ++steps_;
        done_ = steps_ >= spec_.max_episode_len;
        StepResult res;
        res.observation = observe();
        res.reward = reward;
        res.done = done_;
        res.info["head_x"] = x_[0];
        return res;
    }

    // test/oracle access
    const std::vector<double>& positions() const { return x_; }
    const std::vector<double>& velocities() const { return v_; }
    void set_state(std::vector<double> x, std::vector<double> v) {
        if (x.size() != k_ || v.size() != k_)
            throw std::invalid_argument("ChainReach::set_state: size mismatch");
        x_ = std::move(x);
        v_ = std::move(v);
    }

private:
    std::vector<double> observe() const {
        std::vector<double> obs;
        obs.reserve(2 * k_);
        obs.push_back(x_[0] / kWall);
        for (std::size_t i = 1; i < k_; ++i)
            obs.push_back(x_[i - 1] - x_[i] - kRest); // gap deviation
        for (double vi : v_) obs.push_back(vi);
        return obs;
    }

    EnvSpec spec_;
    std::size_t k_;
    std::vector<double> x_, v_;
    std::size_t steps_ = 0;
    bool done_ = true;
};

} // namespace cppo
