#pragma once

#include <stdexcept>

#include "cppo/env.hpp"
#include "cppo/rng.hpp"

namespace cppo {

// Discrete compound-action gridworld. The agent moves on a g x g grid with a
// depot cell and persistent resource cells. Compound action = (move, mode):
//   move: up / down / left / right / stay
//   mode: harvest / build / idle
// Rewards: -0.01 per step; +1 for harvesting while on a resource cell; +5 for
// building on the depot cell after at least 3 harvests (once per episode).
// Mode usefulness depends on position, so the two sub-actions are correlated.
// Observation: one-hot planes (agent, resources, depot) + harvest counter.
class GridHarvest : public Env {
public:
    static constexpr std::size_t kMoveUp = 0, kMoveDown = 1, kMoveLeft = 2,
                                 kMoveRight = 3, kMoveStay = 4;
    static constexpr std::size_t kModeHarvest = 0, kModeBuild = 1, kModeIdle = 2;
    static constexpr double kStepPenalty = -0.01;
    static constexpr double kHarvestReward = 1.0;
    static constexpr double kBuildReward = 5.0;
    static constexpr int kBuildThreshold = 3;

    explicit GridHarvest(std::size_t grid = 7, std::size_t resources = 5,
                         std::size_t max_steps = 64)
        : grid_(grid), n_resources_(resources) {
        if (grid_ < 2 || n_resources_ == 0 || n_resources_ + 2 > grid_ * grid_)
            throw std::invalid_argument("GridHarvest: bad layout parameters");
        spec_.obs_dim = 3 * grid_ * grid_ + 1;
        spec_.action_space.kind = ActionSpaceSpec::Kind::Discrete;
        spec_.action_space.sub_dims = {5, 3};
        spec_.max_episode_len = max_steps;
        spec_.reward_description =
            "-0.01/step, +1 harvest on resource, +5 build on depot after >=3 harvests";
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset(std::uint64_t seed) override {
        Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x1234567);
        resource_.assign(grid_ * grid_, 0);
        // draw distinct cells: depot, agent, resources
        auto draw_free = [&](auto&& occupied) {
            while (true) {
                const std::size_t c = rng.uniform_int(grid_ * grid_);
                if (!occupied(c)) return c;
            }
        };
        depot_ = rng.uniform_int(grid_ * grid_);
        agent_ = draw_free([&](std::size_t c) { return c == depot_; });
        for (std::size_t i = 0; i < n_resources_; ++i) {
            const std::size_t c = draw_free(
                [&](std::size_t x) { return x == depot_ || x == agent_ || resource_[x]; });
            resource_[c] = 1;
        }
        harvests_ = 0;
        built_ = false;
        steps_ = 0;
        done_ = false;
        return observe();
    }

    StepResult step(const CompoundAction& action) override {
        if (done_) throw std::runtime_error("GridHarvest::step: episode is done");
        if (action.indices.size() != 2 || action.indices[0] >= 5 || action.indices[1] >= 3)
            throw std::invalid_argument("GridHarvest::step: malformed action");
        long r = static_cast<long>(agent_ / grid_);
        long c = static_cast<long>(agent_ % grid_);
        switch (action.indices[0]) {
            case kMoveUp: r = std::max(0l, r - 1); break;
            case kMoveDown: r = std::min(static_cast<long>(grid_) - 1, r + 1); break;
            case kMoveLeft: c = std::max(0l, c - 1); break;
            case kMoveRight: c = std::min(static_cast<long>(grid_) - 1, c + 1); break;
            default: break;
        }
        agent_ = static_cast<std::size_t>(r) * grid_ + static_cast<std::size_t>(c);

        double reward = kStepPenalty;
        if (action.indices[1] == kModeHarvest && resource_[agent_]) {
            reward += kHarvestReward;
            ++harvests_;
        } else if (action.indices[1] == kModeBuild && agent_ == depot_ &&
                   harvests_ >= kBuildThreshold && !built_) {
            reward += kBuildReward;
            built_ = true;
        }

        ++steps_;
        done_ = steps_ >= spec_.max_episode_len;
        StepResult res;
        res.observation = observe();
        res.reward = reward;
        res.done = done_;
        res.info["harvests"] = static_cast<double>(harvests_);
        res.info["built"] = built_ ? 1.0 : 0.0;
        return res;
    }

    // test/oracle access
    std::size_t agent_cell() const { return agent_; }
    std::size_t depot_cell() const { return depot_; }
    const std::vector<std::uint8_t>& resource_cells() const { return resource_; }
    std::size_t grid_size() const { return grid_; }

private:
    std::vector<double> observe() const {
        std::vector<double> obs(spec_.obs_dim, 0.0);
        const std::size_t g2 = grid_ * grid_;
        obs[agent_] = 1.0;
        for (std::size_t i = 0; i < g2; ++i) obs[g2 + i] = resource_[i] ? 1.0 : 0.0;
        obs[2 * g2 + depot_] = 1.0;
        obs[3 * g2] = std::min(harvests_, 10) / 10.0;
        return obs;
    }

    EnvSpec spec_;
    std::size_t grid_, n_resources_;
    std::vector<std::uint8_t> resource_;
    std::size_t depot_ = 0, agent_ = 0;
    int harvests_ = 0;
    bool built_ = false;
    std::size_t steps_ = 0;
    bool done_ = true;
};

} // namespace cppo
