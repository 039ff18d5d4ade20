#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cppo/distributions.hpp"

namespace cppo {

struct EnvSpec {
    std::size_t obs_dim = 0;
    ActionSpaceSpec action_space;
    std::size_t max_episode_len = 0;
    std::string reward_description;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    std::map<std::string, double> info;
};

class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    virtual StepResult step(const CompoundAction& action) = 0;
};

} // namespace cppo
