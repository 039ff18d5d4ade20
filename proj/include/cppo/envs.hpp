#pragma once

#include "cppo/envs/chainreach.hpp"
#include "cppo/envs/gridharvest.hpp"

namespace cppo {

// Env factory keyed by the config name string.
inline std::unique_ptr<Env> make_env(const std::string& name,
                                     const std::map<std::string, double>& params = {}) {
    auto get = [&](const char* key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "gridharvest") {
        return std::make_unique<GridHarvest>(
            static_cast<std::size_t>(get("grid_size", 7)),
            static_cast<std::size_t>(get("resources", 5)),
            static_cast<std::size_t>(get("max_steps", 64)));
    }
    if (name == "chainreach") {
        return std::make_unique<ChainReach>(
            static_cast<std::size_t>(get("k", 6)),
            static_cast<std::size_t>(get("max_steps", 200)));
    }
    throw std::invalid_argument("unknown env '" + name + "' (expected gridharvest|chainreach)");
}

} // namespace cppo
