#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/mcts/search.hpp"

namespace pgmcts::mcts {

/**
 * Search settings from a JSON object, applied on top of `base`.
 *
 * Keys: c_puct, virtual_loss_weight, simulations, rollout ("random" | "policy"),
 * threads, dirichlet_alpha (null disables noise), dirichlet_epsilon, seed,
 * reuse_tree, batch_size, batch_timeout_us, time_budget_seconds.
 */
inline SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {}) {
    if (!j.is_object()) throw ConfigError("search config must be a JSON object");
    std::vector<std::string> bad;
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "c_puct") base.c_puct = v.get<double>();
            else if (key == "virtual_loss_weight") base.virtual_loss_weight = v.get<double>();
            else if (key == "simulations") base.simulations = v.get<int>();
            else if (key == "threads") base.threads = v.get<int>();
            else if (key == "dirichlet_epsilon") base.dirichlet_epsilon = v.get<double>();
            else if (key == "seed") base.seed = v.get<std::uint64_t>();
            else if (key == "reuse_tree") base.reuse_tree = v.get<bool>();
            else if (key == "batch_size") base.batch_size = v.get<std::size_t>();
            else if (key == "batch_timeout_us") base.batch_timeout = std::chrono::microseconds(v.get<std::int64_t>());
            else if (key == "time_budget_seconds") base.time_budget_seconds = v.get<double>();
            else if (key == "dirichlet_alpha") {
                if (v.is_null()) base.dirichlet_alpha.reset();
                else base.dirichlet_alpha = v.get<double>();
            } else if (key == "rollout") {
                const auto s = v.get<std::string>();
                if (s == "random") base.rollout = RolloutMode::Random;
                else if (s == "policy") base.rollout = RolloutMode::PolicyGuided;
                else bad.push_back("'rollout' (expected \"random\" or \"policy\")");
            } else {
                bad.push_back("'" + key + "' (unknown key)");
            }
        } catch (const nlohmann::json::exception&) {
            bad.push_back("'" + key + "' (wrong type)");
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid search config keys:";
        for (const auto& b : bad) msg += " " + b;
        throw ConfigError(msg);
    }
    base.validate();
    return base;
}

inline SearchConfig load_search_config(const std::string& path, SearchConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return search_config_from_json(nlohmann::json::parse(in), base);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace pgmcts::mcts
