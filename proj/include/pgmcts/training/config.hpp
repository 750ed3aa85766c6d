#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "pgmcts/errors.hpp"
#include "pgmcts/mcts/search.hpp"
#include "pgmcts/policy/conv_net.hpp"
#include "pgmcts/policy/train.hpp"

namespace pgmcts::training {

enum class NetworkPreset { Full, Desk };

/// Every hyperparameter of one training run.
struct GenerationConfig {
    std::string preset = "custom";
    int generations = 50;
    int runs_per_generation = 20000;
    int simulations = 100;  // k per committed move
    double c_puct = 30.0;
    double dirichlet_alpha = 0.75;
    double dirichlet_epsilon = 0.25;
    double virtual_loss_weight = 0.01;
    std::size_t training_buffer = 1'500'000;
    std::size_t validation_buffer = 150'000;
    double split = 0.90;      // fraction of each generation's pairs sent to the training buffer
    double jump_start = 4.0;  // simulation multiplier for generation 1
    int board_width = 7;
    int board_height = 7;
    int colors = 5;
    NetworkPreset network = NetworkPreset::Full;
    mcts::RolloutMode rollout = mcts::RolloutMode::PolicyGuided;  // generations >= 2; generation 1 is uniform
    double learning_rate = 5e-4;
    int batch_size = 256;
    int patience = 3;
    int max_epochs = 100;
    int workers = 1;         // concurrent episodes
    int search_threads = 1;  // threads per search tree
    bool snapshot_buffers = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (generations < 0) throw ConfigError("generations must be >= 0");
        if (runs_per_generation < 1) throw ConfigError("runs_per_generation must be >= 1");
        if (simulations < 1) throw ConfigError("simulations must be >= 1");
        if (!(c_puct > 0)) throw ConfigError("c_puct must be > 0");
        if (!(dirichlet_alpha > 0)) throw ConfigError("dirichlet_alpha must be > 0");
        if (!(dirichlet_epsilon >= 0 && dirichlet_epsilon <= 1)) throw ConfigError("dirichlet_epsilon must be in [0,1]");
        if (!(virtual_loss_weight >= 0)) throw ConfigError("virtual_loss_weight must be >= 0");
        if (training_buffer < 1 || validation_buffer < 1) throw ConfigError("buffer capacities must be > 0");
        if (!(split > 0 && split < 1)) throw ConfigError("split must be in (0,1)");
        if (!(jump_start >= 1)) throw ConfigError("jump_start must be >= 1");
        if (board_width < 1 || board_height < 1 || colors < 1 || colors > 9)
            throw ConfigError("board dimensions must be >= 1 and colors in [1,9]");
        if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
        if (batch_size < 1 || patience < 1 || max_epochs < 1)
            throw ConfigError("batch_size, patience and max_epochs must be >= 1");
        if (workers < 1 || search_threads < 1) throw ConfigError("workers and search_threads must be >= 1");
    }

    policy::ConvPolicyConfig network_config(std::uint64_t init_seed) const {
        return network == NetworkPreset::Desk
                   ? policy::ConvPolicyConfig::desk(board_height, board_width, colors, init_seed)
                   : policy::ConvPolicyConfig::full(board_height, board_width, colors, init_seed);
    }

    policy::TrainOptions train_options(std::uint64_t train_seed) const {
        policy::TrainOptions o;
        o.batch_size = batch_size;
        o.patience = patience;
        o.max_epochs = max_epochs;
        o.adam.learning_rate = learning_rate;
        o.seed = train_seed;
        return o;
    }

    /// Simulations per move in generation g (1-based).
    int simulations_for(int g) const {
        return g == 1 ? static_cast<int>(static_cast<double>(simulations) * jump_start) : simulations;
    }

    /// Named presets: "7x7", "10x10", "15x15" and the reduced "desk-7x7".
    static GenerationConfig from_preset(const std::string& name) {
        GenerationConfig c;
        c.preset = name;
        if (name == "7x7") {
            c.board_width = c.board_height = 7;
            c.generations = 50;
            c.runs_per_generation = 20000;
            c.simulations = 100;
            c.c_puct = 30;
            c.dirichlet_alpha = 0.75;
        } else if (name == "10x10") {
            c.board_width = c.board_height = 10;
            c.generations = 50;
            c.runs_per_generation = 10000;
            c.simulations = 50;
            c.c_puct = 4;
            c.dirichlet_alpha = 0.40;
        } else if (name == "15x15") {
            c.board_width = c.board_height = 15;
            c.generations = 66;
            c.runs_per_generation = 5000;
            c.simulations = 25;
            c.c_puct = 2;
            c.dirichlet_alpha = 0.25;
        } else if (name == "desk-7x7") {
            c.board_width = c.board_height = 7;
            c.generations = 3;
            c.runs_per_generation = 300;
            c.simulations = 50;
            c.c_puct = 30;
            c.dirichlet_alpha = 0.75;
            c.training_buffer = 15'000;
            c.validation_buffer = 1'500;
            c.network = NetworkPreset::Desk;
            c.rollout = mcts::RolloutMode::Random;
        } else {
            throw ConfigError("unknown preset '" + name + "' (known: 7x7, 10x10, 15x15, desk-7x7)");
        }
        return c;
    }

    static const std::vector<std::string>& preset_names() {
        static const std::vector<std::string> names{"7x7", "10x10", "15x15", "desk-7x7"};
        return names;
    }
};

inline nlohmann::json to_json(const GenerationConfig& c) {
    return {
        {"preset", c.preset},
        {"generations", c.generations},
        {"runs_per_generation", c.runs_per_generation},
        {"simulations", c.simulations},
        {"c_puct", c.c_puct},
        {"dirichlet_alpha", c.dirichlet_alpha},
        {"dirichlet_epsilon", c.dirichlet_epsilon},
        {"virtual_loss_weight", c.virtual_loss_weight},
        {"training_buffer", c.training_buffer},
        {"validation_buffer", c.validation_buffer},
        {"split", c.split},
        {"jump_start", c.jump_start},
        {"board_width", c.board_width},
        {"board_height", c.board_height},
        {"colors", c.colors},
        {"network", c.network == NetworkPreset::Desk ? "desk" : "full"},
        {"rollout", c.rollout == mcts::RolloutMode::Random ? "random" : "policy"},
        {"learning_rate", c.learning_rate},
        {"batch_size", c.batch_size},
        {"patience", c.patience},
        {"max_epochs", c.max_epochs},
        {"workers", c.workers},
        {"search_threads", c.search_threads},
        {"snapshot_buffers", c.snapshot_buffers},
        {"seed", c.seed},
    };
}

/**
 * Reads a config object. A "preset" key, if present, supplies the starting
 * values; every other key overrides one field. Unknown keys and values of the
 * wrong type are reported together in one ConfigError.
 */
inline GenerationConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    GenerationConfig c;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw ConfigError("config key 'preset' must be a string");
        c = GenerationConfig::from_preset(j["preset"].get<std::string>());
    }
    std::vector<std::string> bad;
    auto read = [&](const std::string& key, const nlohmann::json& v) {
        auto num = [&](auto& field) {
            using F = std::remove_reference_t<decltype(field)>;
            if constexpr (std::is_floating_point_v<F>) {
                if (!v.is_number()) throw std::invalid_argument("number");
            } else {
                if (!v.is_number_integer()) throw std::invalid_argument("integer");
                if constexpr (std::is_unsigned_v<F>)
                    if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) throw std::invalid_argument("integer >= 0");
            }
            field = v.get<F>();
        };
        if (key == "preset") return;
        if (key == "generations") return num(c.generations);
        if (key == "runs_per_generation") return num(c.runs_per_generation);
        if (key == "simulations") return num(c.simulations);
        if (key == "c_puct") return num(c.c_puct);
        if (key == "dirichlet_alpha") return num(c.dirichlet_alpha);
        if (key == "dirichlet_epsilon") return num(c.dirichlet_epsilon);
        if (key == "virtual_loss_weight") return num(c.virtual_loss_weight);
        if (key == "training_buffer") return num(c.training_buffer);
        if (key == "validation_buffer") return num(c.validation_buffer);
        if (key == "split") return num(c.split);
        if (key == "jump_start") return num(c.jump_start);
        if (key == "board_width") return num(c.board_width);
        if (key == "board_height") return num(c.board_height);
        if (key == "colors") return num(c.colors);
        if (key == "learning_rate") return num(c.learning_rate);
        if (key == "batch_size") return num(c.batch_size);
        if (key == "patience") return num(c.patience);
        if (key == "max_epochs") return num(c.max_epochs);
        if (key == "workers") return num(c.workers);
        if (key == "search_threads") return num(c.search_threads);
        if (key == "seed") return num(c.seed);
        if (key == "snapshot_buffers") {
            if (!v.is_boolean()) throw std::invalid_argument("boolean");
            c.snapshot_buffers = v.get<bool>();
            return;
        }
        if (key == "network") {
            const auto s = v.is_string() ? v.get<std::string>() : "";
            if (s == "full") c.network = NetworkPreset::Full;
            else if (s == "desk") c.network = NetworkPreset::Desk;
            else throw std::invalid_argument("\"full\" or \"desk\"");
            return;
        }
        if (key == "rollout") {
            const auto s = v.is_string() ? v.get<std::string>() : "";
            if (s == "random") c.rollout = mcts::RolloutMode::Random;
            else if (s == "policy") c.rollout = mcts::RolloutMode::PolicyGuided;
            else throw std::invalid_argument("\"random\" or \"policy\"");
            return;
        }
        throw std::out_of_range("unknown key");
    };
    for (const auto& [key, value] : j.items()) {
        try {
            read(key, value);
        } catch (const std::out_of_range&) {
            bad.push_back("'" + key + "' (unknown key)");
        } catch (const std::invalid_argument& e) {
            bad.push_back("'" + key + "' (expected " + e.what() + ")");
        } catch (const nlohmann::json::exception&) {
            bad.push_back("'" + key + "' (value out of range)");
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid config keys:";
        for (const auto& b : bad) msg += " " + b;
        throw ConfigError(msg);
    }
    c.validate();
    return c;
}

inline GenerationConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Preset name or JSON config file path.
inline GenerationConfig resolve_config(const std::string& name_or_path) {
    for (const auto& n : GenerationConfig::preset_names())
        if (n == name_or_path) return GenerationConfig::from_preset(n);
    return load_config_file(name_or_path);
}

}  // namespace pgmcts::training
