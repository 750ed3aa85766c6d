#pragma once

#include <chrono>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pgmcts/bench/greedy.hpp"
#include "pgmcts/errors.hpp"
#include "pgmcts/mcts/episode.hpp"
#include "pgmcts/policy/model.hpp"
#include "pgmcts/samegame.hpp"

namespace pgmcts::bench {

enum class Algorithm { PlainMcts, PolicyMctsRandom, PolicyMctsGuided, Greedy };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::PlainMcts: return "plain-mcts";
        case Algorithm::PolicyMctsRandom: return "policy-mcts-random";
        case Algorithm::PolicyMctsGuided: return "policy-mcts-guided";
        case Algorithm::Greedy: return "greedy";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    for (auto a : {Algorithm::PlainMcts, Algorithm::PolicyMctsRandom, Algorithm::PolicyMctsGuided, Algorithm::Greedy})
        if (to_string(a) == s) return a;
    throw ConfigError("unknown algorithm '" + s + "' (plain-mcts, policy-mcts-random, policy-mcts-guided, greedy)");
}

inline bool needs_model(Algorithm a) {
    return a == Algorithm::PolicyMctsRandom || a == Algorithm::PolicyMctsGuided;
}

/// One played game. Counters are totals over all committed moves.
struct BenchmarkRow {
    std::string algorithm;
    std::string board_id;
    int run_id = 0;
    std::int64_t score = 0;
    std::uint64_t simulations = 0;
    std::uint64_t expansions = 0;
    std::uint64_t leaf_expansions = 0;
    double wall_seconds = 0.0;
};

inline constexpr const char* kCsvHeader =
    "algorithm,board_id,run_id,score,simulations,expansions,leaf_expansions,wall_seconds";

/// wall_seconds is printed as 0 when `timing` is false, which makes reruns byte-identical.
inline std::string csv_line(const BenchmarkRow& r, bool timing = true) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.6f", timing ? r.wall_seconds : 0.0);
    return r.algorithm + "," + r.board_id + "," + std::to_string(r.run_id) + "," + std::to_string(r.score) + "," +
           std::to_string(r.simulations) + "," + std::to_string(r.expansions) + "," +
           std::to_string(r.leaf_expansions) + "," + wall;
}

struct PlayedGame {
    std::vector<samegame::Action> actions;
    std::vector<double> rewards;
    BenchmarkRow row;
};

/**
 * Plays one game with the given algorithm and re-verifies the score by replaying
 * the actions through the engine. `base` supplies budget, threads, c_puct and
 * seed; its rollout mode is overridden by the algorithm.
 */
inline PlayedGame play_game(Algorithm algo, const samegame::Board& board, mcts::SearchConfig base,
                            const policy::PolicyModel* model) {
    using G = mcts::SameGame;
    PlayedGame out;
    out.row.algorithm = to_string(algo);
    const auto t0 = std::chrono::steady_clock::now();
    if (algo == Algorithm::Greedy) {
        auto g = greedy_play(board);
        out.actions = std::move(g.actions);
        out.row.score = g.score;
    } else {
        if (needs_model(algo) && !model) throw ConfigError(to_string(algo) + " needs a policy model (--model)");
        if (model && model->output_size() != board.cell_count())
            throw ShapeError("model output size " + std::to_string(model->output_size()) + " does not match board " +
                             std::to_string(board.width()) + "x" + std::to_string(board.height()));
        base.rollout = algo == Algorithm::PolicyMctsGuided ? mcts::RolloutMode::PolicyGuided : mcts::RolloutMode::Random;
        std::unique_ptr<mcts::Evaluator<G>> eval;
        if (!needs_model(algo))
            eval = std::make_unique<mcts::UniformEvaluator<G>>();
        else if (base.threads > 1)
            eval = std::make_unique<mcts::BatchedEvaluator<G>>(
                *model, base.batch_size ? base.batch_size : static_cast<std::size_t>(base.threads), base.batch_timeout);
        else
            eval = std::make_unique<mcts::ModelEvaluator<G>>(*model);
        const auto ep = mcts::play_episode<G>(board, base, *eval);
        out.actions = ep.actions;
        out.rewards = ep.rewards;
        out.row.score = static_cast<std::int64_t>(ep.score);
        for (const auto& t : ep.telemetry) {
            out.row.simulations += t.simulations;
            out.row.expansions += t.expansions;
            out.row.leaf_expansions += t.leaf_expansions;
        }
    }
    out.row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto replayed = samegame::replay_score(board, out.actions);
    if (replayed != out.row.score)
        throw ContractError("score " + std::to_string(out.row.score) + " does not match replay " + std::to_string(replayed));
    return out;
}

}  // namespace pgmcts::bench
