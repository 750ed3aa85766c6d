#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "pgmcts/mcts/episode.hpp"
#include "pgmcts/policy/serialize.hpp"
#include "pgmcts/policy/train.hpp"
#include "pgmcts/samegame.hpp"
#include "pgmcts/training/buffer.hpp"
#include "pgmcts/training/config.hpp"

namespace pgmcts::training {

using Net = policy::ConvPolicyNet<float>;

struct GenerationReport {
    int generation = 0;
    double mean_score = 0.0;
    double stddev_score = 0.0;
    int episodes = 0;
    std::size_t samples = 0;  // (state, action) pairs produced this generation
    int simulations = 0;      // per move
    int epochs = 0;
    int best_epoch = 0;
    double train_loss = 0.0;       // at the best epoch
    double validation_loss = 0.0;  // at the best epoch
    std::size_t training_buffer_size = 0;
    std::size_t validation_buffer_size = 0;
    std::size_t training_buffer_generations = 0;  // distinct generation tags held
    double wall_seconds = 0.0;

    /// Equality on everything except wall time.
    bool same_results(const GenerationReport& o) const {
        return generation == o.generation && mean_score == o.mean_score && stddev_score == o.stddev_score &&
               episodes == o.episodes && samples == o.samples && simulations == o.simulations && epochs == o.epochs &&
               best_epoch == o.best_epoch && train_loss == o.train_loss && validation_loss == o.validation_loss &&
               training_buffer_size == o.training_buffer_size && validation_buffer_size == o.validation_buffer_size &&
               training_buffer_generations == o.training_buffer_generations;
    }
};

inline nlohmann::json to_json(const GenerationReport& r) {
    return {{"generation", r.generation},
            {"mean_score", r.mean_score},
            {"stddev_score", r.stddev_score},
            {"episodes", r.episodes},
            {"samples", r.samples},
            {"simulations", r.simulations},
            {"epochs", r.epochs},
            {"best_epoch", r.best_epoch},
            {"train_loss", r.train_loss},
            {"validation_loss", r.validation_loss},
            {"training_buffer_size", r.training_buffer_size},
            {"validation_buffer_size", r.validation_buffer_size},
            {"training_buffer_generations", r.training_buffer_generations},
            {"wall_seconds", r.wall_seconds}};
}

inline GenerationReport report_from_json(const nlohmann::json& j) {
    GenerationReport r;
    r.generation = j.at("generation").get<int>();
    r.mean_score = j.at("mean_score").get<double>();
    r.stddev_score = j.at("stddev_score").get<double>();
    r.episodes = j.at("episodes").get<int>();
    r.samples = j.at("samples").get<std::size_t>();
    r.simulations = j.at("simulations").get<int>();
    r.epochs = j.at("epochs").get<int>();
    r.best_epoch = j.at("best_epoch").get<int>();
    r.train_loss = j.at("train_loss").get<double>();
    r.validation_loss = j.at("validation_loss").get<double>();
    r.training_buffer_size = j.at("training_buffer_size").get<std::size_t>();
    r.validation_buffer_size = j.at("validation_buffer_size").get<std::size_t>();
    r.training_buffer_generations = j.at("training_buffer_generations").get<std::size_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
}

/// One finished training episode, with enough to replay it.
struct EpisodeRecord {
    std::uint64_t id = 0;
    std::uint64_t board_seed = 0;
    samegame::Board start;
    std::vector<samegame::Action> actions;
    double score = 0.0;
};

struct GenerationOutput {
    std::unique_ptr<Net> model;
    GenerationReport report;
    std::vector<EpisodeRecord> episodes;
};

/// Seed of the start board of training episode i in generation g.
inline std::uint64_t training_board_seed(const GenerationConfig& cfg, int g, std::uint64_t i) {
    return derive_key(cfg.seed, {0xb0a2dULL, static_cast<std::uint64_t>(g), i});
}

/**
 * Runs `count` independent jobs on up to `workers` threads. Job i writes only
 * its own result slot, so output order does not depend on scheduling.
 */
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < std::min<int>(workers, static_cast<int>(count)); ++t)
            pool.emplace_back([&] {
                while (!failed.load()) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed.store(true);
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

/// Search settings for training episodes of generation g.
inline mcts::SearchConfig training_search_config(const GenerationConfig& cfg, int g, std::uint64_t episode) {
    mcts::SearchConfig sc;
    sc.c_puct = cfg.c_puct;
    sc.virtual_loss_weight = cfg.virtual_loss_weight;
    sc.simulations = cfg.simulations_for(g);
    sc.rollout = g == 1 ? mcts::RolloutMode::Random : cfg.rollout;
    sc.threads = cfg.search_threads;
    sc.dirichlet_alpha = cfg.dirichlet_alpha;
    sc.dirichlet_epsilon = cfg.dirichlet_epsilon;
    sc.seed = derive_key(cfg.seed, {0x5eedULL, static_cast<std::uint64_t>(g), episode});
    return sc;
}

/**
 * One generation: play runs_per_generation episodes guided by `previous`
 * (uniform when null, allowed only for g = 1), move their pairs into the
 * buffers and train a freshly initialized network on the buffers.
 */
inline GenerationOutput run_generation(int g, const GenerationConfig& cfg, const policy::PolicyModel* previous,
                                       ReplayBuffer& train, ReplayBuffer& validation) {
    if (g < 1) throw ContractError("generations are numbered from 1");
    if (!previous && g != 1) throw ContractError("generation " + std::to_string(g) + " needs the previous policy");
    const auto t0 = std::chrono::steady_clock::now();
    const auto n = static_cast<std::size_t>(cfg.runs_per_generation);

    GenerationOutput out;
    out.episodes.resize(n);
    std::vector<std::vector<TrainSample>> per_episode(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        const auto bseed = training_board_seed(cfg, g, i);
        const auto board = samegame::generate_board({bseed, cfg.board_width, cfg.board_height, cfg.colors});
        const auto sc = training_search_config(cfg, g, i);
        mcts::UniformEvaluator<mcts::SameGame> uniform;
        std::unique_ptr<mcts::Evaluator<mcts::SameGame>> guided;
        if (previous) guided = std::make_unique<mcts::ModelEvaluator<mcts::SameGame>>(*previous);
        auto ep = mcts::play_episode<mcts::SameGame>(board, sc, previous ? *guided : uniform);
        auto& rec = out.episodes[i];
        rec.id = i;
        rec.board_seed = bseed;
        rec.start = board;
        rec.actions = ep.actions;
        rec.score = ep.score;
        for (std::size_t s = 0; s < ep.length(); ++s)
            per_episode[i].push_back({samegame::encode_board(ep.states[s]),
                                      samegame::action_index(ep.states[s], ep.actions[s]),
                                      static_cast<std::uint32_t>(g), i, static_cast<std::uint32_t>(s)});
    });

    std::vector<TrainSample> temp;
    for (auto& v : per_episode)
        for (auto& s : v) temp.push_back(std::move(s));
    const std::size_t produced = temp.size();
    shuffle_samples(temp, derive_key(cfg.seed, {0x5aff1eULL, static_cast<std::uint64_t>(g)}));
    split_and_append(std::move(temp), cfg.split, train, validation);

    const auto train_set = train.to_vector();
    const auto valid_set = validation.to_vector();
    out.model = std::make_unique<Net>(cfg.network_config(derive_key(cfg.seed, {0x1417ULL, static_cast<std::uint64_t>(g)})));
    const auto hist = policy::train_epochs(*out.model, std::span<const TrainSample>(train_set),
                                           std::span<const TrainSample>(valid_set),
                                           cfg.train_options(derive_key(cfg.seed, {0x7a17ULL, static_cast<std::uint64_t>(g)})));

    auto& rep = out.report;
    rep.generation = g;
    rep.episodes = static_cast<int>(n);
    rep.samples = produced;
    rep.simulations = cfg.simulations_for(g);
    double sum = 0.0, sq = 0.0;
    for (const auto& e : out.episodes) sum += e.score;
    rep.mean_score = sum / static_cast<double>(n);
    for (const auto& e : out.episodes) sq += (e.score - rep.mean_score) * (e.score - rep.mean_score);
    rep.stddev_score = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
    rep.epochs = static_cast<int>(hist.validation_loss.size());
    rep.best_epoch = hist.best_epoch;
    rep.train_loss = hist.train_loss[static_cast<std::size_t>(hist.best_epoch - 1)];
    rep.validation_loss = hist.best_validation_loss;
    rep.training_buffer_size = train.size();
    rep.validation_buffer_size = validation.size();
    rep.training_buffer_generations = train.generations().size();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct PipelineResult {
    std::unique_ptr<Net> model;  // null: zero generations ran, the policy is uniform
    std::vector<GenerationReport> reports;
    int resumed_from = 0;        // generations found complete in the checkpoint directory
};

namespace detail {

inline std::string gen_file(const char* stem, int g, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03d.%s", stem, g, ext);
    return buf;
}

inline std::vector<GenerationReport> read_reports(const std::filesystem::path& path) {
    std::vector<GenerationReport> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto r = report_from_json(nlohmann::json::parse(line));
            if (r.generation != static_cast<int>(out.size()) + 1) break;
            out.push_back(r);
        } catch (const nlohmann::json::exception&) {
            break;  // a partially written last line
        }
    }
    return out;
}

}  // namespace detail

/**
 * Runs all generations. With a checkpoint directory, each finished generation
 * leaves gen_NNN.model, its buffer snapshots and one line in reports.jsonl; a
 * later call with the same directory and config continues after the last
 * complete generation.
 */
inline PipelineResult train_pipeline(const GenerationConfig& cfg,
                                     const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt,
                                     const std::function<void(const GenerationReport&)>& on_report = {}) {
    namespace fs = std::filesystem;
    cfg.validate();
    PipelineResult result;
    ReplayBuffer train(cfg.training_buffer), validation(cfg.validation_buffer);
    int start = 1;

    if (checkpoint_dir) {
        fs::create_directories(*checkpoint_dir);
        const auto cfg_path = *checkpoint_dir / "config.json";
        if (fs::exists(cfg_path)) {
            std::ifstream in(cfg_path);
            nlohmann::json stored;
            try {
                stored = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw LoadError(cfg_path.string() + ": " + e.what());
            }
            auto mine = to_json(cfg);
            // Worker counts do not change results; a run may be extended to more generations.
            for (const char* k : {"workers", "generations"}) {
                stored.erase(k);
                mine.erase(k);
            }
            if (stored != mine)
                throw ConfigError(checkpoint_dir->string() + " holds a run with a different config");
        } else {
            std::ofstream(cfg_path) << to_json(cfg).dump(2) << "\n";
        }
        auto done = detail::read_reports(*checkpoint_dir / "reports.jsonl");
        if (static_cast<int>(done.size()) > cfg.generations) done.resize(static_cast<std::size_t>(cfg.generations));
        if (!done.empty()) {
            const int last = static_cast<int>(done.size());
            if (!cfg.snapshot_buffers)
                throw ConfigError("cannot resume from generation " + std::to_string(last) +
                                  " without buffer snapshots (snapshot_buffers is false)");
            result.model = std::make_unique<Net>(policy::load_model<float>(
                *checkpoint_dir / detail::gen_file("gen", last, "model"), cfg.network_config(0)));
            train = load_buffer(*checkpoint_dir / detail::gen_file("train", last, "buf"), cfg.training_buffer);
            validation = load_buffer(*checkpoint_dir / detail::gen_file("valid", last, "buf"), cfg.validation_buffer);
            result.reports = done;
            result.resumed_from = last;
            start = last + 1;
        }
        // Rewrite the log so a torn last line does not precede new entries.
        std::ofstream log(*checkpoint_dir / "reports.jsonl", std::ios::trunc);
        for (const auto& r : result.reports) log << to_json(r).dump() << "\n";
    }

    for (int g = start; g <= cfg.generations; ++g) {
        auto out = run_generation(g, cfg, result.model.get(), train, validation);
        if (checkpoint_dir) {
            const auto& dir = *checkpoint_dir;
            policy::save_model(*out.model, dir / detail::gen_file("gen", g, "model"));
            if (cfg.snapshot_buffers) {
                save_buffer(train, dir / detail::gen_file("train", g, "buf"));
                save_buffer(validation, dir / detail::gen_file("valid", g, "buf"));
            }
            {
                std::ofstream ep(dir / detail::gen_file("episodes", g, "jsonl"), std::ios::trunc);
                for (const auto& e : out.episodes) {
                    nlohmann::json acts = nlohmann::json::array();
                    for (const auto& a : e.actions) acts.push_back({a.row, a.col});
                    ep << nlohmann::json{{"episode", e.id}, {"board_seed", e.board_seed}, {"actions", acts},
                                         {"score", e.score}}
                              .dump()
                       << "\n";
                }
            }
            std::ofstream log(dir / "reports.jsonl", std::ios::app);
            log << to_json(out.report).dump() << "\n";
            log.flush();
            if (!log) throw LoadError("cannot append to " + (dir / "reports.jsonl").string());
            if (g > 1) {
                fs::remove(dir / detail::gen_file("train", g - 1, "buf"));
                fs::remove(dir / detail::gen_file("valid", g - 1, "buf"));
            }
        }
        if (on_report) on_report(out.report);
        result.reports.push_back(out.report);
        result.model = std::move(out.model);
    }
    return result;
}

}  // namespace pgmcts::training
