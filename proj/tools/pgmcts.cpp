// pgmcts: play, train, benchmark and verify policy-guided MCTS on SameGame.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "pgmcts/bench/runner.hpp"
#include "pgmcts/bench/stats.hpp"
#include "pgmcts/mcts/config_json.hpp"
#include "pgmcts/policy/gradcheck.hpp"
#include "pgmcts/policy/serialize.hpp"
#include "pgmcts/samegame.hpp"
#include "pgmcts/training/pipeline.hpp"

using namespace pgmcts;
namespace fs = std::filesystem;

namespace {

/// Bad arguments or configuration; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string config;
    std::string model;
    std::string out;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

struct SearchFlags {
    int simulations = 0;
    double seconds = 0.0;
    double c_puct = 0.0;
    bool reuse_tree = false;
    CLI::Option* sims_opt = nullptr;
    CLI::Option* seconds_opt = nullptr;
    CLI::Option* cpuct_opt = nullptr;

    void add(CLI::App* sub, int default_sims) {
        simulations = default_sims;
        sims_opt = sub->add_option("--simulations,-k", simulations, "Simulations per committed move");
        seconds_opt = sub->add_option("--seconds", seconds, "Wall-clock budget per move (replaces --simulations)");
        cpuct_opt = sub->add_option("--c-puct", c_puct, "PUCT exploration constant");
        sub->add_flag("--reuse-tree", reuse_tree, "Keep the chosen subtree between moves");
    }

    /// Config file first, then explicit flags; the common seed and threads win over both.
    mcts::SearchConfig resolve(const Common& common, int default_threads = 1) const {
        mcts::SearchConfig cfg;
        cfg.simulations = simulations;
        cfg.threads = default_threads;
        if (!common.config.empty()) cfg = mcts::load_search_config(common.config, cfg);
        if (sims_opt->count()) cfg.simulations = simulations;
        if (seconds_opt->count()) cfg.time_budget_seconds = seconds;
        if (cpuct_opt->count()) cfg.c_puct = c_puct;
        if (reuse_tree) cfg.reuse_tree = true;
        if (common.seed_opt->count() || common.config.empty()) cfg.seed = common.seed;
        if (common.threads_opt->count()) cfg.threads = common.threads;
        if (cfg.simulations < 1 && cfg.time_budget_seconds <= 0)
            throw UsageError("search budget is zero: pass --simulations >= 1 or --seconds > 0");
        cfg.validate();
        return cfg;
    }
};

std::unique_ptr<policy::ConvPolicyNet<float>> load_model_flag(const Common& c) {
    if (c.model.empty()) return nullptr;
    return std::make_unique<policy::ConvPolicyNet<float>>(policy::load_model<float>(c.model));
}

std::string action_str(samegame::Action a) { return "(" + std::to_string(a.row) + "," + std::to_string(a.col) + ")"; }

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path);
    return file;
}

// ---- play -------------------------------------------------------------------

struct PlayArgs {
    std::string board_file;
    int width = 15, height = 15, colors = 5;
    std::string algorithm = "plain-mcts";
    SearchFlags search;
};

int cmd_play(const Common& common, const PlayArgs& a) {
    const auto algo = bench::parse_algorithm(a.algorithm);
    samegame::Board board = a.board_file.empty()
                                ? samegame::generate_board({common.seed, a.width, a.height, a.colors})
                                : samegame::load_position_file(a.board_file, a.colors);
    const auto cfg = a.search.resolve(common);
    const auto model = load_model_flag(common);
    if (bench::needs_model(algo) && !model) throw UsageError(a.algorithm + " requires --model");

    std::cout << "board " << board.width() << "x" << board.height() << ", " << board.num_colors() << " colors, "
              << board.block_count() << " blocks\n"
              << board.to_string();
    const auto game = bench::play_game(algo, board, cfg, model.get());
    if (game.actions.empty()) std::cout << "board is terminal: 0 moves\n";
    auto b = board;
    for (std::size_t i = 0; i < game.actions.size(); ++i) {
        const auto outcome = samegame::apply_action(b, game.actions[i]);
        std::cout << "move " << i + 1 << " " << action_str(game.actions[i]) << " cleared " << outcome.cleared
                  << " score " << outcome.move_score;
        if (outcome.terminal) std::cout << " end " << (outcome.terminal_adjustment >= 0 ? "+" : "") << outcome.terminal_adjustment;
        std::cout << "\n";
        b = outcome.next_board;
    }
    std::cout << "final score " << game.row.score << " (" << game.actions.size() << " moves, "
              << game.row.simulations << " simulations, " << game.row.expansions << " expansions, "
              << game.row.leaf_expansions << " leaf expansions; verified by replay)\n";
    std::cerr << "wall " << game.row.wall_seconds << " s\n";
    if (!common.out.empty()) {
        nlohmann::json acts = nlohmann::json::array();
        for (const auto& x : game.actions) acts.push_back({x.row, x.col});
        std::ofstream f(common.out, std::ios::trunc);
        f << nlohmann::json{{"algorithm", game.row.algorithm},
                            {"board", board.to_string()},
                            {"colors", board.num_colors()},
                            {"actions", acts},
                            {"score", game.row.score},
                            {"simulations", game.row.simulations},
                            {"expansions", game.row.expansions},
                            {"leaf_expansions", game.row.leaf_expansions}}
                 .dump()
          << "\n";
        if (!f) throw std::runtime_error("cannot write " + common.out);
    }
    return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::optional<int> generations;
    std::optional<int> runs;
};

int cmd_train(const Common& common, const TrainArgs& a) {
    if (common.config.empty()) throw UsageError("train needs --config <preset|file.json> (presets: 7x7, 10x10, 15x15, desk-7x7)");
    auto cfg = training::resolve_config(common.config);
    if (common.seed_opt->count()) cfg.seed = common.seed;
    if (common.threads_opt->count()) cfg.workers = common.threads;
    if (a.generations) cfg.generations = *a.generations;
    if (a.runs) cfg.runs_per_generation = *a.runs;
    cfg.validate();
    const fs::path dir = common.out.empty() ? fs::path("runs") / cfg.preset : fs::path(common.out);
    std::cout << "training preset " << cfg.preset << ": " << cfg.generations << " generations x "
              << cfg.runs_per_generation << " runs, k=" << cfg.simulations << ", c_puct=" << cfg.c_puct
              << ", alpha=" << cfg.dirichlet_alpha << ", checkpoints in " << dir.string() << "\n";
    const auto res = training::train_pipeline(cfg, dir, [](const training::GenerationReport& r) {
        auto j = training::to_json(r);
        j.erase("wall_seconds");
        std::cout << j.dump() << std::endl;
        std::cerr << "generation " << r.generation << " took " << r.wall_seconds << " s\n";
    });
    if (res.resumed_from > 0) std::cout << "resumed after generation " << res.resumed_from << "\n";
    if (res.model)
        std::cout << "final model " << (dir / training::detail::gen_file("gen", cfg.generations, "model")).string() << "\n";
    else
        std::cout << "no generations run; the policy is uniform\n";
    return 0;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    int boards = 500;
    int runs = 5;
    std::vector<std::string> algorithms{"plain-mcts"};
    int width = 15, height = 15, colors = 5;
    int plain_threads = 16;
    int policy_threads = 100;
    bool no_timing = false;
    SearchFlags search;
};

int cmd_bench(const Common& common, const BenchArgs& a) {
    if (a.boards < 1 || a.runs < 1) throw UsageError("--boards and --runs must be >= 1");
    if (a.algorithms.empty()) throw UsageError("at least one algorithm is required");
    std::vector<bench::Algorithm> algos;
    for (const auto& s : a.algorithms) algos.push_back(bench::parse_algorithm(s));
    const auto model = load_model_flag(common);
    for (auto al : algos)
        if (bench::needs_model(al) && !model) throw UsageError(bench::to_string(al) + " requires --model");
    const auto base = a.search.resolve(common);

    std::ofstream file;
    std::ostream& csv = open_out(common.out, file);
    csv << bench::kCsvHeader << "\n";
    std::map<std::string, std::vector<bench::BenchmarkRow>> cells;
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        const auto algo = algos[ai];
        for (int bi = 0; bi < a.boards; ++bi) {
            const auto board_seed = derive_key(common.seed, {0xbe4cULL, static_cast<std::uint64_t>(bi)});
            const auto board = samegame::generate_board({board_seed, a.width, a.height, a.colors});
            for (int r = 0; r < a.runs; ++r) {
                auto cfg = base;
                cfg.seed = derive_key(common.seed, {0x7e57ULL, static_cast<std::uint64_t>(bi), static_cast<std::uint64_t>(r)});
                if (!common.threads_opt->count() && common.config.empty())
                    cfg.threads = bench::needs_model(algo) ? a.policy_threads : a.plain_threads;
                auto game = bench::play_game(algo, board, cfg, model.get());
                game.row.board_id = std::to_string(bi);
                game.row.run_id = r;
                csv << bench::csv_line(game.row, !a.no_timing) << "\n";
                cells[game.row.algorithm].push_back(game.row);
            }
        }
    }
    csv.flush();
    std::ostream& summary = (&csv == &std::cout) ? std::cerr : std::cout;
    summary << "algorithm            games      mean   99% CI              sims/game  expansions/game  leaf/game\n";
    for (const auto& [name, rows] : cells) {
        std::vector<double> scores;
        double sims = 0, exps = 0, leaf = 0;
        for (const auto& r : rows) {
            scores.push_back(static_cast<double>(r.score));
            sims += static_cast<double>(r.simulations);
            exps += static_cast<double>(r.expansions);
            leaf += static_cast<double>(r.leaf_expansions);
        }
        const auto s = bench::summarize(scores);
        const double n = static_cast<double>(rows.size());
        char line[256];
        std::snprintf(line, sizeof line, "%-20s %5zu %9.1f   [%8.1f, %8.1f] %10.0f %16.0f %10.1f\n", name.c_str(), s.n,
                      s.mean, s.ci_low, s.ci_high, sims / n, exps / n, leaf / n);
        summary << line;
    }
    return 0;
}

// ---- positions --------------------------------------------------------------

struct PositionsArgs {
    std::string dir;
    int count = 20;
    int colors = 5;
    std::string algorithm = "plain-mcts";
    SearchFlags search;
};

int cmd_positions(const Common& common, const PositionsArgs& a) {
    const auto algo = bench::parse_algorithm(a.algorithm);
    const auto model = load_model_flag(common);
    if (bench::needs_model(algo) && !model) throw UsageError(a.algorithm + " requires --model");
    if (!a.search.sims_opt->count() && !a.search.seconds_opt->count() && common.config.empty())
        throw UsageError("positions needs an explicit budget: --simulations >= 1 or --seconds > 0");
    const auto cfg = a.search.resolve(common);

    std::vector<std::string> missing;
    std::vector<std::pair<std::string, samegame::Board>> boards;
    for (int i = 1; i <= a.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%02d.txt", i);
        const auto path = fs::path(a.dir) / name;
        if (!fs::exists(path)) {
            missing.push_back(name);
            continue;
        }
        boards.emplace_back(name, samegame::load_position_file(path.string(), a.colors));
    }
    if (!missing.empty()) {
        std::string msg = "missing positions in " + a.dir + ":";
        for (const auto& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }
    std::ofstream file;
    std::ostream& out = open_out(common.out, file);
    out << "position,score,greedy_score,moves\n";
    std::int64_t total = 0, greedy_total = 0;
    for (std::size_t i = 0; i < boards.size(); ++i) {
        auto c = cfg;
        c.seed = derive_key(cfg.seed, {0x9051ULL, i});
        const auto game = bench::play_game(algo, boards[i].second, c, model.get());
        const auto greedy = bench::greedy_play(boards[i].second);
        if (samegame::replay_score(boards[i].second, greedy.actions) != greedy.score)
            throw ContractError("greedy score failed replay");
        total += game.row.score;
        greedy_total += greedy.score;
        out << boards[i].first << "," << game.row.score << "," << greedy.score << "," << game.actions.size() << "\n";
    }
    out << "total," << total << "," << greedy_total << ",\n";
    out.flush();
    std::ostream& footer = (&out == &std::cout) ? std::cout : std::cerr;
    footer << "# " << a.algorithm << " total " << total << ", greedy total " << greedy_total << "\n"
           << "# published reference totals (for comparison only): parallel MCTS 60891, policy-guided MCTS 78072\n";
    return 0;
}

// ---- gradcheck --------------------------------------------------------------

struct GradArgs {
    std::string network = "desk";
    int width = 7, height = 7, colors = 5;
    int samples = 20;
    std::size_t coordinates = 1000;
};

int cmd_gradcheck(const Common& common, const GradArgs& a) {
    policy::ConvPolicyConfig net_cfg;
    if (a.network == "desk") net_cfg = policy::ConvPolicyConfig::desk(a.height, a.width, a.colors, common.seed);
    else if (a.network == "full") net_cfg = policy::ConvPolicyConfig::full(a.height, a.width, a.colors, common.seed);
    else throw UsageError("--network must be desk or full");
    policy::ConvPolicyNet<double> net(net_cfg);
    policy::GradCheckOptions opts;
    opts.max_coordinates = a.coordinates;
    double worst = 0.0;
    bool ok = true;
    std::cout << "network " << a.network << " " << a.width << "x" << a.height << "x" << a.colors << ", "
              << net.parameter_count() << " parameters\n";
    for (int s = 0; s < a.samples; ++s) {
        const auto key = derive_key(common.seed, {0x96adULL, static_cast<std::uint64_t>(s)});
        auto board = samegame::generate_board({key, a.width, a.height, a.colors});
        CounterRng rng(derive_key(key, {1}));
        for (int m = static_cast<int>(rng.below(6)); m > 0; --m) {
            const auto acts = samegame::legal_actions(board);
            if (acts.empty()) break;
            board = samegame::apply_action(board, acts[rng.below(acts.size())]).next_board;
        }
        const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(net.output_size())));
        opts.seed = key;
        const auto rep = policy::gradient_check(net, samegame::encode_board(board), target, opts);
        worst = std::max(worst, rep.max_relative_error);
        ok = ok && rep.passed;
        std::printf("sample %2d: %zu coordinates, max relative error %.3e, max absolute error (tiny) %.3e %s\n", s,
                    rep.checked, rep.max_relative_error, rep.max_absolute_error, rep.passed ? "ok" : "FAIL");
    }
    std::printf("max relative error %.3e (tolerance 1e-4): %s\n", worst, ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

// ---- selftest ---------------------------------------------------------------

int cmd_selftest(const Common& common) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };
    {
        const auto b = samegame::parse_position("111\n112\n223\n", 3);
        const auto out = samegame::apply_action(b, {1, 0});
        check("group of 5 scores 9", out.move_score == 9 && out.cleared == 5);
    }
    {
        const auto b = samegame::parse_position("11\n11\n", 1);
        const auto out = samegame::apply_action(b, {1, 0});
        check("full clear earns +1000", out.terminal && out.reward() == 1004);
    }
    check("stuck board penalty", samegame::terminal_penalty(samegame::parse_position("1\n2\n1\n3\n1\n3\n", 3)) == 2);
    {
        const auto b = samegame::generate_board({common.seed, 6, 6, 3});
        const auto g = bench::greedy_play(b);
        check("greedy replay", samegame::replay_score(b, g.actions) == g.score);
    }
    {
        mcts::SearchConfig cfg;
        cfg.simulations = 50;
        cfg.seed = common.seed;
        const auto b = samegame::generate_board({common.seed, 5, 5, 3});
        mcts::UniformEvaluator<mcts::SameGame> uni;
        mcts::Searcher<mcts::SameGame> s(cfg, uni);
        const auto r = s.search(b);
        std::uint64_t visits = 0;
        for (const auto& e : r.root_edges) visits += e.stats.visits;
        const auto audit = s.audit();
        check("search conserves visits", visits == 50 && audit.max_virtual_losses == 0 && audit.visit_conservation);
    }
    {
        policy::ConvPolicyNet<double> net({4, 4, 3, {{3, 4, true}, {3, 3, false}}, common.seed});
        const auto x = samegame::encode_board(samegame::generate_board({common.seed, 4, 4, 3}));
        check("gradient check (tiny network)", policy::gradient_check(net, x, 3).passed);
    }
    {
        policy::ConvPolicyNet<float> net(policy::ConvPolicyConfig::desk(5, 5, 3, common.seed));
        const auto back = policy::deserialize_model<float>(policy::serialize_model(net));
        check("model serialization round trip",
              std::equal(net.parameters().begin(), net.parameters().end(), back.parameters().begin()));
    }
    std::cout << (failures ? "selftest FAILED\n" : "selftest passed\n");
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Policy-guided tree-parallel MCTS for SameGame"};
    app.require_subcommand(1);
    Common common;
    common.seed_opt = app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
    common.threads_opt = app.add_option("--threads", common.threads, "Search threads (train: concurrent episodes)");
    app.add_option("--config", common.config, "Config: search JSON (play, bench, positions) or preset/JSON (train)");
    app.add_option("--model", common.model, "Policy model file");
    app.add_option("--out", common.out, "Output file or directory");

    PlayArgs play;
    auto* play_cmd = app.add_subcommand("play", "Play one board and print the move sequence");
    play_cmd->fallthrough();
    play_cmd->add_option("--board", play.board_file, "Position file (default: random board from --seed)");
    play_cmd->add_option("--width", play.width);
    play_cmd->add_option("--height", play.height);
    play_cmd->add_option("--colors", play.colors);
    play_cmd->add_option("--algorithm", play.algorithm, "plain-mcts | policy-mcts-random | policy-mcts-guided | greedy");
    play.search.add(play_cmd, 100);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Run the generation pipeline (resumes from --out)");
    train_cmd->fallthrough();
    train_cmd->add_option("--generations", train.generations, "Override the number of generations");
    train_cmd->add_option("--runs", train.runs, "Override runs per generation");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark algorithms on seeded boards; CSV to --out");
    bench_cmd->fallthrough();
    bench_cmd->add_option("--boards", bench_args.boards)->capture_default_str();
    bench_cmd->add_option("--runs", bench_args.runs)->capture_default_str();
    bench_cmd->add_option("--algorithms", bench_args.algorithms)->delimiter(',');
    bench_cmd->add_option("--width", bench_args.width);
    bench_cmd->add_option("--height", bench_args.height);
    bench_cmd->add_option("--colors", bench_args.colors);
    bench_cmd->add_option("--plain-threads", bench_args.plain_threads)->capture_default_str();
    bench_cmd->add_option("--policy-threads", bench_args.policy_threads)->capture_default_str();
    bench_cmd->add_flag("--no-timing", bench_args.no_timing, "Write wall_seconds as 0 (byte-identical reruns)");
    bench_args.search.add(bench_cmd, 100);

    PositionsArgs pos;
    auto* pos_cmd = app.add_subcommand("positions", "Play the standard positions 01.txt..20.txt from a directory");
    pos_cmd->fallthrough();
    pos_cmd->add_option("--dir", pos.dir)->required();
    pos_cmd->add_option("--count", pos.count)->capture_default_str();
    pos_cmd->add_option("--colors", pos.colors)->capture_default_str();
    pos_cmd->add_option("--algorithm", pos.algorithm);
    pos.search.add(pos_cmd, 0);

    GradArgs grad;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the network gradients");
    grad_cmd->fallthrough();
    grad_cmd->add_option("--network", grad.network, "desk | full");
    grad_cmd->add_option("--width", grad.width);
    grad_cmd->add_option("--height", grad.height);
    grad_cmd->add_option("--colors", grad.colors);
    grad_cmd->add_option("--samples", grad.samples)->capture_default_str();
    grad_cmd->add_option("--coordinates", grad.coordinates, "Parameters checked per sample (0 = all)")->capture_default_str();

    auto* self_cmd = app.add_subcommand("selftest", "Quick internal consistency checks");
    self_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*play_cmd) return cmd_play(common, play);
        if (*train_cmd) return cmd_train(common, train);
        if (*bench_cmd) return cmd_bench(common, bench_args);
        if (*pos_cmd) return cmd_positions(common, pos);
        if (*grad_cmd) return cmd_gradcheck(common, grad);
        if (*self_cmd) return cmd_selftest(common);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
