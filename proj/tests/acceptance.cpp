// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--criterion N] [--work DIR]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "oracle/naive_samegame.hpp"
#include "pgmcts/bench/runner.hpp"
#include "pgmcts/bench/stats.hpp"
#include "pgmcts/mcts/episode.hpp"
#include "pgmcts/policy/gradcheck.hpp"
#include "pgmcts/policy/train.hpp"
#include "pgmcts/samegame.hpp"
#include "pgmcts/training/pipeline.hpp"

#ifndef PGMCTS_CLI_PATH
#define PGMCTS_CLI_PATH "pgmcts"
#endif

using namespace pgmcts;
namespace fs = std::filesystem;
using samegame::Action;
using samegame::Board;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path work_dir = "acceptance_work";

int cores() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::string> rows_of(const Board& b) {
    std::vector<std::string> rows;
    for (int r = 0; r < b.height(); ++r) {
        std::string s;
        for (int c = 0; c < b.width(); ++c) s.push_back(static_cast<char>('0' + b.at(r, c)));
        rows.push_back(s);
    }
    return rows;
}

// ---- 1: engine vs independent rules implementation -------------------------

struct OracleWalk {
    std::map<std::string, samegame::Score> memo;
    std::size_t transitions = 0;
    std::string mismatch;

    /// Engine DFS that compares every transition against the oracle on the way.
    samegame::Score visit(const Board& b) {
        const auto key = b.to_string();
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const auto naive = oracle::from_rows(rows_of(b), b.num_colors());
        const auto acts = samegame::legal_actions(b);
        const auto nmoves = oracle::moves(naive);
        if (acts.size() != nmoves.size()) fail(b, "legal action count");
        samegame::Score best = std::numeric_limits<samegame::Score>::min();
        if (acts.empty()) {
            if (!b.is_terminal()) fail(b, "terminal flag");
            best = samegame::terminal_adjustment(b);
            if (best != oracle::penalty_or_bonus(naive)) fail(b, "end adjustment");
        }
        for (std::size_t i = 0; i < acts.size() && i < nmoves.size(); ++i) {
            if (acts[i].row != nmoves[i].row || acts[i].col != nmoves[i].col) fail(b, "action list");
            const auto out = samegame::apply_action(b, acts[i]);
            const auto ref = oracle::play(naive, nmoves[i]);
            ++transitions;
            if (rows_of(out.next_board) != oracle::to_rows(ref.next)) fail(b, "next state");
            if (out.move_score != ref.move_score) fail(b, "move score");
            if (out.terminal != ref.terminal) fail(b, "terminal flag after move");
            if (out.terminal_adjustment != ref.adjustment) fail(b, "terminal adjustment after move");
            best = std::max(best, out.move_score + visit(out.next_board));
        }
        memo[key] = best;
        return best;
    }

    void fail(const Board& b, const char* what) {
        if (mismatch.empty()) mismatch = std::string(what) + " on\n" + b.to_string();
    }
};

Outcome c1_engine_oracle() {
    std::size_t transitions = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        CounterRng rng(derive_key(1, {i}));
        const int w = 1 + static_cast<int>(rng.below(4)), h = 1 + static_cast<int>(rng.below(4));
        const auto b = samegame::generate_board({derive_key(11, {i}), w, h, 3});
        OracleWalk walk;
        const auto engine_best = walk.visit(b);
        const auto oracle_best = oracle::best_score(oracle::from_rows(rows_of(b), 3));
        transitions += walk.transitions;
        if (!walk.mismatch.empty()) return {false, fmt("board %llu: %s", (unsigned long long)i, walk.mismatch.c_str())};
        if (engine_best != oracle_best)
            return {false, fmt("board %llu: optimal score %lld vs oracle %lld", (unsigned long long)i,
                               (long long)engine_best, oracle_best)};
    }
    return {true, fmt("200 boards, %zu transitions, all optimal scores equal", transitions)};
}

// ---- 2: MCTS reaches the DFS optimum on 3x3 boards -------------------------

samegame::Score dfs_best(const Board& b) {
    const auto acts = samegame::legal_actions(b);
    if (acts.empty()) return samegame::terminal_adjustment(b);
    samegame::Score best = std::numeric_limits<samegame::Score>::min();
    for (const auto& a : acts) {
        const auto out = samegame::apply_action(b, a);
        best = std::max(best, out.move_score + dfs_best(out.next_board));
    }
    return best;
}

Outcome c2_search_optimality() {
    int optimal = 0, boards = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto b = samegame::generate_board({derive_key(2, {i}), 3, 3, 3});
        ++boards;
        const auto best = dfs_best(b);
        mcts::SearchConfig cfg;
        cfg.simulations = 1000;
        cfg.seed = derive_key(22, {i});
        mcts::UniformEvaluator<mcts::SameGame> ev;
        const auto ep = mcts::play_episode<mcts::SameGame>(b, cfg, ev);
        if (static_cast<samegame::Score>(ep.score) == best) ++optimal;
    }
    return {optimal >= 95, fmt("%d/%d boards optimal (need >= 95)", optimal, boards)};
}

// ---- 3: normalization and selection properties -----------------------------

Outcome c3_normalization() {
    CounterRng rng(3);
    std::size_t degenerate = 0;
    for (int t = 0; t < 100000; ++t) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<mcts::EdgeStats> edges(n);
        const int kind = static_cast<int>(rng.below(4));  // 0: all equal, 1: heavy ties, else generic
        const double common = (rng.uniform() - 0.5) * 2000;
        double psum = 0;
        for (auto& e : edges) {
            e.visits = static_cast<int>(rng.below(50));
            e.virtual_losses = static_cast<int>(rng.below(4));
            e.mean_value = kind == 0 ? common
                           : kind == 1 ? std::round(rng.uniform() * 3) * 100
                                       : (rng.uniform() - 0.3) * std::pow(10.0, static_cast<double>(rng.below(6)));
            e.prior = rng.uniform() + 1e-3;
            psum += e.prior;
        }
        for (auto& e : edges) e.prior /= psum;
        const double w = rng.below(2) ? 0.01 : 0.0;
        const auto values = mcts::effective_values(edges, w);
        const auto norm = mcts::normalize_values(values);
        bool all_equal = true;
        for (double v : values) all_equal = all_equal && v == values[0];
        for (double v : norm)
            if (!(v >= -1 - 1e-9 && v <= 1 + 1e-9)) return {false, fmt("fixture %d: value %.17g outside [-1,1]", t, v)};
        if (all_equal) {
            ++degenerate;
            for (double v : norm)
                if (v != 1.0) return {false, fmt("fixture %d: degenerate case gave %.17g", t, v)};
        }
        // Scaling every return by a > 0 must not move the argmax when w = 0.
        const double a = std::exp((rng.uniform() - 0.5) * 12);
        auto scaled = edges;
        for (auto& e : scaled) {
            e.mean_value *= a;
            e.value_sum *= a;
        }
        const mcts::SelectionParams p{0.1 + rng.uniform() * 30, 0.0, false};
        if (mcts::argmax_set(mcts::selection_scores(edges, p)) != mcts::argmax_set(mcts::selection_scores(scaled, p)))
            return {false, fmt("fixture %d: argmax changed under scaling by %.6g", t, a)};
    }
    return {true, fmt("1e5 fixtures in bounds, %zu degenerate fixtures all 1, argmax scale-invariant", degenerate)};
}

// ---- 4: virtual-loss accounting --------------------------------------------

Outcome c4_virtual_loss() {
    policy::ConvPolicyNet<float> small(policy::ConvPolicyConfig{5, 5, 3, {{3, 4, true}}, 4});
    std::map<int, int> per_threads;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        CounterRng rng(derive_key(4, {i}));
        const int threads = 1 + static_cast<int>(i % 32);
        const bool model = rng.below(4) == 0;
        const int w = model ? 5 : 3 + static_cast<int>(rng.below(6));
        const int h = model ? 5 : 3 + static_cast<int>(rng.below(6));
        const int colors = model ? 3 : 2 + static_cast<int>(rng.below(4));
        Board b = samegame::generate_board({derive_key(44, {i}), w, h, colors});
        for (std::uint64_t retry = 1; b.is_terminal(); ++retry)
            b = samegame::generate_board({derive_key(44, {i, retry}), w, h, colors});
        mcts::SearchConfig cfg;
        cfg.threads = threads;
        cfg.simulations = 1 + static_cast<int>(rng.below(300));
        cfg.c_puct = 0.5 + rng.uniform() * 20;
        cfg.seed = i;
        if (rng.below(3) == 0) cfg.dirichlet_alpha = 0.3;
        std::unique_ptr<mcts::Evaluator<mcts::SameGame>> ev;
        if (model)
            ev = std::make_unique<mcts::BatchedEvaluator<mcts::SameGame>>(small, static_cast<std::size_t>(threads));
        else
            ev = std::make_unique<mcts::UniformEvaluator<mcts::SameGame>>();
        mcts::Searcher<mcts::SameGame> s(cfg, *ev);
        const auto r = s.search(b);
        std::uint64_t n = 0;
        for (const auto& e : r.root_edges) {
            n += static_cast<std::uint64_t>(e.stats.visits);
            if (e.stats.virtual_losses != 0) return {false, fmt("fixture %llu: root W = %d", (unsigned long long)i, e.stats.virtual_losses)};
        }
        const auto audit = s.audit();
        if (audit.max_virtual_losses != 0)
            return {false, fmt("fixture %llu: a tree edge kept W = %d", (unsigned long long)i, audit.max_virtual_losses)};
        if (n != static_cast<std::uint64_t>(cfg.simulations))
            return {false, fmt("fixture %llu (%d threads): sum N = %llu, k = %d", (unsigned long long)i, threads,
                               (unsigned long long)n, cfg.simulations)};
        ++per_threads[threads];
    }
    int fixtures = 0;
    for (auto& [t, c] : per_threads) fixtures += c;
    return {true, fmt("%d fixtures over 1..32 threads: every W = 0, sum of root N = k", fixtures)};
}

// ---- 5: gradient check on the reduced network ------------------------------

Outcome c5_gradcheck() {
    policy::ConvPolicyNet<double> net(policy::ConvPolicyConfig::desk(7, 7, 5, 5));
    policy::GradCheckOptions opts;
    opts.max_coordinates = 1000;
    double worst = 0.0;
    std::size_t checked = 0;
    bool ok = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng rng(derive_key(55, {s}));
        auto b = samegame::generate_board({derive_key(5, {s}), 7, 7, 5});
        for (int m = static_cast<int>(rng.below(6)); m > 0 && !b.is_terminal(); --m) {
            const auto acts = samegame::legal_actions(b);
            b = samegame::apply_action(b, acts[rng.below(acts.size())]).next_board;
        }
        opts.seed = s;
        const auto rep = policy::gradient_check(net, samegame::encode_board(b), static_cast<int>(rng.below(49)), opts);
        worst = std::max(worst, rep.max_relative_error);
        checked += rep.checked;
        ok = ok && rep.passed;
    }
    return {ok && worst < 1e-4, fmt("20 samples, %zu of %zu parameters per sample, max relative error %.3e (< 1e-4)",
                                    checked / 20, net.parameter_count(), worst)};
}

// ---- 6: overfit one batch ---------------------------------------------------

Outcome c6_overfit() {
    policy::ConvPolicyNet<float> net(policy::ConvPolicyConfig::desk(7, 7, 5, 6));
    std::vector<Planes> xs;
    std::vector<int> ys;
    for (std::uint64_t i = 0; i < 64; ++i) {
        CounterRng rng(derive_key(66, {i}));
        auto b = samegame::generate_board({derive_key(6, {i}), 7, 7, 5});
        for (int m = static_cast<int>(rng.below(8)); m > 0 && !b.is_terminal(); --m) {
            const auto acts = samegame::legal_actions(b);
            b = samegame::apply_action(b, acts[rng.below(acts.size())]).next_board;
        }
        if (b.is_terminal()) b = samegame::generate_board({derive_key(6, {i}), 7, 7, 5});
        const auto acts = samegame::legal_actions(b);
        xs.push_back(samegame::encode_board(b));
        ys.push_back(samegame::action_index(b, acts[rng.below(acts.size())]));
    }
    policy::Adam<float> adam(net.parameter_count(), {5e-4});
    std::vector<float> g(net.parameter_count());
    const double initial = net.loss(xs, ys);
    double loss = initial;
    int step = 0;
    while (step < 2000) {
        loss = net.loss_and_gradients(xs, ys, g);
        if (loss < 0.01) break;
        adam.step(net.parameters(), g);
        ++step;
    }
    loss = net.loss(xs, ys);
    return {loss < 0.01, fmt("loss %.4f -> %.5f after %d Adam steps (need < 0.01 within 2000)", initial, loss, step)};
}

// ---- 7, 8: desk-scale training and policy vs plain -------------------------

training::GenerationConfig desk_config() {
    auto cfg = training::GenerationConfig::from_preset("desk-7x7");
    cfg.seed = 7;
    cfg.workers = cores();
    return cfg;
}

std::vector<double> evaluate(const policy::PolicyModel* model, const std::vector<Board>& boards, std::uint64_t tag,
                             const training::GenerationConfig& cfg) {
    std::vector<double> scores(boards.size());
    training::parallel_for(boards.size(), cores(), [&](std::size_t i) {
        mcts::SearchConfig sc;
        sc.c_puct = cfg.c_puct;
        sc.virtual_loss_weight = cfg.virtual_loss_weight;
        sc.simulations = cfg.simulations;
        sc.rollout = mcts::RolloutMode::Random;
        sc.seed = derive_key(tag, {i});
        const auto algo = model ? bench::Algorithm::PolicyMctsRandom : bench::Algorithm::PlainMcts;
        scores[i] = static_cast<double>(bench::play_game(algo, boards[i], sc, model).row.score);
    });
    return scores;
}

std::vector<Board> board_set(std::uint64_t tag, int n) {
    std::vector<Board> out;
    for (int i = 0; i < n; ++i)
        out.push_back(samegame::generate_board({derive_key(tag, {static_cast<std::uint64_t>(i)}), 7, 7, 5}));
    return out;
}

std::unique_ptr<training::Net> desk_model(int g, bool fresh) {
    const auto cfg = desk_config();
    const auto dir = work_dir / "desk-7x7";
    if (fresh) fs::remove_all(dir);
    training::train_pipeline(cfg, dir, [](const training::GenerationReport& r) {
        std::cout << fmt("  generation %d: training mean %.1f over %d episodes (k=%d), %zu pairs, %d epochs, val loss %.3f, %.0f s\n",
                         r.generation, r.mean_score, r.episodes, r.simulations, r.samples, r.epochs, r.validation_loss,
                         r.wall_seconds)
                  << std::flush;
    });
    return std::make_unique<training::Net>(
        policy::load_model<float>(dir / training::detail::gen_file("gen", g, "model"), cfg.network_config(0)));
}

Outcome c7_training_trend() {
    const auto cfg = desk_config();
    const auto final_model = desk_model(3, true);
    const auto boards = board_set(0xe7a1, 300);
    const auto base = evaluate(nullptr, boards, 0xe7, cfg);
    std::cout << fmt("  evaluation generation 0: mean %.1f\n", bench::summarize(base).mean);
    std::vector<double> last;
    for (int g = 1; g <= 3; ++g) {
        const auto m = g == 3 ? nullptr : desk_model(g, false);
        last = evaluate(g == 3 ? final_model.get() : m.get(), boards, 0xe7, cfg);
        std::cout << fmt("  evaluation generation %d: mean %.1f\n", g, bench::summarize(last).mean) << std::flush;
    }
    const auto d = bench::paired_difference(last, base);
    return {d.ci_low > 0, fmt("gen 3 mean %.1f vs gen 0 mean %.1f; paired difference %.1f, 99%% CI [%.1f, %.1f]",
                              bench::summarize(last).mean, bench::summarize(base).mean, d.mean, d.ci_low, d.ci_high)};
}

Outcome c8_policy_beats_plain() {
    const auto cfg = desk_config();
    const auto model = desk_model(3, false);
    const auto boards = board_set(0x4e1d, 300);
    const auto plain = evaluate(nullptr, boards, 0x8e, cfg);
    const auto guided = evaluate(model.get(), boards, 0x8e, cfg);
    const auto d = bench::paired_difference(guided, plain);
    return {d.ci_low > 0, fmt("policy-mcts %.1f vs plain-mcts %.1f on 300 held-out boards; difference %.1f, 99%% CI [%.1f, %.1f]",
                              bench::summarize(guided).mean, bench::summarize(plain).mean, d.mean, d.ci_low, d.ci_high)};
}

// ---- 9: parallel throughput --------------------------------------------------

Outcome c9_throughput() {
    double rate[2] = {0, 0};
    const int threads[2] = {1, 16};
    for (int t = 0; t < 2; ++t) {
        std::uint64_t sims = 0;
        double secs = 0;
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto b = samegame::generate_board({derive_key(9, {i}), 15, 15, 5});
            mcts::SearchConfig cfg;
            cfg.threads = threads[t];
            cfg.simulations = 3000;
            cfg.c_puct = 2;
            cfg.seed = i;
            mcts::UniformEvaluator<mcts::SameGame> ev;
            mcts::Searcher<mcts::SameGame> s(cfg, ev);
            const auto r = s.search(b);
            sims += r.simulations;
            secs += r.wall_seconds;
        }
        rate[t] = static_cast<double>(sims) / secs;
    }
    const double ratio = rate[1] / rate[0];
    return {ratio >= 2.0, fmt("1 thread %.0f sims/s, 16 threads %.0f sims/s, ratio %.2f (need >= 2; %d hardware threads)",
                              rate[0], rate[1], ratio, cores())};
}

// ---- 10: determinism of the command-line tool -------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return rc;
}

Outcome c10_determinism() {
    const std::string cli = PGMCTS_CLI_PATH;
    const auto dir = work_dir / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> play_out, play_log, train_out, train_model;
    for (int rep = 0; rep < 2; ++rep) {
        const auto tag = std::to_string(rep);
        const auto p_out = dir / ("play" + tag + ".txt"), p_log = dir / ("play" + tag + ".json");
        const auto t_out = dir / ("train" + tag + ".txt"), t_dir = dir / ("train" + tag);
        if (run("\"" + cli + "\" --seed 10 --threads 1 --out \"" + p_log.string() +
                "\" play --width 8 --height 8 --colors 4 -k 300 > \"" + p_out.string() + "\" 2>/dev/null") != 0)
            return {false, "play exited with an error"};
        if (run("\"" + cli + "\" --seed 10 --threads 1 --config desk-7x7 --out \"" + t_dir.string() +
                "\" train --generations 2 --runs 20 > \"" + t_out.string() + "\" 2>/dev/null") != 0)
            return {false, "train exited with an error"};
        play_out.push_back(slurp(p_out));
        play_log.push_back(slurp(p_log));
        train_out.push_back(slurp(t_out));
        train_model.push_back(slurp(t_dir / "gen_002.model"));
    }
    // The train transcript names its output directory; compare it with that removed.
    for (auto& s : train_out) {
        for (const char* d : {"train0", "train1"})
            for (auto pos = s.find(d); pos != std::string::npos; pos = s.find(d)) s.replace(pos, 6, "trainN");
    }
    const bool same = play_out[0] == play_out[1] && play_log[0] == play_log[1] && train_out[0] == train_out[1] &&
                      train_model[0] == train_model[1] && !play_out[0].empty() && !train_model[0].empty();
    return {same, fmt("play transcript %zu bytes, episode log %zu bytes, train transcript %zu bytes, model %zu bytes: %s",
                      play_out[0].size(), play_log[0].size(), train_out[0].size(), train_model[0].size(),
                      same ? "identical across runs" : "DIFFER")};
}

// ---- 11: presets --------------------------------------------------------------

Outcome c11_presets() {
    using training::GenerationConfig;
    std::vector<std::string> bad;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    struct Row {
        const char* name;
        int d, gens, runs, sims;
        double c, alpha;
    };
    for (const Row& r : {Row{"7x7", 7, 50, 20000, 100, 30, 0.75}, Row{"10x10", 10, 50, 10000, 50, 4, 0.40},
                         Row{"15x15", 15, 66, 5000, 25, 2, 0.25}}) {
        for (const auto& c : {GenerationConfig::from_preset(r.name), training::resolve_config(r.name),
                              training::config_from_json(nlohmann::json{{"preset", r.name}})}) {
            const std::string n = r.name;
            expect(c.board_width == r.d && c.board_height == r.d, n + " board size");
            expect(c.generations == r.gens, n + " generations");
            expect(c.runs_per_generation == r.runs, n + " runs");
            expect(c.simulations == r.sims, n + " simulations");
            expect(c.c_puct == r.c, n + " c_puct");
            expect(c.dirichlet_alpha == r.alpha, n + " alpha");
            expect(c.dirichlet_epsilon == 0.25, n + " epsilon");
            expect(c.training_buffer == 1'500'000 && c.validation_buffer == 150'000, n + " buffers");
            expect(c.split == 0.9, n + " split");
            expect(c.virtual_loss_weight == 0.01, n + " w");
            expect(c.learning_rate == 5e-4 && c.batch_size == 256 && c.patience == 3, n + " optimizer");
        }
    }
    const auto desk = GenerationConfig::from_preset("desk-7x7");
    expect(desk.generations == 3 && desk.runs_per_generation == 300 && desk.simulations == 50 &&
               desk.dirichlet_alpha == 0.75 && desk.dirichlet_epsilon == 0.25 && desk.board_width == 7,
           "desk-7x7");
    const auto net = desk.network_config(0);
    expect(net.layers.size() == 4 && net.layers[0].filters == 16, "desk network");
    std::string msg = "7x7 c_puct 30, 15x15 alpha 0.25 and 66 generations and the remaining preset fields exact; desk-7x7 present";
    if (!bad.empty()) {
        msg = "mismatch:";
        for (const auto& b : bad) msg += " " + b;
    }
    return {bad.empty(), msg};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no limit
    bool limit_assumes_8_cores;
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (a == "--work" && i + 1 < argc) work_dir = argv[++i];
        else {
            std::cerr << "usage: acceptance [--criterion N] [--work DIR]\n";
            return 2;
        }
    }
    fs::create_directories(work_dir);
    const std::vector<Criterion> all{
        {1, "engine-oracle", 120, false, c1_engine_oracle},
        {2, "search-optimality", 300, false, c2_search_optimality},
        {3, "normalization-properties", 0, false, c3_normalization},
        {4, "virtual-loss-accounting", 0, false, c4_virtual_loss},
        {5, "gradient-check", 60, false, c5_gradcheck},
        {6, "overfit-one-batch", 120, false, c6_overfit},
        {7, "training-trend", 1800, true, c7_training_trend},
        {8, "policy-beats-plain", 900, false, c8_policy_beats_plain},
        {9, "parallel-throughput", 600, false, c9_throughput},
        {10, "determinism", 0, false, c10_determinism},
        {11, "training-presets", 0, false, c11_presets},
    };
    int failures = 0;
    for (const auto& c : all) {
        if (only && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.1f s", secs);
        if (c.limit_seconds > 0) {
            const bool enforce = !c.limit_assumes_8_cores || cores() >= 8;
            const bool over = secs > c.limit_seconds;
            timing += fmt(", limit %.0f s%s", c.limit_seconds, enforce ? "" : " on 8 cores, not enforced here");
            if (over && enforce) {
                out.pass = false;
                out.detail += "; over the time limit";
            }
        }
        std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << out.detail << " (" << timing
                  << ")" << std::endl;
        if (!out.pass) ++failures;
    }
    return failures ? 1 : 0;
}
