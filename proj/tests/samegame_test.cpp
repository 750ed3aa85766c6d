#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracle/naive_samegame.hpp"
#include "pgmcts/samegame.hpp"

using namespace pgmcts;
using namespace pgmcts::samegame;

namespace {

Board board_from(const std::vector<std::string>& rows, int colors) {
    std::string text;
    for (const auto& r : rows) text += r + "\n";
    return parse_position(text, colors);
}

std::vector<std::string> rows_of(const Board& b) {
    std::vector<std::string> rows;
    std::istringstream in(b.to_string());
    for (std::string line; std::getline(in, line);) rows.push_back(line);
    return rows;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("pgmcts_" + name);
}

}  // namespace

TEST(GenerateBoard, SingleColorFillsEveryCell) {
    const Board b = generate_board({42, 2, 2, 1});
    for (Color c : b.cells()) EXPECT_EQ(c, 1);
}

TEST(GenerateBoard, SameSeedSameBoard) {
    EXPECT_EQ(generate_board({7, 15, 15, 5}), generate_board({7, 15, 15, 5}));
    EXPECT_NE(generate_board({7, 15, 15, 5}), generate_board({8, 15, 15, 5}));
}

TEST(GenerateBoard, ColorFrequenciesWithinFiveSigma) {
    // 10000 cells, p = 1/5: mean 2000, sigma = sqrt(10000 * 0.2 * 0.8) = 40.
    const Board b = generate_board({1234, 100, 100, 5});
    const auto counts = b.color_counts();
    for (int c = 1; c <= 5; ++c) EXPECT_NEAR(counts[c], 2000, 5 * 40) << "color " << c;
    EXPECT_TRUE(b.is_normal_form());
}

TEST(GenerateBoard, RejectsBadDimensions) {
    EXPECT_THROW(generate_board({1, 0, 5, 5}), DimensionError);
    EXPECT_THROW(generate_board({1, 5, 5, 0}), DimensionError);
}

TEST(FindGroups, CheckerHasNoGroups) {
    EXPECT_TRUE(find_groups(board_from({"121", "212", "121"}, 2)).empty());
}

TEST(FindGroups, MonochromeTwoByTwo) {
    const auto g = find_groups(board_from({"11", "11"}, 1));
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].size(), 4);
}

TEST(FindGroups, TopRowVersusRest) {
    const auto g = find_groups(board_from({"111", "222", "222"}, 2));
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].color, 1);
    EXPECT_EQ(g[0].size(), 3);
    EXPECT_EQ(g[1].color, 2);
    EXPECT_EQ(g[1].size(), 6);
}

TEST(GroupRepresentative, BottomThenLeft) {
    EXPECT_EQ(group_representative({1, {{2, 4}, {3, 4}}}), (Action{3, 4}));
    EXPECT_EQ(group_representative({1, {{2, 4}, {2, 5}}}), (Action{2, 4}));
    EXPECT_EQ(group_representative({1, {{2, 3}, {3, 3}, {3, 2}}}), (Action{3, 2}));
    EXPECT_THROW(group_representative({1, {{0, 0}}}), ContractError);
}

TEST(LegalActions, Basics) {
    EXPECT_TRUE(legal_actions(Board(7, 7, 5)).empty());
    EXPECT_EQ(legal_actions(board_from({"11", "11"}, 1)), (std::vector<Action>{{1, 0}}));
    EXPECT_TRUE(legal_actions(board_from({"12", "21"}, 2)).empty());
}

TEST(LegalActions, CanonicalRowMajorOrder) {
    const Board b = board_from({"1122", "3344", "1212"}, 4);
    const auto acts = legal_actions(b);
    ASSERT_EQ(acts.size(), 4u);
    EXPECT_TRUE(std::is_sorted(acts.begin(), acts.end()));
    EXPECT_EQ(acts.front(), (Action{0, 0}));
}

TEST(ApplyAction, ScoresAndPhysics) {
    // Column 0 holds a vertical group of 5.
    const Board b = board_from({"12", "13", "12", "13", "12"}, 3);
    const auto out = apply_action(b, {4, 0});
    EXPECT_EQ(out.cleared, 5);
    EXPECT_EQ(out.move_score, 9);
    EXPECT_TRUE(out.next_board.is_normal_form());
    // column 1 shifted left
    EXPECT_EQ(out.next_board.at(0, 0), 2);
    EXPECT_EQ(out.next_board.at(4, 0), 2);
    EXPECT_EQ(out.next_board.at(0, 1), kEmpty);
}

TEST(ApplyAction, PairScoresZero) {
    const auto out = apply_action(board_from({"12", "12", "33"}, 3), {2, 0});
    EXPECT_EQ(out.cleared, 2);
    EXPECT_EQ(out.move_score, 0);
}

TEST(ApplyAction, ClearingTheBoardEarnsBonus) {
    const auto out = apply_action(board_from({"11", "11"}, 1), {1, 0});
    EXPECT_TRUE(out.terminal);
    EXPECT_TRUE(out.next_board.empty());
    EXPECT_EQ(out.move_score, 4);
    EXPECT_EQ(out.terminal_adjustment, 1000);
    EXPECT_EQ(out.reward(), 1004);
}

TEST(ApplyAction, GravityThenColumnShift) {
    const Board b = board_from({"213", "113", "221"}, 3);
    // group of 1s at (1,0),(1,1),(0,1); representative (1,0)
    const auto out = apply_action(b, {1, 0});
    EXPECT_EQ(rows_of(out.next_board), (std::vector<std::string>{"003", "203", "221"}));
}

TEST(ApplyAction, RejectsIllegalMoves) {
    const Board b = board_from({"113", "123"}, 3);
    EXPECT_THROW(apply_action(b, {1, 1}), IllegalMoveError);  // singleton
    EXPECT_THROW(apply_action(b, {0, 0}), IllegalMoveError);  // not the lowest-left cell
    EXPECT_THROW(apply_action(b, {5, 0}), IllegalMoveError);
    try {
        apply_action(b, {0, 1});
        FAIL();
    } catch (const IllegalMoveError& e) {
        EXPECT_EQ(e.row(), 0);
        EXPECT_EQ(e.col(), 1);
        EXPECT_NE(std::string(e.what()).find("(0,1)"), std::string::npos);
    }
}

TEST(TerminalPenalty, LiteralFormula) {
    // three 1s, one 2 and two 3s, none adjacent: (3-2)^2 + (1-2)^2 + (2-2)^2
    EXPECT_EQ(terminal_penalty(board_from({"1", "2", "1", "3", "1", "3"}, 3)), 2);
    EXPECT_EQ(terminal_penalty(board_from({"12", "21"}, 2)), 0);
    EXPECT_EQ(terminal_penalty(board_from({"1"}, 1)), 1);
    EXPECT_EQ(terminal_penalty(board_from({"121", "212"}, 2)), 2);
}

TEST(TerminalPenalty, ContractViolations) {
    EXPECT_THROW(terminal_penalty(Board(3, 3, 2)), ContractError);
    EXPECT_THROW(terminal_penalty(board_from({"11"}, 1)), ContractError);
}

TEST(TerminalPenalty, AppliedAsNegativeAdjustment) {
    const auto out = apply_action(board_from({"1", "2", "2"}, 2), {2, 0});
    EXPECT_TRUE(out.terminal);
    EXPECT_EQ(out.terminal_adjustment, -1);
}

TEST(EncodeBoard, EmptyBoard) {
    const Planes p = encode_board(Board(7, 7, 5));
    EXPECT_EQ(p.rows, 9);
    EXPECT_EQ(p.cols, 9);
    EXPECT_EQ(p.channels, 6);
    for (int r = 1; r <= 7; ++r)
        for (int c = 1; c <= 7; ++c) {
            EXPECT_EQ(p.at(r, c, 0), 1.0f);
            for (int k = 1; k <= 5; ++k) EXPECT_EQ(p.at(r, c, k), 0.0f);
        }
}

TEST(EncodeBoard, OneHotAndZeroPadding) {
    const Board b = generate_board({3, 6, 4, 5});
    const Planes p = encode_board(b);
    double interior = 0;
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) {
            double s = 0;
            for (int k = 0; k < p.channels; ++k) s += p.at(r, c, k);
            const bool pad = r == 0 || c == 0 || r == p.rows - 1 || c == p.cols - 1;
            EXPECT_EQ(s, pad ? 0.0 : 1.0);
            if (!pad) interior += s;
        }
    EXPECT_EQ(interior, 6 * 4);
}

TEST(EncodeBoard, CellOffsetByPadding) {
    const Board b = board_from({"31", "11"}, 3);
    const Planes p = encode_board(b);
    EXPECT_EQ(p.at(1, 1, 3), 1.0f);
    EXPECT_EQ(p.at(1, 1, 1), 0.0f);
    EXPECT_EQ(p.at(0, 0, 3), 0.0f);
}

TEST(PositionFile, MonochromeLoad) {
    const auto path = temp_file("mono.txt");
    {
        std::ofstream out(path);
        for (int i = 0; i < 15; ++i) out << std::string(15, '1') << "\n";
    }
    const Board b = load_position_file(path);
    EXPECT_EQ(b.width(), 15);
    EXPECT_EQ(b.height(), 15);
    for (Color c : b.cells()) EXPECT_EQ(c, 1);
    std::filesystem::remove(path);
}

TEST(PositionFile, RoundTripIsByteIdentical) {
    const auto src = temp_file("rt_src.txt");
    const auto dst = temp_file("rt_dst.txt");
    save_position_file(generate_board({99, 15, 15, 5}), src);
    save_position_file(load_position_file(src), dst);
    std::ifstream a(src, std::ios::binary), b(dst, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().size(), 15u * 16u);
    std::filesystem::remove(src);
    std::filesystem::remove(dst);
}

TEST(PositionFile, MalformedInputsReportLine) {
    std::string text;
    for (int i = 0; i < 15; ++i) text += std::string(i == 6 ? 14 : 15, '2') + "\n";
    try {
        parse_position(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 7);
    }
    try {
        parse_position("12\n1x\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    try {
        parse_position("12\n17\n", 5);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(parse_position(""), ParseError);
    EXPECT_THROW(parse_position("11\n10\n"), ParseError);  // hole below a block
    EXPECT_NO_THROW(parse_position("10\n11\n"));
}

TEST(PositionFile, MissingFileIsParseError) {
    EXPECT_THROW(load_position_file(temp_file("does_not_exist.txt")), ParseError);
}

// Property: physics invariants over random boards and random legal moves.
TEST(Properties, RandomPlayKeepsInvariants) {
    CounterRng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int w = 1 + static_cast<int>(rng.below(8));
        const int h = 1 + static_cast<int>(rng.below(8));
        const int colors = 1 + static_cast<int>(rng.below(5));
        const Board first = generate_board({rng(), w, h, colors});
        Board b = first;
        std::vector<Action> played;
        Score total = 0;
        while (true) {
            const auto acts = legal_actions(b);
            EXPECT_EQ(acts.empty(), find_groups(b).empty());
            EXPECT_EQ(acts.empty(), b.is_terminal());
            if (acts.empty()) break;
            const Action a = acts[rng.below(acts.size())];
            const auto before = b.color_counts();
            const auto out = apply_action(b, a);
            const auto again = apply_action(b, a);
            EXPECT_EQ(out.next_board, again.next_board);
            EXPECT_EQ(out.reward(), again.reward());
            EXPECT_TRUE(out.next_board.is_normal_form());
            EXPECT_EQ(out.next_board.block_count(), b.block_count() - out.cleared);
            const auto after = out.next_board.color_counts();
            const Color cleared_color = b.at(a);
            for (int c = 1; c <= colors; ++c) {
                if (c == cleared_color) EXPECT_EQ(after[c], before[c] - out.cleared);
                else EXPECT_EQ(after[c], before[c]);
            }
            EXPECT_EQ(out.move_score, static_cast<Score>(out.cleared - 2) * (out.cleared - 2));
            total += out.reward();
            played.push_back(a);
            b = out.next_board;
        }
        EXPECT_EQ(replay_score(first, played), played.empty() ? terminal_adjustment(first) : total);
    }
}

TEST(Properties, ScoreIdentityAgainstNaiveReplay) {
    CounterRng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const Board start = generate_board({rng(), 5, 5, 3});
        Board b = start;
        std::vector<Action> played;
        Score total = 0;
        auto naive = oracle::from_rows(rows_of(start), 3);
        long long naive_total = 0;
        for (auto acts = legal_actions(b); !acts.empty(); acts = legal_actions(b)) {
            const Action a = acts[rng.below(acts.size())];
            const auto out = apply_action(b, a);
            total += out.reward();
            played.push_back(a);
            b = out.next_board;
            const auto nm = oracle::moves(naive);
            auto it = std::find_if(nm.begin(), nm.end(), [&](const auto& m) { return m.row == a.row && m.col == a.col; });
            ASSERT_NE(it, nm.end());
            const auto nr = oracle::play(naive, *it);
            naive_total += nr.move_score + nr.adjustment;
            naive = nr.next;
        }
        if (played.empty()) total = terminal_adjustment(start);
        if (played.empty()) naive_total = oracle::penalty_or_bonus(naive);
        EXPECT_EQ(replay_score(start, played), total);
        EXPECT_EQ(naive_total, total);
    }
}

TEST(Properties, ExhaustiveAgreementOnTinyBoards) {
    CounterRng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = 2 + static_cast<int>(rng.below(3));
        const int h = 2 + static_cast<int>(rng.below(3));
        const Board start = generate_board({rng(), w, h, 3});
        // engine DFS
        std::function<Score(const Board&)> dfs = [&](const Board& b) -> Score {
            const auto acts = legal_actions(b);
            if (acts.empty()) return terminal_adjustment(b);
            Score best = std::numeric_limits<Score>::min();
            for (const auto& a : acts) {
                const auto out = apply_action(b, a);
                best = std::max(best, out.move_score + dfs(out.next_board));
            }
            return best;
        };
        EXPECT_EQ(dfs(start), oracle::best_score(oracle::from_rows(rows_of(start), 3)));
    }
}
