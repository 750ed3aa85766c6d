#pragma once

// Second, independently written SameGame rules engine used only as a test oracle.
// Columns are stored bottom-up; removing a cell is erase(), so gravity and
// column packing fall out of the representation rather than being simulated.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct NaiveState {
    int height = 0;
    int width = 0;
    int colors = 0;
    std::vector<std::vector<int>> cols;  // cols[c][k] is the k-th block from the bottom

    std::string key() const {
        std::string s;
        for (const auto& c : cols) {
            for (int v : c) s.push_back(static_cast<char>('0' + v));
            s.push_back('|');
        }
        return s;
    }
};

struct NaiveMove {
    int row;  // top-based row, to compare with the engine
    int col;
    std::vector<std::pair<int, int>> cells;  // (column, height index)
};

inline NaiveState from_rows(const std::vector<std::string>& rows, int colors) {
    NaiveState s;
    s.height = static_cast<int>(rows.size());
    s.width = static_cast<int>(rows.front().size());
    s.colors = colors;
    for (int c = 0; c < s.width; ++c) {
        std::vector<int> col;
        for (int r = s.height - 1; r >= 0; --r)
            if (rows[r][c] != '0') col.push_back(rows[r][c] - '0');
        if (!col.empty()) s.cols.push_back(col);
    }
    return s;
}

inline std::vector<std::string> to_rows(const NaiveState& s) {
    std::vector<std::string> rows(s.height, std::string(s.width, '0'));
    for (std::size_t c = 0; c < s.cols.size(); ++c)
        for (std::size_t k = 0; k < s.cols[c].size(); ++k)
            rows[s.height - 1 - k][c] = static_cast<char>('0' + s.cols[c][k]);
    return rows;
}

inline int cell(const NaiveState& s, int c, int k) {
    if (c < 0 || c >= static_cast<int>(s.cols.size())) return 0;
    if (k < 0 || k >= static_cast<int>(s.cols[c].size())) return 0;
    return s.cols[c][k];
}

inline std::vector<NaiveMove> moves(const NaiveState& s) {
    std::map<std::pair<int, int>, bool> seen;
    std::vector<NaiveMove> out;
    for (int c = 0; c < static_cast<int>(s.cols.size()); ++c) {
        for (int k = 0; k < static_cast<int>(s.cols[c].size()); ++k) {
            if (seen[{c, k}]) continue;
            std::vector<std::pair<int, int>> comp;
            const int color = s.cols[c][k];
            std::function<void(int, int)> visit = [&](int cc, int kk) {
                if (cell(s, cc, kk) != color || seen[{cc, kk}]) return;
                seen[{cc, kk}] = true;
                comp.push_back({cc, kk});
                visit(cc + 1, kk);
                visit(cc - 1, kk);
                visit(cc, kk + 1);
                visit(cc, kk - 1);
            };
            visit(c, k);
            if (comp.size() < 2) continue;
            // lowest block, then leftmost
            auto rep = *std::min_element(comp.begin(), comp.end(), [](auto a, auto b) {
                return a.second != b.second ? a.second < b.second : a.first < b.first;
            });
            out.push_back({s.height - 1 - rep.second, rep.first, comp});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const NaiveMove& a, const NaiveMove& b) { return std::pair(a.row, a.col) < std::pair(b.row, b.col); });
    return out;
}

inline long long penalty_or_bonus(const NaiveState& s) {
    std::vector<int> left(s.colors + 1, 0);
    int total = 0;
    for (const auto& c : s.cols)
        for (int v : c) ++left[v], ++total;
    if (total == 0) return 1000;
    long long p = 0;
    for (int v = 1; v <= s.colors; ++v)
        if (left[v] > 0) p += static_cast<long long>(left[v] - 2) * (left[v] - 2);
    return -p;
}

struct NaiveResult {
    NaiveState next;
    long long move_score;
    bool terminal;
    long long adjustment;
};

inline NaiveResult play(const NaiveState& s, const NaiveMove& m) {
    NaiveResult r{s, 0, false, 0};
    auto cells = m.cells;
    // erase from the top down so indices stay valid
    std::sort(cells.begin(), cells.end(), [](auto a, auto b) { return a.second > b.second; });
    for (auto [c, k] : cells) r.next.cols[c].erase(r.next.cols[c].begin() + k);
    r.next.cols.erase(std::remove_if(r.next.cols.begin(), r.next.cols.end(), [](const auto& c) { return c.empty(); }),
                      r.next.cols.end());
    const long long n = static_cast<long long>(m.cells.size());
    r.move_score = (n - 2) * (n - 2);
    r.terminal = moves(r.next).empty();
    r.adjustment = r.terminal ? penalty_or_bonus(r.next) : 0;
    return r;
}

/// Maximum achievable final score by exhaustive search with memoization.
inline long long best_score(const NaiveState& s, std::map<std::string, long long>& memo) {
    const auto key = s.key();
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto ms = moves(s);
    long long best;
    if (ms.empty()) {
        best = penalty_or_bonus(s);
    } else {
        best = std::numeric_limits<long long>::min();
        for (const auto& m : ms) {
            const auto r = play(s, m);
            best = std::max(best, r.move_score + best_score(r.next, memo));
        }
    }
    memo[key] = best;
    return best;
}

inline long long best_score(const NaiveState& s) {
    std::map<std::string, long long> memo;
    return best_score(s, memo);
}

}  // namespace oracle
