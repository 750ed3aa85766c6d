#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pgmcts/samegame/board.hpp"

namespace pgmcts::samegame {

/**
 * Parses the plain-text position format: one line per row, one digit per cell.
 *
 * Digit k in 1..num_colors is color k. '0' is accepted as an empty cell so
 * that mid-game positions round-trip; the result must still be in normal form.
 * A trailing '\r' per line and a missing final newline are tolerated.
 */
inline Board parse_position(std::string_view text, int num_colors = 5) {
    if (num_colors < 1 || num_colors > kMaxColors) throw DimensionError("num_colors must be in 1..9");
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("position is empty");

    const int width = static_cast<int>(lines.front().size());
    if (width == 0) throw ParseError("empty line", 1);
    const int height = static_cast<int>(lines.size());
    std::vector<Color> cells;
    cells.reserve(static_cast<std::size_t>(width) * height);
    for (int i = 0; i < height; ++i) {
        const auto line = lines[i];
        if (static_cast<int>(line.size()) != width)
            throw ParseError("expected " + std::to_string(width) + " digits, found " + std::to_string(line.size()), i + 1);
        for (char ch : line) {
            if (ch < '0' || ch > '9') throw ParseError(std::string("non-digit character '") + ch + "'", i + 1);
            const int v = ch - '0';
            if (v > num_colors)
                throw ParseError("color " + std::to_string(v) + " outside 1.." + std::to_string(num_colors), i + 1);
            cells.push_back(static_cast<Color>(v));
        }
    }
    try {
        return Board(width, height, num_colors, std::move(cells));
    } catch (const ContractError& e) {
        throw ParseError(e.what());
    }
}

inline std::string format_position(const Board& b) { return b.to_string(); }

inline Board load_position_file(const std::filesystem::path& path, int num_colors = 5) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open position file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_position(ss.str(), num_colors);
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
}

inline void save_position_file(const Board& b, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write position file " + path.string());
    out << format_position(b);
}

}  // namespace pgmcts::samegame
