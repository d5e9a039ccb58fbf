#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "taskgen/errors.hpp"

namespace taskgen {

enum class Dir : std::uint8_t { N, E, S, W };

inline char dir_char(Dir d) {
    switch (d) {
        case Dir::N: return '^';
        case Dir::E: return '>';
        case Dir::S: return 'v';
        case Dir::W: return '<';
    }
    return '?';
}

inline std::string dir_name(Dir d) {
    switch (d) {
        case Dir::N: return "N";
        case Dir::E: return "E";
        case Dir::S: return "S";
        case Dir::W: return "W";
    }
    return "?";
}

inline Dir dir_from_name(const std::string& s) {
    if (s == "N") return Dir::N;
    if (s == "E") return Dir::E;
    if (s == "S") return Dir::S;
    if (s == "W") return Dir::W;
    throw FormatError("bad direction '" + s + "'");
}

inline Dir turned_left(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
inline Dir turned_right(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }

/// Row/col step for one move in direction `d`. Row 0 is the top row.
inline std::pair<int, int> dir_delta(Dir d) {
    switch (d) {
        case Dir::N: return {-1, 0};
        case Dir::E: return {0, 1};
        case Dir::S: return {1, 0};
        case Dir::W: return {0, -1};
    }
    return {0, 0};
}

struct Pose {
    int row = 0;
    int col = 0;
    Dir dir = Dir::E;

    bool operator==(const Pose& o) const { return row == o.row && col == o.col && dir == o.dir; }
};

enum class Cell : std::uint8_t { Wall, Free, Unknown };

constexpr int kMarkerCap = 9;

/// A rectangular grid. Marker counts live in a parallel array (markers imply
/// a Free cell). `avatar` and `goal` are optional so the same type covers
/// partial puzzle constraints and complete mazes/pre/post grids.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<Cell> cells;
    std::vector<std::uint8_t> markers;
    std::optional<Pose> avatar;
    std::optional<std::pair<int, int>> goal;

    Grid() = default;
    Grid(int r, int c, Cell fill)
        : rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, fill),
          markers(static_cast<std::size_t>(r) * c, 0) {}

    bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }

    Cell at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
    Cell& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }

    std::uint8_t marker_at(int r, int c) const { return markers[static_cast<std::size_t>(r) * cols + c]; }
    std::uint8_t& marker_at(int r, int c) { return markers[static_cast<std::size_t>(r) * cols + c]; }

    bool operator==(const Grid& o) const {
        return rows == o.rows && cols == o.cols && cells == o.cells && markers == o.markers &&
               avatar == o.avatar && goal == o.goal;
    }

    /// Grid equality ignoring the avatar pose; marker layout and walls must
    /// match. Used for Karel solvability, where the final pose is free.
    bool same_board(const Grid& o) const {
        return rows == o.rows && cols == o.cols && cells == o.cells && markers == o.markers;
    }

    bool has_unknown() const {
        for (Cell c : cells)
            if (c == Cell::Unknown) return true;
        return false;
    }
};

/// Parses the text form: '#' wall, '.' free, '?' unknown, '^>v<' avatar,
/// 'x' goal, '1'..'9' marker counts, 'A' avatar on a marker or goal cell
/// (details on a trailing "A <dir> <spec>" line, spec = goal or 1..9).
inline Grid load_grid(const std::string& text) {
    std::vector<std::string> rows;
    std::optional<std::string> sideLine;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (line[0] == 'A' && line.size() > 1 && line[1] == ' ') {
            if (sideLine) throw FormatError("duplicate avatar side line");
            sideLine = line;
            continue;
        }
        rows.push_back(line);
    }
    if (rows.empty()) throw FormatError("empty grid");
    Grid g(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), Cell::Free);
    std::optional<std::pair<int, int>> avatarSpecial;
    for (int r = 0; r < g.rows; ++r) {
        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != g.cols)
            throw FormatError("ragged grid rows");
        for (int c = 0; c < g.cols; ++c) {
            char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            switch (ch) {
                case '#': g.at(r, c) = Cell::Wall; break;
                case '.': g.at(r, c) = Cell::Free; break;
                case '?': g.at(r, c) = Cell::Unknown; break;
                case 'x':
                    if (g.goal) throw FormatError("more than one goal cell");
                    g.goal = {r, c};
                    break;
                case '^':
                case '>':
                case 'v':
                case '<': {
                    if (g.avatar) throw FormatError("more than one avatar");
                    Dir d = ch == '^' ? Dir::N : ch == '>' ? Dir::E : ch == 'v' ? Dir::S : Dir::W;
                    g.avatar = Pose{r, c, d};
                    break;
                }
                case 'A':
                    if (avatarSpecial) throw FormatError("more than one avatar");
                    avatarSpecial = {r, c};
                    break;
                default:
                    if (ch >= '1' && ch <= '9') {
                        g.marker_at(r, c) = static_cast<std::uint8_t>(ch - '0');
                    } else {
                        throw FormatError(std::string("bad grid character '") + ch + "'");
                    }
            }
        }
    }
    if (avatarSpecial) {
        if (g.avatar) throw FormatError("more than one avatar");
        if (!sideLine) throw FormatError("'A' cell without side line");
        std::istringstream side(*sideLine);
        std::string a, d, spec;
        side >> a >> d >> spec;
        if (spec.empty()) throw FormatError("malformed avatar side line");
        g.avatar = Pose{avatarSpecial->first, avatarSpecial->second, dir_from_name(d)};
        if (spec == "goal") {
            if (g.goal) throw FormatError("more than one goal cell");
            g.goal = *avatarSpecial;
        } else {
            int m = 0;
            try {
                m = std::stoi(spec);
            } catch (...) {
                throw FormatError("malformed avatar side line");
            }
            if (m < 1 || m > kMarkerCap) throw FormatError("avatar marker count out of range");
            g.marker_at(avatarSpecial->first, avatarSpecial->second) = static_cast<std::uint8_t>(m);
        }
    } else if (sideLine) {
        throw FormatError("side line without 'A' cell");
    }
    if (g.avatar && g.at(g.avatar->row, g.avatar->col) != Cell::Free)
        throw FormatError("avatar must stand on a free cell");
    if (g.goal && g.at(g.goal->first, g.goal->second) != Cell::Free) throw FormatError("goal must be a free cell");
    return g;
}

/// Canonical writer; load_grid(save_grid(g)) == g.
inline std::string save_grid(const Grid& g) {
    std::ostringstream out;
    std::optional<std::string> sideLine;
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const bool isAvatar = g.avatar && g.avatar->row == r && g.avatar->col == c;
            const bool isGoal = g.goal && g.goal->first == r && g.goal->second == c;
            const int m = g.marker_at(r, c);
            char ch;
            if (isAvatar) {
                if (isGoal || m > 0) {
                    ch = 'A';
                    sideLine = "A " + dir_name(g.avatar->dir) + " " + (isGoal ? "goal" : std::to_string(m));
                } else {
                    ch = dir_char(g.avatar->dir);
                }
            } else if (isGoal) {
                ch = 'x';
            } else if (m > 0) {
                ch = static_cast<char>('0' + m);
            } else {
                switch (g.at(r, c)) {
                    case Cell::Wall: ch = '#'; break;
                    case Cell::Free: ch = '.'; break;
                    default: ch = '?';
                }
            }
            out << ch;
        }
        out << "\n";
    }
    if (sideLine) out << *sideLine << "\n";
    return out.str();
}

}  // namespace taskgen
