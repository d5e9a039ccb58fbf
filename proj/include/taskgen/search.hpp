#pragma once

#include <cstring>
#include <deque>
#include <optional>
#include <unordered_set>

#include "taskgen/emulator.hpp"

namespace taskgen {

struct SearchLimits {
    long long nodeCap = 1000000;
};

namespace detail {

inline Ast basic_sequence_ast(Domain domain, const std::vector<TokenKind>& actions) {
    Ast a;
    a.domain = domain;
    a.root.kind = TokenKind::Run;
    for (TokenKind k : actions) a.root.body.push_back(make_action(k));
    return a;
}

inline std::optional<Ast> hoc_shortest_basic(const Task& t, int maxLen, const SearchLimits& lim) {
    const Grid& g = t.puzzle.maze;
    const auto goal = *g.goal;
    const Pose start = *g.avatar;
    const int states = g.rows * g.cols * 4;
    auto encode = [&](const Pose& p) { return (p.row * g.cols + p.col) * 4 + static_cast<int>(p.dir); };
    std::vector<int> parent(static_cast<std::size_t>(states), -1);
    std::vector<std::int8_t> via(static_cast<std::size_t>(states), -1);
    std::vector<int> depth(static_cast<std::size_t>(states), -1);
    std::deque<Pose> queue;
    depth[static_cast<std::size_t>(encode(start))] = 0;
    queue.push_back(start);
    long long generated = 1;
    const TokenKind acts[3] = {TokenKind::Move, TokenKind::TurnLeft, TokenKind::TurnRight};
    std::optional<Pose> found;
    if (start.row == goal.first && start.col == goal.second) found = start;
    while (!queue.empty() && !found) {
        Pose cur = queue.front();
        queue.pop_front();
        const int d = depth[static_cast<std::size_t>(encode(cur))];
        if (d >= maxLen) continue;
        for (int ai = 0; ai < 3; ++ai) {
            Pose nxt = cur;
            if (acts[ai] == TokenKind::Move) {
                auto [dr, dc] = dir_delta(cur.dir);
                int r = cur.row + dr, c = cur.col + dc;
                if (!g.in_bounds(r, c) || g.at(r, c) == Cell::Wall) continue;
                nxt.row = r;
                nxt.col = c;
            } else {
                nxt.dir = acts[ai] == TokenKind::TurnLeft ? turned_left(cur.dir) : turned_right(cur.dir);
            }
            const int code = encode(nxt);
            if (depth[static_cast<std::size_t>(code)] != -1) continue;
            if (++generated > lim.nodeCap) throw BudgetExceeded("basic-solution search node cap");
            depth[static_cast<std::size_t>(code)] = d + 1;
            parent[static_cast<std::size_t>(code)] = encode(cur);
            via[static_cast<std::size_t>(code)] = static_cast<std::int8_t>(ai);
            if (nxt.row == goal.first && nxt.col == goal.second) {
                found = nxt;
                break;
            }
            queue.push_back(nxt);
        }
    }
    if (!found) return std::nullopt;
    std::vector<TokenKind> seq;
    int cur = encode(*found);
    while (via[static_cast<std::size_t>(cur)] != -1) {
        seq.push_back(acts[via[static_cast<std::size_t>(cur)]]);
        cur = parent[static_cast<std::size_t>(cur)];
    }
    std::reverse(seq.begin(), seq.end());
    return basic_sequence_ast(Domain::HoCMaze, seq);
}

/// Karel basic search node: pose plus the marker cells that differ from the
/// pregrid, kept sorted by cell index.
struct KarelNode {
    Pose pose;
    std::vector<std::pair<int, std::uint8_t>> diff;
    int parent = -1;
    std::int8_t act = -1;
    int depth = 0;
};

inline std::string karel_key(const KarelNode& n) {
    std::string k;
    k.reserve(3 + n.diff.size() * 3);
    k.push_back(static_cast<char>(n.pose.row));
    k.push_back(static_cast<char>(n.pose.col));
    k.push_back(static_cast<char>(n.pose.dir));
    for (auto [cell, cnt] : n.diff) {
        k.push_back(static_cast<char>(cell & 0xff));
        k.push_back(static_cast<char>((cell >> 8) & 0xff));
        k.push_back(static_cast<char>(cnt));
    }
    return k;
}

inline std::optional<Ast> karel_shortest_basic(const Task& t, int maxLen, const SearchLimits& lim,
                                               bool requirePose) {
    const Grid& pre = t.puzzle.pregrid;
    const Grid& post = t.puzzle.postgrid;
    std::vector<std::pair<int, std::uint8_t>> target;
    for (int i = 0; i < pre.rows * pre.cols; ++i)
        if (pre.markers[static_cast<std::size_t>(i)] != post.markers[static_cast<std::size_t>(i)])
            target.push_back({i, post.markers[static_cast<std::size_t>(i)]});

    auto marker_at = [&](const KarelNode& n, int cell) -> std::uint8_t {
        for (auto [c, v] : n.diff)
            if (c == cell) return v;
        return pre.markers[static_cast<std::size_t>(cell)];
    };
    auto set_marker = [&](KarelNode& n, int cell, std::uint8_t v) {
        for (std::size_t i = 0; i < n.diff.size(); ++i) {
            if (n.diff[i].first == cell) {
                if (pre.markers[static_cast<std::size_t>(cell)] == v)
                    n.diff.erase(n.diff.begin() + static_cast<std::ptrdiff_t>(i));
                else
                    n.diff[i].second = v;
                return;
            }
            if (n.diff[i].first > cell) {
                if (pre.markers[static_cast<std::size_t>(cell)] != v)
                    n.diff.insert(n.diff.begin() + static_cast<std::ptrdiff_t>(i), {cell, v});
                return;
            }
        }
        if (pre.markers[static_cast<std::size_t>(cell)] != v) n.diff.push_back({cell, v});
    };
    auto solved = [&](const KarelNode& n) {
        if (n.diff != target) return false;
        if (requirePose && post.avatar) return n.pose == *post.avatar;
        return true;
    };
    // Admissible remaining-cost bound: marker edits still owed plus the
    // Chebyshev-ish travel to the farthest mismatched cell.
    auto lower_bound = [&](const KarelNode& n) {
        int ops = 0;
        int travel = 0;
        std::size_t i = 0, j = 0;
        auto account = [&](int cell, int cur, int want) {
            if (cur == want) return;
            ops += std::abs(cur - want);
            const int r = cell / pre.cols, c = cell % pre.cols;
            travel = std::max(travel, std::abs(r - n.pose.row) + std::abs(c - n.pose.col));
        };
        while (i < n.diff.size() || j < target.size()) {
            if (j >= target.size() || (i < n.diff.size() && n.diff[i].first < target[j].first)) {
                account(n.diff[i].first, n.diff[i].second, pre.markers[static_cast<std::size_t>(n.diff[i].first)]);
                ++i;
            } else if (i >= n.diff.size() || target[j].first < n.diff[i].first) {
                account(target[j].first, pre.markers[static_cast<std::size_t>(target[j].first)], target[j].second);
                ++j;
            } else {
                account(target[j].first, n.diff[i].second, target[j].second);
                ++i;
                ++j;
            }
        }
        return ops + travel;
    };

    std::vector<KarelNode> nodes;
    std::unordered_set<std::string> seen;
    KarelNode root;
    root.pose = *pre.avatar;
    nodes.push_back(root);
    seen.insert(karel_key(root));
    if (solved(root)) return basic_sequence_ast(Domain::Karel, {});
    const TokenKind acts[5] = {TokenKind::Move, TokenKind::TurnLeft, TokenKind::TurnRight, TokenKind::PutMarker,
                               TokenKind::PickMarker};
    std::size_t head = 0;
    std::optional<int> foundIdx;
    while (head < nodes.size() && !foundIdx) {
        const int curIdx = static_cast<int>(head);
        ++head;
        KarelNode cur = nodes[static_cast<std::size_t>(curIdx)];
        if (cur.depth >= maxLen || cur.depth + lower_bound(cur) > maxLen) continue;
        for (int ai = 0; ai < 5; ++ai) {
            KarelNode nxt = cur;
            nxt.parent = curIdx;
            nxt.act = static_cast<std::int8_t>(ai);
            nxt.depth = cur.depth + 1;
            const int cell = cur.pose.row * pre.cols + cur.pose.col;
            switch (acts[ai]) {
                case TokenKind::Move: {
                    auto [dr, dc] = dir_delta(cur.pose.dir);
                    int r = cur.pose.row + dr, c = cur.pose.col + dc;
                    if (!pre.in_bounds(r, c) || pre.at(r, c) == Cell::Wall) continue;
                    nxt.pose.row = r;
                    nxt.pose.col = c;
                    break;
                }
                case TokenKind::TurnLeft: nxt.pose.dir = turned_left(cur.pose.dir); break;
                case TokenKind::TurnRight: nxt.pose.dir = turned_right(cur.pose.dir); break;
                case TokenKind::PutMarker: {
                    const std::uint8_t m = marker_at(cur, cell);
                    if (m >= kMarkerCap) continue;
                    set_marker(nxt, cell, static_cast<std::uint8_t>(m + 1));
                    break;
                }
                case TokenKind::PickMarker: {
                    const std::uint8_t m = marker_at(cur, cell);
                    if (m == 0) continue;
                    set_marker(nxt, cell, static_cast<std::uint8_t>(m - 1));
                    break;
                }
                default: continue;
            }
            std::string key = karel_key(nxt);
            if (seen.count(key)) continue;
            if (static_cast<long long>(nodes.size()) + 1 > lim.nodeCap)
                throw BudgetExceeded("basic-solution search node cap");
            seen.insert(std::move(key));
            nodes.push_back(nxt);
            if (solved(nxt)) {
                foundIdx = static_cast<int>(nodes.size()) - 1;
                break;
            }
        }
    }
    if (!foundIdx) return std::nullopt;
    std::vector<TokenKind> seq;
    int cur = *foundIdx;
    while (nodes[static_cast<std::size_t>(cur)].act != -1) {
        seq.push_back(acts[nodes[static_cast<std::size_t>(cur)].act]);
        cur = nodes[static_cast<std::size_t>(cur)].parent;
    }
    std::reverse(seq.begin(), seq.end());
    return basic_sequence_ast(Domain::Karel, seq);
}

}  // namespace detail

/// Shortest program made only of basic actions that solves the puzzle, with
/// at most `maxLen` actions; nullopt when none exists within the bound.
/// Throws BudgetExceeded past `lim.nodeCap` explored states.
inline std::optional<Ast> shortest_basic_solution(const Task& t, int maxLen, const SearchLimits& lim = {},
                                                  const ExecConfig& cfg = {}) {
    const std::string defect = puzzle_defect(t.puzzle);
    if (!defect.empty()) throw IncompletePuzzle(defect);
    if (maxLen < 0) return std::nullopt;
    if (t.puzzle.domain == Domain::HoCMaze) return detail::hoc_shortest_basic(t, maxLen, lim);
    return detail::karel_shortest_basic(t, maxLen, lim, cfg.karelRequirePose);
}

}  // namespace taskgen
