#pragma once

#include <functional>

#include "taskgen/puzzle.hpp"

namespace taskgen {

/// Tiny id -> count map kept as a flat vector (a handful of constructs per
/// program make hashing a loss).
struct FlatCounts {
    std::vector<std::pair<int, int>> items;

    void add(int id) {
        for (auto& [k, v] : items)
            if (k == id) {
                ++v;
                return;
            }
        items.push_back({id, 1});
    }

    int count(int id) const {
        for (const auto& [k, v] : items)
            if (k == id) return v;
        return 0;
    }
};

enum class RunStatus : std::uint8_t { Done, Crashed, StepLimit };

inline std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Done: return "done";
        case RunStatus::Crashed: return "crashed";
        case RunStatus::StepLimit: return "steplimit";
    }
    return "?";
}

enum class TraceOp : std::uint8_t { Action, CondTrue, CondFalse };

/// One trace event: an executed action (pose after it) or an evaluated
/// condition (While/If/IfElse test, or RepeatUntil's goal check).
struct TraceEntry {
    int nodeId = 0;
    TraceOp op = TraceOp::Action;
    TokenKind kind = TokenKind::Run;
    Pose pose;

    bool operator==(const TraceEntry& o) const {
        return nodeId == o.nodeId && op == o.op && kind == o.kind && pose == o.pose;
    }
};

struct ExecConfig {
    int stepLimit = 1000;          ///< max primitive actions
    bool karelRequirePose = false; ///< require the final pose to match postgrid's
};

struct RunResult {
    RunStatus status = RunStatus::Done;
    bool solved = false;
    Pose finalPose;
    Grid finalGrid;                      ///< grid after execution (markers updated)
    std::vector<TraceEntry> trace;
    std::vector<int> executedBlocks;     ///< sorted distinct node ids, Run included
    std::vector<int> visitCounts;        ///< per cell, start cell counts once
    FlatCounts loopIters;
    FlatCounts branchThen;
    FlatCounts branchElse;
    int steps = 0;                       ///< primitive actions executed
};

namespace detail {

struct ExecEngine {
    Grid board;
    Pose pose;
    std::optional<std::pair<int, int>> goal;
    RunStatus status = RunStatus::Done;
    ExecConfig cfg;
    long long events = 0;
    long long eventCap = 0;
    RunResult res;
    int loopDepth = 0;
    int putCount = 0;
    int pickCount = 0;
    int curNode = 0;  ///< id of the block being evaluated or executed

    // Optional world hooks; a symbolic runner installs these to concretize
    // unknown cells on first touch. Defaults read the board directly.
    std::function<bool(int, int)> wallHook;          ///< called with in-bounds cells only
    std::function<std::uint8_t(int, int)> markerHook;
    std::function<bool()> goalHook;                  ///< RepeatUntil head test

    // Set while an action checks its own precondition (Move, PutMarker,
    // PickMarker); Run otherwise. Hooks use it to tell must-pass checks
    // apart from condition queries.
    TokenKind actionContext = TokenKind::Run;

    bool running() const { return status == RunStatus::Done; }

    void mark_executed(int id) { res.executedBlocks.push_back(id); }

    void push(int id, TraceOp op, TokenKind kind) {
        res.trace.push_back(TraceEntry{id, op, kind, pose});
        if (++events > eventCap) status = RunStatus::StepLimit;
    }

    bool wall_at(int r, int c) { return wallHook ? wallHook(r, c) : board.at(r, c) == Cell::Wall; }

    std::uint8_t markers_at(int r, int c) { return markerHook ? markerHook(r, c) : board.marker_at(r, c); }

    bool goal_now() { return goalHook ? goalHook() : goal && pose.row == goal->first && pose.col == goal->second; }

    bool probe(Dir d) {
        auto [dr, dc] = dir_delta(d);
        int r = pose.row + dr, c = pose.col + dc;
        return board.in_bounds(r, c) && !wall_at(r, c);
    }

    bool eval_condition(Condition c) {
        switch (c) {
            case Condition::PathAhead: return probe(pose.dir);
            case Condition::PathLeft: return probe(turned_left(pose.dir));
            case Condition::PathRight: return probe(turned_right(pose.dir));
            case Condition::NoPathAhead: return !probe(pose.dir);
            case Condition::MarkerPresent: return markers_at(pose.row, pose.col) > 0;
            case Condition::NoMarkerPresent: return markers_at(pose.row, pose.col) == 0;
        }
        return false;
    }

    void do_action(int id, TokenKind k) {
        if (res.steps >= cfg.stepLimit) {
            status = RunStatus::StepLimit;
            return;
        }
        curNode = id;
        ++res.steps;
        switch (k) {
            case TokenKind::Move: {
                auto [dr, dc] = dir_delta(pose.dir);
                int r = pose.row + dr, c = pose.col + dc;
                actionContext = k;
                const bool blocked = !board.in_bounds(r, c) || wall_at(r, c);
                actionContext = TokenKind::Run;
                if (blocked) {
                    push(id, TraceOp::Action, k);
                    status = RunStatus::Crashed;
                    return;
                }
                pose.row = r;
                pose.col = c;
                res.visitCounts[static_cast<std::size_t>(r) * board.cols + c] += 1;
                break;
            }
            case TokenKind::TurnLeft: pose.dir = turned_left(pose.dir); break;
            case TokenKind::TurnRight: pose.dir = turned_right(pose.dir); break;
            case TokenKind::PutMarker: {
                const std::uint8_t m = markers_at(pose.row, pose.col);
                if (m >= kMarkerCap) {
                    push(id, TraceOp::Action, k);
                    status = RunStatus::Crashed;
                    return;
                }
                board.marker_at(pose.row, pose.col) = static_cast<std::uint8_t>(m + 1);
                ++putCount;
                break;
            }
            case TokenKind::PickMarker: {
                const std::uint8_t m = markers_at(pose.row, pose.col);
                if (m == 0) {
                    push(id, TraceOp::Action, k);
                    status = RunStatus::Crashed;
                    return;
                }
                board.marker_at(pose.row, pose.col) = static_cast<std::uint8_t>(m - 1);
                ++pickCount;
                break;
            }
            default: break;
        }
        mark_executed(id);
        push(id, TraceOp::Action, k);
    }

    // `cursor` walks the preorder id assignment in sync with the tree.
    void run_body(const std::vector<AstNode>& body, int& cursor);

    void run_node(const AstNode& n, int& cursor) {
        const int id = cursor++;
        if (is_action(n.kind)) {
            do_action(id, n.kind);
            return;
        }
        switch (n.kind) {
            case TokenKind::Repeat: {
                mark_executed(id);
                const int bodyStart = cursor;
                int bodyEnd = bodyStart;
                for (int i = 0; i < n.iter && running(); ++i) {
                    res.loopIters.add(id);
                    int c2 = bodyStart;
                    ++loopDepth;
                    run_body(n.body, c2);
                    --loopDepth;
                    bodyEnd = c2;
                }
                if (n.iter == 0) {
                    int c2 = bodyStart;
                    skip_ids(n.body, c2);
                    bodyEnd = c2;
                }
                cursor = bodyEnd;
                break;
            }
            case TokenKind::While: {
                mark_executed(id);
                const int bodyStart = cursor;
                int bodyEnd = bodyStart;
                {
                    int c2 = bodyStart;
                    skip_ids(n.body, c2);
                    bodyEnd = c2;
                }
                while (running()) {
                    curNode = id;
                    const bool v = eval_condition(*n.cond);
                    push(id, v ? TraceOp::CondTrue : TraceOp::CondFalse, n.kind);
                    if (!running() || !v) break;
                    res.loopIters.add(id);
                    int c2 = bodyStart;
                    ++loopDepth;
                    run_body(n.body, c2);
                    --loopDepth;
                }
                cursor = bodyEnd;
                break;
            }
            case TokenKind::RepeatUntil: {
                mark_executed(id);
                const int bodyStart = cursor;
                int bodyEnd = bodyStart;
                {
                    int c2 = bodyStart;
                    skip_ids(n.body, c2);
                    bodyEnd = c2;
                }
                while (running()) {
                    curNode = id;
                    const bool atGoal = goal_now();
                    push(id, atGoal ? TraceOp::CondTrue : TraceOp::CondFalse, n.kind);
                    if (!running() || atGoal) break;
                    res.loopIters.add(id);
                    int c2 = bodyStart;
                    ++loopDepth;
                    run_body(n.body, c2);
                    --loopDepth;
                }
                cursor = bodyEnd;
                break;
            }
            case TokenKind::If:
            case TokenKind::IfElse: {
                mark_executed(id);
                curNode = id;
                const bool v = eval_condition(*n.cond);
                push(id, v ? TraceOp::CondTrue : TraceOp::CondFalse, n.kind);
                int thenStart = cursor;
                int thenEnd = thenStart;
                {
                    int c2 = thenStart;
                    skip_ids(n.body, c2);
                    thenEnd = c2;
                }
                int elseEnd = thenEnd;
                {
                    int c2 = thenEnd;
                    skip_ids(n.elseBody, c2);
                    elseEnd = c2;
                }
                if (running()) {
                    if (v) {
                        res.branchThen.add(id);
                        int c2 = thenStart;
                        run_body(n.body, c2);
                    } else {
                        res.branchElse.add(id);
                        if (n.kind == TokenKind::IfElse) {
                            int c2 = thenEnd;
                            run_body(n.elseBody, c2);
                        }
                    }
                }
                cursor = elseEnd;
                break;
            }
            default: break;
        }
    }

    static void skip_ids(const std::vector<AstNode>& body, int& cursor) {
        for (const AstNode& n : body) {
            ++cursor;
            skip_ids(n.body, cursor);
            skip_ids(n.elseBody, cursor);
        }
    }
};

inline void ExecEngine::run_body(const std::vector<AstNode>& body, int& cursor) {
    for (const AstNode& n : body) {
        if (!running()) {
            // keep the id cursor in sync even when aborting
            int c2 = cursor;
            ++c2;
            skip_ids(n.body, c2);
            skip_ids(n.elseBody, c2);
            cursor = c2;
            continue;
        }
        run_node(n, cursor);
    }
}

}  // namespace detail

/// Runs a complete program on a complete puzzle.
inline RunResult execute(const Ast& code, const Puzzle& puzzle, const ExecConfig& cfg = {}) {
    if (!is_complete(code)) throw DomainError("cannot execute a sketch");
    if (code.domain != puzzle.domain) throw DomainError("code/puzzle domain mismatch");
    const std::string defect = puzzle_defect(puzzle);
    if (!defect.empty()) throw IncompletePuzzle(defect);

    const Grid& start = puzzle.domain == Domain::HoCMaze ? puzzle.maze : puzzle.pregrid;
    detail::ExecEngine eng;
    eng.board = start;
    eng.pose = *start.avatar;
    eng.goal = puzzle.domain == Domain::HoCMaze ? start.goal : std::nullopt;
    eng.cfg = cfg;
    eng.eventCap = 64LL * cfg.stepLimit;
    eng.res.visitCounts.assign(static_cast<std::size_t>(start.rows) * start.cols, 0);
    eng.res.visitCounts[static_cast<std::size_t>(eng.pose.row) * start.cols + eng.pose.col] = 1;
    eng.mark_executed(0);

    int cursor = 1;
    eng.run_body(code.root.body, cursor);

    eng.res.status = eng.status;
    eng.res.finalPose = eng.pose;
    eng.res.finalGrid = eng.board;
    eng.res.finalGrid.avatar = eng.pose;

    std::sort(eng.res.executedBlocks.begin(), eng.res.executedBlocks.end());
    eng.res.executedBlocks.erase(std::unique(eng.res.executedBlocks.begin(), eng.res.executedBlocks.end()),
                                 eng.res.executedBlocks.end());

    if (eng.res.status == RunStatus::Done) {
        if (puzzle.domain == Domain::HoCMaze) {
            eng.res.solved = start.goal && eng.pose.row == start.goal->first && eng.pose.col == start.goal->second;
        } else {
            bool boardsMatch = eng.res.finalGrid.same_board(puzzle.postgrid);
            if (cfg.karelRequirePose && puzzle.postgrid.avatar)
                boardsMatch = boardsMatch && eng.pose == *puzzle.postgrid.avatar;
            eng.res.solved = boardsMatch;
        }
    }
    return eng.res;
}

/// A code solves a task when it executes to success and also fits the task's
/// block store and size limit.
inline bool solves(const Ast& code, const Task& task, const ExecConfig& cfg = {}) {
    const CodeAttributes attrs = attributes(code);
    if (attrs.nblock > task.size) return false;
    for (TokenKind k : attrs.blocks)
        if (!task.store.count(k)) return false;
    return execute(code, task.puzzle, cfg).solved;
}

}  // namespace taskgen
