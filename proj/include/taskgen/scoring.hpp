#pragma once

#include "taskgen/search.hpp"

namespace taskgen {

/// Trace statistics over the primitive-action sequence only; condition checks
/// do not break runs.
struct QualCounters {
    int moves = 0;
    int turns = 0;
    int segments = 0;       ///< maximal move runs longer than 3
    int longSegments = 0;   ///< maximal move runs longer than 5
    int turnSegments = 0;   ///< maximal turn runs longer than 3
};

inline QualCounters counters_from_actions(const std::vector<TokenKind>& actions) {
    QualCounters q;
    int moveRun = 0, turnRun = 0;
    auto flushMove = [&] {
        if (moveRun > 3) ++q.segments;
        if (moveRun > 5) ++q.longSegments;
        moveRun = 0;
    };
    auto flushTurn = [&] {
        if (turnRun > 3) ++q.turnSegments;
        turnRun = 0;
    };
    for (TokenKind k : actions) {
        if (k == TokenKind::Move) {
            ++q.moves;
            ++moveRun;
            flushTurn();
        } else if (k == TokenKind::TurnLeft || k == TokenKind::TurnRight) {
            ++q.turns;
            ++turnRun;
            flushMove();
        } else {
            flushMove();
            flushTurn();
        }
    }
    flushMove();
    flushTurn();
    return q;
}

inline std::vector<TokenKind> trace_actions(const RunResult& run) {
    std::vector<TokenKind> a;
    a.reserve(run.trace.size());
    for (const auto& e : run.trace)
        if (e.op == TraceOp::Action) a.push_back(e.kind);
    return a;
}

/// Visual-quality term in [0, 1]; n is the grid side length.
inline double qual_value(const QualCounters& q, int n) {
    auto clip = [](double x) { return x < 1.0 ? x : 1.0; };
    const double spread = clip(q.moves / (2.0 * n)) + clip(q.turns / static_cast<double>(n)) +
                          clip(q.segments / (n / 2.0)) + clip(q.longSegments / (n / 3.0));
    const double turnPenalty = 1.0 - clip(q.turnSegments / (n / 2.0));
    return 0.75 * 0.25 * spread + 0.25 * turnPenalty;
}

namespace detail {

inline bool adjacent_inverse(TokenKind a, TokenKind b) {
    return (a == TokenKind::TurnLeft && b == TokenKind::TurnRight) ||
           (a == TokenKind::TurnRight && b == TokenKind::TurnLeft) ||
           (a == TokenKind::PutMarker && b == TokenKind::PickMarker) ||
           (a == TokenKind::PickMarker && b == TokenKind::PutMarker);
}

inline bool body_has_inverse_pair(const std::vector<AstNode>& body) {
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i + 1 < body.size() && is_action(body[i].kind) && is_action(body[i + 1].kind) &&
            adjacent_inverse(body[i].kind, body[i + 1].kind))
            return true;
        if (body_has_inverse_pair(body[i].body) || body_has_inverse_pair(body[i].elseBody)) return true;
    }
    return false;
}

/// Variants of `body` with exactly one edit applied somewhere inside: one
/// action dropped, or one construct spliced (replaced by its body; IfElse
/// yields one variant per branch).
inline std::vector<std::vector<AstNode>> body_mutants(const std::vector<AstNode>& body) {
    std::vector<std::vector<AstNode>> out;
    auto splice = [&](std::size_t i, const std::vector<AstNode>& sub) {
        auto v = body;
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        v.insert(v.begin() + static_cast<std::ptrdiff_t>(i), sub.begin(), sub.end());
        out.push_back(std::move(v));
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        const AstNode& c = body[i];
        if (is_action(c.kind)) {
            splice(i, {});
            continue;
        }
        splice(i, c.body);
        if (c.kind == TokenKind::IfElse) splice(i, c.elseBody);
        for (auto& nb : body_mutants(c.body)) {
            auto v = body;
            v[i].body = std::move(nb);
            out.push_back(std::move(v));
        }
        if (c.kind == TokenKind::IfElse)
            for (auto& nb : body_mutants(c.elseBody)) {
                auto v = body;
                v[i].elseBody = std::move(nb);
                out.push_back(std::move(v));
            }
    }
    return out;
}

}  // namespace detail

/// Single-deletion reductions of a complete program.
inline std::vector<Ast> deletion_mutants(const Ast& code) {
    std::vector<Ast> out;
    for (auto& b : detail::body_mutants(code.root.body)) {
        Ast m = code;
        m.root.body = std::move(b);
        out.push_back(std::move(m));
    }
    return out;
}

/// Per-component quality report for a candidate solution code on a task.
struct ScoreReport {
    RunStatus status = RunStatus::Crashed;
    bool solved = false;
    double cov = 0.0;      ///< executed code blocks / total code blocks
    double nocross = 0.0;  ///< cells visited exactly once / cells visited
    bool nocut = false;    ///< no basic-action solution cheaper than the code
    bool notred = false;   ///< no adjacent inverse pair and no solving deletion mutant
    double qual = 0.0;
    double cutqual = 0.0;  ///< Karel only: qual of the shortest basic solution
    bool indicator = false;
    double total = 0.0;
};

/// Scores how well `code` fits `task` as its intended solution, in [0, 1].
inline ScoreReport score_code_task(const Ast& code, const Task& task, const ExecConfig& cfg = {},
                                   const SearchLimits& lim = {}) {
    ScoreReport rep;
    const RunResult run = execute(code, task.puzzle, cfg);
    const CodeAttributes attrs = attributes(code);
    rep.status = run.status;
    rep.solved = run.solved;
    rep.cov = static_cast<double>(run.executedBlocks.size()) / attrs.nblock;
    int visited = 0, once = 0;
    for (int v : run.visitCounts) {
        if (v > 0) ++visited;
        if (v == 1) ++once;
    }
    rep.nocross = visited == 0 ? 1.0 : static_cast<double>(once) / visited;
    const Grid& board = task.puzzle.domain == Domain::HoCMaze ? task.puzzle.maze : task.puzzle.pregrid;
    const int side = std::max(board.rows, board.cols);
    rep.qual = qual_value(counters_from_actions(trace_actions(run)), side);
    if (rep.solved) {
        // Shortcut check: a plain action sequence that costs strictly fewer
        // blocks than the code (sequence of k actions = k+1 blocks) would make
        // the code pointlessly elaborate.
        try {
            rep.nocut = !shortest_basic_solution(task, attrs.nblock - 2, lim, cfg).has_value();
        } catch (const BudgetExceeded&) {
            rep.nocut = true;  // not falsified within budget
        }
        if (task.puzzle.domain == Domain::Karel) {
            try {
                const int traceLen = static_cast<int>(trace_actions(run).size());
                auto basic = shortest_basic_solution(task, traceLen, lim, cfg);
                if (basic)
                    rep.cutqual =
                        qual_value(counters_from_actions(trace_actions(execute(*basic, task.puzzle, cfg))), side);
            } catch (const BudgetExceeded&) {
                rep.cutqual = 0.0;
            }
        }
        if (detail::body_has_inverse_pair(code.root.body)) {
            rep.notred = false;
        } else {
            rep.notred = true;
            for (const Ast& m : deletion_mutants(code)) {
                try {
                    if (execute(m, task.puzzle, cfg).solved) {
                        rep.notred = false;
                        break;
                    }
                } catch (const std::exception&) {
                }
            }
        }
    }
    rep.indicator = rep.solved && rep.cov == 1.0 && rep.nocross == 1.0 && rep.nocut && rep.notred;
    if (rep.indicator) {
        if (task.puzzle.domain == Domain::HoCMaze)
            rep.total = 0.5 * rep.cov + 0.5 * rep.qual;
        else
            rep.total = (rep.cov + rep.qual + rep.cutqual) / 3.0;
    }
    return rep;
}

inline double f_score(const Ast& code, const Task& task, const ExecConfig& cfg = {}, const SearchLimits& lim = {}) {
    return score_code_task(code, task, cfg, lim).total;
}

/// The total of score_code_task, with early exits: as soon as a gating
/// component fails the costly searches (shortcut BFS, deletion mutants) are
/// skipped, since the total is already pinned to zero. Hot path for reward
/// computation over many generated tasks.
inline double reward_score(const Ast& code, const Task& task, const ExecConfig& cfg = {},
                           const SearchLimits& lim = {}) {
    const RunResult run = execute(code, task.puzzle, cfg);
    if (!run.solved) return 0.0;
    const CodeAttributes attrs = attributes(code);
    if (static_cast<int>(run.executedBlocks.size()) != attrs.nblock) return 0.0;
    for (int v : run.visitCounts)
        if (v > 1) return 0.0;
    if (detail::body_has_inverse_pair(code.root.body)) return 0.0;
    try {
        if (shortest_basic_solution(task, attrs.nblock - 2, lim, cfg).has_value()) return 0.0;
    } catch (const BudgetExceeded&) {
        // not falsified within budget
    }
    for (const Ast& m : deletion_mutants(code)) {
        try {
            if (execute(m, task.puzzle, cfg).solved) return 0.0;
        } catch (const std::exception&) {
        }
    }
    const Grid& board = task.puzzle.domain == Domain::HoCMaze ? task.puzzle.maze : task.puzzle.pregrid;
    const int side = std::max(board.rows, board.cols);
    const double qual = qual_value(counters_from_actions(trace_actions(run)), side);
    if (task.puzzle.domain == Domain::HoCMaze) return 0.5 + 0.5 * qual;
    double cutqual = 0.0;
    try {
        const int traceLen = static_cast<int>(trace_actions(run).size());
        const auto basic = shortest_basic_solution(task, traceLen, lim, cfg);
        if (basic) cutqual = qual_value(counters_from_actions(trace_actions(execute(*basic, task.puzzle, cfg))), side);
    } catch (const BudgetExceeded&) {
    }
    return (1.0 + qual + cutqual) / 3.0;
}

}  // namespace taskgen
