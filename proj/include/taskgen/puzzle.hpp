#pragma once

#include <set>

#include "taskgen/ast.hpp"
#include "taskgen/grid.hpp"

namespace taskgen {

/// A visual puzzle. HoCMaze uses `maze` (with avatar start and goal); Karel
/// uses `pregrid`/`postgrid` (same wall layout, possibly different markers).
struct Puzzle {
    Domain domain = Domain::HoCMaze;
    Grid maze;
    Grid pregrid;
    Grid postgrid;

    bool operator==(const Puzzle& o) const {
        if (domain != o.domain) return false;
        return domain == Domain::HoCMaze ? maze == o.maze : (pregrid == o.pregrid && postgrid == o.postgrid);
    }
};

/// Checks that a puzzle can be executed: no unknown cells and all required
/// elements present. Returns a reason string for diagnostics, empty if fine.
inline std::string puzzle_defect(const Puzzle& p) {
    if (p.domain == Domain::HoCMaze) {
        if (p.maze.rows == 0) return "empty maze";
        if (p.maze.has_unknown()) return "maze has unknown cells";
        if (!p.maze.avatar) return "maze has no avatar";
        if (!p.maze.goal) return "maze has no goal";
        for (int i = 0; i < p.maze.rows * p.maze.cols; ++i)
            if (p.maze.markers[static_cast<std::size_t>(i)] != 0) return "markers in a maze";
    } else {
        if (p.pregrid.rows == 0) return "empty pregrid";
        if (p.pregrid.has_unknown() || p.postgrid.has_unknown()) return "grid has unknown cells";
        if (!p.pregrid.avatar) return "pregrid has no avatar";
        if (p.pregrid.rows != p.postgrid.rows || p.pregrid.cols != p.postgrid.cols)
            return "pregrid/postgrid size mismatch";
        if (p.pregrid.cells != p.postgrid.cells) return "pregrid/postgrid wall layouts differ";
        if (p.pregrid.goal || p.postgrid.goal) return "goal in a Karel grid";
    }
    return "";
}

inline bool is_complete(const Puzzle& p) { return puzzle_defect(p).empty(); }

/// A task: puzzle plus the block store and the size limit shown to the
/// solver. `store` never contains Run.
struct Task {
    Puzzle puzzle;
    std::set<TokenKind> store;
    int size = 0;
};

/// Token sets a generator may use to fill sketch holes.
struct Delta {
    std::set<TokenKind> actions;
    std::set<Condition> booleans;
    std::set<int> iterators;

    bool operator==(const Delta& o) const {
        return actions == o.actions && booleans == o.booleans && iterators == o.iterators;
    }
};

inline Delta full_delta(Domain d) {
    Delta delta;
    for (TokenKind a : domain_actions(d)) delta.actions.insert(a);
    for (Condition c : domain_conditions(d)) delta.booleans.insert(c);
    for (int x = kMinIterator; x <= kMaxIterator; ++x) delta.iterators.insert(x);
    return delta;
}

/// A task specification: partial grid constraints, code sketch, allowed fill
/// tokens, and the size budget.
struct TaskSpec {
    Domain domain = Domain::HoCMaze;
    Grid puzzleInit;  ///< pre-initialized cells; Unknown cells are undecided
    Ast sketch;
    Delta delta;
    int size = 0;
};

/// A spec whose puzzle is a fully unknown square grid.
inline TaskSpec make_spec(Domain d, const Ast& sketch, int size, int gridSide = 16) {
    TaskSpec s;
    s.domain = d;
    s.puzzleInit = Grid(gridSide, gridSide, Cell::Unknown);
    s.sketch = sketch;
    s.delta = full_delta(d);
    s.size = size;
    return s;
}

/// Block kinds a completed code may use under (sketch, delta): the sketch's
/// constructs plus delta's actions. This is also the task store.
inline std::set<TokenKind> allowed_tokens(const TaskSpec& spec) {
    std::set<TokenKind> out = spec.delta.actions;
    for (const AstNode* n : preorder_blocks(spec.sketch))
        if (is_construct(n->kind)) out.insert(n->kind);
    return out;
}

/// Packages a generated puzzle into the task handed to the solver.
inline Task finalize_task(const Puzzle& puzzle, const TaskSpec& spec, const Ast& code) {
    Task t;
    t.puzzle = puzzle;
    t.store = allowed_tokens(spec);
    t.size = attributes(code).nblock;
    return t;
}

}  // namespace taskgen
