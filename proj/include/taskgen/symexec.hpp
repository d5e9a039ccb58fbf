#pragma once

#include <array>

#include "taskgen/emulator.hpp"
#include "taskgen/rng.hpp"
#include "taskgen/scoring.hpp"

namespace taskgen {

/// Kinds of decisions made while symbolically executing a code over a
/// partially unknown grid.
enum class SymKind : std::uint8_t { InitPose, CellIsPath, CellMarker, GoalNow };

inline std::string to_string(SymKind k) {
    switch (k) {
        case SymKind::InitPose: return "init-pose";
        case SymKind::CellIsPath: return "cell-is-path";
        case SymKind::CellMarker: return "cell-marker";
        case SymKind::GoalNow: return "goal-now";
    }
    return "?";
}

/// Fixed action head shared by every decision kind:
///   0..19  start pose, quadrant * 4 + orientation
///          (quadrants: top-left, bottom-left, center, top-right, bottom-right;
///           orientations: N, E, S, W)
///   20/21  queried cell is wall / is path
///   22/23  queried cell has no marker / one marker
///   24/25  goal is not here / goal is here (loop exit)
constexpr int kSymActionCount = 26;

inline int sym_init_pose_action(int quadrant, int orientation) { return quadrant * 4 + orientation; }

/// Representative start cell per quadrant: the center of each half-split
/// region (and of the whole grid), rounded toward smaller indices.
inline std::array<std::pair<int, int>, 5> quadrant_centers(int rows, int cols) {
    auto mid = [](int lo, int hi) { return (lo + hi - 1) / 2; };  // region [lo, hi)
    const int rm = rows / 2, cm = cols / 2;
    return {{{mid(0, rm), mid(0, cm)},
             {mid(rm, rows), mid(0, cm)},
             {mid(0, rows), mid(0, cols)},
             {mid(0, rm), mid(cm, cols)},
             {mid(rm, rows), mid(cm, cols)}}};
}

/// Number of scalar features fed to the puzzle policy next to the grid view.
inline int sym_feature_count(Domain d) { return d == Domain::HoCMaze ? 9 : 12; }

/// One puzzle-generation MDP state. Self-contained: the episode identity
/// (code, spec, decisions so far) is carried along, so stepping is a pure
/// function of the state and the chosen action.
struct SymState {
    // episode identity
    Ast code;
    TaskSpec spec;
    ExecConfig cfg;
    std::vector<int> decisions;  ///< caller-chosen action indices so far

    // status
    bool terminal = false;
    bool failed = false;
    RunStatus status = RunStatus::Done;

    // pending decision (valid while not terminal)
    SymKind kind = SymKind::InitPose;
    int row = -1, col = -1;      ///< queried cell (CellIsPath / CellMarker / GoalNow)
    int nodeId = -1;             ///< code block that triggered the query
    std::vector<int> legal;      ///< legal action indices, ascending
    std::vector<double> features;

    // world view
    Grid partial;                        ///< starting grid built so far (Unknown = undecided)
    Grid board;                          ///< execution view (markers after actions)
    std::vector<std::uint8_t> markerKnown;
    bool poseSet = false;
    Pose pose;
    std::vector<TraceEntry> trace;
    int pathUnknown = 0;
    int markerUnknown = 0;

    // terminal payload (success only)
    Puzzle puzzle;
    Task task;
    double reward = 0.0;
};

inline int sym_unknown_count(const SymState& s) { return s.pathUnknown + s.markerUnknown; }

/// Decision policy over SymState. Logits cover the whole action head; the
/// engine masks them down to `state.legal`.
class PuzzlePolicy {
  public:
    virtual ~PuzzlePolicy() = default;
    virtual std::vector<double> logits(const SymState&) = 0;
    virtual double value(const SymState&) = 0;
};

class UniformPuzzlePolicy final : public PuzzlePolicy {
  public:
    std::vector<double> logits(const SymState&) override { return std::vector<double>(kSymActionCount, 0.0); }
    double value(const SymState&) override { return 0.0; }
};

/// One recorded decision of an episode (forced single-choice advances are
/// not recorded; they carry no information).
struct SymStep {
    SymState state;
    int action = 0;
};

struct SymEpisode {
    bool success = false;
    RunStatus status = RunStatus::Done;
    Puzzle puzzle;
    Task task;
    double reward = 0.0;
    std::vector<SymStep> steps;
    RunResult symRun;       ///< the symbolic execution's run result
    RunResult concreteRun;  ///< verification run on the finished puzzle (success only)
};

namespace detail {

struct SymHalt {};

struct SymOutcome {
    bool success = false;
    RunStatus status = RunStatus::Done;
    Puzzle puzzle;
    RunResult symRun;
    RunResult concreteRun;
};

struct SymRunner {
    const Ast& code;
    const TaskSpec& spec;
    ExecConfig cfg;
    std::function<int(const SymState&)> choose;        ///< real decisions (two or more options)
    std::function<void(SymState&&, int)> record;       ///< optional, after each real decision

    ExecEngine eng;
    Grid pregrid;
    std::vector<std::uint8_t> markerKnown;
    std::vector<std::pair<int, int>> goalDenied;
    std::optional<std::pair<int, int>> goalCell;
    bool goalPreset = false;
    std::vector<int> chosen;
    int pathUnknown = 0;
    int markerUnknown = 0;

    // coverage bookkeeping between decisions
    std::vector<std::uint8_t> covered;
    std::size_t coverCursor = 0;
    int coverCount = 0;
    bool coverGrew = false;
    int totalBlocks = 0;

    SymRunner(const Ast& c, const TaskSpec& s, const ExecConfig& config) : code(c), spec(s), cfg(config) {}

    std::size_t cell_index(int r, int c) const { return static_cast<std::size_t>(r) * pregrid.cols + c; }

    void absorb_coverage() {
        const auto& ex = eng.res.executedBlocks;
        for (; coverCursor < ex.size(); ++coverCursor) {
            const int id = ex[coverCursor];
            if (!covered[static_cast<std::size_t>(id)]) {
                covered[static_cast<std::size_t>(id)] = 1;
                ++coverCount;
                coverGrew = true;
            }
        }
    }

    SymState make_view(SymKind k, int row, int col, std::vector<int> legal) {
        absorb_coverage();
        SymState v;
        v.code = code;
        v.spec = spec;
        v.cfg = cfg;
        v.decisions = chosen;
        v.kind = k;
        v.row = row;
        v.col = col;
        v.nodeId = eng.curNode;
        v.legal = std::move(legal);
        v.partial = pregrid;
        v.board = eng.board;
        v.markerKnown = markerKnown;
        v.poseSet = k != SymKind::InitPose;
        v.pose = eng.pose;
        v.trace = eng.res.trace;
        v.pathUnknown = pathUnknown;
        v.markerUnknown = markerUnknown;

        const bool ahead = [&] {
            if (k == SymKind::InitPose || row < 0) return false;
            auto [dr, dc] = dir_delta(eng.pose.dir);
            return row == eng.pose.row + dr && col == eng.pose.col + dc;
        }();
        const bool late = 2 * eng.res.steps >= cfg.stepLimit;
        const bool revisit =
            v.poseSet &&
            eng.res.visitCounts[static_cast<std::size_t>(eng.pose.row) * eng.board.cols + eng.pose.col] > 1;
        const bool fullCover = coverCount == totalBlocks;
        std::vector<double>& f = v.features;
        f.push_back(k == SymKind::InitPose ? 1.0 : 0.0);
        f.push_back(k == SymKind::CellIsPath ? 1.0 : 0.0);
        if (spec.domain == Domain::HoCMaze) f.push_back(k == SymKind::GoalNow ? 1.0 : 0.0);
        else f.push_back(k == SymKind::CellMarker ? 1.0 : 0.0);
        f.push_back(coverGrew ? 1.0 : 0.0);
        f.push_back(fullCover ? 1.0 : 0.0);
        f.push_back(ahead ? 1.0 : 0.0);
        f.push_back(late ? 1.0 : 0.0);
        f.push_back(eng.loopDepth > 0 ? 1.0 : 0.0);
        f.push_back(revisit ? 1.0 : 0.0);
        if (spec.domain == Domain::Karel) {
            f.push_back((v.poseSet && row == eng.pose.row && col == eng.pose.col) ? 1.0 : 0.0);
            f.push_back(eng.putCount > 0 ? 1.0 : 0.0);
            f.push_back(eng.pickCount > 0 ? 1.0 : 0.0);
        }
        return v;
    }

    int decide(SymKind k, int row, int col, std::vector<int> legal) {
        if (legal.size() == 1) return legal.front();  // forced, not a decision
        SymState view = make_view(k, row, col, legal);
        coverGrew = false;
        const int a = choose(view);
        bool ok = false;
        for (int t : view.legal) ok = ok || t == a;
        if (!ok) throw IllegalDecision("action " + std::to_string(a) + " not in the legal set");
        chosen.push_back(a);
        if (record) record(std::move(view), a);
        return a;
    }

    void set_path(int r, int c, Cell v) {
        eng.board.at(r, c) = v;
        pregrid.at(r, c) = v;
        --pathUnknown;
        if (spec.domain == Domain::Karel && v == Cell::Wall && !markerKnown[cell_index(r, c)]) {
            markerKnown[cell_index(r, c)] = 1;
            --markerUnknown;
        }
    }

    bool hook_wall(int r, int c) {
        const Cell cur = eng.board.at(r, c);
        if (cur != Cell::Unknown) return cur == Cell::Wall;
        const int a = decide(SymKind::CellIsPath, r, c, {20, 21});
        set_path(r, c, a == 21 ? Cell::Free : Cell::Wall);
        return a != 21;
    }

    std::uint8_t hook_marker(int r, int c) {
        const std::size_t i = cell_index(r, c);
        if (!markerKnown[i]) {
            const int a = decide(SymKind::CellMarker, r, c, {22, 23});
            const std::uint8_t v = a == 23 ? 1 : 0;
            eng.board.marker_at(r, c) = v;
            pregrid.marker_at(r, c) = v;
            markerKnown[i] = 1;
            --markerUnknown;
        }
        return eng.board.marker_at(r, c);
    }

    bool hook_goal() {
        const std::pair<int, int> here{eng.pose.row, eng.pose.col};
        if (goalPreset) return goalCell && here == *goalCell;
        if (goalCell) return here == *goalCell;
        std::vector<int> legal{24};
        bool denied = false;
        for (const auto& d : goalDenied) denied = denied || d == here;
        if (!denied) legal.push_back(25);
        const int a = decide(SymKind::GoalNow, here.first, here.second, std::move(legal));
        if (a == 25) {
            goalCell = here;
            return true;
        }
        goalDenied.push_back(here);
        return false;
    }

    SymOutcome run() {
        SymOutcome out;
        eng.board = spec.puzzleInit;
        pregrid = spec.puzzleInit;
        eng.cfg = cfg;
        eng.eventCap = 64LL * cfg.stepLimit;
        totalBlocks = attributes(code).nblock;
        covered.assign(static_cast<std::size_t>(totalBlocks), 0);

        const std::size_t ncells = static_cast<std::size_t>(pregrid.rows) * pregrid.cols;
        markerKnown.assign(ncells, 1);
        for (std::size_t i = 0; i < ncells; ++i)
            if (pregrid.cells[i] == Cell::Unknown) ++pathUnknown;
        if (spec.domain == Domain::Karel) {
            for (std::size_t i = 0; i < ncells; ++i)
                if (pregrid.cells[i] == Cell::Unknown) {
                    markerKnown[i] = 0;
                    ++markerUnknown;
                }
        }
        goalCell = spec.puzzleInit.goal;
        goalPreset = goalCell.has_value();

        // start pose: preset, or the first decision
        if (spec.puzzleInit.avatar) {
            eng.pose = *spec.puzzleInit.avatar;
            if (eng.board.at(eng.pose.row, eng.pose.col) == Cell::Wall) {
                eng.res.status = RunStatus::Crashed;
                out.status = RunStatus::Crashed;
                out.symRun = eng.res;
                return out;
            }
            if (eng.board.at(eng.pose.row, eng.pose.col) == Cell::Unknown)
                set_path(eng.pose.row, eng.pose.col, Cell::Free);
        } else {
            const auto centers = quadrant_centers(pregrid.rows, pregrid.cols);
            std::vector<int> legal;
            for (int q = 0; q < 5; ++q)
                if (eng.board.at(centers[static_cast<std::size_t>(q)].first,
                                 centers[static_cast<std::size_t>(q)].second) != Cell::Wall)
                    for (int o = 0; o < 4; ++o) legal.push_back(sym_init_pose_action(q, o));
            std::sort(legal.begin(), legal.end());
            if (legal.empty()) {
                eng.res.status = RunStatus::Crashed;
                out.status = RunStatus::Crashed;
                out.symRun = eng.res;
                return out;
            }
            const int a = decide(SymKind::InitPose, -1, -1, std::move(legal));
            const auto [r, c] = centers[static_cast<std::size_t>(a / 4)];
            eng.pose = Pose{r, c, static_cast<Dir>(a % 4)};
            if (eng.board.at(r, c) == Cell::Unknown) set_path(r, c, Cell::Free);
        }
        pregrid.avatar = eng.pose;
        eng.board.avatar = eng.pose;
        const Pose startPose = eng.pose;

        eng.wallHook = [this](int r, int c) { return hook_wall(r, c); };
        eng.markerHook = [this](int r, int c) { return hook_marker(r, c); };
        if (spec.domain == Domain::HoCMaze) eng.goalHook = [this]() { return hook_goal(); };

        eng.res.visitCounts.assign(ncells, 0);
        eng.res.visitCounts[cell_index(eng.pose.row, eng.pose.col)] = 1;
        eng.mark_executed(0);
        int cursor = 1;
        eng.run_body(code.root.body, cursor);

        eng.res.status = eng.status;
        eng.res.finalPose = eng.pose;
        eng.res.finalGrid = eng.board;
        eng.res.finalGrid.avatar = eng.pose;
        std::sort(eng.res.executedBlocks.begin(), eng.res.executedBlocks.end());
        eng.res.executedBlocks.erase(
            std::unique(eng.res.executedBlocks.begin(), eng.res.executedBlocks.end()),
            eng.res.executedBlocks.end());
        out.symRun = eng.res;
        out.status = eng.status;
        if (eng.status != RunStatus::Done) return out;

        // default fills for cells the execution never touched
        Puzzle pz;
        pz.domain = spec.domain;
        if (spec.domain == Domain::HoCMaze) {
            Grid maze = pregrid;
            for (Cell& cell : maze.cells)
                if (cell == Cell::Unknown) cell = Cell::Wall;
            maze.avatar = startPose;
            maze.goal = goalCell ? goalCell : std::optional<std::pair<int, int>>({eng.pose.row, eng.pose.col});
            pz.maze = std::move(maze);
        } else {
            Grid pre = pregrid;
            for (Cell& cell : pre.cells)
                if (cell == Cell::Unknown) cell = Cell::Free;
            pre.avatar = startPose;
            Puzzle tmp;
            tmp.domain = Domain::Karel;
            tmp.pregrid = pre;
            tmp.postgrid = pre;
            const RunResult first = execute(code, tmp, cfg);
            if (first.status != RunStatus::Done) return out;  // cannot happen when sound
            pz.pregrid = std::move(pre);
            pz.postgrid = first.finalGrid;
        }

        const RunResult verify = execute(code, pz, cfg);
        if (verify.trace != out.symRun.trace)
            throw std::logic_error("symbolic execution diverged from the concrete emulator");
        out.concreteRun = verify;
        if (!verify.solved) return out;  // start-goal presets can make the episode unsolvable
        out.success = true;
        out.puzzle = std::move(pz);
        return out;
    }
};

inline void sym_check_inputs(const Ast& code, const TaskSpec& spec) {
    if (!is_complete(code)) throw DomainError("cannot symbolically execute a sketch");
    if (code.domain != spec.domain) throw DomainError("code/spec domain mismatch");
    if (spec.puzzleInit.rows <= 0 || spec.puzzleInit.cols <= 0) throw DomainError("spec grid is empty");
    validate(code, false);
}

}  // namespace detail

/// Runs one puzzle-generation episode: decisions are sampled from the
/// policy's masked softmax. Failures (crash, step limit, unsatisfiable
/// presets) come back in-band with reward 0.
inline SymEpisode generate_puzzle(const Ast& code, const TaskSpec& spec, PuzzlePolicy& policy, Rng& rng,
                                  const ExecConfig& cfg = {}) {
    detail::sym_check_inputs(code, spec);
    SymEpisode ep;
    detail::SymRunner runner(code, spec, cfg);
    runner.choose = [&](const SymState& v) {
        const std::vector<double> lg = policy.logits(v);
        double mx = lg[static_cast<std::size_t>(v.legal[0])];
        for (int t : v.legal) mx = std::max(mx, lg[static_cast<std::size_t>(t)]);
        std::vector<double> w;
        w.reserve(v.legal.size());
        for (int t : v.legal) w.push_back(std::exp(lg[static_cast<std::size_t>(t)] - mx));
        return v.legal[static_cast<std::size_t>(rng.next_categorical(w))];
    };
    runner.record = [&](SymState&& v, int a) { ep.steps.push_back(SymStep{std::move(v), a}); };
    detail::SymOutcome out = runner.run();
    ep.status = out.status;
    ep.symRun = std::move(out.symRun);
    if (!out.success) return ep;
    ep.success = true;
    ep.puzzle = std::move(out.puzzle);
    ep.concreteRun = std::move(out.concreteRun);
    ep.task = finalize_task(ep.puzzle, spec, code);
    ep.reward = reward_score(code, ep.task, cfg);
    return ep;
}

inline SymEpisode generate_puzzle_uniform(const Ast& code, const TaskSpec& spec, Rng& rng,
                                          const ExecConfig& cfg = {}) {
    UniformPuzzlePolicy p;
    return generate_puzzle(code, spec, p, rng, cfg);
}

namespace detail {

/// Replays `decisions` and materializes either the next pending state or the
/// terminal state.
inline SymState sym_materialize(const Ast& code, const TaskSpec& spec, const ExecConfig& cfg,
                                const std::vector<int>& decisions) {
    sym_check_inputs(code, spec);
    SymState pendingOut;
    bool halted = false;
    SymRunner runner(code, spec, cfg);
    std::size_t at = 0;
    runner.choose = [&](const SymState& v) -> int {
        if (at < decisions.size()) return decisions[at++];
        pendingOut = v;
        halted = true;
        throw SymHalt{};
    };
    SymOutcome out;
    try {
        out = runner.run();
    } catch (const SymHalt&) {
        return pendingOut;
    }
    if (at < decisions.size()) throw IllegalDecision("more decisions than the episode consumes");
    (void)halted;

    SymState t;
    t.code = code;
    t.spec = spec;
    t.cfg = cfg;
    t.decisions = decisions;
    t.terminal = true;
    t.failed = !out.success;
    t.status = out.status;
    t.partial = runner.pregrid;
    t.board = out.symRun.finalGrid;
    t.markerKnown = runner.markerKnown;
    t.poseSet = true;
    t.pose = out.symRun.finalPose;
    t.trace = out.symRun.trace;
    t.pathUnknown = runner.pathUnknown;
    t.markerUnknown = runner.markerUnknown;
    if (out.success) {
        t.puzzle = out.puzzle;
        t.task = finalize_task(t.puzzle, spec, code);
        t.reward = reward_score(code, t.task, cfg);
    }
    return t;
}

}  // namespace detail

/// First state of the puzzle-generation MDP for (code, spec).
inline SymState sym_init(const Ast& code, const TaskSpec& spec, const ExecConfig& cfg = {}) {
    return detail::sym_materialize(code, spec, cfg, {});
}

/// Deterministic MDP transition: applies one legal decision and runs the
/// symbolic execution forward to the next decision point or to the end.
inline SymState mdp_step(const SymState& s, int action) {
    if (s.terminal) throw IllegalDecision("episode already ended");
    bool ok = false;
    for (int t : s.legal) ok = ok || t == action;
    if (!ok) throw IllegalDecision("action " + std::to_string(action) + " not in the legal set");
    std::vector<int> decisions = s.decisions;
    decisions.push_back(action);
    return detail::sym_materialize(s.code, s.spec, s.cfg, decisions);
}

}  // namespace taskgen
