#include <catch2/catch_amalgamated.hpp>

#include "taskgen/emulator.hpp"
#include "taskgen/parser.hpp"

using namespace taskgen;

namespace {

Puzzle hoc_puzzle(const std::string& maze) {
    Puzzle p;
    p.domain = Domain::HoCMaze;
    p.maze = load_grid(maze);
    return p;
}

Puzzle karel_puzzle(const std::string& pre, const std::string& post) {
    Puzzle p;
    p.domain = Domain::Karel;
    p.pregrid = load_grid(pre);
    p.postgrid = load_grid(post);
    return p;
}

const char* kCorridor =
    "########\n"
    "#>....x#\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n";

}  // namespace

TEST_CASE("corridor walk reaches goal") {
    Puzzle p = hoc_puzzle(kCorridor);
    Ast code = parse_code("def Run(){RepeatUntil(goal){move}}", Domain::HoCMaze);
    RunResult r = execute(code, p);
    CHECK(r.status == RunStatus::Done);
    CHECK(r.solved);
    CHECK(r.steps == 5);
    CHECK(r.finalPose == Pose{1, 6, Dir::E});
    CHECK(r.executedBlocks == std::vector<int>{0, 1, 2});
    CHECK(r.loopIters.count(1) == 5);
    // goal check recorded at each loop head: 5 false + final true
    int checks = 0;
    for (const auto& e : r.trace)
        if (e.op != TraceOp::Action) ++checks;
    CHECK(checks == 6);
    // every corridor cell visited exactly once
    for (int c = 1; c <= 6; ++c) CHECK(r.visitCounts[8 + c] == 1);
}

TEST_CASE("move into wall crashes") {
    Puzzle p = hoc_puzzle(kCorridor);
    RunResult r = execute(parse_code("def Run(){turnLeft; move}", Domain::HoCMaze), p);
    CHECK(r.status == RunStatus::Crashed);
    CHECK(!r.solved);
    // crashing action is still traced
    CHECK(r.trace.back().op == TraceOp::Action);
    CHECK(r.trace.back().kind == TokenKind::Move);
}

TEST_CASE("reaching goal mid-body does not finish the run") {
    // goal two cells in; overshooting crashes at the wall
    Puzzle p = hoc_puzzle(
        "####\n"
        "#>x#\n"
        "####\n");
    RunResult r = execute(parse_code("def Run(){move; move}", Domain::HoCMaze), p);
    CHECK(r.status == RunStatus::Crashed);
    CHECK(!r.solved);
    RunResult ok = execute(parse_code("def Run(){move}", Domain::HoCMaze), p);
    CHECK(ok.solved);
}

TEST_CASE("step limit counts primitive actions") {
    Puzzle p = hoc_puzzle(kCorridor);
    ExecConfig cfg;
    cfg.stepLimit = 50;
    RunResult r = execute(parse_code("def Run(){RepeatUntil(goal){turnLeft}}", Domain::HoCMaze), p, cfg);
    CHECK(r.status == RunStatus::StepLimit);
    CHECK(r.steps == 50);
}

TEST_CASE("zero-progress loop is cut by the event guard") {
    Puzzle p = hoc_puzzle(kCorridor);
    ExecConfig cfg;
    cfg.stepLimit = 100;
    RunResult r = execute(parse_code("def Run(){RepeatUntil(goal){If(pathLeft){move}}}", Domain::HoCMaze), p, cfg);
    CHECK(r.status == RunStatus::StepLimit);
    CHECK(r.steps == 0);
}

TEST_CASE("repeat runs a fixed count") {
    Puzzle p = hoc_puzzle(kCorridor);
    RunResult r = execute(parse_code("def Run(){Repeat(3){move}; Repeat(2){turnLeft}}", Domain::HoCMaze), p);
    CHECK(r.status == RunStatus::Done);
    CHECK(!r.solved);  // not at goal
    CHECK(r.finalPose == Pose{1, 4, Dir::W});
    CHECK(r.loopIters.count(1) == 3);
    CHECK(r.loopIters.count(3) == 2);
}

TEST_CASE("karel markers put pick and crash at bounds") {
    Puzzle p = karel_puzzle(
        "####\n"
        "#>.#\n"
        "####\n",
        "####\n"
        "#1.#\n"
        "####\n");
    RunResult r = execute(parse_code("def Run(){putMarker}", Domain::Karel), p);
    CHECK(r.status == RunStatus::Done);
    CHECK(r.solved);
    CHECK(r.finalGrid.marker_at(1, 1) == 1);

    RunResult pickEmpty = execute(parse_code("def Run(){pickMarker}", Domain::Karel), p);
    CHECK(pickEmpty.status == RunStatus::Crashed);

    // ten puts exceed the marker cap
    RunResult overflow = execute(
        parse_code("def Run(){Repeat(10){putMarker}}", Domain::Karel), p);
    CHECK(overflow.status == RunStatus::Crashed);
    CHECK(overflow.steps == 10);

    RunResult nine = execute(parse_code("def Run(){Repeat(9){putMarker}}", Domain::Karel), p);
    CHECK(nine.status == RunStatus::Done);
    CHECK(nine.finalGrid.marker_at(1, 1) == 9);
}

TEST_CASE("karel solved compares boards not pose") {
    Puzzle p = karel_puzzle(
        "#####\n"
        "#>1.#\n"
        "#####\n",
        "#####\n"
        "#.1.#\n"
        "#####\n");
    // pregrid already matches postgrid markers; empty program solves
    RunResult r = execute(parse_code("def Run(){}", Domain::Karel), p);
    CHECK(r.solved);

    ExecConfig strict;
    strict.karelRequirePose = true;
    // with pose matching on, only reaching the drawn avatar cell counts
    Puzzle q = p;
    q.postgrid = load_grid(
        "#####\n"
        "#.A.#\n"
        "#####\n"
        "A E 1\n");
    CHECK(!execute(parse_code("def Run(){}", Domain::Karel), q, strict).solved);
    CHECK(execute(parse_code("def Run(){move}", Domain::Karel), q, strict).solved);
    CHECK(execute(parse_code("def Run(){move}", Domain::Karel), q).solved);
}

TEST_CASE("while and conditions") {
    Puzzle p = karel_puzzle(
        "#######\n"
        "#>111.#\n"
        "#######\n",
        "#######\n"
        "#.....#\n"
        "#######\n");
    Ast code = parse_code("def Run(){While(pathAhead){move; If(markerPresent){pickMarker}}}", Domain::Karel);
    RunResult r = execute(code, p);
    CHECK(r.status == RunStatus::Done);
    CHECK(r.solved);
    CHECK(r.loopIters.count(1) == 4);
    CHECK(r.branchThen.count(3) == 3);
    // marker conservation: total picked equals pregrid total
    int total = 0;
    for (auto m : r.finalGrid.markers) total += m;
    CHECK(total == 0);
}

TEST_CASE("ifelse branches record separately") {
    Puzzle p = hoc_puzzle(
        "######\n"
        "#>...#\n"
        "####.#\n"
        "####x#\n"
        "######\n");
    Ast code = parse_code(
        "def Run(){RepeatUntil(goal){If(pathAhead){move} Else{turnRight}}}", Domain::HoCMaze);
    RunResult r = execute(code, p);
    CHECK(r.solved);
    CHECK(r.branchThen.count(2) > 0);
    CHECK(r.branchElse.count(2) > 0);
}

TEST_CASE("incomplete puzzle or code rejected") {
    Puzzle p = hoc_puzzle(kCorridor);
    Ast sketch = parse_sketch_text("def Run(){a}", Domain::HoCMaze);
    CHECK_THROWS_AS(execute(sketch, p), DomainError);
    Puzzle unk = p;
    unk.maze.cells[9] = Cell::Unknown;
    CHECK_THROWS_AS(execute(parse_code("def Run(){move}", Domain::HoCMaze), unk), IncompletePuzzle);
    CHECK_THROWS_AS(execute(parse_code("def Run(){move}", Domain::Karel), p), DomainError);
}

TEST_CASE("solves honors store and size") {
    Task t;
    t.puzzle = hoc_puzzle(kCorridor);
    t.store = {TokenKind::Move, TokenKind::RepeatUntil};
    t.size = 3;
    Ast code = parse_code("def Run(){RepeatUntil(goal){move}}", Domain::HoCMaze);
    CHECK(solves(code, t));
    Task small = t;
    small.size = 2;
    CHECK(!solves(code, small));
    Task noLoop = t;
    noLoop.store = {TokenKind::Move};
    CHECK(!solves(code, noLoop));
}
