#include <catch2/catch_amalgamated.hpp>

#include "taskgen/parser.hpp"
#include "taskgen/scoring.hpp"
#include "taskgen/symexec.hpp"

using namespace taskgen;

namespace {

constexpr double kTol = 1e-12;

Task hoc_task(const std::string& maze, int size = 16) {
    Task t;
    t.puzzle.domain = Domain::HoCMaze;
    t.puzzle.maze = load_grid(maze);
    t.store = {TokenKind::Move,   TokenKind::TurnLeft, TokenKind::TurnRight,
               TokenKind::Repeat, TokenKind::RepeatUntil, TokenKind::If, TokenKind::IfElse};
    t.size = size;
    return t;
}

Task karel_task(const std::string& pre, const std::string& post, int size = 16) {
    Task t;
    t.puzzle.domain = Domain::Karel;
    t.puzzle.pregrid = load_grid(pre);
    t.puzzle.postgrid = load_grid(post);
    t.store = {TokenKind::Move,      TokenKind::TurnLeft, TokenKind::TurnRight, TokenKind::PutMarker,
               TokenKind::PickMarker, TokenKind::Repeat,  TokenKind::While,     TokenKind::If,
               TokenKind::IfElse};
    t.size = size;
    return t;
}

const char* kCorridor8 =
    "########\n"
    "#>....x#\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n";

}  // namespace

TEST_CASE("trace counters") {
    using K = TokenKind;
    QualCounters q = counters_from_actions(
        {K::Move, K::Move, K::Move, K::Move, K::Move, K::TurnLeft, K::Move, K::Move});
    CHECK(q.moves == 7);
    CHECK(q.turns == 1);
    CHECK(q.segments == 1);
    CHECK(q.longSegments == 0);
    CHECK(q.turnSegments == 0);

    QualCounters r = counters_from_actions(
        {K::Move, K::PutMarker, K::Move, K::PutMarker, K::Move, K::Move, K::Move, K::Move});
    CHECK(r.moves == 6);
    CHECK(r.segments == 1);  // the picks split the early moves into short runs

    QualCounters s = counters_from_actions({K::TurnLeft, K::TurnLeft, K::TurnLeft, K::TurnLeft});
    CHECK(s.turnSegments == 1);
}

TEST_CASE("quality formula worked example") {
    QualCounters q;
    q.moves = 16;
    q.turns = 4;
    q.segments = 2;
    q.longSegments = 1;
    q.turnSegments = 0;
    CHECK(qual_value(q, 16) == Catch::Approx(0.47265625).margin(kTol));
    // all-zero counters keep only the turn-penalty term
    CHECK(qual_value(QualCounters{}, 16) == Catch::Approx(0.25).margin(kTol));
}

TEST_CASE("corridor loop scores well") {
    Task t = hoc_task(kCorridor8);
    Ast code = parse_code("def Run(){RepeatUntil(goal){move}}", Domain::HoCMaze);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.cov == 1.0);
    CHECK(r.nocross == 1.0);
    CHECK(r.nocut);
    CHECK(r.notred);
    CHECK(r.qual == Catch::Approx(0.35546875).margin(kTol));
    CHECK(r.total == Catch::Approx(0.677734375).margin(kTol));
}

TEST_CASE("adjacent inverse turns zero the score") {
    Task t = hoc_task(kCorridor8);
    Ast code = parse_code("def Run(){turnLeft; turnRight; RepeatUntil(goal){move}}", Domain::HoCMaze);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(!r.notred);
    CHECK(r.total == 0.0);
}

TEST_CASE("crash scores zero") {
    Task t = hoc_task(kCorridor8);
    ScoreReport r = score_code_task(parse_code("def Run(){turnLeft; move}", Domain::HoCMaze), t);
    CHECK(!r.solved);
    CHECK(r.total == 0.0);
}

TEST_CASE("basic-action shortcut zeroes the score") {
    Task t = hoc_task(
        "########\n"
        "#>.x####\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code("def Run(){RepeatUntil(goal){If(pathAhead){move} Else{turnLeft}}}", Domain::HoCMaze);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(!r.nocut);
    CHECK(r.total == 0.0);
}

TEST_CASE("unexecuted branch lowers coverage") {
    Task t = hoc_task(kCorridor8);
    Ast code = parse_code("def Run(){RepeatUntil(goal){If(pathAhead){move} Else{turnLeft}}}", Domain::HoCMaze);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.cov == Catch::Approx(0.8).margin(kTol));
    CHECK(r.nocut);    // five plain moves cost six blocks, one more than the code
    CHECK(!r.notred);  // splicing the conditional to its then-branch still solves
    CHECK(r.total == 0.0);
}

TEST_CASE("l-shaped walk with both branches") {
    Task t = hoc_task(
        "########\n"
        "#>.....#\n"
        "######.#\n"
        "######.#\n"
        "######.#\n"
        "######.#\n"
        "######x#\n"
        "########\n");
    Ast code = parse_code("def Run(){RepeatUntil(goal){If(pathAhead){move} Else{turnRight}}}", Domain::HoCMaze);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.cov == 1.0);
    CHECK(r.nocross == 1.0);
    CHECK(r.nocut);
    CHECK(r.notred);
    CHECK(r.qual == Catch::Approx(0.484375).margin(kTol));
    CHECK(r.total == Catch::Approx(0.7421875).margin(kTol));
}

TEST_CASE("karel pick corridor") {
    Task t = karel_task(
        "########\n"
        "#>111.##\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#....>##\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code("def Run(){While(pathAhead){move; If(markerPresent){pickMarker}}}", Domain::Karel);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.cov == 1.0);
    CHECK(r.nocross == 1.0);
    CHECK(r.nocut);
    CHECK(r.notred);
    CHECK(r.qual == Catch::Approx(0.296875).margin(kTol));
    CHECK(r.cutqual == Catch::Approx(0.28515625).margin(kTol));
    CHECK(r.total == Catch::Approx(0.52734375).margin(kTol));
}

TEST_CASE("karel put corridor") {
    Task t = karel_task(
        "########\n"
        "#>.....#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#11111>#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code("def Run(){While(pathAhead){putMarker; move}}", Domain::Karel);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.qual == Catch::Approx(0.30859375).margin(kTol));
    CHECK(r.cutqual == Catch::Approx(0.296875).margin(kTol));
    CHECK(r.total == Catch::Approx(0.53515625).margin(kTol));
}

TEST_CASE("karel pick on empty crashes to zero") {
    Task t = karel_task(
        "########\n"
        "#>.....#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#>.....#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    ScoreReport r = score_code_task(parse_code("def Run(){pickMarker}", Domain::Karel), t);
    CHECK(!r.solved);
    CHECK(r.total == 0.0);
}

TEST_CASE("identical conditional branches are redundant") {
    Task t = karel_task(
        "########\n"
        "#>..####\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#>..####\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code("def Run(){While(pathAhead){If(pathLeft){move} Else{move}}}", Domain::Karel);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(!r.notred);
    CHECK(r.total == 0.0);
}

TEST_CASE("karel spin and march") {
    Task t = karel_task(
        "########\n"
        "#>.....#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#111111#\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code(
        "def Run(){putMarker; turnLeft; turnLeft; turnLeft; turnLeft; While(pathAhead){move; putMarker}}",
        Domain::Karel);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.cov == 1.0);
    CHECK(r.nocross == 1.0);
    CHECK(r.nocut);
    CHECK(r.notred);
    CHECK(r.qual == Catch::Approx(0.33984375).margin(kTol));
    CHECK(r.cutqual == Catch::Approx(0.30859375).margin(kTol));
    CHECK(r.total == Catch::Approx((1.0 + 0.33984375 + 0.30859375) / 3.0).margin(kTol));
}

TEST_CASE("revisited cell fails the crossing check") {
    Task t = karel_task(
        "########\n"
        "#>.#####\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n",
        "########\n"
        "#2.#####\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n"
        "########\n");
    Ast code = parse_code(
        "def Run(){putMarker; move; turnLeft; turnLeft; move; putMarker}", Domain::Karel);
    ScoreReport r = score_code_task(code, t);
    CHECK(r.solved);
    CHECK(r.nocross == Catch::Approx(0.5).margin(kTol));
    CHECK(!r.nocut);  // two puts in place already solve it
    CHECK(r.total == 0.0);
}

TEST_CASE("reward fast path agrees with the full scorer") {
    for (Domain d : {Domain::HoCMaze, Domain::Karel}) {
        const std::vector<std::string> texts =
            d == Domain::HoCMaze
                ? std::vector<std::string>{"def Run(){move move move turnLeft move}",
                                           "def Run(){Repeat(4){move} turnRight move}",
                                           "def Run(){RepeatUntil(goal){If(pathLeft){turnLeft} move}}",
                                           "def Run(){turnLeft turnLeft move}"}
                : std::vector<std::string>{"def Run(){putMarker move putMarker move move}",
                                           "def Run(){While(pathAhead){move putMarker}}",
                                           "def Run(){Repeat(3){move} pickMarker}",
                                           "def Run(){turnLeft move turnLeft move}"};
        Rng rng(31);
        for (const std::string& text : texts) {
            const Ast code = parse_code(text, d);
            const TaskSpec spec = make_spec(d, code, attributes(code).nblock, 10);
            for (int e = 0; e < 30; ++e) {
                const SymEpisode ep = generate_puzzle_uniform(code, spec, rng);
                if (!ep.success) continue;
                INFO(text << " episode " << e);
                CHECK(reward_score(code, ep.task) == score_code_task(code, ep.task).total);
                CHECK(ep.reward == score_code_task(code, ep.task).total);
            }
        }
    }
}
