#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "taskgen/io.hpp"

using namespace taskgen;

namespace {

std::filesystem::path scratch_dir() {
    const auto p = std::filesystem::temp_directory_path() / "taskgen-io-test";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("spec json round trip") {
    const Ast sketch =
        parse_sketch_text("def Run(){a RepeatUntil(goal){a If(b){a} Else{a} a}}", Domain::HoCMaze);
    TaskSpec spec = make_spec(Domain::HoCMaze, sketch, 10, 12);
    spec.puzzleInit.at(2, 3) = Cell::Wall;
    spec.puzzleInit.at(4, 4) = Cell::Free;
    spec.puzzleInit.avatar = Pose{4, 4, Dir::S};

    const TaskSpec back = spec_from_json(spec_to_json(spec));
    CHECK(back.domain == spec.domain);
    CHECK(back.size == spec.size);
    CHECK(print_sketch(back.sketch) == print_sketch(spec.sketch));
    CHECK(back.puzzleInit == spec.puzzleInit);
    CHECK(back.delta == spec.delta);
}

TEST_CASE("task json round trip") {
    SECTION("maze") {
        Task t;
        t.puzzle.domain = Domain::HoCMaze;
        t.puzzle.maze = load_grid(
            "####\n"
            "#>x#\n"
            "####\n");
        t.store = {TokenKind::Move, TokenKind::Repeat};
        t.size = 4;
        const Task back = task_from_json(task_to_json(t));
        CHECK(back.puzzle.domain == Domain::HoCMaze);
        CHECK(back.puzzle.maze == t.puzzle.maze);
        CHECK(back.store == t.store);
        CHECK(back.size == 4);
    }
    SECTION("marker grids with an avatar side line") {
        Task t;
        t.puzzle.domain = Domain::Karel;
        t.puzzle.pregrid = load_grid(
            "####\n"
            "#A3#\n"
            "####\n"
            "A E 2\n");
        t.puzzle.postgrid = load_grid(
            "####\n"
            "#2A#\n"
            "####\n"
            "A E 3\n");
        t.store = {TokenKind::Move, TokenKind::PutMarker};
        t.size = 5;
        const Task back = task_from_json(task_to_json(t));
        CHECK(back.puzzle.pregrid == t.puzzle.pregrid);
        CHECK(back.puzzle.postgrid == t.puzzle.postgrid);
        CHECK(back.puzzle.pregrid.marker_at(1, 1) == 2);
        CHECK(back.puzzle.postgrid.marker_at(1, 2) == 3);
    }
}

TEST_CASE("score report serializes every component") {
    ScoreReport r;
    r.status = RunStatus::Done;
    r.solved = true;
    r.cov = 1.0;
    r.nocross = 0.5;
    r.nocut = true;
    r.notred = false;
    r.qual = 0.25;
    r.total = 0.0;
    const Json j = score_to_json(r);
    CHECK(j.at("status") == "done");
    CHECK(j.at("solved") == true);
    CHECK(j.at("nocross") == 0.5);
    CHECK(j.at("notred") == false);
    CHECK(j.at("total") == 0.0);
}

TEST_CASE("real-world spec fixtures match their published shapes") {
    struct Row {
        const char* file;
        Domain domain;
        int depth;
        int nconst;
    };
    const Row rows[] = {
        {"psi0.json", Domain::HoCMaze, 2, 1}, {"psi1.json", Domain::HoCMaze, 2, 1},
        {"psi2.json", Domain::HoCMaze, 2, 2}, {"psi3.json", Domain::HoCMaze, 3, 2},
        {"psi4.json", Domain::HoCMaze, 3, 3}, {"psi5.json", Domain::Karel, 1, 0},
        {"psi6.json", Domain::Karel, 2, 1},   {"psi7.json", Domain::Karel, 2, 2},
        {"psi8.json", Domain::Karel, 3, 2},   {"psi9.json", Domain::Karel, 3, 2},
    };
    const std::filesystem::path dir = std::filesystem::path(TASKGEN_FIXTURES_DIR) / "realworld";
    for (const Row& row : rows) {
        INFO(row.file);
        const TaskSpec spec = load_spec_file(dir / row.file);
        CHECK(spec.domain == row.domain);
        CHECK(spec.size == 10);
        CHECK(spec.puzzleInit.rows == 16);
        CHECK(spec.puzzleInit.cols == 16);
        CHECK(!spec.puzzleInit.avatar.has_value());
        CHECK(spec.puzzleInit.has_unknown());
        CHECK(struct_depth(spec.sketch) == row.depth);
        CHECK(static_cast<int>(constructs_of(spec.sketch).size()) == row.nconst);
        CHECK(spec.delta == full_delta(row.domain));
        CHECK(min_completion_nblock(spec.sketch) <= spec.size);
    }
}

TEST_CASE("json files round trip and malformed input is flagged") {
    const auto dir = scratch_dir();
    const auto specPath = dir / "spec.json";
    const TaskSpec spec = make_spec(Domain::Karel, parse_sketch_text("def Run(){a While(b){a} a}", Domain::Karel), 8, 8);
    write_json_file(specPath, spec_to_json(spec));
    const TaskSpec back = load_spec_file(specPath);
    CHECK(back.domain == Domain::Karel);
    CHECK(back.size == 8);

    const auto badPath = dir / "bad.json";
    write_text_file(badPath, "{ not json");
    CHECK_THROWS_AS(load_spec_file(badPath), FormatError);

    write_json_file(badPath, Json{{"domain", "karel"}, {"size", 8}});  // sketch missing
    CHECK_THROWS_AS(load_spec_file(badPath), FormatError);

    write_json_file(badPath, Json{{"domain", "marsrover"}, {"sketch", "def Run(){a}"}, {"size", 8}});
    CHECK_THROWS_AS(load_spec_file(badPath), FormatError);

    write_json_file(badPath,
                    Json{{"domain", "karel"}, {"sketch", "def Run(){a While(b){a} a}"}, {"size", 1}});
    CHECK_THROWS_AS(load_spec_file(badPath), FormatError);  // size below the sketch minimum

    CHECK_THROWS_AS(load_spec_file(dir / "missing.json"), FormatError);
    std::filesystem::remove_all(dir);
}
