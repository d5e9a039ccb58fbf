#include <catch2/catch_amalgamated.hpp>

#include "taskgen/grid.hpp"
#include "taskgen/puzzle.hpp"

using namespace taskgen;

static const char* kMaze =
    "########\n"
    "#>....x#\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n"
    "########\n";

TEST_CASE("grid load and save round trip") {
    Grid g = load_grid(kMaze);
    CHECK(g.rows == 8);
    CHECK(g.cols == 8);
    REQUIRE(g.avatar.has_value());
    CHECK(g.avatar->row == 1);
    CHECK(g.avatar->col == 1);
    CHECK(g.avatar->dir == Dir::E);
    REQUIRE(g.goal.has_value());
    CHECK(*g.goal == std::pair<int, int>{1, 6});
    CHECK(g.at(0, 0) == Cell::Wall);
    CHECK(g.at(1, 2) == Cell::Free);
    CHECK(load_grid(save_grid(g)) == g);
}

TEST_CASE("grid markers and avatar side line") {
    Grid g = load_grid(
        "#####\n"
        "#>12#\n"
        "#####\n");
    CHECK(g.marker_at(1, 2) == 1);
    CHECK(g.marker_at(1, 3) == 2);
    CHECK(g.marker_at(1, 1) == 0);
    CHECK(load_grid(save_grid(g)) == g);

    Grid h = load_grid(
        "#####\n"
        "#A.3#\n"
        "#####\n"
        "A E 2\n");
    CHECK(h.marker_at(1, 1) == 2);
    REQUIRE(h.avatar.has_value());
    CHECK(h.avatar->dir == Dir::E);
    CHECK(load_grid(save_grid(h)) == h);

    Grid u = load_grid(
        "???\n"
        "?.?\n"
        "???\n");
    CHECK(u.has_unknown());
    CHECK(load_grid(save_grid(u)) == u);
}

TEST_CASE("grid format errors") {
    CHECK_THROWS_AS(load_grid("##\n###\n"), FormatError);          // ragged
    CHECK_THROWS_AS(load_grid("#q#\n"), FormatError);              // bad char
    CHECK_THROWS_AS(load_grid("#>>#\n"), FormatError);             // two avatars
    CHECK_THROWS_AS(load_grid("#xx#\n#>.#\n"), FormatError);       // two goals
    CHECK_THROWS_AS(load_grid("#A.#\n"), FormatError);             // missing side line
    CHECK_THROWS_AS(load_grid("#>.#\nA east 2\n"), FormatError);   // stray side line
}

TEST_CASE("puzzle completeness checks") {
    Puzzle p;
    p.domain = Domain::HoCMaze;
    p.maze = load_grid(kMaze);
    CHECK(puzzle_defect(p).empty());
    CHECK(is_complete(p));

    Puzzle q;
    q.domain = Domain::Karel;
    q.maze = {};
    q.pregrid = load_grid("####\n#>.#\n####\n");
    q.postgrid = load_grid("####\n#1.#\n####\n");
    CHECK(puzzle_defect(q).empty());

    Puzzle bad = q;
    bad.postgrid = load_grid("####\n#1##\n####\n");  // wall layout differs
    CHECK(!puzzle_defect(bad).empty());

    Puzzle unk = q;
    unk.pregrid.cells[5] = Cell::Unknown;
    CHECK(!puzzle_defect(unk).empty());
}

TEST_CASE("direction helpers") {
    CHECK(turned_left(Dir::N) == Dir::W);
    CHECK(turned_left(Dir::W) == Dir::S);
    CHECK(turned_right(Dir::N) == Dir::E);
    CHECK(dir_delta(Dir::N) == std::pair<int, int>{-1, 0});
    CHECK(dir_delta(Dir::S) == std::pair<int, int>{1, 0});
    CHECK(dir_delta(Dir::E) == std::pair<int, int>{0, 1});
    CHECK(dir_delta(Dir::W) == std::pair<int, int>{0, -1});
    for (Dir d : {Dir::N, Dir::E, Dir::S, Dir::W}) {
        CHECK(turned_left(turned_right(d)) == d);
        CHECK(dir_from_name(dir_name(d)) == d);
    }
}
