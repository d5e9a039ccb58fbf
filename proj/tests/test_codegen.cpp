#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "taskgen/codegen.hpp"

using namespace taskgen;

namespace {

TaskSpec spec_of(const std::string& sketchText, Domain d, int size) {
    return make_spec(d, parse_sketch_text(sketchText, d), size, 8);
}

std::vector<std::string> prints_of(const std::vector<Ast>& codes) {
    std::vector<std::string> out;
    out.reserve(codes.size());
    for (const Ast& c : codes) out.push_back(print_code_compact(c));
    return out;
}

}  // namespace

TEST_CASE("single hole with one spare block has three completions") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 2);
    const auto codes = enumerate_codes(spec, 100);
    CHECK(prints_of(codes) ==
          std::vector<std::string>{"def Run(){move}", "def Run(){turnLeft}", "def Run(){turnRight}"});
}

TEST_CASE("single hole with two spare blocks enumerates twelve codes") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 3);
    const auto codes = enumerate_codes(spec, 100);
    REQUIRE(codes.size() == 12);
    const auto ps = prints_of(codes);
    CHECK(ps[0] == "def Run(){move}");
    CHECK(ps[1] == "def Run(){move move}");
    CHECK(ps[2] == "def Run(){move turnLeft}");
    CHECK(ps[3] == "def Run(){move turnRight}");
    CHECK(ps[4] == "def Run(){turnLeft}");
    for (const Ast& c : codes) {
        CHECK(attributes(c).nblock <= 3);
        CHECK(attributes(c).nblock >= 2);
    }
}

TEST_CASE("marker actions enter the enumeration in the marker domain") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::Karel, 2);
    const auto codes = enumerate_codes(spec, 100);
    REQUIRE(codes.size() == 5);
    CHECK(prints_of(codes).back() == "def Run(){pickMarker}");
}

TEST_CASE("iterator holes range over the allowed iterators") {
    TaskSpec spec = spec_of("def Run(){a Repeat(x){a} a}", Domain::Karel, 2);
    CHECK(enumerate_codes(spec, 100).size() == 9);
    spec.delta.iterators = {4, 7};
    const auto codes = enumerate_codes(spec, 100);
    CHECK(prints_of(codes) == std::vector<std::string>{"def Run(){Repeat(4){}}", "def Run(){Repeat(7){}}"});
}

TEST_CASE("condition holes range over the domain conditions") {
    const TaskSpec hoc = spec_of("def Run(){a If(b){a} a}", Domain::HoCMaze, 2);
    CHECK(enumerate_codes(hoc, 100).size() == 3);
    const TaskSpec karel = spec_of("def Run(){a If(b){a} a}", Domain::Karel, 2);
    CHECK(enumerate_codes(karel, 100).size() == 6);
}

TEST_CASE("two-sided branch splits the leftover budget") {
    const TaskSpec spec = spec_of("def Run(){a If(b){a} Else{a} a}", Domain::HoCMaze, 3);
    const auto codes = enumerate_codes(spec, 1000);
    // one leftover action may land in any of the four holes, or nowhere
    CHECK(codes.size() == 3 * (1 + 4 * 3));
    for (const Ast& c : codes) CHECK(attributes(c).nblock <= 3);
}

TEST_CASE("empty program is never generated") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 1);
    CHECK_THROWS_AS(enumerate_codes(spec, 10), DeadEnd);
    UniformCodePolicy p;
    Rng rng(7);
    CHECK_THROWS_AS(generate_code(spec, p, rng), DeadEnd);
}

TEST_CASE("empty allowed action set is a dead end") {
    TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 5);
    spec.delta.actions.clear();
    CHECK_THROWS_AS(enumerate_codes(spec, 10), DeadEnd);
}

TEST_CASE("sampled completions respect the mask and the size cap") {
    const Ast code = parse_code(
        "def Run(){While(markerPresent){pickMarker; If(pathRight){turnRight}; move}}", Domain::Karel);
    TaskSpec spec = make_spec(Domain::Karel, sketch_of(code, {0, 1}), 8, 8);
    const std::set<TokenKind> allowed = allowed_tokens(spec);
    Rng rng(42);
    std::set<std::string> distinct;
    int nmax = 0;
    for (int i = 0; i < 400; ++i) {
        const Ast c = generate_code_uniform(spec, rng);
        CHECK_FALSE(has_hole(c));
        const CodeAttributes at = attributes(c);
        REQUIRE(at.nblock >= 3);
        REQUIRE(at.nblock <= 8);
        nmax = std::max(nmax, at.nblock);
        for (TokenKind b : at.blocks)
            if (b != TokenKind::Run) CHECK(allowed.count(b) == 1);
        distinct.insert(print_code_compact(c));
    }
    CHECK(nmax == 8);
    CHECK(distinct.size() >= 30);
}

TEST_CASE("sampling is reproducible per seed") {
    const TaskSpec spec = spec_of("def Run(){a While(b){a} a}", Domain::Karel, 6);
    Rng a(123), b(123), c(124);
    std::string sa, sb, sc;
    for (int i = 0; i < 20; ++i) {
        sa += print_code_compact(generate_code_uniform(spec, a));
        sb += print_code_compact(generate_code_uniform(spec, b));
        sc += print_code_compact(generate_code_uniform(spec, c));
    }
    CHECK(sa == sb);
    CHECK(sa != sc);
}

TEST_CASE("restricted action set confines the samples") {
    TaskSpec spec = spec_of("def Run(){a}", Domain::Karel, 4);
    spec.delta.actions = {TokenKind::Move};
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const Ast c = generate_code_uniform(spec, rng);
        for (TokenKind b : attributes(c).blocks) CHECK((b == TokenKind::Run || b == TokenKind::Move));
    }
}

TEST_CASE("token stream of a scripted completion") {
    const TaskSpec spec = spec_of("def Run(){a If(pathLeft){a} a}", Domain::HoCMaze, 3);
    const std::vector<int> script = {dict::kMove, dict::kEnd, dict::kEnd, dict::kEnd};
    std::size_t at = 0;
    std::vector<int> seen;
    const Ast code = complete_sketch(
        spec, [&](const DecisionPoint&) { return script[at++]; }, [&](int t, int) { seen.push_back(t); });
    CHECK(print_code_compact(code) == "def Run(){move If(pathLeft){}}");
    CHECK(seen == std::vector<int>{dict::kRun, dict::kMove, dict::kEnd, dict::kIf, dict::kPathLeft,
                                   dict::kEnd, dict::kEnd});
}

TEST_CASE("token stream threads the else branch") {
    const TaskSpec spec = spec_of("def Run(){a If(b){a} Else{a} a}", Domain::HoCMaze, 2);
    const std::vector<int> script = {dict::kEnd, dict::kPathAhead, dict::kEnd, dict::kEnd, dict::kEnd};
    std::size_t at = 0;
    std::vector<int> seen;
    std::vector<DecisionPoint::Kind> kinds;
    const Ast code = complete_sketch(
        spec,
        [&](const DecisionPoint& d) {
            kinds.push_back(d.kind);
            return script[at++];
        },
        [&](int t, int) { seen.push_back(t); });
    CHECK(print_code_compact(code) == "def Run(){If(pathAhead){} Else{}}");
    CHECK(seen == std::vector<int>{dict::kRun, dict::kEnd, dict::kIfElse, dict::kPathAhead, dict::kEnd,
                                   dict::kElse, dict::kEnd, dict::kEnd});
    CHECK(kinds == std::vector<DecisionPoint::Kind>{
                       DecisionPoint::Kind::NextToken, DecisionPoint::Kind::BoolChoice,
                       DecisionPoint::Kind::NextToken, DecisionPoint::Kind::NextToken,
                       DecisionPoint::Kind::NextToken});
}

TEST_CASE("off-script choices are rejected") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 3);
    CHECK_THROWS_AS(complete_sketch(spec, [](const DecisionPoint&) { return dict::kPad; }),
                    IllegalDecision);
    CHECK_THROWS_AS(complete_sketch(spec, [](const DecisionPoint&) { return dict::kPutMarker; }),
                    IllegalDecision);
}

TEST_CASE("enumeration control flow") {
    const TaskSpec spec = spec_of("def Run(){a}", Domain::HoCMaze, 3);
    int visited = 0;
    CHECK(for_each_completion(spec, 1000, [&](const Ast&) {
              ++visited;
              return false;
          }) == EnumOutcome::Stopped);
    CHECK(visited == 1);
    CHECK(for_each_completion(spec, 1, [](const Ast&) { return true; }) == EnumOutcome::Budget);
    CHECK(for_each_completion(spec, 1000, [](const Ast&) { return true; }) == EnumOutcome::Exhausted);
    CHECK(enumerate_codes(spec, 0).empty());
    CHECK(enumerate_codes(spec, 5).size() == 5);
    CHECK_THROWS_AS(enumerate_codes(spec, 100, 2), BudgetExceeded);
}

TEST_CASE("structure enumeration covers the construct grammar") {
    const std::set<TokenKind> hocKinds{TokenKind::Repeat, TokenKind::RepeatUntil, TokenKind::If,
                                       TokenKind::IfElse};
    const auto one = enumerate_structures(Domain::HoCMaze, hocKinds, 1);
    const auto ps = prints_of(one);
    REQUIRE(ps.size() == 5);
    CHECK(ps[0] == "def Run(){a}");
    CHECK(std::count(ps.begin(), ps.end(), "def Run(){a Repeat(x){a} a}") == 1);
    CHECK(std::count(ps.begin(), ps.end(), "def Run(){a If(b){a} a}") == 1);
    CHECK(std::count(ps.begin(), ps.end(), "def Run(){a If(b){a} Else{a} a}") == 1);
    CHECK(std::count(ps.begin(), ps.end(), "def Run(){a RepeatUntil(goal){a}}") == 1);

    const auto two = enumerate_structures(Domain::HoCMaze, hocKinds, 2);
    CHECK(two.size() == 32);
    const auto twoPrints = prints_of(two);
    const std::set<std::string> uniq(twoPrints.begin(), twoPrints.end());
    CHECK(uniq.size() == two.size());

    const std::set<TokenKind> karelKinds{TokenKind::Repeat, TokenKind::While, TokenKind::If,
                                         TokenKind::IfElse};
    const auto kone = enumerate_structures(Domain::Karel, karelKinds, 1);
    REQUIRE(kone.size() == 5);
    CHECK(prints_of(kone)[0] == "def Run(){a}");
    CHECK(enumerate_structures(Domain::Karel, karelKinds, 2).size() == 41);
}

TEST_CASE("every enumerated structure is completable") {
    const std::set<TokenKind> hocKinds{TokenKind::Repeat, TokenKind::RepeatUntil, TokenKind::If,
                                       TokenKind::IfElse};
    Rng rng(9);
    for (const Ast& sk : enumerate_structures(Domain::HoCMaze, hocKinds, 2)) {
        TaskSpec spec = make_spec(Domain::HoCMaze, sk, 0, 8);
        spec.size = std::max(min_completion_nblock(sk), 2);
        const Ast tight = generate_code_uniform(spec, rng);
        CHECK(attributes(tight).nblock <= spec.size);
        spec.size = 17;
        const Ast loose = generate_code_uniform(spec, rng);
        CHECK_FALSE(has_hole(loose));
    }
}
