#include <doctest.h>

#include <set>
#include <string>

#include "planrec/blocks.hpp"
#include "planrec/errors.hpp"

using namespace planrec;
using namespace planrec::blocks;

namespace {

std::string state_key(const BlocksState& s) {
    std::string key;
    for (const auto& t : s.towers) {
        for (int b : t) key += block_name(b);
        key += '|';
    }
    return key;
}

bool is_pick(const std::string& a) {
    return a.rfind("pick-up-", 0) == 0 || a.rfind("unstack-", 0) == 0;
}

bool is_place(const std::string& a) {
    return a.rfind("put-down-", 0) == 0 || a.rfind("stack-", 0) == 0;
}

}  // namespace

TEST_SUITE("blocks") {

TEST_CASE("state sampler reaches every four-block configuration") {
    // 4 labeled blocks arranged into unordered stacks: 73 configurations.
    Rng rng(11);
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i) {
        auto [a, b] = generate_problem(4, rng);
        seen.insert(state_key(a));
        seen.insert(state_key(b));
    }
    CHECK(seen.size() == 73);
}

TEST_CASE("two-block problems stay inside the three possible states") {
    Rng rng(4);
    std::set<std::string> seen;
    for (int i = 0; i < 200; ++i) {
        auto [a, b] = generate_problem(2, rng);
        seen.insert(state_key(a));
        seen.insert(state_key(b));
    }
    CHECK(seen == std::set<std::string>{"A|B|", "AB|", "BA|"});
}

TEST_CASE("solver emits the expected plan on a worked example") {
    // B sits on A, C alone; goal wants B moved onto C.
    BlocksState initial{{{0, 1}, {2}}, std::nullopt};
    BlocksState goal{{{2, 1}, {0}}, std::nullopt};
    Plan p = solve(initial, goal);
    CHECK(p.actions == std::vector<ActionToken>{"unstack-B-A", "put-down-B",
                                                "pick-up-B", "stack-B-C"});
}

TEST_CASE("solver returns an empty plan when already at the goal") {
    BlocksState s{{{0, 1, 2}}, std::nullopt};
    CHECK(solve(s, s).actions.empty());
}

TEST_CASE("solver output always simulates to the goal state") {
    Rng rng(9);
    for (int rep = 0; rep < 200; ++rep) {
        int n = 2 + static_cast<int>(uniform_index(rng, 5));
        auto [initial, goal] = generate_problem(n, rng);
        BlocksState reached = simulate(initial, solve(initial, goal));
        CHECK(reached == goal);
    }
}

TEST_CASE("solver rejects mismatched problems") {
    BlocksState a{{{0}, {1}}, std::nullopt};
    BlocksState b{{{0}, {2}}, std::nullopt};
    CHECK_THROWS_AS(solve(a, b), MismatchedBlocksError);
    BlocksState held{{{0}}, 1};
    CHECK_THROWS_AS(solve(held, held), MismatchedBlocksError);
}

TEST_CASE("plans alternate a lift with a placement") {
    auto lib = generate_corpus(100, 3, 6, 21);
    for (const auto& p : lib.plans) {
        REQUIRE(!p.actions.empty());
        CHECK(p.actions.size() % 2 == 0);
        for (std::size_t i = 0; i < p.actions.size(); ++i) {
            if (i % 2 == 0)
                CHECK(is_pick(p.actions[i]));
            else
                CHECK(is_place(p.actions[i]));
        }
    }
}

TEST_CASE("corpus tokens stay inside the declared block range") {
    auto lib = generate_corpus(200, 3, 6, 5);
    auto vocab = build_vocabulary(lib);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto& t = vocab.token(i);
        CHECK((is_pick(t) || is_place(t)));
        for (char c : t)
            if (c >= 'A' && c <= 'Z') CHECK(c <= 'F');
    }
    // 6 lifts + 6 drops + 30 stacks + 30 unstacks bound the vocabulary.
    CHECK(vocab.size() <= 72);
    CHECK(vocab.size() >= 60);
}

TEST_CASE("corpus generation is deterministic in the seed") {
    auto a = generate_corpus(50, 2, 4, 123);
    auto b = generate_corpus(50, 2, 4, 123);
    auto c = generate_corpus(50, 2, 4, 124);
    CHECK(write_plan_library(a) == write_plan_library(b));
    CHECK(write_plan_library(a) != write_plan_library(c));
}

TEST_CASE("generator validates its arguments") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_problem(1, rng), BadBlockCountError);
    CHECK_THROWS_AS(generate_problem(27, rng), BadBlockCountError);
    CHECK_THROWS_AS(generate_corpus(0, 2, 4, 1), EmptyLibraryError);
    CHECK_THROWS_AS(generate_corpus(5, 4, 3, 1), BadBlockCountError);
    CHECK_THROWS_AS(generate_corpus(5, 1, 3, 1), BadBlockCountError);
}

TEST_CASE("simulator enforces action preconditions") {
    BlocksState s{{{0}, {1, 2}}, std::nullopt};
    auto run = [&](std::initializer_list<const char*> acts) {
        Plan p;
        for (const char* a : acts) p.actions.emplace_back(a);
        return simulate(s, p);
    };
    CHECK_THROWS_AS(run({"pick-up-C"}), InvalidPlanError);  // C not on table
    CHECK_THROWS_AS(run({"pick-up-B"}), InvalidPlanError);  // B buried under C
    CHECK_THROWS_AS(run({"put-down-A"}), InvalidPlanError);  // hand empty
    CHECK_THROWS_AS(run({"unstack-C-A"}), InvalidPlanError);  // wrong support
    CHECK_THROWS_AS(run({"pick-up-A", "pick-up-A"}), InvalidPlanError);
    CHECK_THROWS_AS(run({"pick-up-A", "stack-A-C", "unstack-C-B"}),
                    InvalidPlanError);  // C no longer clear
    CHECK_THROWS_AS(run({"sweep-A"}), InvalidPlanError);
    CHECK_THROWS_AS(run({"stack-A-A"}), InvalidPlanError);
    CHECK_THROWS_AS(run({"pick-up-a"}), InvalidPlanError);

    BlocksState after = run({"unstack-C-B", "stack-C-A"});
    BlocksState want{{{0, 2}, {1}}, std::nullopt};
    CHECK(after == want);
}

}  // TEST_SUITE
