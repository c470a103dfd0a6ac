#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "planrec/errors.hpp"
#include "planrec/matchplan.hpp"

using namespace planrec;

namespace {

Observation obs_of(const std::string& line) {
    return parse_observations(line + "\n").at(0);
}

// Independent rewrite of the alignment score used to cross-check the
// implementation on random inputs.
MatchResult brute_force(const PlanLibrary& lib, const Vocabulary& vocab,
                        const Observation& obs, std::size_t slot,
                        const MatchConfig& cfg) {
    std::vector<double> scores(vocab.size(), 0.0);
    const long M = static_cast<long>(obs.size());
    const long x = static_cast<long>(slot);
    const long w = static_cast<long>(cfg.window);
    for (const auto& q : lib.plans) {
        const long n = static_cast<long>(q.size());
        for (long t = 0; t < n; ++t) {
            double s = 0.0;
            for (long d = -w; d <= w; ++d) {
                if (d == 0) continue;
                long ox = x + d, qt = t + d;
                if (ox < 0 || ox >= M || qt < 0 || qt >= n) continue;
                if (obs.slots[std::size_t(ox)].observed &&
                    obs.slots[std::size_t(ox)].token ==
                        q.actions[std::size_t(qt)])
                    s += 1.0;
            }
            std::size_t cand = vocab.require(q.actions[std::size_t(t)]);
            scores[cand] = cfg.agg == MatchAggregation::Max
                               ? std::max(scores[cand], s)
                               : scores[cand] + s;
        }
    }
    MatchResult res;
    auto order = rank_by_score(scores, vocab);
    for (std::size_t i = 0; i < std::min(cfg.top_m, vocab.size()); ++i)
        res.ranked.emplace_back(vocab.token(order[i]), scores[order[i]]);
    return res;
}

}  // namespace

TEST_SUITE("matchplan") {

TEST_CASE("worked example: both neighbors vote for the middle action") {
    auto lib = parse_plan_library("a b c\na b d\n");
    auto obs = obs_of("a ?? c");
    MatchConfig cfg;
    cfg.window = 1;
    cfg.top_m = 4;

    auto res = match_recommend(lib, obs, 1, cfg);
    CHECK(!res.frequency_fallback);
    REQUIRE(res.ranked.size() == 4);
    CHECK(res.ranked[0] == std::pair<ActionToken, double>{"b", 2.0});
    // The zero-score remainder is ordered by token text.
    CHECK(res.ranked[1].first == "a");
    CHECK(res.ranked[2].first == "c");
    CHECK(res.ranked[3].first == "d");

    cfg.agg = MatchAggregation::Sum;
    auto sum = match_recommend(lib, obs, 1, cfg);
    CHECK(sum.ranked[0] == std::pair<ActionToken, double>{"b", 3.0});
}

TEST_CASE("a fully matched window scores two per offset pair") {
    auto lib = parse_plan_library("p q r a s t u\n");
    auto obs = obs_of("p q r ?? s t u");
    MatchConfig cfg;
    cfg.window = 3;
    auto res = match_recommend(lib, obs, 3, cfg);
    CHECK(res.ranked[0] == std::pair<ActionToken, double>{"a", 6.0});
}

TEST_CASE("no observed context falls back to corpus frequency") {
    auto lib = parse_plan_library("b b a\nc\n");
    auto obs = obs_of("?? ?? ?? ?? ?? ?? ?? c");
    MatchConfig cfg;
    cfg.window = 3;
    auto res = match_recommend(lib, obs, 0, cfg);
    CHECK(res.frequency_fallback);
    REQUIRE(res.ranked.size() == 3);
    CHECK(res.ranked[0] == std::pair<ActionToken, double>{"b", 2.0});
    CHECK(res.ranked[1] == std::pair<ActionToken, double>{"a", 1.0});
    CHECK(res.ranked[2] == std::pair<ActionToken, double>{"c", 1.0});

    // Widening the window until it reaches the lone observation turns the
    // fallback off again.
    cfg.window = 7;
    auto far = match_recommend(lib, obs, 0, cfg);
    CHECK(!far.frequency_fallback);
}

TEST_CASE("library order does not change the ranking") {
    auto fwd = parse_plan_library("a b c\nc a b\nb c a\n");
    auto rev = parse_plan_library("b c a\nc a b\na b c\n");
    auto obs = obs_of("a ?? c a");
    MatchConfig cfg;
    for (auto agg : {MatchAggregation::Max, MatchAggregation::Sum}) {
        cfg.agg = agg;
        auto a = match_recommend(fwd, obs, 1, cfg);
        auto b = match_recommend(rev, obs, 1, cfg);
        CHECK(a.ranked == b.ranked);
    }
}

TEST_CASE("top-m truncates the ranking only") {
    auto lib = parse_plan_library("a b c d e\n");
    auto obs = obs_of("a ?? c d e");
    MatchConfig cfg;
    cfg.top_m = 2;
    auto res = match_recommend(lib, obs, 1, cfg);
    CHECK(res.ranked.size() == 2);
    MatchConfig full;
    auto all = match_recommend(lib, obs, 1, full);
    CHECK(all.ranked.size() == 5);
    CHECK(res.ranked[0] == all.ranked[0]);
    CHECK(res.ranked[1] == all.ranked[1]);
}

TEST_CASE("misuse is rejected") {
    auto lib = parse_plan_library("a b\n");
    MatchConfig cfg;
    CHECK_THROWS_AS(match_recommend(lib, obs_of("a ??"), 0, cfg), Error);
    CHECK_THROWS_AS(match_recommend(lib, obs_of("a ??"), 5, cfg),
                    IndexOutOfPlanError);
}

TEST_CASE("an external vocabulary can rank unseen actions") {
    auto lib = parse_plan_library("a b\n");
    auto wide = build_vocabulary(parse_plan_library("a b\nz z\n"));
    auto obs = obs_of("a ??");
    MatchConfig cfg;
    auto res = match_recommend(lib, wide, obs, 1, cfg);
    REQUIRE(res.ranked.size() == 3);
    bool saw_z = false;
    for (auto& [tok, score] : res.ranked)
        if (tok == "z") {
            saw_z = true;
            CHECK(score == 0.0);
        }
    CHECK(saw_z);
}

TEST_CASE("agrees with an independent scorer on random cases") {
    Rng rng(101);
    const std::vector<ActionToken> alphabet = {"a", "b", "c", "d", "e"};
    for (int rep = 0; rep < 30; ++rep) {
        PlanLibrary lib;
        std::size_t n_plans = 1 + uniform_index(rng, 8);
        for (std::size_t i = 0; i < n_plans; ++i) {
            Plan p;
            std::size_t len = 1 + uniform_index(rng, 6);
            for (std::size_t t = 0; t < len; ++t)
                p.actions.push_back(alphabet[uniform_index(rng, 5)]);
            lib.plans.push_back(std::move(p));
        }
        auto vocab = build_vocabulary(lib);

        Observation obs;
        std::size_t M = 2 + uniform_index(rng, 7);
        for (std::size_t i = 0; i < M; ++i) {
            if (uniform_unit(rng) < 0.4)
                obs.slots.push_back(Slot::unobs());
            else
                obs.slots.push_back(
                    Slot::obs(alphabet[uniform_index(rng, 5)]));
        }
        std::size_t slot = uniform_index(rng, M);
        obs.slots[slot] = Slot::unobs();

        MatchConfig cfg;
        cfg.window = 1 + uniform_index(rng, 3);
        cfg.top_m = 5;
        cfg.agg = rep % 2 ? MatchAggregation::Max : MatchAggregation::Sum;

        auto got = match_recommend(lib, vocab, obs, slot, cfg);
        if (got.frequency_fallback) continue;
        auto want = brute_force(lib, vocab, obs, slot, cfg);
        CHECK(got.ranked == want.ranked);
    }
}

}  // TEST_SUITE
