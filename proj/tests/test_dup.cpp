#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "planrec/blocks.hpp"
#include "planrec/dup.hpp"
#include "planrec/errors.hpp"

using namespace planrec;

namespace {

EmbeddingModel make_model(std::unordered_map<ActionToken, std::size_t> counts,
                          std::size_t dim, std::uint64_t seed) {
    EmbeddingModel m;
    m.vocab = Vocabulary::from_counts(counts);
    m.tree = build_huffman_tree(m.vocab);
    m.dim = dim;
    Rng rng(seed);
    m.input_vectors.assign(m.vocab.size(), std::vector<double>(dim));
    m.node_vectors.assign(m.tree.inner_count, std::vector<double>(dim));
    for (auto& v : m.input_vectors)
        for (auto& x : v) x = uniform_unit(rng) - 0.5;
    for (auto& v : m.node_vectors)
        for (auto& x : v) x = uniform_unit(rng) - 0.5;
    return m;
}

GammaMatrix full_gamma(std::size_t rows, std::size_t cols, double value) {
    GammaMatrix g;
    g.rows = rows;
    g.cols = cols;
    g.w.assign(rows * cols, value);
    for (std::size_t x = 0; x < cols; ++x) g.unobserved.push_back(x);
    return g;
}

Observation obs_of(const std::string& line) {
    return parse_observations(line + "\n").at(0);
}

}  // namespace

TEST_SUITE("dup") {

TEST_CASE("initial weights: observed one-hot, unobserved a flat fill") {
    auto vocab = build_vocabulary(parse_plan_library("a b c\n"));
    auto obs = obs_of("a ?? c a");  // 4 slots, 3 actions

    auto lit = init_gamma(obs, vocab, GammaInit::Literal);
    CHECK(lit.rows == 3);
    CHECK(lit.cols == 4);
    CHECK(lit.unobserved == std::vector<std::size_t>{1});
    CHECK(lit.at(vocab.require("a"), 0) == 1.0);
    CHECK(lit.at(vocab.require("b"), 0) == 0.0);
    for (std::size_t r = 0; r < 3; ++r) CHECK(lit.at(r, 1) == 0.25);
    CHECK(lit.at(vocab.require("c"), 2) == 1.0);
    CHECK(lit.at(vocab.require("a"), 3) == 1.0);

    auto norm = init_gamma(obs, vocab, GammaInit::Normalized);
    for (std::size_t r = 0; r < 3; ++r)
        CHECK(norm.at(r, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(init_gamma(obs_of("a b c"), vocab, GammaInit::Literal),
                    NoUnobservedSlotsError);
    CHECK_THROWS_AS(init_gamma(obs_of("a ?? z"), vocab, GammaInit::Literal),
                    UnknownTokenError);
}

TEST_CASE("unit weights reduce pair probability to the path product") {
    auto m = make_model({{"a", 5}, {"b", 2}, {"c", 2}, {"d", 1}}, 3, 17);
    std::vector<std::size_t> plan = {m.vocab.require("a"),
                                     m.vocab.require("d")};
    auto g = full_gamma(4, 2, 1.0);
    CHECK(weighted_probability(m, g, plan, 0, 1) ==
          doctest::Approx(hs_probability(m, "a", "d")).epsilon(1e-15));
    CHECK(weighted_probability(m, g, plan, 1, -1) ==
          doctest::Approx(hs_probability(m, "d", "a")).epsilon(1e-15));
}

TEST_CASE("a zero weight flattens every branch to one half") {
    auto m = make_model({{"a", 5}, {"b", 2}, {"c", 2}, {"d", 1}}, 3, 18);
    std::vector<std::size_t> plan = {m.vocab.require("a"),
                                     m.vocab.require("b")};
    auto g = full_gamma(4, 2, 1.0);
    g.at(plan[1], 1) = 0.0;  // target weight zero
    // b sits three branches deep, so the pair contributes (1/2)^3.
    CHECK(weighted_probability(m, g, plan, 0, 1) ==
          doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("pair indices outside the plan are rejected") {
    auto m = make_model({{"a", 2}, {"b", 1}}, 2, 1);
    std::vector<std::size_t> plan = {0, 1};
    auto g = full_gamma(2, 2, 1.0);
    CHECK_THROWS_AS(weighted_probability(m, g, plan, 0, 0),
                    IndexOutOfPlanError);
    CHECK_THROWS_AS(weighted_probability(m, g, plan, 0, 2),
                    IndexOutOfPlanError);
    CHECK_THROWS_AS(weighted_probability(m, g, plan, 1, 1),
                    IndexOutOfPlanError);
}

TEST_CASE("two-slot objective with unit weights and a balanced tree") {
    auto m = make_model({{"a", 3}, {"b", 1}}, 2, 3);
    for (auto& v : m.node_vectors) std::fill(v.begin(), v.end(), 0.0);
    auto g = full_gamma(2, 2, 1.0);
    std::vector<std::size_t> plan = {0, 1};
    // Both ordered pairs contribute log(1/2).
    CHECK(plan_objective(m, g, plan, 3) ==
          doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));

    Plan p;
    p.actions = {"a", "b"};
    CHECK(plan_objective(m, g, p, 3) ==
          doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("objective equals the sum over in-window pairs") {
    auto m = make_model({{"a", 9}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}},
                        3, 23);
    Rng rng(5);
    std::vector<std::size_t> plan;
    for (int i = 0; i < 6; ++i) plan.push_back(uniform_index(rng, 5));
    auto g = full_gamma(5, 6, 0.0);
    for (auto& x : g.w) x = 0.1 + 0.8 * uniform_unit(rng);

    const std::size_t window = 2;
    double sum = 0.0;
    for (long k = 0; k < 6; ++k)
        for (long j = -long(window); j <= long(window); ++j) {
            if (j == 0 || k + j < 0 || k + j >= 6) continue;
            sum += std::log(weighted_probability(m, g, plan, k, j));
        }
    CHECK(plan_objective(m, g, plan, window) ==
          doctest::Approx(sum).epsilon(1e-12));
    CHECK(plan_objective(m, g, plan, window) < 0.0);
}

TEST_CASE("closed-form rate on the worked tree") {
    auto vocab = Vocabulary::from_counts(
        {{"a", 5}, {"b", 2}, {"c", 2}, {"d", 1}});
    auto tree = build_huffman_tree(vocab);
    auto g = full_gamma(4, 2, 0.5);
    // b is three branches deep: 4 * 3 * 3 / 0.5 = 72.
    CHECK(gamma_gradient(vocab.require("b"), 1, 3, tree, g) ==
          doctest::Approx(72.0).epsilon(1e-15));
    // a is one branch deep: 4 * 3 * 1 / 0.5 = 24.
    CHECK(gamma_gradient(vocab.require("a"), 0, 3, tree, g) ==
          doctest::Approx(24.0).epsilon(1e-15));
    g.at(vocab.require("a"), 0) = 0.0;
    CHECK_THROWS_AS(gamma_gradient(vocab.require("a"), 0, 3, tree, g),
                    ZeroWeightError);
}

TEST_CASE("analytic rate matches a finite difference of the objective") {
    auto m = make_model({{"a", 9}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}},
                        3, 41);
    Rng rng(7);
    std::vector<std::size_t> plan;
    for (int i = 0; i < 5; ++i) plan.push_back(uniform_index(rng, 5));
    auto g = full_gamma(5, 5, 0.0);
    for (auto& x : g.w) x = 0.15 + 0.7 * uniform_unit(rng);

    const std::size_t window = 3;
    const double h = 1e-6;
    auto cache = DotCache::build(m);
    for (std::size_t x = 0; x < plan.size(); ++x) {
        double analytic = gamma_gradient_analytic(m, g, plan, x, window);
        CHECK(gamma_gradient_analytic(m, g, plan, x, window, &cache) ==
              analytic);

        auto gp = g, gm = g;
        gp.at(plan[x], x) += h;
        gm.at(plan[x], x) -= h;
        double fd = (plan_objective(m, gp, plan, window) -
                     plan_objective(m, gm, plan, window)) /
                    (2 * h);
        double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-8});
        CHECK(std::fabs(fd - analytic) / denom < 1e-4);
    }
}

TEST_CASE("recognition loop mechanics seen through the observer") {
    auto lib = parse_plan_library("a b c\nb c a\nc a b\na c b\n");
    SkipgramParams sp;
    sp.dim = 4;
    sp.epochs = 2;
    auto m = train_skipgram(lib, sp);
    auto obs = obs_of("a ?? c");

    DupParams p;
    p.iters = 25;
    p.top_m = 3;
    bool saw_update = false, saw_project = false;
    p.observer = [&](std::size_t, DupPhase phase, const GammaMatrix& g,
                     const std::vector<std::size_t>& sampled) {
        REQUIRE(sampled.size() == 1);
        // Observed columns stay one-hot through every phase.
        CHECK(g.at(m.vocab.require("a"), 0) == 1.0);
        CHECK(g.at(m.vocab.require("c"), 2) == 1.0);
        CHECK(g.at(m.vocab.require("b"), 0) == 0.0);
        if (phase == DupPhase::AfterProject) {
            saw_project = true;
            double mx = 0.0;
            for (std::size_t r = 0; r < g.rows; ++r) {
                CHECK(g.at(r, 1) >= 0.0);
                CHECK(g.at(r, 1) <= 1.0);
                mx = std::max(mx, g.at(r, 1));
            }
            CHECK(mx == doctest::Approx(1.0).epsilon(1e-12));
        } else {
            saw_update = true;
        }
    };
    Rng rng(13);
    auto res = recognize(m, obs, p, rng);
    CHECK(saw_update);
    CHECK(saw_project);
    REQUIRE(res.recs.slots.size() == 1);
    CHECK(res.recs.slots[0].slot == 1);
    CHECK(res.recs.slots[0].ranked.size() == 3);
    CHECK(res.completed.actions[0] == "a");
    CHECK(res.completed.actions[2] == "c");
    CHECK(res.completed.actions[1] == res.recs.slots[0].ranked[0].first);
}

TEST_CASE("shift projection freezes a column to the first sample") {
    auto lib = parse_plan_library("a b\nb a\nc a\na c\n");
    SkipgramParams sp;
    sp.dim = 4;
    sp.epochs = 1;
    auto m = train_skipgram(lib, sp);
    auto obs = obs_of("a ??");

    DupParams p;
    p.iters = 10;
    p.update = GammaUpdate::Printed;
    p.projection = GammaProjection::MinMax;
    std::size_t first_sample = 0;
    std::size_t checked = 0;
    p.observer = [&](std::size_t it, DupPhase phase, const GammaMatrix& g,
                     const std::vector<std::size_t>& sampled) {
        if (it == 0 && phase == DupPhase::AfterUpdate) first_sample = sampled[0];
        if (phase != DupPhase::AfterProject) return;
        // From the first projection on, the column is one-hot at that sample.
        for (std::size_t r = 0; r < g.rows; ++r)
            CHECK(g.at(r, 1) == (r == first_sample ? 1.0 : 0.0));
        ++checked;
    };
    Rng rng(99);
    auto res = recognize(m, obs, p, rng);
    CHECK(checked == 10);
    CHECK(res.completed.actions[1] == m.vocab.token(first_sample));
}

TEST_CASE("rescale projection keeps unsampled actions alive") {
    auto lib = parse_plan_library("a b\nb c\nc a\n");
    SkipgramParams sp;
    sp.dim = 4;
    sp.epochs = 1;
    auto m = train_skipgram(lib, sp);
    DupParams p;
    p.iters = 5;
    p.update = GammaUpdate::Printed;  // positive rate, no sign changes
    p.projection = GammaProjection::MaxRescale;
    p.observer = [&](std::size_t, DupPhase phase, const GammaMatrix& g,
                     const std::vector<std::size_t>&) {
        if (phase != DupPhase::AfterProject) return;
        for (std::size_t r = 0; r < g.rows; ++r) CHECK(g.at(r, 1) > 0.0);
    };
    Rng rng(3);
    recognize(m, obs_of("a ??"), p, rng);
}

TEST_CASE("zero iterations fall back to the lexicographic ranking") {
    auto lib = parse_plan_library("b a\nc d\n");
    SkipgramParams sp;
    sp.dim = 4;
    sp.epochs = 1;
    auto m = train_skipgram(lib, sp);
    DupParams p;
    p.iters = 0;
    p.top_m = 4;
    Rng rng(1);
    auto res = recognize(m, obs_of("b ?? a"), p, rng);
    REQUIRE(res.recs.slots.size() == 1);
    std::vector<ActionToken> got;
    for (auto& [tok, score] : res.recs.slots[0].ranked) {
        got.push_back(tok);
        CHECK(score == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    CHECK(got == std::vector<ActionToken>{"a", "b", "c", "d"});
    CHECK(res.completed.actions[1] == "a");
}

TEST_CASE("a shorter request is a prefix of a longer one") {
    auto lib = blocks::generate_corpus(40, 3, 4, 8);
    SkipgramParams sp;
    sp.dim = 8;
    sp.epochs = 2;
    auto m = train_skipgram(lib, sp);

    Rng mask_rng(4);
    auto obs = mask_random(lib.plans[0], 0.3, mask_rng);

    DupParams p5, p10;
    p5.iters = 60;
    p10.iters = 60;
    p5.top_m = 5;
    p10.top_m = 10;
    Rng r1(7), r2(7);
    auto a = recognize(m, obs, p5, r1);
    auto b = recognize(m, obs, p10, r2);
    REQUIRE(a.recs.slots.size() == b.recs.slots.size());
    for (std::size_t s = 0; s < a.recs.slots.size(); ++s) {
        const auto& ra = a.recs.slots[s].ranked;
        const auto& rb = b.recs.slots[s].ranked;
        REQUIRE(ra.size() <= rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i)
            CHECK(ra[i].first == rb[i].first);
    }
}

TEST_CASE("recognition is deterministic in the sampling seed") {
    auto lib = blocks::generate_corpus(30, 3, 4, 2);
    SkipgramParams sp;
    sp.dim = 8;
    sp.epochs = 2;
    auto m = train_skipgram(lib, sp);
    Rng mask_rng(1);
    auto obs = mask_random(lib.plans[3], 0.3, mask_rng);
    DupParams p;
    p.iters = 40;
    Rng r1(5), r2(5), r3(6);
    auto a = recognize(m, obs, p, r1);
    auto b = recognize(m, obs, p, r2);
    auto c = recognize(m, obs, p, r3);
    CHECK(a.gamma.w == b.gamma.w);
    CHECK(a.completed.actions == b.completed.actions);
    CHECK(a.gamma.w != c.gamma.w);
}

TEST_CASE("context steers the filled slot toward the co-occurring action") {
    // a is always followed by b, c always by d; completing "a ??" must
    // prefer b over d in at least 19 of 20 runs.
    PlanLibrary lib;
    for (int i = 0; i < 50; ++i) {
        Plan p1, p2;
        p1.actions = {"a", "b"};
        p2.actions = {"c", "d"};
        lib.plans.push_back(p1);
        lib.plans.push_back(p2);
    }
    SkipgramParams sp;
    sp.dim = 16;
    sp.epochs = 30;
    sp.seed = 1;
    auto m = train_skipgram(lib, sp);
    auto cache = DotCache::build(m);

    DupParams p;
    p.iters = 300;
    p.top_m = 4;
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        auto res = recognize(m, obs_of("a ??"), p, rng, &cache);
        const auto& g = res.gamma;
        if (g.at(m.vocab.require("b"), 1) > g.at(m.vocab.require("d"), 1))
            ++wins;
    }
    CHECK(wins >= 19);
}

}  // TEST_SUITE
