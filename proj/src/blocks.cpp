#include "planrec/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "planrec/errors.hpp"

namespace planrec::blocks {

void BlocksState::canonicalize() {
    std::sort(towers.begin(), towers.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

std::string block_name(int id) { return std::string(1, char('A' + id)); }

namespace {

// Number of ways to arrange n labeled blocks into k unordered stacks:
// n!/k! * C(n-1, k-1). Computed in doubles; only ratios matter here.
std::vector<double> stack_count_by_k(int n) {
    std::vector<double> w(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double v = std::lgamma(n + 1) - std::lgamma(k + 1) +
                   std::lgamma(n) - std::lgamma(k) - std::lgamma(n - k + 1);
        w[k] = std::exp(v);
    }
    return w;
}

BlocksState random_state(int n, Rng& rng) {
    auto weights = stack_count_by_k(n);
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    int k = static_cast<int>(sample_weighted(rng, weights, total));

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);

    // k-1 cut points among the n-1 gaps, uniform over subsets.
    std::vector<int> gaps(n - 1);
    std::iota(gaps.begin(), gaps.end(), 1);
    shuffle(gaps, rng);
    std::vector<int> cuts(gaps.begin(), gaps.begin() + (k - 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(n);

    BlocksState st;
    int from = 0;
    for (int cut : cuts) {
        st.towers.emplace_back(perm.begin() + from, perm.begin() + cut);
        from = cut;
    }
    st.canonicalize();
    return st;
}

std::set<int> block_set(const BlocksState& s) {
    std::set<int> out;
    for (const auto& t : s.towers)
        for (int b : t) out.insert(b);
    if (s.holding) out.insert(*s.holding);
    return out;
}

}  // namespace

std::pair<BlocksState, BlocksState> generate_problem(int n_blocks, Rng& rng) {
    if (n_blocks < 2 || n_blocks > 26)
        throw BadBlockCountError("block count must be in [2,26], got " +
                                 std::to_string(n_blocks));
    BlocksState initial = random_state(n_blocks, rng);
    BlocksState goal = random_state(n_blocks, rng);
    return {initial, goal};
}

Plan solve(const BlocksState& initial, const BlocksState& goal) {
    if (initial.holding || goal.holding)
        throw MismatchedBlocksError("solver requires an empty hand");
    if (block_set(initial) != block_set(goal))
        throw MismatchedBlocksError("initial and goal use different blocks");

    // Goal tower indexed by its bottom block.
    std::vector<std::vector<int>> goal_towers = goal.towers;
    std::sort(goal_towers.begin(), goal_towers.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    auto goal_of_bottom = [&](int b) -> const std::vector<int>* {
        for (const auto& t : goal_towers)
            if (t.front() == b) return &t;
        return nullptr;
    };

    Plan plan;
    auto emit = [&](std::string a) { plan.actions.push_back(std::move(a)); };

    // Tear down: everything above the longest bottom prefix already in its
    // goal position goes to the table.
    std::vector<std::vector<int>> kept;  // surviving towers, incl. singletons
    std::vector<std::vector<int>> work = initial.towers;
    std::sort(work.begin(), work.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (const auto& tower : work) {
        const auto* g = goal_of_bottom(tower.front());
        std::size_t keep = 0;
        if (g) {
            while (keep < tower.size() && keep < g->size() &&
                   tower[keep] == (*g)[keep])
                ++keep;
        }
        if (keep == 0) keep = 1;  // the bottom block already sits on the table
        for (std::size_t i = tower.size(); i > keep; --i) {
            int x = tower[i - 1], y = tower[i - 2];
            emit("unstack-" + block_name(x) + "-" + block_name(y));
            emit("put-down-" + block_name(x));
            kept.push_back({x});
        }
        kept.push_back(std::vector<int>(tower.begin(), tower.begin() + keep));
    }

    // Build every goal tower bottom-up from the table.
    auto placed_len = [&](int bottom) -> std::size_t {
        for (const auto& t : kept)
            if (t.front() == bottom) return t.size();
        return 0;
    };
    for (const auto& g : goal_towers) {
        std::size_t done = placed_len(g.front());
        // A bottom block freed in the teardown is already on the table.
        if (done == 0) done = 1;
        for (std::size_t i = done; i < g.size(); ++i) {
            int x = g[i], y = g[i - 1];
            emit("pick-up-" + block_name(x));
            emit("stack-" + block_name(x) + "-" + block_name(y));
        }
    }
    return plan;
}

namespace {

int parse_block(const std::string& tok, std::size_t at) {
    if (at + 1 != tok.size() || tok[at] < 'A' || tok[at] > 'Z')
        throw InvalidPlanError("malformed blocks action: " + tok);
    return tok[at] - 'A';
}

std::pair<int, int> parse_block_pair(const std::string& tok, std::size_t at) {
    if (at + 3 != tok.size() || tok[at + 1] != '-')
        throw InvalidPlanError("malformed blocks action: " + tok);
    int x = tok[at] - 'A', y = tok[at + 2] - 'A';
    if (x < 0 || x > 25 || y < 0 || y > 25 || x == y)
        throw InvalidPlanError("malformed blocks action: " + tok);
    return {x, y};
}

}  // namespace

BlocksState simulate(const BlocksState& initial, const Plan& plan) {
    BlocksState st = initial;
    auto tower_of_top = [&](int b) -> long {
        for (std::size_t i = 0; i < st.towers.size(); ++i)
            if (st.towers[i].back() == b) return static_cast<long>(i);
        return -1;
    };
    auto fail = [&](const std::string& tok, const char* why) {
        throw InvalidPlanError(std::string(why) + " at action \"" + tok + "\"");
    };

    for (const auto& tok : plan.actions) {
        if (tok.rfind("pick-up-", 0) == 0) {
            int x = parse_block(tok, 8);
            if (st.holding) fail(tok, "hand not empty");
            long ti = tower_of_top(x);
            if (ti < 0 || st.towers[ti].size() != 1)
                fail(tok, "block not clear on the table");
            st.towers.erase(st.towers.begin() + ti);
            st.holding = x;
        } else if (tok.rfind("put-down-", 0) == 0) {
            int x = parse_block(tok, 9);
            if (!st.holding || *st.holding != x) fail(tok, "not holding block");
            st.towers.push_back({x});
            st.holding.reset();
        } else if (tok.rfind("stack-", 0) == 0) {
            auto [x, y] = parse_block_pair(tok, 6);
            if (!st.holding || *st.holding != x) fail(tok, "not holding block");
            long ti = tower_of_top(y);
            if (ti < 0) fail(tok, "target block not clear");
            st.towers[ti].push_back(x);
            st.holding.reset();
        } else if (tok.rfind("unstack-", 0) == 0) {
            auto [x, y] = parse_block_pair(tok, 8);
            if (st.holding) fail(tok, "hand not empty");
            long ti = tower_of_top(x);
            if (ti < 0) fail(tok, "block not clear");
            const auto& t = st.towers[ti];
            if (t.size() < 2 || t[t.size() - 2] != y)
                fail(tok, "block not on claimed support");
            st.towers[ti].pop_back();
            st.holding = x;
        } else {
            throw InvalidPlanError("unknown blocks action: " + tok);
        }
    }
    st.canonicalize();
    return st;
}

PlanLibrary generate_corpus(std::size_t n_plans, int min_blocks, int max_blocks,
                            std::uint64_t seed) {
    if (n_plans < 1) throw EmptyLibraryError("corpus needs at least one plan");
    if (min_blocks < 2 || max_blocks > 26 || min_blocks > max_blocks)
        throw BadBlockCountError("block range must satisfy 2 <= min <= max <= 26");
    Rng rng(seed);
    PlanLibrary lib;
    lib.plans.reserve(n_plans);
    while (lib.plans.size() < n_plans) {
        int n = min_blocks +
                static_cast<int>(uniform_index(
                    rng, static_cast<std::size_t>(max_blocks - min_blocks + 1)));
        auto [initial, goal] = generate_problem(n, rng);
        Plan p = solve(initial, goal);
        if (p.actions.empty()) continue;  // initial == goal, redraw
        lib.plans.push_back(std::move(p));
    }
    return lib;
}

}  // namespace planrec::blocks
