#include "planrec/matchplan.hpp"

#include <algorithm>

#include "planrec/errors.hpp"

namespace planrec {

MatchResult match_recommend(const PlanLibrary& lib, const Vocabulary& vocab,
                            const Observation& obs, std::size_t slot,
                            const MatchConfig& cfg) {
    const long M = static_cast<long>(obs.size());
    const long x = static_cast<long>(slot);
    const long w = static_cast<long>(cfg.window);
    if (x >= M) throw IndexOutOfPlanError("slot index past observation end");
    if (obs.slots[slot].observed)
        throw Error("recommendations are only defined for unobserved slots");

    bool any_context = false;
    for (long d = -w; d <= w && !any_context; ++d) {
        if (d == 0 || x + d < 0 || x + d >= M) continue;
        any_context = obs.slots[static_cast<std::size_t>(x + d)].observed;
    }

    MatchResult res;
    const std::size_t take = std::min(cfg.top_m, vocab.size());
    if (!any_context) {
        // Vocabulary order is already count-descending with lexicographic
        // ties, which is exactly the fallback ranking.
        res.frequency_fallback = true;
        for (std::size_t i = 0; i < take; ++i)
            res.ranked.emplace_back(vocab.token(i), double(vocab.count(i)));
        return res;
    }

    std::vector<double> scores(vocab.size(), 0.0);
    for (const auto& q : lib.plans) {
        const long n = static_cast<long>(q.size());
        for (long t = 0; t < n; ++t) {
            double s = 0.0;
            for (long d = -w; d <= w; ++d) {
                if (d == 0 || x + d < 0 || x + d >= M) continue;
                const auto& ctx = obs.slots[static_cast<std::size_t>(x + d)];
                if (!ctx.observed) continue;
                if (t + d < 0 || t + d >= n) continue;
                if (q.actions[static_cast<std::size_t>(t + d)] == ctx.token)
                    s += 1.0;
            }
            const std::size_t cand =
                vocab.require(q.actions[static_cast<std::size_t>(t)]);
            if (cfg.agg == MatchAggregation::Max)
                scores[cand] = std::max(scores[cand], s);
            else
                scores[cand] += s;
        }
    }

    auto order = rank_by_score(scores, vocab);
    for (std::size_t i = 0; i < take; ++i)
        res.ranked.emplace_back(vocab.token(order[i]), scores[order[i]]);
    return res;
}

MatchResult match_recommend(const PlanLibrary& lib, const Observation& obs,
                            std::size_t slot, const MatchConfig& cfg) {
    return match_recommend(lib, build_vocabulary(lib), obs, slot, cfg);
}

}  // namespace planrec
