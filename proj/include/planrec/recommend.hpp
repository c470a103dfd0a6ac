#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "planrec/corpus.hpp"

namespace planrec {

// Ranked suggestions for one unobserved slot, best first. The score is
// recognizer-specific (final column weight, predicted probability, or match
// count) and is kept for diagnostics only.
struct SlotRecommendation {
    std::size_t slot = 0;
    std::vector<std::pair<ActionToken, double>> ranked;

    bool contains(const ActionToken& t, std::size_t m) const {
        m = std::min(m, ranked.size());
        for (std::size_t i = 0; i < m; ++i)
            if (ranked[i].first == t) return true;
        return false;
    }
};

// One entry per unobserved slot, in slot order.
struct RecommendationSet {
    std::vector<SlotRecommendation> slots;
};

// Indices sorted by descending score, ties by ascending token text. Shared by
// every recognizer so tie handling is identical everywhere.
std::vector<std::size_t> rank_by_score(const std::vector<double>& scores,
                                       const Vocabulary& vocab);

}  // namespace planrec
