#pragma once

#include <cstddef>

#include "planrec/corpus.hpp"
#include "planrec/recommend.hpp"

namespace planrec {

// Max keeps a candidate's best single-alignment score; Sum adds scores over
// every alignment of every plan.
enum class MatchAggregation { Max, Sum };

struct MatchConfig {
    std::size_t window = 3;
    std::size_t top_m = 10;
    MatchAggregation agg = MatchAggregation::Max;
};

struct MatchResult {
    // Best first; the score is the aggregated match count.
    std::vector<std::pair<ActionToken, double>> ranked;
    // True when no observed token fell inside the window and the ranking is
    // plain corpus frequency instead of context matches.
    bool frequency_fallback = false;
};

// Slides every library plan across the observation and scores each candidate
// plan token by how many observed actions around `slot` it reproduces at the
// matching offsets. Unobserved and out-of-range positions contribute nothing.
MatchResult match_recommend(const PlanLibrary& lib, const Vocabulary& vocab,
                            const Observation& obs, std::size_t slot,
                            const MatchConfig& cfg);
// Convenience overload deriving the vocabulary from the library.
MatchResult match_recommend(const PlanLibrary& lib, const Observation& obs,
                            std::size_t slot, const MatchConfig& cfg);

}  // namespace planrec
