#include "planrec/recommend.hpp"

#include <algorithm>
#include <numeric>

namespace planrec {

std::vector<std::size_t> rank_by_score(const std::vector<double>& scores,
                                       const Vocabulary& vocab) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return vocab.token(a) < vocab.token(b);
    });
    return order;
}

}  // namespace planrec
