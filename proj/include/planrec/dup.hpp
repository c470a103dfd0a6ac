#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "planrec/corpus.hpp"
#include "planrec/embeddings.hpp"
#include "planrec/rand.hpp"
#include "planrec/recommend.hpp"

namespace planrec {

// Per-slot action weights, |A| rows by M columns, column-major so a slot's
// weights are contiguous. Observed columns are one-hot and never touched;
// unobserved columns hold the evolving weights in [0,1].
struct GammaMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> w;
    std::vector<std::size_t> unobserved;  // column indices, ascending

    double at(std::size_t token, std::size_t col) const {
        return w[col * rows + token];
    }
    double& at(std::size_t token, std::size_t col) {
        return w[col * rows + token];
    }
    double* column(std::size_t col) { return w.data() + col * rows; }
    const double* column(std::size_t col) const { return w.data() + col * rows; }
};

// Literal fills unobserved entries with 1/M (columns do not sum to 1 unless
// M = |A|); Normalized fills with 1/|A|.
enum class GammaInit { Literal, Normalized };

// Printed applies the closed-form rate 4c(L(o)-1)/gamma, which ignores the
// embedding vectors entirely; Analytic differentiates the weighted objective
// through the path sigmoids, so context fit decides sign and size.
enum class GammaUpdate { Analytic, Printed };

// How an unobserved column returns to [0,1] after an update. MaxRescale
// clamps negatives to zero and divides by the column max, preserving ratios.
// MinMax shifts by the min as well; with single-entry updates that zeroes
// every entry still at the common initial value after one iteration, which
// freezes the column, so it is not the default.
enum class GammaProjection { MaxRescale, MinMax };

// Precomputed inner-node x action dot products; recognition gradients reduce
// to table lookups. Valid only for the model it was built from.
struct DotCache {
    std::size_t vocab_size = 0;
    std::vector<double> d;  // inner_count rows

    static DotCache build(const EmbeddingModel& m);
    double at(std::size_t node, std::size_t token) const {
        return d[node * vocab_size + token];
    }
};

GammaMatrix init_gamma(const Observation& obs, const Vocabulary& vocab,
                       GammaInit mode = GammaInit::Literal);

// Probability contribution of the pair (slot k, slot k+j) for a fully filled
// plan given as vocabulary indices: the target's path product with each step
// argument scaled by both slots' gamma weights.
double weighted_probability(const EmbeddingModel& m, const GammaMatrix& g,
                            const std::vector<std::size_t>& plan,
                            std::size_t k, long j);

// Sum of log weighted_probability over all in-window pairs; <= 0 always.
double plan_objective(const EmbeddingModel& m, const GammaMatrix& g,
                      const std::vector<std::size_t>& plan,
                      std::size_t window);
double plan_objective(const EmbeddingModel& m, const GammaMatrix& g,
                      const Plan& plan, std::size_t window);

// The closed-form update rate 4*window*(L(token)-1) / gamma[token,col].
double gamma_gradient(std::size_t token, std::size_t col, std::size_t window,
                      const HuffmanTree& tree, const GammaMatrix& g);

// Exact derivative of plan_objective with respect to gamma[plan[x], x].
double gamma_gradient_analytic(const EmbeddingModel& m, const GammaMatrix& g,
                               const std::vector<std::size_t>& plan,
                               std::size_t x, std::size_t window,
                               const DotCache* cache = nullptr);

enum class DupPhase { AfterUpdate, AfterProject };

struct DupParams {
    std::size_t iters = 1500;
    double delta = 0.1;
    std::size_t window = 3;
    std::size_t top_m = 10;
    GammaInit init = GammaInit::Literal;
    GammaUpdate update = GammaUpdate::Analytic;
    GammaProjection projection = GammaProjection::MaxRescale;
    // Test/diagnostic hook: called twice per iteration with the tokens
    // sampled for each unobserved column (aligned with gamma.unobserved).
    std::function<void(std::size_t iter, DupPhase, const GammaMatrix&,
                       const std::vector<std::size_t>& sampled)>
        observer;
};

struct DupResult {
    GammaMatrix gamma;
    RecommendationSet recs;
    Plan completed;
};

// The sample / update / project loop: each iteration draws one action per
// unobserved slot from its normalized column, nudges the drawn entries along
// the configured gradient, and projects the columns back to [0,1]. Final
// weights give the argmax completion and the per-slot top-m rankings.
DupResult recognize(const EmbeddingModel& m, const Observation& obs,
                    const DupParams& p, Rng& rng,
                    const DotCache* cache = nullptr);

}  // namespace planrec
