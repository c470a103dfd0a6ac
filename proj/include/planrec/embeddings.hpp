#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "planrec/corpus.hpp"
#include "planrec/rand.hpp"

namespace planrec {

double sigmoid(double x);

// Frequency-based prefix tree over the vocabulary. For each leaf we store the
// inner nodes on the root path and the branch taken at each of them, encoded
// +1 for the designated (left) child and -1 for the other.
struct HuffmanTree {
    std::vector<std::vector<std::uint32_t>> paths;  // per leaf, root first
    std::vector<std::vector<std::int8_t>> codes;    // per leaf, +1 / -1
    std::size_t inner_count = 0;

    // L(w) - 1 in tree terms: number of branch decisions to reach the leaf.
    std::size_t depth(std::size_t leaf) const { return codes[leaf].size(); }
};

HuffmanTree build_huffman_tree(const Vocabulary& vocab);

struct EmbeddingModel {
    std::size_t dim = 0;
    std::vector<std::vector<double>> input_vectors;  // one per vocab token
    std::vector<std::vector<double>> node_vectors;   // one per inner node
    HuffmanTree tree;
    Vocabulary vocab;
};

// Probability that `target` appears in the context of `context`, as the
// product of branch sigmoids along the target's root path.
double hs_probability(const EmbeddingModel& m, const ActionToken& context,
                      const ActionToken& target);

struct SkipgramParams {
    std::size_t dim = 100;
    std::size_t window = 3;
    std::size_t epochs = 5;
    double lr = 0.025;
    double lr_min_fraction = 1e-4;  // floor as a fraction of lr
    std::uint64_t seed = 1;
    // Called after each epoch; for monitoring the training objective.
    std::function<void(std::size_t epoch, const EmbeddingModel&)> epoch_hook;
};

// `vocab` overrides the corpus-derived vocabulary (tree included) so a model
// can rank actions absent from its training fold. Tokens of `lib` must all be
// covered by it.
EmbeddingModel train_skipgram(const PlanLibrary& lib, const SkipgramParams& p,
                              const Vocabulary* vocab = nullptr);

// One stochastic ascent step on log hs_probability for a single pair.
// The per-coordinate change divided by lr equals the analytic gradient.
void train_pair(EmbeddingModel& m, std::size_t context_idx,
                std::size_t target_idx, double lr);

// Mean log probability of all in-window pairs (the training objective).
double skipgram_objective(const EmbeddingModel& m, const PlanLibrary& lib,
                          std::size_t window);

double cosine(const EmbeddingModel& m, const ActionToken& a,
              const ActionToken& b);

void save_embedding_model(const EmbeddingModel& m, std::ostream& out);
EmbeddingModel load_embedding_model(std::istream& in);
void save_embedding_model_file(const EmbeddingModel& m, const std::string& path);
EmbeddingModel load_embedding_model_file(const std::string& path);

}  // namespace planrec
