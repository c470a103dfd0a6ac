#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "planrec/corpus.hpp"
#include "planrec/dup.hpp"
#include "planrec/embeddings.hpp"
#include "planrec/matchplan.hpp"
#include "planrec/rnn.hpp"

namespace planrec {

// results holds one (correct suggestions, unobserved count) pair per test
// plan; the metric averages the per-plan hit fractions.
double accuracy(
    const std::vector<std::pair<std::size_t, std::size_t>>& results);

enum class Recognizer { Dup, Rnn, MatchPlan };
enum class MissingMode { Random, ConsecutiveMiddle, ConsecutiveEnd };

struct ExperimentConfig {
    Recognizer recognizer = Recognizer::Dup;
    std::string domain = "blocks";
    std::size_t folds = 3;
    MissingMode missing = MissingMode::Random;
    std::vector<double> xi_grid = {0.25};       // Random mode
    std::vector<std::size_t> count_grid = {1};  // Consecutive modes
    std::vector<std::size_t> top_m_grid = {10};
    std::vector<std::size_t> train_sizes;  // empty: use the full train split
    std::vector<std::uint64_t> seeds = {1};
    // Off by default so result files are byte-stable run to run.
    bool timing = false;

    SkipgramParams embed;  // vector training behind the gamma recognizer
    DupParams dup;
    RnnParams rnn;
    FillMode rnn_fill = FillMode::Greedy;
    MatchConfig match;
};

struct AccuracyRecord {
    std::string recognizer;
    std::string domain;
    std::string missing_mode;
    double xi_or_count = 0.0;
    std::size_t top_m = 0;
    std::size_t train_size = 0;
    std::size_t fold = 0;
    std::uint64_t seed = 1;
    double acc = 0.0;
    double wall_s = 0.0;
};

// Cross-validated evaluation: for every seed, training size, grid value and
// fold, train on the other folds, mask the held-out plans, query the
// recognizer once per plan, and score the whole top_m grid from that single
// ranking. Row order is fixed by the loop nest, independent of wall clock.
std::vector<AccuracyRecord> run_experiment(const PlanLibrary& lib,
                                           const ExperimentConfig& cfg);

std::string records_to_csv(const std::vector<AccuracyRecord>& records);
std::vector<AccuracyRecord> records_from_csv(const std::string& text);

// Writes an SVG with one mean-accuracy curve per series value, plus the
// aggregated points as CSV at out_path + ".csv".
void emit_plot(const std::vector<AccuracyRecord>& records,
               const std::string& x_key, const std::string& series_key,
               const std::string& out_path);

}  // namespace planrec
