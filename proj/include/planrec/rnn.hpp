#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "planrec/corpus.hpp"
#include "planrec/embeddings.hpp"
#include "planrec/rand.hpp"
#include "planrec/recommend.hpp"

namespace planrec {

// All learned tensors, flat row-major. The cell-to-gate (peephole) weights
// wci/wcf/wco are length-H vectors: each gate element sees only its own cell
// element, so a full matrix cannot be represented at all.
struct LSTMParams {
    std::vector<double> embed;              // V x E
    std::vector<double> wxi, whi, wci, bi;  // H x E, H x H, H, H
    std::vector<double> wxf, whf, wcf, bf;
    std::vector<double> wxc, whc, bc;       // candidate has no peephole
    std::vector<double> wxo, who, wco, bo;
    std::vector<double> why, by;            // V x H, V

    void resize(std::size_t vocab, std::size_t embed_dim, std::size_t hidden);
    void fill(double value);
    // Fixed enumeration order; shared by SGD, clipping, serialization and
    // finite-difference sweeps.
    std::vector<std::vector<double>*> tensors();
    std::vector<const std::vector<double>*> tensors() const;
};

struct LSTMState {
    std::vector<double> h, c;

    static LSTMState zero(std::size_t hidden) {
        return {std::vector<double>(hidden, 0.0),
                std::vector<double>(hidden, 0.0)};
    }
};

struct LSTMModel {
    std::size_t embed_dim = 0;
    std::size_t hidden = 0;
    Vocabulary vocab;
    LSTMParams p;
};

// One cell update. Gate order: input and forget gates see the previous cell
// through their peepholes, the output gate sees the freshly computed cell.
LSTMState lstm_step(const LSTMParams& p, std::size_t embed_dim,
                    std::size_t hidden, const std::vector<double>& x,
                    const LSTMState& prev);

// Runs the model over the tokens; entry t is the next-action distribution
// after consuming tokens[0..t]. Each distribution sums to 1.
std::vector<std::vector<double>> forward(const LSTMModel& m,
                                         const std::vector<ActionToken>& tokens);

// Summed next-token cross-entropy of one plan (vocabulary indices) and, when
// `grads` is non-null, the accumulated parameter gradients. Plans shorter
// than 2 tokens contribute nothing.
double plan_loss_and_grads(const LSTMModel& m,
                           const std::vector<std::size_t>& plan,
                           LSTMParams* grads);

struct RnnParams {
    std::size_t hidden = 64;
    std::size_t embed_dim = 64;
    std::size_t epochs = 10;
    double lr = 0.1;
    double clip = 5.0;  // global gradient-norm ceiling
    std::uint64_t seed = 1;
    // Called after each epoch with the mean per-prediction training loss.
    std::function<void(std::size_t epoch, double mean_loss)> epoch_hook;
};

// Per-plan SGD with state reset between plans. `vocab` widens the output
// layer beyond the training fold's tokens; `init_embed` seeds the embedding
// table from pre-trained vectors (matching tokens only).
LSTMModel train_rnn(const PlanLibrary& lib, const RnnParams& p,
                    const Vocabulary* vocab = nullptr,
                    const EmbeddingModel* init_embed = nullptr);

enum class FillMode { Greedy, Sample };

struct CompletionResult {
    RecommendationSet recs;
    Plan completed;
};

// Left-to-right completion: observed tokens are fed as given; an unobserved
// slot takes its recommendations from the previous step's distribution and
// the filled token is fed forward as if it had been observed.
CompletionResult complete(const LSTMModel& m, const Observation& obs,
                          std::size_t top_m, FillMode mode, Rng& rng);

void save_rnn_model(const LSTMModel& m, std::ostream& out);
LSTMModel load_rnn_model(std::istream& in);
void save_rnn_model_file(const LSTMModel& m, const std::string& path);
LSTMModel load_rnn_model_file(const std::string& path);

}  // namespace planrec
