#include "planrec/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "planrec/errors.hpp"

namespace planrec {

void LSTMParams::resize(std::size_t vocab, std::size_t embed_dim,
                        std::size_t hidden) {
    embed.assign(vocab * embed_dim, 0.0);
    wxi.assign(hidden * embed_dim, 0.0);
    whi.assign(hidden * hidden, 0.0);
    wci.assign(hidden, 0.0);
    bi.assign(hidden, 0.0);
    wxf.assign(hidden * embed_dim, 0.0);
    whf.assign(hidden * hidden, 0.0);
    wcf.assign(hidden, 0.0);
    bf.assign(hidden, 0.0);
    wxc.assign(hidden * embed_dim, 0.0);
    whc.assign(hidden * hidden, 0.0);
    bc.assign(hidden, 0.0);
    wxo.assign(hidden * embed_dim, 0.0);
    who.assign(hidden * hidden, 0.0);
    wco.assign(hidden, 0.0);
    bo.assign(hidden, 0.0);
    why.assign(vocab * hidden, 0.0);
    by.assign(vocab, 0.0);
}

void LSTMParams::fill(double value) {
    for (auto* t : tensors()) std::fill(t->begin(), t->end(), value);
}

std::vector<std::vector<double>*> LSTMParams::tensors() {
    return {&embed, &wxi, &whi, &wci, &bi, &wxf, &whf, &wcf, &bf,
            &wxc, &whc, &bc, &wxo, &who, &wco, &bo, &why, &by};
}

std::vector<const std::vector<double>*> LSTMParams::tensors() const {
    return {&embed, &wxi, &whi, &wci, &bi, &wxf, &whf, &wcf, &bf,
            &wxc, &whc, &bc, &wxo, &who, &wco, &bo, &why, &by};
}

namespace {

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += M x for a row-major H-by-W matrix.
void add_matvec(const std::vector<double>& m, const double* x, std::size_t h,
                std::size_t w, double* y) {
    for (std::size_t r = 0; r < h; ++r) {
        double s = 0.0;
        const double* row = m.data() + r * w;
        for (std::size_t c = 0; c < w; ++c) s += row[c] * x[c];
        y[r] += s;
    }
}

// y += M^T d for the same layout (columns of M accumulate into y).
void add_matvec_t(const std::vector<double>& m, const double* d, std::size_t h,
                  std::size_t w, double* y) {
    for (std::size_t r = 0; r < h; ++r) {
        const double* row = m.data() + r * w;
        for (std::size_t c = 0; c < w; ++c) y[c] += row[c] * d[r];
    }
}

// G += d x^T (outer product accumulation).
void add_outer(std::vector<double>& g, const double* d, const double* x,
               std::size_t h, std::size_t w) {
    for (std::size_t r = 0; r < h; ++r) {
        double* row = g.data() + r * w;
        for (std::size_t c = 0; c < w; ++c) row[c] += d[r] * x[c];
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

struct StepCache {
    std::size_t ix = 0;  // input token
    std::vector<double> i, f, gt, c, o, tc, h, probs;
};

// Shared by training and inference; `probs_out` may be null when the caller
// only needs the state.
void cell_forward(const LSTMModel& m, std::size_t token_ix,
                  const LSTMState& prev, StepCache& cs, bool want_probs) {
    const std::size_t E = m.embed_dim, H = m.hidden, V = m.vocab.size();
    const double* x = m.p.embed.data() + token_ix * E;
    cs.ix = token_ix;
    cs.i.assign(H, 0.0);
    cs.f.assign(H, 0.0);
    cs.gt.assign(H, 0.0);
    cs.o.assign(H, 0.0);

    std::vector<double> ai(m.p.bi), af(m.p.bf), ag(m.p.bc), ao(m.p.bo);
    add_matvec(m.p.wxi, x, H, E, ai.data());
    add_matvec(m.p.whi, prev.h.data(), H, H, ai.data());
    add_matvec(m.p.wxf, x, H, E, af.data());
    add_matvec(m.p.whf, prev.h.data(), H, H, af.data());
    add_matvec(m.p.wxc, x, H, E, ag.data());
    add_matvec(m.p.whc, prev.h.data(), H, H, ag.data());
    add_matvec(m.p.wxo, x, H, E, ao.data());
    add_matvec(m.p.who, prev.h.data(), H, H, ao.data());

    cs.c.assign(H, 0.0);
    cs.tc.assign(H, 0.0);
    cs.h.assign(H, 0.0);
    for (std::size_t r = 0; r < H; ++r) {
        cs.i[r] = sigm(ai[r] + m.p.wci[r] * prev.c[r]);
        cs.f[r] = sigm(af[r] + m.p.wcf[r] * prev.c[r]);
        cs.gt[r] = std::tanh(ag[r]);
        cs.c[r] = cs.f[r] * prev.c[r] + cs.i[r] * cs.gt[r];
        cs.o[r] = sigm(ao[r] + m.p.wco[r] * cs.c[r]);
        cs.tc[r] = std::tanh(cs.c[r]);
        cs.h[r] = cs.o[r] * cs.tc[r];
    }
    if (want_probs) {
        std::vector<double> logits(m.p.by);
        add_matvec(m.p.why, cs.h.data(), V, H, logits.data());
        cs.probs = softmax(logits);
    }
}

}  // namespace

LSTMState lstm_step(const LSTMParams& p, std::size_t embed_dim,
                    std::size_t hidden, const std::vector<double>& x,
                    const LSTMState& prev) {
    if (x.size() != embed_dim || prev.h.size() != hidden ||
        prev.c.size() != hidden || p.wxi.size() != hidden * embed_dim ||
        p.whi.size() != hidden * hidden || p.wci.size() != hidden)
        throw DimensionMismatchError("cell input sizes disagree");

    std::vector<double> ai(p.bi), af(p.bf), ag(p.bc), ao(p.bo);
    add_matvec(p.wxi, x.data(), hidden, embed_dim, ai.data());
    add_matvec(p.whi, prev.h.data(), hidden, hidden, ai.data());
    add_matvec(p.wxf, x.data(), hidden, embed_dim, af.data());
    add_matvec(p.whf, prev.h.data(), hidden, hidden, af.data());
    add_matvec(p.wxc, x.data(), hidden, embed_dim, ag.data());
    add_matvec(p.whc, prev.h.data(), hidden, hidden, ag.data());
    add_matvec(p.wxo, x.data(), hidden, embed_dim, ao.data());
    add_matvec(p.who, prev.h.data(), hidden, hidden, ao.data());

    LSTMState next = LSTMState::zero(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
        double i = sigm(ai[r] + p.wci[r] * prev.c[r]);
        double f = sigm(af[r] + p.wcf[r] * prev.c[r]);
        double c = f * prev.c[r] + i * std::tanh(ag[r]);
        double o = sigm(ao[r] + p.wco[r] * c);
        next.c[r] = c;
        next.h[r] = o * std::tanh(c);
    }
    return next;
}

std::vector<std::vector<double>> forward(
    const LSTMModel& m, const std::vector<ActionToken>& tokens) {
    std::vector<std::vector<double>> out;
    out.reserve(tokens.size());
    LSTMState state = LSTMState::zero(m.hidden);
    StepCache cs;
    for (const auto& t : tokens) {
        cell_forward(m, m.vocab.require(t), state, cs, true);
        state.h = cs.h;
        state.c = cs.c;
        out.push_back(cs.probs);
    }
    return out;
}

double plan_loss_and_grads(const LSTMModel& m,
                           const std::vector<std::size_t>& plan,
                           LSTMParams* g) {
    const std::size_t E = m.embed_dim, H = m.hidden, V = m.vocab.size();
    if (plan.size() < 2) return 0.0;
    const std::size_t T = plan.size() - 1;  // predictions

    std::vector<StepCache> steps(T);
    LSTMState state = LSTMState::zero(H);
    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        cell_forward(m, plan[t], state, steps[t], true);
        state.h = steps[t].h;
        state.c = steps[t].c;
        loss -= std::log(steps[t].probs[plan[t + 1]]);
    }
    if (!g) return loss;

    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0);
    std::vector<double> zeros(H, 0.0);
    for (std::size_t t = T; t-- > 0;) {
        const StepCache& cs = steps[t];
        const double* h_prev = t == 0 ? zeros.data() : steps[t - 1].h.data();
        const double* c_prev = t == 0 ? zeros.data() : steps[t - 1].c.data();
        const double* x = m.p.embed.data() + cs.ix * E;

        std::vector<double> dy(cs.probs);
        dy[plan[t + 1]] -= 1.0;
        add_outer(g->why, dy.data(), cs.h.data(), V, H);
        for (std::size_t v = 0; v < V; ++v) g->by[v] += dy[v];

        std::vector<double> dh(dh_next);
        add_matvec_t(m.p.why, dy.data(), V, H, dh.data());

        std::vector<double> dao(H), dai(H), daf(H), dag(H), dc(H);
        std::vector<double> dx(E, 0.0), dh_prev(H, 0.0), dc_prev(H, 0.0);
        for (std::size_t r = 0; r < H; ++r) {
            double do_ = dh[r] * cs.tc[r];
            dao[r] = do_ * cs.o[r] * (1.0 - cs.o[r]);
            dc[r] = dh[r] * cs.o[r] * (1.0 - cs.tc[r] * cs.tc[r]) +
                    dc_next[r] + dao[r] * m.p.wco[r];
            g->wco[r] += dao[r] * cs.c[r];
            g->bo[r] += dao[r];

            double di = dc[r] * cs.gt[r];
            double dg = dc[r] * cs.i[r];
            double df = dc[r] * c_prev[r];
            dc_prev[r] = dc[r] * cs.f[r];

            dag[r] = dg * (1.0 - cs.gt[r] * cs.gt[r]);
            g->bc[r] += dag[r];

            dai[r] = di * cs.i[r] * (1.0 - cs.i[r]);
            g->wci[r] += dai[r] * c_prev[r];
            dc_prev[r] += dai[r] * m.p.wci[r];
            g->bi[r] += dai[r];

            daf[r] = df * cs.f[r] * (1.0 - cs.f[r]);
            g->wcf[r] += daf[r] * c_prev[r];
            dc_prev[r] += daf[r] * m.p.wcf[r];
            g->bf[r] += daf[r];
        }
        add_outer(g->wxo, dao.data(), x, H, E);
        add_outer(g->who, dao.data(), h_prev, H, H);
        add_outer(g->wxc, dag.data(), x, H, E);
        add_outer(g->whc, dag.data(), h_prev, H, H);
        add_outer(g->wxi, dai.data(), x, H, E);
        add_outer(g->whi, dai.data(), h_prev, H, H);
        add_outer(g->wxf, daf.data(), x, H, E);
        add_outer(g->whf, daf.data(), h_prev, H, H);
        add_matvec_t(m.p.wxo, dao.data(), H, E, dx.data());
        add_matvec_t(m.p.who, dao.data(), H, H, dh_prev.data());
        add_matvec_t(m.p.wxc, dag.data(), H, E, dx.data());
        add_matvec_t(m.p.whc, dag.data(), H, H, dh_prev.data());
        add_matvec_t(m.p.wxi, dai.data(), H, E, dx.data());
        add_matvec_t(m.p.whi, dai.data(), H, H, dh_prev.data());
        add_matvec_t(m.p.wxf, daf.data(), H, E, dx.data());
        add_matvec_t(m.p.whf, daf.data(), H, H, dh_prev.data());

        for (std::size_t e = 0; e < E; ++e) g->embed[cs.ix * E + e] += dx[e];
        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }
    return loss;
}

LSTMModel train_rnn(const PlanLibrary& lib, const RnnParams& p,
                    const Vocabulary* vocab, const EmbeddingModel* init_embed) {
    if (lib.plans.empty()) throw EmptyLibraryError("plan library has no plans");
    LSTMModel m;
    m.embed_dim = p.embed_dim;
    m.hidden = p.hidden;
    m.vocab = vocab ? *vocab : build_vocabulary(lib);
    m.p.resize(m.vocab.size(), p.embed_dim, p.hidden);

    Rng rng(p.seed);
    for (auto* t : m.p.tensors())
        for (auto& v : *t) v = (uniform_unit(rng) - 0.5) * 0.16;
    std::fill(m.p.bi.begin(), m.p.bi.end(), 0.0);
    std::fill(m.p.bf.begin(), m.p.bf.end(), 1.0);  // open forget gate at start
    std::fill(m.p.bc.begin(), m.p.bc.end(), 0.0);
    std::fill(m.p.bo.begin(), m.p.bo.end(), 0.0);
    std::fill(m.p.by.begin(), m.p.by.end(), 0.0);

    if (init_embed) {
        if (init_embed->dim != p.embed_dim)
            throw DimensionMismatchError(
                "pre-trained vectors have dimension " +
                std::to_string(init_embed->dim) + ", table expects " +
                std::to_string(p.embed_dim));
        for (std::size_t w = 0; w < m.vocab.size(); ++w) {
            long src = init_embed->vocab.index_of(m.vocab.token(w));
            if (src < 0) continue;
            const auto& vec = init_embed->input_vectors[std::size_t(src)];
            std::copy(vec.begin(), vec.end(),
                      m.p.embed.begin() + w * p.embed_dim);
        }
    }

    std::vector<std::vector<std::size_t>> encoded;
    encoded.reserve(lib.plans.size());
    for (const auto& plan : lib.plans) {
        std::vector<std::size_t> ids;
        ids.reserve(plan.size());
        for (const auto& a : plan.actions) ids.push_back(m.vocab.require(a));
        encoded.push_back(std::move(ids));
    }

    std::vector<std::size_t> order(encoded.size());
    std::iota(order.begin(), order.end(), 0);
    LSTMParams grads;
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        std::size_t preds = 0;
        for (std::size_t pi : order) {
            const auto& plan = encoded[pi];
            if (plan.size() < 2) continue;
            grads.resize(m.vocab.size(), p.embed_dim, p.hidden);
            loss_sum += plan_loss_and_grads(m, plan, &grads);
            preds += plan.size() - 1;

            double norm_sq = 0.0;
            for (auto* t : grads.tensors())
                for (double v : *t) norm_sq += v * v;
            double scale = p.lr;
            if (norm_sq > p.clip * p.clip)
                scale = p.lr * p.clip / std::sqrt(norm_sq);

            auto gs = grads.tensors();
            auto ps = m.p.tensors();
            for (std::size_t ti = 0; ti < ps.size(); ++ti) {
                auto& pv = *ps[ti];
                const auto& gv = *gs[ti];
                for (std::size_t i = 0; i < pv.size(); ++i)
                    pv[i] -= scale * gv[i];
            }
        }
        if (p.epoch_hook)
            p.epoch_hook(epoch, preds ? loss_sum / double(preds) : 0.0);
    }
    return m;
}

CompletionResult complete(const LSTMModel& m, const Observation& obs,
                          std::size_t top_m, FillMode mode, Rng& rng) {
    if (obs.slots.empty() || !obs.slots[0].observed)
        throw LeadingUnobservedError(
            "completion needs an observed first action to seed the model");

    CompletionResult res;
    res.completed.actions.resize(obs.size());
    res.completed.actions[0] = obs.slots[0].token;

    LSTMState state = LSTMState::zero(m.hidden);
    StepCache cs;
    cell_forward(m, m.vocab.require(obs.slots[0].token), state, cs, true);
    state.h = cs.h;
    state.c = cs.c;

    for (std::size_t t = 1; t < obs.size(); ++t) {
        ActionToken tok;
        if (obs.slots[t].observed) {
            tok = obs.slots[t].token;
        } else {
            auto order = rank_by_score(cs.probs, m.vocab);
            SlotRecommendation rec;
            rec.slot = t;
            const std::size_t take = std::min(top_m, m.vocab.size());
            for (std::size_t i = 0; i < take; ++i)
                rec.ranked.emplace_back(m.vocab.token(order[i]),
                                        cs.probs[order[i]]);
            res.recs.slots.push_back(std::move(rec));
            tok = mode == FillMode::Greedy
                      ? m.vocab.token(order[0])
                      : m.vocab.token(sample_weighted(rng, cs.probs, 1.0));
        }
        res.completed.actions[t] = tok;
        cell_forward(m, m.vocab.require(tok), state, cs, true);
        state.h = cs.h;
        state.c = cs.c;
    }
    return res;
}

namespace {

constexpr const char* kMagic = "planrec-rnn-v1";
constexpr const char* kTensorNames[] = {
    "embed", "wxi", "whi", "wci", "bi", "wxf", "whf", "wcf", "bf",
    "wxc",   "whc", "bc",  "wxo", "who", "wco", "bo",  "why", "by"};

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t vocab_hash(const Vocabulary& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    };
    for (std::size_t i = 0; i < v.size(); ++i) {
        mix(v.token(i));
        mix(std::to_string(v.count(i)));
    }
    return h;
}

}  // namespace

void save_rnn_model(const LSTMModel& m, std::ostream& out) {
    nlohmann::json header = {{"embed", m.embed_dim},
                             {"hidden", m.hidden},
                             {"vocab", m.vocab.size()},
                             {"vocab_hash", vocab_hash(m.vocab)}};
    out << kMagic << '\n' << header.dump() << '\n';
    for (std::size_t i = 0; i < m.vocab.size(); ++i)
        out << m.vocab.token(i) << ' ' << m.vocab.count(i) << '\n';
    auto ts = m.p.tensors();
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        out << kTensorNames[ti];
        for (double v : *ts[ti]) out << ' ' << fmt17(v);
        out << '\n';
    }
}

LSTMModel load_rnn_model(std::istream& in) {
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) throw FileFormatError("not an rnn model file");
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header = nlohmann::json::parse(header_line, nullptr, false);
    if (header.is_discarded()) throw FileFormatError("bad rnn model header");

    LSTMModel m;
    m.embed_dim = header.at("embed").get<std::size_t>();
    m.hidden = header.at("hidden").get<std::size_t>();
    const std::size_t V = header.at("vocab").get<std::size_t>();

    std::unordered_map<ActionToken, std::size_t> counts;
    for (std::size_t i = 0; i < V; ++i) {
        std::string tok;
        std::size_t count;
        in >> tok >> count;
        counts[tok] = count;
    }
    if (!in || counts.size() != V)
        throw FileFormatError("truncated or duplicated rnn vocabulary");
    m.vocab = Vocabulary::from_counts(counts);
    if (vocab_hash(m.vocab) != header.at("vocab_hash").get<std::uint64_t>())
        throw FileFormatError("rnn model vocabulary does not match its header");

    m.p.resize(V, m.embed_dim, m.hidden);
    auto ts = m.p.tensors();
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
        std::string name;
        in >> name;
        if (name != kTensorNames[ti])
            throw FileFormatError("expected tensor " +
                                  std::string(kTensorNames[ti]) + ", found " +
                                  name);
        for (auto& v : *ts[ti]) in >> v;
    }
    if (!in) throw FileFormatError("truncated rnn model file");
    return m;
}

void save_rnn_model_file(const LSTMModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileFormatError("cannot write " + path);
    save_rnn_model(m, out);
}

LSTMModel load_rnn_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError("cannot read " + path);
    return load_rnn_model(in);
}

}  // namespace planrec
