#include "planrec/dup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "planrec/errors.hpp"

namespace planrec {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

DotCache DotCache::build(const EmbeddingModel& m) {
    DotCache c;
    c.vocab_size = m.vocab.size();
    c.d.resize(m.tree.inner_count * c.vocab_size);
    for (std::size_t n = 0; n < m.tree.inner_count; ++n)
        for (std::size_t w = 0; w < c.vocab_size; ++w)
            c.d[n * c.vocab_size + w] =
                dot(m.node_vectors[n], m.input_vectors[w]);
    return c;
}

GammaMatrix init_gamma(const Observation& obs, const Vocabulary& vocab,
                       GammaInit mode) {
    GammaMatrix g;
    g.rows = vocab.size();
    g.cols = obs.size();
    g.w.assign(g.rows * g.cols, 0.0);
    g.unobserved = obs.unobserved_indices();
    if (g.unobserved.empty())
        throw NoUnobservedSlotsError("observation has no unobserved slot");

    const double fill = mode == GammaInit::Literal ? 1.0 / double(g.cols)
                                                   : 1.0 / double(g.rows);
    for (std::size_t x = 0; x < g.cols; ++x) {
        if (obs.slots[x].observed) {
            g.at(vocab.require(obs.slots[x].token), x) = 1.0;
        } else {
            double* col = g.column(x);
            std::fill(col, col + g.rows, fill);
        }
    }
    return g;
}

double weighted_probability(const EmbeddingModel& m, const GammaMatrix& g,
                            const std::vector<std::size_t>& plan,
                            std::size_t k, long j) {
    const long M = static_cast<long>(plan.size());
    const long u = static_cast<long>(k) + j;
    if (j == 0 || static_cast<long>(k) >= M || u < 0 || u >= M)
        throw IndexOutOfPlanError("pair (" + std::to_string(k) + "," +
                                  std::to_string(j) + ") outside plan of length " +
                                  std::to_string(plan.size()));
    const std::size_t target = plan[static_cast<std::size_t>(u)];
    const double a = g.at(target, static_cast<std::size_t>(u));
    const double b = g.at(plan[k], k);
    const auto& vin = m.input_vectors[plan[k]];
    const auto& path = m.tree.paths[target];
    const auto& code = m.tree.codes[target];
    double p = 1.0;
    for (std::size_t i = 0; i < path.size(); ++i)
        p *= sigmoid(code[i] * a * b * dot(m.node_vectors[path[i]], vin));
    return p;
}

double plan_objective(const EmbeddingModel& m, const GammaMatrix& g,
                      const std::vector<std::size_t>& plan,
                      std::size_t window) {
    const long M = static_cast<long>(plan.size());
    const long c = static_cast<long>(window);
    double sum = 0.0;
    for (long k = 0; k < M; ++k)
        for (long j = -c; j <= c; ++j) {
            if (j == 0 || k + j < 0 || k + j >= M) continue;
            sum += std::log(
                weighted_probability(m, g, plan, static_cast<std::size_t>(k), j));
        }
    return sum;
}

double plan_objective(const EmbeddingModel& m, const GammaMatrix& g,
                      const Plan& plan, std::size_t window) {
    std::vector<std::size_t> ids;
    ids.reserve(plan.size());
    for (const auto& t : plan.actions) ids.push_back(m.vocab.require(t));
    return plan_objective(m, g, ids, window);
}

double gamma_gradient(std::size_t token, std::size_t col, std::size_t window,
                      const HuffmanTree& tree, const GammaMatrix& g) {
    const double t = g.at(token, col);
    if (t <= 0.0)
        throw ZeroWeightError("gamma entry is zero at column " +
                              std::to_string(col));
    return 4.0 * double(window) * double(tree.depth(token)) / t;
}

double gamma_gradient_analytic(const EmbeddingModel& m, const GammaMatrix& g,
                               const std::vector<std::size_t>& plan,
                               std::size_t x, std::size_t window,
                               const DotCache* cache) {
    const long M = static_cast<long>(plan.size());
    const long c = static_cast<long>(window);
    const long lx = static_cast<long>(x);
    const std::size_t o = plan[x];
    const double t = g.at(o, x);
    auto dot_nw = [&](std::size_t node, std::size_t w) {
        return cache ? cache->at(node, w)
                     : dot(m.node_vectors[node], m.input_vectors[w]);
    };

    double grad = 0.0;
    // Pairs with x as the center slot: the target path belongs to the
    // neighbor, the input vector is ours, and our weight enters as b.
    for (long j = -c; j <= c; ++j) {
        if (j == 0 || lx + j < 0 || lx + j >= M) continue;
        const std::size_t u = static_cast<std::size_t>(lx + j);
        const double a = g.at(plan[u], u);
        const auto& path = m.tree.paths[plan[u]];
        const auto& code = m.tree.codes[plan[u]];
        for (std::size_t i = 0; i < path.size(); ++i) {
            const double s = dot_nw(path[i], o);
            grad += sigmoid(-code[i] * a * t * s) * code[i] * a * s;
        }
    }
    // Pairs with x as the target slot: our path, the neighbor's input vector,
    // our weight enters as a.
    const auto& path = m.tree.paths[o];
    const auto& code = m.tree.codes[o];
    for (long j = -c; j <= c; ++j) {
        if (j == 0 || lx - j < 0 || lx - j >= M) continue;
        const std::size_t k = static_cast<std::size_t>(lx - j);
        const double b = g.at(plan[k], k);
        for (std::size_t i = 0; i < path.size(); ++i) {
            const double s = dot_nw(path[i], plan[k]);
            grad += sigmoid(-code[i] * t * b * s) * code[i] * b * s;
        }
    }
    return grad;
}

namespace {

std::size_t sample_column(Rng& rng, const double* col, std::size_t rows) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        if (col[i] > 0.0) total += col[i];
    double r = uniform_unit(rng) * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (col[i] <= 0.0) continue;
        acc += col[i];
        last = i;
        if (r < acc) return i;
    }
    return last;
}

void project_column(double* col, std::size_t rows, GammaProjection mode) {
    if (mode == GammaProjection::MaxRescale) {
        double mx = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (col[i] < 0.0) col[i] = 0.0;
            mx = std::max(mx, col[i]);
        }
        if (mx <= 0.0)
            std::fill(col, col + rows, 1.0 / double(rows));
        else
            for (std::size_t i = 0; i < rows; ++i) col[i] /= mx;
    } else {
        double mn = col[0], mx = col[0];
        for (std::size_t i = 1; i < rows; ++i) {
            mn = std::min(mn, col[i]);
            mx = std::max(mx, col[i]);
        }
        if (mx == mn)
            std::fill(col, col + rows, 1.0 / double(rows));
        else
            for (std::size_t i = 0; i < rows; ++i)
                col[i] = (col[i] - mn) / (mx - mn);
    }
}

}  // namespace

DupResult recognize(const EmbeddingModel& m, const Observation& obs,
                    const DupParams& p, Rng& rng, const DotCache* cache) {
    DupResult res;
    res.gamma = init_gamma(obs, m.vocab, p.init);
    GammaMatrix& g = res.gamma;

    DotCache local;
    if (!cache && p.update == GammaUpdate::Analytic) {
        local = DotCache::build(m);
        cache = &local;
    }

    std::vector<std::size_t> plan(g.cols, 0);
    for (std::size_t x = 0; x < g.cols; ++x)
        if (obs.slots[x].observed)
            plan[x] = m.vocab.require(obs.slots[x].token);

    const auto& free_cols = g.unobserved;
    std::vector<std::size_t> sampled(free_cols.size(), 0);
    std::vector<double> grads(free_cols.size(), 0.0);

    for (std::size_t it = 0; it < p.iters; ++it) {
        for (std::size_t ci = 0; ci < free_cols.size(); ++ci) {
            sampled[ci] = sample_column(rng, g.column(free_cols[ci]), g.rows);
            plan[free_cols[ci]] = sampled[ci];
        }
        // The whole sampled plan is in place before any weight moves.
        for (std::size_t ci = 0; ci < free_cols.size(); ++ci) {
            grads[ci] =
                p.update == GammaUpdate::Printed
                    ? gamma_gradient(sampled[ci], free_cols[ci], p.window,
                                     m.tree, g)
                    : gamma_gradient_analytic(m, g, plan, free_cols[ci],
                                              p.window, cache);
        }
        for (std::size_t ci = 0; ci < free_cols.size(); ++ci)
            g.at(sampled[ci], free_cols[ci]) += p.delta * grads[ci];
        if (p.observer) p.observer(it, DupPhase::AfterUpdate, g, sampled);
        for (std::size_t x : free_cols)
            project_column(g.column(x), g.rows, p.projection);
        if (p.observer) p.observer(it, DupPhase::AfterProject, g, sampled);
    }

    res.completed.actions.resize(g.cols);
    for (std::size_t x = 0; x < g.cols; ++x)
        if (obs.slots[x].observed)
            res.completed.actions[x] = obs.slots[x].token;
    for (std::size_t x : free_cols) {
        std::vector<double> col(g.column(x), g.column(x) + g.rows);
        auto order = rank_by_score(col, m.vocab);
        SlotRecommendation rec;
        rec.slot = x;
        const std::size_t take = std::min(p.top_m, g.rows);
        rec.ranked.reserve(take);
        for (std::size_t i = 0; i < take; ++i)
            rec.ranked.emplace_back(m.vocab.token(order[i]), col[order[i]]);
        res.completed.actions[x] = m.vocab.token(order[0]);
        res.recs.slots.push_back(std::move(rec));
    }
    return res;
}

}  // namespace planrec
