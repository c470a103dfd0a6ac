#include "planrec/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>

#include "planrec/errors.hpp"

namespace planrec {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

struct MergeCandidate {
    std::size_t count;
    const std::string* min_token;  // lexicographically smallest in subtree
    std::uint32_t node;            // leaf: < V, inner: >= V
};

struct MergeOrder {
    bool operator()(const MergeCandidate& a, const MergeCandidate& b) const {
        if (a.count != b.count) return a.count > b.count;
        return *a.min_token > *b.min_token;
    }
};

}  // namespace

HuffmanTree build_huffman_tree(const Vocabulary& vocab) {
    const std::size_t V = vocab.size();
    if (V < 2)
        throw VocabularyTooSmallError(
            "need at least two distinct actions, got " + std::to_string(V));

    std::vector<std::uint32_t> parent(2 * V - 1, 0);
    std::vector<std::int8_t> branch(2 * V - 1, 0);

    std::priority_queue<MergeCandidate, std::vector<MergeCandidate>, MergeOrder>
        heap;
    for (std::size_t i = 0; i < V; ++i)
        heap.push({vocab.count(i), &vocab.token(i), static_cast<std::uint32_t>(i)});

    std::uint32_t next = static_cast<std::uint32_t>(V);
    while (heap.size() > 1) {
        MergeCandidate left = heap.top();
        heap.pop();
        MergeCandidate right = heap.top();
        heap.pop();
        parent[left.node] = next;
        parent[right.node] = next;
        branch[left.node] = +1;  // first popped is the designated child
        branch[right.node] = -1;
        const std::string* mt =
            *left.min_token < *right.min_token ? left.min_token : right.min_token;
        heap.push({left.count + right.count, mt, next});
        ++next;
    }

    const std::uint32_t root = next - 1;
    HuffmanTree tree;
    tree.inner_count = V - 1;
    tree.paths.resize(V);
    tree.codes.resize(V);
    for (std::size_t w = 0; w < V; ++w) {
        std::vector<std::uint32_t> path;
        std::vector<std::int8_t> code;
        std::uint32_t n = static_cast<std::uint32_t>(w);
        while (n != root) {
            code.push_back(branch[n]);
            n = parent[n];
            path.push_back(n - static_cast<std::uint32_t>(V));
        }
        std::reverse(path.begin(), path.end());
        std::reverse(code.begin(), code.end());
        tree.paths[w] = std::move(path);
        tree.codes[w] = std::move(code);
    }
    return tree;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double hs_probability(const EmbeddingModel& m, const ActionToken& context,
                      const ActionToken& target) {
    std::size_t ctx = m.vocab.require(context);
    std::size_t tgt = m.vocab.require(target);
    const auto& vin = m.input_vectors[ctx];
    const auto& path = m.tree.paths[tgt];
    const auto& code = m.tree.codes[tgt];
    double p = 1.0;
    for (std::size_t i = 0; i < path.size(); ++i)
        p *= sigmoid(code[i] * dot(m.node_vectors[path[i]], vin));
    return p;
}

void train_pair(EmbeddingModel& m, std::size_t context_idx,
                std::size_t target_idx, double lr) {
    auto& vin = m.input_vectors[context_idx];
    const auto& path = m.tree.paths[target_idx];
    const auto& code = m.tree.codes[target_idx];
    std::vector<double> e(m.dim, 0.0);
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto& vn = m.node_vectors[path[i]];
        double f = dot(vn, vin);
        double g = code[i] * sigmoid(-code[i] * f);
        for (std::size_t d = 0; d < m.dim; ++d) {
            e[d] += lr * g * vn[d];
            vn[d] += lr * g * vin[d];
        }
    }
    for (std::size_t d = 0; d < m.dim; ++d) vin[d] += e[d];
}

EmbeddingModel train_skipgram(const PlanLibrary& lib, const SkipgramParams& p,
                              const Vocabulary* vocab) {
    if (lib.plans.empty()) throw EmptyLibraryError("plan library has no plans");
    EmbeddingModel m;
    m.dim = p.dim;
    m.vocab = vocab ? *vocab : build_vocabulary(lib);
    m.tree = build_huffman_tree(m.vocab);

    Rng rng(p.seed);
    const std::size_t V = m.vocab.size();
    m.input_vectors.assign(V, std::vector<double>(p.dim));
    for (auto& v : m.input_vectors)
        for (auto& x : v) x = (uniform_unit(rng) - 0.5) / double(p.dim);
    m.node_vectors.assign(V - 1, std::vector<double>(p.dim, 0.0));

    // Plans are independent sentences; indices resolved once up front.
    std::vector<std::vector<std::size_t>> encoded;
    encoded.reserve(lib.plans.size());
    for (const auto& plan : lib.plans) {
        std::vector<std::size_t> ids;
        ids.reserve(plan.size());
        for (const auto& a : plan.actions) ids.push_back(m.vocab.require(a));
        encoded.push_back(std::move(ids));
    }

    const double total = double(p.epochs) * double(lib.total_tokens());
    double processed = 0.0;
    const long c = static_cast<long>(p.window);
    for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
        for (const auto& ids : encoded) {
            const long n = static_cast<long>(ids.size());
            for (long t = 0; t < n; ++t) {
                double lr = p.lr * (1.0 - processed / total);
                lr = std::max(lr, p.lr * p.lr_min_fraction);
                processed += 1.0;
                for (long j = -c; j <= c; ++j) {
                    if (j == 0) continue;
                    long u = t + j;
                    if (u < 0 || u >= n) continue;
                    train_pair(m, ids[t], ids[u], lr);
                }
            }
        }
        if (p.epoch_hook) p.epoch_hook(epoch, m);
    }
    return m;
}

double skipgram_objective(const EmbeddingModel& m, const PlanLibrary& lib,
                          std::size_t window) {
    const long c = static_cast<long>(window);
    double sum = 0.0;
    std::size_t tokens = 0;
    for (const auto& plan : lib.plans) {
        const long n = static_cast<long>(plan.size());
        tokens += plan.size();
        for (long t = 0; t < n; ++t) {
            for (long j = -c; j <= c; ++j) {
                if (j == 0) continue;
                long u = t + j;
                if (u < 0 || u >= n) continue;
                sum += std::log(
                    hs_probability(m, plan.actions[t], plan.actions[u]));
            }
        }
    }
    if (tokens == 0) return 0.0;
    return sum / double(tokens);
}

double cosine(const EmbeddingModel& m, const ActionToken& a,
              const ActionToken& b) {
    const auto& va = m.input_vectors[m.vocab.require(a)];
    const auto& vb = m.input_vectors[m.vocab.require(b)];
    double na = std::sqrt(dot(va, va));
    double nb = std::sqrt(dot(vb, vb));
    if (na == 0.0 || nb == 0.0)
        throw ZeroVectorError("cosine of a zero vector is undefined");
    return dot(va, vb) / (na * nb);
}

namespace {

constexpr const char* kMagic = "planrec-embeddings-v1";

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void save_embedding_model(const EmbeddingModel& m, std::ostream& out) {
    out << kMagic << '\n';
    out << m.vocab.size() << ' ' << m.dim << '\n';
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        out << m.vocab.token(i) << ' ' << m.vocab.count(i);
        for (double x : m.input_vectors[i]) out << ' ' << fmt17(x);
        out << '\n';
    }
    out << "inner\n";
    for (const auto& v : m.node_vectors) {
        for (std::size_t d = 0; d < v.size(); ++d)
            out << (d ? " " : "") << fmt17(v[d]);
        out << '\n';
    }
    out << "tree\n";
    for (std::size_t w = 0; w < m.vocab.size(); ++w) {
        out << m.tree.paths[w].size();
        for (auto n : m.tree.paths[w]) out << ' ' << n;
        for (auto b : m.tree.codes[w]) out << ' ' << int(b);
        out << '\n';
    }
    out << "end\n";
}

EmbeddingModel load_embedding_model(std::istream& in) {
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic)
        throw FileFormatError("not an embedding model file");
    std::size_t V = 0, dim = 0;
    in >> V >> dim;
    if (!in || V < 2) throw FileFormatError("corrupt embedding model header");

    EmbeddingModel m;
    m.dim = dim;
    std::unordered_map<ActionToken, std::size_t> counts;
    std::vector<std::pair<ActionToken, std::vector<double>>> rows(V);
    for (std::size_t i = 0; i < V; ++i) {
        std::string tok;
        std::size_t count;
        in >> tok >> count;
        rows[i].first = tok;
        rows[i].second.resize(dim);
        for (auto& x : rows[i].second) in >> x;
        counts[tok] = count;
    }
    m.vocab = Vocabulary::from_counts(counts);
    m.input_vectors.assign(V, {});
    for (auto& [tok, vec] : rows)
        m.input_vectors[m.vocab.require(tok)] = std::move(vec);

    std::string section;
    in >> section;
    if (section != "inner") throw FileFormatError("missing inner-node section");
    m.node_vectors.assign(V - 1, std::vector<double>(dim));
    for (auto& v : m.node_vectors)
        for (auto& x : v) in >> x;

    in >> section;
    if (section != "tree") throw FileFormatError("missing tree section");
    m.tree.inner_count = V - 1;
    m.tree.paths.resize(V);
    m.tree.codes.resize(V);
    for (std::size_t w = 0; w < V; ++w) {
        std::size_t depth;
        in >> depth;
        m.tree.paths[w].resize(depth);
        m.tree.codes[w].resize(depth);
        for (auto& n : m.tree.paths[w]) in >> n;
        for (auto& b : m.tree.codes[w]) {
            int v;
            in >> v;
            b = static_cast<std::int8_t>(v);
        }
    }
    in >> section;
    if (!in || section != "end") throw FileFormatError("truncated model file");
    return m;
}

void save_embedding_model_file(const EmbeddingModel& m,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileFormatError("cannot write " + path);
    save_embedding_model(m, out);
}

EmbeddingModel load_embedding_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError("cannot read " + path);
    return load_embedding_model(in);
}

}  // namespace planrec
