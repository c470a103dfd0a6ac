#include "planrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "planrec/errors.hpp"

namespace planrec {

bool valid_token(const ActionToken& t) {
    if (t.empty() || t == kUnobservedMarker) return false;
    for (char ch : t) {
        bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                  (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
        if (!ok) return false;
    }
    return true;
}

std::size_t PlanLibrary::total_tokens() const {
    std::size_t n = 0;
    for (const auto& p : plans) n += p.size();
    return n;
}

long Vocabulary::index_of(const ActionToken& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::size_t Vocabulary::require(const ActionToken& t) const {
    long i = index_of(t);
    if (i < 0) throw UnknownTokenError("unknown action token: " + t);
    return static_cast<std::size_t>(i);
}

Vocabulary Vocabulary::from_counts(
    const std::unordered_map<ActionToken, std::size_t>& counts) {
    Vocabulary v;
    v.tokens_.reserve(counts.size());
    for (const auto& [tok, c] : counts) v.tokens_.push_back(tok);
    std::sort(v.tokens_.begin(), v.tokens_.end(),
              [&](const ActionToken& a, const ActionToken& b) {
                  std::size_t ca = counts.at(a), cb = counts.at(b);
                  if (ca != cb) return ca > cb;
                  return a < b;
              });
    v.counts_.reserve(v.tokens_.size());
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        v.index_[v.tokens_[i]] = i;
        v.counts_.push_back(counts.at(v.tokens_[i]));
        v.total_ += v.counts_.back();
    }
    return v;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(std::move(tok));
    return out;
}

}  // namespace

PlanLibrary parse_plan_library(const std::string& text) {
    PlanLibrary lib;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        Plan p;
        p.actions.reserve(toks.size());
        for (auto& t : toks) {
            if (!valid_token(t))
                throw IllegalTokenError("illegal token \"" + t + "\" on line " +
                                        std::to_string(lineno));
            p.actions.push_back(std::move(t));
        }
        lib.plans.push_back(std::move(p));
    }
    if (lib.plans.empty()) throw EmptyLibraryError("plan library has no plans");
    return lib;
}

std::string write_plan_library(const PlanLibrary& lib) {
    std::string out;
    for (const auto& p : lib.plans) {
        for (std::size_t i = 0; i < p.actions.size(); ++i) {
            if (i) out += ' ';
            out += p.actions[i];
        }
        out += '\n';
    }
    return out;
}

Vocabulary build_vocabulary(const PlanLibrary& lib) {
    if (lib.plans.empty()) throw EmptyLibraryError("plan library has no plans");
    std::unordered_map<ActionToken, std::size_t> counts;
    for (const auto& p : lib.plans)
        for (const auto& a : p.actions) ++counts[a];
    return Vocabulary::from_counts(counts);
}

std::vector<std::size_t> Observation::unobserved_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (!slots[i].observed) idx.push_back(i);
    return idx;
}

Observation mask_random(const Plan& p, double xi, Rng& rng) {
    const std::size_t n = p.size();
    // k = max(1, round(xi*n)) once any masking is requested at all.
    std::size_t k = 0;
    if (xi > 0.0) {
        k = static_cast<std::size_t>(std::llround(xi * static_cast<double>(n)));
        k = std::max<std::size_t>(k, 1);
        k = std::min(k, n);
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);
    std::vector<bool> hide(n, false);
    for (std::size_t i = 0; i < k; ++i) hide[idx[i]] = true;

    Observation obs;
    obs.slots.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        obs.slots.push_back(hide[i] ? Slot::unobs() : Slot::obs(p.actions[i]));
    obs.truth = p;
    return obs;
}

Observation mask_consecutive(const Plan& p, std::size_t count,
                             MaskLocation where, Rng& rng) {
    const std::size_t n = p.size();
    if (count == 0 || count >= n)
        throw BlockTooLongError("missing block of " + std::to_string(count) +
                                " does not fit a plan of length " +
                                std::to_string(n));
    std::size_t start;
    if (where == MaskLocation::End) {
        start = n - count;
    } else {
        if (count > n - 2)
            throw BlockTooLongError(
                "middle block needs an observed action on each side");
        // legal starts: 1 .. n-count-1
        start = 1 + uniform_index(rng, n - count - 1);
    }
    Observation obs;
    obs.slots.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool hidden = i >= start && i < start + count;
        obs.slots.push_back(hidden ? Slot::unobs() : Slot::obs(p.actions[i]));
    }
    obs.truth = p;
    return obs;
}

std::vector<PlanLibrary> split_folds(const PlanLibrary& lib, std::size_t k,
                                     Rng& rng) {
    if (k == 0 || lib.size() < k)
        throw TooFewPlansError("need at least " + std::to_string(k) +
                               " plans for " + std::to_string(k) + " folds");
    std::vector<std::size_t> idx(lib.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);
    std::vector<PlanLibrary> folds(k);
    for (std::size_t i = 0; i < idx.size(); ++i)
        folds[i % k].plans.push_back(lib.plans[idx[i]]);
    return folds;
}

std::vector<Observation> parse_observations(const std::string& text) {
    std::vector<Observation> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        Observation obs;
        obs.slots.reserve(toks.size());
        for (auto& t : toks) {
            if (t == kUnobservedMarker) {
                obs.slots.push_back(Slot::unobs());
            } else {
                if (!valid_token(t))
                    throw IllegalTokenError("illegal token \"" + t +
                                            "\" on line " +
                                            std::to_string(lineno));
                obs.slots.push_back(Slot::obs(std::move(t)));
            }
        }
        out.push_back(std::move(obs));
    }
    return out;
}

std::string write_observation(const Observation& obs) {
    std::string out;
    for (std::size_t i = 0; i < obs.slots.size(); ++i) {
        if (i) out += ' ';
        out += obs.slots[i].observed ? obs.slots[i].token
                                     : std::string(kUnobservedMarker);
    }
    return out;
}

void attach_truth(std::vector<Observation>& obs, const PlanLibrary& truth) {
    if (obs.size() != truth.size())
        throw FileFormatError("truth file has " + std::to_string(truth.size()) +
                              " plans for " + std::to_string(obs.size()) +
                              " observations");
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i].size() != truth.plans[i].size())
            throw FileFormatError("truth plan " + std::to_string(i + 1) +
                                  " length differs from its observation");
        for (std::size_t s = 0; s < obs[i].size(); ++s)
            if (obs[i].slots[s].observed &&
                obs[i].slots[s].token != truth.plans[i].actions[s])
                throw FileFormatError(
                    "observed token contradicts truth at plan " +
                    std::to_string(i + 1) + " position " + std::to_string(s + 1));
        obs[i].truth = truth.plans[i];
    }
}

}  // namespace planrec
