#include "planrec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "planrec/errors.hpp"

namespace planrec {

double accuracy(
    const std::vector<std::pair<std::size_t, std::size_t>>& results) {
    if (results.empty())
        throw EmptyTestSetError("no test plans were scored");
    double sum = 0.0;
    for (const auto& [correct, k] : results) {
        if (k == 0) throw Error("a scored plan reports zero unobserved slots");
        if (correct > k)
            throw Error("more correct suggestions than unobserved slots");
        sum += double(correct) / double(k);
    }
    return sum / double(results.size());
}

namespace {

const char* recognizer_name(Recognizer r) {
    switch (r) {
        case Recognizer::Dup: return "dup";
        case Recognizer::Rnn: return "rnn";
        default: return "matchplan";
    }
}

const char* mode_name(MissingMode m) {
    switch (m) {
        case MissingMode::Random: return "random";
        case MissingMode::ConsecutiveMiddle: return "middle";
        default: return "end";
    }
}

std::uint64_t mix4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                   std::uint64_t d) {
    return mix_seed(mix_seed(mix_seed(a, b), c), d);
}

// Everything trained once per (seed, train size, fold) and reused across the
// grid. Only the member for the configured recognizer is populated.
struct FoldModels {
    bool ready = false;
    PlanLibrary train;
    Vocabulary train_vocab;  // candidate pool for window matching
    EmbeddingModel emb;
    DotCache dots;
    LSTMModel lstm;
};

std::string fmt_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

}  // namespace

std::vector<AccuracyRecord> run_experiment(const PlanLibrary& lib,
                                           const ExperimentConfig& cfg) {
    if (lib.plans.empty()) throw EmptyLibraryError("empty corpus");
    const bool random_mode = cfg.missing == MissingMode::Random;

    std::vector<double> grid;
    if (random_mode) {
        for (double xi : cfg.xi_grid) {
            if (xi < 0.0 || xi > 0.5)
                throw Error("unobserved fraction outside [0, 0.5]: " +
                            fmt_g(xi));
            grid.push_back(xi);
        }
    } else {
        for (std::size_t c : cfg.count_grid) {
            if (c == 0) throw Error("a missing-count of zero masks nothing");
            grid.push_back(double(c));
        }
    }
    if (grid.empty()) throw Error("empty masking grid");
    if (cfg.top_m_grid.empty()) throw Error("empty top_m grid");
    if (cfg.seeds.empty()) throw Error("empty seed list");
    if (cfg.folds < 2) throw Error("cross-validation needs at least 2 folds");

    const Vocabulary full_vocab = build_vocabulary(lib);
    const std::size_t max_m =
        *std::max_element(cfg.top_m_grid.begin(), cfg.top_m_grid.end());
    if (max_m == 0) throw Error("top_m must be positive");
    if (max_m > full_vocab.size())
        throw Error("top_m " + std::to_string(max_m) +
                    " exceeds the vocabulary size " +
                    std::to_string(full_vocab.size()));
    for (std::size_t ts : cfg.train_sizes)
        if (ts == 0) throw Error("training size must be positive");

    std::vector<AccuracyRecord> out;
    for (std::uint64_t seed : cfg.seeds) {
        Rng fold_rng(mix_seed(seed, 0xF01D5ULL));
        auto folds = split_folds(lib, cfg.folds, fold_rng);

        std::vector<std::size_t> sizes = cfg.train_sizes;
        if (sizes.empty()) sizes.push_back(0);  // 0: the whole train split

        for (std::size_t ts : sizes) {
            std::vector<FoldModels> models(cfg.folds);
            for (std::size_t vi = 0; vi < grid.size(); ++vi) {
                const double v = grid[vi];
                for (std::size_t f = 0; f < cfg.folds; ++f) {
                    FoldModels& fm = models[f];
                    if (!fm.ready) {
                        for (std::size_t g = 0; g < cfg.folds; ++g) {
                            if (g == f) continue;
                            fm.train.plans.insert(fm.train.plans.end(),
                                                  folds[g].plans.begin(),
                                                  folds[g].plans.end());
                        }
                        if (ts > 0 && ts < fm.train.size()) {
                            Rng sub(mix4(seed, f, ts, 0x5AB5ULL));
                            shuffle(fm.train.plans, sub);
                            fm.train.plans.resize(ts);
                        }
                        switch (cfg.recognizer) {
                            case Recognizer::Dup: {
                                SkipgramParams sp = cfg.embed;
                                sp.seed = mix4(seed, f, ts, 1);
                                fm.emb =
                                    train_skipgram(fm.train, sp, &full_vocab);
                                fm.dots = DotCache::build(fm.emb);
                                break;
                            }
                            case Recognizer::Rnn: {
                                RnnParams rp = cfg.rnn;
                                rp.seed = mix4(seed, f, ts, 2);
                                fm.lstm = train_rnn(fm.train, rp, &full_vocab);
                                break;
                            }
                            case Recognizer::MatchPlan:
                                fm.train_vocab = build_vocabulary(fm.train);
                                break;
                        }
                        fm.ready = true;
                    }

                    auto t0 = std::chrono::steady_clock::now();
                    std::vector<std::vector<std::pair<std::size_t, std::size_t>>>
                        per_m(cfg.top_m_grid.size());
                    for (std::size_t pi = 0; pi < folds[f].plans.size(); ++pi) {
                        const Plan& truth = folds[f].plans[pi];
                        Rng rng(mix4(seed, vi, f, pi));

                        Observation obs;
                        if (random_mode) {
                            obs = mask_random(truth, v, rng);
                        } else {
                            const std::size_t count =
                                static_cast<std::size_t>(v);
                            const bool middle =
                                cfg.missing == MissingMode::ConsecutiveMiddle;
                            if (middle ? count + 2 > truth.size()
                                       : count >= truth.size())
                                continue;  // plan too short for this mask
                            obs = mask_consecutive(
                                truth, count,
                                middle ? MaskLocation::Middle
                                       : MaskLocation::End,
                                rng);
                        }
                        const auto slots = obs.unobserved_indices();
                        if (slots.empty()) continue;
                        if (cfg.recognizer == Recognizer::Rnn &&
                            !obs.slots[0].observed)
                            continue;  // the model cannot seed itself

                        // One ranking per unobserved slot, scored below for
                        // the whole top_m grid.
                        std::vector<std::vector<ActionToken>> rankings;
                        switch (cfg.recognizer) {
                            case Recognizer::Dup: {
                                DupParams dp = cfg.dup;
                                dp.top_m = max_m;
                                auto r =
                                    recognize(fm.emb, obs, dp, rng, &fm.dots);
                                for (const auto& s : r.recs.slots) {
                                    std::vector<ActionToken> toks;
                                    for (const auto& [t, w] : s.ranked)
                                        toks.push_back(t);
                                    rankings.push_back(std::move(toks));
                                }
                                break;
                            }
                            case Recognizer::Rnn: {
                                auto r = complete(fm.lstm, obs, max_m,
                                                  cfg.rnn_fill, rng);
                                for (const auto& s : r.recs.slots) {
                                    std::vector<ActionToken> toks;
                                    for (const auto& [t, w] : s.ranked)
                                        toks.push_back(t);
                                    rankings.push_back(std::move(toks));
                                }
                                break;
                            }
                            case Recognizer::MatchPlan: {
                                MatchConfig mc = cfg.match;
                                mc.top_m = max_m;
                                for (std::size_t s : slots) {
                                    auto r = match_recommend(
                                        fm.train, fm.train_vocab, obs, s, mc);
                                    std::vector<ActionToken> toks;
                                    for (const auto& [t, w] : r.ranked)
                                        toks.push_back(t);
                                    rankings.push_back(std::move(toks));
                                }
                                break;
                            }
                        }

                        for (std::size_t mi = 0; mi < cfg.top_m_grid.size();
                             ++mi) {
                            const std::size_t m = cfg.top_m_grid[mi];
                            std::size_t correct = 0;
                            for (std::size_t si = 0; si < slots.size(); ++si) {
                                const auto& want =
                                    truth.actions[slots[si]];
                                const auto& toks = rankings[si];
                                const std::size_t lim =
                                    std::min(m, toks.size());
                                for (std::size_t i = 0; i < lim; ++i)
                                    if (toks[i] == want) {
                                        ++correct;
                                        break;
                                    }
                            }
                            per_m[mi].push_back({correct, slots.size()});
                        }
                    }
                    double wall = 0.0;
                    if (cfg.timing) {
                        wall = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();
                    }
                    for (std::size_t mi = 0; mi < cfg.top_m_grid.size();
                         ++mi) {
                        AccuracyRecord rec;
                        rec.recognizer = recognizer_name(cfg.recognizer);
                        rec.domain = cfg.domain;
                        rec.missing_mode = mode_name(cfg.missing);
                        rec.xi_or_count = v;
                        rec.top_m = cfg.top_m_grid[mi];
                        rec.train_size = fm.train.size();
                        rec.fold = f;
                        rec.seed = seed;
                        rec.acc = accuracy(per_m[mi]);
                        rec.wall_s = wall;
                        out.push_back(std::move(rec));
                    }
                }
            }
        }
    }
    return out;
}

namespace {

constexpr const char* kCsvHeader =
    "recognizer,domain,missing_mode,xi_or_count,top_m,train_size,fold,seed,"
    "acc,wall_s";

}  // namespace

std::string records_to_csv(const std::vector<AccuracyRecord>& records) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    char buf[64];
    for (const auto& r : records) {
        out << r.recognizer << ',' << r.domain << ',' << r.missing_mode << ',';
        std::snprintf(buf, sizeof buf, "%g", r.xi_or_count);
        out << buf << ',' << r.top_m << ',' << r.train_size << ',' << r.fold
            << ',' << r.seed << ',';
        std::snprintf(buf, sizeof buf, "%.6g", r.acc);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_s);
        out << buf << '\n';
    }
    return out.str();
}

std::vector<AccuracyRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FileFormatError("empty results file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw FileFormatError("unexpected results header: " + line);

    std::vector<AccuracyRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 10)
            throw FileFormatError("line " + std::to_string(lineno) +
                                  ": expected 10 fields, found " +
                                  std::to_string(f.size()));
        AccuracyRecord r;
        try {
            r.recognizer = f[0];
            r.domain = f[1];
            r.missing_mode = f[2];
            r.xi_or_count = std::stod(f[3]);
            r.top_m = std::stoul(f[4]);
            r.train_size = std::stoul(f[5]);
            r.fold = std::stoul(f[6]);
            r.seed = std::stoull(f[7]);
            r.acc = std::stod(f[8]);
            r.wall_s = std::stod(f[9]);
        } catch (const std::exception&) {
            throw FileFormatError("line " + std::to_string(lineno) +
                                  ": malformed numeric field");
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

double plot_x(const AccuracyRecord& r, const std::string& key) {
    if (key == "xi_or_count") return r.xi_or_count;
    if (key == "top_m") return double(r.top_m);
    if (key == "train_size") return double(r.train_size);
    if (key == "fold") return double(r.fold);
    if (key == "seed") return double(r.seed);
    throw Error("unknown x-axis key: " + key);
}

std::string plot_series(const AccuracyRecord& r, const std::string& key) {
    if (key == "recognizer") return r.recognizer;
    if (key == "domain") return r.domain;
    if (key == "missing_mode") return r.missing_mode;
    if (key == "top_m") return std::to_string(r.top_m);
    if (key == "xi_or_count") return fmt_g(r.xi_or_count);
    if (key == "train_size") return std::to_string(r.train_size);
    if (key == "seed") return std::to_string(r.seed);
    throw Error("unknown series key: " + key);
}

std::string fmt2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

void emit_plot(const std::vector<AccuracyRecord>& records,
               const std::string& x_key, const std::string& series_key,
               const std::string& out_path) {
    if (records.empty()) throw EmptyRecordsError("no records to plot");

    // series -> x -> (sum, n); means over folds and seeds fall out of the
    // grouping since neither is part of the key.
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>>
        groups;
    for (const auto& r : records) {
        auto& cell = groups[plot_series(r, series_key)][plot_x(r, x_key)];
        cell.first += r.acc;
        cell.second += 1;
    }

    std::ofstream csv(out_path + ".csv");
    if (!csv) throw FileFormatError("cannot write " + out_path + ".csv");
    csv << series_key << ',' << x_key << ",mean_acc,n\n";
    double xmin = 0, xmax = 0;
    bool first_pt = true;
    for (const auto& [s, xs] : groups)
        for (const auto& [x, cell] : xs) {
            csv << s << ',' << fmt_g(x) << ','
                << fmt_g(cell.first / double(cell.second)) << ','
                << cell.second << '\n';
            if (first_pt) {
                xmin = xmax = x;
                first_pt = false;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
            }
        }
    if (xmin == xmax) {
        xmin -= 0.5;
        xmax += 0.5;
    }

    const double W = 720, H = 480, L = 70, R = 560, T = 30, B = 420;
    auto px = [&](double x) {
        return L + (x - xmin) / (xmax - xmin) * (R - L);
    };
    auto py = [&](double acc) { return B - acc * (B - T); };
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b",
                                     "#17becf", "#7f7f7f"};

    std::ofstream svg(out_path);
    if (!svg) throw FileFormatError("cannot write " + out_path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
        << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H
        << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R
        << "\" y2=\"" << B << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
        << "\" y2=\"" << B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double acc = i * 0.25;
        svg << "<line x1=\"" << L - 4 << "\" y1=\"" << fmt2(py(acc))
            << "\" x2=\"" << L << "\" y2=\"" << fmt2(py(acc))
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << L - 8 << "\" y=\"" << fmt2(py(acc) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\">"
            << fmt_g(acc) << "</text>\n";
    }
    // x ticks at each distinct x when few, else six evenly spaced
    std::vector<double> xticks;
    {
        std::map<double, bool> distinct;
        for (const auto& [s, xs] : groups)
            for (const auto& [x, cell] : xs) distinct[x] = true;
        if (distinct.size() <= 12) {
            for (const auto& [x, b] : distinct) xticks.push_back(x);
        } else {
            for (int i = 0; i <= 5; ++i)
                xticks.push_back(xmin + (xmax - xmin) * i / 5.0);
        }
    }
    for (double x : xticks) {
        svg << "<line x1=\"" << fmt2(px(x)) << "\" y1=\"" << B << "\" x2=\""
            << fmt2(px(x)) << "\" y2=\"" << B + 4 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << fmt2(px(x)) << "\" y=\"" << B + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\">"
            << fmt_g(x) << "</text>\n";
    }
    svg << "<text x=\"" << (L + R) / 2 << "\" y=\"" << B + 40
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << x_key << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (T + B) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 "
        << (T + B) / 2 << ")\">mean accuracy</text>\n";

    std::size_t si = 0;
    for (const auto& [s, xs] : groups) {
        const char* color = kPalette[si % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, cell] : xs)
            svg << fmt2(px(x)) << ','
                << fmt2(py(cell.first / double(cell.second))) << ' ';
        svg << "\"/>\n";
        for (const auto& [x, cell] : xs)
            svg << "<circle cx=\"" << fmt2(px(x)) << "\" cy=\""
                << fmt2(py(cell.first / double(cell.second)))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        double ly = T + 10 + 18.0 * double(si);
        svg << "<line x1=\"" << R + 16 << "\" y1=\"" << fmt2(ly) << "\" x2=\""
            << R + 40 << "\" y2=\"" << fmt2(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << R + 46 << "\" y=\"" << fmt2(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s
            << "</text>\n";
        ++si;
    }
    svg << "</svg>\n";
}

}  // namespace planrec
