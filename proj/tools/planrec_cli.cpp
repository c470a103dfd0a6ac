// Command-line front end: corpus generation, model training, observation
// completion, and the cross-validated experiment driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planrec/blocks.hpp"
#include "planrec/corpus.hpp"
#include "planrec/dup.hpp"
#include "planrec/embeddings.hpp"
#include "planrec/errors.hpp"
#include "planrec/harness.hpp"
#include "planrec/matchplan.hpp"
#include "planrec/rnn.hpp"

namespace {

using namespace planrec;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileFormatError("cannot write " + path);
    out << content;
}

// "3..8" or a single number; both bounds inclusive.
std::pair<int, int> parse_block_range(const std::string& s) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            int n = std::stoi(s);
            return {n, n};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw Error("bad block range '" + s + "', expected e.g. 3..8");
    }
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Shared layout for every completion verb: one "plan" line, then the ranked
// suggestions per unobserved slot.
void append_result(std::ostream& out, const Plan& completed,
                   const RecommendationSet& recs,
                   const std::vector<std::size_t>& fallback_slots = {}) {
    out << "plan";
    for (const auto& t : completed.actions) out << ' ' << t;
    out << '\n';
    for (const auto& s : recs.slots) {
        out << "slot " << s.slot;
        for (std::size_t fb : fallback_slots)
            if (fb == s.slot) out << " !fallback";
        for (const auto& [tok, w] : s.ranked) out << ' ' << tok << ' ' << fmt6(w);
        out << '\n';
    }
}

void deliver(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

std::vector<std::uint64_t> to_u64(const std::vector<unsigned long long>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plan completion toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    std::string out_path;
    bool quiet = false;
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--out", out_path, "output file (stdout if omitted)");
    app.add_flag("--quiet", quiet, "suppress progress messages");

    auto info = [&](const std::string& msg) {
        if (!quiet) std::cerr << msg << '\n';
    };

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus",
                                   "generate a synthetic blocks-world corpus");
    std::size_t gen_plans = 5000;
    std::string gen_blocks = "3..8";
    gen->add_option("--plans", gen_plans, "number of plans");
    gen->add_option("--blocks", gen_blocks, "block count range, e.g. 3..8");

    // train-embeddings
    auto* temb = app.add_subcommand("train-embeddings",
                                    "train action vectors on a corpus");
    std::string temb_corpus;
    SkipgramParams sg;
    temb->add_option("--corpus", temb_corpus, "plan corpus file")->required();
    temb->add_option("--dim", sg.dim, "vector dimension");
    temb->add_option("--window", sg.window, "context window");
    temb->add_option("--epochs", sg.epochs, "training epochs");
    temb->add_option("--lr", sg.lr, "initial learning rate");

    // rnn-train
    auto* rtr = app.add_subcommand("rnn-train",
                                   "train the sequence model on a corpus");
    std::string rtr_corpus, rtr_init_emb;
    RnnParams rp;
    rtr->add_option("--corpus", rtr_corpus, "plan corpus file")->required();
    rtr->add_option("--hidden", rp.hidden, "hidden units");
    rtr->add_option("--embed", rp.embed_dim, "input embedding dimension");
    rtr->add_option("--epochs", rp.epochs, "training epochs");
    rtr->add_option("--lr", rp.lr, "learning rate");
    rtr->add_option("--clip", rp.clip, "gradient-norm ceiling");
    rtr->add_option("--init-embeddings", rtr_init_emb,
                    "seed the embedding table from this vector model");

    // dup
    auto* dup_cmd = app.add_subcommand(
        "dup", "complete observations with the weighted-sampling recognizer");
    std::string dup_model, dup_obs;
    DupParams dp;
    std::string dup_init = "literal", dup_update = "analytic",
                dup_project = "maxscale";
    dup_cmd->add_option("--model", dup_model, "vector model file")->required();
    dup_cmd->add_option("--obs", dup_obs, "observation file")->required();
    dup_cmd->add_option("--iters", dp.iters, "sampling iterations");
    dup_cmd->add_option("--delta", dp.delta, "update step size");
    dup_cmd->add_option("--window", dp.window, "context window");
    dup_cmd->add_option("--top", dp.top_m, "suggestions per slot");
    dup_cmd->add_option("--init", dup_init, "column init: literal|normalized");
    dup_cmd->add_option("--update", dup_update,
                        "update rule: analytic|printed");
    dup_cmd->add_option("--project", dup_project,
                        "projection: maxscale|minmax");

    // rnn-complete
    auto* rcm = app.add_subcommand("rnn-complete",
                                   "complete observations with the sequence "
                                   "model");
    std::string rcm_model, rcm_obs, rcm_mode = "greedy";
    std::size_t rcm_top = 10;
    rcm->add_option("--model", rcm_model, "sequence model file")->required();
    rcm->add_option("--obs", rcm_obs, "observation file")->required();
    rcm->add_option("--top", rcm_top, "suggestions per slot");
    rcm->add_option("--mode", rcm_mode, "fill mode: greedy|sample");

    // matchplan
    auto* mp = app.add_subcommand(
        "matchplan", "recommend actions by window matching against a corpus");
    std::string mp_corpus, mp_obs, mp_agg = "max";
    MatchConfig mc;
    mp->add_option("--corpus", mp_corpus, "plan corpus file")->required();
    mp->add_option("--obs", mp_obs, "observation file")->required();
    mp->add_option("--window", mc.window, "matching window");
    mp->add_option("--top", mc.top_m, "suggestions per slot");
    mp->add_option("--agg", mp_agg, "cross-plan aggregation: max|sum");

    // experiment
    auto* exp = app.add_subcommand(
        "experiment", "cross-validated accuracy sweep over a corpus");
    std::string exp_corpus, exp_recognizer, exp_missing = "random";
    std::string exp_dup_init = "literal", exp_dup_update = "analytic",
                exp_dup_project = "maxscale", exp_fill = "greedy",
                exp_agg = "max", exp_domain = "blocks";
    ExperimentConfig ec;
    std::vector<unsigned long long> exp_seeds;
    exp->add_option("--corpus", exp_corpus, "plan corpus file")->required();
    exp->add_option("--recognizer", exp_recognizer,
                    "dup|rnn|matchplan")
        ->required();
    exp->add_option("--domain", exp_domain, "domain tag for the result rows");
    exp->add_option("--folds", ec.folds, "cross-validation folds");
    exp->add_option("--missing", exp_missing,
                    "masking mode: random|middle|end");
    exp->add_option("--xi", ec.xi_grid, "unobserved fractions (random mode)")
        ->delimiter(',');
    exp->add_option("--counts", ec.count_grid,
                    "missing-action counts (middle/end modes)")
        ->delimiter(',');
    exp->add_option("--top", ec.top_m_grid, "suggestion-set sizes")
        ->delimiter(',');
    exp->add_option("--train-sizes", ec.train_sizes,
                    "training subsample sizes (default: full split)")
        ->delimiter(',');
    exp->add_option("--seeds", exp_seeds, "seed list (default: --seed)")
        ->delimiter(',');
    exp->add_flag("--timing", ec.timing,
                  "record wall time (makes output nondeterministic)");
    exp->add_option("--dim", ec.embed.dim, "vector dimension");
    exp->add_option("--embed-window", ec.embed.window,
                    "vector-training context window");
    exp->add_option("--embed-epochs", ec.embed.epochs,
                    "vector-training epochs");
    exp->add_option("--embed-lr", ec.embed.lr, "vector-training learning rate");
    exp->add_option("--iters", ec.dup.iters, "sampling iterations");
    exp->add_option("--delta", ec.dup.delta, "update step size");
    exp->add_option("--window", ec.dup.window, "recognition context window");
    exp->add_option("--dup-init", exp_dup_init, "literal|normalized");
    exp->add_option("--dup-update", exp_dup_update, "analytic|printed");
    exp->add_option("--dup-project", exp_dup_project, "maxscale|minmax");
    exp->add_option("--hidden", ec.rnn.hidden, "hidden units");
    exp->add_option("--embed", ec.rnn.embed_dim, "embedding dimension");
    exp->add_option("--rnn-epochs", ec.rnn.epochs, "sequence-model epochs");
    exp->add_option("--rnn-lr", ec.rnn.lr, "sequence-model learning rate");
    exp->add_option("--clip", ec.rnn.clip, "gradient-norm ceiling");
    exp->add_option("--fill", exp_fill, "completion fill mode: greedy|sample");
    exp->add_option("--match-window", ec.match.window, "matching window");
    exp->add_option("--agg", exp_agg, "match aggregation: max|sum");

    // plot
    auto* plt = app.add_subcommand("plot", "render accuracy curves from a "
                                           "results file");
    std::string plt_in, plt_x = "xi_or_count", plt_series = "recognizer";
    plt->add_option("--in", plt_in, "results csv file")->required();
    plt->add_option("--x", plt_x, "x-axis column");
    plt->add_option("--series", plt_series, "one curve per value of this "
                                            "column");

    CLI11_PARSE(app, argc, argv);

    auto pick = [](const std::string& v, const std::string& a,
                   const std::string& b, const std::string& what) {
        if (v != a && v != b)
            throw Error("bad " + what + " '" + v + "', expected " + a + " or " +
                        b);
        return v == a;
    };

    try {
        if (gen->parsed()) {
            auto [lo, hi] = parse_block_range(gen_blocks);
            auto lib = blocks::generate_corpus(gen_plans, lo, hi, seed);
            deliver(out_path, write_plan_library(lib));
            auto vocab = build_vocabulary(lib);
            info("wrote " + std::to_string(lib.size()) + " plans, " +
                 std::to_string(vocab.size()) + " distinct actions, " +
                 std::to_string(vocab.total_count()) + " tokens");
        } else if (temb->parsed()) {
            auto lib = parse_plan_library(read_file(temb_corpus));
            sg.seed = seed;
            auto model = train_skipgram(lib, sg);
            if (out_path.empty()) throw Error("--out is required here");
            save_embedding_model_file(model, out_path);
            info("trained " + std::to_string(model.vocab.size()) +
                 " action vectors of dimension " + std::to_string(model.dim));
        } else if (rtr->parsed()) {
            auto lib = parse_plan_library(read_file(rtr_corpus));
            rp.seed = seed;
            LSTMModel model;
            if (rtr_init_emb.empty()) {
                model = train_rnn(lib, rp);
            } else {
                auto emb = load_embedding_model_file(rtr_init_emb);
                model = train_rnn(lib, rp, nullptr, &emb);
            }
            if (out_path.empty()) throw Error("--out is required here");
            save_rnn_model_file(model, out_path);
            info("trained sequence model: " + std::to_string(model.hidden) +
                 " hidden units over " + std::to_string(model.vocab.size()) +
                 " actions");
        } else if (dup_cmd->parsed()) {
            auto model = load_embedding_model_file(dup_model);
            auto obs_list = parse_observations(read_file(dup_obs));
            dp.init = pick(dup_init, "literal", "normalized", "--init")
                          ? GammaInit::Literal
                          : GammaInit::Normalized;
            dp.update = pick(dup_update, "analytic", "printed", "--update")
                            ? GammaUpdate::Analytic
                            : GammaUpdate::Printed;
            dp.projection =
                pick(dup_project, "maxscale", "minmax", "--project")
                    ? GammaProjection::MaxRescale
                    : GammaProjection::MinMax;
            auto cache = DotCache::build(model);
            Rng rng(seed);
            std::ostringstream out;
            for (const auto& obs : obs_list) {
                auto res = recognize(model, obs, dp, rng, &cache);
                append_result(out, res.completed, res.recs);
            }
            deliver(out_path, out.str());
        } else if (rcm->parsed()) {
            auto model = load_rnn_model_file(rcm_model);
            auto obs_list = parse_observations(read_file(rcm_obs));
            FillMode fill = pick(rcm_mode, "greedy", "sample", "--mode")
                                ? FillMode::Greedy
                                : FillMode::Sample;
            Rng rng(seed);
            std::ostringstream out;
            for (const auto& obs : obs_list) {
                auto res = complete(model, obs, rcm_top, fill, rng);
                append_result(out, res.completed, res.recs);
            }
            deliver(out_path, out.str());
        } else if (mp->parsed()) {
            auto lib = parse_plan_library(read_file(mp_corpus));
            auto vocab = build_vocabulary(lib);
            auto obs_list = parse_observations(read_file(mp_obs));
            mc.agg = pick(mp_agg, "max", "sum", "--agg")
                         ? MatchAggregation::Max
                         : MatchAggregation::Sum;
            std::ostringstream out;
            for (const auto& obs : obs_list) {
                RecommendationSet recs;
                Plan completed;
                std::vector<std::size_t> fallback_slots;
                completed.actions.resize(obs.size());
                for (std::size_t x = 0; x < obs.size(); ++x)
                    if (obs.slots[x].observed)
                        completed.actions[x] = obs.slots[x].token;
                for (std::size_t x : obs.unobserved_indices()) {
                    auto r = match_recommend(lib, vocab, obs, x, mc);
                    if (r.frequency_fallback) fallback_slots.push_back(x);
                    SlotRecommendation sr;
                    sr.slot = x;
                    sr.ranked = std::move(r.ranked);
                    completed.actions[x] = sr.ranked.front().first;
                    recs.slots.push_back(std::move(sr));
                }
                append_result(out, completed, recs, fallback_slots);
            }
            deliver(out_path, out.str());
        } else if (exp->parsed()) {
            auto lib = parse_plan_library(read_file(exp_corpus));
            if (exp_recognizer == "dup")
                ec.recognizer = Recognizer::Dup;
            else if (exp_recognizer == "rnn")
                ec.recognizer = Recognizer::Rnn;
            else if (exp_recognizer == "matchplan")
                ec.recognizer = Recognizer::MatchPlan;
            else
                throw Error("bad --recognizer '" + exp_recognizer + "'");
            if (exp_missing == "random")
                ec.missing = MissingMode::Random;
            else if (exp_missing == "middle")
                ec.missing = MissingMode::ConsecutiveMiddle;
            else if (exp_missing == "end")
                ec.missing = MissingMode::ConsecutiveEnd;
            else
                throw Error("bad --missing '" + exp_missing + "'");
            ec.domain = exp_domain;
            ec.dup.init = pick(exp_dup_init, "literal", "normalized",
                               "--dup-init")
                              ? GammaInit::Literal
                              : GammaInit::Normalized;
            ec.dup.update = pick(exp_dup_update, "analytic", "printed",
                                 "--dup-update")
                                ? GammaUpdate::Analytic
                                : GammaUpdate::Printed;
            ec.dup.projection = pick(exp_dup_project, "maxscale", "minmax",
                                     "--dup-project")
                                    ? GammaProjection::MaxRescale
                                    : GammaProjection::MinMax;
            ec.rnn_fill = pick(exp_fill, "greedy", "sample", "--fill")
                              ? FillMode::Greedy
                              : FillMode::Sample;
            ec.match.agg = pick(exp_agg, "max", "sum", "--agg")
                               ? MatchAggregation::Max
                               : MatchAggregation::Sum;
            ec.seeds = exp_seeds.empty()
                           ? std::vector<std::uint64_t>{seed}
                           : to_u64(exp_seeds);
            auto records = run_experiment(lib, ec);
            if (out_path.empty()) throw Error("--out is required here");
            write_file(out_path, records_to_csv(records));
            info("wrote " + std::to_string(records.size()) + " result rows");
        } else if (plt->parsed()) {
            auto records = records_from_csv(read_file(plt_in));
            if (out_path.empty()) throw Error("--out is required here");
            emit_plot(records, plt_x, plt_series, out_path);
            info("wrote " + out_path + " and " + out_path + ".csv");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
