#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/ingest.hpp"
#include "centsmooth/laplacian.hpp"
#include "centsmooth/metrics.hpp"
#include "centsmooth/model.hpp"
#include "centsmooth/seeding.hpp"
#include "centsmooth/synth.hpp"
#include "centsmooth/train.hpp"

#ifndef CENTSMOOTH_VERSION
#define CENTSMOOTH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace centsmooth;

namespace {

struct Common {
    Index jobs = 1;
    std::uint64_t seed = 0;
    std::string config;
};

struct DataOptions {
    std::string data_dir;
    std::string triples;
    std::string features;

    void add(CLI::App* cmd) {
        cmd->add_option("--data", data_dir, "Directory holding triples.tsv and features.tsv");
        cmd->add_option("--triples", triples, "Triple file");
        cmd->add_option("--features", features, "Feature file");
    }
    Dataset load() const {
        fs::path t = triples, f = features;
        if (!data_dir.empty()) {
            if (t.empty()) t = fs::path(data_dir) / "triples.tsv";
            if (f.empty()) f = fs::path(data_dir) / "features.tsv";
        }
        if (t.empty() || f.empty()) throw Error("a dataset is required (--data or --triples with --features)");
        return load_dataset(t, f);
    }
};

struct ModelOptions {
    std::string method = "centsmoothie";
    std::string optimizer = "adam";
    TrainConfig train;

    void add(CLI::App* cmd) {
        cmd->add_option("--method", method, "centsmoothie, centsimple or baseline");
        cmd->add_option("--embedding-size", train.embedding_size, "Embedding size K");
        cmd->add_option("--layers", train.num_layers, "Number of propagation layers N");
        cmd->add_option("--lambda", train.lambda, "Weight of the negative term");
        cmd->add_option("--lr", train.learning_rate, "Learning rate");
        cmd->add_option("--epochs", train.epochs, "Training epochs");
        cmd->add_option("--neg-resample-every", train.neg_resample_every, "Epochs between negative redraws");
        cmd->add_option("--optimizer", optimizer, "adam or gd");
    }
    TrainConfig resolve(std::uint64_t seed) const {
        TrainConfig c = train;
        c.method = parse_method(method);
        c.optimizer = parse_optimizer(optimizer);
        c.seed = seed;
        const std::string notice = c.validate();
        if (!notice.empty()) std::cerr << "notice: " << notice << '\n';
        return c;
    }
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error("config " + path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return out;
}

std::string config_path_from_args(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

bool flag_given(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string option_value(const CLI::Option* opt) {
    if (opt->count() > 0) {
        std::string joined;
        for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
        if (opt->get_expected_min() == 0 && joined.empty()) return "true";
        return joined;
    }
    if (opt->get_expected_min() == 0) return "false";
    return opt->get_default_str();
}

/// Resolved settings of the main app and the selected subcommand.
std::vector<std::pair<std::string, std::string>> resolved_settings(const CLI::App& app, const CLI::App& cmd) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const CLI::App* a : {&app, &cmd})
        for (const CLI::Option* opt : a->get_options()) {
            const std::string name = opt->get_single_name();
            if (name == "help" || name == "config" || name == "version" || name.empty()) continue;
            out.emplace_back(name, option_value(opt));
        }
    std::sort(out.begin(), out.end());
    return out;
}

/// Output locations and thread count do not enter the hash.
std::string provenance_line(const std::string& command, const std::vector<std::pair<std::string, std::string>>& cfg,
                            std::uint64_t seed) {
    std::string canon = command + "\n";
    for (const auto& [k, v] : cfg)
        if (k != "jobs" && k != "out" && k != "loss-trace") canon += k + "=" + v + "\n";
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return "centsmooth " CENTSMOOTH_VERSION " command=" + command + " config=" + hash + " seed=" + std::to_string(seed);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

/// "-" or empty means standard output.
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        write_file(path, content);
    }
}

std::vector<Index> parse_m_values(const std::string& text) {
    std::vector<Index> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto dots = part.find("..");
        try {
            if (dots == std::string::npos) {
                out.push_back(std::stoll(part));
            } else {
                const Index lo = std::stoll(part.substr(0, dots)), hi = std::stoll(part.substr(dots + 2));
                if (lo > hi) throw Error("empty range '" + part + "'");
                for (Index m = lo; m <= hi; ++m) out.push_back(m);
            }
        } catch (const std::logic_error&) {
            throw Error("invalid --m value '" + part + "'");
        }
    }
    if (out.empty()) throw Error("--m selects no values");
    return out;
}

template <class F>
void parallel_for(Index count, Index jobs, F&& body) {
    const Index workers = std::max<Index>(1, std::min(jobs, count));
    if (workers == 1) {
        for (Index i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::string> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> threads;
    for (Index w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
            for (Index i = w; i < count; i += workers) {
                try {
                    body(i);
                } catch (const std::exception& e) {
                    errors[static_cast<std::size_t>(i)] = e.what();
                }
            }
        });
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);
}

std::string commented(const std::string& provenance) { return "# " + provenance + "\n"; }

// synth

struct SynthOptions {
    std::string m = "1..6";
    std::string out;
    SynthConfig config;
};

void cmd_synth(const SynthOptions& o, const Common& c, const std::string& prov) {
    if (o.out.empty()) throw Error("synth needs --out");
    SynthConfig base = o.config;
    base.seed = c.seed;
    const auto ms = parse_m_values(o.m);
    for (Index m : ms) {
        SynthConfig probe = base;
        probe.max_groups = m;
        probe.validate();
    }
    const auto datasets = sweep(base, ms);
    parallel_for(static_cast<Index>(datasets.size()), c.jobs, [&](Index i) {
        const auto& ds = datasets[static_cast<std::size_t>(i)];
        const fs::path dir = fs::path(o.out) / ("m" + std::to_string(ds.config.max_groups));
        const auto drugs = synthetic_drug_names(ds.graph.num_drugs());
        const auto ses = synthetic_side_effect_names(ds.graph.num_side_effects());
        const std::string head = commented(prov + " m=" + std::to_string(ds.config.max_groups) +
                                           " dataset_seed=" + std::to_string(ds.config.seed));
        std::ostringstream triples, features, ledger;
        triples << head;
        write_triples(triples, ds.graph.edges(), drugs, ses);
        features << head;
        write_features(features, ds.graph.drug_features(), drugs);
        ledger << head;
        write_ledger(ledger, ds.ledger, drugs);
        write_file(dir / "triples.tsv", triples.str());
        write_file(dir / "features.tsv", features.str());
        write_file(dir / "ledger.tsv", ledger.str());
    });
    for (const auto& ds : datasets)
        std::cerr << "m=" << ds.config.max_groups << ": " << ds.graph.edges().size() << " triples\n";
}

// train

struct TrainOptions {
    DataOptions data;
    ModelOptions model;
    std::string out;
    std::string loss_trace;
};

void cmd_train(const TrainOptions& o, const Common& c, const std::string& prov) {
    if (o.out.empty()) throw Error("train needs --out");
    const TrainConfig cfg = o.model.resolve(c.seed);
    const Dataset d = o.data.load();
    const auto result = train(d.graph, cfg);

    CheckpointHeader h;
    h.embedding_size = cfg.embedding_size;
    h.num_layers = cfg.num_layers;
    h.num_drugs = d.graph.num_drugs();
    h.num_side_effects = d.graph.num_side_effects();
    h.feature_width = d.graph.feature_width();
    h.method = std::string(method_name(cfg.method));
    h.seed = cfg.seed;
    h.provenance = prov;
    std::ostringstream ckpt;
    write_checkpoint(ckpt, h, result.params);
    write_file(o.out, ckpt.str());

    std::ostringstream trace;
    trace << commented(prov);
    write_loss_trace(trace, result.loss_trace);
    write_file(o.loss_trace.empty() ? o.out + ".loss.csv" : o.loss_trace, trace.str());
    if (!result.loss_trace.empty())
        std::cerr << "loss " << result.loss_trace.front() << " -> " << result.loss_trace.back() << '\n';
}

// eval

struct EvalOptions {
    DataOptions data;
    ModelOptions model;
    Index folds = 20;
    std::string out;
    bool curve = false;
};

void cmd_eval(const EvalOptions& o, const Common& c, const std::string& prov) {
    if (o.out.empty()) throw Error("eval needs --out");
    const TrainConfig cfg = o.model.resolve(c.seed);
    const Dataset d = o.data.load();
    CrossValidationOptions cv;
    cv.num_folds = o.folds;
    cv.seed = c.seed;
    cv.jobs = c.jobs;
    const EvalReport report = cross_validate(d.graph, cfg, cv);

    const fs::path dir = o.out;
    write_file(dir / "report.json", report_to_json(report, prov) + "\n");
    std::ostringstream per_se;
    per_se << commented(prov) << "side_effect,frequency,auc,aupr,folds_evaluated\n";
    for (const auto& s : report.per_side_effect)
        per_se << d.side_effect_names[static_cast<std::size_t>(s.side_effect)] << ',' << s.frequency << ','
               << fmt(s.auc) << ',' << fmt(s.aupr) << ',' << s.folds_evaluated << '\n';
    write_file(dir / "per_side_effect.csv", per_se.str());
    if (o.curve) write_file(dir / "infrequent_curve.csv", commented(prov) + curve_to_csv(report.infrequent_curve));
    std::cerr << "mean AUC " << fmt(report.mean_auc) << " (sd " << fmt(report.std_auc) << "), mean AUPR "
              << fmt(report.mean_aupr) << " (sd " << fmt(report.std_aupr) << ")\n";
}

// predict and dump share checkpoint loading

ModelParams load_params(const std::string& path, const Dataset& d, CheckpointHeader& h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    ModelParams p = read_checkpoint(in, &h);
    if (h.num_drugs != d.graph.num_drugs() || h.num_side_effects != d.graph.num_side_effects() ||
        h.feature_width != d.graph.feature_width())
        throw Error("checkpoint was trained on a dataset of a different shape");
    return p;
}

struct PredictOptions {
    DataOptions data;
    std::string checkpoint;
    std::vector<std::string> side_effects;
    std::string queries;
    Index top_k = 0;
    double threshold = 0.5;
    std::string out = "-";
};

void cmd_predict(const PredictOptions& o, const Common&, const std::string& prov) {
    if (o.checkpoint.empty()) throw Error("predict needs --checkpoint");
    if (!(o.threshold >= 0.0 && o.threshold < 1.0)) throw Error("threshold must lie in [0, 1)");
    if (o.top_k < 0) throw Error("--top-k must be non-negative");
    const Dataset d = o.data.load();
    CheckpointHeader h;
    const ModelParams params = load_params(o.checkpoint, d, h);
    const LaplacianBuilder builder(d.graph, parse_method(h.method));
    const NodeEmbedding x = forward(params, d.graph, builder);

    std::vector<Triple> candidates;
    if (!o.queries.empty()) {
        std::ifstream in(o.queries);
        if (!in) throw Error("cannot open queries '" + o.queries + "'");
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            std::stringstream ss(line);
            std::string a, b, s, extra;
            if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') || !std::getline(ss, s, '\t') ||
                std::getline(ss, extra, '\t'))
                throw Error(o.queries + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
            candidates.push_back(canonicalize(d.drug_index(a), d.drug_index(b), d.side_effect_index(s)));
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    } else {
        std::vector<Index> ses;
        for (const auto& name : o.side_effects) ses.push_back(d.side_effect_index(name));
        if (ses.empty())
            for (Index t = 0; t < d.graph.num_side_effects(); ++t) ses.push_back(t);
        std::sort(ses.begin(), ses.end());
        ses.erase(std::unique(ses.begin(), ses.end()), ses.end());
        for (Index t : ses)
            for (Index u = 0; u < d.graph.num_drugs(); ++u)
                for (Index v = u + 1; v < d.graph.num_drugs(); ++v)
                    if (!d.graph.contains({u, v, t})) candidates.push_back({u, v, t});
    }

    std::map<Index, std::vector<std::pair<double, Triple>>> by_side_effect;
    for (const auto& e : candidates) {
        const double s = score(e, x, params.weights);
        if (s > o.threshold) by_side_effect[e.t].push_back({s, e});
    }
    std::ostringstream out;
    out << commented(prov + " checkpoint_seed=" + std::to_string(h.seed));
    out << "drugA\tdrugB\tsideEffect\tscore\trank\n";
    for (auto& [t, rows] : by_side_effect) {
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const std::size_t limit = o.top_k > 0 ? std::min(rows.size(), static_cast<std::size_t>(o.top_k)) : rows.size();
        for (std::size_t r = 0; r < limit; ++r) {
            const Triple& e = rows[r].second;
            out << d.drug_names[e.u] << '\t' << d.drug_names[e.v] << '\t' << d.side_effect_names[e.t] << '\t'
                << fmt(rows[r].first) << '\t' << r + 1 << '\n';
        }
    }
    emit(o.out, out.str());
}

// extract

struct ExtractOptions {
    std::string reports;
    double alpha = 0.05;
    std::string out = "-";
};

void cmd_extract(const ExtractOptions& o, const Common& c, const std::string& prov) {
    if (o.reports.empty()) throw Error("extract needs --reports");
    const auto table = load_reports(o.reports);
    const auto kept = extract_significant(table, o.alpha, c.jobs);
    std::ostringstream out;
    out << commented(prov);
    write_significant(out, kept);
    emit(o.out, out.str());
    std::cerr << kept.size() << " significant triples from " << table.reports.size() << " reports\n";
}

// dump

struct DumpOptions {
    DataOptions data;
    ModelOptions model;
    std::string checkpoint;
    Index laplacian = -1;
    bool embeddings = false;
    std::string out = "-";
};

void cmd_dump(const DumpOptions& o, const Common& c, const std::string& prov) {
    if (o.laplacian < 0 && !o.embeddings) throw Error("dump needs --laplacian K or --embeddings");
    const Dataset d = o.data.load();
    ModelParams params;
    Method method;
    if (o.checkpoint.empty()) {
        std::cerr << "warning: no checkpoint given, dumping initialized parameters\n";
        const TrainConfig cfg = o.model.resolve(c.seed);
        params = ModelParams::initialize(d.graph.feature_width(), cfg.embedding_size, d.graph.num_side_effects(),
                                         cfg.num_layers, derive_seed(cfg.seed, {0}));
        method = cfg.method;
    } else {
        CheckpointHeader h;
        params = load_params(o.checkpoint, d, h);
        method = parse_method(h.method);
    }
    const LaplacianBuilder builder(d.graph, method);
    std::ostringstream out;
    out << commented(prov);
    if (o.laplacian >= 0) {
        if (o.laplacian >= params.embedding_size())
            throw Error("--laplacian " + std::to_string(o.laplacian) + " is outside [0, " +
                        std::to_string(params.embedding_size()) + ")");
        for (const auto& e : builder.laplacian(params.weights, o.laplacian).upper_entries())
            out << e.row << ' ' << e.col << ' ' << fmt(e.value) << '\n';
    } else {
        const NodeEmbedding x = forward(params, d.graph, builder);
        out << x.rows() << '\t' << d.graph.num_drugs() << '\t' << d.graph.num_side_effects() << '\n';
        for (Index node = 0; node < x.cols(); ++node) {
            for (Index k = 0; k < x.rows(); ++k) out << (k ? "\t" : "") << fmt(x(k, node));
            out << '\n';
        }
        for (Index t = 0; t < params.weights.cols(); ++t) {
            for (Index k = 0; k < params.weights.rows(); ++k) out << (k ? "\t" : "") << fmt(params.weights(k, t));
            out << '\n';
        }
    }
    emit(o.out, out.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Central-smoothing hypergraph network for drug-drug interaction prediction", "centsmooth"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", CENTSMOOTH_VERSION);
    Common common;
    app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", common.seed, "Base random seed");
    app.add_option("--config", common.config, "File of 'key = value' lines; flags take precedence");

    SynthOptions synth_o;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic datasets");
    synth_cmd->add_option("--m", synth_o.m, "Max groups per drug: a value, a list or a range like 1..6");
    synth_cmd->add_option("--out", synth_o.out, "Output directory");
    synth_cmd->add_option("--drugs", synth_o.config.num_drugs, "Number of drugs");
    synth_cmd->add_option("--groups", synth_o.config.num_groups, "Number of feature groups");
    synth_cmd->add_option("--features-per-group", synth_o.config.features_per_group, "Features per group");
    synth_cmd->add_option("--sigma", synth_o.config.sigma, "Feature noise standard deviation");

    TrainOptions train_o;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    train_o.data.add(train_cmd);
    train_o.model.add(train_cmd);
    train_cmd->add_option("--out", train_o.out, "Checkpoint path");
    train_cmd->add_option("--loss-trace", train_o.loss_trace, "Loss trace CSV (default: <out>.loss.csv)");

    EvalOptions eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "Cross-validate and write reports");
    eval_o.data.add(eval_cmd);
    eval_o.model.add(eval_cmd);
    eval_cmd->add_option("--folds", eval_o.folds, "Number of folds");
    eval_cmd->add_option("--out", eval_o.out, "Report directory");
    eval_cmd->add_flag("--infrequent-curve", eval_o.curve, "Also write infrequent_curve.csv");

    PredictOptions predict_o;
    auto* predict_cmd = app.add_subcommand("predict", "Rank candidate triples with a checkpoint");
    predict_o.data.add(predict_cmd);
    predict_cmd->add_option("--checkpoint", predict_o.checkpoint, "Checkpoint path");
    predict_cmd->add_option("--side-effect", predict_o.side_effects, "Restrict to these side effects");
    predict_cmd->add_option("--queries", predict_o.queries, "Triple file of queries to score");
    predict_cmd->add_option("--top-k", predict_o.top_k, "Rows per side effect (0 keeps all)");
    predict_cmd->add_option("--threshold", predict_o.threshold, "Keep scores strictly above this value");
    predict_cmd->add_option("--out", predict_o.out, "Output path or - for stdout");

    ExtractOptions extract_o;
    auto* extract_cmd = app.add_subcommand("extract", "Extract significant triples from reports");
    extract_cmd->add_option("--reports", extract_o.reports, "Report file");
    extract_cmd->add_option("--alpha", extract_o.alpha, "Significance level");
    extract_cmd->add_option("--out", extract_o.out, "Output path or - for stdout");

    DumpOptions dump_o;
    auto* dump_cmd = app.add_subcommand("dump", "Export a Laplacian or the embeddings");
    dump_o.data.add(dump_cmd);
    dump_o.model.add(dump_cmd);
    dump_cmd->add_option("--checkpoint", dump_o.checkpoint, "Checkpoint path");
    dump_cmd->add_option("--laplacian", dump_o.laplacian, "Dimension k of the Laplacian to export");
    dump_cmd->add_flag("--embeddings", dump_o.embeddings, "Export X* and W");
    dump_cmd->add_option("--out", dump_o.out, "Output path or - for stdout");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        const std::string config_path = config_path_from_args(args);
        if (!config_path.empty()) {
            const auto it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
                return app.get_subcommand_no_throw(a) != nullptr;
            });
            CLI::App* sub = it == args.end() ? nullptr : app.get_subcommand(*it);
            for (const auto& [key, value] : read_config_file(config_path)) {
                const bool known = (sub && sub->get_option_no_throw("--" + key)) || app.get_option_no_throw("--" + key);
                if (!known) throw Error("config: unknown key '" + key + "'");
                if (!flag_given(args, key)) args.push_back("--" + key + "=" + value);
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "centsmooth: error: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "centsmooth: error: " << one_line(e.what()) << '\n';
        return 1;
    }

    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    const auto settings = resolved_settings(app, *cmd);
    for (const auto& [k, v] : settings) std::cerr << "# " << k << " = " << v << '\n';
    const std::string prov = provenance_line(name, settings, common.seed);

    try {
        if (name == "synth") cmd_synth(synth_o, common, prov);
        else if (name == "train") cmd_train(train_o, common, prov);
        else if (name == "eval") cmd_eval(eval_o, common, prov);
        else if (name == "predict") cmd_predict(predict_o, common, prov);
        else if (name == "extract") cmd_extract(extract_o, common, prov);
        else if (name == "dump") cmd_dump(dump_o, common, prov);
    } catch (const std::exception& e) {
        std::cerr << "centsmooth: error: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
