#include "centsmooth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "centsmooth/seeding.hpp"

namespace centsmooth {

namespace {

std::vector<ScoredLabel> sorted_descending(std::span<const ScoredLabel> scores) {
    std::vector<ScoredLabel> s(scores.begin(), scores.end());
    std::stable_sort(s.begin(), s.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
    return s;
}

}  // namespace

double auc(std::span<const ScoredLabel> scores) {
    const auto num_pos = std::count_if(scores.begin(), scores.end(), [](const ScoredLabel& s) { return s.positive; });
    const auto num_neg = static_cast<std::int64_t>(scores.size()) - num_pos;
    if (num_pos == 0 || num_neg == 0) throw Error("AUC needs at least one positive and one negative");
    const auto s = sorted_descending(scores);
    // ascending sweep over tie groups: each positive beats every negative below its group
    double wins = 0.0;
    std::int64_t neg_below = 0;
    for (std::size_t end = s.size(); end > 0;) {
        std::size_t begin = end - 1;
        while (begin > 0 && s[begin - 1].score == s[end - 1].score) --begin;
        std::int64_t pos = 0, neg = 0;
        for (std::size_t i = begin; i < end; ++i) (s[i].positive ? pos : neg)++;
        wins += static_cast<double>(pos) * static_cast<double>(neg_below) + 0.5 * static_cast<double>(pos * neg);
        neg_below += neg;
        end = begin;
    }
    return wins / (static_cast<double>(num_pos) * static_cast<double>(num_neg));
}

double aupr(std::span<const ScoredLabel> scores) {
    const auto num_pos = std::count_if(scores.begin(), scores.end(), [](const ScoredLabel& s) { return s.positive; });
    if (num_pos == 0) throw Error("AUPR needs at least one positive");
    const auto s = sorted_descending(scores);
    double area = 0.0;
    std::int64_t tp = 0, seen = 0;
    for (std::size_t begin = 0; begin < s.size();) {
        std::size_t end = begin;
        std::int64_t group_tp = 0;
        while (end < s.size() && s[end].score == s[begin].score) {
            group_tp += s[end].positive ? 1 : 0;
            ++end;
        }
        tp += group_tp;
        seen += static_cast<std::int64_t>(end - begin);
        if (group_tp > 0)
            area += (static_cast<double>(group_tp) / static_cast<double>(num_pos)) *
                    (static_cast<double>(tp) / static_cast<double>(seen));
        begin = end;
    }
    return area;
}

std::vector<Triple> FoldSplit::train_edges(const DdiHypergraph& g, Index fold) const {
    std::vector<Triple> out;
    out.reserve(g.edges().size());
    const auto& held = test.at(static_cast<std::size_t>(fold));
    std::set_difference(g.edges().begin(), g.edges().end(), held.begin(), held.end(), std::back_inserter(out));
    return out;
}

FoldSplit stratified_folds(const DdiHypergraph& g, Index num_folds, std::uint64_t seed) {
    if (num_folds < 2) throw Error("need at least two folds");
    if (num_folds > static_cast<Index>(g.edges().size()))
        throw Error("cannot split " + std::to_string(g.edges().size()) + " triples into " +
                    std::to_string(num_folds) + " folds");
    std::vector<std::vector<Triple>> by_side_effect(static_cast<std::size_t>(g.num_side_effects()));
    for (const Triple& e : g.edges()) by_side_effect[e.t].push_back(e);

    FoldSplit split;
    split.num_folds = num_folds;
    split.test.resize(static_cast<std::size_t>(num_folds));
    // the dealing cursor carries over between side effects so fold totals stay balanced too
    Index cursor = 0;
    for (Index t = 0; t < g.num_side_effects(); ++t) {
        auto& items = by_side_effect[t];
        std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
        std::shuffle(items.begin(), items.end(), rng);
        for (const Triple& e : items) {
            split.test[cursor].push_back(e);
            cursor = (cursor + 1) % num_folds;
        }
    }
    for (auto& fold : split.test) std::sort(fold.begin(), fold.end());
    return split;
}

std::vector<Triple> eval_negatives(const DdiHypergraph& g, std::span<const Triple> test_positives, std::uint64_t seed,
                                   std::unordered_set<std::uint64_t>* used) {
    if (test_positives.empty()) throw Error("evaluation needs at least one test positive");
    std::unordered_set<std::uint64_t> local;
    if (!used) used = &local;
    std::vector<Index> wanted(static_cast<std::size_t>(g.num_side_effects()), 0);
    for (const Triple& e : test_positives) ++wanted[e.t];

    const std::uint64_t s = static_cast<std::uint64_t>(g.num_side_effects());
    const std::uint64_t num_pairs = s == 0 ? 0 : g.universe_size() / s;
    std::vector<Index> edges_with(static_cast<std::size_t>(g.num_side_effects()), 0);
    for (const Triple& e : g.edges()) ++edges_with[e.t];

    std::vector<std::uint64_t> keys;
    for (Index t = 0; t < g.num_side_effects(); ++t) {
        if (wanted[t] == 0) continue;
        std::uint64_t used_t = 0;
        for (std::uint64_t key : *used)
            if (key % s == static_cast<std::uint64_t>(t)) ++used_t;
        const std::uint64_t available = num_pairs - static_cast<std::uint64_t>(edges_with[t]) - used_t;
        const auto count = static_cast<std::uint64_t>(wanted[t]);
        if (count > available)
            throw Error("insufficient negatives for side effect " + std::to_string(t) + ": need " +
                        std::to_string(count) + ", " + std::to_string(available) + " available");
        std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
        auto usable = [&](std::uint64_t key) { return !g.contains_key(key) && !used->contains(key); };
        if (count * 2 <= available) {
            std::uniform_int_distribution<std::uint64_t> pick(0, num_pairs - 1);
            for (std::uint64_t drawn = 0; drawn < count;) {
                const std::uint64_t key = pick(rng) * s + static_cast<std::uint64_t>(t);
                if (!usable(key)) continue;
                used->insert(key);
                keys.push_back(key);
                ++drawn;
            }
        } else {
            std::vector<std::uint64_t> pool;
            for (std::uint64_t pair = 0; pair < num_pairs; ++pair) {
                const std::uint64_t key = pair * s + static_cast<std::uint64_t>(t);
                if (usable(key)) pool.push_back(key);
            }
            for (std::uint64_t i = 0; i < count; ++i) {
                std::uniform_int_distribution<std::uint64_t> pick(i, pool.size() - 1);
                std::swap(pool[i], pool[pick(rng)]);
                used->insert(pool[i]);
                keys.push_back(pool[i]);
            }
        }
    }
    std::sort(keys.begin(), keys.end());
    std::vector<Triple> out;
    out.reserve(keys.size());
    for (std::uint64_t key : keys) out.push_back(g.triple_from_key(key));
    return out;
}

std::vector<CurvePoint> infrequent_curve(std::span<const ScoredTriple> results, std::span<const Index> frequencies) {
    const Index num_se = static_cast<Index>(frequencies.size());
    std::vector<Index> order(static_cast<std::size_t>(num_se));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return frequencies[a] < frequencies[b]; });

    std::vector<std::vector<ScoredLabel>> by_se(static_cast<std::size_t>(num_se));
    for (const auto& r : results) {
        if (r.triple.t < 0 || r.triple.t >= num_se) throw Error("scored triple has unknown side effect");
        by_se[r.triple.t].push_back({r.score, r.positive});
    }
    std::vector<CurvePoint> curve;
    std::vector<ScoredLabel> pool;
    bool has_pos = false, has_neg = false;
    for (Index i = 0; i < num_se; ++i) {
        const Index t = order[i];
        for (const auto& s : by_se[t]) {
            pool.push_back(s);
            (s.positive ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        curve.push_back({i + 1, t, auc(pool), aupr(pool)});
    }
    return curve;
}

FoldScorer trained_scorer(const TrainConfig& config, std::function<void(Index, const TrainResult&)> on_trained) {
    return [config, on_trained](const DdiHypergraph& train_graph, std::span<const Triple> queries, Index fold) {
        TrainConfig c = config;
        c.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(fold)});
        const TrainResult r = train(train_graph, c);
        if (on_trained) on_trained(fold, r);
        const LaplacianBuilder builder(train_graph, c.method);
        const NodeEmbedding x = forward(r.params, train_graph, builder);
        std::vector<double> out;
        out.reserve(queries.size());
        for (const Triple& e : queries) out.push_back(score(e, x, r.params.weights));
        return out;
    };
}

namespace {

struct FoldOutcome {
    FoldMetrics metrics;
    std::vector<ScoredTriple> scored;
};

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

EvalReport cross_validate(const DdiHypergraph& g, const FoldScorer& scorer, const CrossValidationOptions& options) {
    const FoldSplit split = stratified_folds(g, options.num_folds, options.seed);
    const Index f = split.num_folds;

    // negatives are drawn up front, in fold order, so they do not depend on job scheduling
    std::unordered_set<std::uint64_t> used;
    std::vector<std::vector<Triple>> negatives(static_cast<std::size_t>(f));
    for (Index k = 0; k < f; ++k)
        negatives[k] = eval_negatives(g, split.test[k], derive_seed(options.seed, {1000003, static_cast<std::uint64_t>(k)}), &used);

    std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(f));
    std::vector<std::string> errors(static_cast<std::size_t>(f));
    auto run_fold = [&](Index k) {
        try {
            const DdiHypergraph train_graph = g.with_edges(split.train_edges(g, k));
            std::vector<Triple> queries = split.test[k];
            queries.insert(queries.end(), negatives[k].begin(), negatives[k].end());
            const std::vector<double> scores = scorer(train_graph, queries, k);
            if (scores.size() != queries.size()) throw Error("scorer returned the wrong number of scores");
            auto& out = outcomes[k];
            std::vector<ScoredLabel> labels;
            for (std::size_t i = 0; i < queries.size(); ++i) {
                const bool positive = i < split.test[k].size();
                if (!std::isfinite(scores[i])) throw Error("non-finite score");
                out.scored.push_back({queries[i], scores[i], positive});
                labels.push_back({scores[i], positive});
            }
            out.metrics.auc = auc(labels);
            out.metrics.aupr = aupr(labels);
            out.metrics.num_positives = static_cast<Index>(split.test[k].size());
            out.metrics.num_negatives = static_cast<Index>(negatives[k].size());
        } catch (const std::exception& e) {
            errors[k] = "fold " + std::to_string(k) + ": " + e.what();
        }
    };

    const Index jobs = std::max<Index>(1, std::min(options.jobs, f));
    if (jobs == 1) {
        for (Index k = 0; k < f; ++k) run_fold(k);
    } else {
        std::vector<std::thread> workers;
        for (Index w = 0; w < jobs; ++w)
            workers.emplace_back([&, w] {
                for (Index k = w; k < f; k += jobs) run_fold(k);
            });
        for (auto& t : workers) t.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);

    EvalReport report;
    std::vector<double> aucs, auprs;
    for (const auto& o : outcomes) {
        report.folds.push_back(o.metrics);
        aucs.push_back(o.metrics.auc);
        auprs.push_back(o.metrics.aupr);
    }
    mean_std(aucs, report.mean_auc, report.std_auc);
    mean_std(auprs, report.mean_aupr, report.std_aupr);

    std::vector<Index> freq(static_cast<std::size_t>(g.num_side_effects()), 0);
    for (const Triple& e : g.edges()) ++freq[e.t];

    // per side effect: mean over folds in which it has both labels
    for (Index t = 0; t < g.num_side_effects(); ++t) {
        SideEffectMetrics m;
        m.side_effect = t;
        m.frequency = freq[t];
        for (const auto& o : outcomes) {
            std::vector<ScoredLabel> labels;
            bool pos = false, neg = false;
            for (const auto& s : o.scored) {
                if (s.triple.t != t) continue;
                labels.push_back({s.score, s.positive});
                (s.positive ? pos : neg) = true;
            }
            if (!pos || !neg) continue;
            m.auc += auc(labels);
            m.aupr += aupr(labels);
            ++m.folds_evaluated;
        }
        if (m.folds_evaluated > 0) {
            m.auc /= static_cast<double>(m.folds_evaluated);
            m.aupr /= static_cast<double>(m.folds_evaluated);
        }
        report.per_side_effect.push_back(m);
    }

    // infrequent-side-effect curve: per-fold curves averaged point by point
    std::map<Index, std::pair<CurvePoint, Index>> acc;
    for (const auto& o : outcomes) {
        for (const auto& p : infrequent_curve(o.scored, freq)) {
            auto [it, inserted] = acc.try_emplace(p.num_side_effects, CurvePoint{p.num_side_effects, p.side_effect, 0.0, 0.0}, 0);
            it->second.first.auc += p.auc;
            it->second.first.aupr += p.aupr;
            ++it->second.second;
        }
    }
    for (auto& [n, entry] : acc) {
        CurvePoint p = entry.first;
        p.auc /= static_cast<double>(entry.second);
        p.aupr /= static_cast<double>(entry.second);
        report.infrequent_curve.push_back(p);
    }
    return report;
}

EvalReport cross_validate(const DdiHypergraph& g, const TrainConfig& config, const CrossValidationOptions& options) {
    config.validate();
    return cross_validate(g, trained_scorer(config), options);
}

std::string report_to_json(const EvalReport& report, const std::string& provenance) {
    using nlohmann::ordered_json;
    ordered_json j;
    if (!provenance.empty()) j["provenance"] = provenance;
    ordered_json folds = ordered_json::array();
    for (std::size_t k = 0; k < report.folds.size(); ++k) {
        const auto& f = report.folds[k];
        folds.push_back({{"fold", k},
                         {"auc", f.auc},
                         {"aupr", f.aupr},
                         {"num_positives", f.num_positives},
                         {"num_negatives", f.num_negatives}});
    }
    j["folds"] = folds;
    j["mean_auc"] = report.mean_auc;
    j["std_auc"] = report.std_auc;
    j["mean_aupr"] = report.mean_aupr;
    j["std_aupr"] = report.std_aupr;
    ordered_json per = ordered_json::array();
    for (const auto& m : report.per_side_effect)
        per.push_back({{"side_effect", m.side_effect},
                       {"frequency", m.frequency},
                       {"auc", m.auc},
                       {"aupr", m.aupr},
                       {"folds_evaluated", m.folds_evaluated}});
    j["per_side_effect"] = per;
    ordered_json curve = ordered_json::array();
    for (const auto& p : report.infrequent_curve)
        curve.push_back({{"num_side_effects", p.num_side_effects},
                         {"added_side_effect", p.side_effect},
                         {"auc", p.auc},
                         {"aupr", p.aupr}});
    j["infrequent_curve"] = curve;
    return j.dump(2) + "\n";
}

std::string curve_to_csv(std::span<const CurvePoint> curve) {
    std::string out = "num_side_effects,added_side_effect,auc,aupr\n";
    char buf[128];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g\n", static_cast<long long>(p.num_side_effects),
                      static_cast<long long>(p.side_effect), p.auc, p.aupr);
        out += buf;
    }
    return out;
}

}  // namespace centsmooth
