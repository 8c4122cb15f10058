#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "../oracles.hpp"
#include "centsmooth/metrics.hpp"
#include "centsmooth/synth.hpp"

using namespace centsmooth;

namespace {

std::vector<ScoredLabel> random_scores(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> level(0, 9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::bernoulli_distribution coin(0.4), tie(0.3);
    std::vector<ScoredLabel> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back({tie(rng) ? level(rng) / 10.0 : uni(rng), coin(rng)});
    s[0].positive = true;
    s[1].positive = false;
    return s;
}

DdiHypergraph fixture_graph() {
    SynthConfig cfg;
    cfg.num_drugs = 30;
    cfg.num_groups = 4;
    cfg.max_groups = 2;
    cfg.seed = 3;
    return generate(cfg).graph;
}

}  // namespace

TEST_CASE("auc examples") {
    const std::vector<ScoredLabel> separated{{0.9, true}, {0.8, true}, {0.2, false}};
    CHECK(auc(separated) == 1.0);
    const std::vector<ScoredLabel> flat{{0.5, true}, {0.5, false}, {0.5, false}};
    CHECK(auc(flat) == 0.5);
    const std::vector<ScoredLabel> mixed{{0.9, true}, {0.8, false}, {0.4, false}, {0.3, true}};
    CHECK(auc(mixed) == 0.5);
    const std::vector<ScoredLabel> degenerate{{0.9, true}};
    CHECK_THROWS_AS(auc(degenerate), Error);
}

TEST_CASE("aupr examples") {
    const std::vector<ScoredLabel> perfect{{0.9, true}, {0.8, true}, {0.2, false}};
    CHECK(aupr(perfect) == 1.0);
    std::vector<ScoredLabel> last;
    for (int i = 0; i < 7; ++i) last.push_back({1.0 - i * 0.1, false});
    last.push_back({0.0, true});
    CHECK(aupr(last) == doctest::Approx(1.0 / 8.0));
    const std::vector<ScoredLabel> flat{{0.3, true}, {0.3, false}, {0.3, true}, {0.3, false}, {0.3, false}};
    CHECK(aupr(flat) == doctest::Approx(2.0 / 5.0));
    const std::vector<ScoredLabel> none{{0.3, false}};
    CHECK_THROWS_AS(aupr(none), Error);
}

TEST_CASE("auc and aupr match brute force with ties") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<std::size_t> size(2, 60);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto s = random_scores(rng, size(rng));
        CHECK(std::abs(auc(s) - oracle::auc_pairwise(s)) <= 1e-12);
        CHECK(std::abs(aupr(s) - oracle::aupr_enumerated(s)) <= 1e-12);
    }
}

TEST_CASE("stratified folds") {
    std::vector<Triple> edges;
    for (Index u = 0; u < 10; ++u)
        for (Index v = u + 1; v < 10 && edges.size() < 40; ++v) edges.push_back({u, v, 0});
    for (Index v = 1; v <= 19; ++v) edges.push_back({0, v, 1});
    const auto g = build_hypergraph(20, 2, edges, Matrix::Zero(20, 1));
    const auto split = stratified_folds(g, 20, 1);
    std::map<Index, std::vector<int>> counts;
    for (Index f = 0; f < 20; ++f) {
        std::vector<int> c(2, 0);
        for (const auto& e : split.test[f]) ++c[e.t];
        CHECK(c[0] == 2);
        counts[f] = c;
    }
    int lo = 100, hi = -1;
    for (const auto& [f, c] : counts) {
        lo = std::min(lo, c[1]);
        hi = std::max(hi, c[1]);
    }
    CHECK(hi - lo <= 1);

    std::set<Triple> all;
    std::size_t total = 0;
    for (const auto& fold : split.test) {
        all.insert(fold.begin(), fold.end());
        total += fold.size();
    }
    CHECK(total == g.edges().size());
    CHECK(all.size() == g.edges().size());
    CHECK(split.train_edges(g, 3).size() == g.edges().size() - split.test[3].size());

    CHECK(stratified_folds(g, 20, 1).test == split.test);
    CHECK_THROWS_AS(stratified_folds(g, 1, 1), Error);
    CHECK_THROWS_AS(stratified_folds(g, 100, 1), Error);
}

TEST_CASE("evaluation negatives") {
    const auto g = fixture_graph();
    const auto split = stratified_folds(g, 4, 2);
    std::unordered_set<std::uint64_t> used;
    std::set<Triple> seen;
    for (Index f = 0; f < 4; ++f) {
        const auto neg = eval_negatives(g, split.test[f], 10 + static_cast<std::uint64_t>(f), &used);
        std::map<Index, int> want, got;
        for (const auto& e : split.test[f]) ++want[e.t];
        for (const auto& e : neg) {
            ++got[e.t];
            CHECK_FALSE(g.contains(e));
            CHECK(seen.insert(e).second);
        }
        CHECK(want == got);
    }
    CHECK(eval_negatives(g, split.test[0], 5) == eval_negatives(g, split.test[0], 5));

    std::vector<Triple> full;
    for (Index u = 0; u < 3; ++u)
        for (Index v = u + 1; v < 3; ++v) full.push_back({u, v, 0});
    const auto dense = build_hypergraph(3, 1, full, Matrix::Zero(3, 1));
    CHECK_THROWS_WITH_AS(eval_negatives(dense, full, 1), doctest::Contains("side effect 0"), Error);
}

TEST_CASE("infrequent curve") {
    std::vector<ScoredTriple> results{
        {{0, 1, 0}, 0.9, true}, {{0, 2, 0}, 0.1, false}, {{0, 1, 1}, 0.2, true}, {{0, 2, 1}, 0.8, false},
        {{1, 2, 1}, 0.7, true}, {{0, 3, 1}, 0.3, false}, {{0, 1, 2}, 0.6, true}, {{1, 3, 2}, 0.5, false},
    };
    const std::vector<Index> freq{1, 2, 1};
    const auto curve = infrequent_curve(results, freq);
    REQUIRE(curve.size() == 3);
    // ties in frequency: side effect 0 before 2
    CHECK(curve[0].side_effect == 0);
    CHECK(curve[1].side_effect == 2);
    CHECK(curve[2].side_effect == 1);
    CHECK(curve[0].auc == 1.0);
    std::vector<ScoredLabel> pooled;
    for (const auto& r : results) pooled.push_back({r.score, r.positive});
    CHECK(curve.back().auc == auc(pooled));
    CHECK(curve.back().aupr == aupr(pooled));

    std::vector<ScoredTriple> single{{{0, 1, 0}, 0.9, true}, {{0, 2, 0}, 0.1, false}};
    const auto one = infrequent_curve(single, std::vector<Index>{1});
    REQUIRE(one.size() == 1);
    CHECK(one[0].auc == 1.0);
}

TEST_CASE("cross validation with an oracle scorer") {
    const auto g = fixture_graph();
    FoldScorer perfect = [&](const DdiHypergraph&, std::span<const Triple> q, Index) {
        std::vector<double> s;
        for (const auto& e : q) s.push_back(g.contains(e) ? 1.0 : 0.0);
        return s;
    };
    CrossValidationOptions opt;
    opt.num_folds = 3;
    opt.seed = 4;
    const auto report = cross_validate(g, perfect, opt);
    REQUIRE(report.folds.size() == 3);
    for (const auto& f : report.folds) {
        CHECK(f.auc == 1.0);
        CHECK(f.aupr == 1.0);
        CHECK(f.num_positives == f.num_negatives);
    }
    CHECK(report.mean_auc == 1.0);
    CHECK(report.std_auc == 0.0);

    opt.jobs = 3;
    CHECK(report_to_json(cross_validate(g, perfect, opt)) == report_to_json(report));

    const auto parsed = nlohmann::json::parse(report_to_json(report, "prov"));
    for (const char* key : {"folds", "mean_auc", "std_auc", "mean_aupr", "std_aupr", "per_side_effect", "infrequent_curve"})
        CHECK(parsed.contains(key));
    CHECK(curve_to_csv(report.infrequent_curve).rfind("num_side_effects", 0) == 0);
}

TEST_CASE("cross validation with training is finite and deterministic") {
    const auto g = fixture_graph();
    TrainConfig cfg;
    cfg.embedding_size = 4;
    cfg.num_layers = 1;
    cfg.epochs = 5;
    CrossValidationOptions opt;
    opt.num_folds = 2;
    opt.seed = 9;
    const auto a = cross_validate(g, cfg, opt);
    REQUIRE(a.folds.size() == 2);
    for (const auto& f : a.folds) {
        CHECK(std::isfinite(f.auc));
        CHECK(std::isfinite(f.aupr));
    }
    opt.jobs = 2;
    CHECK(report_to_json(cross_validate(g, cfg, opt)) == report_to_json(a));
}
