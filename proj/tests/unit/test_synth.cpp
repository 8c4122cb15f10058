#include <doctest.h>

#include <set>

#include "centsmooth/synth.hpp"

using namespace centsmooth;

TEST_CASE("synthetic dimensions") {
    SynthConfig cfg;
    CHECK(cfg.num_side_effects() == 45);
    CHECK(cfg.feature_width() == 30);
    cfg.max_groups = 11;
    CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("side-effect numbering is lexicographic over group pairs") {
    CHECK(side_effect_for_groups(0, 1, 10) == 0);
    CHECK(side_effect_for_groups(0, 9, 10) == 8);
    CHECK(side_effect_for_groups(1, 2, 10) == 9);
    CHECK(side_effect_for_groups(8, 9, 10) == 44);
}

TEST_CASE("singleton groups give one triple or none") {
    GroupAssignment ledger;
    ledger.groups = {{1}, {3}, {1}};
    const auto triples = triples_from_ledger(ledger, 10);
    // drugs 0 and 2 share group 1: no side effect between them
    REQUIRE(triples.size() == 2);
    CHECK(triples[0] == Triple{0, 1, side_effect_for_groups(1, 3, 10)});
    CHECK(triples[1] == Triple{1, 2, side_effect_for_groups(1, 3, 10)});
}

TEST_CASE("generated datasets are sound, complete and close to their templates") {
    for (Index m = 1; m <= 6; ++m) {
        SynthConfig cfg;
        cfg.num_drugs = 120;
        cfg.max_groups = m;
        cfg.seed = 100 + static_cast<std::uint64_t>(m);
        const auto ds = generate(cfg);
        const auto& g = ds.graph;
        CHECK(g.num_side_effects() == 45);
        CHECK(g.feature_width() == 30);

        for (const auto& groups : ds.ledger.groups) {
            CHECK(groups.size() >= 1);
            CHECK(static_cast<Index>(groups.size()) <= m);
            CHECK(std::set<Index>(groups.begin(), groups.end()).size() == groups.size());
        }
        for (Index i = 0; i < g.num_drugs(); ++i)
            for (Index j = 0; j < 30; ++j) {
                const bool member = std::count(ds.ledger.groups[i].begin(), ds.ledger.groups[i].end(), j / 3) > 0;
                CHECK(ds.ledger.templates(i, j) == (member ? 1.0 : 0.0));
            }

        for (const auto& e : g.edges()) {
            const auto [a, b] = ds.side_effect_groups[static_cast<std::size_t>(e.t)];
            const auto& gu = ds.ledger.groups[e.u];
            const auto& gv = ds.ledger.groups[e.v];
            const auto has = [](const std::vector<Index>& s, Index x) { return std::count(s.begin(), s.end(), x) > 0; };
            CHECK(((has(gu, a) && has(gv, b)) || (has(gu, b) && has(gv, a))));
        }

        const auto rederived = triples_from_ledger(ds.ledger, 10);
        CHECK(std::equal(rederived.begin(), rederived.end(), g.edges().begin(), g.edges().end()));

        const double mad = (g.drug_features() - ds.ledger.templates).cwiseAbs().mean();
        CHECK(mad <= 3.0 * cfg.sigma);
    }
}

TEST_CASE("sweep") {
    SynthConfig base;
    base.num_drugs = 40;
    base.seed = 7;
    const std::vector<Index> ms{1, 2, 3, 4, 5, 6};
    const auto a = sweep(base, ms);
    const auto b = sweep(base, ms);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].config.max_groups == ms[i]);
        CHECK(a[i].graph.drug_features() == b[i].graph.drug_features());
        CHECK(std::equal(a[i].graph.edges().begin(), a[i].graph.edges().end(), b[i].graph.edges().begin(),
                         b[i].graph.edges().end()));
    }
    CHECK(sweep(base, std::vector<Index>{}).empty());
}
