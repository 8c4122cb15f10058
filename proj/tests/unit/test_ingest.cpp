#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "centsmooth/ingest.hpp"

using namespace centsmooth;

TEST_CASE("triple file parsing") {
    std::istringstream three("aspirin\twarfarin\tbleeding\nwarfarin\taspirin\tbleeding\n# note\nibuprofen\taspirin\tnausea\n");
    const auto tf = parse_triples(three);
    CHECK(tf.triples.size() == 2);
    CHECK(tf.drug_names == std::vector<std::string>{"aspirin", "ibuprofen", "warfarin"});
    CHECK(tf.side_effect_names == std::vector<std::string>{"bleeding", "nausea"});
    CHECK(tf.triples[0] == Triple{0, 1, 1});
    CHECK(tf.triples[1] == Triple{0, 2, 0});

    std::istringstream empty("");
    CHECK(parse_triples(empty).triples.empty());
    std::istringstream empty_strict("# nothing\n");
    CHECK_THROWS_AS(parse_triples(empty_strict, true), Error);

    std::istringstream tabbed("a\tb\tc\td\n");
    CHECK_THROWS_WITH_AS(parse_triples(tabbed), doctest::Contains(":1:"), Error);
    std::istringstream short_line("a\tb\tc\nx\ty\n");
    CHECK_THROWS_WITH_AS(parse_triples(short_line), doctest::Contains(":2:"), Error);
    std::istringstream self("a\ta\tc\n");
    CHECK_THROWS_AS(parse_triples(self), Error);
}

TEST_CASE("triple files round-trip") {
    std::istringstream in("b\ta\tx\nc\ta\ty\n");
    const auto tf = parse_triples(in);
    std::ostringstream out;
    write_triples(out, tf.triples, tf.drug_names, tf.side_effect_names);
    std::istringstream back(out.str());
    const auto again = parse_triples(back);
    CHECK(again.triples == tf.triples);
    CHECK(again.drug_names == tf.drug_names);
}

TEST_CASE("feature file parsing") {
    const std::vector<std::string> names{"a", "b"};
    std::istringstream in("drug\tf0\tf1\tf2\tf3\nb\t0\t1\t0\t1\na\t1\t0\t0\t0\n");
    const auto x = parse_features(in, names);
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 4);
    CHECK(x(0, 0) == 1.0);
    CHECK(x(1, 1) == 1.0);
    CHECK(x(1, 3) == 1.0);

    std::istringstream missing("drug\tf0\na\t1\n");
    CHECK_THROWS_WITH_AS(parse_features(missing, names), doctest::Contains("'b'"), Error);
    std::istringstream ragged("drug\tf0\tf1\na\t1\t0\nb\t1\n");
    CHECK_THROWS_AS(parse_features(ragged, names), Error);
    std::istringstream unknown("drug\tf0\na\t1\nb\t0\nc\t1\n");
    CHECK_THROWS_WITH_AS(parse_features(unknown, names), doctest::Contains("'c'"), Error);
    std::istringstream garbage("drug\tf0\na\tx\nb\t0\n");
    CHECK_THROWS_AS(parse_features(garbage, names), Error);
}

TEST_CASE("datasets load from disk and keep feature-only drugs") {
    const auto dir = std::filesystem::temp_directory_path() / "centsmooth_ingest_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "t.tsv") << "b\ta\tx\n";
        std::ofstream(dir / "f.tsv") << "drug\tf0\nc\t3\na\t1\nb\t2\n";
    }
    const auto d = load_dataset(dir / "t.tsv", dir / "f.tsv");
    CHECK(d.drug_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(d.graph.num_drugs() == 3);
    CHECK(d.graph.edges().size() == 1);
    CHECK(d.graph.drug_features()(2, 0) == 3.0);
    CHECK(d.drug_index("c") == 2);
    CHECK_THROWS_WITH_AS(d.drug_index("zz"), doctest::Contains("zz"), Error);
    CHECK_THROWS_AS(load_triples(dir / "absent.tsv"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic names sort in index order") {
    const auto names = synthetic_drug_names(1200);
    CHECK(std::is_sorted(names.begin(), names.end()));
    CHECK(names[7] == "drug0007");
    CHECK(synthetic_side_effect_names(45)[44] == "se044");
}

TEST_CASE("ledger round trip") {
    GroupAssignment ledger;
    ledger.groups = {{0, 3}, {2}};
    const auto names = synthetic_drug_names(2);
    std::ostringstream out;
    write_ledger(out, ledger, names);
    CHECK(out.str() == "drug0000\t0,3\ndrug0001\t2\n");
    std::istringstream in(out.str());
    CHECK(parse_ledger(in, names) == ledger.groups);
}

TEST_CASE("report parsing") {
    std::istringstream in("b,a,a\tx,y\n# skip\nc\t\n");
    const auto t = parse_reports(in);
    REQUIRE(t.reports.size() == 2);
    CHECK(t.reports[0].drugs == std::vector<std::string>{"a", "b"});
    CHECK(t.reports[1].side_effects.empty());
    std::istringstream bad("\tx\n");
    CHECK_THROWS_AS(parse_reports(bad), Error);
    std::istringstream no_tab("a,b\n");
    CHECK_THROWS_AS(parse_reports(no_tab), Error);
}

TEST_CASE("fisher exact test") {
    CHECK(fisher_exact_one_sided({5, 0, 0, 5}) == doctest::Approx(1.0 / 252.0).epsilon(1e-12));
    CHECK(fisher_exact_one_sided({0, 3, 2, 4}) == 1.0);
    CHECK(fisher_exact_one_sided({3, 0, 0, 0}) == 1.0);
    CHECK(fisher_exact_one_sided({2, 3, 2, 3}) >= 0.5);
    CHECK_THROWS_AS(fisher_exact_one_sided({-1, 0, 0, 0}), Error);
}

TEST_CASE("fisher matches enumeration for every table up to 24 reports") {
    double worst = 0.0;
    for (int n = 0; n <= 24; ++n)
        for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b)
                for (int c = 0; a + b + c <= n; ++c) {
                    const int d = n - a - b - c;
                    worst = std::max(worst, std::abs(fisher_exact_one_sided({a, b, c, d}) -
                                                     oracle::fisher_enumerated(a, b, c, d)));
                }
    CHECK(worst <= 1e-12);
}

TEST_CASE("fisher p-value is monotone in a with fixed margins") {
    for (int exposed = 1; exposed <= 12; ++exposed)
        for (int with = 1; with <= 12; ++with) {
            const int total = 24;
            double prev = 2.0;
            for (int a = std::max(0, exposed + with - total); a <= std::min(exposed, with); ++a) {
                const double p = fisher_exact_one_sided({a, exposed - a, with - a, total - exposed - with + a});
                CHECK(p <= prev + 1e-15);
                prev = p;
            }
        }
}

namespace {

ReportTable planted_fixture() {
    ReportTable t;
    for (int i = 0; i < 5; ++i) t.reports.push_back({{"alpha", "beta"}, {"rash"}});
    for (int i = 0; i < 5; ++i) t.reports.push_back({{"gamma"}, {}});
    return t;
}

}  // namespace

TEST_CASE("extraction keeps exactly the planted triple") {
    const auto kept = extract_significant(planted_fixture());
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].drug_a == "alpha");
    CHECK(kept[0].drug_b == "beta");
    CHECK(kept[0].side_effect == "rash");
    CHECK(kept[0].p_value == doctest::Approx(1.0 / 252.0).epsilon(1e-12));
}

TEST_CASE("extraction edge cases") {
    ReportTable same;
    for (int i = 0; i < 4; ++i) same.reports.push_back({{"a", "b"}, {"x"}});
    CHECK(extract_significant(same).empty());

    ReportTable mixed;
    mixed.reports = {{{"a", "b"}, {"x"}}, {{"a", "c"}, {"y", "x"}}, {{"b"}, {"z"}}};
    const auto all = extract_significant(mixed, 1.0);
    CHECK(all.size() == 3);  // (a,b,x), (a,c,x), (a,c,y)

    CHECK(extract_significant(ReportTable{}).empty());
    CHECK_THROWS_AS(extract_significant(mixed, 0.0), Error);
}

TEST_CASE("extraction ignores report order and job count") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> drug(0, 7), se(0, 3), count(1, 3);
    ReportTable t;
    for (int r = 0; r < 60; ++r) {
        Report rep;
        for (int i = count(rng); i >= 0; --i) rep.drugs.push_back("d" + std::to_string(drug(rng)));
        for (int i = count(rng); i > 0; --i) rep.side_effects.push_back("s" + std::to_string(se(rng)));
        std::sort(rep.drugs.begin(), rep.drugs.end());
        rep.drugs.erase(std::unique(rep.drugs.begin(), rep.drugs.end()), rep.drugs.end());
        std::sort(rep.side_effects.begin(), rep.side_effects.end());
        rep.side_effects.erase(std::unique(rep.side_effects.begin(), rep.side_effects.end()), rep.side_effects.end());
        t.reports.push_back(rep);
    }
    const auto base = extract_significant(t, 0.3);
    auto shuffled = t;
    std::shuffle(shuffled.reports.begin(), shuffled.reports.end(), rng);
    const auto other = extract_significant(shuffled, 0.3, 4);
    REQUIRE(base.size() == other.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].drug_a == other[i].drug_a);
        CHECK(base[i].side_effect == other[i].side_effect);
        CHECK(base[i].p_value == other[i].p_value);
    }
}
