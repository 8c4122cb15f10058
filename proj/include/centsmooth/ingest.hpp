#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/synth.hpp"

namespace centsmooth {

/// Parsed triple file. Name lists are sorted; indices refer to positions in them.
struct TripleFile {
    std::vector<std::string> drug_names;
    std::vector<std::string> side_effect_names;
    std::vector<Triple> triples;  // canonical, sorted, unique
};

/// `drugA<TAB>drugB<TAB>sideEffect` per line; `#` starts a comment line. With `strict`
/// an input without triples is an error.
TripleFile parse_triples(std::istream& in, bool strict = false, const std::string& source = "<input>");
TripleFile load_triples(const std::filesystem::path& path, bool strict = false);

void write_triples(std::ostream& out, std::span<const Triple> triples, std::span<const std::string> drug_names,
                   std::span<const std::string> side_effect_names);

/// Header `drug<TAB>f0<TAB>f1...`, then one row per drug. Rows are realigned to the
/// order of `drug_names`; a missing drug or a name outside the list is an error.
Matrix parse_features(std::istream& in, std::span<const std::string> drug_names,
                      const std::string& source = "<input>");
Matrix load_features(const std::filesystem::path& path, std::span<const std::string> drug_names);

/// Drug names listed in a feature file, in file order.
std::vector<std::string> feature_file_drugs(const std::filesystem::path& path);

void write_features(std::ostream& out, const Matrix& features, std::span<const std::string> drug_names);

/// Triples plus features. Drugs listed only in the feature file are kept as isolated nodes.
struct Dataset {
    std::vector<std::string> drug_names;
    std::vector<std::string> side_effect_names;
    DdiHypergraph graph;

    Index drug_index(const std::string& name) const;
    Index side_effect_index(const std::string& name) const;
};

Dataset load_dataset(const std::filesystem::path& triples, const std::filesystem::path& features);

/// Synthetic dataset names: drugNNNN and seNNN, zero-padded so sorting keeps index order.
std::vector<std::string> synthetic_drug_names(Index count);
std::vector<std::string> synthetic_side_effect_names(Index count);

/// `drug<TAB>g1,g2,...` per drug.
void write_ledger(std::ostream& out, const GroupAssignment& ledger, std::span<const std::string> drug_names);
std::vector<std::vector<Index>> parse_ledger(std::istream& in, std::span<const std::string> drug_names);

struct Report {
    std::vector<std::string> drugs;         // sorted, unique, nonempty
    std::vector<std::string> side_effects;  // sorted, unique
};

struct ReportTable {
    std::vector<Report> reports;
};

/// `drug1,drug2,...<TAB>se1,se2,...` per line; `#` starts a comment line.
ReportTable parse_reports(std::istream& in, const std::string& source = "<input>");
ReportTable load_reports(const std::filesystem::path& path);

struct ContingencyTable {
    std::int64_t a = 0;  // exposed, with side effect
    std::int64_t b = 0;  // exposed, without
    std::int64_t c = 0;  // nonexposed, with
    std::int64_t d = 0;  // nonexposed, without
};

/// P(X >= a) for X ~ Hypergeometric(a+b+c+d, a+c, a+b). Tables with a zero margin give 1.
double fisher_exact_one_sided(const ContingencyTable& t);

struct SignificantTriple {
    std::string drug_a;  // drug_a < drug_b
    std::string drug_b;
    std::string side_effect;
    ContingencyTable table;
    double p_value = 1.0;
};

/// For every co-occurring drug pair and side effect, keeps the triple when the one-sided
/// Fisher test gives p < alpha. alpha = 1 keeps every triple seen with its pair.
/// Output is sorted by (drug_a, drug_b, side_effect).
std::vector<SignificantTriple> extract_significant(const ReportTable& reports, double alpha = 0.05,
                                                   Index jobs = 1);

void write_significant(std::ostream& out, std::span<const SignificantTriple> triples);

}  // namespace centsmooth
