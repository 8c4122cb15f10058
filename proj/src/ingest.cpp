#include "centsmooth/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>

namespace centsmooth {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool read_content_line(std::istream& in, std::string& line, Index& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        return true;
    }
    return false;
}

std::string where(const std::string& source, Index line_no) {
    return source + ":" + std::to_string(line_no) + ": ";
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return in;
}

double parse_real(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw Error(context + "invalid number '" + text + "'");
    return value;
}

Index lookup(const std::vector<std::string>& sorted_names, const std::string& name) {
    const auto it = std::lower_bound(sorted_names.begin(), sorted_names.end(), name);
    if (it == sorted_names.end() || *it != name) return -1;
    return static_cast<Index>(it - sorted_names.begin());
}

std::vector<std::string> padded_names(const char* prefix, Index count, int width) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        std::string digits = std::to_string(i);
        if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
        names.push_back(prefix + digits);
    }
    return names;
}

std::vector<std::string> sorted_unique_fields(const std::string& field) {
    std::vector<std::string> out;
    if (field.empty()) return out;
    for (auto& name : split(field, ',')) out.push_back(std::move(name));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> log_factorials(std::int64_t n) {
    std::vector<double> table(static_cast<std::size_t>(n + 1));
    for (std::int64_t i = 0; i <= n; ++i) table[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);
    return table;
}

double fisher_with_table(const ContingencyTable& t, const std::vector<double>& lf) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw Error("contingency counts must be non-negative");
    const std::int64_t exposed = t.a + t.b;
    const std::int64_t nonexposed = t.c + t.d;
    const std::int64_t with = t.a + t.c;
    const std::int64_t without = t.b + t.d;
    if (exposed == 0 || nonexposed == 0 || with == 0 || without == 0) return 1.0;
    const std::int64_t total = exposed + nonexposed;
    if (t.a <= std::max<std::int64_t>(0, exposed + with - total)) return 1.0;
    auto lc = [&](std::int64_t n, std::int64_t k) {
        return lf[static_cast<std::size_t>(n)] - lf[static_cast<std::size_t>(k)] - lf[static_cast<std::size_t>(n - k)];
    };
    const double denom = lc(total, exposed);
    const std::int64_t hi = std::min(exposed, with);
    std::vector<double> terms;
    for (std::int64_t x = t.a; x <= hi; ++x) terms.push_back(lc(with, x) + lc(without, exposed - x) - denom);
    const double peak = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double v : terms) acc += std::exp(v - peak);
    return std::clamp(std::exp(peak) * acc, 0.0, 1.0);
}

}  // namespace

TripleFile parse_triples(std::istream& in, bool strict, const std::string& source) {
    struct NamedTriple {
        std::string a, b, s;
    };
    std::vector<NamedTriple> rows;
    std::string line;
    Index line_no = 0;
    while (read_content_line(in, line, line_no)) {
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw Error(where(source, line_no) + "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
        for (const auto& f : fields)
            if (f.empty()) throw Error(where(source, line_no) + "empty name");
        if (fields[0] == fields[1]) throw Error(where(source, line_no) + "self-pair '" + fields[0] + "'");
        rows.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
    }
    if (strict && rows.empty()) throw Error(source + ": no triples");

    TripleFile out;
    std::set<std::string> drugs, ses;
    for (const auto& r : rows) {
        drugs.insert(r.a);
        drugs.insert(r.b);
        ses.insert(r.s);
    }
    out.drug_names.assign(drugs.begin(), drugs.end());
    out.side_effect_names.assign(ses.begin(), ses.end());
    out.triples.reserve(rows.size());
    for (const auto& r : rows)
        out.triples.push_back(
            canonicalize(lookup(out.drug_names, r.a), lookup(out.drug_names, r.b), lookup(out.side_effect_names, r.s)));
    std::sort(out.triples.begin(), out.triples.end());
    out.triples.erase(std::unique(out.triples.begin(), out.triples.end()), out.triples.end());
    return out;
}

TripleFile load_triples(const std::filesystem::path& path, bool strict) {
    auto in = open_input(path);
    return parse_triples(in, strict, path.string());
}

void write_triples(std::ostream& out, std::span<const Triple> triples, std::span<const std::string> drug_names,
                   std::span<const std::string> side_effect_names) {
    for (const auto& e : triples) {
        if (e.u < 0 || e.v < 0 || e.t < 0 || e.u >= static_cast<Index>(drug_names.size()) ||
            e.v >= static_cast<Index>(drug_names.size()) || e.t >= static_cast<Index>(side_effect_names.size()))
            throw Error("triple index outside the name lists");
        out << drug_names[e.u] << '\t' << drug_names[e.v] << '\t' << side_effect_names[e.t] << '\n';
    }
}

Matrix parse_features(std::istream& in, std::span<const std::string> drug_names, const std::string& source) {
    std::string line;
    Index line_no = 0;
    if (!read_content_line(in, line, line_no)) throw Error(source + ": missing feature header");
    const auto header = split(line, '\t');
    const Index width = static_cast<Index>(header.size()) - 1;

    std::unordered_map<std::string, Index> index;
    for (std::size_t i = 0; i < drug_names.size(); ++i) index.emplace(drug_names[i], static_cast<Index>(i));
    Matrix features(static_cast<Index>(drug_names.size()), width);
    std::vector<bool> seen(drug_names.size(), false);
    while (read_content_line(in, line, line_no)) {
        const auto fields = split(line, '\t');
        if (static_cast<Index>(fields.size()) != width + 1)
            throw Error(where(source, line_no) + "expected " + std::to_string(width) + " feature values, found " +
                        std::to_string(fields.size() - 1));
        const auto it = index.find(fields[0]);
        if (it == index.end()) throw Error(where(source, line_no) + "unknown drug '" + fields[0] + "'");
        if (seen[static_cast<std::size_t>(it->second)])
            throw Error(where(source, line_no) + "duplicate drug '" + fields[0] + "'");
        seen[static_cast<std::size_t>(it->second)] = true;
        for (Index j = 0; j < width; ++j)
            features(it->second, j) = parse_real(fields[static_cast<std::size_t>(j + 1)], where(source, line_no));
    }
    for (std::size_t i = 0; i < drug_names.size(); ++i)
        if (!seen[i]) throw Error(source + ": no feature row for drug '" + drug_names[i] + "'");
    return features;
}

Matrix load_features(const std::filesystem::path& path, std::span<const std::string> drug_names) {
    auto in = open_input(path);
    return parse_features(in, drug_names, path.string());
}

std::vector<std::string> feature_file_drugs(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    Index line_no = 0;
    std::vector<std::string> names;
    if (!read_content_line(in, line, line_no)) throw Error(path.string() + ": missing feature header");
    while (read_content_line(in, line, line_no)) names.push_back(line.substr(0, line.find('\t')));
    return names;
}

void write_features(std::ostream& out, const Matrix& features, std::span<const std::string> drug_names) {
    if (features.rows() != static_cast<Index>(drug_names.size())) throw Error("feature rows do not match drug names");
    out << "drug";
    for (Index j = 0; j < features.cols(); ++j) out << "\tf" << j;
    out << '\n';
    char buf[64];
    for (Index i = 0; i < features.rows(); ++i) {
        out << drug_names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < features.cols(); ++j) {
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, features(i, j));
            out << '\t' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << '\n';
    }
}

Index Dataset::drug_index(const std::string& name) const {
    const Index i = lookup(drug_names, name);
    if (i < 0) throw Error("unknown drug '" + name + "'");
    return i;
}

Index Dataset::side_effect_index(const std::string& name) const {
    const Index i = lookup(side_effect_names, name);
    if (i < 0) throw Error("unknown side effect '" + name + "'");
    return i;
}

Dataset load_dataset(const std::filesystem::path& triples, const std::filesystem::path& features) {
    TripleFile tf = load_triples(triples);
    std::vector<std::string> names = tf.drug_names;
    for (auto& n : feature_file_drugs(features)) names.push_back(std::move(n));
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    std::vector<Triple> remapped;
    remapped.reserve(tf.triples.size());
    for (const auto& e : tf.triples)
        remapped.push_back(
            canonicalize(lookup(names, tf.drug_names[e.u]), lookup(names, tf.drug_names[e.v]), e.t));
    Matrix x = load_features(features, names);

    Dataset d;
    d.drug_names = std::move(names);
    d.side_effect_names = std::move(tf.side_effect_names);
    d.graph = build_hypergraph(static_cast<Index>(d.drug_names.size()), static_cast<Index>(d.side_effect_names.size()),
                               remapped, std::move(x));
    return d;
}

std::vector<std::string> synthetic_drug_names(Index count) { return padded_names("drug", count, 4); }

std::vector<std::string> synthetic_side_effect_names(Index count) { return padded_names("se", count, 3); }

void write_ledger(std::ostream& out, const GroupAssignment& ledger, std::span<const std::string> drug_names) {
    if (ledger.groups.size() != drug_names.size()) throw Error("ledger size does not match drug names");
    for (std::size_t i = 0; i < drug_names.size(); ++i) {
        out << drug_names[i] << '\t';
        for (std::size_t j = 0; j < ledger.groups[i].size(); ++j) out << (j ? "," : "") << ledger.groups[i][j];
        out << '\n';
    }
}

std::vector<std::vector<Index>> parse_ledger(std::istream& in, std::span<const std::string> drug_names) {
    std::vector<std::vector<Index>> groups(drug_names.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < drug_names.size(); ++i) index.emplace(drug_names[i], i);
    std::string line;
    Index line_no = 0;
    while (read_content_line(in, line, line_no)) {
        const auto fields = split(line, '\t');
        if (fields.size() != 2) throw Error("ledger line " + std::to_string(line_no) + ": expected 2 fields");
        const auto it = index.find(fields[0]);
        if (it == index.end()) throw Error("ledger line " + std::to_string(line_no) + ": unknown drug '" + fields[0] + "'");
        for (const auto& g : split(fields[1], ','))
            groups[it->second].push_back(static_cast<Index>(parse_real(g, "ledger: ")));
    }
    return groups;
}

ReportTable parse_reports(std::istream& in, const std::string& source) {
    ReportTable table;
    std::string line;
    Index line_no = 0;
    while (read_content_line(in, line, line_no)) {
        const auto fields = split(line, '\t');
        if (fields.size() != 2)
            throw Error(where(source, line_no) + "expected 2 tab-separated fields, found " + std::to_string(fields.size()));
        Report r;
        r.drugs = sorted_unique_fields(fields[0]);
        r.side_effects = sorted_unique_fields(fields[1]);
        if (r.drugs.empty()) throw Error(where(source, line_no) + "report without drugs");
        for (const auto& n : r.drugs)
            if (n.empty()) throw Error(where(source, line_no) + "empty drug name");
        for (const auto& n : r.side_effects)
            if (n.empty()) throw Error(where(source, line_no) + "empty side-effect name");
        table.reports.push_back(std::move(r));
    }
    return table;
}

ReportTable load_reports(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_reports(in, path.string());
}

double fisher_exact_one_sided(const ContingencyTable& t) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw Error("contingency counts must be non-negative");
    return fisher_with_table(t, log_factorials(t.a + t.b + t.c + t.d));
}

std::vector<SignificantTriple> extract_significant(const ReportTable& table, double alpha, Index jobs) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
    std::vector<std::string> drugs, ses;
    for (const auto& r : table.reports) {
        drugs.insert(drugs.end(), r.drugs.begin(), r.drugs.end());
        ses.insert(ses.end(), r.side_effects.begin(), r.side_effects.end());
    }
    std::sort(drugs.begin(), drugs.end());
    drugs.erase(std::unique(drugs.begin(), drugs.end()), drugs.end());
    std::sort(ses.begin(), ses.end());
    ses.erase(std::unique(ses.begin(), ses.end()), ses.end());

    const auto num_reports = static_cast<std::int64_t>(table.reports.size());
    std::vector<std::vector<Index>> report_ses(table.reports.size());
    std::vector<std::int64_t> se_total(ses.size(), 0);
    std::map<std::pair<Index, Index>, std::vector<std::size_t>> pair_reports;
    for (std::size_t r = 0; r < table.reports.size(); ++r) {
        const auto& rep = table.reports[r];
        for (const auto& s : rep.side_effects) {
            const Index t = lookup(ses, s);
            report_ses[r].push_back(t);
            ++se_total[static_cast<std::size_t>(t)];
        }
        std::vector<Index> ids;
        for (const auto& d : rep.drugs) ids.push_back(lookup(drugs, d));
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) pair_reports[{ids[i], ids[j]}].push_back(r);
    }

    const std::vector<double> lf = log_factorials(num_reports);
    std::vector<const decltype(pair_reports)::value_type*> pairs;
    pairs.reserve(pair_reports.size());
    for (const auto& entry : pair_reports) pairs.push_back(&entry);

    const Index workers = std::max<Index>(1, std::min<Index>(jobs, static_cast<Index>(pairs.size())));
    std::vector<std::vector<SignificantTriple>> partial(static_cast<std::size_t>(workers));
    auto run = [&](Index w) {
        std::map<Index, std::int64_t> counts;
        for (std::size_t p = static_cast<std::size_t>(w); p < pairs.size(); p += static_cast<std::size_t>(workers)) {
            const auto& [pair, reports] = *pairs[p];
            counts.clear();
            for (std::size_t r : reports)
                for (Index t : report_ses[r]) ++counts[t];
            const auto exposed = static_cast<std::int64_t>(reports.size());
            for (const auto& [t, a] : counts) {
                ContingencyTable ct;
                ct.a = a;
                ct.b = exposed - a;
                ct.c = se_total[static_cast<std::size_t>(t)] - a;
                ct.d = num_reports - exposed - ct.c;
                const double p_value = fisher_with_table(ct, lf);
                if (p_value < alpha || alpha >= 1.0)
                    partial[static_cast<std::size_t>(w)].push_back(
                        {drugs[pair.first], drugs[pair.second], ses[t], ct, p_value});
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        for (Index w = 0; w < workers; ++w) threads.emplace_back(run, w);
        for (auto& th : threads) th.join();
    }

    std::vector<SignificantTriple> out;
    for (auto& part : partial) out.insert(out.end(), part.begin(), part.end());
    std::sort(out.begin(), out.end(), [](const SignificantTriple& x, const SignificantTriple& y) {
        return std::tie(x.drug_a, x.drug_b, x.side_effect) < std::tie(y.drug_a, y.drug_b, y.side_effect);
    });
    return out;
}

void write_significant(std::ostream& out, std::span<const SignificantTriple> triples) {
    for (const auto& t : triples) out << t.drug_a << '\t' << t.drug_b << '\t' << t.side_effect << '\n';
}

}  // namespace centsmooth
