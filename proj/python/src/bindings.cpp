#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/ingest.hpp"
#include "centsmooth/laplacian.hpp"
#include "centsmooth/metrics.hpp"
#include "centsmooth/model.hpp"
#include "centsmooth/synth.hpp"
#include "centsmooth/train.hpp"

namespace py = pybind11;
using namespace centsmooth;

namespace {

using TripleTuple = std::tuple<Index, Index, Index>;

std::vector<Triple> to_triples(const std::vector<TripleTuple>& raw) {
    std::vector<Triple> out;
    out.reserve(raw.size());
    for (const auto& [u, v, t] : raw) out.push_back({u, v, t});
    return out;
}

std::vector<TripleTuple> from_triples(std::span<const Triple> triples) {
    std::vector<TripleTuple> out;
    out.reserve(triples.size());
    for (const auto& e : triples) out.emplace_back(e.u, e.v, e.t);
    return out;
}

std::vector<ScoredLabel> scored(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
    std::vector<ScoredLabel> out;
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({scores[i], labels[i]});
    return out;
}

py::dict synth_to_dict(const SynthDataset& ds) {
    py::dict d;
    d["graph"] = ds.graph;
    d["groups"] = ds.ledger.groups;
    d["templates"] = ds.ledger.templates;
    d["side_effect_groups"] = ds.side_effect_groups;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Central-smoothing hypergraph network for drug-drug interaction prediction";
    py::register_exception<Error>(m, "CentsmoothError", PyExc_ValueError);

    py::enum_<Method>(m, "Method")
        .value("CentSmoothie", Method::CentSmoothie)
        .value("CentSimple", Method::CentSimple)
        .value("Baseline", Method::Baseline);
    py::enum_<Optimizer>(m, "Optimizer")
        .value("Adam", Optimizer::Adam)
        .value("GradientDescent", Optimizer::GradientDescent);
    m.def("parse_method", [](const std::string& s) { return parse_method(s); });

    py::class_<DdiHypergraph>(m, "Hypergraph")
        .def_property_readonly("num_drugs", &DdiHypergraph::num_drugs)
        .def_property_readonly("num_side_effects", &DdiHypergraph::num_side_effects)
        .def_property_readonly("num_nodes", &DdiHypergraph::num_nodes)
        .def_property_readonly("feature_width", &DdiHypergraph::feature_width)
        .def_property_readonly("features", &DdiHypergraph::drug_features)
        .def_property_readonly("edges", [](const DdiHypergraph& g) { return from_triples(g.edges()); })
        .def("contains", [](const DdiHypergraph& g, Index u, Index v, Index t) {
            return g.contains(canonicalize(u, v, t));
        })
        .def("__len__", [](const DdiHypergraph& g) { return g.edges().size(); });

    m.def(
        "build_hypergraph",
        [](Index num_drugs, Index num_side_effects, const std::vector<TripleTuple>& triples, Matrix features) {
            const auto list = to_triples(triples);
            return build_hypergraph(num_drugs, num_side_effects, list, std::move(features));
        },
        py::arg("num_drugs"), py::arg("num_side_effects"), py::arg("triples"), py::arg("features"));

    m.def(
        "generate_synthetic",
        [](Index num_drugs, Index num_groups, Index features_per_group, Index max_groups, double sigma,
           std::uint64_t seed) {
            SynthConfig c;
            c.num_drugs = num_drugs;
            c.num_groups = num_groups;
            c.features_per_group = features_per_group;
            c.max_groups = max_groups;
            c.sigma = sigma;
            c.seed = seed;
            return synth_to_dict(generate(c));
        },
        py::arg("num_drugs") = 500, py::arg("num_groups") = 10, py::arg("features_per_group") = 3,
        py::arg("max_groups") = 1, py::arg("sigma") = 0.01, py::arg("seed") = 0);

    m.def(
        "load_dataset",
        [](const std::string& triples, const std::string& features) {
            Dataset d = load_dataset(triples, features);
            return py::make_tuple(d.graph, d.drug_names, d.side_effect_names);
        },
        py::arg("triples"), py::arg("features"), "Returns (graph, drug_names, side_effect_names).");

    m.def(
        "central_laplacian",
        [](const DdiHypergraph& g, const Matrix& w, Index k) { return central_laplacian_closed_form(g, w, k).dense(); },
        py::arg("graph"), py::arg("weights"), py::arg("k") = 0);
    m.def(
        "central_laplacian_oracle",
        [](const DdiHypergraph& g, const Matrix& w, Index k) {
            return central_laplacian_oracle(build_incidence(g), edge_weights_for_dimension(g, w, k)).dense();
        },
        py::arg("graph"), py::arg("weights"), py::arg("k") = 0);
    m.def("incidence", [](const DdiHypergraph& g) { return build_incidence(g).dense(); }, py::arg("graph"));
    m.def("baseline_laplacian", [](const DdiHypergraph& g) { return baseline_smoothing_laplacian(g).dense(); },
          py::arg("graph"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("embedding_size", &TrainConfig::embedding_size)
        .def_readwrite("num_layers", &TrainConfig::num_layers)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("neg_resample_every", &TrainConfig::neg_resample_every)
        .def_readwrite("method", &TrainConfig::method)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def("validate", &TrainConfig::validate);

    py::class_<ModelParams>(m, "ModelParams")
        .def_static("initialize", &ModelParams::initialize, py::arg("feature_width"), py::arg("embedding_size"),
                    py::arg("num_side_effects"), py::arg("num_layers"), py::arg("seed"))
        .def_readwrite("weights", &ModelParams::weights)
        .def_readwrite("se_embedding", &ModelParams::se_embedding)
        .def_readwrite("layer_mixers", &ModelParams::layer_mixers)
        .def_property_readonly("embedding_size", &ModelParams::embedding_size)
        .def_property_readonly("num_layers", &ModelParams::num_layers);

    m.def(
        "train",
        [](const DdiHypergraph& g, const TrainConfig& c) {
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(g, c);
            }
            return py::make_tuple(r.params, r.loss_trace);
        },
        py::arg("graph"), py::arg("config"), "Returns (params, loss_trace).");

    m.def(
        "embed",
        [](const ModelParams& p, const DdiHypergraph& g, Method method) {
            return forward(p, g, LaplacianBuilder(g, method));
        },
        py::arg("params"), py::arg("graph"), py::arg("method") = Method::CentSmoothie,
        "X* as a K x |V| array, drug columns first.");
    m.def(
        "score",
        [](const ModelParams& p, const DdiHypergraph& g, const std::vector<TripleTuple>& queries, Method method) {
            const NodeEmbedding x = forward(p, g, LaplacianBuilder(g, method));
            std::vector<double> out;
            for (const auto& e : to_triples(queries)) out.push_back(score(canonicalize(e.u, e.v, e.t), x, p.weights));
            return out;
        },
        py::arg("params"), py::arg("graph"), py::arg("queries"), py::arg("method") = Method::CentSmoothie);
    m.def(
        "loss_and_gradients",
        [](const ModelParams& p, const DdiHypergraph& g, const std::vector<TripleTuple>& negatives, double lambda,
           Method method) {
            const auto omega = to_triples(negatives);
            const auto r = gradients(p, g, omega, lambda, LaplacianBuilder(g, method));
            py::dict grads;
            r.grads.visit([&](const std::string& name, const double* data, Index n) {
                grads[py::str(name)] = std::vector<double>(data, data + n);
            });
            return py::make_tuple(r.loss, grads);
        },
        py::arg("params"), py::arg("graph"), py::arg("negatives"), py::arg("lambda_"),
        py::arg("method") = Method::CentSmoothie);
    m.def(
        "sample_negatives",
        [](const DdiHypergraph& g, std::uint64_t count, std::uint64_t seed) {
            return from_triples(sample_negatives(g, count, seed));
        },
        py::arg("graph"), py::arg("count"), py::arg("seed"));

    m.def("auc", [](const std::vector<double>& s, const std::vector<bool>& y) { return auc(scored(s, y)); },
          py::arg("scores"), py::arg("labels"));
    m.def("aupr", [](const std::vector<double>& s, const std::vector<bool>& y) { return aupr(scored(s, y)); },
          py::arg("scores"), py::arg("labels"));

    m.def(
        "cross_validate",
        [](const DdiHypergraph& g, const TrainConfig& c, Index folds, std::uint64_t seed, Index jobs) {
            CrossValidationOptions cv;
            cv.num_folds = folds;
            cv.seed = seed;
            cv.jobs = jobs;
            std::string json;
            {
                py::gil_scoped_release release;
                json = report_to_json(cross_validate(g, c, cv));
            }
            return json;
        },
        py::arg("graph"), py::arg("config"), py::arg("folds") = 20, py::arg("seed") = 0, py::arg("jobs") = 1,
        "Report as a JSON string.");

    m.def(
        "fisher_exact_one_sided",
        [](std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
            return fisher_exact_one_sided({a, b, c, d});
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
    m.def(
        "extract_significant",
        [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& reports, double alpha,
           Index jobs) {
            std::ostringstream text;
            for (const auto& [drugs, ses] : reports) {
                for (std::size_t i = 0; i < drugs.size(); ++i) text << (i ? "," : "") << drugs[i];
                text << '\t';
                for (std::size_t i = 0; i < ses.size(); ++i) text << (i ? "," : "") << ses[i];
                text << '\n';
            }
            std::istringstream in(text.str());
            const auto kept = extract_significant(parse_reports(in), alpha, jobs);
            std::vector<std::tuple<std::string, std::string, std::string, double>> out;
            for (const auto& k : kept) out.emplace_back(k.drug_a, k.drug_b, k.side_effect, k.p_value);
            return out;
        },
        py::arg("reports"), py::arg("alpha") = 0.05, py::arg("jobs") = 1,
        "reports: list of (drugs, side_effects). Returns (drug_a, drug_b, side_effect, p) tuples.");
}
