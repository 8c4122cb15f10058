#include "centsmooth/model.hpp"

#include <cmath>
#include <random>
#include <string>

namespace centsmooth {

Method parse_method(std::string_view name) {
    if (name == "centsmoothie") return Method::CentSmoothie;
    if (name == "centsimple") return Method::CentSimple;
    if (name == "baseline") return Method::Baseline;
    throw Error("unknown method '" + std::string(name) + "' (expected centsmoothie, centsimple or baseline)");
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::CentSmoothie: return "centsmoothie";
        case Method::CentSimple: return "centsimple";
        case Method::Baseline: return "baseline";
    }
    return "unknown";
}

ModelParams ModelParams::initialize(Index feature_width, Index embedding_size, Index num_side_effects,
                                    Index num_layers, std::uint64_t seed) {
    if (embedding_size < 1 || num_layers < 1 || feature_width < 0 || num_side_effects < 0)
        throw Error("invalid model dimensions");
    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_size));
    std::uniform_real_distribution<double> uni(-bound, bound);
    auto fill = [&](double* data, Index n) {
        for (Index i = 0; i < n; ++i) data[i] = uni(rng);
    };

    ModelParams p;
    p.drug_w1.resize(embedding_size, feature_width);
    p.drug_b1.resize(embedding_size);
    p.drug_w2.resize(embedding_size, embedding_size);
    p.drug_b2.resize(embedding_size);
    p.se_embedding.resize(num_side_effects, embedding_size);
    p.layer_mixers.assign(static_cast<std::size_t>(num_layers), Matrix(embedding_size, embedding_size));
    p.weights = SideEffectWeights::Ones(embedding_size, num_side_effects);
    p.visit([&](const std::string& name, double* data, Index n) {
        if (name != "weights") fill(data, n);
    });
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    ModelParams p = other;
    p.visit([](const std::string&, double* data, Index n) { std::fill(data, data + n, 0.0); });
    return p;
}

void ModelParams::validate() const {
    const Index k = embedding_size();
    if (layer_mixers.empty()) throw Error("model needs at least one layer");
    if (k < 1) throw Error("embedding size must be positive");
    if (drug_w1.rows() != k || drug_b1.size() != k || drug_w2.cols() != k || drug_b2.size() != k ||
        se_embedding.cols() != k || weights.rows() != k || weights.cols() != se_embedding.rows())
        throw Error("inconsistent parameter shapes");
    for (const auto& theta : layer_mixers)
        if (theta.rows() != k || theta.cols() != k) throw Error("layer mixer must be K x K");
}

LaplacianBuilder::LaplacianBuilder(const DdiHypergraph& g, Method method) : method_(method), structure_(g) {
    if (method_ == Method::CentSimple) {
        const std::vector<double> ones(static_cast<std::size_t>(g.num_side_effects()), 1.0);
        fixed_ = std::make_shared<PropagationTrace>(trace_propagation(structure_.assemble(ones)));
    } else if (method_ == Method::Baseline) {
        fixed_ = std::make_shared<PropagationTrace>(trace_propagation(baseline_smoothing_laplacian(g)));
    }
}

SparseSymMatrix LaplacianBuilder::laplacian(const SideEffectWeights& w, Index k) const {
    if (fixed_) return fixed_->laplacian;
    if (k < 0 || k >= w.rows()) throw Error("dimension " + std::to_string(k) + " out of range");
    const std::vector<double> row(w.row(k).begin(), w.row(k).end());
    return structure_.assemble(row);
}

std::vector<std::shared_ptr<const PropagationTrace>> LaplacianBuilder::operators(const SideEffectWeights& w) const {
    std::vector<std::shared_ptr<const PropagationTrace>> ops(static_cast<std::size_t>(w.rows()));
    for (Index k = 0; k < w.rows(); ++k)
        ops[k] = fixed_ ? fixed_ : std::make_shared<PropagationTrace>(trace_propagation(laplacian(w, k)));
    return ops;
}

namespace {

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

void check_finite(const Matrix& m, const std::string& where) {
    if (!m.allFinite()) throw Error("non-finite values in " + where);
}

}  // namespace

NodeEmbedding input_transform(const ModelParams& params, const DdiHypergraph& g) {
    params.validate();
    if (g.feature_width() != params.feature_width())
        throw Error("drug features have width " + std::to_string(g.feature_width()) + ", model expects " +
                    std::to_string(params.feature_width()));
    if (g.num_side_effects() != params.num_side_effects())
        throw Error("graph has " + std::to_string(g.num_side_effects()) + " side effects, model expects " +
                    std::to_string(params.num_side_effects()));
    const Index k = params.embedding_size();
    NodeEmbedding x(k, g.num_nodes());
    // features are stored nodes-as-rows; the transform works on their transpose
    const Matrix hidden = relu((params.drug_w1 * g.drug_features().transpose()).colwise() + params.drug_b1);
    x.leftCols(g.num_drugs()) = relu((params.drug_w2 * hidden).colwise() + params.drug_b2);
    x.rightCols(g.num_side_effects()) = params.se_embedding.transpose();
    return x;
}

ForwardState forward_state(const ModelParams& params, const DdiHypergraph& g, const LaplacianBuilder& builder) {
    params.validate();
    if (g.feature_width() != params.feature_width()) throw Error("drug feature width does not match model");
    if (g.num_side_effects() != params.num_side_effects()) throw Error("side-effect count does not match model");

    ForwardState st;
    const Index k_dim = params.embedding_size();
    const Index n = g.num_nodes();
    st.operators = builder.operators(params.weights);

    st.drug_hidden_pre = (params.drug_w1 * g.drug_features().transpose()).colwise() + params.drug_b1;
    st.drug_out_pre = (params.drug_w2 * relu(st.drug_hidden_pre)).colwise() + params.drug_b2;
    Matrix x(k_dim, n);
    x.leftCols(g.num_drugs()) = relu(st.drug_out_pre);
    x.rightCols(g.num_side_effects()) = params.se_embedding.transpose();
    check_finite(x, "input transform");

    for (Index l = 0; l < params.num_layers(); ++l) {
        Matrix prop(k_dim, n);
        for (Index k = 0; k < k_dim; ++k) {
            st.operators[k]->propagation.multiply(std::span<const double>(x.row(k).data(), n),
                                                  std::span<double>(prop.row(k).data(), n));
        }
        Matrix pre = params.layer_mixers[l].transpose() * prop;
        st.layer_inputs.push_back(std::move(x));
        st.propagated.push_back(std::move(prop));
        x = relu(pre);
        st.preactivation.push_back(std::move(pre));
        check_finite(x, "layer " + std::to_string(l + 1));
    }
    st.output = std::move(x);
    return st;
}

NodeEmbedding forward(const ModelParams& params, const DdiHypergraph& g, const LaplacianBuilder& builder) {
    return forward_state(params, g, builder).output;
}

double ssa(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w) {
    const Triple c = canonicalize(e.u, e.v, e.t);
    const Index num_drugs = x.cols() - w.cols();
    if (c.v >= num_drugs || c.t >= w.cols() || x.rows() != w.rows()) throw Error("triple out of embedding range");
    const Index tcol = num_drugs + c.t;
    double acc = 0.0;
    for (Index k = 0; k < x.rows(); ++k) {
        const double d = 0.5 * (x(k, c.u) + x(k, c.v)) - x(k, tcol);
        acc += w(k, c.t) * d * d;
    }
    return acc;
}

double score(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w) {
    return 1.0 / (1.0 + ssa(e, x, w));
}

bool classify(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error("threshold must lie in (0, 1)");
    return score(e, x, w) > threshold;
}

}  // namespace centsmooth
