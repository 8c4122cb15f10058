#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/laplacian.hpp"

namespace centsmooth {

/// Which Laplacian drives propagation.
///  - CentSmoothie: weighted central-smoothing Laplacian, W learnt.
///  - CentSimple: unweighted central-smoothing Laplacian, W fixed at 1.
///  - Baseline: clique-expansion smoothing Laplacian, W fixed at 1.
enum class Method { CentSmoothie, CentSimple, Baseline };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

/// Embeddings are K x |V|, one column per node in flat index order.
using NodeEmbedding = Matrix;

struct ModelParams {
    Matrix drug_w1;  // K x K0
    Vector drug_b1;  // K
    Matrix drug_w2;  // K x K
    Vector drug_b2;  // K
    Matrix se_embedding;               // |V_S| x K
    std::vector<Matrix> layer_mixers;  // N matrices, K x K
    SideEffectWeights weights;         // K x |V_S|

    Index embedding_size() const { return drug_w2.rows(); }
    Index feature_width() const { return drug_w1.cols(); }
    Index num_layers() const { return static_cast<Index>(layer_mixers.size()); }
    Index num_side_effects() const { return se_embedding.rows(); }

    /// Uniform(-1/sqrt(K), 1/sqrt(K)) for affine maps and the embedding table; W = 1.
    static ModelParams initialize(Index feature_width, Index embedding_size, Index num_side_effects,
                                  Index num_layers, std::uint64_t seed);
    static ModelParams zeros_like(const ModelParams& other);

    /// Calls f(name, data, size) for every parameter group in a fixed order.
    template <class F>
    void visit(F&& f) {
        f("drug_w1", drug_w1.data(), drug_w1.size());
        f("drug_b1", drug_b1.data(), drug_b1.size());
        f("drug_w2", drug_w2.data(), drug_w2.size());
        f("drug_b2", drug_b2.data(), drug_b2.size());
        f("se_embedding", se_embedding.data(), se_embedding.size());
        for (std::size_t l = 0; l < layer_mixers.size(); ++l)
            f("layer_mixer_" + std::to_string(l), layer_mixers[l].data(), layer_mixers[l].size());
        f("weights", weights.data(), weights.size());
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<ModelParams*>(this)->visit([&](const std::string& name, double* data, Index n) {
            f(name, static_cast<const double*>(data), n);
        });
    }

    /// Throws unless shapes are mutually consistent and N >= 1.
    void validate() const;
};

/// Same layout as ModelParams; holds dLoss/dparam.
struct Gradients : ModelParams {};

/// Produces the per-dimension propagation operators P_k for a graph.
class LaplacianBuilder {
public:
    LaplacianBuilder(const DdiHypergraph& g, Method method);

    Method method() const { return method_; }
    bool learns_weights() const { return method_ == Method::CentSmoothie; }
    const CentralLaplacianStructure& structure() const { return structure_; }

    /// One trace per dimension. Fixed-Laplacian methods share a single trace.
    std::vector<std::shared_ptr<const PropagationTrace>> operators(const SideEffectWeights& w) const;

    SparseSymMatrix laplacian(const SideEffectWeights& w, Index k) const;

private:
    Method method_;
    CentralLaplacianStructure structure_;
    std::shared_ptr<const PropagationTrace> fixed_;
};

/// Intermediates of one forward pass.
struct ForwardState {
    std::vector<std::shared_ptr<const PropagationTrace>> operators;
    Matrix drug_hidden_pre;             // K x |V_D|
    Matrix drug_out_pre;                // K x |V_D|
    std::vector<Matrix> layer_inputs;   // X^(l), l = 0..N-1
    std::vector<Matrix> propagated;     // X~^(l+1)
    std::vector<Matrix> preactivation;  // Theta^T X~^(l+1)
    NodeEmbedding output;               // X*
};

/// X^(0): ReLU two-layer map for drug columns, embedding-table rows for side-effect columns.
NodeEmbedding input_transform(const ModelParams& params, const DdiHypergraph& g);

ForwardState forward_state(const ModelParams& params, const DdiHypergraph& g, const LaplacianBuilder& builder);
NodeEmbedding forward(const ModelParams& params, const DdiHypergraph& g, const LaplacianBuilder& builder);

/// sum_k W[k][t] ((X[k][u] + X[k][v]) / 2 - X[k][t])^2
double ssa(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w);
/// 1 / (1 + ssa)
double score(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w);
/// score > threshold
bool classify(const Triple& e, const NodeEmbedding& x, const SideEffectWeights& w, double threshold);

}  // namespace centsmooth
