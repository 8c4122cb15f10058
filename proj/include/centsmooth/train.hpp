#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/model.hpp"

namespace centsmooth {

enum class Optimizer { GradientDescent, Adam };

Optimizer parse_optimizer(std::string_view name);
std::string_view optimizer_name(Optimizer o);

struct TrainConfig {
    Index embedding_size = 20;
    Index num_layers = 2;
    double lambda = 0.01;
    double learning_rate = 0.01;
    Index epochs = 2000;
    std::uint64_t seed = 0;
    Index neg_resample_every = 10;
    Method method = Method::CentSmoothie;
    Optimizer optimizer = Optimizer::Adam;

    /// Throws on invalid values. Returns a notice when K or N lies outside the
    /// {10, 20, 30} x {1, 2, 3} grid, empty otherwise.
    std::string validate() const;
};

/// Uniform sample without replacement of `count` canonical non-edges, sorted.
std::vector<Triple> sample_negatives(const DdiHypergraph& g, std::uint64_t count, std::uint64_t seed);

/// sum_{e in E} (1 - p(e))^2 + lambda * sum_{e in negatives} p(e)^2
double loss(const ModelParams& params, const DdiHypergraph& g, std::span<const Triple> negatives, double lambda,
            const LaplacianBuilder& builder);

/// Same objective evaluated on a precomputed embedding.
double loss_from_embedding(const NodeEmbedding& x, const SideEffectWeights& w, std::span<const Triple> positives,
                           std::span<const Triple> negatives, double lambda);

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

/// Exact gradients of `loss` with respect to every parameter group. The W gradient
/// includes the path through each L_k, A_k and P_k when the builder learns weights;
/// otherwise it is zero.
LossAndGradients gradients(const ModelParams& params, const DdiHypergraph& g, std::span<const Triple> negatives,
                           double lambda, const LaplacianBuilder& builder);

/// params - lr * grads, then W <- max(W, 0).
ModelParams projected_step(const ModelParams& params, const Gradients& grads, double lr);

/// Adam moment estimates, one buffer per parameter group.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    ModelParams first;
    ModelParams second;
};

/// Adam update followed by the same projection W <- max(W, 0).
ModelParams projected_adam_step(const ModelParams& params, const Gradients& grads, double lr, AdamState& state);

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_trace;  // loss before each epoch's step
};

/// Full-batch projected training: every step is followed by W <- max(W, 0). Plain gradient
/// descent steps on the objective divided by |E| so one learning rate serves graphs of any size.
TrainResult train(const DdiHypergraph& g, const TrainConfig& config);

/// Checkpoint: text header terminated by "end\n", then per parameter group a
/// little-endian u64 length followed by that many little-endian f64 values.
struct CheckpointHeader {
    int format_version = 1;
    Index embedding_size = 0;
    Index num_layers = 0;
    Index num_drugs = 0;
    Index num_side_effects = 0;
    Index feature_width = 0;
    std::string method = "centsmoothie";
    std::uint64_t seed = 0;
    std::string provenance;
};

void write_checkpoint(std::ostream& out, const CheckpointHeader& header, const ModelParams& params);
ModelParams read_checkpoint(std::istream& in, CheckpointHeader* header = nullptr);

void write_loss_trace(std::ostream& out, std::span<const double> trace);

}  // namespace centsmooth
