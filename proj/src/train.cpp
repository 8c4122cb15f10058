#include "centsmooth/train.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "centsmooth/seeding.hpp"

namespace centsmooth {

Optimizer parse_optimizer(std::string_view name) {
    if (name == "gd") return Optimizer::GradientDescent;
    if (name == "adam") return Optimizer::Adam;
    throw Error("unknown optimizer '" + std::string(name) + "' (expected gd or adam)");
}

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::Adam ? "adam" : "gd"; }

std::string TrainConfig::validate() const {
    if (embedding_size < 1) throw Error("embedding size must be positive");
    if (num_layers < 1) throw Error("layer count must be positive");
    if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
    if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
    if (epochs < 0) throw Error("epochs must be non-negative");
    if (neg_resample_every < 1) throw Error("negative resampling interval must be positive");
    const bool on_grid = (embedding_size == 10 || embedding_size == 20 || embedding_size == 30) &&
                         (num_layers >= 1 && num_layers <= 3);
    if (on_grid) return {};
    return "notice: K=" + std::to_string(embedding_size) + ", N=" + std::to_string(num_layers) +
           " lies outside the K in {10,20,30}, N in {1,2,3} grid";
}

std::vector<Triple> sample_negatives(const DdiHypergraph& g, std::uint64_t count, std::uint64_t seed) {
    const std::uint64_t available = g.complement_size();
    if (count > available)
        throw Error("requested " + std::to_string(count) + " negatives but only " + std::to_string(available) +
                    " non-edges exist");
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> keys;
    keys.reserve(count);
    if (count * 2 <= available) {
        std::uniform_int_distribution<std::uint64_t> pick(0, g.universe_size() - 1);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(count * 2);
        while (keys.size() < count) {
            const std::uint64_t key = pick(rng);
            if (g.contains_key(key) || !seen.insert(key).second) continue;
            keys.push_back(key);
        }
    } else {
        std::vector<std::uint64_t> pool;
        pool.reserve(available);
        for (std::uint64_t key = 0; key < g.universe_size(); ++key)
            if (!g.contains_key(key)) pool.push_back(key);
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::uint64_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        keys.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    }
    std::sort(keys.begin(), keys.end());
    std::vector<Triple> out;
    out.reserve(keys.size());
    for (std::uint64_t key : keys) out.push_back(g.triple_from_key(key));
    return out;
}

namespace {

// Node-major copies of X* and W so the per-triple loops read contiguous memory.
struct ScoringView {
    Matrix x;  // |V| x K
    Matrix w;  // |V_S| x K
    Index num_drugs;

    ScoringView(const NodeEmbedding& emb, const SideEffectWeights& weights)
        : x(emb.transpose()), w(weights.transpose()), num_drugs(emb.cols() - weights.cols()) {}

    double ssa(const Triple& e) const {
        const double* xu = x.row(e.u).data();
        const double* xv = x.row(e.v).data();
        const double* xt = x.row(num_drugs + e.t).data();
        const double* wt = w.row(e.t).data();
        double acc = 0.0;
        for (Index k = 0; k < x.cols(); ++k) {
            const double d = 0.5 * (xu[k] + xv[k]) - xt[k];
            acc += wt[k] * d * d;
        }
        return acc;
    }
};

// Accumulates d loss / d X* and d loss / d W (direct scoring path) for one triple.
void accumulate_triple(const ScoringView& view, const Triple& e, double dssa, Matrix& dx, Matrix& dw) {
    const Index kdim = view.x.cols();
    const double* xu = view.x.row(e.u).data();
    const double* xv = view.x.row(e.v).data();
    const double* xt = view.x.row(view.num_drugs + e.t).data();
    const double* wt = view.w.row(e.t).data();
    double* gu = dx.row(e.u).data();
    double* gv = dx.row(e.v).data();
    double* gt = dx.row(view.num_drugs + e.t).data();
    double* gw = dw.row(e.t).data();
    for (Index k = 0; k < kdim; ++k) {
        const double d = 0.5 * (xu[k] + xv[k]) - xt[k];
        const double a = dssa * wt[k] * d;
        gu[k] += a;
        gv[k] += a;
        gt[k] -= 2.0 * a;
        gw[k] += dssa * d * d;
    }
}

}  // namespace

double loss_from_embedding(const NodeEmbedding& x, const SideEffectWeights& w, std::span<const Triple> positives,
                           std::span<const Triple> negatives, double lambda) {
    const ScoringView view(x, w);
    double pos = 0.0, neg = 0.0;
    for (const Triple& e : positives) {
        const double p = 1.0 / (1.0 + view.ssa(e));
        pos += (1.0 - p) * (1.0 - p);
    }
    for (const Triple& e : negatives) {
        const double p = 1.0 / (1.0 + view.ssa(e));
        neg += p * p;
    }
    return pos + lambda * neg;
}

double loss(const ModelParams& params, const DdiHypergraph& g, std::span<const Triple> negatives, double lambda,
            const LaplacianBuilder& builder) {
    const NodeEmbedding x = forward(params, g, builder);
    return loss_from_embedding(x, params.weights, g.edges(), negatives, lambda);
}

LossAndGradients gradients(const ModelParams& params, const DdiHypergraph& g, std::span<const Triple> negatives,
                           double lambda, const LaplacianBuilder& builder) {
    const ForwardState st = forward_state(params, g, builder);
    const Index kdim = params.embedding_size();
    const Index n = g.num_nodes();
    const Index nd = g.num_drugs();

    LossAndGradients out;
    out.grads = Gradients{ModelParams::zeros_like(params)};

    // scoring layer
    const ScoringView view(st.output, params.weights);
    Matrix dx_nodes = Matrix::Zero(n, kdim);
    Matrix dw_direct = Matrix::Zero(g.num_side_effects(), kdim);
    double pos = 0.0, neg = 0.0;
    for (const Triple& e : g.edges()) {
        const double p = 1.0 / (1.0 + view.ssa(e));
        pos += (1.0 - p) * (1.0 - p);
        // dL/dp = -2(1-p), dp/dssa = -p^2
        accumulate_triple(view, e, 2.0 * (1.0 - p) * p * p, dx_nodes, dw_direct);
    }
    for (const Triple& e : negatives) {
        const double p = 1.0 / (1.0 + view.ssa(e));
        neg += p * p;
        accumulate_triple(view, e, -2.0 * lambda * p * p * p, dx_nodes, dw_direct);
    }
    out.loss = pos + lambda * neg;
    if (!std::isfinite(out.loss)) throw Error("non-finite loss");

    const bool learn_w = builder.learns_weights();
    std::vector<std::vector<double>> dprop;
    if (learn_w) {
        dprop.resize(static_cast<std::size_t>(kdim));
        for (Index k = 0; k < kdim; ++k)
            dprop[k].assign(static_cast<std::size_t>(st.operators[k]->propagation.nnz()), 0.0);
    }

    // propagation layers, last to first
    Matrix grad_x = dx_nodes.transpose();  // K x |V|
    for (Index l = params.num_layers() - 1; l >= 0; --l) {
        const Matrix grad_pre = grad_x.cwiseProduct((st.preactivation[l].array() > 0.0).cast<double>().matrix());
        out.grads.layer_mixers[l] = st.propagated[l] * grad_pre.transpose();
        const Matrix grad_prop = params.layer_mixers[l] * grad_pre;
        const Matrix& x_in = st.layer_inputs[l];
        Matrix grad_in(kdim, n);
        for (Index k = 0; k < kdim; ++k) {
            const auto& op = st.operators[k]->propagation;
            op.multiply(std::span<const double>(grad_prop.row(k).data(), n), std::span<double>(grad_in.row(k).data(), n));
            if (!learn_w) continue;
            const auto& pat = op.pattern();
            const double* gp = grad_prop.row(k).data();
            const double* xi = x_in.row(k).data();
            auto& dp = dprop[k];
            for (Index i = 0; i < pat.n; ++i) {
                const double gi = gp[i];
                for (Index pos = pat.row_ptr[i]; pos < pat.row_ptr[i + 1]; ++pos) dp[pos] += gi * xi[pat.col[pos]];
            }
        }
        grad_x = std::move(grad_in);
    }

    // input transform
    const Matrix grad_out = grad_x.leftCols(nd).cwiseProduct((st.drug_out_pre.array() > 0.0).cast<double>().matrix());
    const Matrix hidden = st.drug_hidden_pre.cwiseMax(0.0);
    out.grads.drug_b2 = grad_out.rowwise().sum();
    out.grads.drug_w2 = grad_out * hidden.transpose();
    const Matrix grad_hidden = (params.drug_w2.transpose() * grad_out)
                                   .cwiseProduct((st.drug_hidden_pre.array() > 0.0).cast<double>().matrix());
    out.grads.drug_b1 = grad_hidden.rowwise().sum();
    out.grads.drug_w1 = grad_hidden * g.drug_features();
    out.grads.se_embedding = grad_x.rightCols(g.num_side_effects()).transpose();

    // side-effect weights: scoring path plus the Laplacian path
    if (learn_w) {
        out.grads.weights = dw_direct.transpose();
        for (Index k = 0; k < kdim; ++k) {
            const std::vector<double> dlap = propagation_backward(*st.operators[k], dprop[k]);
            builder.structure().weight_gradient(dlap, std::span<double>(out.grads.weights.row(k).data(),
                                                                        out.grads.weights.cols()));
        }
    }

    out.grads.visit([](const std::string& name, const double* data, Index size) {
        for (Index i = 0; i < size; ++i)
            if (!std::isfinite(data[i])) throw Error("non-finite gradient in " + name);
    });
    return out;
}

ModelParams projected_step(const ModelParams& params, const Gradients& grads, double lr) {
    ModelParams next = params;
    std::vector<std::pair<const double*, Index>> g;
    grads.visit([&](const std::string&, const double* data, Index n) { g.emplace_back(data, n); });
    std::size_t group = 0;
    next.visit([&](const std::string& name, double* data, Index n) {
        if (g[group].second != n) throw Error("gradient shape mismatch in " + name);
        const double* gd = g[group].first;
        for (Index i = 0; i < n; ++i) data[i] -= lr * gd[i];
        ++group;
    });
    next.weights = next.weights.cwiseMax(0.0);
    return next;
}

ModelParams projected_adam_step(const ModelParams& params, const Gradients& grads, double lr, AdamState& state) {
    if (state.step == 0) {
        state.first = ModelParams::zeros_like(params);
        state.second = ModelParams::zeros_like(params);
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    std::vector<const double*> g, m1, m2;
    grads.visit([&](const std::string&, const double* d, Index) { g.push_back(d); });
    state.first.visit([&](const std::string&, double* d, Index) { m1.push_back(d); });
    state.second.visit([&](const std::string&, double* d, Index) { m2.push_back(d); });

    ModelParams next = params;
    std::size_t group = 0;
    next.visit([&](const std::string&, double* data, Index n) {
        const double* gd = g[group];
        double* a = const_cast<double*>(m1[group]);
        double* b = const_cast<double*>(m2[group]);
        for (Index i = 0; i < n; ++i) {
            a[i] = state.beta1 * a[i] + (1.0 - state.beta1) * gd[i];
            b[i] = state.beta2 * b[i] + (1.0 - state.beta2) * gd[i] * gd[i];
            data[i] -= lr * (a[i] / c1) / (std::sqrt(b[i] / c2) + state.epsilon);
        }
        ++group;
    });
    next.weights = next.weights.cwiseMax(0.0);
    return next;
}

TrainResult train(const DdiHypergraph& g, const TrainConfig& config) {
    config.validate();
    TrainResult result;
    result.params = ModelParams::initialize(g.feature_width(), config.embedding_size, g.num_side_effects(),
                                            config.num_layers, derive_seed(config.seed, {0}));
    if (config.epochs == 0) return result;

    const LaplacianBuilder builder(g, config.method);
    const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(1, g.edges().size()));
    const std::uint64_t neg_count = std::min<std::uint64_t>(g.edges().size(), g.complement_size());
    std::vector<Triple> negatives;
    AdamState adam;
    result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        if (epoch % config.neg_resample_every == 0)
            negatives = sample_negatives(g, neg_count, derive_seed(config.seed, {1, static_cast<std::uint64_t>(epoch)}));
        LossAndGradients lg;
        try {
            lg = gradients(result.params, g, negatives, config.lambda, builder);
        } catch (const Error& e) {
            throw Error("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
        }
        result.loss_trace.push_back(lg.loss);
        if (config.optimizer == Optimizer::Adam)
            result.params = projected_adam_step(result.params, lg.grads, config.learning_rate, adam);
        else
            result.params = projected_step(result.params, lg.grads, config.learning_rate * scale);
    }
    return result;
}

namespace {

void write_u64_le(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw Error("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const CheckpointHeader& h, const ModelParams& params) {
    out << "centsmooth-checkpoint " << h.format_version << '\n'
        << "K " << params.embedding_size() << '\n'
        << "N " << params.num_layers() << '\n'
        << "num_drugs " << h.num_drugs << '\n'
        << "num_side_effects " << params.num_side_effects() << '\n'
        << "feature_width " << params.feature_width() << '\n'
        << "method " << h.method << '\n'
        << "seed " << h.seed << '\n';
    if (!h.provenance.empty()) out << "provenance " << h.provenance << '\n';
    out << "end\n";
    params.visit([&](const std::string&, const double* data, Index n) {
        write_u64_le(out, static_cast<std::uint64_t>(n));
        for (Index i = 0; i < n; ++i) write_u64_le(out, std::bit_cast<std::uint64_t>(data[i]));
    });
    if (!out) throw Error("failed to write checkpoint");
}

ModelParams read_checkpoint(std::istream& in, CheckpointHeader* header_out) {
    CheckpointHeader h;
    std::string line;
    if (!std::getline(in, line) || line.rfind("centsmooth-checkpoint ", 0) != 0)
        throw Error("not a checkpoint file");
    h.format_version = std::stoi(line.substr(22));
    if (h.format_version != 1) throw Error("unsupported checkpoint version " + std::to_string(h.format_version));
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "K") ls >> h.embedding_size;
        else if (key == "N") ls >> h.num_layers;
        else if (key == "num_drugs") ls >> h.num_drugs;
        else if (key == "num_side_effects") ls >> h.num_side_effects;
        else if (key == "feature_width") ls >> h.feature_width;
        else if (key == "method") ls >> h.method;
        else if (key == "seed") ls >> h.seed;
        else if (key == "provenance") std::getline(ls >> std::ws, h.provenance);
    }
    if (line != "end") throw Error("checkpoint header is not terminated");
    ModelParams p = ModelParams::initialize(h.feature_width, h.embedding_size, h.num_side_effects, h.num_layers, 0);
    p.visit([&](const std::string& name, double* data, Index n) {
        const std::uint64_t len = read_u64_le(in);
        if (len != static_cast<std::uint64_t>(n)) throw Error("checkpoint group " + name + " has wrong length");
        for (Index i = 0; i < n; ++i) data[i] = std::bit_cast<double>(read_u64_le(in));
    });
    if (header_out) *header_out = h;
    return p;
}

void write_loss_trace(std::ostream& out, std::span<const double> trace) {
    out << "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, trace[i]);
        out << buf;
    }
}

}  // namespace centsmooth
