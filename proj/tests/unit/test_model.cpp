#include <doctest.h>

#include <cstring>
#include <random>

#include "../oracles.hpp"
#include "centsmooth/model.hpp"

using namespace centsmooth;

namespace {

ModelParams tiny_params(Index k0, Index k, Index s, Index n) {
    auto p = ModelParams::initialize(k0, k, s, n, 1);
    return p;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (auto m : {Method::CentSmoothie, Method::CentSimple, Method::Baseline}) CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("hpnn"), Error);
}

TEST_CASE("initialization follows the documented ranges") {
    const auto p = ModelParams::initialize(30, 20, 45, 2, 9);
    const double bound = 1.0 / std::sqrt(20.0);
    CHECK(p.drug_w1.cwiseAbs().maxCoeff() <= bound);
    CHECK(p.se_embedding.cwiseAbs().maxCoeff() <= bound);
    CHECK(p.layer_mixers.size() == 2);
    CHECK((p.weights.array() == 1.0).all());
    CHECK(p.weights.rows() == 20);
    CHECK(p.weights.cols() == 45);
    const auto q = ModelParams::initialize(30, 20, 45, 2, 9);
    CHECK(p.drug_w2 == q.drug_w2);
    CHECK_THROWS_AS(ModelParams::initialize(3, 0, 2, 1, 0), Error);
}

TEST_CASE("input transform") {
    const auto g = build_hypergraph(3, 2, std::vector<Triple>{{0, 1, 0}}, Matrix::Zero(3, 4));
    auto p = tiny_params(4, 3, 2, 1);
    p.drug_w1.setZero();
    p.drug_b1.setZero();
    p.drug_w2.setZero();
    p.drug_b2.setZero();
    const auto x = input_transform(p, g);
    CHECK(x.leftCols(3).isZero());
    CHECK(x.col(3) == p.se_embedding.row(0).transpose());
    CHECK(x.col(4) == p.se_embedding.row(1).transpose());

    std::mt19937_64 rng(1);
    const auto r = oracle::random_graph(rng, 8, 3, 10, 5);
    const auto pr = ModelParams::initialize(5, 4, r.num_side_effects(), 2, 3);
    const auto xr = input_transform(pr, r);
    CHECK(xr.rows() == 4);
    CHECK(xr.cols() == r.num_nodes());
    CHECK(xr.allFinite());

    const auto wrong = ModelParams::initialize(6, 4, r.num_side_effects(), 2, 3);
    CHECK_THROWS_AS(input_transform(wrong, r), Error);
}

TEST_CASE("forward with identity propagation is ReLU of the input") {
    Matrix features(2, 2);
    features << 1.0, -2.0, 0.5, 3.0;
    const auto g = build_hypergraph(2, 1, std::vector<Triple>{}, features);
    auto p = ModelParams::initialize(2, 3, 1, 1, 4);
    p.layer_mixers[0] = Matrix::Identity(3, 3);
    const LaplacianBuilder b(g, Method::CentSmoothie);
    const auto x0 = input_transform(p, g);
    const auto out = forward(p, g, b);
    CHECK((out - x0.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-15);

    p.layer_mixers[0].setZero();
    CHECK(forward(p, g, b).isZero());
}

TEST_CASE("forward on a single edge matches hand evaluation") {
    Matrix features(2, 1);
    features << 1.0, 2.0;
    const auto g = build_hypergraph(2, 1, std::vector<Triple>{{0, 1, 0}}, features);
    auto p = ModelParams::initialize(1, 1, 1, 1, 0);
    p.drug_w1(0, 0) = 1.0;
    p.drug_b1[0] = 0.0;
    p.drug_w2(0, 0) = 1.0;
    p.drug_b2[0] = 0.0;
    p.se_embedding(0, 0) = 3.0;
    p.layer_mixers[0](0, 0) = 2.0;
    const auto out = forward(p, g, LaplacianBuilder(g, Method::CentSmoothie));
    // P = A / 3 with A = [[1,-1,1],[-1,1,1],[1,1,1]] and X0 = (1, 2, 3)
    CHECK(out(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(out(0, 1) == doctest::Approx(8.0 / 3.0));
    CHECK(out(0, 2) == doctest::Approx(4.0));
}

TEST_CASE("ssa, score and classify") {
    NodeEmbedding x(1, 3);
    x << 0.0, 0.0, 1.0;
    Matrix w(1, 1);
    w << 2.0;
    CHECK(ssa({0, 1, 0}, x, w) == doctest::Approx(2.0));
    w << 0.0;
    CHECK(ssa({0, 1, 0}, x, w) == 0.0);
    x << 1.0, 3.0, 2.0;
    w << 5.0;
    CHECK(ssa({0, 1, 0}, x, w) == 0.0);
    CHECK(score({0, 1, 0}, x, w) == 1.0);

    NodeEmbedding y(1, 3);
    y << 0.0, 0.0, 1.0;
    Matrix one(1, 1);
    one << 1.0;
    CHECK(score({0, 1, 0}, y, one) == doctest::Approx(0.5));
    Matrix three(1, 1);
    three << 3.0;
    CHECK(score({0, 1, 0}, y, three) == doctest::Approx(0.25));

    CHECK(classify({0, 1, 0}, x, w, 0.5));
    CHECK_FALSE(classify({0, 1, 0}, y, three, 0.5));
    CHECK_FALSE(classify({0, 1, 0}, y, one, 0.5));
    CHECK_THROWS_AS(classify({0, 1, 0}, y, one, 1.0), Error);
}

TEST_CASE("score properties on random embeddings") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uni(0.01, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Index k = 3, d = 5, s = 2;
        NodeEmbedding x(k, d + s);
        for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        Matrix w(k, s);
        for (Index i = 0; i < w.size(); ++i) w.data()[i] = uni(rng);
        const Triple e = canonicalize(1, 3, 1);
        const double p = score(e, x, w);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        CHECK(ssa(e, x, w) >= 0.0);
        CHECK(score({1, 3, 1}, x, w) == score(canonicalize(3, 1, 1), x, w));

        NodeEmbedding closer = x;
        for (Index r = 0; r < k; ++r) {
            const double mid = 0.5 * (x(r, 1) + x(r, 3));
            closer(r, d + 1) = x(r, d + 1) + 0.5 * (mid - x(r, d + 1));
        }
        CHECK(score(e, closer, w) >= p);
    }
}

TEST_CASE("layers are non-negative and forward is deterministic") {
    std::mt19937_64 rng(31);
    for (auto method : {Method::CentSmoothie, Method::CentSimple, Method::Baseline}) {
        const auto g = oracle::random_graph(rng, 10, 4, 40, 4);
        const auto p = ModelParams::initialize(4, 5, g.num_side_effects(), 3, 12);
        const LaplacianBuilder b(g, method);
        const auto st = forward_state(p, g, b);
        for (std::size_t l = 1; l < st.layer_inputs.size(); ++l) CHECK(st.layer_inputs[l].minCoeff() >= 0.0);
        CHECK(st.output.minCoeff() >= 0.0);
        const auto again = forward(p, g, b);
        CHECK(std::memcmp(again.data(), st.output.data(), sizeof(double) * static_cast<std::size_t>(again.size())) == 0);
    }
}

TEST_CASE("fixed methods ignore W in propagation") {
    std::mt19937_64 rng(6);
    const auto g = oracle::random_graph(rng, 8, 3, 30);
    auto p = ModelParams::initialize(3, 4, g.num_side_effects(), 2, 2);
    for (auto method : {Method::CentSimple, Method::Baseline}) {
        const LaplacianBuilder b(g, method);
        CHECK_FALSE(b.learns_weights());
        const auto before = forward(p, g, b);
        auto q = p;
        q.weights *= 3.0;
        CHECK(forward(q, g, b) == before);
    }
    const LaplacianBuilder cs(g, Method::CentSimple);
    CHECK(max_abs_difference(cs.laplacian(p.weights, 0), simple_laplacian(g)) <= 1e-12);
}
