import math

import numpy as np
import pytest

import centsmooth as cs


def small_graph():
    features = np.eye(4)
    return cs.build_hypergraph(4, 2, [(0, 1, 0), (2, 1, 0), (2, 3, 1)], features)


def test_graph_is_canonical():
    g = small_graph()
    assert len(g) == 3
    assert g.num_nodes == 6
    assert (1, 2, 0) in g.edges
    assert g.contains(2, 1, 0)
    assert not g.contains(0, 3, 1)


def test_single_edge_laplacian():
    g = cs.build_hypergraph(2, 1, [(0, 1, 0)], np.zeros((2, 1)))
    want = np.array([[0.25, 0.25, -0.5], [0.25, 0.25, -0.5], [-0.5, -0.5, 1.0]])
    np.testing.assert_allclose(cs.central_laplacian(g, np.ones((1, 1))), want)


def test_closed_form_matches_incidence_product():
    rng = np.random.default_rng(5)
    g = small_graph()
    w = rng.uniform(0.0, 2.0, size=(3, g.num_side_effects))
    h = cs.incidence(g)
    for k in range(3):
        per_edge = np.array([w[k, t] for (_, _, t) in g.edges])
        np.testing.assert_allclose(cs.central_laplacian(g, w, k), h @ np.diag(per_edge) @ h.T, atol=1e-12)
        np.testing.assert_allclose(cs.central_laplacian(g, w, k), cs.central_laplacian_oracle(g, w, k), atol=1e-12)


def test_metrics_against_sklearn_definitions():
    scores = [0.9, 0.8, 0.8, 0.3, 0.1]
    labels = [True, True, False, False, True]
    assert cs.auc(scores, labels) == pytest.approx(3.5 / 6.0)
    assert cs.aupr(scores, labels) == pytest.approx((1 / 3) * 1.0 + (1 / 3) * (2 / 3) + (1 / 3) * 0.6)
    with pytest.raises(ValueError):
        cs.auc([0.1], [True, False])


def test_fisher_and_planted_extraction():
    assert cs.fisher_exact_one_sided(5, 0, 0, 5) == pytest.approx(1 / 252, rel=1e-12)
    reports = [(["alpha", "beta"], ["rash"])] * 5 + [(["gamma"], [])] * 5
    kept = cs.extract_significant(reports)
    assert len(kept) == 1
    assert kept[0][:3] == ("alpha", "beta", "rash")
    assert kept[0][3] == pytest.approx(1 / 252, rel=1e-12)


def test_synthetic_training_and_scoring():
    ds = cs.generate_synthetic(num_drugs=40, num_groups=4, max_groups=1, seed=3)
    g = ds["graph"]
    assert g.num_side_effects == 6
    assert len(ds["groups"]) == 40
    config = cs.TrainConfig()
    config.embedding_size = 10
    config.num_layers = 1
    config.epochs = 60
    config.lambda_ = 1.0
    config.seed = 2
    params, trace = cs.train(g, config)
    assert len(trace) == 60
    assert trace[-1] < trace[0]
    assert np.all(params.weights >= 0.0)
    x = cs.embed(params, g)
    assert x.shape == (10, g.num_nodes)
    scores = cs.score(params, g, list(g.edges[:5]))
    assert all(0.0 < s <= 1.0 for s in scores)


def test_gradients_are_exposed():
    g = small_graph()
    params = cs.ModelParams.initialize(4, 3, 2, 1, 11)
    negatives = cs.sample_negatives(g, 3, 1)
    loss, grads = cs.loss_and_gradients(params, g, negatives, 0.5)
    assert math.isfinite(loss)
    assert "weights" in grads
    assert len(grads["weights"]) == 3 * 2


def test_cross_validation_is_deterministic():
    ds = cs.generate_synthetic(num_drugs=30, num_groups=4, max_groups=2, seed=1)
    config = cs.TrainConfig()
    config.embedding_size = 10
    config.epochs = 20
    a = cs.cross_validate(ds["graph"], config, folds=2, seed=4, jobs=1)
    b = cs.cross_validate(ds["graph"], config, folds=2, seed=4, jobs=2)
    assert a == b
    assert set(a) >= {"folds", "mean_auc", "mean_aupr", "per_side_effect", "infrequent_curve"}
    assert 0.0 <= a["mean_auc"] <= 1.0


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        cs.build_hypergraph(2, 1, [(0, 0, 0)], np.zeros((2, 1)))
    with pytest.raises(ValueError):
        cs.parse_method("nope")
