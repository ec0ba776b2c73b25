import json
import math

import numpy as np
import pytest

import qfeat


def test_gauss_hermite_three_points():
    nodes, weights = qfeat.gauss_hermite(3)
    np.testing.assert_allclose(nodes, [-math.sqrt(3), 0.0, math.sqrt(3)], atol=1e-14)
    np.testing.assert_allclose(weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)


def test_grids():
    g = qfeat.dense_grid(2, 2)
    assert g.count == 4 and g.dim == 2 and g.nonnegative
    np.testing.assert_allclose(np.abs(g.points), 1.0)
    assert qfeat.sparse_grid(2, 25).count == 1351
    assert qfeat.exactness_residual(qfeat.dense_grid(2, 3), 3) <= 1e-10
    s = qfeat.subsample_dense(6, 3, 50, seed=1)
    assert abs(s.weight_sum() - 1.0) < 1e-12
    back = qfeat.GridQuadrature.from_json(g.to_json())
    np.testing.assert_array_equal(back.points, g.points)


def test_feature_map_identity():
    fm = qfeat.rff(4, 64, 0.5, seed=3)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((10, 4))
    Z = fm.embed(X)
    assert Z.shape == (10, 128)
    for i in range(9):
        assert abs(Z[i] @ Z[i + 1] - fm.approx_kernel(X[i], X[i + 1])) < 1e-12
    fast, used_fast = qfeat.embed_grid_fast(qfeat.FeatureMap(qfeat.dense_grid(3, 4), "dense"), X)
    assert used_fast
    np.testing.assert_allclose(fast, qfeat.FeatureMap(qfeat.dense_grid(3, 4), "dense").embed(X), atol=1e-12)


def test_signed_rules_refuse_embedding():
    fm = qfeat.FeatureMap(qfeat.sparse_grid(2, 3), "sparse")
    assert fm.approx_kernel(np.zeros(3)) == pytest.approx(1.0)
    with pytest.raises(qfeat.UnsupportedEmbedding):
        fm.embed(np.zeros((1, 3)))


def test_kernels_and_bounds():
    assert qfeat.eval_gaussian(np.array([2.0, 0.0])) == pytest.approx(math.exp(-2))
    k = qfeat.AnovaKernel(4, [[0, 1], [2, 3]])
    assert k.stats() == (2, 1, 2)
    assert qfeat.eval_anova(k, np.zeros(4), np.zeros(4)) == 2.0
    assert qfeat.poly_bound(1.0, 1.0, 2) == pytest.approx(3 * math.e / 2)
    assert qfeat.sparse_bound(1.0, 1.0, 2, 25) is None
    assert qfeat.counts(25, 2, 2, 10) == (351, 10**25, 3159)
    with pytest.raises(ValueError):
        qfeat.poly_bound(1.0, 1.0, 3)


def test_solvers():
    r = qfeat.nnls(np.eye(2), np.array([1.0, -1.0]))
    np.testing.assert_allclose(r["a"], [1.0, 0.0])
    g = qfeat.construct_poly_exact(2, 2, 40, seed=1)
    assert qfeat.exactness_residual(g, 2) <= 1e-8
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((80, 2)), rng.standard_normal((80, 2))
    cand = qfeat.subsample_dense(6, 2, 60, seed=2)
    lam, small = qfeat.bisect_lambda(cand, x, y, 0.5, target_D=5)
    assert small.count <= 5 and lam > 0
    assert qfeat.reweight(cand, x, y, 0.5, 0.0).nonnegative


def test_errors_and_sweep():
    fm = qfeat.FeatureMap(qfeat.dense_grid(8, 2), "dense")
    curve = qfeat.error_curve(fm, [0.5, 1.0], 2000, 1)
    assert curve[0][1] <= curve[1][1]
    assert qfeat.max_error_empirical(fm, 0.5, 2000, 1) <= qfeat.poly_bound(1.0, 0.5, 14)
    cfg = {"methods": ["rff"], "d": 3, "D": [20], "M": [1.0], "n_eval": 500}
    csv = qfeat.sweep(json.dumps(cfg)).splitlines()
    assert csv[0] == "method,d,D,gamma,M,max_err,rms_err,n_eval,seed,build_ms,embed_ms"
    assert len(csv) == 2
    with pytest.raises(qfeat.ConfigError):
        qfeat.sweep(json.dumps({**cfg, "colour": 1}))
