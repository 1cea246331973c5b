import numpy as np
import pytest
from lasso_oracles import lasso_objective, projected_gradient, standardize

from hierlin.data_gen import (
    UNIFORM01,
    Dataset,
    DesignConfig,
    make_dataset,
    replicate_seed,
    table1_design,
    table1_spec,
    turlach_spec,
)
from hierlin.lasso import (
    MaxIterations,
    StandardizedColumns,
    coordinate_descent,
    iform_lasso,
    lambda_grid,
    lambda_max,
    soft_threshold,
    two_stage_lasso,
)
from hierlin.model_space import EffectId, QuadraticModelSpec


@pytest.mark.parametrize("z,t,expected", [(3, 1, 2), (-0.5, 1, 0), (-3, 1, -2), (0.5, 0, 0.5), (1, 1, 0)])
def test_soft_threshold(z, t, expected):
    assert soft_threshold(z, t) == expected


def test_soft_threshold_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -1.0)


def _problem(seed, n=30, p=6):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) @ np.linalg.cholesky(0.4 * np.eye(p) + 0.6 * np.ones((p, p))).T
    y = x @ rng.choice([-2.0, -1.0, 0.0, 0.0, 1.5], p) + rng.standard_normal(n)
    return x, y


def test_lambda_max_gives_zero():
    x, y = _problem(0)
    lmax = lambda_max(x, y)
    assert lmax > 0
    for lam in (lmax, 1.5 * lmax):
        assert not coordinate_descent(x, y, lam).coef.any()
    assert coordinate_descent(x, y, 0.99 * lmax).coef.any()


def test_orthonormal_closed_form():
    rng = np.random.default_rng(1)
    n, p = 50, 5
    a = rng.standard_normal((n, p))
    a -= a.mean(axis=0)
    q, _ = np.linalg.qr(a)
    x = q * np.sqrt(n)
    y = x @ [3.0, -2.0, 0.5, 0.0, -0.1] + rng.standard_normal(n)
    z = x.T @ (y - y.mean()) / n
    for lam in (0.05, 0.3, 1.0):
        state = coordinate_descent(x, y, lam)
        expected = [soft_threshold(v, lam) for v in z]
        np.testing.assert_allclose(state.coef, expected, atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_matches_projected_gradient(seed):
    x, y = _problem(seed)
    xs, yc = standardize(x), y - y.mean()
    lam = 0.2 * lambda_max(x, y)
    state = coordinate_descent(x, y, lam, tol=1e-10)
    ref = projected_gradient(xs, yc, lam)
    assert state.objective() == pytest.approx(lasso_objective(xs, yc, state.coef, lam), rel=1e-12)
    assert abs(state.objective() - lasso_objective(xs, yc, ref, lam)) <= 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_kkt(seed):
    x, y = _problem(seed, n=40, p=12)
    grid = lambda_grid(lambda_max(x, y), 20)
    warm = {}
    for lam in grid:
        state = coordinate_descent(x, y, lam, warm)
        assert state.kkt_residual() <= 1e-5
        g = standardize(x).T @ state.residual / x.shape[0]
        act = state.coef != 0
        assert np.all(np.abs(g[~act]) <= lam + 1e-5)
        assert np.all(np.abs(g[act] - lam * np.sign(state.coef[act])) <= 1e-5)
        warm = state.active


@pytest.mark.parametrize("seed", range(5))
def test_warm_start_agrees_with_cold(seed):
    x, y = _problem(seed, n=40, p=12)
    grid = lambda_grid(lambda_max(x, y), 15)
    warm = {}
    for lam in grid:
        hot = coordinate_descent(x, y, lam, warm, tol=1e-10)
        cold = coordinate_descent(x, y, lam, tol=1e-10)
        assert hot.objective() == pytest.approx(cold.objective(), rel=1e-8)
        warm = hot.active


@pytest.mark.parametrize("seed", range(5))
def test_sweeps_never_increase_objective(seed):
    x, y = _problem(seed, n=40, p=12)
    trace = []
    coordinate_descent(x, y, 0.05 * lambda_max(x, y), callback=trace.append)
    assert len(trace) > 1
    assert all(b <= a * (1 + 1e-14) for a, b in zip(trace, trace[1:]))


def test_max_iterations():
    x, y = _problem(2, n=40, p=12)
    with pytest.raises(MaxIterations):
        coordinate_descent(x, y, 1e-3 * lambda_max(x, y), max_sweeps=1)


def test_lambda_validation():
    x, y = _problem(0)
    with pytest.raises(ValueError):
        coordinate_descent(x, y, 0.0)
    with pytest.raises(ValueError):
        lambda_grid(0.0)


def test_lambda_grid():
    g = lambda_grid(2.0)
    assert len(g) == 100 and g[0] == 2.0 and g[-1] == pytest.approx(0.002)
    assert np.all(np.diff(g) < 0)
    np.testing.assert_allclose(np.diff(np.log(g)), np.log(1e-3) / 99)


def test_raw_coefficients_back_transform():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((200, 3)) * [1.0, 5.0, 0.2] + 3.0
    y = x @ [1.0, 0.2, 5.0] + 0.01 * rng.standard_normal(200)
    state = coordinate_descent(x, y, 1e-6)
    raw = state.raw_coefficients()
    np.testing.assert_allclose([raw[EffectId(j)] for j in range(3)], [1.0, 0.2, 5.0], rtol=1e-2)


def test_interaction_columns_standardized():
    rng = np.random.default_rng(4)
    cols = StandardizedColumns(rng.standard_normal((100, 3)) + 2.0)
    m = cols.matrix([EffectId(0), EffectId(0, 1), EffectId(2, 2)])
    np.testing.assert_allclose(m.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose((m**2).mean(axis=0), 1, rtol=1e-12)


def test_constant_column_ignored():
    rng = np.random.default_rng(5)
    x = np.column_stack([rng.standard_normal(30), np.ones(30)])
    state = coordinate_descent(x, x[:, 0] + rng.standard_normal(30), 0.01)
    assert state.coef[1] == 0.0


def test_iform_lasso_mains_only_truth():
    truth = QuadraticModelSpec(10, 0.0, [3, 0, 0, -3, 0, 0, 3, 0, 0, 0])
    data = make_dataset(DesignConfig(200, 10, seed=0), truth)
    res = iform_lasso(data)
    assert res.path[0].model == ()
    assert res.selected == (EffectId(0), EffectId(3), EffectId(6))
    # no interaction appears before all three true mains are in
    for step in res.path:
        if any(not e.is_main for e in step.model):
            assert {0, 3, 6} <= {e.j for e in step.model if e.is_main}
            break


@pytest.mark.parametrize("seed", range(3))
def test_table1_replicate_hierarchical(seed):
    data = make_dataset(table1_design(seed=seed), table1_spec())
    for res in (iform_lasso(data), two_stage_lasso(data)):
        assert res.is_hierarchical()
        assert res.path[0].model == ()
        assert all(len(s.model) <= 50 for s in res.path)
    stage_one = two_stage_lasso(data).stage_one
    assert all(e.is_main for e in stage_one.selected)


def test_two_stage_lasso_turlach_misses_x1():
    hits = 0
    for r in range(30):
        cfg = DesignConfig(1000, 10, UNIFORM01, seed=replicate_seed(3, r, 0))
        data = make_dataset(cfg, turlach_spec(), noise_seed=replicate_seed(3, r, 1))
        hits += 0 in two_stage_lasso(data).stage_one.selected_mains
    assert hits / 30 <= 0.1


@pytest.fixture(scope="module")
def downscaled_runs():
    spec = table1_spec(p=20)
    truth = {0, 2, 4, 6, 8}
    out = {"iform": [], "two_stage": []}
    for r in range(100):
        cfg = DesignConfig(200, 20, seed=replicate_seed(7, r, 0))
        data = make_dataset(cfg, spec, noise_seed=replicate_seed(7, r, 1))
        for key, fn in (("iform", iform_lasso), ("two_stage", two_stage_lasso)):
            res = fn(data)
            assert res.is_hierarchical()
            mains = res.selected_mains
            out[key].append((mains == truth, truth <= mains))
    return out


def test_iform_lasso_covers_true_mains_more_often(downscaled_runs):
    cover = {k: sum(c for _, c in v) for k, v in downscaled_runs.items()}
    assert cover["iform"] >= cover["two_stage"]


@pytest.mark.xfail(strict=True, reason="iFORM-LASSO keeps correlated neighbour mains that enter before the "
                   "interactions become candidates; see README, Known limitations")
def test_iform_lasso_exact_main_recovery_vs_two_stage(downscaled_runs):
    exact = {k: sum(e for e, _ in v) for k, v in downscaled_runs.items()}
    assert exact["iform"] >= exact["two_stage"]


def test_dataset_without_signal():
    rng = np.random.default_rng(9)
    data = Dataset(rng.standard_normal((60, 5)), np.ones(60))
    assert iform_lasso(data).selected == ()
