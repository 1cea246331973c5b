import itertools

import numpy as np
import pytest
from oracles import check_greedy_path, greedy_instance, refit_rss

from hierlin.criteria import BIC, CriterionKind
from hierlin.data_gen import Dataset, DesignConfig, make_dataset, table1_design, table1_spec
from hierlin.forward import (
    CandidatePolicy,
    default_max_steps,
    forward_path,
    iform,
    oracle_fit,
    two_stage_forward,
)
from hierlin.model_space import EffectId, QuadraticModelSpec, check_heredity, split_effects


def test_candidates_marginality():
    pol = CandidatePolicy.marginality()
    assert pol.candidates(3, []) == [EffectId(0), EffectId(1), EffectId(2)]
    got = pol.candidates(3, [EffectId(2), EffectId(0)])
    assert got == [EffectId(1), EffectId(0, 0), EffectId(0, 2), EffectId(2, 2)]
    assert EffectId(0, 2) not in pol.candidates(3, [EffectId(2), EffectId(0), EffectId(0, 2)])


def test_candidates_interactions_of():
    pol = CandidatePolicy.interactions_of({1, 3})
    assert pol.candidates(4, [EffectId(1), EffectId(3)]) == [EffectId(1, 1), EffectId(1, 3), EffectId(3, 3)]
    with pytest.raises(ValueError):
        CandidatePolicy.interactions_of({5}).candidates(4, [])


def test_candidates_mains_only():
    assert CandidatePolicy.mains_only().candidates(3, [EffectId(1)]) == [EffectId(0), EffectId(2)]


def test_default_max_steps():
    assert default_max_steps(200) == 50
    assert default_max_steps(40) == 10
    assert default_max_steps(3) == 1


@pytest.mark.parametrize("seed", range(10))
def test_greedy_step_oracle(seed):
    data, result, policy = greedy_instance(seed)
    assert max(check_greedy_path(data, result, policy)) <= 1e-7


@pytest.mark.parametrize("seed", range(5))
def test_greedy_step_oracle_mains_only(seed):
    data, result, policy = greedy_instance(seed, CandidatePolicy.mains_only(), max_steps=5)
    assert max(check_greedy_path(data, result, policy)) <= 1e-7


def test_exact_tie_goes_to_canonical_effect():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 3))
    x[:, 2] = x[:, 1]
    y = x[:, 1] + 0.1 * rng.standard_normal(40)
    res = forward_path(Dataset(x, y), CandidatePolicy.mains_only(), BIC, max_steps=1)
    assert res.path[1].added == EffectId(1)


@pytest.mark.parametrize("seed", range(8))
def test_path_properties(seed):
    data, result, _ = greedy_instance(seed, max_steps=12)
    rss = [s.rss for s in result.path]
    assert all(b <= a + 1e-9 * rss[0] for a, b in zip(rss, rss[1:]))
    crit = [s.criterion for s in result.path]
    best = min(crit)
    assert any(tuple(sorted(s.model)) == result.selected and s.criterion == best for s in result.path)
    for a, b in zip(result.path, result.path[1:]):
        assert b.model[:-1] == a.model and b.model[-1] == b.added
    for step in result.path:
        assert check_heredity(*split_effects(step.model), "strong")[0]
    assert result.is_hierarchical()


def test_refit_coefficients_match_lstsq():
    data, result, _ = greedy_instance(3)
    effects = sorted(result.selected)
    a = np.column_stack([np.ones(data.n)] + [
        data.x[:, e.j] if e.is_main else data.x[:, e.j] * data.x[:, e.k] for e in effects])
    coef, *_ = np.linalg.lstsq(a, data.y, rcond=None)
    assert result.intercept == pytest.approx(coef[0], abs=1e-8)
    np.testing.assert_allclose([result.coefficients[e] for e in effects], coef[1:], atol=1e-8)
    np.testing.assert_allclose(result.predict(data.x), a @ coef, atol=1e-8)


def test_residual_perfect_candidate():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((30, 2))
    y = 1.0 + 2.0 * x[:, 0] + x[:, 0] ** 2
    res = forward_path(Dataset(x, y), CandidatePolicy.interactions_of({0}), BIC, initial=(EffectId(0),))
    assert len(res.path) == 2
    assert res.path[-1].added == EffectId(0, 0)
    assert res.path[-1].rss <= 1e-18 * (y @ y)
    assert res.info["stop"] == "exhausted"
    assert res.selected == (EffectId(0), EffectId(0, 0))


def _best_subset(x, y, size):
    p = x.shape[1]
    return min(itertools.combinations(range(p), size),
               key=lambda s: refit_rss(x, y, [EffectId(j) for j in s]))


@pytest.mark.parametrize("seed", range(3))
def test_high_signal_main_recovery(seed):
    truth = QuadraticModelSpec(10, 1.0, [0, 1.5, 0, 0, -1.0, 0, 0, 1.2, 0, 0])
    data = make_dataset(DesignConfig(400, 10, seed=seed), truth)
    assert set(_best_subset(data.x, data.y, 3)) == {1, 4, 7}
    for res in (iform(data), two_stage_forward(data)):
        assert res.selected == (EffectId(1), EffectId(4), EffectId(7))
    # a mains-only truth keeps iFORM on plain forward selection over mains
    fs = forward_path(data, CandidatePolicy.mains_only(), CriterionKind().with_dim(10))
    assert iform(data).path[:4] == fs.path[:4]


@pytest.mark.parametrize("seed", range(3))
def test_permutation_equivariance(seed):
    truth = QuadraticModelSpec(8, 0.0, [2, 0, 1.5, 0, 0, 1, 0, 0], {(0, 2): 1.5, (2, 5): -1.2})
    data = make_dataset(DesignConfig(120, 8, seed=seed), truth)
    perm = np.random.default_rng(seed).permutation(8)
    inv = np.argsort(perm)
    permuted = Dataset(data.x[:, perm], data.y)

    def relabel(effects):
        return sorted(EffectId(int(inv[e.j])) if e.is_main else EffectId(int(inv[e.j]), int(inv[e.k]))
                      for e in effects)

    for method in (iform, two_stage_forward):
        a, b = method(data), method(permuted)
        assert relabel(a.selected) == sorted(b.selected)
        assert [relabel([s.added])[0] for s in a.path[1:]] == [s.added for s in b.path[1:]]


def test_two_stage_structure():
    truth = QuadraticModelSpec(6, 0.0, [2, 2, 0, 0, 0, 0], {(0, 1): 2.0})
    data = make_dataset(DesignConfig(200, 6, seed=1), truth)
    res = two_stage_forward(data)
    assert res.stage_one is not None
    s1 = res.stage_one
    assert all(e.is_main for e in s1.selected)
    assert res.path[0].model == s1.selected
    assert all(not s.added.is_main for s in res.path[1:])
    assert EffectId(0, 1) in res.selected
    assert res.is_hierarchical()


def test_ebic_dimensions():
    data = make_dataset(DesignConfig(100, 6, seed=2), QuadraticModelSpec(6, 0, [2, 2, 0, 0, 0, 0], {(0, 1): 1}))
    res = two_stage_forward(data)
    k = len(res.stage_one.selected_mains)
    assert res.stage_one.criterion.ambient_dim == 6
    assert res.criterion.ambient_dim == k * (k + 1) // 2
    assert iform(data).criterion.ambient_dim == 6


def test_patience_truncates():
    data, _, _ = greedy_instance(4)
    res = forward_path(data, CandidatePolicy.marginality(), BIC, max_steps=20, patience=2)
    assert len(res.path) - 1 <= 20
    if res.info["stop"] == "patience":
        crit = [s.criterion for s in res.path]
        assert int(np.argmin(crit)) == len(crit) - 3


def test_oracle_fit_noiseless():
    truth = QuadraticModelSpec(9, 1.0, [2, 0, 2, 0, 2, 0, 2, 0, 2], {(0, 2): 1.5, (6, 8): 2.1}, sigma=1e-12)
    data = make_dataset(DesignConfig(60, 9, seed=0), truth)
    res = oracle_fit(data, truth)
    assert res.size == 7
    for e, v in truth.coefficients().items():
        assert res.coefficients[e] == pytest.approx(v, abs=1e-8)
    assert res.intercept == pytest.approx(1.0, abs=1e-8)


def test_table1_single_replicate_hierarchy():
    spec = table1_spec()
    data = make_dataset(table1_design(seed=5), spec)
    for res in (iform(data), two_stage_forward(data)):
        assert res.is_hierarchical()
        for step in res.path:
            assert check_heredity(*split_effects(step.model), "strong")[0]
    assert oracle_fit(data, spec).size == 9
