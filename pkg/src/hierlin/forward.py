"""Greedy forward selection over main effects and pairwise interactions.

One engine, :func:`forward_path`, drives every procedure; what differs is the
candidate policy deciding which effects may enter at each step:

* ``mains_only`` - stage one of a two-stage method;
* ``interactions_of(M)`` - stage two, products and squares within ``M``;
* ``marginality`` - iFORM: all mains plus every interaction whose parents
  are already in the model, so the candidate pool grows with the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .criteria import CriterionKind, capped_rss, criterion_value
from .data_gen import Dataset
from .linalg import IncrementalFit, least_squares
from .model_space import EffectId, check_heredity, split_effects

# None runs every path to max_steps; see forward_path
DEFAULT_PATIENCE = None
TIE_RTOL = 1e-10


@dataclass(frozen=True)
class CandidatePolicy:
    kind: str
    parents: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("mains_only", "interactions_of", "marginality"):
            raise ValueError(f"unknown policy {self.kind!r}")
        object.__setattr__(self, "parents", frozenset(int(j) for j in self.parents))

    @classmethod
    def mains_only(cls):
        return cls("mains_only")

    @classmethod
    def interactions_of(cls, mains):
        return cls("interactions_of", frozenset(mains))

    @classmethod
    def marginality(cls):
        return cls("marginality")

    def candidates(self, p, model):
        """Canonically sorted effects that may enter next, given the current model."""
        if self.kind == "interactions_of" and any(j >= p for j in self.parents):
            raise ValueError("parent index out of range")
        model = set(model)
        out = []
        if self.kind in ("mains_only", "marginality"):
            out.extend(EffectId(j) for j in range(p) if EffectId(j) not in model)
        if self.kind == "interactions_of":
            pool = sorted(self.parents)
        elif self.kind == "marginality":
            pool = sorted(e.j for e in model if e.is_main)
        else:
            pool = []
        for a, j in enumerate(pool):
            for k in pool[a:]:
                e = EffectId(j, k)
                if e not in model:
                    out.append(e)
        return out


class EffectColumns:
    """Centered regressor columns built from sample-centered predictors.

    Products are formed from the centered mains and centered again. When both
    parents are in the model this spans the same space as raw products, so
    gains are unaffected; reported coefficients always come from a refit on
    raw columns (:func:`refit`).
    """

    def __init__(self, x):
        x = np.asarray(x, dtype=np.float64)
        self.n, self.p = x.shape
        self.means = x.mean(axis=0)
        self.xc = x - self.means
        self._cache = {}

    def column(self, e):
        if e.is_main:
            return self.xc[:, e.j]
        z = self._cache.get(e)
        if z is None:
            z = self.xc[:, e.j] * self.xc[:, e.k]
            z -= z.mean()
            self._cache[e] = z
        return z

    def matrix(self, effects):
        if not effects:
            return np.empty((self.n, 0))
        if all(e.is_main for e in effects):
            return self.xc[:, [e.j for e in effects]]
        return np.column_stack([self.column(e) for e in effects])


def effect_matrix(x, effects):
    """Raw regressor columns: ``X_j`` for mains, ``X_j * X_k`` for interactions."""
    x = np.asarray(x, dtype=np.float64)
    if not effects:
        return np.empty((x.shape[0], 0))
    return np.column_stack([x[:, e.j] if e.is_main else x[:, e.j] * x[:, e.k] for e in effects])


def refit(x, y, effects):
    """Least squares with intercept on the raw columns of ``effects``.

    Returns ``(coefficients, intercept, rss)`` with coefficients keyed by effect.
    """
    effects = sorted(effects)
    fit = least_squares(effect_matrix(x, effects), y, intercept=True)
    return dict(zip(effects, map(float, fit.coefficients))), fit.intercept, fit.rss


@dataclass(frozen=True)
class PathStep:
    added: EffectId | None
    model: tuple
    rss: float
    criterion: float


@dataclass
class SelectionResult:
    """Outcome of a selection procedure.

    ``path`` lists the visited models in order, ``selected`` is the model
    minimizing the criterion along it, and ``coefficients``/``intercept`` come
    from a least-squares refit of ``selected`` on the raw predictors.
    """

    method: str
    path: list
    selected: tuple
    coefficients: dict
    intercept: float
    criterion: CriterionKind
    stage_one: "SelectionResult | None" = None
    info: dict = field(default_factory=dict)

    @property
    def selected_mains(self):
        return frozenset(e.j for e in self.selected if e.is_main)

    @property
    def selected_interactions(self):
        return frozenset((e.j, e.k) for e in self.selected if not e.is_main)

    @property
    def size(self):
        return len(self.selected)

    def is_hierarchical(self):
        return check_heredity(*split_effects(self.selected), "strong")[0]

    def predict(self, x):
        effects = sorted(self.coefficients)
        beta = np.array([self.coefficients[e] for e in effects])
        return effect_matrix(x, effects) @ beta + self.intercept


def default_max_steps(n):
    return max(1, min(n // 4, 50))


def forward_path(
    data,
    policy,
    criterion=CriterionKind(),
    max_steps=None,
    *,
    initial=(),
    patience=DEFAULT_PATIENCE,
    columns=None,
    method="forward",
):
    """Greedy forward selection under a candidate policy.

    Each step adds the candidate with the largest drop in residual sum of
    squares; ties go to the canonically smallest effect. The path stops after
    ``max_steps`` additions, when no candidate reduces the RSS, when the
    candidate pool is empty, or, when ``patience`` is set, once the criterion
    has failed to improve for that many consecutive steps. The reported model
    is the criterion minimizer over the path, which always starts at
    ``initial``.

    ``patience`` defaults to off: under the marginality policy a hub main
    whose effect is carried mostly by its interactions can enter late, after
    a long flat stretch of the criterion.

    Columns are sample-centered internally, so the intercept is implicit.
    """
    n, p = data.x.shape
    initial = tuple(initial)
    if max_steps is None:
        max_steps = default_max_steps(n)
    max_steps = min(int(max_steps), n - 2 - len(initial))
    if max_steps < 0:
        raise ValueError("initial model leaves no degrees of freedom")
    if criterion.name == "ebic" and criterion.ambient_dim is None:
        criterion = criterion.with_dim(p)

    cols = columns if columns is not None else EffectColumns(data.x)
    yc = data.y - data.y.mean()
    y_sq = float(yc @ yc)
    fit = IncrementalFit(yc)
    for e in initial:
        fit.add(cols.column(e))

    def score(rss, k):
        return criterion_value(criterion, capped_rss(rss, y_sq), n, k)

    model = list(initial)
    path = [PathStep(None, tuple(model), fit.rss, score(fit.rss, len(model)))]
    best = 0
    n_degenerate = 0
    stop = "max_steps"
    for _ in range(max_steps):
        cands = policy.candidates(p, model)
        if not cands:
            stop = "exhausted"
            break
        mat = cols.matrix(cands)
        gains, degenerate = fit.gains(mat)
        n_degenerate += int(degenerate.sum())
        top = float(gains.max())
        if not top > 1e-12 * y_sq:
            stop = "no_gain"
            break
        idx = int(np.flatnonzero(gains >= top * (1 - TIE_RTOL))[0])
        e = cands[idx]
        fit.add(mat[:, idx])
        model.append(e)
        path.append(PathStep(e, tuple(model), fit.rss, score(fit.rss, len(model))))
        if path[-1].criterion < path[best].criterion:
            best = len(path) - 1
        elif patience is not None and len(path) - 1 - best >= patience:
            stop = "patience"
            break

    selected = path[best].model
    coefs, b0, _ = refit(data.x, data.y, selected)
    return SelectionResult(
        method=method,
        path=path,
        selected=tuple(sorted(selected)),
        coefficients=coefs,
        intercept=b0,
        criterion=criterion,
        info={"stop": stop, "degenerate": n_degenerate},
    )


def two_stage_forward(
    data,
    criterion=CriterionKind(),
    stage_caps=(None, None),
    *,
    stage_two_criterion=None,
    patience=DEFAULT_PATIENCE,
):
    """Mains-only forward selection, then interactions among the chosen mains.

    The stage-one model is held fixed in stage two; only products and squares
    of its mains may be added. EBIC is charged against ``p`` in stage one and
    against the number of stage-two candidates in stage two.
    """
    p = data.p
    cols = EffectColumns(data.x)
    s1 = forward_path(
        data,
        CandidatePolicy.mains_only(),
        criterion.with_dim(p),
        stage_caps[0],
        patience=patience,
        columns=cols,
        method="two-stage FS (stage one)",
    )
    mains = s1.selected_mains
    n_pairs = len(mains) * (len(mains) + 1) // 2
    crit2 = (stage_two_criterion or criterion).with_dim(max(n_pairs, 1))
    s2 = forward_path(
        data,
        CandidatePolicy.interactions_of(mains),
        crit2,
        stage_caps[1],
        initial=s1.selected,
        patience=patience,
        columns=cols,
        method="two-stage FS",
    )
    s2.stage_one = s1
    return s2


def iform(data, criterion=CriterionKind(), max_steps=None, *, patience=DEFAULT_PATIENCE):
    """Forward selection under the marginality principle.

    Starts from the empty model with all mains as candidates; an interaction
    becomes a candidate once all its parents have been selected.
    """
    return forward_path(
        data,
        CandidatePolicy.marginality(),
        criterion.with_dim(data.p),
        max_steps,
        patience=patience,
        method="iFORM",
    )


def oracle_fit(data, truth, criterion=CriterionKind()):
    """Least-squares refit on the true support (important mains plus nonzero interactions)."""
    effects = tuple(truth.support())
    if len(effects) >= data.n - 1:
        raise ValueError("true support is too large for the sample size")
    coefs, b0, rss = refit(data.x, data.y, effects)
    criterion = criterion.with_dim(data.p)
    yc = data.y - data.y.mean()
    crit = criterion_value(criterion, capped_rss(rss, yc @ yc), data.n, len(effects))
    return SelectionResult(
        method="Oracle",
        path=[PathStep(None, effects, rss, crit)],
        selected=effects,
        coefficients=coefs,
        intercept=b0,
        criterion=criterion,
    )


__all__ = [
    "CandidatePolicy",
    "Dataset",
    "EffectColumns",
    "PathStep",
    "SelectionResult",
    "effect_matrix",
    "forward_path",
    "iform",
    "oracle_fit",
    "refit",
    "two_stage_forward",
]
