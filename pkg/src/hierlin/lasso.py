"""Coordinate-descent LASSO over dynamic candidate sets.

The solver minimizes ``(1/2n) |y - X b|^2 + lam |b|_1`` over standardized
columns (centered, ``x'x / n = 1``); coefficients are mapped back to the raw
scale by the callers. Paths run over a decreasing log-spaced grid with warm
starts. Model choice along a path uses least-squares refits of each distinct
support, scored by the information criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import CriterionKind, capped_rss, criterion_value
from .forward import EffectColumns, PathStep, SelectionResult, default_max_steps, refit
from .model_space import EffectId


class MaxIterations(RuntimeError):
    pass


def soft_threshold(z, t):
    """``sign(z) * max(|z| - t, 0)``."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    return math.copysign(max(abs(z) - t, 0.0), z) if abs(z) > t else 0.0


class StandardizedColumns:
    """Columns for effects, centered and scaled to ``x'x / n = 1``.

    Interactions are products of sample-centered mains, centered again before
    scaling. Constant columns get scale 0 and are never updated by the solver.
    """

    def __init__(self, x):
        self.base = EffectColumns(x)
        self.n = self.base.n
        self.p = self.base.p
        xc = self.base.xc
        sd = np.sqrt(np.einsum("ij,ij->j", xc, xc) / self.n)
        self._main_sd = sd
        with np.errstate(divide="ignore", invalid="ignore"):
            self._main = np.where(sd > 0, xc / np.where(sd > 0, sd, 1.0), 0.0)
        self._cache = {}

    @classmethod
    def from_matrix(cls, x):
        return cls(x)

    def _entry(self, e):
        hit = self._cache.get(e)
        if hit is None:
            z = self.base.column(e)
            sd = math.sqrt(float(z @ z) / self.n)
            hit = (z / sd if sd > 0 else np.zeros_like(z), sd)
            self._cache[e] = hit
        return hit

    def scale(self, e):
        return float(self._main_sd[e.j]) if e.is_main else self._entry(e)[1]

    def scales(self, effects):
        return np.array([self.scale(e) for e in effects])

    def matrix(self, effects):
        if not effects:
            return np.empty((self.n, 0))
        if all(e.is_main for e in effects):
            return self._main[:, [e.j for e in effects]]
        return np.column_stack([self._main[:, e.j] if e.is_main else self._entry(e)[0] for e in effects])


@dataclass
class LassoState:
    """Converged solution at one penalty level (standardized scale)."""

    lam: float
    candidates: tuple
    coef: np.ndarray
    residual: np.ndarray
    gradient: np.ndarray
    scales: np.ndarray
    sweeps: int

    @property
    def active(self):
        return {e: float(b) for e, b in zip(self.candidates, self.coef) if b != 0.0}

    def raw_coefficients(self):
        out = {}
        for e, b, s in zip(self.candidates, self.coef, self.scales):
            if b != 0.0:
                out[e] = float(b / s)
        return out

    def objective(self):
        n = self.residual.shape[0]
        return float(self.residual @ self.residual) / (2 * n) + self.lam * float(np.abs(self.coef).sum())

    def kkt_residual(self):
        """Largest violation of the optimality conditions.

        Inactive: ``|x_j'r/n| <= lam``; active: ``x_j'r/n = lam sign(b_j)``.
        """
        if self.coef.size == 0:
            return 0.0
        g = self.gradient
        live = self.scales > 0
        act = (self.coef != 0) & live
        inact = (self.coef == 0) & live
        v_act = np.abs(g[act] - self.lam * np.sign(self.coef[act]))
        v_inact = np.maximum(np.abs(g[inact]) - self.lam, 0.0)
        return float(max(v_act.max(initial=0.0), v_inact.max(initial=0.0)))


def _objective(r, b, lam):
    return float(r @ r) / (2 * r.shape[0]) + lam * float(np.abs(b).sum())


def coordinate_descent(
    columns,
    y,
    lam,
    warm_start=None,
    candidates=None,
    *,
    tol=1e-7,
    kkt_tol=1e-6,
    max_sweeps=100_000,
    callback=None,
):
    """Cyclic coordinate descent with a working set.

    Sweeps run over the current nonzero coordinates until the largest
    coefficient change drops below ``tol * sd(y)``; then the full gradient is
    checked and any coordinate violating its optimality condition by more
    than ``kkt_tol`` joins the working set. ``callback(objective)`` is called
    after every sweep when given.

    Parameters
    ----------
    columns : StandardizedColumns or array_like
        Column provider, or a raw n x p matrix whose columns are the mains.
    y : array_like
        Response; centered internally.
    lam : float
        Penalty level, > 0.
    warm_start : dict, optional
        Starting coefficients on the standardized scale, keyed by effect.
    candidates : sequence of EffectId, optional
        Effects allowed to be nonzero; all mains by default.

    Raises
    ------
    MaxIterations
        If ``max_sweeps`` sweeps do not reach convergence.
    """
    if not isinstance(columns, StandardizedColumns):
        columns = StandardizedColumns(np.asarray(columns, dtype=np.float64))
    if not lam > 0:
        raise ValueError("lam must be positive")
    if candidates is None:
        candidates = [EffectId(j) for j in range(columns.p)]
    candidates = tuple(candidates)
    y = np.asarray(y, dtype=np.float64)
    yc = y - y.mean()
    n = yc.shape[0]
    x = columns.matrix(candidates)
    scales = columns.scales(candidates)
    live = scales > 0
    m = len(candidates)

    b = np.zeros(m)
    if warm_start:
        for i, e in enumerate(candidates):
            if e in warm_start and live[i]:
                b[i] = warm_start[e]
    r = yc - x @ b if m else yc.copy()
    step_tol = tol * max(float(np.sqrt(yc @ yc / n)), np.finfo(float).tiny)
    sweeps = 0

    def sweep(idx):
        nonlocal r
        delta = 0.0
        for i in idx:
            xi = x[:, i]
            old = b[i]
            z = old + float(xi @ r) / n
            new = z - math.copysign(lam, z) if abs(z) > lam else 0.0
            if new != old:
                r -= (new - old) * xi
                b[i] = new
                delta = max(delta, abs(new - old))
        return delta

    work = set(np.flatnonzero(b))
    while True:
        idx = sorted(work)
        while idx:
            delta = sweep(idx)
            sweeps += 1
            if callback is not None:
                callback(_objective(r, b, lam))
            if sweeps >= max_sweeps:
                raise MaxIterations(f"no convergence after {sweeps} sweeps")
            if delta < step_tol:
                break
        g = x.T @ r / n if m else np.zeros(0)
        act = (b != 0) & live
        viol = np.zeros(m, dtype=bool)
        viol[act] = np.abs(g[act] - lam * np.sign(b[act])) > kkt_tol
        viol[~act & live] = np.abs(g[~act & live]) > lam + kkt_tol
        new = set(np.flatnonzero(viol)) - work
        if not viol.any():
            break
        if not new:
            # converged on the working set but not tightly enough; keep sweeping
            delta = sweep(idx)
            sweeps += 1
            if callback is not None:
                callback(_objective(r, b, lam))
            if sweeps >= max_sweeps:
                raise MaxIterations(f"no convergence after {sweeps} sweeps")
        work |= new

    return LassoState(lam, candidates, b, r, g, scales, sweeps)


def lambda_max(columns, y, candidates=None):
    """Smallest penalty with an all-zero solution."""
    if not isinstance(columns, StandardizedColumns):
        columns = StandardizedColumns(np.asarray(columns, dtype=np.float64))
    if candidates is None:
        candidates = [EffectId(j) for j in range(columns.p)]
    y = np.asarray(y, dtype=np.float64)
    x = columns.matrix(list(candidates))
    if x.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(x.T @ (y - y.mean())))) / columns.n


def lambda_grid(lam_max, n_lambda=100, ratio=1e-3):
    """Log-spaced decreasing grid from ``lam_max`` down to ``ratio * lam_max``."""
    if not lam_max > 0:
        raise ValueError("lam_max must be positive")
    return np.geomspace(lam_max, ratio * lam_max, n_lambda)


def _prune(coef):
    """Drop interactions whose parents are not all in the main-effect support."""
    mains = {e.j for e in coef if e.is_main}
    return {e: v for e, v in coef.items() if e.is_main or all(j in mains for j in e.parents)}


def _run_path(columns, y, grid, mains, dynamic, fixed_candidates, max_support):
    """Solve along ``grid``; return the distinct (pruned) supports in order."""
    supports = [()]
    warm = {}
    cands = list(fixed_candidates)
    for lam in grid:
        state = coordinate_descent(columns, y, lam, warm, cands)
        coef = _prune(state.active)
        support = tuple(sorted(coef))
        if len(support) > max_support:
            break
        if support != supports[-1]:
            supports.append(support)
        warm = coef
        if dynamic:
            parents = sorted(e.j for e in support if e.is_main)
            cands = list(mains) + [EffectId(j, k) for a, j in enumerate(parents) for k in parents[a:]]
    return supports


def _tune(data, supports, criterion, method):
    n = data.n
    yc = data.y - data.y.mean()
    y_sq = float(yc @ yc)
    path = []
    best = None
    for s in supports:
        if len(s) >= n - 1:
            break
        _, _, rss = refit(data.x, data.y, s)
        crit = criterion_value(criterion, capped_rss(rss, y_sq), n, len(s))
        path.append(PathStep(None, s, rss, crit))
        if best is None or crit < best.criterion:
            best = path[-1]
    coefs, b0, _ = refit(data.x, data.y, best.model)
    return SelectionResult(
        method=method,
        path=path,
        selected=best.model,
        coefficients=coefs,
        intercept=b0,
        criterion=criterion,
    )


def _grid_for(columns, y, candidates, grid, n_lambda):
    if grid is not None:
        return np.asarray(grid, dtype=np.float64)
    lmax = lambda_max(columns, y, candidates)
    if lmax <= 0:
        return np.zeros(0)
    return lambda_grid(lmax, n_lambda)


def iform_lasso(data, grid=None, criterion=CriterionKind(), *, n_lambda=100, max_support=None):
    """LASSO path whose candidate set follows the marginality principle.

    At each penalty level the solve is restricted to all mains plus the
    interactions whose parents were all in the previous support. Interactions
    that lose a parent are zeroed before the next level, so every support on
    the path is hierarchical.
    """
    columns = StandardizedColumns(data.x)
    mains = [EffectId(j) for j in range(data.p)]
    grid = _grid_for(columns, data.y, mains, grid, n_lambda)
    if max_support is None:
        max_support = default_max_steps(data.n)
    supports = _run_path(columns, data.y, grid, mains, True, mains, max_support)
    return _tune(data, supports, criterion.with_dim(data.p), "iFORM-LASSO")


def two_stage_lasso(data, grid=None, criterion=CriterionKind(), *, n_lambda=100, max_support=None):
    """LASSO on mains, then LASSO on the chosen mains and their interactions.

    ``grid`` applies to stage one; stage two builds its own grid from its
    candidate set.
    """
    columns = StandardizedColumns(data.x)
    if max_support is None:
        max_support = default_max_steps(data.n)
    mains = [EffectId(j) for j in range(data.p)]
    grid1 = _grid_for(columns, data.y, mains, grid, n_lambda)
    s1_supports = _run_path(columns, data.y, grid1, mains, False, mains, max_support)
    s1 = _tune(data, s1_supports, criterion.with_dim(data.p), "two-stage LASSO (stage one)")

    chosen = sorted(s1.selected_mains)
    cands = [EffectId(j) for j in chosen] + [EffectId(j, k) for a, j in enumerate(chosen) for k in chosen[a:]]
    if cands:
        grid2 = _grid_for(columns, data.y, cands, None, n_lambda)
        s2_supports = _run_path(columns, data.y, grid2, mains, False, cands, max_support)
    else:
        s2_supports = [()]
    s2 = _tune(data, s2_supports, criterion.with_dim(len(cands) or 1), "two-stage LASSO")
    s2.stage_one = s1
    return s2
