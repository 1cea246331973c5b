"""Dense linear-algebra kernels.

Cholesky factorization, least-squares fits through the normal equations and
an incrementally grown fit whose Cholesky factor is extended one column at a
time, which is what the greedy selectors score candidates against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

PIVOT_RTOL = 1e-12
COLLINEAR_RTOL = 1e-10


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot falls below the relative tolerance."""


class RankDeficient(np.linalg.LinAlgError):
    """Raised when a Gram matrix cannot be factorized."""


class DegenerateColumn(np.linalg.LinAlgError):
    """Raised when a column added to a fit lies in the span of the active set."""


class DegenerateColumnWarning(RuntimeWarning):
    """Issued when a scored candidate is collinear with the active set."""


def cholesky(a):
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    a : array_like, shape (m, m)
        Symmetric matrix.

    Returns
    -------
    ndarray, shape (m, m)
        ``L`` with ``L @ L.T == a``.

    Raises
    ------
    NotPositiveDefinite
        If any pivot ``L[i, i] ** 2`` is at most ``1e-12 * max(diag(a))``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return np.zeros_like(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    max_diag = float(np.max(np.diag(a)))
    if max_diag <= 0:
        raise NotPositiveDefinite("non-positive diagonal")
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(lower) ** 2
    if np.min(pivots) <= PIVOT_RTOL * max_diag:
        i = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {i} is {pivots[i]:.3g}, below tolerance")
    return lower


def cho_solve(lower, b):
    """Solve ``(L L^T) x = b`` given the lower Cholesky factor."""
    z = solve_triangular(lower, b, lower=True, check_finite=False)
    return solve_triangular(lower.T, z, lower=False, check_finite=False)


@dataclass(frozen=True)
class LsFit:
    """Least-squares solution.

    ``coefficients`` excludes the intercept, which is stored separately
    (0.0 when the fit has none).
    """

    coefficients: np.ndarray
    intercept: float
    rss: float
    dof: int

    def predict(self, x):
        return np.asarray(x, dtype=np.float64) @ self.coefficients + self.intercept


def least_squares(x, y, intercept=True):
    """Ordinary least squares through a Cholesky solve of the normal equations.

    With ``intercept=True`` the columns and response are centered first and
    the intercept is recovered from the means, which keeps the Gram matrix
    well conditioned for uncentered designs.

    Raises
    ------
    RankDeficient
        If the Gram matrix is not numerically positive definite.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n, k = x.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    n_params = k + int(intercept)
    if n <= n_params:
        raise ValueError(f"need more rows ({n}) than parameters ({n_params})")

    if intercept:
        x_mean = x.mean(axis=0)
        y_mean = float(y.mean())
        xc = x - x_mean
        yc = y - y_mean
    else:
        xc, yc = x, y

    if k == 0:
        coef = np.zeros(0)
    else:
        try:
            lower = cholesky(xc.T @ xc)
        except NotPositiveDefinite as exc:
            raise RankDeficient(f"Gram matrix is singular: {exc}") from None
        coef = cho_solve(lower, xc.T @ yc)

    resid = yc - xc @ coef
    b0 = y_mean - float(x_mean @ coef) if intercept else 0.0
    return LsFit(coefficients=coef, intercept=b0, rss=float(resid @ resid), dof=n - n_params)


class IncrementalFit:
    """Least-squares fit on a growing set of centered columns.

    Keeps the lower Cholesky factor of the active Gram matrix and the current
    residual. Adding a column extends the factor by one row; scoring a
    candidate costs one triangular solve plus two inner products of length n.

    The response and every column passed in are expected to be centered
    already; the implicit intercept is then exact.
    """

    def __init__(self, y):
        y = np.asarray(y, dtype=np.float64)
        self.n = y.shape[0]
        self.y = y
        self._cols = np.empty((self.n, 0))
        self._lower = np.empty((0, 0))
        self._xty = np.empty(0)
        self.coef = np.empty(0)
        self.residual = y.copy()
        self.rss = float(y @ y)

    @property
    def k(self):
        return self._cols.shape[1]

    @property
    def columns(self):
        return self._cols

    def _project(self, c):
        # rows of L^{-1} A^T C; squared column norms give the explained part of |c|^2
        if self.k == 0:
            return np.zeros((0,) + c.shape[1:])
        return solve_triangular(self._lower, self._cols.T @ c, lower=True, check_finite=False)

    def gains(self, candidates):
        """RSS reduction for each column of ``candidates``.

        Returns
        -------
        gains : ndarray, shape (m,)
            ``RSS(current) - RSS(current + column)``; 0 for degenerate columns.
        degenerate : ndarray of bool, shape (m,)
            Columns whose variance left after projecting out the active set is
            below ``1e-10`` times their own.
        """
        c = np.asarray(candidates, dtype=np.float64)
        if c.ndim == 1:
            c = c[:, None]
        sq = np.einsum("ij,ij->j", c, c)
        w = self._project(c)
        left = sq - np.einsum("ij,ij->j", w, w)
        degenerate = left <= COLLINEAR_RTOL * sq
        cr = c.T @ self.residual
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(degenerate, 0.0, cr**2 / np.where(degenerate, 1.0, left))
        return np.maximum(g, 0.0), degenerate

    def add(self, column):
        """Append a column to the active set and refresh the fit."""
        c = np.asarray(column, dtype=np.float64)
        sq = float(c @ c)
        w = self._project(c)
        d2 = sq - float(w @ w)
        if d2 <= COLLINEAR_RTOL * sq or sq == 0.0:
            raise DegenerateColumn("column is collinear with the active set")
        k = self.k
        lower = np.zeros((k + 1, k + 1))
        lower[:k, :k] = self._lower
        lower[k, :k] = w
        lower[k, k] = np.sqrt(d2)
        self._lower = lower
        self._cols = np.column_stack([self._cols, c])
        self._xty = np.append(self._xty, c @ self.y)
        self.coef = cho_solve(self._lower, self._xty)
        self.residual = self.y - self._cols @ self.coef
        self.rss = float(self.residual @ self.residual)

    def copy(self):
        other = IncrementalFit.__new__(IncrementalFit)
        other.n = self.n
        other.y = self.y
        other._cols = self._cols
        other._lower = self._lower
        other._xty = self._xty
        other.coef = self.coef
        other.residual = self.residual
        other.rss = self.rss
        return other


def greedy_gain(state, candidate_column):
    """RSS drop from adding one column to ``state``.

    A column collinear with the active set scores 0 and triggers a
    :class:`DegenerateColumnWarning`.
    """
    g, degenerate = state.gains(np.asarray(candidate_column, dtype=np.float64)[:, None])
    if degenerate[0]:
        warnings.warn("candidate is collinear with the active set", DegenerateColumnWarning, stacklevel=2)
    return float(g[0])
