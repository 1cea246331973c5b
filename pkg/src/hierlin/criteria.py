"""Model-comparison criteria and fit statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class CriterionKind:
    """``bic`` or ``ebic``; lower values are better.

    ``ambient_dim`` is the size of the candidate pool the EBIC penalty is
    charged against. Selectors fill it in per stage via :meth:`with_dim` when
    it is left as ``None``.
    """

    name: str = "ebic"
    gamma_e: float = 1.0
    ambient_dim: int | None = None

    def __post_init__(self):
        if self.name not in ("bic", "ebic"):
            raise ValueError(f"unknown criterion {self.name!r}")
        if not 0.0 <= self.gamma_e <= 1.0:
            raise ValueError("gamma_e must lie in [0, 1]")
        if self.ambient_dim is not None and self.ambient_dim < 1:
            raise ValueError("ambient_dim must be at least 1")

    def with_dim(self, d):
        """Copy with ``ambient_dim = d`` unless one was fixed explicitly."""
        if self.ambient_dim is not None:
            return self
        return replace(self, ambient_dim=max(int(d), 1))

    def label(self):
        return "bic" if self.name == "bic" else f"ebic(gamma_e={self.gamma_e:g})"


BIC = CriterionKind("bic")


def criterion_value(kind, rss, n, k):
    """``n log(rss / n) + k log n``, plus ``2 gamma_e k log d`` for EBIC."""
    if not rss > 0:
        raise DomainError(f"rss must be positive, got {rss}")
    if not n > k >= 0:
        raise DomainError(f"need n > k >= 0, got n={n}, k={k}")
    value = n * math.log(rss / n) + k * math.log(n)
    if kind.name == "ebic" and k:
        if kind.ambient_dim is None:
            raise DomainError("ebic needs ambient_dim")
        value += 2.0 * kind.gamma_e * k * math.log(kind.ambient_dim)
    return value


def capped_rss(rss, y_sq):
    """Floor an RSS at ``1e-12 * |y|^2`` so perfect fits stay scoreable."""
    return max(float(rss), 1e-12 * float(y_sq), np.finfo(float).tiny)


def r_squared_oos(y_test, y_pred):
    """Out-of-sample R^2 in percent."""
    y_test = np.asarray(y_test, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_test.shape != y_pred.shape or y_test.size < 2:
        raise DomainError("need two equal-length vectors of length >= 2")
    tss = float(np.sum((y_test - y_test.mean()) ** 2))
    if tss == 0:
        raise DomainError("test response is constant")
    return 100.0 * (1.0 - float(np.sum((y_test - y_pred) ** 2)) / tss)


def squared_coefficient_error(estimated, truth):
    """Summed squared error over every main and interaction coordinate.

    ``estimated`` maps :class:`~hierlin.model_space.EffectId` to coefficients;
    missing coordinates count as zero. The intercept is not included.
    """
    true = truth.coefficients()
    total = 0.0
    for e in set(true) | set(estimated):
        hi = e.j if e.is_main else e.k
        if not 0 <= hi < truth.p:
            raise ValueError(f"{e} out of range for p={truth.p}")
        diff = float(estimated.get(e, 0.0)) - true.get(e, 0.0)
        total += diff * diff
    return total


def coefficient_mse(estimated, truth):
    """Coefficient estimation error as reported in the simulation table.

    The l2 distance ``sqrt(sum (coef_hat - coef)^2)`` over all coordinates;
    Monte Carlo averages of this quantity are the ``MSE`` column.
    """
    return math.sqrt(squared_coefficient_error(estimated, truth))
