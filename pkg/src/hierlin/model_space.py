"""Effects, quadratic model specifications and their coding-invariant semantics.

Indices are 0-based throughout the Python API. Human-facing names
(``X1``, ``X1:X3``) and the text formats are 1-based.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


@functools.total_ordering
@dataclass(frozen=True)
class EffectId:
    """A main effect ``X_j`` (``k is None``) or an interaction ``X_j X_k`` with ``j <= k``.

    Ordering is canonical: all mains first by index, then interactions
    lexicographically by ``(j, k)``.
    """

    j: int
    k: int | None = None

    def __post_init__(self):
        if self.j < 0 or (self.k is not None and self.k < 0):
            raise ValueError(f"negative index in {self!r}")
        if self.k is not None and self.k < self.j:
            j, k = self.k, self.j
            object.__setattr__(self, "j", j)
            object.__setattr__(self, "k", k)

    @classmethod
    def main(cls, j):
        return cls(int(j))

    @classmethod
    def pair(cls, j, k):
        return cls(int(min(j, k)), int(max(j, k)))

    @property
    def is_main(self):
        return self.k is None

    @property
    def is_quadratic(self):
        return self.k == self.j

    @property
    def parents(self):
        """Parent main indices (one for a quadratic, two for a product)."""
        if self.k is None:
            return ()
        return (self.j,) if self.j == self.k else (self.j, self.k)

    @property
    def key(self):
        return (0, self.j, -1) if self.k is None else (1, self.j, self.k)

    def __lt__(self, other):
        if not isinstance(other, EffectId):
            return NotImplemented
        return self.key < other.key

    def __str__(self):
        if self.k is None:
            return f"X{self.j + 1}"
        return f"X{self.j + 1}:X{self.k + 1}"

    def __repr__(self):
        return f"EffectId({self})"


def n_effects(p):
    """Number of candidate regressors with all mains, products and squares."""
    return (p * p + 3 * p) // 2


def _canonical_gamma(gamma):
    out = {}
    for (j, k), v in dict(gamma).items():
        pair = (int(min(j, k)), int(max(j, k)))
        out[pair] = out.get(pair, 0.0) + float(v)
    return out


@dataclass(frozen=True)
class QuadraticModelSpec:
    """Ground-truth model ``Y = beta0 + sum beta_j X_j + sum_{j<=k} gamma_jk X_j X_k + eps``.

    ``gamma`` maps canonical pairs ``(j, k)`` with ``j <= k`` to coefficients;
    keys are canonicalized on construction. ``centered`` records whether the
    coordinates are mean-zero, which is what gives ``sign(beta)`` a
    parametrization-free meaning.
    """

    p: int
    beta0: float
    beta: np.ndarray
    gamma: Mapping[tuple[int, int], float] = field(default_factory=dict)
    sigma: float = 1.0
    centered: bool = False

    def __post_init__(self):
        beta = np.array(self.beta, dtype=np.float64).reshape(-1)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", _canonical_gamma(self.gamma))
        if beta.shape[0] != self.p:
            raise ValueError(f"beta has length {beta.shape[0]}, expected p={self.p}")
        if not np.all(np.isfinite(beta)) or not np.isfinite(self.beta0):
            raise ValueError("coefficients must be finite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        for j, k in self.gamma:
            if not (0 <= j <= k < self.p):
                raise ValueError(f"interaction ({j}, {k}) out of range for p={self.p}")

    def __eq__(self, other):
        if not isinstance(other, QuadraticModelSpec):
            return NotImplemented
        return (
            self.p == other.p
            and self.beta0 == other.beta0
            and np.array_equal(self.beta, other.beta)
            and self.gamma == other.gamma
            and self.sigma == other.sigma
            and self.centered == other.centered
        )

    __hash__ = None

    def gamma_matrix(self):
        """Symmetric p x p matrix ``G`` with ``G[j, k] = G[k, j] = gamma_jk``."""
        g = np.zeros((self.p, self.p))
        for (j, k), v in self.gamma.items():
            g[j, k] = v
            g[k, j] = v
        return g

    def coefficients(self):
        """Nonzero coefficients keyed by :class:`EffectId` (intercept excluded)."""
        out = {EffectId(int(j)): float(b) for j, b in enumerate(self.beta) if b != 0}
        out.update({EffectId(j, k): v for (j, k), v in self.gamma.items() if v != 0})
        return out

    def support(self):
        """Effects of the true model: important mains plus nonzero interactions."""
        sets = importance_sets(self)
        return sorted([EffectId(j) for j in sets.main_set] + [EffectId(j, k) for j, k in sets.interaction_set])

    def signal(self, x):
        """Noise-free mean response at the rows of ``x``."""
        x = np.asarray(x, dtype=np.float64)
        out = self.beta0 + x @ self.beta
        for (j, k), v in self.gamma.items():
            out = out + v * x[:, j] * x[:, k]
        return out


@dataclass(frozen=True)
class CodingTransform:
    """Coordinate change ``X~_j = a_j (X_j - c_j)`` with every ``a_j > 0``."""

    a: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        if a.shape != c.shape:
            raise ValueError("a and c must have the same length")
        if not np.all(a > 0):
            raise ValueError("scale factors must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    @classmethod
    def identity(cls, p):
        return cls(np.ones(p), np.zeros(p))

    def __call__(self, x):
        return self.a * (np.asarray(x, dtype=np.float64) - self.c)

    def then(self, other):
        """The transform equal to applying ``self`` first and ``other`` second."""
        # a2 (a1 (x - c1) - c2) = a1 a2 (x - (c1 + c2 / a1))
        return CodingTransform(self.a * other.a, self.c + other.c / self.a)


def apply_transform(spec, t):
    """Re-express ``spec`` in the transformed coordinates ``X~ = t(X)``.

    Substituting ``X_j = X~_j / a_j + c_j`` gives
    ``gamma~_jk = gamma_jk / (a_j a_k)``,
    ``beta~_j = (beta_j + sum_k G_jk c_k (1 + [j == k])) / a_j`` and
    ``beta~_0 = beta0 + sum_j beta_j c_j + sum_{j<=k} gamma_jk c_j c_k``,
    where ``G`` is the symmetric interaction matrix. The quadratic term
    ``gamma_jj X_j^2`` contributes ``2 gamma_jj c_j`` to the linear coefficient.
    """
    if t.a.shape[0] != spec.p:
        raise ValueError("transform dimension does not match spec")
    a, c = t.a, t.c
    g = spec.gamma_matrix()
    # G c counts gamma_jj c_j once; the quadratic needs it twice
    linear = spec.beta + g @ c + np.diag(g) * c
    beta = linear / a
    beta0 = spec.beta0 + float(spec.beta @ c)
    gamma = {}
    for (j, k), v in spec.gamma.items():
        beta0 += v * c[j] * c[k]
        gamma[(j, k)] = v / (a[j] * a[k])
    centered = spec.centered and not np.any(c)
    return QuadraticModelSpec(spec.p, beta0, beta, gamma, spec.sigma, centered)


@dataclass(frozen=True)
class ImportanceSets:
    main_set: frozenset
    interaction_set: frozenset
    beta_support: frozenset
    sign_vector: np.ndarray


def importance_sets(spec, tol=0.0):
    """Important mains and interactions in a coding-invariant sense.

    ``X_j`` is important when ``beta_j^2 + sum_k gamma_jk^2 > tol^2`` and
    ``X_j X_k`` when ``|gamma_jk| > tol``. ``beta_support`` and
    ``sign_vector`` depend on the parametrization; the sign is only
    meaningful when ``spec.centered`` is true.
    """
    beta = np.where(np.abs(spec.beta) > tol, spec.beta, 0.0)
    gamma = {pair: v for pair, v in spec.gamma.items() if abs(v) > tol}
    weight = beta**2
    for (j, k), v in gamma.items():
        weight[j] += v * v
        if k != j:
            weight[k] += v * v
    main = frozenset(int(j) for j in np.flatnonzero(weight > tol * tol))
    return ImportanceSets(
        main_set=main,
        interaction_set=frozenset(gamma),
        beta_support=frozenset(int(j) for j in np.flatnonzero(beta)),
        sign_vector=np.sign(beta).astype(int),
    )


def check_heredity(main_set, interaction_set, mode="strong"):
    """Check an interaction set against a main-effect set.

    Strong heredity needs both parents present, weak needs at least one; a
    quadratic ``(j, j)`` needs ``j`` under either mode.

    Returns
    -------
    ok : bool
    violations : list of tuple
        Offending pairs in canonical order.
    """
    if mode not in ("strong", "weak"):
        raise ValueError(f"unknown heredity mode {mode!r}")
    main_set = set(main_set)
    bad = []
    for j, k in sorted((min(p), max(p)) for p in interaction_set):
        if mode == "strong":
            ok = j in main_set and k in main_set
        else:
            ok = j in main_set or k in main_set
        if not ok:
            bad.append((j, k))
    return not bad, bad


def split_effects(effects: Iterable[EffectId]):
    """Split effects into a main index set and a canonical pair set."""
    mains, pairs = set(), set()
    for e in effects:
        if e.is_main:
            mains.add(e.j)
        else:
            pairs.add((e.j, e.k))
    return mains, pairs


def is_hierarchical(effects):
    mains, pairs = split_effects(effects)
    return check_heredity(mains, pairs, "strong")[0]
