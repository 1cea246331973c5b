"""Seeded data generating processes.

Random numbers come from numpy's counter-based Philox generator. Every draw is
keyed by an integer seed; Monte Carlo replicate ``r`` derives its seeds by
hashing ``(base_seed, r, stream)`` through :class:`numpy.random.SeedSequence`
(see :func:`replicate_seed`), so replicates are independent of execution
order. Standard normals use numpy's ziggurat sampler
(``Generator.standard_normal``).
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky
from .model_space import QuadraticModelSpec

GAUSSIAN_AR1 = "gaussian_ar1"
UNIFORM01 = "uniform01"
FAMILIES = (GAUSSIAN_AR1, UNIFORM01)

# stream ids for replicate_seed
DESIGN, NOISE, TEST_DESIGN, TEST_NOISE = range(4)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def replicate_seed(base_seed, replicate, stream):
    """64-bit seed for one stream of one replicate."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(replicate), int(stream)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class DesignConfig:
    n: int
    p: int
    family: str = GAUSSIAN_AR1
    rho: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown design family {self.family!r}")
        if self.family == GAUSSIAN_AR1 and not abs(self.rho) < 1:
            raise ValueError("|rho| < 1 is required")


@dataclass(frozen=True)
class Dataset:
    """Raw predictors ``x`` (n x p) and response ``y``."""

    x: np.ndarray
    y: np.ndarray
    truth: QuadraticModelSpec | None = None
    column_means: np.ndarray = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"x has shape {x.shape} but y has {y.shape[0]} rows")
        if self.truth is not None and self.truth.p != x.shape[1]:
            raise ValueError("truth dimension does not match x")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.column_means is None:
            object.__setattr__(self, "column_means", x.mean(axis=0))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def centered(self):
        """Sample-centered predictors and response."""
        return self.x - self.column_means, self.y - self.y.mean()


def ar1_covariance(p, rho):
    """Matrix with entries ``rho ** |j - k|``."""
    if not abs(rho) < 1:
        raise ValueError("|rho| < 1 is required")
    idx = np.arange(p)
    return float(rho) ** np.abs(idx[:, None] - idx[None, :])


@functools.lru_cache(maxsize=8)
def _ar1_factor(p, rho):
    f = cholesky(ar1_covariance(p, rho))
    f.setflags(write=False)
    return f


def sample_design(cfg, seed=None):
    """Draw an n x p design. ``seed`` overrides ``cfg.seed``."""
    rng = make_rng(cfg.seed if seed is None else seed)
    if cfg.family == UNIFORM01:
        return rng.random((cfg.n, cfg.p))
    z = rng.standard_normal((cfg.n, cfg.p))
    if cfg.rho == 0:
        return z
    return z @ _ar1_factor(cfg.p, float(cfg.rho)).T


def generate_response(x, spec, seed):
    """``spec.signal(x)`` plus i.i.d. N(0, sigma^2) noise."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != spec.p:
        raise ValueError("design dimension does not match spec")
    noise = make_rng(seed).standard_normal(x.shape[0])
    return spec.signal(x) + spec.sigma * noise


def make_dataset(cfg, spec, seed=None, noise_seed=None):
    """Design plus response; the noise seed defaults to a stream derived from the design seed."""
    seed = cfg.seed if seed is None else seed
    x = sample_design(cfg, seed)
    if noise_seed is None:
        noise_seed = replicate_seed(seed, 0, NOISE)
    return Dataset(x, generate_response(x, spec, noise_seed), truth=spec)


def interaction_column(x, j, k, centered=True):
    """Elementwise product of columns j and k, optionally minus its sample mean."""
    z = x[:, j] * x[:, k]
    if centered:
        z = z - z.mean()
    return z


def turlach_spec(c=0.5, p=10, sigma=1.0):
    """``Y = (X1 - c)^2 + X2 + X3 + X4 + X5 + eps`` in expanded form."""
    beta = np.zeros(p)
    beta[0] = -2.0 * c
    beta[1:5] = 1.0
    return QuadraticModelSpec(p, c * c, beta, {(0, 0): 1.0}, sigma)


def table1_spec(p=1000, sigma=2.0):
    """Sparse truth of the p = 1000 simulation: five mains and four products."""
    if p < 9:
        raise ValueError("the simulation truth needs p >= 9")
    beta = np.zeros(p)
    beta[[0, 2, 4, 6, 8]] = 2.0
    gamma = {(0, 2): 1.5, (0, 6): 1.7, (4, 6): 1.9, (6, 8): 2.1}
    return QuadraticModelSpec(p, 0.0, beta, gamma, sigma, centered=True)


def table1_design(seed=0):
    return DesignConfig(n=200, p=1000, family=GAUSSIAN_AR1, rho=0.5, seed=seed)


def write_csv(dataset, path):
    """Dump ``X1..Xp,Y`` with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"X{j + 1}" for j in range(dataset.p)] + ["Y"])
        for row, yi in zip(dataset.x, dataset.y):
            w.writerow([f"{v:.17g}" for v in row] + [f"{yi:.17g}"])


def read_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Dataset(data[:, :-1], data[:, -1])
