"""Selection metrics, the Monte Carlo driver and the theory experiments."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import data_gen
from .criteria import CriterionKind, coefficient_mse, r_squared_oos
from .data_gen import Dataset, DesignConfig, QuadraticModelSpec
from .forward import iform, oracle_fit, two_stage_forward
from .lasso import iform_lasso, two_stage_lasso
from .linalg import least_squares
from .model_space import importance_sets

log = logging.getLogger(__name__)

METHODS = {
    "two_stage_fs": "two-stage FS",
    "iform": "iFORM",
    "two_stage_lasso": "two-stage LASSO",
    "iform_lasso": "iFORM-LASSO",
    "oracle": "Oracle",
}

METRIC_COLUMNS = ("Cov", "Cor0", "Inc0", "Ext", "iCov", "iCor0", "iInc0", "iExt", "size", "MSE", "Rsq")


@dataclass(frozen=True)
class ExperimentConfig:
    design: DesignConfig
    truth: QuadraticModelSpec
    method: str = "iform"
    criterion: CriterionKind = CriterionKind()
    replicates: int = 100
    base_seed: int = 0
    test_size: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {sorted(METHODS)}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.truth.p != self.design.p:
            raise ValueError("truth dimension does not match design")
        if self.test_size is not None and self.test_size < 2:
            raise ValueError("test_size must be at least 2")

    @property
    def n_test(self):
        return self.design.n if self.test_size is None else self.test_size


@dataclass(frozen=True)
class MetricsReport:
    method: str
    cov: float
    cor0: float
    inc0: float
    ext: float
    icov: float
    icor0: float
    iinc0: float
    iext: float
    size: float
    mse: float
    rsq: float
    replicates: int
    failed: int = 0
    hierarchy_violations: int = 0

    def row(self):
        """Values in table column order."""
        return (self.cov, self.cor0, self.inc0, self.ext, self.icov, self.icor0,
                self.iinc0, self.iext, self.size, self.mse, self.rsq)

    def to_dict(self):
        return asdict(self)


def run_method(method, data, criterion, truth=None):
    """Dispatch one selection procedure by its config name."""
    if method == "two_stage_fs":
        return two_stage_forward(data, criterion)
    if method == "iform":
        return iform(data, criterion)
    if method == "two_stage_lasso":
        return two_stage_lasso(data, criterion=criterion)
    if method == "iform_lasso":
        return iform_lasso(data, criterion=criterion)
    if method == "oracle":
        return oracle_fit(data, truth, criterion)
    raise ValueError(f"unknown method {method!r}")


def selection_metrics(result, truth, test=None):
    """Per-replicate selection record.

    Main-effect rates compare selected mains with the important set of
    ``truth``; interaction rates do the same over all ``p (p + 1) / 2``
    products and squares. ``mse`` and ``rsq`` are filled in when a test
    dataset is given (``mse`` needs only the truth).
    """
    p = truth.p
    sets = importance_sets(truth)
    t_main, t_int = set(sets.main_set), set(sets.interaction_set)
    s_main, s_int = set(result.selected_mains), set(result.selected_interactions)
    n_pairs = p * (p + 1) // 2

    def rates(true, sel, universe):
        zeros = universe - len(true)
        correct0 = (zeros - len(sel - true)) / zeros if zeros else 1.0
        incorrect0 = len(true - sel) / len(true) if true else 0.0
        return float(true <= sel), correct0, incorrect0, float(sel == true)

    cov, cor0, inc0, ext = rates(t_main, s_main, p)
    icov, icor0, iinc0, iext = rates(t_int, s_int, n_pairs)
    rec = {
        "cov": cov, "cor0": cor0, "inc0": inc0, "ext": ext,
        "icov": icov, "icor0": icor0, "iinc0": iinc0, "iext": iext,
        "size": float(len(s_main) + len(s_int)),
        "mse": coefficient_mse(result.coefficients, truth),
        "rsq": math.nan,
        "hierarchical": result.is_hierarchical(),
    }
    if test is not None:
        rec["rsq"] = r_squared_oos(test.y, result.predict(test.x))
    return rec


def replicate_data(cfg, r):
    """Training and test datasets of replicate ``r``; pure function of (cfg, r)."""
    seed = cfg.base_seed
    design = cfg.design
    x = data_gen.sample_design(design, data_gen.replicate_seed(seed, r, data_gen.DESIGN))
    y = data_gen.generate_response(x, cfg.truth, data_gen.replicate_seed(seed, r, data_gen.NOISE))
    test_design = DesignConfig(cfg.n_test, design.p, design.family, design.rho, design.seed)
    xt = data_gen.sample_design(test_design, data_gen.replicate_seed(seed, r, data_gen.TEST_DESIGN))
    yt = data_gen.generate_response(xt, cfg.truth, data_gen.replicate_seed(seed, r, data_gen.TEST_NOISE))
    return Dataset(x, y, truth=cfg.truth), Dataset(xt, yt, truth=cfg.truth)


def run_replicate(cfg, r):
    """One replicate; numerical failures come back as a record with ``failed`` set."""
    # single-threaded BLAS so results do not depend on the worker layout
    with threadpool_limits(limits=1):
        try:
            train, test = replicate_data(cfg, r)
            result = run_method(cfg.method, train, cfg.criterion, cfg.truth)
            rec = selection_metrics(result, cfg.truth, test)
            rec["failed"] = False
        except (np.linalg.LinAlgError, ArithmeticError, RuntimeError, ValueError) as exc:
            log.warning("replicate %d of %s failed: %s", r, cfg.method, exc)
            rec = {"failed": True, "error": f"{type(exc).__name__}: {exc}"}
    rec["replicate"] = r
    return rec


def _run_chunk(args):
    cfg, idx = args
    return [run_replicate(cfg, r) for r in idx]


def run_replicates(cfg, threads=1):
    """Records for every replicate, in replicate order."""
    idx = list(range(cfg.replicates))
    if threads <= 1 or len(idx) == 1:
        return [run_replicate(cfg, r) for r in idx]
    chunks = [idx[i::threads] for i in range(threads)]
    out = [None] * len(idx)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for chunk in pool.map(_run_chunk, [(cfg, c) for c in chunks if c]):
            for rec in chunk:
                out[rec["replicate"]] = rec
    return out


def aggregate(records, method):
    """Average per-replicate records in replicate order."""
    ok = [r for r in records if not r["failed"]]
    failed = len(records) - len(ok)
    keys = ("cov", "cor0", "inc0", "ext", "icov", "icor0", "iinc0", "iext", "size", "mse", "rsq")
    if ok:
        means = {k: math.fsum(r[k] for r in ok) / len(ok) for k in keys}
    else:
        means = dict.fromkeys(keys, math.nan)
    violations = sum(1 for r in ok if not r["hierarchical"])
    return MetricsReport(method=METHODS.get(method, method), replicates=len(ok), failed=failed,
                         hierarchy_violations=violations, **means)


def monte_carlo(cfg, threads=1, return_records=False):
    """Average selection metrics over ``cfg.replicates`` seeded replicates.

    Output is identical for any ``threads``: every replicate draws from its
    own seed streams and the reduction runs in replicate order.
    """
    records = run_replicates(cfg, threads)
    report = aggregate(records, cfg.method)
    return (report, records) if return_records else report


def mains_only_fit(truth, n_big, family=data_gen.GAUSSIAN_AR1, rho=0.5, seed=0):
    """Least-squares coefficients of y on the mains alone, from one large sample."""
    cfg = DesignConfig(n_big, truth.p, family, rho, seed)
    x = data_gen.sample_design(cfg, data_gen.replicate_seed(seed, 0, data_gen.DESIGN))
    y = data_gen.generate_response(x, truth, data_gen.replicate_seed(seed, 0, data_gen.NOISE))
    return least_squares(x, y, intercept=True).coefficients


def prop2_check(p=10, rho=0.5, truth=None, n_big=500_000, *, family=data_gen.GAUSSIAN_AR1, seed=0):
    """``max_j |beta_hat_j - beta_j|`` for a mains-only fit at large n.

    For designs symmetric about the origin the mains-only regression targets
    the true main-effect vector even though interactions are left out, so the
    deviation shrinks like ``n_big ** -0.5``. ``truth`` defaults to the
    ``p``-dimensional restriction of the simulation truth.
    """
    if truth is None:
        truth = restricted_table1_spec(p)
    beta_hat = mains_only_fit(truth, n_big, family, rho, seed)
    return float(np.max(np.abs(beta_hat - truth.beta)))


def restricted_table1_spec(p=10):
    """The simulation truth keeping only predictors ``X1..Xp``."""
    full = data_gen.table1_spec(p=max(p, 9))
    gamma = {pair: v for pair, v in full.gamma.items() if pair[1] < p}
    return QuadraticModelSpec(p, 0.0, full.beta[:p], gamma, full.sigma, centered=True)


def turlach_curve(c_values, M=200, n=1000, *, criterion=CriterionKind(), base_seed=0,
                  results=None):
    """Frequency with which stage one of two-stage forward selection picks X1.

    Data follow ``Y = (X1 - c)^2 + X2 + ... + X5 + eps`` on an i.i.d.
    Unif[0, 1] design with p = 10. The full two-stage procedure runs on every
    replicate; if ``results`` is a list, each result is appended to it.
    """
    out = {}
    design = DesignConfig(n, 10, data_gen.UNIFORM01)
    for ci, c in enumerate(c_values):
        spec = data_gen.turlach_spec(c)
        hits = 0
        for r in range(M):
            seed = data_gen.replicate_seed(base_seed, r, 100 + ci)
            data = data_gen.make_dataset(design, spec, seed=seed)
            res = two_stage_forward(data, criterion)
            hits += 0 in res.stage_one.selected_mains
            if results is not None:
                results.append(res)
        out[float(c)] = hits / M
    return out
