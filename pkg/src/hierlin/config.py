"""Plain-text experiment configuration.

An INI document with four sections. Predictor indices are 1-based, as in
the ``X1..Xp`` column names::

    [design]
    n = 200
    p = 1000
    family = gaussian_ar1      ; or uniform01
    rho = 0.5

    [truth]
    p = 1000
    beta0 = 0
    beta = 2, 0, 2, 0, 2, 0, 2, 0, 2, 0, ...   ; dense, p values
    gamma =
        1, 3, 1.5                              ; one "j, k, value" per line
        1, 7, 1.7
    sigma = 2

    [method]
    name = iform               ; two_stage_fs, iform, two_stage_lasso, iform_lasso, oracle
    replicates = 100
    base_seed = 42
    test_size = 200            ; optional, defaults to n

    [criterion]
    kind = ebic                ; or bic
    gamma_e = 1.0
    ambient_dim = 1000         ; optional, otherwise chosen per stage

Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import re

import numpy as np

from .criteria import CriterionKind
from .data_gen import DesignConfig, table1_design, table1_spec
from .evaluation import ExperimentConfig
from .model_space import QuadraticModelSpec


class ConfigError(ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass


SCHEMA = {
    "design": {"n": True, "p": True, "family": False, "rho": False},
    "truth": {"p": False, "beta0": False, "beta": True, "gamma": False, "sigma": True, "centered": False},
    "method": {"name": True, "replicates": False, "base_seed": False, "test_size": False},
    "criterion": {"kind": False, "gamma_e": False, "ambient_dim": False},
}

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^([^\s=:;#\[][^=:]*?)\s*[=:]")


def _key_lines(text):
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        m = _SECTION.match(raw)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = _KEY.match(raw)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines

    def fail(self, section, key, message):
        raise ValidationError(message, self.lines.get((section, key)), f"{section}.{key}")

    def raw(self, section, key):
        if section not in self.parser or key not in self.parser[section]:
            return None
        return self.parser[section][key]

    def get(self, section, key, conv, default=None):
        value = self.raw(section, key)
        if value is None:
            if SCHEMA[section][key]:
                raise ValidationError("required key is missing", self.lines.get((section, None)), f"{section}.{key}")
            return default
        try:
            return conv(value.strip())
        except ValueError as exc:
            self.fail(section, key, f"cannot parse {value.strip()!r}: {exc}")


def _to_bool(s):
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(s):
    return [float(v) for v in re.split(r"[,\s]+", s.strip()) if v]


def _triples(s):
    out = {}
    for line in s.strip().splitlines():
        line = line.split(";")[0].strip()
        if not line:
            continue
        parts = [v for v in re.split(r"[,\s]+", line) if v]
        if len(parts) != 3:
            raise ValueError(f"expected 'j, k, value', got {line!r}")
        j, k = int(parts[0]), int(parts[1])
        if j < 1 or k < 1:
            raise ValueError("indices are 1-based")
        pair = (min(j, k) - 1, max(j, k) - 1)
        if pair in out:
            raise ValueError(f"duplicate interaction {j}, {k}")
        out[pair] = float(parts[2])
    return out


def parse_config(text):
    """Parse an experiment config from text; see the module docstring."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    lines = _key_lines(text)
    for section in parser.sections():
        if section not in SCHEMA:
            raise ParseError(f"unknown section [{section}]", lines.get((section, None)))
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ParseError(f"unknown key {key!r}", lines.get((section, key)), f"{section}.{key}")
    for section in ("design", "truth", "method"):
        if section not in parser:
            raise ValidationError(f"missing section [{section}]")

    rd = _Reader(parser, lines)
    n = rd.get("design", "n", int)
    p = rd.get("design", "p", int)
    family = rd.get("design", "family", str, "gaussian_ar1")
    rho = rd.get("design", "rho", float, 0.5)
    if family == "gaussian_ar1" and not abs(rho) < 1:
        rd.fail("design", "rho", "|rho| < 1 is required")
    try:
        design = DesignConfig(n, p, family, rho)
    except ValueError as exc:
        raise ValidationError(str(exc), lines.get(("design", None)), "design") from None

    tp = rd.get("truth", "p", int, p)
    if tp != p:
        rd.fail("truth", "p", f"truth p={tp} differs from design p={p}")
    beta = rd.get("truth", "beta", _floats)
    if len(beta) != p:
        rd.fail("truth", "beta", f"expected {p} values, got {len(beta)}")
    gamma = rd.get("truth", "gamma", _triples, {})
    if any(k >= p for _, k in gamma):
        rd.fail("truth", "gamma", f"interaction index exceeds p={p}")
    sigma = rd.get("truth", "sigma", float)
    if not sigma > 0:
        rd.fail("truth", "sigma", "sigma > 0 is required")
    truth = QuadraticModelSpec(
        p,
        rd.get("truth", "beta0", float, 0.0),
        np.array(beta),
        gamma,
        sigma,
        rd.get("truth", "centered", _to_bool, False),
    )

    method = rd.get("method", "name", str)
    replicates = rd.get("method", "replicates", int, 100)
    if replicates < 1:
        rd.fail("method", "replicates", "replicates >= 1 is required")
    test_size = rd.get("method", "test_size", int, None)
    if test_size is not None and test_size < 2:
        rd.fail("method", "test_size", "test_size >= 2 is required")
    kind = rd.get("criterion", "kind", str, "ebic") if "criterion" in parser else "ebic"
    gamma_e = rd.get("criterion", "gamma_e", float, CriterionKind.gamma_e) if "criterion" in parser else CriterionKind.gamma_e
    ambient = rd.get("criterion", "ambient_dim", int, None) if "criterion" in parser else None
    try:
        criterion = CriterionKind(kind, gamma_e, ambient)
    except ValueError as exc:
        raise ValidationError(str(exc), lines.get(("criterion", None)), "criterion") from None
    try:
        return ExperimentConfig(
            design=design,
            truth=truth,
            method=method,
            criterion=criterion,
            replicates=replicates,
            base_seed=rd.get("method", "base_seed", int, 0),
            test_size=test_size,
        )
    except ValueError as exc:
        raise ValidationError(str(exc), lines.get(("method", None)), "method") from None


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    """Text form of ``cfg`` that :func:`parse_config` reads back exactly."""
    d, t, c = cfg.design, cfg.truth, cfg.criterion
    out = [
        "[design]",
        f"n = {d.n}",
        f"p = {d.p}",
        f"family = {d.family}",
        f"rho = {d.rho!r}",
        "",
        "[truth]",
        f"p = {t.p}",
        f"beta0 = {float(t.beta0)!r}",
        "beta = " + ", ".join(repr(float(b)) for b in t.beta),
    ]
    if t.gamma:
        out.append("gamma =")
        out.extend(f"    {j + 1}, {k + 1}, {v!r}" for (j, k), v in sorted(t.gamma.items()))
    out += [
        f"sigma = {float(t.sigma)!r}",
        f"centered = {str(t.centered).lower()}",
        "",
        "[method]",
        f"name = {cfg.method}",
        f"replicates = {cfg.replicates}",
        f"base_seed = {cfg.base_seed}",
    ]
    if cfg.test_size is not None:
        out.append(f"test_size = {cfg.test_size}")
    out += ["", "[criterion]", f"kind = {c.name}", f"gamma_e = {c.gamma_e!r}"]
    if c.ambient_dim is not None:
        out.append(f"ambient_dim = {c.ambient_dim}")
    return "\n".join(out) + "\n"


def table1_config(method="iform", replicates=100, base_seed=42, criterion=None):
    """The p = 1000, n = 200 simulation as an experiment config."""
    return ExperimentConfig(
        design=table1_design(),
        truth=table1_spec(),
        method=method,
        criterion=criterion or CriterionKind(),
        replicates=replicates,
        base_seed=base_seed,
    )
