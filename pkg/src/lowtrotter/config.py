"""Experiment configuration: JSON files validated into an immutable dataclass."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .formulas import FormulaSchedule, schedule_by_name
from .pauli_model import DENSE_LIMIT, PartitionedHamiltonian, from_dict, heisenberg_chain, \
    shift_groups_psd, tfim_chain

WORKERS_ENV = "LOWTROTTER_WORKERS"

# key -> help text; also printed by ``lowtrotter --help``
CONFIG_KEYS = {
    "model": "required; {generator: tfim|heisenberg, n, boundary, j_zz, h_x, j, psd} "
             "or {file: path} or inline {n_qubits, groups}",
    "schedule": "required; {name: lie_trotter|strang|suzuki, order} or {stages: [[m, a], ...], order}",
    "s_grid": "step sizes (default: 8 log-spaced points in [1e-3, 1e-1])",
    "delta_percentiles": "initial-state cutoffs as spectral percentiles (default [25, 50])",
    "delta_values": "absolute cutoffs; replaces delta_percentiles when given",
    "delta_prime": "{policy: auto, theta} (default, theta=1e-3) or {policy: gap, gaps: [...]}",
    "chain_theta": "leakage share allowed in the cutoff chain (default 0.1)",
    "slack": "remainder slack applied to leading-order bounds (default 1.25)",
    "T": "total evolution time for cost runs (default 1.0)",
    "eps": "target accuracy for cost runs (default 1e-6)",
    "cost_orders": "orders for cost-law tables (default [1, 2, 3])",
    "arad_samples": "random local operators in the leakage sweep (default 50)",
    "arad_grid": "cutoff grid size per axis in the leakage sweep (default 5)",
    "dense_limit": "largest qubit count for dense linear algebra (default and maximum 12)",
    "seed": "RNG seed for randomized checks (default 0)",
    "workers": f"thread count (default: ${WORKERS_ENV} or 1)",
    "output": "report path (default: stdout)",
    "format": "csv|json (default csv)",
}


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, path, line: int, col: int, msg: str):
        super().__init__(f"{path}:{line}:{col}: {msg}")
        self.line = line
        self.col = col


class ValidationError(ConfigError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(WORKERS_ENV, f"expected an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(WORKERS_ENV, "must be >= 1")
    return n


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    schedule: dict
    s_grid: tuple[float, ...] = tuple(np.logspace(-3, -1, 8).tolist())
    delta_percentiles: tuple[float, ...] = (25.0, 50.0)
    delta_values: tuple[float, ...] | None = None
    delta_prime: dict = field(default_factory=lambda: {"policy": "auto", "theta": 1e-3})
    chain_theta: float = 0.1
    slack: float = 1.25
    T: float = 1.0
    eps: float = 1e-6
    cost_orders: tuple[int, ...] = (1, 2, 3)
    arad_samples: int = 50
    arad_grid: int = 5
    dense_limit: int = DENSE_LIMIT
    seed: int = 0
    workers: int = 1
    output: str | None = None
    format: str = "csv"
    base_dir: Path = field(default=Path("."), compare=False)

    def build_model(self) -> PartitionedHamiltonian:
        return build_model(self.model, self.base_dir)

    def build_schedule(self, M: int) -> FormulaSchedule:
        sch = self.schedule
        if "stages" in sch:
            return FormulaSchedule(tuple((int(m), float(a)) for m, a in sch["stages"]),
                                   int(sch["order"]), sch.get("name", "custom"))
        return schedule_by_name(sch["name"], M, sch.get("order"))


def build_model(spec: dict, base_dir: Path = Path(".")) -> PartitionedHamiltonian:
    if "file" in spec:
        path = Path(spec["file"])
        if not path.is_absolute():
            path = base_dir / path
        with open(path) as fh:
            H = from_dict(json.load(fh))
        return shift_groups_psd(H) if spec.get("psd") else H
    if "generator" in spec:
        gen = spec["generator"]
        n = spec["n"]
        boundary = spec.get("boundary", "open")
        if gen == "tfim":
            H = tfim_chain(n, spec.get("j_zz", 1.0), spec.get("h_x", 1.0), boundary)
            return shift_groups_psd(H) if spec.get("psd") else H
        return heisenberg_chain(n, spec.get("j", 1.0), boundary, spec.get("psd", False))
    H = from_dict({k: v for k, v in spec.items() if k != "psd"})
    return shift_groups_psd(H) if spec.get("psd") else H


# --- validation helpers ----------------------------------------------------------

def _num(name, v, *, positive=False, nonneg=False, lo=None, hi=None, integer=False):
    ok_type = int if integer else (int, float)
    if isinstance(v, bool) or not isinstance(v, ok_type):
        raise ValidationError(name, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
    if not np.isfinite(v):
        raise ValidationError(name, "must be finite")
    if positive and v <= 0:
        raise ValidationError(name, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ValidationError(name, f"must be nonnegative, got {v}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ValidationError(name, f"{v} outside [{lo}, {hi}]")
    return v


def _num_list(name, v, **kw):
    if not isinstance(v, list) or not v:
        raise ValidationError(name, "expected a non-empty list")
    return tuple(_num(f"{name}[{i}]", x, **kw) for i, x in enumerate(v))


def _keys(name, d, allowed, required=()):
    if not isinstance(d, dict):
        raise ValidationError(name, "expected an object")
    for k in d:
        if k not in allowed:
            raise ValidationError(f"{name}.{k}" if name else k, "unknown key")
    for k in required:
        if k not in d:
            raise ValidationError(f"{name}.{k}" if name else k, "missing required key")


def _validate_model(m) -> dict:
    if not isinstance(m, dict):
        raise ValidationError("model", "expected an object")
    if "file" in m:
        _keys("model", m, {"file", "psd"})
    elif "generator" in m:
        _keys("model", m, {"generator", "n", "boundary", "j_zz", "h_x", "j", "psd"}, ("n",))
        if m["generator"] not in ("tfim", "heisenberg"):
            raise ValidationError("model.generator", f"unknown generator {m['generator']!r}")
        _num("model.n", m["n"], integer=True, lo=1)
        if m.get("boundary", "open") not in ("open", "periodic"):
            raise ValidationError("model.boundary", "expected open or periodic")
        allowed = {"tfim": {"j_zz", "h_x"}, "heisenberg": {"j"}}[m["generator"]]
        for k in ("j_zz", "h_x", "j"):
            if k in m:
                if k not in allowed:
                    raise ValidationError(f"model.{k}", f"not a {m['generator']} parameter")
                _num(f"model.{k}", m[k])
    else:
        _keys("model", m, {"n_qubits", "groups", "name", "psd"}, ("n_qubits", "groups"))
    if not isinstance(m.get("psd", False), bool):
        raise ValidationError("model.psd", "expected a boolean")
    return m


def _validate_schedule(s) -> dict:
    if not isinstance(s, dict):
        raise ValidationError("schedule", "expected an object")
    if "stages" in s:
        _keys("schedule", s, {"stages", "order", "name"}, ("order",))
        if not isinstance(s["stages"], list) or not s["stages"]:
            raise ValidationError("schedule.stages", "expected a non-empty list of [m, a] pairs")
        for i, st in enumerate(s["stages"]):
            if not (isinstance(st, list) and len(st) == 2):
                raise ValidationError(f"schedule.stages[{i}]", "expected [m, a]")
            _num(f"schedule.stages[{i}][0]", st[0], integer=True, lo=0)
            _num(f"schedule.stages[{i}][1]", st[1])
    else:
        _keys("schedule", s, {"name", "order"}, ("name",))
        if not isinstance(s["name"], str):
            raise ValidationError("schedule.name", "expected a string")
    if "order" in s:
        _num("schedule.order", s["order"], integer=True, lo=1)
    return s


def _validate_delta_prime(d) -> dict:
    _keys("delta_prime", d, {"policy", "theta", "gaps"}, ("policy",))
    if d["policy"] == "auto":
        if "gaps" in d:
            raise ValidationError("delta_prime.gaps", "only valid with policy 'gap'")
        theta = _num("delta_prime.theta", d.get("theta", 1e-3), positive=True, hi=1.0)
        return {"policy": "auto", "theta": float(theta)}
    if d["policy"] == "gap":
        if "theta" in d:
            raise ValidationError("delta_prime.theta", "only valid with policy 'auto'")
        gaps = _num_list("delta_prime.gaps", d.get("gaps"), nonneg=True)
        return {"policy": "gap", "gaps": [float(g) for g in gaps]}
    raise ValidationError("delta_prime.policy", f"expected auto or gap, got {d['policy']!r}")


def validate(raw: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    _keys("", raw, set(CONFIG_KEYS), ("model", "schedule"))
    kw: dict[str, Any] = {
        "model": _validate_model(raw["model"]),
        "schedule": _validate_schedule(raw["schedule"]),
        "base_dir": base_dir,
    }
    if "s_grid" in raw:
        kw["s_grid"] = tuple(float(x) for x in _num_list("s_grid", raw["s_grid"], nonneg=True))
    if "delta_percentiles" in raw:
        kw["delta_percentiles"] = tuple(
            float(x) for x in _num_list("delta_percentiles", raw["delta_percentiles"], lo=0, hi=100))
    if "delta_values" in raw:
        kw["delta_values"] = tuple(float(x) for x in _num_list("delta_values", raw["delta_values"]))
    if "delta_prime" in raw:
        kw["delta_prime"] = _validate_delta_prime(raw["delta_prime"])
    if "chain_theta" in raw:
        kw["chain_theta"] = float(_num("chain_theta", raw["chain_theta"], positive=True, hi=1.0))
        if kw["chain_theta"] >= 1:
            raise ValidationError("chain_theta", "must be < 1")
    if "slack" in raw:
        kw["slack"] = float(_num("slack", raw["slack"], lo=1.0))
    if "T" in raw:
        kw["T"] = float(_num("T", raw["T"], positive=True))
    if "eps" in raw:
        kw["eps"] = float(_num("eps", raw["eps"], positive=True))
        if kw["eps"] >= 1:
            raise ValidationError("eps", "must be < 1")
    if "cost_orders" in raw:
        kw["cost_orders"] = _num_list("cost_orders", raw["cost_orders"], integer=True, lo=1)
    if "arad_samples" in raw:
        kw["arad_samples"] = _num("arad_samples", raw["arad_samples"], integer=True, lo=1)
    if "arad_grid" in raw:
        kw["arad_grid"] = _num("arad_grid", raw["arad_grid"], integer=True, lo=2)
    if "dense_limit" in raw:
        kw["dense_limit"] = _num("dense_limit", raw["dense_limit"], integer=True, lo=1, hi=DENSE_LIMIT)
    if "seed" in raw:
        kw["seed"] = _num("seed", raw["seed"], integer=True, lo=0)
    kw["workers"] = (_num("workers", raw["workers"], integer=True, lo=1)
                     if "workers" in raw else default_workers())
    if "output" in raw:
        if not isinstance(raw["output"], str):
            raise ValidationError("output", "expected a path string")
        kw["output"] = raw["output"]
    if "format" in raw:
        if raw["format"] not in ("csv", "json"):
            raise ValidationError("format", f"expected csv or json, got {raw['format']!r}")
        kw["format"] = raw["format"]
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.colno, exc.msg) from exc
    return validate(raw, path.parent)
