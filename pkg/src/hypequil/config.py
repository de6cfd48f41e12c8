"""Experiment configuration: strict JSON with materialized defaults.

Unknown keys are rejected and every error names the offending path
(e.g. ``region.radius``).  ``effective()`` returns the full dict with all
defaults filled in; parsing that echo again yields an identical config,
which is what makes runs reproducible from their output directories.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .bifunctions import Bifunction, bifunction_from_descriptor
from .errors import ConfigError
from .regions import ConvexRegion, region_from_descriptor
from .resolvent import SolverOptions

TASKS = ("resolve", "ppa", "verify", "grid-oracle")

SOLVER_DEFAULTS = {"tol": 1e-8, "max_iters": 10_000, "grid_spacing": 0.05,
                   "bounding_radius": 6.0}
PPA_DEFAULTS = {"lambda": {"kind": "constant", "value": 1.0},
                "stop_tol": 1e-6, "max_steps": 200}
VERIFY_DEFAULTS = {"stewart_trials": 10_000, "convexity_trials": 10_000,
                   "agreement_instances": 20, "nonspreading_pairs": 200,
                   "kkm_families": 50, "ppa_max_steps": 200,
                   "condition_samples": 400}


def _require_keys(d: dict, allowed: set, path: str):
    unknown = set(d) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key at {path}.{key}" if path else
                          f"unknown key at {key}")


def _typed(d: dict, key: str, types, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing required key {path}.{key}" if path
                              else f"missing required key {key}")
        return default
    v = d[key]
    if types is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"type mismatch at {path}.{key}: expected number")
        return float(v)
    if types is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"type mismatch at {path}.{key}: expected integer")
        return v
    if not isinstance(v, types):
        raise ConfigError(f"type mismatch at {path}.{key}")
    return v


def _check_region(desc, path):
    if not isinstance(desc, dict):
        raise ConfigError(f"type mismatch at {path}: expected object")
    kind = desc.get("type")
    if kind == "ball":
        _require_keys(desc, {"type", "center", "radius"}, path)
        r = _typed(desc, "radius", float, path, required=True)
        if r <= 0:
            raise ConfigError(f"invariant violation at {path}.radius: must be "
                              f"positive, got {r}")
        _check_point(desc.get("center"), f"{path}.center")
    elif kind == "halfspace":
        _require_keys(desc, {"type", "normal"}, path)
        n = desc.get("normal")
        if not isinstance(n, list) or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in n):
            raise ConfigError(f"type mismatch at {path}.normal")
        v = np.asarray(n, dtype=np.float64)
        if geo.minkowski_form(v, v) <= 0:
            raise ConfigError(f"invariant violation at {path}.normal: "
                              "must be spacelike")
    elif kind == "intersection":
        _require_keys(desc, {"type", "members"}, path)
        members = desc.get("members")
        if not isinstance(members, list) or not members:
            raise ConfigError(f"invariant violation at {path}.members: "
                              "need a nonempty list")
        for i, m in enumerate(members):
            _check_region(m, f"{path}.members[{i}]")
    elif kind == "whole-space":
        _require_keys(desc, {"type", "dimension"}, path)
    else:
        raise ConfigError(f"unknown region type at {path}.type: {kind!r}")


def _check_point(coords, path):
    if not isinstance(coords, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool)
            for c in coords):
        raise ConfigError(f"type mismatch at {path}: expected a coordinate list")
    try:
        geo.hpoint(coords)
    except Exception as exc:
        raise ConfigError(f"invariant violation at {path}: {exc}") from None


def _check_bifunction(desc, path):
    if not isinstance(desc, dict):
        raise ConfigError(f"type mismatch at {path}: expected object")
    try:
        bifunction_from_descriptor(desc)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invariant violation at {path}: {exc}") from None


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    dimension: int
    seed: int
    task: str
    region_desc: dict
    bifunction_desc: dict
    x: list | None
    x0: list | None
    solver: dict
    ppa: dict
    verify: dict
    output: str
    plot: bool

    def region(self) -> ConvexRegion:
        return region_from_descriptor(self.region_desc, self.dimension)

    def bifunction(self) -> Bifunction:
        return bifunction_from_descriptor(self.bifunction_desc)

    def solver_options(self, **overrides) -> SolverOptions:
        kw = dict(tol=self.solver["tol"], max_iters=self.solver["max_iters"],
                  grid_spacing=self.solver["grid_spacing"],
                  bounding_radius=self.solver["bounding_radius"],
                  seed=self.seed)
        kw.update(overrides)
        return SolverOptions(**kw)

    def effective(self) -> dict:
        """Full configuration with every default materialized."""
        out = {"dimension": self.dimension, "seed": self.seed, "task": self.task,
               "region": self.region_desc, "bifunction": self.bifunction_desc,
               "solver": dict(self.solver), "ppa": dict(self.ppa),
               "verify": dict(self.verify), "output": self.output,
               "plot": self.plot}
        if self.x is not None:
            out["x"] = self.x
        if self.x0 is not None:
            out["x0"] = self.x0
        return out

    def echo_text(self) -> str:
        return json.dumps(self.effective(), indent=2, sort_keys=True) + "\n"


def default_region(dim: int) -> dict:
    center = [1.0] + [0.0] * dim
    return {"type": "ball", "center": center, "radius": 2.0}


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON config document; see the module docstring for strictness."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    _require_keys(raw, {"dimension", "seed", "task", "region", "bifunction",
                        "x", "x0", "solver", "ppa", "verify", "output",
                        "plot"}, "")

    dimension = _typed(raw, "dimension", int, "", default=2)
    if dimension < 2:
        raise ConfigError(f"invariant violation at dimension: must be >= 2, "
                          f"got {dimension}")
    seed = _typed(raw, "seed", int, "", default=0)
    task = _typed(raw, "task", str, "", default="resolve")
    if task not in TASKS:
        raise ConfigError(f"unknown task at task: {task!r} (expected one of "
                          f"{', '.join(TASKS)})")

    region_desc = raw.get("region", default_region(dimension))
    _check_region(region_desc, "region")

    bifunction_desc = raw.get("bifunction", {"type": "zero",
                                             "dimension": dimension})
    _check_bifunction(bifunction_desc, "bifunction")

    x = raw.get("x")
    if x is not None:
        _check_point(x, "x")
    x0 = raw.get("x0")
    if x0 is not None:
        _check_point(x0, "x0")

    solver = dict(SOLVER_DEFAULTS)
    user_solver = raw.get("solver", {})
    if not isinstance(user_solver, dict):
        raise ConfigError("type mismatch at solver: expected object")
    _require_keys(user_solver, set(SOLVER_DEFAULTS), "solver")
    solver["tol"] = _typed(user_solver, "tol", float, "solver",
                           default=solver["tol"])
    solver["max_iters"] = _typed(user_solver, "max_iters", int, "solver",
                                 default=solver["max_iters"])
    solver["grid_spacing"] = _typed(user_solver, "grid_spacing", float,
                                    "solver", default=solver["grid_spacing"])
    solver["bounding_radius"] = _typed(user_solver, "bounding_radius", float,
                                       "solver",
                                       default=solver["bounding_radius"])
    for key in ("tol", "grid_spacing", "bounding_radius"):
        if solver[key] <= 0:
            raise ConfigError(f"invariant violation at solver.{key}: "
                              "must be positive")
    if solver["max_iters"] <= 0:
        raise ConfigError("invariant violation at solver.max_iters: "
                          "must be positive")

    ppa = {k: (dict(v) if isinstance(v, dict) else v)
           for k, v in PPA_DEFAULTS.items()}
    user_ppa = raw.get("ppa", {})
    if not isinstance(user_ppa, dict):
        raise ConfigError("type mismatch at ppa: expected object")
    _require_keys(user_ppa, set(PPA_DEFAULTS), "ppa")
    if "lambda" in user_ppa:
        lam = user_ppa["lambda"]
        if not isinstance(lam, dict):
            raise ConfigError("type mismatch at ppa.lambda: expected object")
        kind = lam.get("kind")
        if kind == "constant":
            _require_keys(lam, {"kind", "value"}, "ppa.lambda")
            if _typed(lam, "value", float, "ppa.lambda", required=True) <= 0:
                raise ConfigError("invariant violation at ppa.lambda.value: "
                                  "must be positive")
        elif kind == "geometric":
            _require_keys(lam, {"kind", "initial", "ratio"}, "ppa.lambda")
            if _typed(lam, "initial", float, "ppa.lambda", required=True) <= 0 \
                    or _typed(lam, "ratio", float, "ppa.lambda", required=True) <= 0:
                raise ConfigError("invariant violation at ppa.lambda: "
                                  "initial and ratio must be positive")
        else:
            raise ConfigError(f"unknown schedule at ppa.lambda.kind: {kind!r}")
        ppa["lambda"] = lam
    ppa["stop_tol"] = _typed(user_ppa, "stop_tol", float, "ppa",
                             default=ppa["stop_tol"])
    ppa["max_steps"] = _typed(user_ppa, "max_steps", int, "ppa",
                              default=ppa["max_steps"])
    if ppa["stop_tol"] <= 0 or ppa["max_steps"] <= 0:
        raise ConfigError("invariant violation at ppa: stop_tol and max_steps "
                          "must be positive")

    verify = dict(VERIFY_DEFAULTS)
    user_verify = raw.get("verify", {})
    if not isinstance(user_verify, dict):
        raise ConfigError("type mismatch at verify: expected object")
    _require_keys(user_verify, set(VERIFY_DEFAULTS), "verify")
    for key in VERIFY_DEFAULTS:
        verify[key] = _typed(user_verify, key, int, "verify",
                             default=verify[key])
        if verify[key] <= 0:
            raise ConfigError(f"invariant violation at verify.{key}: "
                              "must be positive")

    output = _typed(raw, "output", str, "", default="hypequil-out")
    plot = _typed(raw, "plot", bool, "", default=False)

    return ExperimentConfig(dimension=dimension, seed=seed, task=task,
                            region_desc=region_desc,
                            bifunction_desc=bifunction_desc, x=x, x0=x0,
                            solver=solver, ppa=ppa, verify=verify,
                            output=output, plot=plot)
