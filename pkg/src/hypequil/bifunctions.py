"""Bifunctions f: K x K -> R for equilibrium problems, their convex
objective catalog, and a sampling-based checker for the four structural
conditions (zero diagonal, monotonicity, convexity and lower
semicontinuity in the second slot, upper hemicontinuity in the first).

The catalog objectives are built from cosh-distance terms, which satisfy
u'' = u along unit-speed geodesics.  That identity powers the exact line
searches in the solvers and the certified convexity bound for the
penalized (non-antisymmetric) instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .errors import InputError


# ---------------------------------------------------------------------------
# convex objectives


class Objective:
    """Geodesically convex function on H^n."""

    def value(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def value_rows(self, pts: np.ndarray) -> np.ndarray:
        return np.array([self.value(np.ascontiguousarray(p)) for p in pts])

    def subgrad(self, p: np.ndarray) -> np.ndarray:
        """A Riemannian subgradient (ambient vector tangent at p)."""
        raise NotImplementedError

    def active_grads(self, p: np.ndarray, eps: float):
        """Gradients of the eps-active pieces, for min-norm directions."""
        return [self.subgrad(p)]

    def restrict(self, z: np.ndarray, v: np.ndarray) -> "LineFunction":
        """Restriction t -> value(exp_z(t v)) for a unit tangent v."""
        raise NotImplementedError

    def scaled(self, lam: float) -> "Objective":
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


class LineFunction:
    """Convex 1-D restriction of an objective along a geodesic."""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def deriv(self, t: float) -> float:
        raise NotImplementedError


class _CoshLine(LineFunction):
    """A cosh t + B sinh t (exactly the restriction of cosh-sum terms)."""

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def value(self, t):
        return self.a * np.cosh(t) + self.b * np.sinh(t)

    def deriv(self, t):
        return self.a * np.sinh(t) + self.b * np.cosh(t)

    def exact_min(self):
        """artanh(-B/A); the restriction's unique minimizer when A > |B|."""
        if self.a <= 0.0:
            return None
        r = -self.b / self.a
        if abs(r) >= 1.0:
            return None
        return float(np.arctanh(r))


class _DistLine(LineFunction):
    """w * arccosh(A cosh t + B sinh t): restriction of a distance term."""

    __slots__ = ("a", "b", "w")

    def __init__(self, a, b, w):
        self.a = a
        self.b = b
        self.w = w

    def value(self, t):
        u = max(1.0, self.a * np.cosh(t) + self.b * np.sinh(t))
        return self.w * np.arccosh(u)

    def deriv(self, t):
        u = self.a * np.cosh(t) + self.b * np.sinh(t)
        du = self.a * np.sinh(t) + self.b * np.cosh(t)
        if u <= 1.0 + 1e-14:
            # kink at the anchor: one-sided slope has magnitude w
            return self.w * float(np.sign(du))
        return self.w * du / np.sqrt(u * u - 1.0)


class _SumLine(LineFunction):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def value(self, t):
        return sum(p.value(t) for p in self.parts)

    def deriv(self, t):
        return sum(p.deriv(t) for p in self.parts)


class _MaxLine(LineFunction):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = parts

    def value(self, t):
        return max(p.value(t) for p in self.parts)

    def deriv(self, t):
        vals = [p.value(t) for p in self.parts]
        return self.parts[int(np.argmax(vals))].deriv(t)


@dataclass(frozen=True, eq=False)
class CoshCombination(Objective):
    """g(p) = sum_i w_i cosh d(p, a_i) with w_i >= 0.

    The empty combination is the zero objective.
    """

    anchors: np.ndarray = field(default=None)
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        a = self.anchors
        w = self.weights
        if a is None:
            a = np.zeros((0, 3))
            w = np.zeros(0)
        a = np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=np.float64)))
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        if a.shape[0] != w.shape[0]:
            raise InputError("one weight per anchor required")
        if (w < 0).any():
            raise InputError("weights must be nonnegative")
        object.__setattr__(self, "anchors", a)
        object.__setattr__(self, "weights", w)
        # ambient gradient of the combination is constant: -sum w_i a_i
        object.__setattr__(self, "_amb", -(w[:, None] * a).sum(axis=0)
                           if w.size else np.zeros(a.shape[1] if a.size else 3))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def value(self, p):
        if self.weights.size == 0:
            return 0.0
        return float(self.weights @ K.cosh_dist_rows(self.anchors, p))

    def value_rows(self, pts):
        if self.weights.size == 0:
            return np.zeros(pts.shape[0])
        return K.cosh_dist_table(pts, self.anchors) @ self.weights

    def subgrad(self, p):
        return K.tangent_project(p, np.ascontiguousarray(self._amb))

    def restrict(self, z, v):
        if self.weights.size == 0:
            return _CoshLine(0.0, 0.0)
        a = float(self.weights @ K.cosh_dist_rows(self.anchors, z))
        b = float(self.weights @ -K.mink_rows(self.anchors, v))
        # b uses raw -<a_i, v>; clamping does not apply to tangent pairings
        return _CoshLine(a, b)

    def scaled(self, lam):
        return CoshCombination(anchors=self.anchors, weights=lam * self.weights)

    def descriptor(self):
        return {"kind": "cosh-sum",
                "terms": [{"w": float(w), "anchor": geo.point_to_list(a)}
                          for w, a in zip(self.weights, self.anchors)]}


def zero_objective(dim: int = 2) -> CoshCombination:
    return CoshCombination(anchors=np.zeros((0, dim + 1)), weights=np.zeros(0))


@dataclass(frozen=True, eq=False)
class DistanceTo(Objective):
    """g(p) = w * d(p, anchor); subgradient 0 at the anchor itself."""

    anchor: np.ndarray
    w: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "anchor", geo.check_point(self.anchor, "anchor"))
        if self.w < 0:
            raise InputError("weight must be nonnegative")

    def value(self, p):
        return self.w * K.dist(p, self.anchor)

    def value_rows(self, pts):
        return self.w * K.dist_rows(pts, self.anchor)

    def subgrad(self, p):
        d = K.dist(p, self.anchor)
        if d < 1e-12:
            return np.zeros_like(np.asarray(p))
        g = K.tangent_project(p, np.ascontiguousarray(-self.anchor))
        return (self.w / np.sinh(d)) * g

    def restrict(self, z, v):
        a = K.cosh_dist(z, self.anchor)
        b = -K.mink(np.ascontiguousarray(self.anchor), v)
        return _DistLine(a, b, self.w)

    def scaled(self, lam):
        return DistanceTo(anchor=self.anchor, w=lam * self.w)

    def descriptor(self):
        return {"kind": "distance", "anchor": geo.point_to_list(self.anchor),
                "w": float(self.w)}


@dataclass(frozen=True, eq=False)
class MaxObjective(Objective):
    """Pointwise maximum of finitely many catalog objectives.

    The reported subgradient belongs to the active part of lowest index.
    """

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise InputError("max objective needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def value(self, p):
        return max(part.value(p) for part in self.parts)

    def value_rows(self, pts):
        return np.max([part.value_rows(pts) for part in self.parts], axis=0)

    def subgrad(self, p):
        vals = [part.value(p) for part in self.parts]
        return self.parts[int(np.argmax(vals))].subgrad(p)

    def active_grads(self, p, eps):
        vals = [part.value(p) for part in self.parts]
        top = max(vals)
        return [part.subgrad(p) for part, v in zip(self.parts, vals)
                if v >= top - eps]

    def restrict(self, z, v):
        return _MaxLine([part.restrict(z, v) for part in self.parts])

    def scaled(self, lam):
        return MaxObjective(parts=tuple(p.scaled(lam) for p in self.parts))

    def descriptor(self):
        return {"kind": "max", "parts": [p.descriptor() for p in self.parts]}


def objective_from_descriptor(desc: dict) -> Objective:
    kind = desc.get("kind")
    if kind == "cosh-sum":
        terms = desc.get("terms", [])
        return CoshCombination(
            anchors=np.array([t["anchor"] for t in terms], dtype=np.float64)
            if terms else None,
            weights=np.array([t["w"] for t in terms], dtype=np.float64)
            if terms else None)
    if kind == "distance":
        return DistanceTo(anchor=np.asarray(desc["anchor"], dtype=np.float64),
                          w=float(desc.get("w", 1.0)))
    if kind == "max":
        return MaxObjective(parts=tuple(objective_from_descriptor(p)
                                        for p in desc["parts"]))
    raise InputError(f"unknown objective kind {kind!r}")


# ---------------------------------------------------------------------------
# bifunctions


class Bifunction:
    """Evaluable f(x, y) with optional structure hooks for the solvers."""

    antisymmetric = False

    def eval(self, x: np.ndarray, y: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, x, y):
        return self.eval(np.ascontiguousarray(x, np.float64),
                         np.ascontiguousarray(y, np.float64))

    def row(self, z: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """f(z, p) for every row p of pts."""
        return np.array([self.eval(z, np.ascontiguousarray(p)) for p in pts])

    def col(self, pts: np.ndarray, z: np.ndarray) -> np.ndarray:
        """f(p, z) for every row p of pts."""
        return np.array([self.eval(np.ascontiguousarray(p), z) for p in pts])

    def reduction(self) -> Objective | None:
        """Objective g with resolvent(x) = argmin_K g + cosh d(x, .), if known."""
        return None

    def scaled(self, lam: float) -> "Bifunction":
        return ScaledBifunction(inner=self, lam=lam)

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ObjectiveDiff(Bifunction):
    """f(x, y) = g(y) - g(x): the optimization-type (antisymmetric) family."""

    objective: Objective
    antisymmetric = True

    def eval(self, x, y):
        return self.objective.value(y) - self.objective.value(x)

    def row(self, z, pts):
        return self.objective.value_rows(pts) - self.objective.value(z)

    def col(self, pts, z):
        return self.objective.value(z) - self.objective.value_rows(pts)

    def reduction(self):
        return self.objective

    def scaled(self, lam):
        return ObjectiveDiff(objective=self.objective.scaled(lam))

    def descriptor(self):
        d = self.objective.descriptor()
        if d["kind"] == "cosh-sum":
            return {"type": "objective-diff", "terms": d["terms"]}
        return {"type": "objective-diff", "objective": d}


@dataclass(frozen=True, eq=False)
class PenalizedDiff(Bifunction):
    """f(x, y) = g(y) - g(x) - mu (cosh d(x, y) - 1).

    Monotone with strict slack 2 mu (cosh d - 1) at distinct pairs.  The
    second slot stays convex provided mu cosh(diam K) < min_K g, which
    ``certified_penalty_mu`` guarantees for cosh-sum objectives; the
    constructor refuses other objective kinds because a distance term has
    flat geodesics that no positive mu survives.

    The penalty's y-gradient vanishes at y = x, so the resolvent equals
    the plain optimization resolvent of g; ``reduction`` advertises that.
    """

    objective: CoshCombination
    mu: float

    def __post_init__(self):
        if not isinstance(self.objective, CoshCombination):
            raise InputError("penalized bifunctions need a cosh-sum objective")
        if self.mu < 0:
            raise InputError("penalty coefficient must be nonnegative")

    def eval(self, x, y):
        g = self.objective
        return g.value(y) - g.value(x) - self.mu * (K.cosh_dist(x, y) - 1.0)

    def row(self, z, pts):
        g = self.objective
        pen = self.mu * (K.cosh_dist_rows(pts, z) - 1.0)
        return g.value_rows(pts) - g.value(z) - pen

    def col(self, pts, z):
        g = self.objective
        pen = self.mu * (K.cosh_dist_rows(pts, z) - 1.0)
        return g.value(z) - g.value_rows(pts) - pen

    def reduction(self):
        return self.objective

    def scaled(self, lam):
        return PenalizedDiff(objective=self.objective.scaled(lam),
                             mu=lam * self.mu)

    def descriptor(self):
        return {"type": "penalized-diff",
                "objective": self.objective.descriptor(), "mu": float(self.mu)}


@dataclass(frozen=True, eq=False)
class ScaledBifunction(Bifunction):
    """lam * f for a positive lam; preserves all four conditions."""

    inner: Bifunction
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError(f"scale must be positive, got {self.lam}")

    @property
    def antisymmetric(self):
        return self.inner.antisymmetric

    def eval(self, x, y):
        return self.lam * self.inner.eval(x, y)

    def row(self, z, pts):
        return self.lam * self.inner.row(z, pts)

    def col(self, pts, z):
        return self.lam * self.inner.col(pts, z)

    def reduction(self):
        g = self.inner.reduction()
        return None if g is None else g.scaled(self.lam)

    def scaled(self, lam):
        return ScaledBifunction(inner=self.inner, lam=self.lam * lam)

    def descriptor(self):
        return {"type": "scaled", "lam": float(self.lam),
                "inner": self.inner.descriptor()}


@dataclass(frozen=True, eq=False)
class CallableBifunction(Bifunction):
    """Wrap a plain python callable; used for adversarial checker inputs."""

    fn: object
    name: str = "callable"

    def eval(self, x, y):
        return float(self.fn(x, y))

    def descriptor(self):
        return {"type": "callable", "name": self.name}


def make_optimization_bifunction(g) -> ObjectiveDiff:
    """Optimization-type bifunction f(x, y) = g(y) - g(x).

    Accepts an Objective or an objective descriptor dict.
    """
    if isinstance(g, dict):
        g = objective_from_descriptor(g)
    if not isinstance(g, Objective):
        raise InputError("expected an Objective or descriptor dict")
    return ObjectiveDiff(objective=g)


def scale_bifunction(f: Bifunction, lam: float) -> Bifunction:
    if not lam > 0:
        raise InputError(f"scale must be positive, got {lam}")
    return f.scaled(lam)


def certified_penalty_mu(g: CoshCombination, diameter: float,
                         margin: float = 0.5) -> float:
    """Largest safe penalty coefficient, times ``margin``.

    Along unit-speed geodesics every cosh-sum satisfies u'' = u, so the
    second slot of the penalized bifunction has curvature
    g(y) - mu cosh d(x, y) >= total_weight - mu cosh(diameter); keeping
    that positive certifies convexity on any region of the given diameter.
    """
    if g.total_weight <= 0:
        raise InputError("penalty needs an objective with positive total weight")
    return margin * g.total_weight / float(np.cosh(diameter))


def bifunction_from_descriptor(desc: dict) -> Bifunction:
    kind = desc.get("type")
    if kind == "zero":
        return ObjectiveDiff(objective=zero_objective(int(desc.get("dimension", 2))))
    if kind == "objective-diff":
        if "objective" in desc:
            return ObjectiveDiff(objective=objective_from_descriptor(desc["objective"]))
        return ObjectiveDiff(objective=objective_from_descriptor(
            {"kind": "cosh-sum", "terms": desc.get("terms", [])}))
    if kind == "penalized-diff":
        return PenalizedDiff(
            objective=objective_from_descriptor(desc["objective"]),
            mu=float(desc["mu"]))
    if kind == "scaled":
        return ScaledBifunction(inner=bifunction_from_descriptor(desc["inner"]),
                                lam=float(desc["lam"]))
    raise InputError(f"unknown bifunction type {kind!r}")


# ---------------------------------------------------------------------------
# condition checker


@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    worst_violation: float
    tolerance: float
    witness: dict


@dataclass(frozen=True)
class ConditionReport:
    clauses: tuple
    samples: int
    seed: int
    extras: dict

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseResult:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)


def check_conditions(f: Bifunction, region, seed: int, samples: int,
                     bounding_radius: float = 6.0) -> ConditionReport:
    """Sample-based audit of the four bifunction conditions.

    Certifies nothing globally; reports the worst margin seen and a
    witness reproducing it.  Failures are reported, never raised.
    """
    from . import regions as reg

    if samples <= 0:
        raise InputError("samples must be positive")
    pts = reg.sample(region, seed, samples, bounding_radius)
    pts = np.ascontiguousarray(pts)
    n = pts.shape[0]
    rng = np.random.default_rng(seed + 1)

    # (i) zero diagonal
    worst_i, wit_i = 0.0, {}
    for p in pts:
        v = abs(f.eval(p, p))
        if v > worst_i:
            worst_i, wit_i = v, {"x": geo.point_to_list(p)}

    # (ii) monotonicity over sampled pairs
    worst_ii, wit_ii = -np.inf, {}
    min_sum = np.inf
    pairs = rng.integers(0, n, size=(max(1, n), 2))
    for i, j in pairs:
        s = f.eval(pts[i], pts[j]) + f.eval(pts[j], pts[i])
        if s > worst_ii:
            worst_ii = s
            wit_ii = {"x": geo.point_to_list(pts[i]), "y": geo.point_to_list(pts[j])}
        min_sum = min(min_sum, s)

    # (iii) midpoint convexity in the second slot
    worst_iii, wit_iii = -np.inf, {}
    triples = rng.integers(0, n, size=(max(1, n), 3))
    for i, j, k in triples:
        mid = K.geodesic_point(pts[j], pts[k], 0.5)
        gap = f.eval(pts[i], mid) - 0.5 * (f.eval(pts[i], pts[j]) + f.eval(pts[i], pts[k]))
        if gap > worst_iii:
            worst_iii = gap
            wit_iii = {"x": geo.point_to_list(pts[i]), "y": geo.point_to_list(pts[j]),
                       "z": geo.point_to_list(pts[k])}

    # (iv) upper hemicontinuity in the first slot, by extrapolation t -> 0+
    worst_iv, wit_iv = -np.inf, {}
    ts = np.array([1e-2, 1e-3, 1e-4])
    triples = rng.integers(0, n, size=(max(1, n // 2), 3))
    for i, j, k in triples:
        if K.dist(pts[i], pts[j]) < 1e-6:
            continue
        vals = []
        for t in ts:
            xt = K.geodesic_point(pts[i], pts[j], 1.0 - float(t))
            vals.append(f.eval(xt, pts[k]))
        coeffs = np.polyfit(ts, vals, 2)
        limit = float(np.polyval(coeffs, 0.0))
        gap = limit - f.eval(pts[i], pts[k])
        if gap > worst_iv:
            worst_iv = gap
            wit_iv = {"x": geo.point_to_list(pts[i]), "y": geo.point_to_list(pts[j]),
                      "w": geo.point_to_list(pts[k])}

    tol = {"zero_diagonal": 1e-10, "monotone": 1e-10,
           "convex_second": 1e-8, "hemicontinuous_first": 1e-6}
    clauses = (
        ClauseResult("zero_diagonal", worst_i <= tol["zero_diagonal"],
                     worst_i, tol["zero_diagonal"], wit_i),
        ClauseResult("monotone", worst_ii <= tol["monotone"],
                     float(worst_ii), tol["monotone"], wit_ii),
        ClauseResult("convex_second", worst_iii <= tol["convex_second"],
                     float(worst_iii), tol["convex_second"], wit_iii),
        ClauseResult("hemicontinuous_first", worst_iv <= tol["hemicontinuous_first"],
                     float(worst_iv), tol["hemicontinuous_first"], wit_iv),
    )
    return ConditionReport(clauses=clauses, samples=samples, seed=seed,
                           extras={"monotone_min_sum": float(min_sum)})
