"""End-to-end verification suite behind the ``verify`` task.

Builds a deterministic catalog of bifunction families, then runs every
property at full scale: closed-form geometry identities, solver-oracle
agreement, single-valuedness, firm nonspreading, the two-family resolvent
equivalence, fixed-point equivalence, finite-intersection covers, and
proximal-point behavior.  Each result is a PropertyVerdict; the suite
passes when all verdicts do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .bifunctions import (Bifunction, CoshCombination, DistanceTo,
                          MaxObjective, ObjectiveDiff, PenalizedDiff,
                          certified_penalty_mu, check_conditions,
                          zero_objective)
from .errors import HypequilError
from .harness import (PropertyVerdict, _verdict, check_cosh_convexity,
                      check_firmly_nonspreading, check_fixed_point_equivalence,
                      check_kkm_cover, check_resolvent_equivalence,
                      check_stewart)
from .ppa import constant_schedule, run_ppa
from .regions import Ball, build_grid, sample
from .resolvent import (SolverOptions, minimize_objective, oracle_resolve,
                        resolve, resolve_general, resolve_optimization)

FAMILIES = ("zero", "single-cosh", "weighted-cosh", "distance", "max-cosh",
            "penalized")


@dataclass(frozen=True, eq=False)
class Instance:
    """One solver test case: a bifunction on a radius-2 ball plus a query."""

    family: str
    bifunction: Bifunction
    region: Ball
    x: np.ndarray
    optimization: bool  # True when resolve_optimization applies directly


def _random_point(rng, center, radius):
    g = rng.standard_normal(center.shape[0])
    v = K.tangent_project(center, np.ascontiguousarray(g))
    q = max(1e-300, K.mink(v, v))
    v = v / np.sqrt(q)
    r = radius * rng.random() ** 0.5
    return K.exp_map(center, r * v, r)


def make_instance(family: str, seed: int, dim: int = 2) -> Instance:
    """Deterministic instance of one catalog family."""
    rng = np.random.default_rng(seed)
    center = _random_point(rng, geo.origin(dim), 0.5)
    region = Ball(center=center, radius=2.0)
    x = _random_point(rng, center, 3.0)

    def anchors(k, radius=1.0):
        return np.ascontiguousarray(
            np.array([_random_point(rng, center, radius) for _ in range(k)]))

    if family == "zero":
        f = ObjectiveDiff(objective=zero_objective(dim))
        return Instance(family, f, region, x, True)
    if family == "single-cosh":
        g = CoshCombination(anchors=anchors(1), weights=np.array([1.0]))
        return Instance(family, ObjectiveDiff(objective=g), region, x, True)
    if family == "weighted-cosh":
        g = CoshCombination(anchors=anchors(3),
                            weights=0.3 + 0.9 * rng.random(3))
        return Instance(family, ObjectiveDiff(objective=g), region, x, True)
    if family == "distance":
        g = DistanceTo(anchor=np.ascontiguousarray(anchors(1)[0]), w=1.0)
        return Instance(family, ObjectiveDiff(objective=g), region, x, True)
    if family == "max-cosh":
        g1 = CoshCombination(anchors=anchors(2), weights=0.4 + 0.8 * rng.random(2))
        g2 = CoshCombination(anchors=anchors(1), weights=np.array([1.0]))
        g = MaxObjective(parts=(g1, g2))
        return Instance(family, ObjectiveDiff(objective=g), region, x, True)
    if family == "penalized":
        g = CoshCombination(anchors=anchors(2), weights=0.5 + 0.7 * rng.random(2))
        mu = certified_penalty_mu(g, diameter=2.0 * region.radius)
        return Instance(family, PenalizedDiff(objective=g, mu=mu), region, x,
                        False)
    raise ValueError(f"unknown family {family!r}")


def _opts_for(instance: Instance, base: SolverOptions, grid) -> SolverOptions:
    return SolverOptions(tol=base.tol, max_iters=base.max_iters,
                         grid_spacing=base.grid_spacing,
                         bounding_radius=base.bounding_radius, seed=base.seed,
                         certification_grid=grid)


@dataclass
class SuiteSettings:
    seed: int = 0
    stewart_trials: int = 10_000
    convexity_trials: int = 10_000
    agreement_instances: int = 20
    nonspreading_pairs: int = 200
    kkm_families: int = 50
    ppa_max_steps: int = 200
    condition_samples: int = 400
    grid_spacing: float = 0.05
    tol: float = 1e-8


def run_suite(settings: SuiteSettings, progress=None) -> list[PropertyVerdict]:
    """Run every property; returns the verdict list in a fixed order."""
    verdicts = []
    note = progress or (lambda s: None)

    v = check_stewart(seed=settings.seed + 10, trials=settings.stewart_trials)
    verdicts.append(v)
    note(f"stewart-identity: {_status(v)}")

    v = check_cosh_convexity(seed=settings.seed + 20,
                             trials=settings.convexity_trials)
    verdicts.append(v)
    note(f"cosh-convexity: {_status(v)}")

    base = SolverOptions(tol=settings.tol, grid_spacing=settings.grid_spacing)

    # condition gate: every catalog family must pass the four-clause audit
    for fam_idx, family in enumerate(FAMILIES):
        inst = make_instance(family, seed=settings.seed + 1000 + fam_idx)
        report = check_conditions(inst.bifunction, inst.region,
                                  seed=settings.seed + 30 + fam_idx,
                                  samples=settings.condition_samples,
                                  bounding_radius=inst.region.radius)
        worst = max(c.worst_violation - c.tolerance for c in report.clauses)
        v = PropertyVerdict(
            name=f"conditions[{family}]", trials=settings.condition_samples,
            worst_slack=-worst, tolerance=0.0, passed=report.all_passed,
            witness={"clauses": {c.name: c.worst_violation
                                 for c in report.clauses}},
            extras={"monotone_min_sum": report.extras["monotone_min_sum"]})
        verdicts.append(v)
        note(f"conditions[{family}]: {_status(v)}")

    verdicts.extend(_solver_block(settings, base, note))
    verdicts.extend(_kkm_block(settings, base, note))
    verdicts.extend(_ppa_block(settings, base, note))
    return verdicts


def _status(v: PropertyVerdict) -> str:
    return ("PASS" if v.passed else "FAIL") + \
        f" worst_slack={v.worst_slack:.3e} tol={v.tolerance:.1e}"


def _with_extras(v: PropertyVerdict, name: str | None = None,
                 **kv) -> PropertyVerdict:
    extras = dict(v.extras)
    extras.update(kv)
    return PropertyVerdict(name=name or v.name, trials=v.trials,
                           worst_slack=v.worst_slack, tolerance=v.tolerance,
                           passed=v.passed, witness=v.witness,
                           inconclusive=v.inconclusive, extras=extras)


def _solver_block(settings, base, note):
    """Agreement, single-valuedness, equivalence, nonspreading, fixed points."""
    out = []
    spacing = settings.grid_spacing
    for fam_idx, family in enumerate(FAMILIES):
        agree_slacks, agree_wits = [], []
        sv_slacks, sv_wits = [], []
        eq_worst, eq_wit = np.inf, {}
        inconclusive = 0
        for k in range(settings.agreement_instances):
            inst = make_instance(family,
                                 seed=settings.seed + 5000 + 97 * fam_idx + k)
            grid = build_grid(inst.region, spacing, base.bounding_radius,
                              phase_seed=settings.seed + k)
            opts = _opts_for(inst, base, grid)
            try:
                zg = resolve_general(inst.bifunction, inst.region, inst.x,
                                     opts).z
                zo = oracle_resolve(inst.bifunction, inst.region, inst.x, grid)
                agree_slacks.append(2.0 * spacing - K.dist(zg, zo))
                agree_wits.append({"family": family, "instance": k,
                                   "route": "general-vs-oracle"})
                if inst.optimization:
                    zd = resolve_optimization(inst.bifunction.reduction(),
                                              inst.region, inst.x, opts).z
                    agree_slacks.append(spacing - K.dist(zd, zo))
                    agree_wits.append({"family": family, "instance": k,
                                       "route": "descent-vs-oracle"})
                # single-valuedness: re-solve with a shifted grid phase
                alt = SolverOptions(tol=base.tol, max_iters=base.max_iters,
                                    grid_spacing=spacing,
                                    bounding_radius=base.bounding_radius,
                                    seed=base.seed + 7919 + k)
                z2 = resolve_general(inst.bifunction, inst.region, inst.x,
                                     alt).z
                sv_slacks.append(spacing - K.dist(zg, z2))
                sv_wits.append({"family": family, "instance": k})
                ve = check_resolvent_equivalence(inst.bifunction, inst.region,
                                                 inst.x, grid, opts)
                if ve.worst_slack < eq_worst:
                    eq_worst, eq_wit = ve.worst_slack, ve.witness
            except HypequilError as exc:
                inconclusive += 1
                agree_wits.append({"family": family, "instance": k,
                                   "error": str(exc)})
                agree_slacks.append(-np.inf)
        out.append(_verdict(f"solver-oracle-agreement[{family}]", agree_slacks,
                            0.0, agree_wits, settings.agreement_instances))
        note(f"solver-oracle-agreement[{family}]: {_status(out[-1])}")
        out.append(_verdict(f"single-valuedness[{family}]", sv_slacks, 0.0,
                            sv_wits, settings.agreement_instances,
                            inconclusive=inconclusive))
        note(f"single-valuedness[{family}]: {_status(out[-1])}")
        out.append(_verdict(f"resolvent-equivalence[{family}]", [eq_worst],
                            1e-5, [eq_wit], settings.agreement_instances))
        note(f"resolvent-equivalence[{family}]: {_status(out[-1])}")

        inst = make_instance(family, seed=settings.seed + 6000 + fam_idx)
        grid = build_grid(inst.region, spacing, base.bounding_radius,
                          phase_seed=settings.seed)
        opts = _opts_for(inst, base, grid)
        v = check_firmly_nonspreading(inst.bifunction, inst.region,
                                      seed=settings.seed + 40 + fam_idx,
                                      trials=settings.nonspreading_pairs,
                                      opts=opts)
        v = _with_extras(v, name=f"firmly-nonspreading[{family}]",
                         family=family)
        out.append(v)
        note(f"firmly-nonspreading[{family}]: {_status(v)}")

        if family != "zero":
            g = inst.bifunction.reduction()
            p_star = minimize_objective(g, inst.region,
                                        SolverOptions(tol=1e-12))
            v = check_fixed_point_equivalence(inst.bifunction, inst.region,
                                              p_star, grid, opts)
            out.append(_with_extras(
                v, name=f"fixed-point-equivalence[{family}]", family=family))
            note(f"fixed-point-equivalence[{family}]: {_status(out[-1])}")
    return out


def _kkm_block(settings, base, note):
    slacks, wits = [], []
    cover_worst = np.inf
    rng = np.random.default_rng(settings.seed + 60)
    for k in range(settings.kkm_families):
        family = FAMILIES[k % len(FAMILIES)]
        inst = make_instance(family, seed=settings.seed + 7000 + k)
        size = int(rng.integers(1, 9))
        grid = build_grid(inst.region, settings.grid_spacing,
                          base.bounding_radius, phase_seed=settings.seed + k)
        opts = _opts_for(inst, base, grid)
        v = check_kkm_cover(inst.bifunction, inst.x, inst.region,
                            family_size=size, seed=settings.seed + 8000 + k,
                            opts=opts, grid=grid)
        slacks.append(v.worst_slack)
        wits.append(dict(v.witness, family=family, size=size))
        cover_worst = min(cover_worst, v.extras["cover_slack"])
    out = _verdict("kkm-cover", slacks, 1e-6, wits, settings.kkm_families,
                   extras={"worst_hull_cover_slack": float(cover_worst)})
    note(f"kkm-cover: {_status(out)}")
    return [out]


def _ppa_block(settings, base, note):
    slacks, wits = [], []
    details = {}
    for fam_idx, family in enumerate(("single-cosh", "weighted-cosh",
                                      "distance")):
        inst = make_instance(family, seed=settings.seed + 9000 + fam_idx)
        g = inst.bifunction.reduction()
        p_star = minimize_objective(g, inst.region, SolverOptions(tol=1e-12))
        grid = build_grid(inst.region, settings.grid_spacing,
                          base.bounding_radius, phase_seed=settings.seed)
        opts = _opts_for(inst, base, grid)
        x0 = np.ascontiguousarray(inst.region.project(inst.x))
        trace = run_ppa(inst.bifunction, inst.region, x0,
                        constant_schedule(1.0), stop_tol=1e-9,
                        max_steps=settings.ppa_max_steps, opts=opts,
                        residual_grid=grid)
        ds = [K.dist(trace.start, p_star)] + [
            K.dist(np.ascontiguousarray(p), p_star) for p in trace.iterates]
        fejer = min((ds[i] + 1e-6) - ds[i + 1] for i in range(len(ds) - 1))
        slacks.append(min(fejer, 1e-4 - ds[-1],
                          trace.residuals[-1] + 10.0 * 1e-9 if trace.residuals
                          else -np.inf))
        wits.append({"family": family, "steps": len(trace),
                     "final_dist": float(ds[-1]), "status": trace.status})
        details[family] = {"steps": len(trace), "final_dist": float(ds[-1]),
                           "fejer_margin": float(fejer)}
    out = _verdict("ppa-convergence", slacks, 0.0, wits, len(slacks),
                   extras={"details": details})
    note(f"ppa-convergence: {_status(out)}")
    return [out]


def settings_from_verify(verify_cfg: dict, seed: int, solver_cfg: dict
                         ) -> SuiteSettings:
    return SuiteSettings(
        seed=seed,
        stewart_trials=verify_cfg["stewart_trials"],
        convexity_trials=verify_cfg["convexity_trials"],
        agreement_instances=verify_cfg["agreement_instances"],
        nonspreading_pairs=verify_cfg["nonspreading_pairs"],
        kkm_families=verify_cfg["kkm_families"],
        ppa_max_steps=verify_cfg["ppa_max_steps"],
        condition_samples=verify_cfg["condition_samples"],
        grid_spacing=solver_cfg["grid_spacing"],
        tol=solver_cfg["tol"])
