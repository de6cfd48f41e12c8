"""Equilibrium-problem resolvents on the hyperboloid model of H^n.

The geometric core (Minkowski form, distances, geodesics, exp/log maps)
backs a convex-region layer, a monotone-bifunction catalog, resolvent
solvers with independent grid oracles, a proximal point driver, and a
seeded property harness; the ``hypequil`` CLI runs batch experiments.
"""

from ._kernels import BACKEND_NAME
from .bifunctions import (Bifunction, CallableBifunction, ConditionReport,
                          CoshCombination, DistanceTo, MaxObjective,
                          Objective, ObjectiveDiff, PenalizedDiff,
                          bifunction_from_descriptor, certified_penalty_mu,
                          check_conditions, make_optimization_bifunction,
                          objective_from_descriptor, scale_bifunction,
                          zero_objective)
from .config import ExperimentConfig, parse_config
from .errors import (ConfigError, ConvergenceError, DegenerateRegionError,
                     HypequilError, InputError, InvariantViolation,
                     NoCertificateError, SamplingError)
from .geometry import (GeodesicSegment, TangentVec, dist, exp_map,
                       geodesic_point, hpoint, log_map, minkowski_form,
                       origin, project_to_hyperboloid, to_poincare_disk)
from .harness import (PropertyVerdict, check_cosh_convexity,
                      check_firmly_nonspreading, check_fixed_point_equivalence,
                      check_kkm_cover, check_resolvent_equivalence,
                      check_stewart, replay_slack)
from .ppa import (IterTrace, constant_schedule, equilibrium_residual,
                  geometric_schedule, run_ppa)
from .regions import (Ball, ConvexRegion, HalfSpace, Intersection, PointGrid,
                      WholeSpace, build_grid, convex_hull_samples,
                      region_from_descriptor, sample)
from .resolvent import (ResolventOutcome, SolverOptions,
                        characterization_residual, merit, minimize_objective,
                        oracle_resolve, resolve, resolve_general,
                        resolve_optimization)

__version__ = "0.1.0"
