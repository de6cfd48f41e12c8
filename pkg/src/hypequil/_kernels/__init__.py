"""Kernel backend selection.

The compiled extension is preferred when present; the NumPy fallback is
API-identical.  Set ``HYPEQUIL_PURE=1`` to force the fallback (used by the
benchmark and the backend-parity tests).
"""

import os

from . import _fallback

if os.environ.get("HYPEQUIL_PURE", "").strip().lower() in {"1", "true", "yes"}:
    impl = _fallback
else:
    try:
        from . import _native as impl  # type: ignore[attr-defined]
    except ImportError:
        impl = _fallback

BACKEND_NAME = impl.BACKEND_NAME
TINY_DIST = _fallback.TINY_DIST

mink = impl.mink
mink_rows = impl.mink_rows
cosh_dist = impl.cosh_dist
dist = impl.dist
cosh_dist_rows = impl.cosh_dist_rows
cosh_dist_table = impl.cosh_dist_table
dist_rows = impl.dist_rows
normalize = impl.normalize
resheet = impl.resheet
geodesic_point = impl.geodesic_point
exp_map = impl.exp_map
log_map = impl.log_map
tangent_project = impl.tangent_project
batch_exp_map = impl.batch_exp_map
stewart_worst = impl.stewart_worst
cosh_convexity_worst = impl.cosh_convexity_worst
oracle_scan_diff = impl.oracle_scan_diff
oracle_scan_penalized = impl.oracle_scan_penalized
