"""Overconstrained-limb quadruped simulation stack.

Kinematics and dynamics of a reconfigurable Bennett/planar four-bar leg,
a single-rigid-body locomotion plant with condensed-QP model predictive
stance control, and a cost-of-transport experiment harness.
"""

import os as _os

# The control-rate solves work on matrices of order ~100 where threaded
# BLAS only adds dispatch latency (badly so on oversubscribed boxes);
# respect explicit user settings, otherwise pin to one thread.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

try:  # effective even when numpy was imported before us
    from threadpoolctl import threadpool_limits as _tp_limits

    _TP_LIMIT = _tp_limits(limits=1)  # held for the process lifetime
except Exception:  # pragma: no cover - optional dependency
    pass

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    LimbGeometry,
    JointLimits,
    DEFAULT_LIMITS,
    bennett_default,
    planar_default,
    limb_for_variant,
    forward_kinematics,
    inverse_kinematics,
    jacobian_active,
    expand_active_to_tree,
    closure_planar,
    tree_velocity,
    g_matrix,
)
