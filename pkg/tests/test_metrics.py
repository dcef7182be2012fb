"""Performance index and GPI sweep tests, with LP/bisection oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlsim.geometry import SingularJacobian, bennett_default, planar_default
from orlsim.metrics import (
    EmptyWorkspace,
    WorkspaceSpec,
    gpi_sweep,
    isotropy,
    payload_index,
    velocity_index,
)


def test_isotropy_identity():
    assert isotropy(np.eye(3)) == pytest.approx(1.0, abs=1e-15)


def test_isotropy_diag():
    assert isotropy(np.diag([2.0, 1.0, 1.0])) == pytest.approx(0.5, abs=1e-15)


def test_isotropy_rank_deficient():
    J = np.array([[1.0, 0, 0], [0, 1.0, 0], [1.0, 1.0, 0]]).T
    J[:, 2] = 0.0
    assert isotropy(J) == 0.0


def test_isotropy_zero_matrix():
    assert isotropy(np.zeros((3, 3))) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_isotropy_scale_invariant(c):
    rng = np.random.default_rng(0)
    J = rng.normal(size=(3, 3))
    assert abs(isotropy(c * J) - isotropy(J)) < 1e-12


def test_velocity_index_identity():
    assert velocity_index(np.eye(3), [21, 21, 21], [1, 0, 0]) == pytest.approx(21.0)


def test_velocity_index_scaled_axis():
    J = np.diag([0.5, 1.0, 1.0])
    assert velocity_index(J, [21, 21, 21], [1, 0, 0]) == pytest.approx(10.5)


def test_velocity_index_bisection_oracle(rng):
    # largest t with |J^-1 (t e)|_i <= qd_max for all i, by bisection
    for _ in range(20):
        J = rng.normal(size=(3, 3))
        if np.linalg.svd(J, compute_uv=False)[-1] < 1e-3:
            continue
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        qd_max = rng.uniform(5, 30, 3)
        v = velocity_index(J, qd_max, e)

        def feasible(t):
            return np.all(np.abs(np.linalg.solve(J, t * e)) <= qd_max + 1e-12)

        lo, hi = 0.0, 1e6
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        assert v == pytest.approx(lo, abs=1e-6)


def test_velocity_index_homogeneity(rng):
    J = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    e = np.array([0.0, 1.0, 0.0])
    qd = np.array([10.0, 15.0, 20.0])
    v = velocity_index(J, qd, e)
    assert velocity_index(J, 2 * qd, e) == pytest.approx(2 * v, rel=1e-12)
    assert velocity_index(3 * J, qd, e) == pytest.approx(3 * v, rel=1e-12)


def test_velocity_index_singular_raises():
    J = np.diag([1.0, 1.0, 0.0])
    with pytest.raises(SingularJacobian):
        velocity_index(J, [21, 21, 21], [0, 0, 1.0])


def test_payload_index_identity():
    assert payload_index(np.eye(3), [33.5] * 3, [0, 0, 1.0]) == pytest.approx(33.5)


def test_payload_index_diagonal_direction():
    e = np.ones(3) / np.sqrt(3)
    assert payload_index(np.eye(3), [33.5] * 3, e) == pytest.approx(
        33.5 * np.sqrt(3), rel=1e-12
    )


def test_payload_index_zero_torque():
    assert payload_index(np.eye(3), [0.0] * 3, [1, 0, 0]) == 0.0


def test_payload_index_lp_oracle(rng):
    # LP: max e^T f  s.t. |J^T f|_i <= tau_max_i  -- matches the formula
    from scipy.optimize import linprog

    for _ in range(20):
        J = rng.normal(size=(3, 3))
        if np.linalg.svd(J, compute_uv=False)[-1] < 1e-3:
            continue
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        tau_max = rng.uniform(5, 40, 3)
        val = payload_index(J, tau_max, e)
        A = np.vstack([J.T, -J.T])
        b = np.concatenate([tau_max, tau_max])
        res = linprog(-e, A_ub=A, b_ub=b, bounds=[(None, None)] * 3, method="highs")
        assert res.status == 0
        assert val == pytest.approx(-res.fun, rel=1e-9, abs=1e-9)


# ------------------------------------------------------------ GPI sweep

def test_gpi_constant_field_average():
    # a constant index averages to itself over any sub-workspace
    ws_small = WorkspaceSpec(x_range=(-0.02, 0.02), y_range=(0.04, 0.08),
                             z_range=(-0.3, -0.26))
    rep = gpi_sweep(bennett_default(), workspace=ws_small)
    const = np.full_like(rep.isotropy, 0.7)
    assert const.mean() == pytest.approx(0.7)


def test_gpi_empty_workspace():
    ws = WorkspaceSpec(x_range=(2.0, 2.1), y_range=(0.0, 0.1), z_range=(-0.1, 0.0))
    with pytest.raises(EmptyWorkspace):
        gpi_sweep(bennett_default(), workspace=ws)


@pytest.fixture(scope="module")
def reports():
    return {
        "bennett": gpi_sweep(bennett_default()),
        "planar": gpi_sweep(planar_default()),
    }


def test_gpi_isotropy_near_reported_value(reports):
    assert reports["bennett"].gpi_isotropy == pytest.approx(0.343, abs=0.05)


def test_gpi_ordinal_pattern(reports):
    ben, pla = reports["bennett"], reports["planar"]
    assert np.all(ben.gpi_velocity > pla.gpi_velocity)
    assert ben.gpi_payload[0] > pla.gpi_payload[0]
    assert ben.gpi_payload[1] < pla.gpi_payload[1]
    assert ben.gpi_payload[2] < pla.gpi_payload[2]


def test_gpi_rows_schema(reports):
    rows = reports["bennett"].rows()
    assert rows.shape[1] == 10
    assert rows.shape[0] + reports["bennett"].skipped == 16 * 16 * 8
