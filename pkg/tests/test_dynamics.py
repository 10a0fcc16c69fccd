import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.optimize import brentq

from squidsim.dynamics import (VehicleParams, VehicleState, Wrench,
                               planar_inertia, planar_kinetic_energy,
                               step_dynamics)

PARAMS = VehicleParams()


def simulate(state, wrench, params, dt, steps):
    for _ in range(steps):
        state = step_dynamics(state, wrench, params, dt)
    return state


def test_default_yaw_inertia_is_slender_rod():
    # m L^2 / 12 for the rigid-body part.
    assert PARAMS.izz == pytest.approx(30.0 * 1.2 ** 2 / 12.0)


def test_planar_inertia_diagonal():
    m = planar_inertia(PARAMS)
    npt.assert_allclose(m, np.diag([30.0 + 10.0, 30.0 + 25.0,
                                    PARAMS.izz + 2.0]))


def test_rk4_fourth_order_convergence():
    """Halving dt should shrink the global error by about 2^4."""
    wrench = Wrench(X=8.0, Y=3.0, N=1.5)
    start = VehicleState()
    ref = simulate(start, wrench, PARAMS, 1e-4, 20000)
    ref_vec = np.array([ref.x, ref.y, ref.psi, ref.u, ref.v, ref.r])

    errors = []
    for dt in (0.02, 0.01):
        end = simulate(start, wrench, PARAMS, dt, int(round(2.0 / dt)))
        vec = np.array([end.x, end.y, end.psi, end.u, end.v, end.r])
        errors.append(np.linalg.norm(vec - ref_vec))
    ratio = errors[0] / errors[1]
    assert 12.0 <= ratio <= 20.0, f"convergence ratio {ratio}"


def test_unforced_motion_dissipates_energy():
    rng = np.random.default_rng(3)
    for _ in range(200):
        state = VehicleState(u=rng.uniform(-2, 2), v=rng.uniform(-2, 2),
                             r=rng.uniform(-2, 2), z=5.0,
                             psi=rng.uniform(-3, 3))
        energy = planar_kinetic_energy(state, PARAMS)
        for _ in range(50):
            state = step_dynamics(state, Wrench.zero(), PARAMS, 0.01)
            next_energy = planar_kinetic_energy(state, PARAMS)
            assert next_energy <= energy + 1e-12 * max(1.0, energy)
            energy = next_energy


def test_steady_surge_speed_matches_root_of_drag_balance():
    # Independent oracle: X = d_lin u + d_quad u^2 at equilibrium.
    wrench = Wrench(X=10.8)
    balance = lambda u: (PARAMS.drag_linear[0] * u
                         + PARAMS.drag_quadratic[0] * u * abs(u) - wrench.X)
    u_star = brentq(balance, 0.0, 5.0, xtol=1e-12)
    assert u_star == pytest.approx(1.0, abs=1e-9)  # sized to balance at 1 m/s

    state = simulate(VehicleState(z=5.0), wrench, PARAMS, 0.01, 30000)
    assert state.u == pytest.approx(u_star, abs=1e-6)
    assert abs(state.v) < 1e-9 and abs(state.r) < 1e-9


def test_heave_is_exactly_decoupled():
    planar = Wrench(X=7.0, Y=-2.0, N=0.5)
    a = simulate(VehicleState(z=5.0, w=0.0), planar, PARAMS, 0.01, 500)
    b = simulate(VehicleState(z=9.0, w=0.3), planar, PARAMS, 0.01, 500)
    # Different heave states, identical planar trajectories, bit for bit.
    assert (a.x, a.y, a.psi, a.u, a.v, a.r) == (b.x, b.y, b.psi, b.u, b.v,
                                                b.r)
    # And heave does not react to planar forcing.
    c = simulate(VehicleState(z=9.0, w=0.3), Wrench.zero(), PARAMS, 0.01, 500)
    assert (b.z, b.w) == (c.z, c.w)


def test_heave_force_moves_depth():
    state = simulate(VehicleState(z=2.0), Wrench(Z=20.0), PARAMS, 0.01, 1000)
    assert state.z > 2.0
    state = simulate(VehicleState(z=2.0), Wrench(Z=-20.0), PARAMS, 0.01, 1000)
    assert state.z < 2.0


def test_current_enters_kinematics_only():
    params_current = VehicleParams(current=(0.3, -0.2))
    wrench = Wrench(X=5.0, N=0.8)
    still = simulate(VehicleState(z=5.0), wrench, PARAMS, 0.01, 2000)
    drift = simulate(VehicleState(z=5.0), wrench, params_current, 0.01, 2000)
    # Body rates identical; the position differs by exactly current * t.
    assert (still.u, still.v, still.r, still.psi) == (drift.u, drift.v,
                                                      drift.r, drift.psi)
    t = still.t
    assert drift.x - still.x == pytest.approx(0.3 * t, abs=1e-9)
    assert drift.y - still.y == pytest.approx(-0.2 * t, abs=1e-9)


def test_surface_clamp_stops_upward_motion():
    state = VehicleState(z=0.005, w=-1.0)
    state = step_dynamics(state, Wrench.zero(), PARAMS, 0.01)
    assert state.z == 0.0
    assert state.w >= 0.0


def test_heading_stays_wrapped():
    state = VehicleState(z=5.0)
    for _ in range(5000):
        state = step_dynamics(state, Wrench(N=4.0), PARAMS, 0.01)
        assert -math.pi < state.psi <= math.pi


def test_time_accumulates():
    state = simulate(VehicleState(), Wrench.zero(), PARAMS, 0.01, 250)
    assert state.t == pytest.approx(2.5)


def test_step_rejects_bad_dt_and_nonfinite_wrench():
    state = VehicleState()
    with pytest.raises(ValueError):
        step_dynamics(state, Wrench.zero(), PARAMS, 0.0)
    with pytest.raises(ValueError):
        step_dynamics(state, Wrench.zero(), PARAMS, 0.2)
    with pytest.raises(ValueError):
        step_dynamics(state, Wrench(X=math.nan), PARAMS, 0.01)


def test_params_validation():
    with pytest.raises(ValueError):
        VehicleParams(mass=-1.0).validate()
    with pytest.raises(ValueError):
        VehicleParams(drag_linear=(-1.0, 20.0, 4.0, 20.0)).validate()


def test_kinetic_energy_matches_quadratic_form():
    rng = np.random.default_rng(5)
    m = planar_inertia(PARAMS)
    for _ in range(50):
        nu = rng.uniform(-2, 2, size=3)
        state = VehicleState(u=nu[0], v=nu[1], r=nu[2])
        expected = 0.5 * nu @ m @ nu
        assert planar_kinetic_energy(state, PARAMS) == pytest.approx(expected)
