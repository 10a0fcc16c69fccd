import math

import numpy as np
import numpy.testing as npt
import pytest

from squidsim.contact import PlanePatch
from squidsim.limbs import (IKResult, LimbConfig, LimbGeometry, TipPose,
                            UnreachableTargetError, forward_kinematics,
                            inverse_kinematics, mirror_config,
                            tendon_lengths, tip_contact)

GEOM = LimbGeometry()


def random_config(rng, geom=GEOM, scale=0.8):
    kappa = rng.uniform(0.05, scale * geom.curvature_limit,
                        size=geom.n_segments)
    phi = rng.uniform(-math.pi, math.pi, size=geom.n_segments)
    return LimbConfig(kappa=tuple(kappa), phi=tuple(phi))


# ---- forward kinematics ----


def test_straight_limb_reaches_full_length():
    pose = forward_kinematics(LimbConfig.straight(GEOM.n_segments), GEOM)
    npt.assert_allclose(pose.position, [0.0, 0.0, GEOM.length], atol=1e-12)
    npt.assert_allclose(pose.direction, [0.0, 0.0, 1.0], atol=1e-12)


def test_uniform_bend_matches_single_arc_formula():
    # Equal-curvature segments in one plane chain into a single arc.
    for kappa in (0.3, 1.0, 2.5, 5.0):
        config = LimbConfig(kappa=(kappa,) * GEOM.n_segments,
                            phi=(0.0,) * GEOM.n_segments)
        pose = forward_kinematics(config, GEOM)
        theta = kappa * GEOM.length
        expected = [(1.0 - math.cos(theta)) / kappa, 0.0,
                    math.sin(theta) / kappa]
        npt.assert_allclose(pose.position, expected, atol=1e-9)
        npt.assert_allclose(pose.direction,
                            [math.sin(theta), 0.0, math.cos(theta)],
                            atol=1e-9)


def test_bending_plane_rotates_with_phi():
    kappa, phi = 1.4, 0.9
    config = LimbConfig(kappa=(kappa,) * GEOM.n_segments,
                        phi=(phi,) * GEOM.n_segments)
    pose = forward_kinematics(config, GEOM)
    theta = kappa * GEOM.length
    radial = (1.0 - math.cos(theta)) / kappa
    expected = [radial * math.cos(phi), radial * math.sin(phi),
                math.sin(theta) / kappa]
    npt.assert_allclose(pose.position, expected, atol=1e-9)


def test_segment_count_does_not_change_a_uniform_arc():
    coarse = LimbGeometry(n_segments=1)
    for kappa in (0.0, 0.7, 3.0):
        fine_pose = forward_kinematics(
            LimbConfig(kappa=(kappa,) * GEOM.n_segments,
                       phi=(0.2,) * GEOM.n_segments), GEOM)
        coarse_pose = forward_kinematics(
            LimbConfig(kappa=(kappa,), phi=(0.2,)), coarse)
        npt.assert_allclose(fine_pose.position, coarse_pose.position,
                            atol=1e-12)


def test_near_straight_series_branch_is_smooth():
    # The series expansion must join the exact arc without a jump; this is
    # what keeps finite-difference probes usable near zero curvature.
    tiny = 1e-5
    below = forward_kinematics(
        LimbConfig(kappa=(tiny,) * 6, phi=(0.0,) * 6), GEOM)
    straight = forward_kinematics(LimbConfig.straight(6), GEOM)
    assert np.linalg.norm(below.position - straight.position) < 1e-5
    # And positions vary linearly in kappa through the switch point.
    a = forward_kinematics(LimbConfig(kappa=(9e-5 / 0.6,) * 6,
                                      phi=(0.0,) * 6), GEOM).position
    b = forward_kinematics(LimbConfig(kappa=(11e-5 / 0.6,) * 6,
                                      phi=(0.0,) * 6), GEOM).position
    assert np.linalg.norm(b - a) < 1e-5


def test_half_scale_geometry_is_similar():
    half = LimbGeometry.half_scale()
    rng = np.random.default_rng(21)
    for _ in range(20):
        config = random_config(rng)
        doubled = LimbConfig(kappa=tuple(2 * k for k in config.kappa),
                             phi=config.phi)
        full_tip = forward_kinematics(config, GEOM).position
        half_tip = forward_kinematics(doubled, half).position
        npt.assert_allclose(half_tip, 0.5 * full_tip, atol=1e-12)


def test_tip_stays_within_reach():
    rng = np.random.default_rng(22)
    for _ in range(300):
        pose = forward_kinematics(random_config(rng, scale=1.0), GEOM)
        assert np.linalg.norm(pose.position) <= GEOM.length + 1e-9
        assert np.linalg.norm(pose.direction) == pytest.approx(1.0)


# ---- tendons ----


def test_tendon_antisymmetry_is_exact():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        state = tendon_lengths(random_config(rng), GEOM)
        dl = state.length_change
        # Opposite tendons cancel exactly in floating point, not just
        # approximately: the same products feed both with flipped signs.
        assert dl[0] + dl[2] == 0.0
        assert dl[1] + dl[3] == 0.0


def test_tendon_lengths_match_fine_quadrature():
    # Independent oracle: integrate r(s) kappa(s) cos(phi(s) - beta_i) along
    # the backbone with midpoint sampling.
    rng = np.random.default_rng(24)
    betas = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    steps_per_segment = 2000
    h = GEOM.segment_length / steps_per_segment
    for _ in range(20):
        config = random_config(rng)
        state = tendon_lengths(config, GEOM)
        integrals = np.zeros(4)
        for j in range(GEOM.n_segments):
            for k in range(steps_per_segment):
                s = j * GEOM.segment_length + (k + 0.5) * h
                arm = GEOM.tendon_offset_ratio * GEOM.local_radius(s)
                for i, beta in enumerate(betas):
                    integrals[i] -= (arm * config.kappa[j]
                                     * math.cos(config.phi[j] - beta) * h)
        npt.assert_allclose(state.length_change, integrals, atol=1e-9)


def test_straight_limb_has_zero_tendon_excursion():
    state = tendon_lengths(LimbConfig.straight(GEOM.n_segments), GEOM)
    npt.assert_allclose(state.length_change, np.zeros(4), atol=0.0)


def test_tendon_tension_never_negative():
    rng = np.random.default_rng(25)
    for _ in range(200):
        state = tendon_lengths(random_config(rng, scale=1.0), GEOM)
        assert (state.tension >= 0.0).all()


# ---- inverse kinematics ----


def test_ik_reaches_random_reachable_targets():
    rng = np.random.default_rng(26)
    for _ in range(100):
        target = forward_kinematics(random_config(rng), GEOM).position
        result = inverse_kinematics(target, GEOM)
        assert result.converged, f"IK stalled at {result.residual}"
        assert result.residual < 1e-4
        tip = forward_kinematics(result.config, GEOM).position
        assert np.linalg.norm(tip - target) < 1e-4


def test_ik_solution_respects_curvature_limit():
    rng = np.random.default_rng(27)
    for _ in range(50):
        target = forward_kinematics(random_config(rng), GEOM).position
        result = inverse_kinematics(target, GEOM)
        assert all(abs(k) <= GEOM.curvature_limit + 1e-9
                   for k in result.config.kappa)


def test_ik_rejects_unreachable_targets():
    with pytest.raises(UnreachableTargetError):
        inverse_kinematics(np.array([0.7, 0.0, 0.1]), GEOM)
    with pytest.raises(UnreachableTargetError):
        inverse_kinematics(np.array([0.0, 0.0, -0.7]), GEOM)


def test_ik_warm_start_tracks_small_steps():
    rng = np.random.default_rng(28)
    config = LimbConfig(kappa=(1.0,) * 6, phi=(0.0,) * 6)
    target = forward_kinematics(config, GEOM).position
    seed = config
    for _ in range(40):
        target = target + rng.uniform(-0.002, 0.002, size=3)
        if np.linalg.norm(target) > 0.95 * GEOM.length:
            target *= 0.95 * GEOM.length / np.linalg.norm(target)
        result = inverse_kinematics(target, GEOM, seed=seed)
        assert result.converged
        assert result.iterations <= 30
        seed = result.config


# ---- mirror symmetry ----


def test_mirror_flips_tip_y_exactly():
    rng = np.random.default_rng(29)
    for _ in range(100):
        config = random_config(rng, scale=1.0)
        pose = forward_kinematics(config, GEOM)
        mirrored = forward_kinematics(mirror_config(config), GEOM)
        assert mirrored.position[0] == pose.position[0]
        assert mirrored.position[1] == -pose.position[1]
        assert mirrored.position[2] == pose.position[2]
        assert mirrored.direction[1] == -pose.direction[1]


def test_mirror_is_an_involution():
    rng = np.random.default_rng(30)
    config = random_config(rng)
    assert mirror_config(mirror_config(config)) == config


def test_ik_mirror_consistency():
    # The mirror of an IK solution solves the mirrored target with the
    # identical residual.
    rng = np.random.default_rng(31)
    for _ in range(100):
        target = forward_kinematics(random_config(rng), GEOM).position
        result = inverse_kinematics(target, GEOM)
        mirrored_target = target * np.array([1.0, -1.0, 1.0])
        mirrored_tip = forward_kinematics(mirror_config(result.config),
                                          GEOM).position
        assert np.linalg.norm(mirrored_tip - mirrored_target) == \
            pytest.approx(result.residual, abs=1e-12)


# ---- tip contact ----


def test_tip_contact_force_on_penetration():
    patch = PlanePatch(normal=(0.0, 0.0, 1.0), offset=0.4,
                       center=(0.2, 0.0, 0.4), half_extents=(0.5, 0.5))
    inside = TipPose(position=np.array([0.2, 0.0, 0.39]),
                     direction=np.array([0.0, 0.0, -1.0]))
    force = tip_contact(inside, [patch], stiffness=500.0)
    npt.assert_allclose(force, [0.0, 0.0, 500.0 * 0.01], atol=1e-12)
    outside = TipPose(position=np.array([0.2, 0.0, 0.5]),
                      direction=np.array([0.0, 0.0, -1.0]))
    npt.assert_allclose(tip_contact(outside, [patch], 500.0), np.zeros(3))


def test_tip_contact_accepts_environment_object():
    class Env:
        patches = (PlanePatch(normal=(0.0, 0.0, 1.0), offset=0.4,
                              center=(0.2, 0.0, 0.4)),)

    inside = TipPose(position=np.array([0.2, 0.0, 0.395]),
                     direction=np.array([0.0, 0.0, -1.0]))
    force = tip_contact(inside, Env(), stiffness=100.0)
    assert force[2] == pytest.approx(0.5)


def test_geometry_validation():
    with pytest.raises(ValueError):
        LimbGeometry(tip_radius=0.05).validate()  # fatter than the base
    with pytest.raises(ValueError):
        LimbGeometry(length=-1.0).validate()
