"""Critical-point kinematics, wall clearance, and workspace deviation."""

import numpy as np
import pytest

from amsim.dynamics import AMParams, PlantState
from amsim.errors import ConfigError
from amsim.kinematics import (
    IX_DPSI,
    IX_PSI,
    OUTER_DIM,
    SL_DTH,
    SL_P,
    SL_TH,
    SL_V,
    CriticalPoint,
    WallPlane,
    WorkspaceSphere,
    critical_points,
    end_effector_state,
    wall_clearance,
    workspace_deviation,
)

from oracles import arm_point_oracle

PAR = AMParams.default()

# planner state at the oracle's dynamic spot check: base at origin, yaw 0
X_A = np.zeros(12)
X_A[SL_TH] = [0.4, -0.9]
X_A[SL_DTH] = [1.3, -0.7]
A_P_J2 = np.array([0.05841275134629757, 0.0, -0.13815914910043275])
A_V_J2 = np.array([0.1796068938305626, 0.0, 0.07593657675018685])
A_P_E = np.array([-0.013501079444332875, 0.0, -0.2697965333839887])
A_V_E = np.array([0.25858932440069615, 0.0, 0.032788278275808574])


def planner_state(rng):
    x = np.empty(OUTER_DIM)
    x[SL_P] = rng.uniform(-2, 2, 3)
    x[SL_V] = rng.uniform(-1, 1, 3)
    x[IX_PSI] = rng.uniform(-2.0, 2.0)
    x[IX_DPSI] = rng.uniform(-1.0, 1.0)
    x[SL_TH] = rng.uniform(-0.9, 0.9, 2)
    x[SL_DTH] = rng.uniform(-1.5, 1.5, 2)
    return x


class TestChainGeometry:
    def test_hanging_end_effector(self):
        p_e, _ = end_effector_state(np.zeros(12), PAR)
        np.testing.assert_allclose(p_e, [0, 0, -0.3], atol=1e-12)

    def test_arm_straight_out(self):
        x = np.zeros(12)
        x[SL_TH] = [np.pi / 2, 0.0]
        p_e, _ = end_effector_state(x, PAR)
        np.testing.assert_allclose(p_e, [0.3, 0, 0], atol=1e-12)

    def test_elbow_folded_up(self):
        x = np.zeros(12)
        x[SL_TH] = [np.pi / 2, np.pi / 2]
        pts = critical_points(x, PAR)
        np.testing.assert_allclose(pts[1].position, [0.15, 0, 0], atol=1e-12)
        np.testing.assert_allclose(pts[2].position, [0.15, 0, 0.15], atol=1e-12)

    def test_hanging_critical_points(self):
        pts = critical_points(np.zeros(12), PAR)
        assert [p.id for p in pts] == ["base", "joint2", "end_effector"]
        np.testing.assert_allclose(pts[0].position, [0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(pts[1].position, [0, 0, -0.15], atol=1e-12)
        np.testing.assert_allclose(pts[2].position, [0, 0, -0.3], atol=1e-12)

    def test_rigid_translation_velocity(self):
        x = np.zeros(12)
        x[SL_V] = [0.4, -0.2, 0.1]
        x[SL_TH] = [0.3, 0.5]
        _, v_e = end_effector_state(x, PAR)
        np.testing.assert_allclose(v_e, x[SL_V], atol=1e-12)

    def test_frozen_chain_state(self):
        pts = critical_points(X_A, PAR)
        np.testing.assert_allclose(pts[1].position, A_P_J2, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(pts[1].velocity, A_V_J2, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(pts[2].position, A_P_E, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(pts[2].velocity, A_V_E, rtol=1e-9, atol=1e-12)

    def test_oracle_sweep_static_base(self):
        oracle = arm_point_oracle()
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = np.zeros(12)
            x[SL_TH] = rng.uniform(-1.0, 1.0, 2)
            x[SL_DTH] = rng.uniform(-2.0, 2.0, 2)
            ref = oracle(*x[SL_TH], *x[SL_DTH], *PAR.l_links)
            pts = critical_points(x, PAR)
            np.testing.assert_allclose(pts[1].position, ref["p_j2"], atol=1e-10)
            np.testing.assert_allclose(pts[1].velocity, ref["v_j2"], atol=1e-10)
            np.testing.assert_allclose(pts[2].position, ref["p_e"], atol=1e-10)
            np.testing.assert_allclose(pts[2].velocity, ref["v_e"], atol=1e-10)

    def test_link_lengths_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            pts = critical_points(planner_state(rng), PAR)
            d1 = np.linalg.norm(pts[1].position - pts[0].position)
            d2 = np.linalg.norm(pts[2].position - pts[1].position)
            assert d1 == pytest.approx(PAR.l_links[0], abs=1e-12)
            assert d2 == pytest.approx(PAR.l_links[1], abs=1e-12)
            reach = np.linalg.norm(pts[2].position - pts[0].position)
            assert reach <= PAR.l_links.sum() + 1e-12

    def test_velocity_is_position_rate(self):
        # drift the planner state along constant rates; d/dt of position
        # must match the reported velocity for every critical point
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = planner_state(rng)

            def drift(t, x=x):
                y = x.copy()
                y[SL_P] = x[SL_P] + t * x[SL_V]
                y[IX_PSI] = x[IX_PSI] + t * x[IX_DPSI]
                y[SL_TH] = x[SL_TH] + t * x[SL_DTH]
                return y

            eps = 1e-6
            for k in range(3):
                fwd = critical_points(drift(eps), PAR)[k].position
                bwd = critical_points(drift(-eps), PAR)[k].position
                v_fd = (fwd - bwd) / (2 * eps)
                v = critical_points(x, PAR)[k].velocity
                np.testing.assert_allclose(v, v_fd, rtol=1e-6, atol=1e-8)

    def test_plant_state_matches_planner_at_level_attitude(self):
        rng = np.random.default_rng(9)
        x = planner_state(rng)
        s = PlantState(
            p_I=x[SL_P].copy(),
            v_I=x[SL_V].copy(),
            Phi=np.array([0.0, 0.0, x[IX_PSI]]),
            omega_B=np.array([0.0, 0.0, x[IX_DPSI]]),
            Theta=x[SL_TH].copy(),
            Theta_dot=x[SL_DTH].copy(),
        )
        for a, b in zip(critical_points(x, PAR), critical_points(s, PAR)):
            np.testing.assert_allclose(a.position, b.position, atol=1e-12)
            np.testing.assert_allclose(a.velocity, b.velocity, atol=1e-12)


class TestJacobians:
    def test_finite_difference(self):
        rng = np.random.default_rng(17)
        eps = 1e-6
        for _ in range(30):
            x = planner_state(rng)
            pts = critical_points(x, PAR)
            for k in range(3):
                jp = np.zeros((3, OUTER_DIM))
                jv = np.zeros((3, OUTER_DIM))
                for i in range(OUTER_DIM):
                    dx = np.zeros(OUTER_DIM)
                    dx[i] = eps
                    fwd = critical_points(x + dx, PAR)[k]
                    bwd = critical_points(x - dx, PAR)[k]
                    jp[:, i] = (fwd.position - bwd.position) / (2 * eps)
                    jv[:, i] = (fwd.velocity - bwd.velocity) / (2 * eps)
                np.testing.assert_allclose(pts[k].jac_p, jp, atol=1e-6)
                np.testing.assert_allclose(pts[k].jac_v, jv, atol=1e-6)


class TestWalls:
    def test_axis_aligned_example(self):
        wall = WallPlane(normal_coeffs=[1, 0, 0], offset=1.0)
        s = wall_clearance(np.array([0.5, 2.0, 3.0]), wall)
        np.testing.assert_allclose(s, [1.5, 0, 0], atol=1e-12)

    def test_point_on_plane(self):
        wall = WallPlane(normal_coeffs=[0, 1, 0], offset=-2.0)
        s = wall_clearance(np.array([7.0, 2.0, -1.0]), wall)
        np.testing.assert_allclose(s, 0, atol=1e-12)

    def test_normalization_on_ingestion(self):
        wall = WallPlane(normal_coeffs=[0, 0, 2], offset=4.0)
        np.testing.assert_allclose(wall.normal_coeffs, [0, 0, 1], atol=1e-12)
        assert wall.offset == pytest.approx(2.0)

    def test_random_planes_distance_and_alignment(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            n = rng.normal(size=3)
            wall = WallPlane(normal_coeffs=n, offset=rng.normal())
            pt = rng.uniform(-3, 3, 3)
            s = wall_clearance(pt, wall)
            direct = abs(wall.normal_coeffs @ pt + wall.offset)
            assert np.linalg.norm(s) == pytest.approx(direct, abs=1e-12)
            np.testing.assert_allclose(
                np.cross(s, wall.normal_coeffs), 0, atol=1e-12
            )

    def test_degenerate_normal_rejected(self):
        with pytest.raises(ConfigError):
            WallPlane(normal_coeffs=[0, 0, 0], offset=1.0)


class TestWorkspace:
    def test_at_center(self):
        ws = WorkspaceSphere()
        p_d = np.array([1.0, 2.0, 3.0])
        x = np.zeros(12)
        x[SL_P] = ws.center(p_d)
        np.testing.assert_allclose(workspace_deviation(x, p_d, ws), 0, atol=1e-12)

    def test_offset_example(self):
        ws = WorkspaceSphere(d_iw=[0, 0, 0.225], r=0.3)
        x = np.zeros(12)
        x[SL_P] = [0.4, -0.1, 1.0]
        d = workspace_deviation(x, x[SL_P], ws)
        np.testing.assert_allclose(d, [0, 0, 0.225], atol=1e-12)

    def test_translation_invariance(self):
        ws = WorkspaceSphere()
        rng = np.random.default_rng(31)
        x = planner_state(rng)
        p_d = rng.uniform(-1, 1, 3)
        shift = rng.uniform(-5, 5, 3)
        d0 = workspace_deviation(x, p_d, ws)
        y = x.copy()
        y[SL_P] = x[SL_P] + shift
        d1 = workspace_deviation(y, p_d + shift, ws)
        np.testing.assert_allclose(d0, d1, atol=1e-12)

    def test_default_geometry_sits_above(self):
        ws = WorkspaceSphere()
        p_d = np.array([0.0, 0.0, 1.0])
        assert ws.center(p_d)[2] == pytest.approx(1.225)

    def test_bad_radius_rejected(self):
        with pytest.raises(ConfigError):
            WorkspaceSphere(r=0.0)
