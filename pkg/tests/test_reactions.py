"""Slew-bearing wrench statics: lever arithmetic, pose kinematics,
conservation properties and the envelope sweep."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from femaudit.errors import EmptyLayout
from femaudit.reactions import (
    BoomMass,
    PlatformMass,
    PointWrench,
    PoseAngles,
    SuperstructureLayout,
    SweepResult,
    compute_wrench,
    sweep_csv,
    sweep_envelope,
)

G = (0.0, 0.0, -9.81)


def _single_platform(mass=100e3, pos=(0.0, 1.0, 0.0)):
    return SuperstructureLayout(items=(PlatformMass("block", mass, pos),))


def _boom_layout(lever=20.0, offset=0.0, mass=70e3, pivot=2.0):
    return SuperstructureLayout(
        items=(BoomMass("boom", mass, lever, offset),),
        pivot_height=pivot)


class TestComputeWrench:
    def test_single_offset_mass(self):
        w = compute_wrench(_single_platform(), PoseAngles(0.0, 0.0), G)
        assert_allclose(w.Fz, -981e3, rtol=1e-15)
        assert_allclose(w.Mx, -981e3, rtol=1e-15)
        assert w.My == 0.0 and w.Mz == 0.0
        assert w.Fx == 0.0 and w.Fy == 0.0

    def test_symmetric_pair_cancels_moment(self):
        layout = SuperstructureLayout(items=(
            PlatformMass("a", 50e3, (0.0, 3.0, 1.0)),
            PlatformMass("b", 50e3, (0.0, -3.0, 1.0)),
        ))
        for psi in (0.0, 30.0, -75.0):
            w = compute_wrench(layout, PoseAngles(psi, 0.0), G)
            assert_allclose(w.Mx, 0.0, atol=1e-9)
            assert_allclose(w.My, 0.0, atol=1e-9)

    def test_boom_cg_at_slew_45(self):
        layout = _boom_layout(lever=20.0, pivot=0.0)
        w = compute_wrench(layout, PoseAngles(45.0, 0.0), G)
        # CG lands at x = y = 20 cos45 = 14.142...; M = arm x (m g)
        arm = 20.0 * np.cos(np.radians(45.0))
        assert_allclose(arm, 14.142135623730951, rtol=1e-15)
        fz = -70e3 * 9.81
        assert_allclose(w.Mx, arm * fz, rtol=1e-12)
        assert_allclose(w.My, -arm * fz, rtol=1e-12)

    def test_luff_shortens_horizontal_lever(self):
        layout = _boom_layout(lever=20.0, offset=0.0, pivot=2.0)
        w = compute_wrench(layout, PoseAngles(0.0, 9.0), G)
        arm = 20.0 * np.cos(np.radians(9.0))
        fz = -70e3 * 9.81
        assert_allclose(w.My, -arm * fz, rtol=1e-12)
        assert_allclose(w.Mx, 0.0, atol=1e-6)

    def test_vertical_offset_pitches_with_boom(self):
        # a point at (lever, offset) must rotate rigidly: its horizontal
        # distance is r cos(phi) - h sin(phi)
        r, h = 20.0, 5.0
        layout = _boom_layout(lever=r, offset=h, pivot=0.0)
        phi = -9.0
        w = compute_wrench(layout, PoseAngles(0.0, phi), G)
        c, s = np.cos(np.radians(phi)), np.sin(np.radians(phi))
        arm = r * c - h * s
        fz = -70e3 * 9.81
        assert_allclose(w.My, -arm * fz, rtol=1e-12)

    def test_gravity_only_structure(self):
        # Fx, Fy and Mz vanish identically for any pose and any layout
        rng = np.random.default_rng(17)
        items = [PlatformMass("p", 40e3, tuple(rng.uniform(-5, 5, 3))),
                 BoomMass("b", 70e3, 22.0, 3.0),
                 BoomMass("cw", 30e3, -9.0, 1.0)]
        layout = SuperstructureLayout(items=tuple(items), pivot_height=2.0)
        for psi, phi in ((0, 0), (45, 9), (-110, -9), (13.7, 4.2)):
            w = compute_wrench(layout, PoseAngles(psi, phi), G)
            assert w.Fx == 0.0 and w.Fy == 0.0 and w.Mz == 0.0

    def test_fz_pose_invariant_bitwise(self):
        layout = SuperstructureLayout(
            items=(PlatformMass("p", 40e3, (1.0, 2.0, 0.5)),
                   BoomMass("b", 70e3, 22.0, 3.0)),
            pivot_height=2.0)
        ref = compute_wrench(layout, PoseAngles(0.0, 0.0), G).Fz
        for psi, phi in ((45, 9), (-110, -9), (77.3, -3.1)):
            assert compute_wrench(layout, PoseAngles(psi, phi), G).Fz == ref

    def test_slew_rotates_moments(self):
        layout = SuperstructureLayout(
            items=(PlatformMass("p", 40e3, (1.0, 2.0, 0.5)),
                   BoomMass("b", 70e3, 22.0, 3.0)),
            pivot_height=2.0)
        psi = 33.0
        w0 = compute_wrench(layout, PoseAngles(0.0, 5.0), G)
        w1 = compute_wrench(layout, PoseAngles(psi, 5.0), G)
        c, s = np.cos(np.radians(psi)), np.sin(np.radians(psi))
        expected = (c * w0.Mx - s * w0.My, s * w0.Mx + c * w0.My)
        scale = abs(w0.Mx) + abs(w0.My)
        assert abs(w1.Mx - expected[0]) <= 1e-12 * scale
        assert abs(w1.My - expected[1]) <= 1e-12 * scale

    def test_moment_shift_theorem_vertical(self):
        # same physical configuration seen from a bearing center c higher:
        # M' = M + (O - Q) x F with a non-vertical F from a process force
        c = 1.5
        pw = PointWrench("dig", lever=25.0, offset=0.0,
                         force=(3e4, 1e4, -2e4))
        base = SuperstructureLayout(
            items=(BoomMass("b", 70e3, 22.0, 3.0),),
            pivot_height=2.0, point_wrenches=(pw,))
        lifted = SuperstructureLayout(
            items=base.items, pivot_height=2.0 - c, point_wrenches=(pw,))
        pose = PoseAngles(20.0, -5.0)
        w = compute_wrench(base, pose, G)
        wq = compute_wrench(lifted, pose, G)
        f = np.array([w.Fx, w.Fy, w.Fz])
        m = np.array([w.Mx, w.My, w.Mz])
        expected = m + np.cross([0.0, 0.0, -c], f)
        scale = np.abs(m).max()
        assert_allclose([wq.Mx, wq.My, wq.Mz], expected,
                        rtol=0, atol=1e-12 * scale)
        assert_allclose([wq.Fx, wq.Fy, wq.Fz], f, rtol=0, atol=0)

    def test_moment_shift_theorem_horizontal(self):
        # platform-only layout at zero slew, bearing center moved by r
        r = np.array([2.0, -1.0, 0.0])
        pos = np.array([1.0, 4.0, 0.5])
        base = _single_platform(mass=50e3, pos=tuple(pos))
        shifted = _single_platform(mass=50e3, pos=tuple(pos - r))
        pose = PoseAngles(0.0, 0.0)
        w = compute_wrench(base, pose, G)
        wq = compute_wrench(shifted, pose, G)
        f = np.array([w.Fx, w.Fy, w.Fz])
        m = np.array([w.Mx, w.My, w.Mz])
        expected = m + np.cross(-r, f)
        assert_allclose([wq.Mx, wq.My, wq.Mz], expected,
                        rtol=0, atol=1e-12 * np.abs(m).max())

    def test_point_wrench_rotates_with_pose(self):
        pw = PointWrench("dig", lever=25.0, offset=0.0, force=(0.0, 0.0, -1e4),
                         moment=(0.0, 0.0, 5e3))
        layout = SuperstructureLayout(items=(), point_wrenches=(pw,))
        w = compute_wrench(layout, PoseAngles(90.0, 0.0), G)
        # boom now along +y: the lever arm becomes (0, 25, 0)
        assert_allclose(w.Fz, -1e4, rtol=1e-15)
        assert_allclose(w.Mx, 25.0 * -1e4, rtol=1e-12)
        assert_allclose(w.My, 0.0, atol=1e-9)
        assert_allclose(w.Mz, 5e3, rtol=1e-12)

    def test_empty_layout(self):
        layout = SuperstructureLayout(items=())
        with pytest.raises(EmptyLayout):
            compute_wrench(layout, PoseAngles(0.0, 0.0), G)

    def test_envelope_warning(self):
        layout = _single_platform()
        with pytest.warns(UserWarning, match="envelope"):
            compute_wrench(layout, PoseAngles(135.0, 0.0), G)
        with pytest.warns(UserWarning, match="envelope"):
            compute_wrench(layout, PoseAngles(0.0, 12.0), G)

    def test_validation(self):
        with pytest.raises(ValueError):
            PlatformMass("x", -5.0, (0, 0, 0))
        with pytest.raises(ValueError):
            BoomMass("x", 1.0, float("nan"))
        with pytest.raises(ValueError):
            PoseAngles(float("inf"), 0.0)
        with pytest.raises(ValueError):
            SuperstructureLayout(items=(), boom_direction=(0.0, 0.0, 1.0))
        with pytest.raises(TypeError):
            SuperstructureLayout(items=("boom",))


class TestSweep:
    def _layout(self):
        return SuperstructureLayout(
            items=(BoomMass("boom", 70e3, 22.0, 5.0),
                   BoomMass("cw", 30e3, -9.0, 0.0),
                   PlatformMass("house", 25e3, (-2.0, 0.0, 3.0))),
            pivot_height=2.0)

    def test_row_order_and_count(self):
        res = sweep_envelope(self._layout(), (-110, 0, 110), (-9, 0, 9), G)
        assert len(res.rows) == 9
        poses = [(r.pose.slew_deg, r.pose.luff_deg) for r in res.rows]
        assert poses == [(-110, -9), (-110, 0), (-110, 9),
                         (0, -9), (0, 0), (0, 9),
                         (110, -9), (110, 0), (110, 9)]

    def test_fz_constant_across_rows(self):
        res = sweep_envelope(self._layout(), (-110, -55, 0, 55, 110),
                             (-9, -4.5, 0, 4.5, 9), G)
        values = {r.wrench.Fz for r in res.rows}
        assert len(values) == 1

    def test_governing_matches_brute_force(self):
        layout = self._layout()
        slews = np.linspace(-110, 110, 12)
        luffs = np.linspace(-9, 9, 7)
        res = sweep_envelope(layout, slews, luffs, G)
        norms = [r.moment_norm for r in res.rows]
        assert res.governing.moment_norm == max(norms)
        best = res.rows[int(np.argmax(norms))]
        assert res.governing is best

    def test_single_pose_grid(self):
        res = sweep_envelope(self._layout(), (45.0,), (9.0,), G)
        assert len(res.rows) == 1
        assert res.governing is res.rows[0]

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_envelope(self._layout(), (), (0.0,), G)
        with pytest.raises(ValueError):
            sweep_envelope(self._layout(), (0.0,), (), G)

    def test_csv_shape_and_round_trip(self):
        res = sweep_envelope(self._layout(), (0.0, 45.0), (-9.0, 9.0), G)
        text = sweep_csv(res)
        lines = text.strip().split("\n")
        assert lines[0] == "psi_deg,phi_deg,Fx,Fy,Fz,Mx,My,Mz"
        assert len(lines) == 5
        first = [float(v) for v in lines[1].split(",")]
        assert first[0] == 0.0 and first[1] == -9.0
        assert first[4] == res.rows[0].wrench.Fz

    def test_out_of_envelope_rows_do_not_warn(self):
        import warnings as w
        with w.catch_warnings():
            w.simplefilter("error")
            sweep_envelope(self._layout(), (-170, 170), (0,), G)
