import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcsim.kinematics import (
    ChainModel,
    DhRow,
    JOINT_LIMIT_RAD,
    JointAngles,
    JointKind,
    MODULE_ROWS,
    NEXT_MODULE_ROW,
    PITCH_ROW,
    Transform,
    YAW_ROW,
    chain_fk,
    dh_transform,
    module_fk,
    preset_configuration,
    rotation_to_quaternion,
    wrap_angle,
    zero_config_length_cm,
)


# Independent oracle: explicit homogeneous elementary transforms composed in
# the stated order Rx(alpha) * Tx(a) * Rz(theta) * Tz(d).

def _h_rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([
        [1, 0, 0, 0],
        [0, c, -s, 0],
        [0, s, c, 0],
        [0, 0, 0, 1],
    ], dtype=float)


def _h_rot_z(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([
        [c, -s, 0, 0],
        [s, c, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
    ], dtype=float)


def _h_trans(x, y, z):
    m = np.eye(4)
    m[:3, 3] = (x, y, z)
    return m


def oracle_row(a, alpha, d, theta):
    return _h_rot_x(alpha) @ _h_trans(a, 0, 0) @ _h_rot_z(theta) @ _h_trans(0, 0, d)


def oracle_module(q_p, q_y):
    return (
        oracle_row(28.0, -math.pi / 2, 0.0, q_p)
        @ oracle_row(0.0, math.pi / 2, 0.0, q_y)
        @ oracle_row(8.4, 0.0, 0.0, 0.0)
    )


angles = st.floats(-JOINT_LIMIT_RAD, JOINT_LIMIT_RAD)


class TestDhTransform:
    def test_all_zero_row_is_identity(self):
        t = dh_transform(DhRow(0.0, 0.0, 0.0), 0.0)
        assert np.allclose(t.matrix(), np.eye(4), atol=1e-12)

    def test_pitch_row_at_zero(self):
        t = dh_transform(PITCH_ROW, 0.0)
        expect = oracle_row(28.0, -math.pi / 2, 0.0, 0.0)
        assert np.allclose(t.matrix(), expect, atol=1e-12)
        assert np.allclose(t.translation, [28.0, 0.0, 0.0], atol=1e-12)
        assert np.allclose(t.rotation, _h_rot_x(-math.pi / 2)[:3, :3], atol=1e-12)

    def test_yaw_row_at_quarter_turn(self):
        t = dh_transform(YAW_ROW, math.pi / 2)
        expect = _h_rot_x(math.pi / 2) @ _h_rot_z(math.pi / 2)
        assert np.allclose(t.matrix(), expect, atol=1e-12)
        assert np.allclose(t.translation, [0.0, 0.0, 0.0], atol=1e-12)

    def test_fixed_row_ignores_q(self):
        t1 = dh_transform(NEXT_MODULE_ROW, 0.0)
        t2 = dh_transform(NEXT_MODULE_ROW, 1.234)
        assert np.allclose(t1.matrix(), t2.matrix(), atol=1e-15)

    @given(a=st.floats(-50, 50), alpha=st.floats(-math.pi, math.pi),
           d=st.floats(-50, 50), q=st.floats(-math.pi, math.pi))
    def test_matches_oracle(self, a, alpha, d, q):
        row = DhRow(a, alpha, d, joint_kind=JointKind.PITCH)
        t = dh_transform(row, q)
        assert np.allclose(t.matrix(), oracle_row(a, alpha, d, q), atol=1e-9)

    @given(a=st.floats(-50, 50), alpha=st.floats(-math.pi, math.pi), q=angles)
    def test_orthonormal(self, a, alpha, q):
        t = dh_transform(DhRow(a, alpha, 0.0, joint_kind=JointKind.YAW), q)
        assert t.is_orthonormal(tol=1e-9)


class TestModuleFk:
    def test_zero_config_length(self):
        t = module_fk(JointAngles())
        assert np.allclose(t.translation, [36.4, 0.0, 0.0], atol=1e-12)
        assert np.allclose(t.rotation, np.eye(3), atol=1e-12)
        assert abs(np.linalg.norm(t.translation) - 36.4) < 1e-12

    def test_full_pitch_matches_oracle(self):
        t = module_fk(JointAngles(math.pi / 2, 0.0))
        expect = oracle_module(math.pi / 2, 0.0)
        assert np.allclose(t.matrix(), expect, atol=1e-12)
        # End frame is pitched a quarter turn: the x axis maps onto -z.
        assert np.allclose(t.rotation @ [1, 0, 0], [0, 0, -1], atol=1e-12)

    def test_full_yaw_matches_oracle(self):
        t = module_fk(JointAngles(0.0, math.pi / 2))
        expect = oracle_module(0.0, math.pi / 2)
        assert np.allclose(t.matrix(), expect, atol=1e-12)
        assert np.allclose(t.rotation @ [1, 0, 0], [0, 1, 0], atol=1e-12)

    @given(q_p=angles, q_y=angles)
    def test_matches_oracle(self, q_p, q_y):
        t = module_fk(JointAngles(q_p, q_y))
        assert np.allclose(t.matrix(), oracle_module(q_p, q_y), atol=1e-9)

    def test_pitch_limit_violation_names_axis(self):
        with pytest.raises(ValueError, match="pitch"):
            module_fk(JointAngles(2.0, 0.0))

    def test_yaw_limit_violation_names_axis(self):
        with pytest.raises(ValueError, match="yaw"):
            module_fk(JointAngles(0.0, -2.0))


class TestChainFk:
    def test_four_body_zero_config(self):
        model = ChainModel(n_bodies=4)
        poses = chain_fk(model, [JointAngles()] * 3)
        assert len(poses) == 4
        assert np.allclose(poses[-1].translation, [3 * 36.4, 0.0, 0.0], atol=1e-9)
        assert abs(zero_config_length_cm(model) - 128.8) < 1e-9
        # Consistent with the registry total length within 0.2 cm.
        assert abs(zero_config_length_cm(model) - 128.7) <= 0.2

    def test_single_body(self):
        model = ChainModel(n_bodies=1)
        poses = chain_fk(model, [])
        assert len(poses) == 1
        assert np.allclose(poses[0].matrix(), np.eye(4), atol=1e-15)

    def test_arity_error(self):
        model = ChainModel(n_bodies=4)
        with pytest.raises(ValueError, match="expected 3"):
            chain_fk(model, [JointAngles()] * 2)

    def test_square_axes_perpendicular(self):
        model = ChainModel(n_bodies=4)
        poses = chain_fk(model, preset_configuration("square"))
        axes = [p.rotation[:, 0] for p in poses]
        for a, b in zip(axes, axes[1:]):
            assert abs(float(np.dot(a, b))) < 1e-9

    @given(qs=st.lists(st.tuples(angles, angles), min_size=3, max_size=3))
    @settings(max_examples=50)
    def test_equals_fold_of_module_fk(self, qs):
        model = ChainModel(n_bodies=4)
        poses = chain_fk(model, [JointAngles(*q) for q in qs])
        acc = Transform.identity()
        fold = [acc]
        for q in qs:
            acc = acc @ module_fk(JointAngles(*q))
            fold.append(acc)
        for p, f in zip(poses, fold):
            assert np.allclose(p.matrix(), f.matrix(), atol=1e-9)

    @given(qs=st.lists(st.tuples(angles, angles), min_size=3, max_size=3))
    @settings(max_examples=50)
    def test_orthonormality(self, qs):
        poses = chain_fk(ChainModel(n_bodies=4), [JointAngles(*q) for q in qs])
        for p in poses:
            assert p.is_orthonormal(tol=1e-9)

    def test_zero_config_collinear(self):
        poses = chain_fk(ChainModel(n_bodies=4), [JointAngles()] * 3)
        pts = np.array([p.translation for p in poses])
        assert np.allclose(pts[:, 1:], 0.0, atol=1e-9)

    @given(qs=st.lists(st.tuples(angles, angles), min_size=3, max_size=3))
    @settings(max_examples=50)
    def test_mirror_symmetry(self, qs):
        model = ChainModel(n_bodies=4)
        fwd = chain_fk(model, [JointAngles(p, y) for p, y in qs])
        mir = chain_fk(model, [JointAngles(p, -y) for p, y in qs])
        for a, b in zip(fwd, mir):
            ax, ay, az = a.translation
            bx, by, bz = b.translation
            assert abs(ax - bx) < 1e-9
            assert abs(ay + by) < 1e-9
            assert abs(az - bz) < 1e-9


class TestPresets:
    def test_straight(self):
        assert preset_configuration("straight") == [JointAngles(0.0, 0.0)] * 3

    def test_square(self):
        qs = preset_configuration("square")
        assert all(q.q_p == 0.0 and q.q_y == JOINT_LIMIT_RAD for q in qs)

    def test_m_shape_alternates(self):
        qs = preset_configuration("m_shape")
        assert [round(math.degrees(q.q_y)) for q in qs] == [75, -75, 75]
        assert all(q.q_p == 0.0 for q in qs)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            preset_configuration("zigzag")


class TestChainModel:
    def test_mass_registry_discrepancy_is_exposed(self):
        model = ChainModel(n_bodies=4)
        assert model.parts_mass_sum_kg == pytest.approx(7.32)
        assert model.reported_system_mass_kg == 6.1
        assert model.mass_discrepancy_kg == pytest.approx(1.22)

    def test_needs_at_least_one_body(self):
        with pytest.raises(ValueError):
            ChainModel(n_bodies=0)

    def test_joint_count(self):
        assert ChainModel(n_bodies=5).n_joints == 4


class TestHelpers:
    @given(st.floats(-20, 20))
    def test_wrap_angle_range(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert abs(math.sin(w) - math.sin(a)) < 1e-9
        assert abs(math.cos(w) - math.cos(a)) < 1e-9

    @given(q_p=angles, q_y=angles)
    def test_quaternion_unit_norm(self, q_p, q_y):
        t = module_fk(JointAngles(q_p, q_y))
        w, x, y, z = rotation_to_quaternion(t.rotation)
        assert abs(w * w + x * x + y * y + z * z - 1.0) < 1e-9
