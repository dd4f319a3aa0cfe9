import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from animqa.core import AnimationSequence, DistortionSpec, PoseSequence, pose_with_positions
from animqa.distortion import apply_distortion, distort_foot_contact
from animqa.errors import (
    AllJointsDegenerate,
    DegenerateDuration,
    DegeneratePath,
    JointCountMismatch,
    TooFewFrames,
)
from animqa.kinematic import (
    LDLJ_CEILING,
    JointTrajectory,
    extract_features,
    foot_contact_feature,
    global_translation_feature,
    joint_ldlj_differences,
    ldlj,
    mpjpe_feature,
    smoothness_feature,
    third_derivative,
    velocity_feature,
    velocity_term,
)
from oracles import ldlj_cubic_exact


def pose_seq(translations, positions=None, joints=1, fps=30.0):
    translations = np.asarray(translations, dtype=float)
    n = len(translations)
    if positions is None:
        positions = np.repeat(translations[:, None, :], joints, axis=1)
    positions = np.asarray(positions, dtype=float)
    return PoseSequence(np.zeros((n, positions.shape[1], 3)), translations, fps, positions)


def cubic(n=2000, scale=1.0):
    t = np.linspace(0.0, 1.0, n)
    x = np.zeros((n, 3))
    x[:, 0] = scale * t**3
    return x, (n - 1) / 1.0


class TestThirdDerivative:
    @pytest.mark.parametrize("n", [5, 6, 12])
    def test_exact_on_quartics(self, rng, n):
        h = 0.1
        t = np.arange(n) * h
        c = rng.normal(size=5)
        x = c[0] + c[1] * t + c[2] * t**2 + c[3] * t**3 + c[4] * t**4
        exact = 6 * c[3] + 24 * c[4] * t
        np.testing.assert_allclose(third_derivative(x, h), exact, atol=1e-8)

    def test_four_samples(self):
        x = np.array([0.0, 1.0, 8.0, 27.0])
        np.testing.assert_allclose(third_derivative(x, 1.0), 6.0)

    def test_too_few(self):
        with pytest.raises(TooFewFrames):
            third_derivative(np.zeros(3), 1.0)


class TestLDLJ:
    def test_cubic_fixture(self):
        x, fps = cubic()
        assert abs(ldlj(x, fps) - ldlj_cubic_exact()) <= 1e-3
        assert ldlj_cubic_exact() == pytest.approx(-3.5835, abs=1e-4)

    @pytest.mark.parametrize("s", [0.5, 3.0])
    def test_scale_invariant(self, s):
        x, fps = cubic()
        assert abs(ldlj(s * x, fps) - ldlj(x, fps)) <= 1e-6

    def test_constant_velocity_is_clamped(self):
        t = np.linspace(0, 1, 100)
        x = np.stack([t, 0 * t, 0 * t], axis=1)
        assert ldlj(x, 99) == LDLJ_CEILING

    def test_stationary_is_degenerate(self):
        with pytest.raises(DegeneratePath):
            ldlj(np.ones((10, 3)), 30)

    def test_too_few_frames(self):
        with pytest.raises(TooFewFrames):
            ldlj(np.arange(9.0).reshape(3, 3), 30)

    def test_time_rescaling_invariant(self):
        # dimensionless: the same path traversed faster scores the same
        x, _ = cubic(500)
        assert ldlj(x, 100) == pytest.approx(ldlj(x, 400), abs=1e-9)


class TestRootFeatures:
    def test_identity(self, walker):
        _, pose, _ = walker
        assert foot_contact_feature(pose, pose) == 0
        assert global_translation_feature(pose, pose) == 0
        assert mpjpe_feature(pose, pose) == 0

    def test_constant_offset(self):
        g = np.random.default_rng(0).normal(size=(6, 3))
        assert foot_contact_feature(pose_seq(g), pose_seq(g + [0, 0, 0.1])) == pytest.approx(0.1)

    def test_alternating_offsets(self):
        g = np.zeros((6, 3))
        off = np.array([[0, 0, 0.1], [0, 0, 0.3]] * 3)
        assert foot_contact_feature(pose_seq(g), pose_seq(g + off)) == pytest.approx(0.2)

    def test_f4_equals_f3_for_unit_scale_rig(self, small_walker):
        rig, pose, _ = small_walker
        gen = pose_with_positions(rig, distort_foot_contact(pose, 0.07))
        gen = pose_with_positions(rig, gen.replace(translations=gen.translations * 1.3))
        assert global_translation_feature(pose, gen) == pytest.approx(
            foot_contact_feature(pose, gen), abs=1e-12
        )

    def test_f4_ignores_limb_motion(self, small_walker):
        rig, pose, _ = small_walker
        rot = np.array(pose.rotations)
        rot[:, 1:] += 0.3
        gen = pose_with_positions(rig, pose.replace(rotations=rot))
        assert global_translation_feature(pose, gen) == 0.0
        assert mpjpe_feature(pose, gen) > 0.01

    def test_mpjpe_fixtures(self):
        z = np.zeros((2, 1, 3))
        a = PoseSequence(np.zeros((2, 1, 3)), np.zeros((2, 3)), joint_positions=z)
        b = PoseSequence(np.zeros((2, 1, 3)), np.zeros((2, 3)), joint_positions=z + [3, 4, 0])
        assert mpjpe_feature(a, b) == 5.0
        z2 = np.zeros((2, 2, 3))
        off = np.array([[1.0, 0, 0], [0, 2.0, 0]])
        a = PoseSequence(np.zeros((2, 2, 3)), np.zeros((2, 3)), joint_positions=z2)
        b = PoseSequence(np.zeros((2, 2, 3)), np.zeros((2, 3)), joint_positions=z2 + off)
        assert mpjpe_feature(a, b) == 1.5

    def test_mpjpe_joint_mismatch(self):
        a = pose_seq(np.zeros((3, 3)), joints=1)
        b = pose_seq(np.zeros((3, 3)), joints=2)
        with pytest.raises(JointCountMismatch):
            mpjpe_feature(a, b)

    def test_uniform_offset_gives_f7_equal_f3(self, small_walker):
        rig, pose, _ = small_walker
        gen = pose_with_positions(rig, distort_foot_contact(pose, 0.2))
        assert mpjpe_feature(pose, gen) == pytest.approx(foot_contact_feature(pose, gen), abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.integers(0, 100), min_size=2, max_size=6, unique=True))
    def test_f3_strictly_increasing_in_lift(self, cm):
        g = np.random.default_rng(1).normal(size=(5, 3))
        ref = pose_seq(g)
        lifts = sorted(c / 100 for c in cm)
        vals = [foot_contact_feature(ref, pose_seq(g + [0, 0, lz])) for lz in lifts]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def point_seq(xs, fps):
    return AnimationSequence(tuple(np.array([[x, 0.0, 0.0]]) for x in xs), fps)


class TestVelocity:
    def test_identity(self, small_walker):
        assert velocity_feature(small_walker[2], small_walker[2]) == 0.0

    def test_replay_over_double_duration(self):
        xs = np.arange(11) * 0.1  # 0.1 m per step, 10 steps
        ref = point_seq(xs, 10.0)  # 1 s
        gen = point_seq(xs, 5.0)  # 2 s
        assert velocity_feature(ref, gen) == pytest.approx(0.05, abs=1e-12)

    def test_reverse_order(self, small_walker):
        anim = small_walker[2]
        rev = AnimationSequence(anim.frames[::-1], anim.fps)
        assert velocity_feature(anim, rev) == pytest.approx(0.0, abs=1e-15)

    def test_double_fps_doubles_term(self, small_walker):
        anim = small_walker[2]
        fast = AnimationSequence(anim.frames, 2 * anim.fps)
        assert velocity_term(fast) == pytest.approx(2 * velocity_term(anim), abs=1e-12)
        # the difference between a sequence and its 2x replay is its own rate
        assert velocity_feature(anim, fast) == pytest.approx(velocity_term(anim), abs=1e-9)

    def test_frame_counts_may_differ(self):
        ref = point_seq(np.arange(11) * 0.1, 10.0)
        gen = point_seq(np.arange(6) * 0.2, 2.5)  # 0.2 m steps over 2 s
        assert velocity_feature(ref, gen) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_duration(self):
        # timestamps are strictly increasing, so only a bad fps can get here
        with pytest.raises(DegenerateDuration):
            JointTrajectory(np.zeros((5, 3)), 0.0)


def line_joint(n, fps, wiggle=0.0):
    t = np.arange(n) / fps
    x = np.stack([t, wiggle * np.sin(7 * t), 0 * t], axis=1)
    return x


class TestSmoothness:
    def test_identity(self, walker):
        assert smoothness_feature(walker[1], walker[1]) == 0.0

    def test_frame_deletion_is_positive(self, walker):
        _, pose, _ = walker
        keep = [0] + list(range(1, len(pose) - 1, 2)) + [len(pose) - 1]
        assert smoothness_feature(pose, pose.subset(keep)) > 0

    def test_single_joint_composition(self):
        a = line_joint(50, 30.0, 0.2)
        b = line_joint(50, 30.0, 0.05)
        ref = PoseSequence(np.zeros((50, 1, 3)), a, 30.0, a[:, None])
        gen = PoseSequence(np.zeros((50, 1, 3)), b, 30.0, b[:, None])
        expected = abs(ldlj(a, 30.0) - ldlj(b, 30.0))
        assert smoothness_feature(ref, gen) == pytest.approx(expected, abs=1e-12)
        signed = smoothness_feature(ref, gen, signed=True)
        assert signed == pytest.approx(ldlj(a, 30.0) - ldlj(b, 30.0), abs=1e-12)

    def test_stationary_joints_skipped(self):
        n = 20
        moving = line_joint(n, 30.0, 0.1)
        still = np.zeros((n, 3))
        ref_pos = np.stack([moving, still], axis=1)
        gen_pos = np.stack([line_joint(n, 30.0, 0.3), still], axis=1)
        ref = PoseSequence(np.zeros((n, 2, 3)), moving, 30.0, ref_pos)
        gen = PoseSequence(np.zeros((n, 2, 3)), moving, 30.0, gen_pos)
        diffs, skipped = joint_ldlj_differences(ref, gen)
        assert skipped == [1] and len(diffs) == 1

    def test_all_joints_degenerate(self):
        z = np.zeros((10, 1, 3))
        p = PoseSequence(z, np.zeros((10, 3)), 30.0, z)
        with pytest.raises(AllJointsDegenerate):
            smoothness_feature(p, p)

    def test_too_few_frames(self):
        z = np.zeros((3, 1, 3))
        p = PoseSequence(z, np.zeros((3, 3)), 30.0, z)
        with pytest.raises(TooFewFrames):
            smoothness_feature(p, p)


class TestExtract:
    def test_identity_is_zero_vector(self, small_walker):
        _, pose, anim = small_walker
        f = extract_features(anim, anim, pose, pose)
        assert np.all(f.as_array() == 0.0)

    def test_foot_contact_fixture(self, small_walker):
        rig, pose, anim = small_walker
        gen_anim, gen_pose = apply_distortion(rig, anim, pose, DistortionSpec("FootContact", 0.1))
        f = extract_features(anim, gen_anim, pose, gen_pose)
        assert f.f3 == pytest.approx(0.1, abs=1e-9)
        assert f.f7 == pytest.approx(0.1, abs=1e-9)

    def test_error_names_feature(self, small_walker):
        _, pose, anim = small_walker
        other = PoseSequence(
            np.zeros((len(pose), 2, 3)), pose.translations, pose.fps, np.zeros((len(pose), 2, 3))
        )
        with pytest.raises(JointCountMismatch) as exc:
            extract_features(anim, anim, pose, other)
        assert exc.value.feature == "f6"

    def test_features_nonnegative(self, small_walker):
        rig, pose, anim = small_walker
        for kind, s in [("Moonwalk", 0.6), ("Smoothness", 0.3), ("TemporalTwist", 0.2)]:
            ga, gp = apply_distortion(rig, anim, pose, DistortionSpec(kind, s, seed=4))
            assert np.all(extract_features(anim, ga, pose, gp).as_array() >= 0)
