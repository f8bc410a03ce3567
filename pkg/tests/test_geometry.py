import numpy as np
import pytest

from thermbeam.geometry import (
    BsGeometry,
    HeadModel,
    UePose,
    head_sampling_points,
    orientation_vector,
    pairwise_distance,
    rx_element_positions,
    tx_element_positions,
    vec3,
)


def make_pose(tilt=0.0, polar=np.pi / 2, n=4, spacing=0.005, center=(0.0, 0.0, 0.0)):
    return UePose(center=np.array(center, dtype=float), tilt_angle=tilt,
                  polar_angle=polar, n_elements=n, spacing=spacing)


class TestOrientationVector:
    def test_polar_axis(self):
        n = orientation_vector(make_pose(tilt=0.0, polar=0.0))
        assert np.allclose(n, [0.0, 0.0, 1.0])

    def test_equatorial_zero_tilt(self):
        n = orientation_vector(make_pose(tilt=0.0, polar=np.pi / 2))
        assert np.allclose(n, [0.0, 1.0, 0.0])

    def test_equatorial_quarter_tilt(self):
        n = orientation_vector(make_pose(tilt=np.pi / 2, polar=np.pi / 2))
        assert np.allclose(n, [1.0, 0.0, 0.0])

    def test_unit_norm_random_angles(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a, b = rng.uniform(-np.pi, np.pi, 2)
            n = orientation_vector(make_pose(tilt=a, polar=b))
            assert abs(np.linalg.norm(n) - 1.0) < 1e-12

    def test_orthogonal_to_element_axis(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            a, b = rng.uniform(-np.pi, np.pi, 2)
            pose = make_pose(tilt=a, polar=b)
            n = orientation_vector(pose)
            pos = tx_element_positions(pose)
            axis = pos[-1] - pos[0]
            axis /= np.linalg.norm(axis)
            assert abs(np.dot(axis, n)) < 1e-12


class TestTxElementPositions:
    def test_single_element_at_center(self):
        pose = make_pose(n=1, center=(1.0, 2.0, 3.0))
        pos = tx_element_positions(pose)
        assert pos.shape == (1, 3)
        assert np.allclose(pos[0], [1.0, 2.0, 3.0])

    def test_two_element_symmetry(self):
        pos = tx_element_positions(make_pose(n=2, spacing=0.005, tilt=0.0))
        assert np.allclose(pos[:, 0], [0.0025, -0.0025])
        assert np.allclose(pos[:, 1:], 0.0)

    def test_four_element_tilted_offsets(self):
        pose = make_pose(n=4, spacing=0.005, tilt=np.pi / 4)
        pos = tx_element_positions(pose)
        delta = np.array([1.5, 0.5, -0.5, -1.5])
        assert np.allclose(pos[:, 0], delta * 0.005 * np.cos(np.pi / 4))
        assert np.allclose(pos[:, 1], -delta * 0.005 * np.sin(np.pi / 4))

    def test_mean_is_center(self):
        pose = make_pose(n=5, center=(2.0, -1.0, 0.5), tilt=0.3)
        assert np.allclose(tx_element_positions(pose).mean(axis=0), pose.center)

    def test_spacing_multiples(self):
        pose = make_pose(n=6, spacing=0.007, tilt=1.1)
        pos = tx_element_positions(pose)
        d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        ratios = d / 0.007
        assert np.max(np.abs(ratios - np.round(ratios))) < 1e-12


class TestRxElementPositions:
    def test_single_element(self):
        pos = rx_element_positions(BsGeometry(height=5.0, n_elements=1, spacing=0.005))
        assert np.allclose(pos, [[0.0, 0.0, 5.0]])

    def test_two_element_symmetry(self):
        pos = rx_element_positions(BsGeometry(height=5.0, n_elements=2, spacing=0.005))
        assert np.allclose(pos[:, 0], [0.0025, -0.0025])
        assert np.allclose(pos[:, 2], 5.0)

    def test_large_array_centered(self):
        pos = rx_element_positions(BsGeometry(height=5.0, n_elements=64, spacing=0.005))
        assert np.allclose(pos.mean(axis=0), [0.0, 0.0, 5.0])


class TestPairwiseDistance:
    def test_zero_iff_equal(self):
        a = vec3(1.0, 2.0, 3.0)
        assert pairwise_distance(a, a) == 0.0

    def test_pythagorean(self):
        assert pairwise_distance(vec3(0, 0, 0), vec3(3, 4, 0)) == pytest.approx(5.0)

    def test_closed_form_expansion_matches_norm(self):
        # distance between tx element t and rx element r, expanded in the
        # radial distance, angles, and the half-integer element offsets
        rng = np.random.default_rng(42)
        for _ in range(1000):
            d0 = rng.uniform(1.0, 200.0)
            theta = rng.uniform(0.01, np.pi - 0.01)
            phi = rng.uniform(0.0, 2.0 * np.pi)
            alpha = rng.uniform(-np.pi, np.pi)
            dr, dt = rng.uniform(0.001, 0.02, 2)
            delta_r = (rng.integers(1, 9) * 2 - 9) / 2.0
            delta_t = (rng.integers(1, 5) * 2 - 5) / 2.0
            h_r = rng.uniform(0.0, 10.0)

            p_r = np.array([0.0, 0.0, h_r])
            p_t = p_r + d0 * np.array([np.cos(phi) * np.sin(theta),
                                       np.sin(phi) * np.sin(theta),
                                       np.cos(theta)])
            r_pos = np.array([delta_r * dr, 0.0, h_r])
            u_pos = np.array([p_t[0] + delta_t * dt * np.cos(alpha),
                              p_t[1] - delta_t * dt * np.sin(alpha),
                              p_t[2]])
            direct = pairwise_distance(r_pos, u_pos)
            expanded = np.sqrt(
                d0 ** 2 + delta_r ** 2 * dr ** 2 + delta_t ** 2 * dt ** 2
                - 2.0 * delta_r * dr * d0 * np.sin(theta) * np.cos(phi)
                - 2.0 * delta_r * dr * delta_t * dt * np.cos(alpha)
                + 2.0 * d0 * delta_t * dt * np.sin(theta) * np.cos(phi + alpha))
            assert abs(direct - expanded) <= 1e-9 * expanded


class TestHeadSamplingPoints:
    def test_single_point_at_zero_azimuth(self):
        head = head_sampling_points(np.zeros(3), 0.05, 1)
        assert np.allclose(head.sampling_points, [[0.05, 0.0, 0.0]])

    def test_four_point_azimuths(self):
        head = head_sampling_points(np.zeros(3), 1.0, 4)
        expected = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float)
        assert np.allclose(head.sampling_points, expected, atol=1e-12)

    def test_fifteen_point_spacing_and_radius(self):
        head = head_sampling_points(np.array([1.0, -2.0, 0.5]), 0.05, 15)
        pts = head.sampling_points - head.center
        r = np.linalg.norm(pts, axis=1)
        assert np.max(np.abs(r - 0.05)) < 1e-12
        az = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
        gaps = np.diff(az)
        assert np.allclose(gaps, 2.0 * np.pi / 15, atol=1e-12)

    def test_zero_points_rejected(self):
        with pytest.raises(ValueError):
            head_sampling_points(np.zeros(3), 0.05, 0)

    def test_off_sphere_points_rejected(self):
        pts = np.array([[0.05, 0.0, 0.0], [0.06, 0.0, 0.0]])
        with pytest.raises(ValueError):
            HeadModel(center=np.zeros(3), radius=0.05, sampling_points=pts)


class TestInvariantValidation:
    def test_bad_pose_rejected(self):
        with pytest.raises(ValueError):
            make_pose(n=0)
        with pytest.raises(ValueError):
            make_pose(spacing=0.0)
        with pytest.raises(ValueError):
            make_pose(tilt=np.nan)

    def test_non_finite_vector_rejected(self):
        with pytest.raises(ValueError):
            vec3(np.inf, 0.0, 0.0)
