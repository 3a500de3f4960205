import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from cavitygate.polarization import (
    BasisTransform,
    PolarizationState,
    reflect_from_superposition,
    reflect_polarization,
    rotate_polarization,
    transform_polarization,
)


def random_unitary(rng) -> BasisTransform:
    # Haar-ish: alpha, beta on the complex unit sphere plus a free phase chi
    z = rng.normal(size=4)
    alpha = complex(z[0], z[1])
    beta = complex(z[2], z[3])
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return BasisTransform.from_components(alpha / norm, beta / norm,
                                          rng.uniform(0.0, 2.0 * math.pi))


class TestTransforms:
    def test_rotation_of_basis_vector(self):
        state = PolarizationState(1.0, 0.0)
        out = rotate_polarization(state, 0.25 * math.pi)
        inv = 1.0 / math.sqrt(2.0)
        assert out.a == pytest.approx(inv, abs=1e-15)
        assert out.b == pytest.approx(-inv, abs=1e-15)
        assert out.vacuum == 0.0
        assert out.basis_angle == pytest.approx(0.25 * math.pi)

    def test_rotation_undoes_linear_polarization_angle(self):
        # a state polarized at angle phi lands on the first axis after
        # rotating the basis by phi
        phi = 0.6
        state = PolarizationState(math.cos(phi), math.sin(phi))
        out = rotate_polarization(state, phi)
        assert out.a == pytest.approx(1.0, abs=1e-15)
        assert abs(out.b) < 1e-15

    def test_circular_roundtrip_identity(self):
        t = BasisTransform.circular()
        state = PolarizationState(0.3 + 0.1j, -0.7 + 0.2j, 0.4)
        out = transform_polarization(
            transform_polarization(state, t), t.inverse())
        assert abs(out.a - state.a) < 1e-14
        assert abs(out.b - state.b) < 1e-14
        assert out.vacuum == state.vacuum

    def test_rotation_composition(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            a1, a2 = rng.uniform(-math.pi, math.pi, size=2)
            m1 = BasisTransform.rotation(a1).matrix
            m2 = BasisTransform.rotation(a2).matrix
            m12 = BasisTransform.rotation(a1 + a2).matrix
            assert np.max(np.abs(m2 @ m1 - m12)) < 1e-12

    def test_photon_number_preserved_random_unitaries(self):
        rng = np.random.default_rng(42)
        for _ in range(2000):
            t = random_unitary(rng)
            z = rng.normal(size=6)
            state = PolarizationState(complex(z[0], z[1]), complex(z[2], z[3]),
                                      complex(z[4], z[5]))
            out = transform_polarization(state, t)
            assert out.photon_probability == pytest.approx(
                state.photon_probability, rel=1e-12, abs=1e-12)
            assert out.vacuum == state.vacuum

    def test_non_unitary_rejected(self):
        bad = BasisTransform(np.array([[1.0, 0.0], [0.0, 2.0]]))
        with pytest.raises(ValueError):
            transform_polarization(PolarizationState(1.0, 0.0), bad)


class TestReflection:
    def test_unit_reflection_preserves_lab_polarization(self):
        for phi in np.linspace(-1.4, 1.4, 29):
            out = reflect_polarization(PolarizationState(1.0, 0.0), phi, 1.0)
            assert out.rotation_angle == pytest.approx(-phi, abs=1e-9)
            assert out.loss < 1e-12

    def test_sign_flip_reflects_through_cavity_axis(self):
        for phi in np.linspace(-1.4, 1.4, 29):
            if abs(phi) < 1e-3:
                continue
            out = reflect_polarization(PolarizationState(1.0, 0.0), phi, -1.0)
            assert out.rotation_angle == pytest.approx(phi, abs=1e-9)

    def test_quarter_pi_orthogonal_rotation(self):
        # R = -1 at phi = pi/4 rotates the polarization by pi/2 in the lab
        out = reflect_polarization(PolarizationState(1.0, 0.0),
                                   0.25 * math.pi, -1.0)
        inv = 1.0 / math.sqrt(2.0)
        incident_cavity = np.array([inv, -inv])
        reflected = np.array([out.state.a, out.state.b])
        assert abs(np.vdot(incident_cavity, reflected)) < 1e-12

    def test_zero_reflection_leaves_e2_component(self):
        out = reflect_polarization(PolarizationState(1.0, 0.0),
                                   0.25 * math.pi, 0.0)
        inv = 1.0 / math.sqrt(2.0)
        assert abs(out.state.a) == 0.0
        assert out.state.b == pytest.approx(-inv, abs=1e-12)
        assert out.state.vacuum == pytest.approx(inv, abs=1e-12)
        assert not out.absorbed

    def test_full_absorption_flagged(self):
        out = reflect_polarization(PolarizationState(1.0, 0.0), 0.0, 0.0)
        assert out.absorbed
        assert out.rotation_angle is None
        assert out.state.vacuum == pytest.approx(1.0)

    def test_complex_reflection_elliptical(self):
        out = reflect_polarization(PolarizationState(1.0, 0.0), 0.3,
                                   0.6 + 0.4j)
        assert out.elliptical
        assert out.rotation_angle is not None

    def test_norm_restored(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            phi = rng.uniform(-1.5, 1.5)
            r = rng.uniform(0, 1) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            out = reflect_polarization(PolarizationState(1.0, 0.0), phi, r)
            assert out.state.norm == pytest.approx(1.0, abs=1e-12)

    def test_unnormalized_incident_rejected(self):
        with pytest.raises(ValueError):
            reflect_polarization(PolarizationState(1.0, 0.5), 0.1, 1.0)


class TestSuperposition:
    inv = 1.0 / math.sqrt(2.0)

    def test_bright_only_cosine_squared(self):
        out = reflect_from_superposition(self.inv, self.inv, 1.0, 0.0)
        density = out.detection_density()
        theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 181)
        np.testing.assert_allclose(density(theta),
                                   (2.0 / math.pi) * np.cos(theta) ** 2,
                                   atol=1e-12)

    def test_balanced_superposition_uniform(self):
        out = reflect_from_superposition(self.inv, self.inv, self.inv, self.inv)
        theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 721)
        np.testing.assert_allclose(out.detection_density()(theta),
                                   1.0 / math.pi, atol=1e-12)

    def test_e1_only_separable(self):
        out = reflect_from_superposition(1.0, 0.0, 0.8, 0.6)
        assert out.is_separable
        # photon polarization identical in both branches up to the sign of R
        assert out.bright_state.a == pytest.approx(1.0)
        assert out.dark_state.a == pytest.approx(-1.0)

    def test_entangled_case_not_separable(self):
        out = reflect_from_superposition(self.inv, self.inv, self.inv, self.inv)
        assert not out.is_separable

    def test_density_normalized_by_quadrature(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            g = rng.uniform(0.1, 0.9)
            weights = (math.sqrt(g), math.sqrt(1.0 - g))
            phi = rng.uniform(0.05, 1.5)
            rb = rng.uniform(-1.0, 1.0)
            rd = rng.uniform(-1.0, 1.0)
            out = reflect_from_superposition(
                math.cos(phi), math.sin(phi), weights[0], weights[1],
                reflection_bright=rb, reflection_dark=rd)
            total, err = quad(out.detection_density(),
                              -0.5 * math.pi, 0.5 * math.pi)
            assert abs(total - 1.0) < 1e-9
            theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 301)
            assert np.all(out.detection_density()(theta) >= 0.0)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            reflect_from_superposition(1.0, 0.5, 1.0, 0.0)
        with pytest.raises(ValueError):
            reflect_from_superposition(self.inv, self.inv, 0.9, 0.6)
        with pytest.raises(ValueError):
            reflect_from_superposition(self.inv, self.inv, self.inv, self.inv,
                                       incident_angle=0.1)

    def test_density_csv_export(self, tmp_path):
        out = reflect_from_superposition(self.inv, self.inv, self.inv, self.inv)
        path = tmp_path / "density.csv"
        out.write_density_csv(path, n_points=11)
        rows = np.loadtxt(path, delimiter=",", skiprows=1)
        assert rows.shape == (11, 2)
        np.testing.assert_allclose(rows[:, 1], 1.0 / math.pi, atol=1e-12)
