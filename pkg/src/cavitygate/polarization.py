"""Single-photon polarization algebra in the zero/one-photon sector.

States live in span{|1,0>, |0,1>, |0,0>} of two orthogonal transverse modes.
Basis changes act on the mode operators with a 2x2 unitary; reflection off the
polarization-selective cavity multiplies the cavity-axis component by the
complex reflection amplitude and routes the lost norm into the vacuum term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class PolarizationState:
    """Zero/one-photon state a|1,0> + b|0,1> + vacuum|0,0> in a named basis.

    `basis_angle` tracks the rotation of the basis relative to the reference
    (lab) frame; it is bookkeeping only and enters no amplitude arithmetic.
    """

    a: complex
    b: complex
    vacuum: complex = 0.0 + 0.0j
    basis: str = "xy"
    basis_angle: float = 0.0

    @property
    def norm(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.vacuum) ** 2

    @property
    def photon_probability(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2

    def normalized(self) -> "PolarizationState":
        n = math.sqrt(self.norm)
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return PolarizationState(self.a / n, self.b / n, self.vacuum / n,
                                 self.basis, self.basis_angle)

    def photon_part(self) -> "PolarizationState":
        """Polarization state conditioned on detecting a photon."""
        p = math.sqrt(self.photon_probability)
        if p == 0.0:
            raise ValueError("state has no photon component")
        return PolarizationState(self.a / p, self.b / p, 0.0, self.basis,
                                 self.basis_angle)

    def overlap(self, other: "PolarizationState") -> complex:
        return (
            np.conj(self.a) * other.a
            + np.conj(self.b) * other.b
            + np.conj(self.vacuum) * other.vacuum
        )


@dataclass(frozen=True)
class BasisTransform:
    """Unitary 2x2 change of polarization basis, rows (alpha, beta; -beta* e^{i chi}, alpha* e^{i chi})."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("transform matrix must be 2x2")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_components(cls, alpha: complex, beta: complex, chi: float = 0.0) -> "BasisTransform":
        phase = np.exp(1j * chi)
        return cls(np.array([[alpha, beta], [-np.conj(beta) * phase, np.conj(alpha) * phase]]))

    @classmethod
    def rotation(cls, angle: float) -> "BasisTransform":
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, s], [-s, c]], dtype=complex))

    @classmethod
    def circular(cls) -> "BasisTransform":
        """Transform to circularly polarized modes (e1 +/- i e2)/sqrt(2)."""
        return cls.from_components(1.0 / math.sqrt(2), 1j / math.sqrt(2), -0.5 * math.pi)

    def is_unitary(self, tol: float = UNITARITY_TOL) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m @ m.conj().T - np.eye(2))) <= tol)

    def inverse(self) -> "BasisTransform":
        return BasisTransform(self.matrix.conj().T)


def transform_polarization(state: PolarizationState, transform: BasisTransform,
                           basis: str = "custom",
                           basis_angle: float | None = None) -> PolarizationState:
    """Re-express a zero/one-photon state in the transformed basis.

    The photon creation operators map as c1+ -> t11* g1+ + t21* g2+ and
    c2+ -> t12* g1+ + t22* g2+, so the single-photon amplitudes pick up the
    conjugated matrix; the vacuum term is untouched and photon number is
    preserved.
    """
    if not transform.is_unitary():
        raise ValueError("basis transform must be unitary")
    t = transform.matrix
    a = np.conj(t[0, 0]) * state.a + np.conj(t[0, 1]) * state.b
    b = np.conj(t[1, 0]) * state.a + np.conj(t[1, 1]) * state.b
    angle = state.basis_angle if basis_angle is None else basis_angle
    return PolarizationState(a, b, state.vacuum, basis, angle)


def rotate_polarization(state: PolarizationState, angle: float,
                        basis: str | None = None) -> PolarizationState:
    """Rotate the measurement basis by `angle` around the propagation axis."""
    return transform_polarization(
        state, BasisTransform.rotation(angle),
        basis=basis if basis is not None else f"{state.basis}+rot({angle:g})",
        basis_angle=state.basis_angle + angle)


def major_axis_angle(a: complex, b: complex) -> float:
    """Orientation (mod pi) of the polarization ellipse major axis for amplitudes (a, b).

    Reduces to the linear polarization direction atan(b/a) for relatively
    real amplitudes.
    """
    return 0.5 * math.atan2(2.0 * (np.conj(a) * b).real, abs(a) ** 2 - abs(b) ** 2)


@dataclass(frozen=True)
class ReflectedPolarization:
    """Outcome of reflecting a single photon off the polarization-selective cavity."""

    state: PolarizationState          # in the cavity basis (e1, e2)
    rotation_angle: float | None      # orientation of the reflected field w.r.t. e1
    loss: float                       # probability of losing the photon
    elliptical: bool                  # reflected polarization is elliptical (complex R)
    absorbed: bool                    # photon fully absorbed, polarization undefined


def reflect_polarization(incident: PolarizationState, cavity_angle: float,
                         reflection: complex, norm_tol: float = 1e-9) -> ReflectedPolarization:
    """Reflect a normalized photon state off the cavity rotated by `cavity_angle`.

    The incident state (given in the lab (x, y) basis) is rotated into the
    cavity axes (e1, e2); the e1 component is multiplied by the complex
    reflection amplitude, e2 reflects with unit amplitude, and the vacuum
    amplitude is fixed real-positive to restore unit norm. For real
    reflection amplitudes the reflected linear polarization makes an angle
    phi' with e1 where tan(phi') = -tan(phi)/R; complex amplitudes yield an
    elliptical state whose reported angle is the coherency-matrix major axis.
    """
    if abs(incident.norm - 1.0) > norm_tol:
        raise ValueError("incident state must be normalized")
    in_cavity = transform_polarization(incident,
                                       BasisTransform.rotation(cavity_angle),
                                       basis="e1e2",
                                       basis_angle=incident.basis_angle
                                       + cavity_angle)
    a = complex(reflection) * in_cavity.a
    b = in_cavity.b
    photon = abs(a) ** 2 + abs(b) ** 2
    vac = math.sqrt(max(0.0, 1.0 - photon))
    absorbed = photon <= norm_tol
    elliptical = abs(complex(reflection).imag) > 1e-12 * (1.0 + abs(reflection))
    angle = None if absorbed else major_axis_angle(a, b)
    return ReflectedPolarization(
        state=PolarizationState(a, b, vac, basis="e1e2",
                                basis_angle=in_cavity.basis_angle),
        rotation_angle=angle,
        loss=max(0.0, 1.0 - photon),
        elliptical=elliptical,
        absorbed=absorbed,
    )


@dataclass(frozen=True)
class EntangledOutput:
    """Reflected photon entangled with the ground/dark state of the emitter pair.

    Branch amplitudes (bright_weight, dark_weight) multiply per-branch photon
    states given in the cavity basis. The detection density p(theta) is the
    probability density of detecting the photon behind a linear polarizer at
    angle theta from the incident polarization direction, conditioned on the
    photon not being absorbed, normalized over theta in [-pi/2, pi/2].
    """

    bright_weight: complex
    dark_weight: complex
    bright_state: PolarizationState
    dark_state: PolarizationState
    incident_angle: float

    def _detection_components(self) -> tuple[np.ndarray, np.ndarray]:
        # Branch photon amplitudes rotated into the incident-polarization frame.
        rot = BasisTransform.rotation(self.incident_angle)
        bb = transform_polarization(self.bright_state, rot)
        dd = transform_polarization(self.dark_state, rot)
        return (np.array([bb.a, bb.b]), np.array([dd.a, dd.b]))

    def detection_density(self) -> Callable[[np.ndarray], np.ndarray]:
        """Return p(theta) as a vectorized callable."""
        bvec, dvec = self._detection_components()
        wb = abs(self.bright_weight) ** 2
        wd = abs(self.dark_weight) ** 2
        photon_prob = wb * (abs(bvec[0]) ** 2 + abs(bvec[1]) ** 2) \
            + wd * (abs(dvec[0]) ** 2 + abs(dvec[1]) ** 2)
        if photon_prob == 0.0:
            raise ValueError("no photon component in either branch")
        z = 0.5 * math.pi * photon_prob

        def density(theta):
            theta = np.asarray(theta, dtype=float)
            c, s = np.cos(theta), np.sin(theta)
            pb = np.abs(bvec[0] * c + bvec[1] * s) ** 2
            pd = np.abs(dvec[0] * c + dvec[1] * s) ** 2
            return (wb * pb + wd * pd) / z

        return density

    @property
    def is_separable(self) -> bool:
        """True when both branches carry the same photon polarization (up to phase)."""
        bvec, dvec = self._detection_components()
        nb = math.sqrt(abs(bvec[0]) ** 2 + abs(bvec[1]) ** 2)
        nd = math.sqrt(abs(dvec[0]) ** 2 + abs(dvec[1]) ** 2)
        if nb == 0.0 or nd == 0.0:
            return True
        overlap = abs(np.conj(bvec[0]) * dvec[0] + np.conj(bvec[1]) * dvec[1]) / (nb * nd)
        return overlap > 1.0 - 1e-12

    def write_density_csv(self, path, n_points: int = 361) -> None:
        theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_points)
        dens = self.detection_density()(theta)
        data = np.column_stack([theta, dens])
        header = "theta,density"
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def reflect_from_superposition(
    c1: float,
    c2: float,
    bright_weight: complex,
    dark_weight: complex,
    reflection_bright: complex = 1.0,
    reflection_dark: complex = -1.0,
    incident_angle: float | None = None,
    norm_tol: float = 1e-9,
) -> EntangledOutput:
    """Reflect a linearly polarized photon off emitters in a ground/dark superposition.

    (c1, c2) are the real incident amplitudes along the cavity axes (e1, e2).
    The bright branch (weight G, emitters in the ground state) reflects with
    `reflection_bright`; the dark branch (weight D) sees an empty cavity and
    reflects with `reflection_dark`. In the idealized strong-coupling /
    low-loss limit (R = +1 and -1), an incident photon at pi/4 leaves the
    branches with orthogonal polarizations.
    """
    if isinstance(c1, complex) or isinstance(c2, complex):
        raise ValueError("incident amplitudes c1, c2 must be real")
    c1 = float(c1)
    c2 = float(c2)
    if abs(c1 * c1 + c2 * c2 - 1.0) > norm_tol:
        raise ValueError("incident amplitudes must satisfy c1^2 + c2^2 = 1")
    if abs(abs(bright_weight) ** 2 + abs(dark_weight) ** 2 - 1.0) > norm_tol:
        raise ValueError("branch weights must satisfy |G|^2 + |D|^2 = 1")
    angle = math.atan2(c2, c1)
    if incident_angle is not None and not math.isclose(incident_angle, angle,
                                                       rel_tol=0.0, abs_tol=1e-9):
        raise ValueError(
            f"incident_angle {incident_angle} inconsistent with (c1, c2) angle {angle}"
        )

    def branch(r: complex) -> PolarizationState:
        a = complex(r) * c1
        b = complex(c2)
        vac = math.sqrt(max(0.0, 1.0 - abs(a) ** 2 - abs(b) ** 2))
        return PolarizationState(a, b, vac, basis="e1e2", basis_angle=0.0)

    return EntangledOutput(
        bright_weight=complex(bright_weight),
        dark_weight=complex(dark_weight),
        bright_state=branch(reflection_bright),
        dark_state=branch(reflection_dark),
        incident_angle=angle,
    )
