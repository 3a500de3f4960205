"""Two-emitter eigensystem and classical-pulse state preparation.

Two identical two-level emitters with dipole-dipole coupling split into a
ground state, a symmetric (bright) and antisymmetric (dark) single-excitation
pair, and a double-excited state. A resonant classical square pulse of the
right spatial symmetry Rabi-flops the pair between the ground state and one
of the single-excitation states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroSymmetricLeakError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Rows: ground, upper (+), lower (-), double; columns: |00>, |10>, |01>, |11>.
_EIGENBASIS = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, _INV_SQRT2, _INV_SQRT2, 0.0],
        [0.0, _INV_SQRT2, -_INV_SQRT2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)
_EIGENBASIS.setflags(write=False)


@dataclass(frozen=True)
class EmitterParams:
    """Bare emitter parameters (hbar = 1, rates in reference-rate units).

    transition_energy is W, the bare two-level splitting; omega_dd is the
    dipole-dipole coupling frequency, real without loss of generality.
    """

    transition_energy: float
    omega_dd: float = 0.0
    gamma_e: float = 0.0
    gamma_el: float = 0.0

    def __post_init__(self):
        if self.gamma_e < 0.0 or self.gamma_el < 0.0:
            raise ValueError("relaxation rates must be >= 0")

    @property
    def gamma(self) -> float:
        return self.gamma_e + 2.0 * self.gamma_el


@dataclass(frozen=True)
class EmitterEigensystem:
    """Eigenstates of the coupled pair in the product basis |00>,|10>,|01>,|11>."""

    energy_ground: float
    energy_upper: float
    energy_lower: float
    energy_double: float
    labels: tuple[str, ...] = ("g", "e+", "e-", "ee")
    coefficients: np.ndarray = field(default_factory=lambda: _EIGENBASIS)

    @property
    def splitting(self) -> float:
        """Bright/dark energy splitting, 2*omega_dd."""
        return self.energy_upper - self.energy_lower


def two_emitter_eigensystem(params: EmitterParams) -> EmitterEigensystem:
    """Diagonalize the pair Hamiltonian including dipole-dipole coupling.

    Energies are 0, W + omega_dd, W - omega_dd and 2W; the single-excitation
    eigenstates are (|10> +/- |01>)/sqrt(2).
    """
    w = params.transition_energy
    return EmitterEigensystem(
        energy_ground=0.0,
        energy_upper=w + params.omega_dd,
        energy_lower=w - params.omega_dd,
        energy_double=2.0 * w,
    )


@dataclass(frozen=True)
class QEPreparation:
    """Amplitudes after a resonant classical pulse, starting from the ground state."""

    c_ground: complex
    c_target: complex
    target: str = "dark"

    @property
    def norm(self) -> float:
        return abs(self.c_ground) ** 2 + abs(self.c_target) ** 2


def classical_pulse_preparation(rabi: float, duration: float,
                                target: str = "dark") -> QEPreparation:
    """Rabi rotation by a resonant square pulse of the chosen symmetry.

    Starting from the ground state, a pulse with classical Rabi frequency
    `rabi` applied for `duration` yields c_target = i*sin(rabi*duration) and
    c_ground = cos(rabi*duration). A pulse area rabi*duration = pi/2 fully
    transfers the pair into the target state.
    """
    if rabi < 0.0:
        raise ValueError("rabi must be >= 0 (phase belongs to the target amplitude)")
    if duration < 0.0:
        raise ValueError("duration must be >= 0")
    if target not in ("dark", "bright"):
        raise ValueError(f"target must be 'dark' or 'bright', got {target!r}")
    area = rabi * duration
    return QEPreparation(
        c_ground=complex(math.cos(area)),
        c_target=1j * math.sin(area),
        target=target,
    )


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    value: float
    bound: str


@dataclass(frozen=True)
class PreparationReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_preparation_constraints(
    params: EmitterParams,
    rabi_cl: float,
    duration: float,
    alpha: float,
    length_over_separation: float,
    omega_rabi_cavity: float,
    margin: float = 5.0,
    area_rtol: float = 1e-9,
) -> PreparationReport:
    """Feasibility checks for dark-state preparation by a classical pulse.

    `rabi_cl` is the single-emitter classical Rabi frequency; the coupling to
    the antisymmetric (dark) transition is rabi_cl / length_over_separation
    and the residual coupling to the symmetric (bright) transition is
    alpha * rabi_cl. Both order-of-magnitude parametrizations are treated as
    exact here, see README. Strict "much less than" inequalities use a
    factor-of-`margin` threshold.

    Checks reported:
      * symmetric_field_strength / antisymmetric_field_strength: the pulse
        must not be strong enough to mix the other single-excitation state,
        |Omega| < 2*omega_dd / margin.
      * pulse_area: the antisymmetric Rabi area must equal pi/2.
      * duration: the pulse must be shorter than the emitter lifetime,
        duration * gamma < 1.
      * photon_number_window: the effective photon number sqrt(n) =
        rabi_cl / omega_rabi_cavity must sit inside
        (L/Delta)(gamma/Omega_c) < sqrt(n) < (1/alpha)(omega_dd/Omega_c).
    """
    if min(rabi_cl, duration, alpha, length_over_separation, omega_rabi_cavity) < 0.0:
        raise ValueError("all constraint inputs must be >= 0")
    if alpha == 0.0:
        raise ZeroSymmetricLeakError(
            "alpha = 0: the photon-number upper bound (1/alpha)(omega_dd/Omega_c) "
            "is undefined (division by zero)"
        )
    if length_over_separation == 0.0:
        raise ValueError("length_over_separation must be > 0")
    if omega_rabi_cavity == 0.0:
        raise ValueError("omega_rabi_cavity must be > 0")

    rabi_anti = rabi_cl / length_over_separation
    rabi_sym = alpha * rabi_cl
    strength_bound = 2.0 * params.omega_dd / margin
    area = rabi_anti * duration
    sqrt_n = rabi_cl / omega_rabi_cavity
    window_lo = length_over_separation * params.gamma / omega_rabi_cavity
    window_hi = params.omega_dd / (alpha * omega_rabi_cavity)

    checks = (
        ConstraintCheck(
            "antisymmetric_field_strength",
            rabi_anti < strength_bound,
            rabi_anti,
            f"< 2*omega_dd/{margin:g} = {strength_bound:g}",
        ),
        ConstraintCheck(
            "symmetric_field_strength",
            rabi_sym < strength_bound,
            rabi_sym,
            f"< 2*omega_dd/{margin:g} = {strength_bound:g}",
        ),
        ConstraintCheck(
            "pulse_area",
            math.isclose(area, 0.5 * math.pi, rel_tol=area_rtol, abs_tol=area_rtol),
            area,
            "= pi/2",
        ),
        ConstraintCheck(
            "duration",
            duration * params.gamma < 1.0,
            duration,
            "1/duration > gamma",
        ),
        ConstraintCheck(
            "photon_number_window",
            window_lo < sqrt_n < window_hi,
            sqrt_n,
            f"in ({window_lo:g}, {window_hi:g})",
        ),
    )
    return PreparationReport(checks)
