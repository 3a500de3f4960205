"""Closed-form frequency-domain results for the cavity-emitter scattering problem.

For a narrowband single photon the coupled linear response reduces to a pair
of complex poles and a reflection amplitude for the cavity-coupled
polarization component. This module evaluates those closed forms, solves the
critical-coupling (zero reflection) conditions, converts cavity geometry into
the outcoupling rate, and estimates the residual reflected noise caused by
pure dephasing.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

from .errors import CavityGateError
from .params import SystemParams
from .polarization import major_axis_angle

MUCH_LESS_MARGIN = 5.0


def cavity_emitter_poles(params: SystemParams) -> tuple[complex, complex]:
    """Complex poles of the coupled cavity-emitter response.

    Both roots satisfy (p + kappa_sigma)(p_e + p) + |Omega|^2 = 0. The first
    pole carries the + branch of the principal square root; the reflection
    amplitude is symmetric under exchanging them, so the labeling is cosmetic.
    """
    ks = params.kappa_sigma
    pe = params.p_e
    root = cmath.sqrt(0.25 * (ks - pe) ** 2 - abs(params.omega_rabi) ** 2)
    center = -0.5 * (ks + pe)
    return center + root, center - root


def _denominator(params: SystemParams) -> complex:
    """Resonant lineshape factor (p_e - i delta_0)(kappa_sigma - i delta_0) + |Omega|^2.

    Equal to the pole product (P1 + i delta_0)(P2 + i delta_0); the product
    form avoids any square-root branch sensitivity.
    """
    d0 = params.delta_0
    return (params.p_e - 1j * d0) * (params.kappa_sigma - 1j * d0) \
        + abs(params.omega_rabi) ** 2


@dataclass(frozen=True)
class ReflectionResult:
    """Reflection amplitude of the cavity-coupled polarization component."""

    amplitude: complex
    rotation_angle: float | None      # reflected-polarization angle, given an incident angle
    loss_fraction: float              # 1 - |amplitude|^2 for a fully coupled photon
    strong_coupling: bool
    weak_coupling: bool
    narrowband_ok: bool | None        # None when no bandwidth was supplied
    elliptical: bool                  # rotation_angle is a major-axis angle, not the linear formula


def reflection_coefficient(
    params: SystemParams,
    incident_angle: float | None = None,
    bandwidth: float | None = None,
) -> ReflectionResult:
    """Narrowband reflection amplitude R = 1 - 2 (p_e - i d0) kappa / D.

    At zero detunings this reduces to the purely real resonant form
    1 - gamma*kappa / (gamma/2 * kappa_sigma + |Omega|^2). When
    `incident_angle` (angle between the incident linear polarization and the
    cavity axis) is given, the reflected-polarization angle is reported:
    tan(phi') = -tan(phi)/R for real R, the coherency-matrix major axis
    otherwise. When `bandwidth` is given, the narrowband validity flag checks
    it against the relevant pole magnitudes with a factor-of-5 margin.
    """
    r = 1.0 - 2.0 * (params.p_e - 1j * params.delta_0) * params.kappa / _denominator(params)

    omega = abs(params.omega_rabi)
    ks = params.kappa_sigma
    pe_mag = abs(params.p_e)
    strong = omega >= MUCH_LESS_MARGIN * max(ks, pe_mag)
    weak = MUCH_LESS_MARGIN * omega <= min(ks, pe_mag)

    narrowband_ok: bool | None = None
    if bandwidth is not None:
        p1, p2 = cavity_emitter_poles(params)
        if weak:
            # The root collapsing onto -p_e drops out of the response; the
            # bandwidth only competes with the surviving (cavity-like) pole.
            ref = abs(p1) if abs(p1 + params.p_e) >= abs(p2 + params.p_e) else abs(p2)
        else:
            ref = min(abs(p1), abs(p2))
        narrowband_ok = MUCH_LESS_MARGIN * bandwidth <= ref

    elliptical = abs(r.imag) > 1e-12 * (1.0 + abs(r))
    angle = None
    if incident_angle is not None:
        a = r * math.cos(incident_angle)
        b = -math.sin(incident_angle)
        if abs(a) > 0.0 or b != 0.0:
            angle = major_axis_angle(a, b)
    return ReflectionResult(
        amplitude=r,
        rotation_angle=angle,
        loss_fraction=max(0.0, 1.0 - abs(r) ** 2),
        strong_coupling=strong,
        weak_coupling=weak,
        narrowband_ok=narrowband_ok,
        elliptical=elliptical,
    )


@dataclass(frozen=True)
class CriticalCouplingSolution:
    """Parameter set nulling the reflection amplitude.

    branch "detuned": kappa = mu_c/2 + gamma/2 with a symmetric detuning pair
    delta_0 = +/- sqrt(|Omega|^2 - gamma^2/4) (exists for |Omega| >= gamma/2).
    branch "resonant": kappa = mu_c/2 + 2|Omega|^2/gamma at delta_0 = 0.
    Both assume the emitters resonant with the cavity (delta_e = 0).
    """

    branch: str
    kappa: float
    detunings: tuple[float, ...]
    base: SystemParams

    def params(self, detuning_index: int = 0) -> SystemParams:
        return self.base.with_(kappa=self.kappa, delta_e=0.0,
                               delta_0=self.detunings[detuning_index])


def critical_coupling_solutions(params: SystemParams) -> list[CriticalCouplingSolution]:
    """Solve for (kappa, delta_0) giving |R| = 0 at delta_e = 0.

    The kappa and delta_0 fields of `params` are ignored; its rates and Rabi
    coupling define the problem. The detuned branch is omitted (without
    error) when |Omega| < gamma/2.
    """
    gamma = params.gamma
    if gamma <= 0.0:
        raise ValueError("critical coupling requires gamma > 0")
    omega = abs(params.omega_rabi)
    solutions = []
    if omega >= 0.5 * gamma:
        d0 = math.sqrt(omega ** 2 - 0.25 * gamma ** 2)
        solutions.append(CriticalCouplingSolution(
            branch="detuned",
            kappa=0.5 * params.mu_c + 0.5 * gamma,
            detunings=(d0, -d0),
            base=params,
        ))
    solutions.append(CriticalCouplingSolution(
        branch="resonant",
        kappa=0.5 * params.mu_c + 2.0 * omega ** 2 / gamma,
        detunings=(0.0,),
        base=params,
    ))
    return solutions


def outcoupling_rate(group_velocity: float, drive_length: float,
                     light_speed: float = 1.0) -> float:
    """Cavity outcoupling rate kappa = c^2 / (2 v_g l_d).

    `drive_length` l_d encodes the solved classical in/out-coupling geometry;
    `light_speed` fixes the unit system (1 in natural units).
    """
    if drive_length <= 0.0:
        raise ValueError("drive_length must be > 0")
    if group_velocity <= 0.0 or light_speed <= 0.0:
        raise ValueError("group_velocity and light_speed must be > 0")
    return light_speed ** 2 / (2.0 * group_velocity * drive_length)


def fabry_perot_drive_length(mirror_transmittance: float, mirror_spacing: float) -> float:
    """Fabry-Perot estimate l_d ~ |T|^2 l_c for excitation through one mirror."""
    if mirror_transmittance <= 0.0 or mirror_spacing <= 0.0:
        raise ValueError("mirror_transmittance and mirror_spacing must be > 0")
    return mirror_transmittance * mirror_spacing


DEPHASING_REGIMES = ("cavity_resonant", "polariton_resonant", "critical")


def dephasing_noise_fraction(params: SystemParams, regime: str,
                             margin: float = MUCH_LESS_MARGIN) -> float:
    """Reflected-noise fraction sum|dC1k|^2 / sum|C1k(0)|^2 from pure dephasing.

    Regimes: carrier resonant with the bare cavity ("cavity_resonant"),
    carrier resonant with one coupling-shifted line ("polariton_resonant"),
    and the critical-coupling regime ("critical"). The first two hold in
    strong coupling |Omega| >> Gamma with Gamma = (kappa + mu_c/2 + gamma/2)/2;
    a warning is emitted when that is violated by the factor-of-`margin` test.
    """
    if regime not in DEPHASING_REGIMES:
        raise ValueError(f"unknown regime {regime!r}, expected one of {DEPHASING_REGIMES}")
    gamma_el = params.gamma_el
    big_gamma = 0.5 * (params.kappa + 0.5 * params.mu_c + 0.5 * params.gamma)
    omega = abs(params.omega_rabi)
    if regime == "cavity_resonant" and omega == 0.0:
        raise CavityGateError("cavity_resonant estimate undefined at Omega = 0")
    if regime in ("cavity_resonant", "polariton_resonant"):
        if omega < margin * big_gamma:
            warnings.warn(
                f"strong-coupling validity |Omega| >= {margin:g}*Gamma violated "
                f"(|Omega|={omega:g}, Gamma={big_gamma:g}); the {regime} estimate "
                "carries O(Gamma/|Omega|) corrections",
                stacklevel=2,
            )
    if regime == "cavity_resonant":
        return 4.0 * gamma_el * params.kappa ** 2 / ((2.0 * big_gamma) * omega ** 2)
    if regime == "polariton_resonant":
        return 4.0 * gamma_el * params.kappa ** 2 / (2.0 * big_gamma) ** 3
    denom = params.mu_c + params.gamma_e + 2.0 * params.gamma_el
    if denom == 0.0:
        return 0.0
    return gamma_el / denom
