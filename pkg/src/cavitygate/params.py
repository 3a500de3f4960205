"""System parameters for the cavity + two-emitter scattering problem.

All quantities are dimensionless: hbar = 1 and every rate/frequency is
expressed in units of a user-chosen reference rate (by convention the
outcoupling rate kappa, matching how results are usually quoted as
kappa-normalized ratios).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SystemParams:
    """Rates, detunings and couplings of the driven cavity-emitter system.

    Attributes
    ----------
    kappa : outcoupling rate of the cavity mode into the external ray bundle
    mu_c : internal (Ohmic + scattering) cavity intensity loss rate
    gamma_e : emitter population relaxation rate
    gamma_el : emitter elastic (pure dephasing) rate
    omega_rabi : complex vacuum Rabi coupling between cavity photon and the
        bright transition; magnitude 0 means decoupled (dark) emitters
    delta_e : bright-transition detuning from the cavity mode, W_e - omega_c
    delta_0 : pulse-carrier detuning from the cavity mode, omega_0 - omega_c
    omega_c : cavity mode frequency (only fixes the absolute frequency origin;
        the dynamics depends on detunings alone)
    """

    kappa: float
    mu_c: float = 0.0
    gamma_e: float = 0.0
    gamma_el: float = 0.0
    omega_rabi: complex = 0.0 + 0.0j
    delta_e: float = 0.0
    delta_0: float = 0.0
    omega_c: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "mu_c", "gamma_e", "gamma_el"):
            value = getattr(self, name)
            if value < 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        object.__setattr__(self, "omega_rabi", complex(self.omega_rabi))

    @property
    def gamma(self) -> float:
        """Total emitter linewidth gamma_e + 2*gamma_el."""
        return self.gamma_e + 2.0 * self.gamma_el

    @property
    def kappa_sigma(self) -> float:
        """Total cavity decay rate mu_c/2 + kappa (derived, never stored)."""
        return 0.5 * self.mu_c + self.kappa

    @property
    def p_e(self) -> complex:
        """Complex emitter response rate gamma/2 + i*delta_e."""
        return 0.5 * self.gamma + 1j * self.delta_e

    @property
    def w_e(self) -> float:
        """Bright transition energy (hbar = 1)."""
        return self.omega_c + self.delta_e

    @property
    def omega_0(self) -> float:
        """Carrier frequency of the incident pulse."""
        return self.omega_c + self.delta_0

    def with_(self, **changes) -> "SystemParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)
