"""Discretized single-photon wavepacket of the external ray bundle.

The external field is quantized on a ray bundle of length L with periodic
boundary conditions, k_n L = 2 pi n, and a linear dispersion around a
reference frequency. A narrowband Gaussian wavepacket centered left of the
cavity (s0 < 0) propagates ballistically toward the cavity plane at s = 0.

Conventions: the Gaussian spectral amplitude is exp(-(k - k0)^2 / (4 sigma_k^2)),
so sigma_k is the RMS width of the intensity spectrum. The effective spectral
support is taken as Delta_k = 2 sigma_k, giving the pulse-length scale
l_p = 2 pi / Delta_k = pi / sigma_k used in all locality margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridResolutionError, PulsePlacementError

RESOLUTION_FACTOR = 16.0   # mode spacing must be <= bandwidth / 16
PLACEMENT_FACTOR = 5.0     # |s0| must be >= 5 pulse lengths


@dataclass(frozen=True)
class ModeGrid:
    """Uniform grid of positive-k ray-bundle modes.

    omega_n = omega_ref + v_g (k_n - k_ref) with k_n = 2 pi n / length for
    consecutive integers n. `bandwidth` records the spectral scale the grid
    was built to resolve (used by integrator step-size rules).
    """

    length: float
    v_g: float
    omega_ref: float
    k_ref: float
    bandwidth: float
    indices: np.ndarray
    k: np.ndarray = field(init=False)
    omega: np.ndarray = field(init=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        k = 2.0 * math.pi * idx / self.length
        omega = self.omega_ref + self.v_g * (k - self.k_ref)
        for arr in (idx, k, omega):
            arr.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "omega", omega)

    @property
    def n_modes(self) -> int:
        return self.indices.size

    @property
    def spacing(self) -> float:
        """Angular-frequency spacing 2 pi v_g / L between adjacent modes."""
        return 2.0 * math.pi * self.v_g / self.length

    @property
    def span(self) -> float:
        return float(self.omega[-1] - self.omega[0])

    def detunings(self, reference: float) -> np.ndarray:
        return self.omega - reference


def build_mode_grid(center: float, bandwidth: float, n_modes: int, length: float,
                    v_g: float, margin: float = 8.0) -> ModeGrid:
    """Build a mode grid resolving `bandwidth` and spanning +/- margin*bandwidth.

    `center` is the frequency the grid is centered on (normally the pulse
    carrier). Raises GridResolutionError when the mode spacing 2 pi v_g / L is
    too coarse for the bandwidth (undersampled spectrum) or when n_modes is
    too small to cover the margin window.
    """
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be > 0")
    if n_modes < 2:
        raise ValueError("n_modes must be >= 2")
    if length <= 0.0 or v_g <= 0.0:
        raise ValueError("length and v_g must be > 0")
    spacing = 2.0 * math.pi * v_g / length
    if spacing > (bandwidth / RESOLUTION_FACTOR) * (1.0 + 1e-9):
        raise GridResolutionError(
            f"mode spacing {spacing:g} undersamples bandwidth {bandwidth:g}; "
            f"need spacing <= bandwidth/{RESOLUTION_FACTOR:g} (increase length)"
        )
    if n_modes * spacing < 2.0 * margin * bandwidth * (1.0 - 1e-9):
        raise GridResolutionError(
            f"{n_modes} modes span only {(n_modes - 1) * spacing:g} < "
            f"2*margin*bandwidth = {2.0 * margin * bandwidth:g} (increase n_modes)"
        )
    k_center = center / v_g
    n_start = round(k_center * length / (2.0 * math.pi) - 0.5 * (n_modes - 1))
    indices = n_start + np.arange(n_modes, dtype=np.int64)
    if indices[0] <= 0:
        raise GridResolutionError(
            "grid would include non-positive wavenumbers; raise the center "
            "frequency or shrink the span"
        )
    return ModeGrid(length=length, v_g=v_g, omega_ref=center, k_ref=k_center,
                    bandwidth=bandwidth, indices=indices)


@dataclass(frozen=True)
class WavepacketSpec:
    """Gaussian single-photon wavepacket parameters.

    s0 < 0 places the pulse left of the cavity plane; sigma_k sets the
    spectral width; e1_weight is the fraction of intensity in the
    cavity-coupled polarization, with `rel_phase` on the e2 component.
    """

    center_k: float
    sigma_k: float
    s0: float
    e1_weight: float = 1.0
    rel_phase: float = 0.0

    def __post_init__(self):
        if self.sigma_k <= 0.0:
            raise ValueError("sigma_k must be > 0")
        if not 0.0 <= self.e1_weight <= 1.0:
            raise ValueError("e1_weight must lie in [0, 1]")
        if self.s0 >= 0.0:
            raise PulsePlacementError("pulse must start left of the cavity (s0 < 0)")
        if abs(self.s0) < PLACEMENT_FACTOR * self.pulse_length * (1.0 - 1e-12):
            raise PulsePlacementError(
                f"|s0| = {abs(self.s0):g} must be >= {PLACEMENT_FACTOR:g} pulse "
                f"lengths ({PLACEMENT_FACTOR * self.pulse_length:g})"
            )

    @property
    def pulse_length(self) -> float:
        """Spatial pulse-length scale l_p = 2 pi / (2 sigma_k)."""
        return math.pi / self.sigma_k

    def transit_window(self, v_g: float) -> tuple[float, float]:
        """Times (T0, T1) when the pulse front reaches and leaves the cavity plane."""
        return ((abs(self.s0) - self.pulse_length) / v_g,
                (abs(self.s0) + self.pulse_length) / v_g)


def gaussian_wavepacket(grid: ModeGrid, spec: WavepacketSpec) -> tuple[np.ndarray, np.ndarray]:
    """Initial mode amplitudes (c1k, c2k) of the normalized wavepacket.

    Amplitudes follow exp(-(k - k0)^2/(4 sigma_k^2)) exp(-i k s0) with total
    norm 1 split between the two polarizations. The phase factors localize
    the pulse at s0, which also makes the plain amplitude sum vanish (no
    field at the cavity plane at t = 0).
    """
    envelope = np.exp(-((grid.k - spec.center_k) ** 2) / (4.0 * spec.sigma_k ** 2))
    amp = envelope * np.exp(-1j * grid.k * spec.s0)
    norm = np.sqrt(np.sum(np.abs(amp) ** 2))
    if norm == 0.0:
        raise ValueError("wavepacket has no support on the grid")
    amp /= norm
    c1 = math.sqrt(spec.e1_weight) * amp
    c2 = math.sqrt(1.0 - spec.e1_weight) * np.exp(1j * spec.rel_phase) * amp
    return c1, c2


def propagate_free(amplitudes: np.ndarray, grid: ModeGrid, t: float) -> np.ndarray:
    """Free evolution: each mode only acquires the phase e^{-i omega t}."""
    return amplitudes * np.exp(-1j * grid.omega * t)


def intensity_profile(amplitudes: np.ndarray, grid: ModeGrid, s, t: float = 0.0,
                      include_vacuum: bool = False) -> np.ndarray:
    """Field intensity along the bundle axis, in transverse-profile units.

    Returns the signal term (2/L) |sum_k a_k e^{i(k s - omega_k t)}|^2, with
    the transverse mode intensity set to 1/L so the continuum-limit profile
    is independent of the quantization length. With `include_vacuum` the
    flat vacuum-fluctuation background Delta_k L / (2 pi) / L is added.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    phases = np.exp(1j * (np.outer(s_arr, grid.k) - t * grid.omega))
    signal = (2.0 / grid.length) * np.abs(phases @ amplitudes) ** 2
    if include_vacuum:
        signal = signal + (grid.n_modes - 1) / grid.length
    return signal if np.ndim(s) else signal[0]


def write_intensity_csv(path, s_values, t_values, amplitudes, grid: ModeGrid,
                        include_vacuum: bool = False) -> None:
    """Export intensity samples as CSV columns (s, t, intensity)."""
    rows = []
    for t in np.atleast_1d(t_values):
        profile = intensity_profile(amplitudes, grid, s_values, t, include_vacuum)
        for s, i in zip(np.atleast_1d(s_values), profile):
            rows.append((s, t, i))
    np.savetxt(path, np.asarray(rows), delimiter=",", header="s,t,intensity",
               comments="")
