"""Single-photon reflection off an open dissipative cavity containing two
dipole-coupled quantum emitters.

Closed-form reflection amplitudes and critical-coupling conditions, a direct
time-domain integrator of the coupled amplitude equations (with Langevin
noise) serving as their numeric oracle, polarization-gate algebra, and a CLI
harness for reproducible experiments.
"""

from .analytic import (
    CriticalCouplingSolution,
    ReflectionResult,
    cavity_emitter_poles,
    critical_coupling_solutions,
    dephasing_noise_fraction,
    fabry_perot_drive_length,
    outcoupling_rate,
    reflection_coefficient,
)
from .dynamics import (
    AmplitudeState,
    DarkBranch,
    EnsembleResult,
    NoiseFraction,
    ReflectionEstimate,
    TrajectoryRecord,
    default_timestep,
    evolve_deterministic,
    evolve_stochastic,
    evolve_superposition,
    extract_reflection,
    mode_coupling,
    reflected_noise_fraction,
)
from .emitters import (
    ConstraintCheck,
    EmitterEigensystem,
    EmitterParams,
    PreparationReport,
    QEPreparation,
    check_preparation_constraints,
    classical_pulse_preparation,
    two_emitter_eigensystem,
)
from .params import SystemParams
from .polarization import (
    BasisTransform,
    EntangledOutput,
    PolarizationState,
    ReflectedPolarization,
    major_axis_angle,
    reflect_from_superposition,
    reflect_polarization,
    rotate_polarization,
    transform_polarization,
)
from .pulses import (
    ModeGrid,
    WavepacketSpec,
    build_mode_grid,
    gaussian_wavepacket,
    intensity_profile,
    propagate_free,
    write_intensity_csv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
