"""Time-domain integration of the coupled amplitude equations.

This is the numeric oracle for the closed-form results: the full mode grid is
integrated directly (no input-output reduction), deterministically or with
Langevin noise, including the dual-branch evolution for emitters prepared in
a ground/dark superposition. Mode amplitudes are stored in the rotating frame
s_k = C1k e^{+i omega_k t}, so free propagation is the identity and the
reflection ratio of a finished run is read off directly.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernel import STATUS_LEAK, STATUS_NONFINITE, run_rk4_chunk
from .errors import (
    MemoryBudgetError,
    NonFiniteStateError,
    NotConvergedError,
    StepSizeError,
    UndefinedReflectionError,
)
from .params import SystemParams
from .pulses import ModeGrid

TIME_CHUNK = 4096          # fixed so results never depend on the memory budget
DT_SAFETY_FACTOR = 0.05    # dt <= factor / fastest rate
LEAK_TOLERANCE = 1e-4      # norm-leak residual per unit time
SETTLE_RELATIVE = 1e-6     # cavity+emitter excitation counts as settled below this
CONVERGENCE_THRESHOLD = 1e-4


def mode_coupling(params: SystemParams, grid: ModeGrid) -> float:
    """Per-mode coupling |L| with kappa = L |L|^2 / (2 v_g)."""
    return math.sqrt(2.0 * params.kappa * grid.v_g / grid.length)


def default_timestep(params: SystemParams, grid: ModeGrid,
                     factor: float = DT_SAFETY_FACTOR) -> float:
    """Largest step resolving the fastest scale in the problem."""
    det = grid.detunings(params.omega_c)
    fastest = max(
        abs(params.omega_rabi),
        params.kappa_sigma,
        0.5 * params.gamma,
        grid.bandwidth,
        float(np.max(np.abs(det))),
    )
    if fastest <= 0.0:
        raise ValueError("no finite rate in the problem; cannot choose a step")
    return factor / fastest


@dataclass(frozen=True)
class DarkBranch:
    """Amplitudes of the dark-emitter branch (no bright-state component)."""

    c1k: np.ndarray
    c2k: np.ndarray
    cavity: complex = 0.0 + 0.0j
    sink: complex = 0.0 + 0.0j

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.c1k) ** 2) + np.sum(np.abs(self.c2k) ** 2)
                     + abs(self.cavity) ** 2 + abs(self.sink) ** 2)


@dataclass(frozen=True)
class AmplitudeState:
    """Full complex amplitude vector of the single-excitation sector."""

    c1k: np.ndarray
    c2k: np.ndarray
    cavity: complex = 0.0 + 0.0j
    emitter: complex = 0.0 + 0.0j
    sink: complex = 0.0 + 0.0j
    dark: DarkBranch | None = None
    bright_weight: complex = 1.0 + 0.0j
    dark_weight: complex = 0.0 + 0.0j

    @classmethod
    def from_pulse(cls, c1k: np.ndarray, c2k: np.ndarray) -> "AmplitudeState":
        return cls(c1k=np.asarray(c1k, dtype=complex),
                   c2k=np.asarray(c2k, dtype=complex))

    @classmethod
    def superposition(cls, c1k: np.ndarray, c2k: np.ndarray,
                      bright_weight: complex, dark_weight: complex,
                      norm_tol: float = 1e-9) -> "AmplitudeState":
        """Pulse incident on emitters in G|ground> + D|dark>.

        Each branch carries the full pulse scaled by its weight, so the
        per-branch norms are |G|^2 and |D|^2.
        """
        g = complex(bright_weight)
        d = complex(dark_weight)
        if abs(abs(g) ** 2 + abs(d) ** 2 - 1.0) > norm_tol:
            raise ValueError("branch weights must satisfy |G|^2 + |D|^2 = 1")
        c1k = np.asarray(c1k, dtype=complex)
        c2k = np.asarray(c2k, dtype=complex)
        return cls(
            c1k=g * c1k,
            c2k=g * c2k,
            dark=DarkBranch(c1k=d * c1k, c2k=d * c2k),
            bright_weight=g,
            dark_weight=d,
        )

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.c1k) ** 2) + np.sum(np.abs(self.c2k) ** 2)
                     + abs(self.cavity) ** 2 + abs(self.emitter) ** 2
                     + abs(self.sink) ** 2)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled populations and the final rotating-frame amplitudes of one run.

    final_modes_e1/e2 hold s_k(t_end) = C_k(t_end) e^{+i omega_k t_end}; for a
    dark-branch record the frame additionally rotates at `frame_energy`
    (C_k = s_k e^{-i (omega_k + frame_energy) t}).
    """

    times: np.ndarray
    cavity_pop: np.ndarray
    emitter_pop: np.ndarray
    mode_pop: np.ndarray
    sink_pop: np.ndarray
    norm: np.ndarray
    leak: np.ndarray
    final_modes_e1: np.ndarray
    final_modes_e2: np.ndarray
    final_cavity: complex
    final_emitter: complex
    final_sink: complex
    t_end: float
    dt: float
    frame_energy: float = 0.0
    time_integral_cavity: float = 0.0   # int |Cc|^2 dt over the run
    time_integral_emitter: float = 0.0  # int |Ce|^2 dt over the run

    @property
    def peak_excitation(self) -> float:
        return float(np.max(self.cavity_pop + self.emitter_pop))

    @property
    def settled_time(self) -> float | None:
        """First sampled time after the excitation peak below 1e-6 of the peak."""
        exc = self.cavity_pop + self.emitter_pop
        peak = float(np.max(exc))
        if peak == 0.0:
            return float(self.times[0])
        ipk = int(np.argmax(exc))
        below = np.nonzero(exc[ipk:] < SETTLE_RELATIVE * peak)[0]
        if below.size == 0:
            return None
        return float(self.times[ipk + below[0]])

    @property
    def leak_residual_rate(self) -> float:
        """|d(norm + leak integral)| per unit time over the whole run."""
        q = self.norm + self.leak
        return abs(float(q[-1] - q[0])) / max(self.t_end, np.finfo(float).tiny)

    def write_csv(self, path) -> None:
        data = np.column_stack([self.times, self.cavity_pop, self.emitter_pop,
                                self.mode_pop, self.sink_pop, self.norm, self.leak])
        np.savetxt(path, data, delimiter=",",
                   header="t,cavity_pop,emitter_pop,mode_pop,sink_pop,norm,leak_integral",
                   comments="")

    def write_final_amplitudes_json(self, path) -> None:
        def pairs(arr):
            a = np.asarray(arr)
            return [[float(z.real), float(z.imag)] for z in np.atleast_1d(a)]

        payload = {
            "t_end": self.t_end,
            "frame_energy": self.frame_energy,
            "modes_e1": pairs(self.final_modes_e1),
            "modes_e2": pairs(self.final_modes_e2),
            "cavity": pairs(self.final_cavity)[0],
            "emitter": pairs(self.final_emitter)[0],
            "sink": pairs(self.final_sink)[0],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)


@dataclass(frozen=True)
class EnsembleResult:
    """Per-trajectory sampled curves and final states of a stochastic ensemble."""

    times: np.ndarray
    cavity_pop: np.ndarray   # (M, n_traj)
    emitter_pop: np.ndarray
    mode_pop: np.ndarray
    sink_pop: np.ndarray
    norm: np.ndarray
    final_modes_e1: np.ndarray  # (n_traj, N)
    final_cavity: np.ndarray
    final_emitter: np.ndarray
    final_sink: np.ndarray
    seed: int
    n_traj: int
    t_end: float
    dt: float

    @property
    def mean_norm(self) -> float:
        return float(np.mean(self.norm[-1]))

    @property
    def norm_standard_error(self) -> float:
        if self.n_traj < 2:
            return float("nan")
        return float(np.std(self.norm[-1], ddof=1) / math.sqrt(self.n_traj))

    def write_mean_csv(self, path) -> None:
        cols = [self.times]
        for arr in (self.cavity_pop, self.emitter_pop, self.mode_pop,
                    self.sink_pop, self.norm):
            cols.append(np.mean(arr, axis=1))
        cols.append(np.std(self.norm, axis=1, ddof=1) / math.sqrt(self.n_traj)
                    if self.n_traj > 1 else np.zeros_like(self.times))
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header="t,cavity_pop,emitter_pop,mode_pop,sink_pop,norm_mean,norm_se",
                   comments="")


def _sample_plan(n_steps: int, sample_every: int) -> np.ndarray:
    mask = np.zeros(n_steps, dtype=np.bool_)
    mask[sample_every - 1::sample_every] = True
    mask[n_steps - 1] = True
    return mask


def _resolve_steps(params: SystemParams, grid: ModeGrid, t_end: float,
                   dt: float | None) -> tuple[int, float]:
    if t_end <= 0.0:
        raise ValueError("t_end must be > 0")
    bound = default_timestep(params, grid)
    if dt is None:
        dt = bound
    elif dt > bound * (1.0 + 1e-12):
        raise ValueError(
            f"dt = {dt:g} does not resolve the fastest scale; need <= {bound:g}"
        )
    n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    return n_steps, t_end / n_steps


def _run_batch(s1, cav, emi, snk, params: SystemParams, grid: ModeGrid,
               n_steps: int, dt: float, sample_mask, noise_gens=None,
               check_leak: bool = True, leak_tol: float = LEAK_TOLERANCE,
               omega_override: complex | None = None):
    """Drive the kernel over fixed-size time chunks; mutates the state arrays.

    Returns the sampled curve arrays (M+1 rows including the initial state).
    The time chunking is a fixed constant so trajectory results are bitwise
    reproducible regardless of batch splitting or memory budget.
    """
    batch, n_modes = s1.shape
    det = np.ascontiguousarray(grid.detunings(params.omega_c), dtype=np.float64)
    lcoup = complex(mode_coupling(params, grid))
    omega = complex(params.omega_rabi if omega_override is None else omega_override)
    phh = np.exp(1j * det * (0.5 * dt))
    phh2 = phh * phh
    k1sum = complex(np.sum(np.conj(phh)))

    m_rows = int(np.count_nonzero(sample_mask)) + 1
    out = {name: np.zeros((m_rows, batch)) for name in
           ("cav", "emit", "mode", "sink", "norm", "leak")}
    jc = np.zeros(batch)
    jf = np.zeros(batch)
    status = np.zeros(batch, dtype=np.int64)
    fail_step = np.full(batch, -1, dtype=np.int64)

    mode_norm0 = np.sum(np.abs(s1) ** 2, axis=1)
    out["cav"][0] = np.abs(cav) ** 2
    out["emit"][0] = np.abs(emi) ** 2
    out["mode"][0] = mode_norm0
    out["sink"][0] = np.abs(snk) ** 2
    out["norm"][0] = mode_norm0 + out["cav"][0] + out["emit"][0] + out["sink"][0]

    use_noise = noise_gens is not None
    empty_noise = np.zeros((batch, 0, 4))
    row0 = 1
    done = 0
    while done < n_steps:
        chunk = min(TIME_CHUNK, n_steps - done)
        mask_chunk = np.ascontiguousarray(sample_mask[done:done + chunk])
        if use_noise:
            noise = np.empty((batch, chunk, 4))
            for b, gen in enumerate(noise_gens):
                noise[b] = gen.standard_normal((chunk, 4))
        else:
            noise = empty_noise
        run_rk4_chunk(
            s1, cav, emi, snk, jc, jf,
            det, phh, phh2, k1sum, params.delta_e, lcoup, omega,
            params.mu_c, params.gamma, params.gamma_e, params.gamma_el,
            done * dt, dt, chunk,
            noise, use_noise,
            check_leak, leak_tol,
            mask_chunk, row0,
            out["cav"], out["emit"], out["mode"], out["sink"],
            out["norm"], out["leak"],
            status, fail_step,
        )
        if np.any(status == STATUS_NONFINITE):
            b = int(np.nonzero(status == STATUS_NONFINITE)[0][0])
            raise NonFiniteStateError(
                f"non-finite amplitudes at step {done + fail_step[b]} "
                f"(trajectory {b}); reduce dt or check parameters"
            )
        if np.any(status == STATUS_LEAK):
            b = int(np.nonzero(status == STATUS_LEAK)[0][0])
            raise StepSizeError(
                f"norm-leak residual exceeded {leak_tol:g} per unit time at step "
                f"{done + fail_step[b]}; reduce dt"
            )
        row0 += int(np.count_nonzero(mask_chunk))
        done += chunk
    out["jc"] = jc
    out["jf"] = jf
    return out


def _sample_times(n_steps: int, dt: float, sample_mask) -> np.ndarray:
    steps = np.concatenate([[0], np.nonzero(sample_mask)[0] + 1])
    return steps * dt


def evolve_deterministic(
    state0: AmplitudeState,
    params: SystemParams,
    grid: ModeGrid,
    t_end: float,
    dt: float | None = None,
    sample_every: int | None = None,
    leak_tol: float = LEAK_TOLERANCE,
) -> TrajectoryRecord:
    """Integrate the noiseless amplitude equations up to t_end.

    The step must resolve the fastest scale (validated against
    `default_timestep`); every accepted step is checked against the norm-leak
    identity d(norm)/dt = -mu_c |Cc|^2 - gamma |Ce|^2 and the run aborts with
    StepSizeError when the residual exceeds `leak_tol` per unit time.
    """
    n_steps, dt = _resolve_steps(params, grid, t_end, dt)
    if sample_every is None:
        sample_every = max(1, n_steps // 512)
    mask = _sample_plan(n_steps, sample_every)

    s1 = np.ascontiguousarray(state0.c1k, dtype=np.complex128).reshape(1, -1).copy()
    cav = np.array([state0.cavity], dtype=np.complex128)
    emi = np.array([state0.emitter], dtype=np.complex128)
    snk = np.array([state0.sink], dtype=np.complex128)

    out = _run_batch(s1, cav, emi, snk, params, grid, n_steps, dt, mask,
                     noise_gens=None, check_leak=True, leak_tol=leak_tol)

    c2_norm = float(np.sum(np.abs(state0.c2k) ** 2))
    times = _sample_times(n_steps, dt, mask)
    return TrajectoryRecord(
        times=times,
        cavity_pop=out["cav"][:, 0],
        emitter_pop=out["emit"][:, 0],
        mode_pop=out["mode"][:, 0],
        sink_pop=out["sink"][:, 0],
        norm=out["norm"][:, 0] + c2_norm,
        leak=out["leak"][:, 0],
        final_modes_e1=s1[0],
        final_modes_e2=np.asarray(state0.c2k, dtype=np.complex128).copy(),
        final_cavity=complex(cav[0]),
        final_emitter=complex(emi[0]),
        final_sink=complex(snk[0]),
        t_end=n_steps * dt,
        dt=dt,
        time_integral_cavity=float(out["jc"][0]),
        time_integral_emitter=float(out["jf"][0]),
    )


def evolve_stochastic(
    state0: AmplitudeState,
    params: SystemParams,
    grid: ModeGrid,
    t_end: float,
    dt: float | None = None,
    n_traj: int = 1,
    seed: int = 0,
    sample_every: int | None = None,
    memory_budget: int = 2_000_000_000,
) -> EnsembleResult:
    """Monte-Carlo ensemble of Langevin-noise trajectories.

    Each trajectory j draws its noise from a counter-based stream keyed by
    (seed, j), so results are reproducible per trajectory regardless of
    execution order, thread count or batch splitting. Ensembles exceeding
    `memory_budget` bytes are rejected; within the budget, trajectories are
    run in groups.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    n_steps, dt = _resolve_steps(params, grid, t_end, dt)
    if sample_every is None:
        sample_every = max(1, n_steps // 256)
    mask = _sample_plan(n_steps, sample_every)
    m_rows = int(np.count_nonzero(mask)) + 1
    n_modes = grid.n_modes

    per_traj_retained = n_modes * 16 + m_rows * 6 * 8 + 64
    per_traj_working = n_modes * 16 * 2 + TIME_CHUNK * 4 * 8
    retained = n_traj * per_traj_retained
    if retained + per_traj_working > memory_budget:
        raise MemoryBudgetError(
            f"ensemble needs ~{retained + per_traj_working} bytes "
            f"(> budget {memory_budget}); lower n_traj, the grid size, or dt"
        )
    group = int(max(1, min(n_traj, (memory_budget - retained) // per_traj_working)))

    c1k = np.ascontiguousarray(state0.c1k, dtype=np.complex128)
    curves = {name: np.zeros((m_rows, n_traj)) for name in
              ("cav", "emit", "mode", "sink", "norm")}
    final_s1 = np.zeros((n_traj, n_modes), dtype=np.complex128)
    final_cav = np.zeros(n_traj, dtype=np.complex128)
    final_emi = np.zeros(n_traj, dtype=np.complex128)
    final_snk = np.zeros(n_traj, dtype=np.complex128)

    c2_norm = float(np.sum(np.abs(state0.c2k) ** 2))
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    for start in range(0, n_traj, group):
        stop = min(start + group, n_traj)
        batch = stop - start
        s1 = np.tile(c1k, (batch, 1))
        cav = np.full(batch, state0.cavity, dtype=np.complex128)
        emi = np.full(batch, state0.emitter, dtype=np.complex128)
        snk = np.full(batch, state0.sink, dtype=np.complex128)
        gens = [np.random.Generator(np.random.Philox(key=np.array([seed, j],
                                                                  dtype=np.uint64)))
                for j in range(start, stop)]
        out = _run_batch(s1, cav, emi, snk, params, grid, n_steps, dt, mask,
                         noise_gens=gens, check_leak=False)
        for name in ("cav", "emit", "mode", "sink"):
            curves[name][:, start:stop] = out[name]
        curves["norm"][:, start:stop] = out["norm"] + c2_norm
        final_s1[start:stop] = s1
        final_cav[start:stop] = cav
        final_emi[start:stop] = emi
        final_snk[start:stop] = snk

    return EnsembleResult(
        times=_sample_times(n_steps, dt, mask),
        cavity_pop=curves["cav"],
        emitter_pop=curves["emit"],
        mode_pop=curves["mode"],
        sink_pop=curves["sink"],
        norm=curves["norm"],
        final_modes_e1=final_s1,
        final_cavity=final_cav,
        final_emitter=final_emi,
        final_sink=final_snk,
        seed=seed,
        n_traj=n_traj,
        t_end=n_steps * dt,
        dt=dt,
    )


def evolve_superposition(
    state0: AmplitudeState,
    params: SystemParams,
    grid: ModeGrid,
    t_end: float,
    dt: float | None = None,
    w_dark: float = 0.0,
    gamma_dark: float = 0.0,
    sample_every: int | None = None,
) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """Evolve the bright and dark branches of a superposition preparation.

    The bright branch carries the full coupling; the dark branch sees an
    empty cavity (|Omega| = 0) and only acquires the common energy offset
    `w_dark`, recorded as the dark record's frame energy. The branches never
    exchange amplitude. `gamma_dark` is only used to warn when the dark state
    would decay appreciably during the run (its decay is not simulated).
    """
    if state0.dark is None:
        raise ValueError("state0 has no dark branch; use AmplitudeState.superposition")
    weight_norm = abs(state0.bright_weight) ** 2 + abs(state0.dark_weight) ** 2
    if abs(weight_norm - 1.0) > 1e-9:
        raise ValueError("branch weights must satisfy |G|^2 + |D|^2 = 1")
    if gamma_dark > 0.0 and t_end > 1.0 / gamma_dark:
        warnings.warn(
            "run time exceeds the dark-state lifetime; branch decoupling is "
            "not a good approximation here",
            stacklevel=2,
        )
    bright = evolve_deterministic(state0, params, grid, t_end, dt=dt,
                                  sample_every=sample_every)
    dark_state = AmplitudeState(
        c1k=state0.dark.c1k, c2k=state0.dark.c2k,
        cavity=state0.dark.cavity, sink=state0.dark.sink,
    )
    dark = evolve_deterministic(dark_state, params.with_(omega_rabi=0.0),
                                grid, t_end, dt=dt, sample_every=sample_every)
    dark = dataclasses.replace(dark, frame_energy=w_dark)
    return bright, dark


@dataclass(frozen=True)
class ReflectionEstimate:
    """Per-mode and amplitude-weighted reflection ratios of a finished run."""

    amplitude: complex
    per_mode: np.ndarray
    mode_mask: np.ndarray
    residual_excitation: float


def extract_reflection(
    record: TrajectoryRecord,
    initial: AmplitudeState | np.ndarray,
    channel: str = "e1",
    convergence_threshold: float = CONVERGENCE_THRESHOLD,
    min_mode_weight: float = 1e-12,
) -> ReflectionEstimate:
    """Reflection ratios s_k(t_end) / s_k(0) after the pulse has left.

    Caller obligation: the run must extend past the pulse transit (t_end
    beyond the upper transit-window time); the convergence check below can
    only verify that the cavity and emitter excitation has decayed below
    `convergence_threshold` at t_end, which a run stopped before the pulse
    arrives would satisfy vacuously. The aggregate is the amplitude-weighted
    mean ratio sum_k conj(s_k(0)) s_k(t_end) / sum_k |s_k(0)|^2. Per-mode
    ratios are reported only where the initial amplitude carries at least
    `min_mode_weight` of the peak mode intensity (NaN elsewhere).
    """
    if channel not in ("e1", "e2"):
        raise ValueError("channel must be 'e1' or 'e2'")
    if isinstance(initial, AmplitudeState):
        s0 = initial.c1k if channel == "e1" else initial.c2k
    else:
        s0 = initial
    s0 = np.asarray(s0, dtype=complex)
    sf = record.final_modes_e1 if channel == "e1" else record.final_modes_e2

    weight = float(np.sum(np.abs(s0) ** 2))
    if weight <= 0.0:
        raise UndefinedReflectionError(
            f"no initial amplitude in channel {channel}; ratio undefined"
        )
    residual = abs(record.final_cavity) ** 2 + abs(record.final_emitter) ** 2
    if residual > convergence_threshold:
        raise NotConvergedError(
            f"cavity+emitter excitation {residual:g} above "
            f"{convergence_threshold:g} at t_end; extend the run"
        )
    aggregate = complex(np.sum(np.conj(s0) * sf) / weight)
    mask = np.abs(s0) ** 2 > min_mode_weight * float(np.max(np.abs(s0) ** 2))
    per_mode = np.full(s0.shape, np.nan + 1j * np.nan, dtype=complex)
    per_mode[mask] = sf[mask] / s0[mask]
    return ReflectionEstimate(
        amplitude=aggregate,
        per_mode=per_mode,
        mode_mask=mask,
        residual_excitation=float(residual),
    )


@dataclass(frozen=True)
class NoiseFraction:
    """Reflected noise power relative to the incident pulse, with its SEM."""

    fraction: float
    standard_error: float
    per_trajectory: np.ndarray


def reflected_noise_fraction(
    ensemble: EnsembleResult,
    reference: TrajectoryRecord,
    initial: AmplitudeState | np.ndarray,
) -> NoiseFraction:
    """Noise fraction sum_k |dC1k|^2 / sum_k |C1k(0)|^2 from an ensemble.

    dC1k is the per-mode deviation of each noisy trajectory from the
    deterministic reference run with the same initial state.
    """
    s0 = initial.c1k if isinstance(initial, AmplitudeState) else initial
    weight = float(np.sum(np.abs(np.asarray(s0)) ** 2))
    if weight <= 0.0:
        raise UndefinedReflectionError("initial pulse carries no e1 amplitude")
    delta = ensemble.final_modes_e1 - reference.final_modes_e1[None, :]
    per_traj = np.sum(np.abs(delta) ** 2, axis=1) / weight
    n = per_traj.size
    sem = float(np.std(per_traj, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return NoiseFraction(
        fraction=float(np.mean(per_traj)),
        standard_error=sem,
        per_trajectory=per_traj,
    )
