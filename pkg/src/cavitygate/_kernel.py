"""Numba core loop for the coupled amplitude equations.

Rotating-frame variables: s_k = C1k e^{+i omega_k t}, c = Cc e^{+i omega_c t},
f = Ce e^{+i W_e t}, integrated with classic RK4. The mode equation
ds_k/dt = i conj(L) c e^{i d_k t} has a rank-1 right-hand side, so each RK4
step needs only three phase-weighted mode sums of the base state plus scalar
stage algebra; the stage-to-stage mode contributions enter through the
constant kernel sums K1 = sum_k e^{-i d_k dt/2} and N. Mode phases advance by
exact recurrence with periodic renormalization.

Langevin noise is overlaid after each deterministic step (Euler-Maruyama in
structure): complex Gaussian increments on the emitter amplitude (pure
dephasing, intensity 2 gamma_el |Ce|^2) and on the ground-sink amplitude
(intensity mu_c |Cc|^2 + gamma_e |Ce|^2), with the intensities integrated over
the step from the trajectory's own amplitudes via the embedded RK4 quadrature
so the ensemble-averaged norm is conserved to integrator accuracy.

Status codes: 0 ok, 1 norm-leak residual exceeded, 2 non-finite state.
"""

import numpy as np
from numba import njit, prange

STATUS_OK = 0
STATUS_LEAK = 1
STATUS_NONFINITE = 2

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_RENORM_EVERY = 1024


@njit(parallel=True, cache=True)
def run_rk4_chunk(
    s1, c, f, c0, jc, jf,          # state: (B,N) c128; (B,) c128 x3; (B,) f64 x2
    det,                            # (N,) f64 detunings omega_k - omega_c
    phh, phh2,                      # (N,) c128 half/full-step mode phases
    k1sum,                          # c128: sum_k e^{-i d_k dt/2}
    delta_e,                        # f64
    lcoup, omega,                   # c128 scalars: mode coupling L, Rabi Omega
    mu_c, gamma, gamma_e, gamma_el,  # f64
    t0, dt, n_steps,                # chunk start time, step, step count
    noise, use_noise,               # (B, n_steps, 4) f64 standard normals; flag
    check_leak, leak_tol,           # flag, residual tolerance per unit time
    sample_mask,                    # (n_steps,) bool
    row0,                           # first output row written by this chunk
    out_cav, out_emit, out_mode, out_sink, out_norm, out_leak,  # (M,B) f64
    status, fail_step,              # (B,) i64
):
    # The phase constants are computed by the caller with plain numpy: array
    # reductions inside a parallel kernel would make the summation order,
    # and hence the last bits of every trajectory, depend on the worker count.
    n_modes = det.shape[0]
    batch = s1.shape[0]
    nf = float(n_modes)

    g_coef = 1j * np.conj(lcoup)
    il = 1j * lcoup
    iom = 1j * omega
    iomc = 1j * np.conj(omega)
    hmu = 0.5 * mu_c
    hg = 0.5 * gamma
    hdt = 0.5 * dt
    sixth = dt / 6.0
    reh = np.exp(-1j * delta_e * (0.5 * dt))

    for b in prange(batch):
        if status[b] != STATUS_OK:
            continue
        ph = np.exp(1j * det * t0)
        cb = c[b]
        fb = f[b]
        c0b = c0[b]
        jcb = jc[b]
        jfb = jf[b]

        mn = 0.0
        for k in range(n_modes):
            sv = s1[b, k]
            mn += sv.real * sv.real + sv.imag * sv.imag
        q_prev = mn + (cb.real * cb.real + cb.imag * cb.imag) \
            + (fb.real * fb.real + fb.imag * fb.imag) \
            + (c0b.real * c0b.real + c0b.imag * c0b.imag) \
            + mu_c * jcb + gamma * jfb

        row = row0
        for step in range(n_steps):
            t = t0 + step * dt
            re1 = np.exp(-1j * delta_e * t)
            re2 = re1 * reh
            re4 = re2 * reh

            m1 = 0.0 + 0.0j
            m2 = 0.0 + 0.0j
            m4 = 0.0 + 0.0j
            for k in range(n_modes):
                u = s1[b, k] * np.conj(ph[k])
                m1 += u
                v = u * np.conj(phh[k])
                m2 += v
                m4 += v * np.conj(phh[k])

            dc1 = -hmu * cb + il * m1 + iomc * fb * re1
            df1 = -hg * fb + iom * cb * np.conj(re1)

            c2 = cb + hdt * dc1
            f2 = fb + hdt * df1
            s2sum = m2 + hdt * g_coef * cb * k1sum
            dc2 = -hmu * c2 + il * s2sum + iomc * f2 * re2
            df2 = -hg * f2 + iom * c2 * np.conj(re2)

            c3 = cb + hdt * dc2
            f3 = fb + hdt * df2
            s3sum = m2 + hdt * g_coef * c2 * nf
            dc3 = -hmu * c3 + il * s3sum + iomc * f3 * re2
            df3 = -hg * f3 + iom * c3 * np.conj(re2)

            c4 = cb + dt * dc3
            f4 = fb + dt * df3
            s4sum = m4 + dt * g_coef * c3 * k1sum
            dc4 = -hmu * c4 + il * s4sum + iomc * f4 * re4
            df4 = -hg * f4 + iom * c4 * np.conj(re4)

            inc_jc = sixth * (
                (cb.real * cb.real + cb.imag * cb.imag)
                + 2.0 * (c2.real * c2.real + c2.imag * c2.imag)
                + 2.0 * (c3.real * c3.real + c3.imag * c3.imag)
                + (c4.real * c4.real + c4.imag * c4.imag)
            )
            inc_jf = sixth * (
                (fb.real * fb.real + fb.imag * fb.imag)
                + 2.0 * (f2.real * f2.real + f2.imag * f2.imag)
                + 2.0 * (f3.real * f3.real + f3.imag * f3.imag)
                + (f4.real * f4.real + f4.imag * f4.imag)
            )

            w0 = sixth * g_coef * cb
            w2 = sixth * g_coef * 2.0 * (c2 + c3)
            w4 = sixth * g_coef * c4
            mn = 0.0
            for k in range(n_modes):
                upd = w0 + w2 * phh[k] + w4 * phh2[k]
                sv = s1[b, k] + ph[k] * upd
                s1[b, k] = sv
                ph[k] = ph[k] * phh2[k]
                mn += sv.real * sv.real + sv.imag * sv.imag

            cb = cb + sixth * (dc1 + 2.0 * (dc2 + dc3) + dc4)
            fb = fb + sixth * (df1 + 2.0 * (df2 + df3) + df4)
            jcb += inc_jc
            jfb += inc_jf

            if use_noise:
                amp_f = np.sqrt(2.0 * gamma_el * inc_jf) * _INV_SQRT2
                amp_0 = np.sqrt(mu_c * inc_jc + gamma_e * inc_jf) * _INV_SQRT2
                fb = fb + amp_f * (noise[b, step, 0] + 1j * noise[b, step, 1])
                c0b = c0b + amp_0 * (noise[b, step, 2] + 1j * noise[b, step, 3])

            cav = cb.real * cb.real + cb.imag * cb.imag
            emit = fb.real * fb.real + fb.imag * fb.imag
            sink = c0b.real * c0b.real + c0b.imag * c0b.imag
            total = mn + cav + emit + sink

            if not (np.isfinite(total) and np.isfinite(jcb) and np.isfinite(jfb)):
                status[b] = STATUS_NONFINITE
                fail_step[b] = step
                break

            if check_leak:
                q = total + mu_c * jcb + gamma * jfb
                if abs(q - q_prev) > leak_tol * dt:
                    status[b] = STATUS_LEAK
                    fail_step[b] = step
                    break
                q_prev = q

            if (step + 1) % _RENORM_EVERY == 0:
                for k in range(n_modes):
                    p = ph[k]
                    ph[k] = p / np.sqrt(p.real * p.real + p.imag * p.imag)

            if sample_mask[step]:
                out_cav[row, b] = cav
                out_emit[row, b] = emit
                out_mode[row, b] = mn
                out_sink[row, b] = sink
                out_norm[row, b] = total
                out_leak[row, b] = mu_c * jcb + gamma * jfb
                row += 1

        c[b] = cb
        f[b] = fb
        c0[b] = c0b
        jc[b] = jcb
        jf[b] = jfb
