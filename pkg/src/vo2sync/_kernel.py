"""Compiled inner loop of the hybrid oscillator-network integrator.

Between thermal refreshes every oscillator sees a frozen external temperature
rise, so each switch mode is a linear RC circuit with a closed-form solution
and closed-form switching times. The loop walks fixed thermal intervals,
solves the events of each oscillator inside the interval independently, and
registers each discharge as a heat source for the other oscillators.

The kernel is resumable: when an output buffer or the noise buffer runs out
it rolls the current interval back and returns a status code; the caller
grows the buffer and calls again.
"""
import math

import numpy as np
from numba import njit

from .thermal import _horizon_closed, _pulse_closed

HRS = 0
LRS = 1
TURN_ON = 0
TURN_OFF = 1

DONE = 0
NEED_EVENTS = 1
NEED_SOURCES = 2
NEED_NOISE = 3

# columns of the parameter matrix
P_I, P_C, P_RI, P_VTH0, P_VH, P_RON, P_ROFF, P_TCR, P_HEAD, P_SIGMA = range(10)
# columns of the float state matrix
S_VC, S_JIT, S_TON, S_VTRIG, S_ECUR, S_LATCH = range(6)
# columns of the integer state matrix
SI_MODE, SI_KS, SI_NOISE = range(3)


@njit(cache=True)
def relax(v0, v_inf, tau, dt):
    """Exact solution of tau dV/dt = v_inf - V after ``dt``."""
    return v_inf + (v0 - v_inf) * math.exp(-dt / tau)


@njit(cache=True)
def hrs_crossing(vc, i_d, c, r_i, r_s, v_th):
    """Time until the device voltage reaches ``v_th`` in HRS; -1 if never."""
    r = r_i + r_s
    v_star = v_th * r / r_s
    if vc >= v_star:
        return 0.0
    v_inf = i_d * r
    if v_inf <= v_star:
        return -1.0
    return c * r * math.log((v_inf - vc) / (v_inf - v_star))


@njit(cache=True)
def lrs_crossing(vc, i_d, c, r_i, r_on, v_h):
    """Time until the capacitor voltage falls to ``v_h`` in LRS; -1 if never."""
    r = r_i + r_on
    if vc <= v_h:
        return 0.0
    v_inf = i_d * r
    if v_inf >= v_h:
        return -1.0
    return c * r * math.log((vc - v_inf) / (v_h - v_inf))


@njit(cache=True)
def _fill(samples, i, ks, n_samples, h_s, t0, t1, v0, i_d, c, r_i, r_s, d_t):
    # samples with time in [t0, t1) on one fixed-mode segment
    k = ks
    if samples.shape[2] == 0:
        while k < n_samples and k * h_s < t1:
            k += 1
        return k
    r = r_i + r_s
    v_inf = i_d * r
    tau = c * r
    while k < n_samples and k * h_s < t1:
        v = relax(v0, v_inf, tau, k * h_s - t0)
        samples[0, i, k] = v
        samples[1, i, k] = v * r_s / r
        samples[2, i, k] = v / r
        samples[3, i, k] = d_t
        k += 1
    return k


@njit(cache=True)
def _emit(ev_f, ev_i, cnt, t, osc, kind, e, t_ch, v_th):
    k = cnt[2]
    ev_f[k, 0] = t
    ev_f[k, 1] = e
    ev_f[k, 2] = t_ch
    ev_f[k, 3] = v_th
    ev_i[k, 0] = osc
    ev_i[k, 1] = kind
    cnt[2] = k + 1


@njit(cache=True)
def _step_oscillator(i, a, b, d_t, P, S, SI, noise, dist, rhoc, alpha, tail_tol,
                     src_f, src_osc, src_hz, src_hmax, ev_f, ev_i, cnt,
                     samples, n_samples, h_s):
    i_d = P[i, P_I]
    c = P[i, P_C]
    r_i = P[i, P_RI]
    v_h = P[i, P_VH]
    r_on = P[i, P_RON]
    head = P[i, P_HEAD]
    n = P.shape[0]
    t = a

    if S[i, S_LATCH] < 0.0:
        base = P[i, P_VTH0] * math.sqrt(1.0 - d_t / head) if d_t < head else 0.0
        if base <= v_h:
            # saturated heating: the switch can no longer hold the OFF state
            if cnt[2] >= ev_f.shape[0]:
                return NEED_EVENTS
            S[i, S_LATCH] = a
            if SI[i, SI_MODE] == HRS:
                _emit(ev_f, ev_i, cnt, a, i, TURN_ON, math.nan, math.nan, math.nan)
                SI[i, SI_MODE] = LRS
    if S[i, S_LATCH] >= 0.0:
        vc = S[i, S_VC]
        SI[i, SI_KS] = _fill(samples, i, SI[i, SI_KS], n_samples, h_s, a, b, vc,
                             i_d, c, r_i, r_on, d_t)
        S[i, S_VC] = relax(vc, i_d * (r_i + r_on), c * (r_i + r_on), b - a)
        return DONE

    r_hrs = max(r_on, P[i, P_ROFF] * (1.0 - P[i, P_TCR] * d_t))
    base = P[i, P_VTH0] * math.sqrt(1.0 - d_t / head)
    while True:
        vc = S[i, S_VC]
        if SI[i, SI_MODE] == HRS:
            v_th = base + S[i, S_JIT]
            if v_th <= v_h:
                v_th = v_h * (1.0 + 1e-9)
            dt_ev = hrs_crossing(vc, i_d, c, r_i, r_hrs, v_th)
            if dt_ev >= 0.0 and t + dt_ev < b:
                if cnt[2] >= ev_f.shape[0]:
                    return NEED_EVENTS
                if cnt[0] >= src_f.shape[0]:
                    return NEED_SOURCES
                t_ev = t + dt_ev
                SI[i, SI_KS] = _fill(samples, i, SI[i, SI_KS], n_samples, h_s, t, t_ev, vc,
                                     i_d, c, r_i, r_hrs, d_t)
                if dt_ev > 0.0:
                    vc = v_th * (r_i + r_hrs) / r_hrs
                S[i, S_VC] = vc
                SI[i, SI_MODE] = LRS
                energy = (c * v_th * v_th / 2.0 - c * v_h * v_h / 2.0) * r_on / (r_on + r_i)
                _emit(ev_f, ev_i, cnt, t_ev, i, TURN_ON, math.nan, math.nan, v_th)
                S[i, S_TON] = t_ev
                S[i, S_VTRIG] = v_th
                S[i, S_ECUR] = energy
                t_ch = lrs_crossing(vc, i_d, c, r_i, r_on, v_h)
                if t_ch > 0.0:
                    k = cnt[0]
                    src_f[k, 0] = t_ev
                    src_f[k, 1] = energy
                    src_f[k, 2] = t_ch
                    src_osc[k] = i
                    hmax = t_ev
                    for tgt in range(n):
                        if tgt == i:
                            src_hz[k, tgt] = -math.inf
                        else:
                            h = t_ev + _horizon_closed(energy, t_ch, dist[i, tgt], rhoc, alpha,
                                                       tail_tol)
                            src_hz[k, tgt] = h
                            if h > hmax:
                                hmax = h
                    src_hmax[k] = hmax
                    cnt[0] = k + 1
                t = t_ev
                continue
            SI[i, SI_KS] = _fill(samples, i, SI[i, SI_KS], n_samples, h_s, t, b, vc,
                                 i_d, c, r_i, r_hrs, d_t)
            S[i, S_VC] = relax(vc, i_d * (r_i + r_hrs), c * (r_i + r_hrs), b - t)
            return DONE
        else:
            dt_ev = lrs_crossing(vc, i_d, c, r_i, r_on, v_h)
            if dt_ev >= 0.0 and t + dt_ev < b:
                if cnt[2] >= ev_f.shape[0]:
                    return NEED_EVENTS
                sigma = P[i, P_SIGMA]
                if sigma > 0.0 and SI[i, SI_NOISE] >= noise.shape[1]:
                    return NEED_NOISE
                t_ev = t + dt_ev
                SI[i, SI_KS] = _fill(samples, i, SI[i, SI_KS], n_samples, h_s, t, t_ev, vc,
                                     i_d, c, r_i, r_on, d_t)
                S[i, S_VC] = v_h
                SI[i, SI_MODE] = HRS
                _emit(ev_f, ev_i, cnt, t_ev, i, TURN_OFF, S[i, S_ECUR], t_ev - S[i, S_TON],
                      S[i, S_VTRIG])
                if sigma > 0.0:
                    z = noise[i, SI[i, SI_NOISE]]
                    SI[i, SI_NOISE] += 1
                    S[i, S_JIT] = _clip_jitter(sigma * z, P[i, P_VTH0] - v_h)
                t = t_ev
                continue
            if dt_ev < 0.0:
                # the load line never returns below the holding voltage
                S[i, S_LATCH] = S[i, S_TON]
            SI[i, SI_KS] = _fill(samples, i, SI[i, SI_KS], n_samples, h_s, t, b, vc,
                                 i_d, c, r_i, r_on, d_t)
            S[i, S_VC] = relax(vc, i_d * (r_i + r_on), c * (r_i + r_on), b - t)
            return DONE


@njit(cache=True)
def _clip_jitter(x, window):
    lim = 0.5 * window
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


@njit(cache=True)
def run(j, n_intervals, h_t, duration, h_s, n_samples,
        P, S, SI, cnt, noise, dist, rhoc, alpha, tail_tol,
        src_f, src_osc, src_hz, src_hmax, ev_f, ev_i, samples, d_t):
    """Advance thermal intervals ``j .. n_intervals - 1``.

    Returns ``(status, j)`` where ``j`` is the first interval not completed.
    """
    n = P.shape[0]
    S_snap = np.empty_like(S)
    SI_snap = np.empty_like(SI)
    while j < n_intervals:
        a = j * h_t
        b = (j + 1) * h_t
        if b > duration:
            b = duration
        S_snap[:, :] = S
        SI_snap[:, :] = SI
        c0 = cnt[0]
        c2 = cnt[2]

        n_src = cnt[0]
        fa = cnt[1]
        while fa < n_src and src_hmax[fa] < a:
            fa += 1
        cnt[1] = fa
        for i in range(n):
            acc = 0.0
            for k in range(fa, n_src):
                o = src_osc[k]
                if o == i or a > src_hz[k, i]:
                    continue
                acc += _pulse_closed(src_f[k, 1], src_f[k, 2], dist[o, i], a - src_f[k, 0],
                                     rhoc, alpha)
            d_t[i] = acc

        status = DONE
        for i in range(n):
            status = _step_oscillator(i, a, b, d_t[i], P, S, SI, noise, dist, rhoc, alpha,
                                      tail_tol, src_f, src_osc, src_hz, src_hmax, ev_f, ev_i,
                                      cnt, samples, n_samples, h_s)
            if status != DONE:
                break
        if status != DONE:
            S[:, :] = S_snap
            SI[:, :] = SI_snap
            cnt[0] = c0
            cnt[2] = c2
            return status, j
        j += 1
    return DONE, j
