"""Synchronization analysis of two switching-peak trains.

The subharmonic ratio (SHR) and synchronization efficiency (eta) are derived
from coincidences: moments when both oscillators switch within a tolerance of
each other. Between consecutive coincidences each oscillator completes an
integer number of periods M; the most frequent M of each oscillator gives the
ratio SHR = M1_max / M2_max = F1 / F2, and eta is the share of coincidence
intervals carrying the dominant count.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = [
    "PeakTrain",
    "SyncReport",
    "Spectrum",
    "extract_peaks",
    "coincidences",
    "coincidence_pairs",
    "interval_counts",
    "shr_eta",
    "report_from_histograms",
    "spectrum",
    "fundamental",
    "phase_difference",
    "mean_frequency",
]


@dataclass(frozen=True, eq=False)
class PeakTrain:
    oscillator_id: int
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1:
            raise DomainError("peak times must be one-dimensional")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("peak times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class SyncReport:
    """Result of the coincidence / SHR / eta analysis.

    ``shr`` is ``None`` (and ``eta`` is 0) when there were fewer than two
    coincidences. ``f_s`` is the subharmonic synchronization frequency
    ``lcm(M1_max, M2_max) / T_s``, i.e. the common frequency of the locked
    harmonics; ``None`` when computed from histograms alone.
    """

    n1: dict
    n2: dict
    m1_max: int | None
    m2_max: int | None
    n1_max: int
    n2_max: int
    shr: Fraction | None
    eta: float
    synchronized: bool
    f_s: float | None
    sigma_n: int
    overflow1: int = 0
    overflow2: int = 0
    n_coincidences: int = 0

    @property
    def shr_text(self) -> str:
        return "" if self.shr is None else f"{self.shr.numerator}/{self.shr.denominator}"

    def to_dict(self) -> dict:
        return {
            "n1": {str(k): v for k, v in sorted(self.n1.items())},
            "n2": {str(k): v for k, v in sorted(self.n2.items())},
            "m1_max": self.m1_max, "m2_max": self.m2_max,
            "n1_max": self.n1_max, "n2_max": self.n2_max,
            "shr": self.shr_text, "eta": self.eta, "synchronized": self.synchronized,
            "f_s": self.f_s, "sigma_n": self.sigma_n,
            "overflow1": self.overflow1, "overflow2": self.overflow2,
            "n_coincidences": self.n_coincidences,
        }


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided DFT magnitudes of a mean-removed, windowed, zero-padded signal."""

    frequencies: np.ndarray
    magnitude: np.ndarray
    bin_width: float
    window: str
    n_fft: int

    def energy(self) -> float:
        """Signal energy recovered from the spectrum (Parseval)."""
        p = self.magnitude**2
        w = np.full(p.size, 2.0)
        w[0] = 1.0
        if self.n_fft % 2 == 0:
            w[-1] = 1.0
        return float((w * p).sum() / self.n_fft)


def extract_peaks(source, method="event_log", oscillator=0, level=None, hysteresis=0.0,
                  signal=None):
    """Switching moments of one oscillator.

    Parameters
    ----------
    source : SimTrace or ImportedWaveform or tuple (time, samples)
        Where the peaks come from.
    method : {'event_log', 'threshold_crossing'}
        ``'event_log'`` returns the TURN_ON times of a simulated trace.
        ``'threshold_crossing'`` finds rising crossings of ``level`` in the
        device current (or ``signal``/channel samples), linearly interpolated
        between samples. After a crossing the detector re-arms only once the
        signal has dropped below ``level - hysteresis``.
    oscillator : int
        Oscillator id for traces; channel index for imported waveforms.
    """
    if method == "event_log":
        return PeakTrain(oscillator, source.turn_on_times(oscillator))
    if method != "threshold_crossing":
        raise ValueError(f"unknown method {method!r}")
    if level is None:
        raise DomainError("threshold_crossing needs a level")
    if hysteresis < 0:
        raise DomainError("hysteresis must be >= 0")
    t, x = _time_and_signal(source, oscillator, signal)
    if t.size < 2 or t[-1] <= t[0]:
        raise DomainError("waveform duration must be > 0")
    ups = np.flatnonzero((x[1:] >= level) & (x[:-1] < level)) + 1
    downs = np.flatnonzero(x < level - hysteresis)
    times = []
    last_up = -1
    for k in ups:
        if last_up >= 0:
            # re-arm requires a sample below level - hysteresis since the last accepted crossing
            pos = np.searchsorted(downs, last_up)
            if pos >= downs.size or downs[pos] >= k:
                continue
        frac = (level - x[k - 1]) / (x[k] - x[k - 1])
        times.append(t[k - 1] + frac * (t[k] - t[k - 1]))
        last_up = k
    return PeakTrain(oscillator, np.array(times))


def _time_and_signal(source, oscillator, signal):
    if isinstance(source, tuple):
        t, x = source
        return np.asarray(t, float), np.asarray(x, float)
    if hasattr(source, "channels"):  # imported waveform
        return source.time, source.channels[oscillator]
    if signal is None:
        signal = "current"
    return source.time, getattr(source, signal)[oscillator]


def coincidence_pairs(p1: PeakTrain, p2: PeakTrain, tol=1e-5):
    """Index pairs ``(i, j)`` of coincident peaks, ordered in time.

    A pair needs ``|t1[i] - t2[j]| <= tol``. Candidate pairs are accepted
    nearest-first (ties: earlier peaks first) and every peak joins at most
    one pair.
    """
    if not tol > 0:
        raise DomainError("tol must be > 0")
    t1, t2 = p1.times, p2.times
    if t1.size == 0 or t2.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.searchsorted(t2, t1 - tol, side="left")
    hi = np.searchsorted(t2, t1 + tol, side="right")
    counts = hi - lo
    ii = np.repeat(np.arange(t1.size), counts)
    if ii.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    offsets = np.arange(ii.size) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = np.repeat(lo, counts) + offsets
    gap = np.abs(t1[ii] - t2[jj])
    keep = gap <= tol
    ii, jj, gap = ii[keep], jj[keep], gap[keep]
    order = np.lexsort((jj, ii, gap))
    used1 = np.zeros(t1.size, bool)
    used2 = np.zeros(t2.size, bool)
    pairs = []
    for k in order:
        a, b = ii[k], jj[k]
        if not used1[a] and not used2[b]:
            used1[a] = used2[b] = True
            pairs.append((a, b))
    pairs = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    mid = (t1[pairs[:, 0]] + t2[pairs[:, 1]]) / 2
    return pairs[np.argsort(mid, kind="stable")]


def coincidences(p1: PeakTrain, p2: PeakTrain, tol=1e-5) -> np.ndarray:
    """Times ``(t1 + t2) / 2`` of coincident switching peaks."""
    pairs = coincidence_pairs(p1, p2, tol)
    return (p1.times[pairs[:, 0]] + p2.times[pairs[:, 1]]) / 2


def interval_counts(pairs):
    """Periods ``(M1, M2)`` of each oscillator between consecutive coincidences."""
    m = np.diff(np.asarray(pairs), axis=0)
    return m[(m[:, 0] > 0) & (m[:, 1] > 0)]


def report_from_histograms(n1, n2, eta_limit=90.0, f_s=None, overflow=(0, 0),
                           n_coincidences=0) -> SyncReport:
    """SHR and eta from the histograms ``M -> N`` of both oscillators.

    ``M_max`` is the most frequent count (ties: smaller M), ``SHR`` the reduced
    ratio ``M1_max / M2_max``, ``sigma_n = max(sum N1, sum N2)`` and
    ``eta = 100 min(N1_max, N2_max) / sigma_n``. Intervals in the overflow
    buckets (``overflow = (n_over1, n_over2)``) count towards ``sigma_n`` but
    never become ``M_max``.
    """
    n1 = {int(k): int(v) for k, v in n1.items() if v}
    n2 = {int(k): int(v) for k, v in n2.items() if v}
    if not n1 or not n2:
        raise DomainError("histograms must contain at least one non-zero count each")
    m1 = min(n1, key=lambda m: (-n1[m], m))
    m2 = min(n2, key=lambda m: (-n2[m], m))
    sigma_n = max(sum(n1.values()) + overflow[0], sum(n2.values()) + overflow[1])
    eta = 100.0 * min(n1[m1], n2[m2]) / sigma_n
    return SyncReport(
        n1=n1, n2=n2, m1_max=m1, m2_max=m2, n1_max=n1[m1], n2_max=n2[m2],
        shr=Fraction(m1, m2), eta=eta, synchronized=eta > eta_limit, f_s=f_s,
        sigma_n=sigma_n, overflow1=overflow[0], overflow2=overflow[1],
        n_coincidences=n_coincidences,
    )


def shr_eta(p1: PeakTrain, p2: PeakTrain, tol=1e-5, m_cap=8, eta_limit=90.0) -> SyncReport:
    """Coincidence analysis of two peak trains.

    Parameters
    ----------
    tol : float
        Coincidence tolerance (s).
    m_cap : int
        Counts above this go to an overflow bucket; it takes no part in the
        ``M_max`` selection but still counts towards ``sigma_n``.
    eta_limit : float
        Percentage above which the pair is declared synchronized.
    """
    pairs = coincidence_pairs(p1, p2, tol)
    empty = SyncReport({}, {}, None, None, 0, 0, None, 0.0, False, None, 0,
                       n_coincidences=len(pairs))
    if len(pairs) < 2:
        return empty
    m = interval_counts(pairs)
    over1 = int((m[:, 0] > m_cap).sum())
    over2 = int((m[:, 1] > m_cap).sum())
    n1 = Counter(int(v) for v in m[:, 0] if v <= m_cap)
    n2 = Counter(int(v) for v in m[:, 1] if v <= m_cap)
    if not n1 or not n2:
        return SyncReport(dict(n1), dict(n2), None, None, 0, 0, None, 0.0, False, None, 0,
                          over1, over2, len(pairs))
    rep = report_from_histograms(n1, n2, eta_limit, overflow=(over1, over2),
                                 n_coincidences=len(pairs))
    c = coincidences(p1, p2, tol)
    spans = np.diff(c)[(np.diff(pairs, axis=0) > 0).all(axis=1)]
    sel = (m[:, 0] == rep.m1_max) & (m[:, 1] == rep.m2_max)
    f_s = None
    if sel.any():
        f_s = math.lcm(rep.m1_max, rep.m2_max) / spans[sel].mean()
    return SyncReport(**{**rep.__dict__, "f_s": f_s})


def spectrum(samples, sample_rate, window="rectangular", segments=1) -> Spectrum:
    """Magnitude spectrum of a real signal.

    The signal is mean-removed, multiplied by the window, and zero-padded to
    the next power of two.

    Parameters
    ----------
    segments : int
        Split the signal into this many equal, non-overlapping segments and
        return the root of the mean squared magnitude (Bartlett averaging).
        Averaging trades resolution for a less noisy estimate of broadened
        peaks; 1 gives the plain periodogram.
    """
    x = np.asarray(samples, dtype=float)
    if not sample_rate > 0:
        raise DomainError("sample_rate must be > 0")
    if int(segments) != segments or segments < 1:
        raise DomainError("segments must be a positive integer")
    seg_len = x.size // int(segments)
    if seg_len < 2:
        raise DomainError("need at least two samples per segment")
    if window not in ("rectangular", "hann"):
        raise ValueError(f"unknown window {window!r}")
    n_fft = 1 << int(math.ceil(math.log2(seg_len)))
    w = np.hanning(seg_len) if window == "hann" else None
    power = np.zeros(n_fft // 2 + 1)
    for k in range(int(segments)):
        seg = x[k * seg_len:(k + 1) * seg_len]
        seg = seg - seg.mean()
        if w is not None:
            seg = seg * w
        power += np.abs(np.fft.rfft(seg, n_fft)) ** 2
    mag = np.sqrt(power / segments)
    return Spectrum(np.fft.rfftfreq(n_fft, 1.0 / sample_rate), mag, sample_rate / n_fft,
                    window, n_fft)


def fundamental(spec: Spectrum, band=None):
    """Frequency and full width at half maximum of the strongest peak in ``band``.

    The frequency is the magnitude-weighted centroid of the peak bin and its
    two neighbours; the half-maximum crossings on either side are linearly
    interpolated. The width is never smaller than one bin.

    Returns
    -------
    (f0, fwhm) : tuple of float (Hz)
    """
    f, mag = spec.frequencies, spec.magnitude
    if band is None:
        band = (spec.bin_width, f[-1])
    lo, hi = band
    if lo < 0 or hi > f[-1] + spec.bin_width or hi <= lo:
        raise DomainError(f"band {band} outside the spectrum range [0, {f[-1]:g}] Hz")
    idx = np.flatnonzero((f >= lo) & (f <= hi))
    if idx.size == 0:
        raise DomainError("band contains no bins")
    seg = mag[idx]
    if seg.max() <= 0 or np.ptp(seg) <= 1e-12 * seg.max():
        raise DomainError("no spectral peak in band")
    k = idx[np.argmax(seg)]
    nb = np.arange(max(k - 1, 0), min(k + 2, mag.size))
    f0 = float((f[nb] * mag[nb]).sum() / mag[nb].sum())

    half = mag[k] / 2
    left = k
    while left > 0 and mag[left - 1] >= half:
        left -= 1
    if left > 0:
        a, b = mag[left - 1], mag[left]
        f_left = f[left - 1] + (half - a) / (b - a) * (f[left] - f[left - 1])
    else:
        f_left = f[0]
    right = k
    while right < mag.size - 1 and mag[right + 1] >= half:
        right += 1
    if right < mag.size - 1:
        a, b = mag[right], mag[right + 1]
        f_right = f[right] + (a - half) / (a - b) * (f[right + 1] - f[right])
    else:
        f_right = f[-1]
    return f0, max(float(f_right - f_left), spec.bin_width)


def phase_difference(p1: PeakTrain, p2: PeakTrain):
    """Phase of oscillator 2 at each peak of oscillator 1, in ``[-pi, pi]``.

    ``2 pi (t - t2_prev) / (t2_next - t2_prev)`` with ``t2_prev <= t < t2_next``
    the surrounding peaks of oscillator 2.

    Returns
    -------
    (t, dphi) : tuple of ndarray
    """
    t1, t2 = p1.times, p2.times
    if t1.size < 2 or t2.size < 2:
        raise DomainError("each train needs at least two peaks")
    k = np.searchsorted(t2, t1, side="right") - 1
    ok = (k >= 0) & (k < t2.size - 1)
    t, k = t1[ok], k[ok]
    phase = 2 * np.pi * (t - t2[k]) / (t2[k + 1] - t2[k])
    phase = np.mod(phase, 2 * np.pi)
    phase = np.where(phase > np.pi, phase - 2 * np.pi, phase)
    return t, phase


def mean_frequency(p: PeakTrain, skip=1) -> float:
    """Average switching frequency (Hz), ignoring the first ``skip`` cycles."""
    t = p.times[skip:]
    if t.size < 2:
        return float("nan")
    return (t.size - 1) / (t[-1] - t[0])
