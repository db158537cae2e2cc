"""Cycle-level voice quality: period tracking, jitter, shimmer, HNR."""

import math
from dataclasses import dataclass

import numpy as np

from .config import VqConfig
from .corpus import AudioClip
from .dsp import PitchTrack

_EPS = 1e-12


@dataclass
class PeriodSequence:
    period_lengths: np.ndarray     # seconds, one per consecutive mark pair
    period_amplitudes: np.ndarray  # peak amplitude at each period's start mark
    source_region: tuple           # (start_sample, end_sample)


def _voiced_runs(voicing: np.ndarray):
    edges = np.flatnonzero(np.diff(np.concatenate([[0], voicing.view(np.int8), [0]])))
    return list(zip(edges[::2], edges[1::2]))


def _refine_peak(x: np.ndarray, k: int):
    """Sub-sample peak position and height by parabolic interpolation."""
    if k <= 0 or k >= x.shape[0] - 1:
        return float(k), float(x[k])
    num = x[k - 1] - x[k + 1]
    den = x[k - 1] - 2.0 * x[k] + x[k + 1]
    if den >= -_EPS:
        return float(k), float(x[k])
    delta = 0.5 * num / den
    delta = min(0.5, max(-0.5, delta))
    height = x[k] - 0.25 * num * delta
    return k + delta, float(height)


def _fundamental_isolate(region: np.ndarray, sr: int, f0_med: float) -> np.ndarray:
    """Zero-phase band-pass keeping only the fundamental around f0_med.

    Flat in [0.75, 1.3] x f0_med with raised-cosine skirts to [0.55, 1.5];
    used only to anchor cycle positions, never for measurement.
    """
    n = region.shape[0]
    spec = np.fft.rfft(region)
    f = np.fft.rfftfreq(n, 1.0 / sr) / f0_med
    gain = np.zeros_like(f)
    flat = (f >= 0.75) & (f <= 1.3)
    gain[flat] = 1.0
    lo = (f >= 0.55) & (f < 0.75)
    gain[lo] = 0.5 * (1.0 - np.cos(np.pi * (f[lo] - 0.55) / 0.20))
    hi = (f > 1.3) & (f <= 1.5)
    gain[hi] = 0.5 * (1.0 + np.cos(np.pi * (f[hi] - 1.3) / 0.20))
    return np.fft.irfft(spec * gain, n)


def track_periods(clip: AudioClip, track: PitchTrack,
                  config: VqConfig = None) -> list:
    """Mark glottal cycles within each voiced run by peak-picking.

    Two stages per voiced run: a zero-phase fundamental-band isolate of the
    run is peak-picked (from its global maximum, successive peaks inside
    [lo, hi] x (local expected period), marched forward and backward), then
    each anchor snaps to the largest raw-waveform peak within a quarter
    period and is refined to sub-sample position and amplitude. The isolate
    makes cycle anchoring immune to formant ringing; timing and amplitude
    are always read from the raw waveform. Runs yielding fewer than 3 marks
    are discarded, as are periods outside the F0 band.
    """
    if config is None:
        config = VqConfig()
    x = clip.samples
    sr = clip.sample_rate
    hop, frame_len = track.hop, track.frame_len
    half = frame_len // 2

    sequences = []
    for fa, fb in _voiced_runs(track.voicing):
        s0 = int(fa * hop)
        s1 = min(x.shape[0], int((fb - 1) * hop) + frame_len)
        region = x[s0:s1]
        if region.shape[0] < 8:
            continue
        f0_med = float(np.median(track.f0[fa:fb]))
        guide = _fundamental_isolate(region, sr, f0_med)

        def period_at(pos):
            # expected period (samples) from the nearest voiced frame's f0
            fi = int(round((s0 + pos - half) / hop))
            fi = min(fb - 1, max(fa, fi))
            return sr / track.f0[fi]

        anchors = [int(np.argmax(guide))]
        t = float(anchors[0])
        while True:
            p = period_at(t)
            a = int(math.ceil(t + config.mark_window_lo * p))
            b = int(math.floor(t + config.mark_window_hi * p))
            if a >= region.shape[0]:
                break
            b = min(b, region.shape[0] - 1)
            if b < a:
                break
            k = a + int(np.argmax(guide[a:b + 1]))
            anchors.append(k)
            t = float(k)

        t = float(anchors[0])
        while True:
            p = period_at(t)
            a = int(math.ceil(t - config.mark_window_hi * p))
            b = int(math.floor(t - config.mark_window_lo * p))
            if b < 0:
                break
            a = max(a, 0)
            if b < a:
                break
            k = a + int(np.argmax(guide[a:b + 1]))
            anchors.insert(0, k)
            t = float(k)

        marks = []
        n_reg = region.shape[0]
        for k in anchors:
            # snap to the raw-waveform local peak whose basin holds the
            # anchor; hill-climbing keeps the cycle-relative position stable
            # where a windowed argmax would hop between formant-ring peaks
            j = k
            if j + 1 < n_reg and region[j + 1] > region[j]:
                while j + 1 < n_reg and region[j + 1] > region[j]:
                    j += 1
            else:
                while j - 1 >= 0 and region[j - 1] > region[j]:
                    j -= 1
            marks.append(_refine_peak(region, j))

        if len(marks) < 3:
            continue
        times = np.array([m[0] for m in marks]) / sr
        amps = np.abs(np.array([m[1] for m in marks]))
        periods = np.diff(times)

        # split where a period leaves the plausible band
        valid = (periods >= 1.0 / 500.0) & (periods <= 1.0 / 75.0)
        edges = np.flatnonzero(np.diff(np.concatenate([[0], valid.view(np.int8), [0]])))
        for va, vb in zip(edges[::2], edges[1::2]):
            if vb - va < 2:
                continue
            sequences.append(PeriodSequence(
                period_lengths=periods[va:vb],
                period_amplitudes=amps[va:vb],
                source_region=(s0, s1)))
    return sequences


def jitter(seqs: list) -> float:
    """Mean |T_{i+1} - T_i| over within-run pairs / mean T_i; nan if empty."""
    diffs, all_t = [], []
    for s in seqs:
        t = np.asarray(s.period_lengths, dtype=np.float64)
        all_t.append(t)
        if t.shape[0] >= 2:
            diffs.append(np.abs(np.diff(t)))
    if not all_t:
        return math.nan
    all_t = np.concatenate(all_t)
    if not diffs or all_t.size == 0:
        return math.nan
    return float(np.concatenate(diffs).mean() / all_t.mean())


def shimmer(seqs: list) -> float:
    """Mean |A_{i+1} - A_i| over within-run pairs / mean A_i; nan if empty."""
    diffs, all_a = [], []
    for s in seqs:
        a = np.asarray(s.period_amplitudes, dtype=np.float64)
        all_a.append(a)
        if a.shape[0] >= 2:
            diffs.append(np.abs(np.diff(a)))
    if not all_a:
        return math.nan
    all_a = np.concatenate(all_a)
    if not diffs or all_a.size == 0:
        return math.nan
    return float(np.concatenate(diffs).mean() / all_a.mean())


def hnr(clip: AudioClip, track: PitchTrack) -> float:
    """Mean over voiced frames of 10 log10(r / (1 - r)) with r the
    normalized autocorrelation at the chosen f0 lag; nan if all unvoiced."""
    del clip  # the track already carries the per-frame autocorrelation
    if not track.voicing.any():
        return math.nan
    r = np.clip(track.r_peak[track.voicing], 1e-3, 1.0 - 1e-3)
    return float(np.mean(10.0 * np.log10(r / (1.0 - r))))
