"""Frame-level spectral analysis: MFCCs, SG derivatives, pitch, formants.

All analysis shares one 25 ms / 10 ms frame grid (1102 / 441 samples at
44.1 kHz; rescaled for other rates).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.signal import get_window, lfilter, resample_poly, savgol_filter

from .config import FormantConfig, MfccConfig, PitchConfig, SgConfig, VadConfig
from .corpus import AudioClip, frame_params
from .errors import DataError, UsageError

_EPS = 1e-12


@dataclass
class FrameSeries:
    values: np.ndarray  # (frames, coefficients)
    frame_len: int
    hop: int
    sample_rate: int


@dataclass
class PitchTrack:
    f0: np.ndarray       # Hz, nan where unvoiced
    voicing: np.ndarray  # bool
    r_peak: np.ndarray   # autocorrelation height at the chosen lag
    frame_len: int
    hop: int
    sample_rate: int

    def voiced_f0(self) -> np.ndarray:
        return self.f0[self.voicing]


def frame_signal(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """(n_frames, frame_len) view-copy; frames = floor((n-frame_len)/hop)+1."""
    n = x.shape[0]
    if n < frame_len:
        raise DataError("clip shorter than one frame (%d < %d)" % (n, frame_len))
    n_frames = (n - frame_len) // hop + 1
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def mel_filterbank(n_mels: int, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular filters, HTK mel scale, spanning 0 Hz to Nyquist."""
    def to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def from_mel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    nyquist = sample_rate / 2.0
    mel_pts = np.linspace(to_mel(0.0), to_mel(nyquist), n_mels + 2)
    hz_pts = from_mel(mel_pts)
    bin_freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size

    fb = np.zeros((n_mels, bin_freqs.shape[0]))
    for m in range(n_mels):
        lo, mid, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rise = (bin_freqs - lo) / max(mid - lo, _EPS)
        fall = (hi - bin_freqs) / max(hi - mid, _EPS)
        fb[m] = np.maximum(0.0, np.minimum(rise, fall))
    return fb


def mfcc(clip: AudioClip, n_coeffs: int = None, config: MfccConfig = None) -> FrameSeries:
    """Mel-frequency cepstral coefficients per frame.

    Pre-emphasis, Hann window, magnitude FFT, mel filterbank, log, DCT-II
    (orthonormal); coefficients first_coeff .. first_coeff+n_coeffs-1.
    """
    if config is None:
        config = MfccConfig()
    if n_coeffs is None:
        n_coeffs = config.n_coeffs
    sr = clip.sample_rate
    frame_len, hop = frame_params(sr)

    x = clip.samples.astype(np.float64)
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - config.preemphasis * x[:-1]

    frames = frame_signal(y, frame_len, hop)
    window = get_window("hann", frame_len, fftbins=True)
    fft_size = config.fft_size or (1 << int(math.ceil(math.log2(frame_len))))
    if fft_size < frame_len:
        raise UsageError("fft_size %d smaller than frame length %d"
                         % (fft_size, frame_len))

    spectrum = np.abs(np.fft.rfft(frames * window, n=fft_size, axis=1))
    fb = mel_filterbank(config.n_mels, fft_size, sr)
    energies = spectrum @ fb.T
    logE = np.log(np.maximum(energies, 1e-10))
    coeffs = dct(logE, type=2, axis=1, norm="ortho")
    sel = coeffs[:, config.first_coeff:config.first_coeff + n_coeffs]
    return FrameSeries(values=sel, frame_len=frame_len, hop=hop, sample_rate=sr)


def sg_derivative(series: FrameSeries, order: int, config: SgConfig = None) -> FrameSeries:
    """Savitzky-Golay derivative of each coefficient track (unit frame
    spacing, edge-replicated padding). Order 2 is fit directly, not Δ of Δ."""
    if order not in (1, 2):
        raise UsageError("derivative order must be 1 or 2, got %r" % (order,))
    if config is None:
        config = SgConfig()
    vals = savgol_filter(series.values, window_length=config.window,
                         polyorder=config.polyorder, deriv=order,
                         delta=1.0, axis=0, mode="nearest")
    return FrameSeries(values=vals, frame_len=series.frame_len,
                       hop=series.hop, sample_rate=series.sample_rate)


def _autocorr_band(frames: np.ndarray, lo: int, hi: int):
    """Normalized autocorrelation r[tau] for tau in [lo, hi] per frame.

    r[tau] = sum x_i x_{i+tau} / sqrt(E_head(tau) E_tail(tau)); mean-removed.
    Returns (r matrix of shape (n_frames, hi-lo+1), lag offsets).
    """
    w = frames.shape[1]
    xm = frames - frames.mean(axis=1, keepdims=True)
    nfft = 1 << int(math.ceil(math.log2(2 * w)))
    spec = np.fft.rfft(xm, nfft, axis=1)
    ac = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)[:, :w]

    csq = np.concatenate([np.zeros((xm.shape[0], 1)),
                          np.cumsum(xm * xm, axis=1)], axis=1)
    total = csq[:, -1]
    lags = np.arange(lo, hi + 1)
    head = csq[:, w - lags]
    tail = total[:, None] - csq[:, lags]
    denom = np.sqrt(np.maximum(head * tail, 0.0))
    r = ac[:, lags] / np.maximum(denom, _EPS)
    return r, lags


def pitch_track(clip: AudioClip, config: PitchConfig = None,
                vad: VadConfig = None) -> PitchTrack:
    """Normalized-autocorrelation pitch per frame.

    Voiced iff the in-band peak is >= the voicing threshold and the frame is
    within the VAD energy floor of the loudest frame. Among lags whose r is
    within 0.01 of the in-band maximum the shortest is taken (rejects octave
    errors on strongly periodic signals), then refined parabolically.
    """
    if config is None:
        config = PitchConfig()
    if vad is None:
        vad = VadConfig()
    sr = clip.sample_rate
    frame_len, hop = frame_params(sr)
    frames = frame_signal(clip.samples, frame_len, hop)
    n_frames = frames.shape[0]

    rms = np.sqrt(np.mean(frames * frames, axis=1))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(rms)
    floor_db = db.max() - vad.drop_db

    lag_lo = max(2, int(math.floor(sr / config.fmax)))
    lag_hi = min(frame_len - 2, int(math.ceil(sr / config.fmin)))
    if lag_hi <= lag_lo:
        raise DataError("frame too short for the F0 search band")

    r, lags = _autocorr_band(frames, lag_lo - 1, lag_hi + 1)
    band = r[:, 1:-1]  # in-band lags [lag_lo, lag_hi]

    f0 = np.full(n_frames, np.nan)
    r_peak = np.zeros(n_frames)
    voicing = np.zeros(n_frames, dtype=bool)

    r_max = band.max(axis=1)
    for i in range(n_frames):
        if r_max[i] < config.voicing_threshold or db[i] <= floor_db:
            r_peak[i] = max(r_max[i], 0.0)
            continue
        j = int(np.argmax(band[i] >= r_max[i] - 0.01))  # shortest qualifying lag
        # climb to the local maximum of that peak (the tolerance rule may
        # land on its flank, which would bias both f0 and the peak height)
        m = band.shape[1]
        while j + 1 < m and band[i, j + 1] > band[i, j]:
            j += 1
        while j - 1 >= 0 and band[i, j - 1] > band[i, j]:
            j -= 1
        tau = lag_lo + j
        rm1, r0, rp1 = r[i, j], r[i, j + 1], r[i, j + 2]
        denom = rm1 - 2.0 * r0 + rp1
        if denom < -_EPS:
            delta = 0.5 * (rm1 - rp1) / denom
            delta = min(0.5, max(-0.5, delta))
        else:
            delta = 0.0
        height = r0 - 0.25 * (rm1 - rp1) * delta
        f0_i = sr / (tau + delta)
        f0[i] = min(config.fmax, max(config.fmin, f0_i))
        r_peak[i] = height
        voicing[i] = True

    return PitchTrack(f0=f0, voicing=voicing, r_peak=r_peak,
                      frame_len=frame_len, hop=hop, sample_rate=sr)


def _levinson(r: np.ndarray, order: int) -> np.ndarray:
    """Levinson-Durbin; returns LPC coefficients a[1..order] of
    A(z) = 1 + sum a_k z^-k."""
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i]
        for j in range(1, i):
            acc += a[j] * r[i - j]
        k = -acc / err
        a[1:i + 1] = a[1:i + 1] + k * a[i - 1::-1][:i]
        err *= (1.0 - k * k)
        if err <= 0:
            break
    return a


def formants(clip: AudioClip, track: PitchTrack,
             config: FormantConfig = None):
    """Mean F1/F2 over voiced frames via LPC root-finding at 10 kHz.

    Returns (f1_mean, f2_mean); (nan, nan) when no voiced frame yields both.
    """
    if config is None:
        config = FormantConfig()
    sr = clip.sample_rate
    target = config.target_rate
    if sr == target:
        xd = clip.samples.astype(np.float64)
    else:
        g = math.gcd(int(target), int(sr))
        xd = resample_poly(clip.samples, target // g, sr // g)

    y = np.empty_like(xd)
    y[0] = xd[0]
    y[1:] = xd[1:] - 0.97 * xd[:-1]

    frame_len, hop = frame_params(target)
    if y.shape[0] < frame_len:
        return (math.nan, math.nan)
    frames = frame_signal(y, frame_len, hop)
    window = get_window("hamming", frame_len, fftbins=False)
    n = min(frames.shape[0], track.f0.shape[0])
    order = config.lpc_order

    f1_acc, f2_acc, count = 0.0, 0.0, 0
    for i in range(n):
        if not track.voicing[i]:
            continue
        w = frames[i] * window
        full = np.correlate(w, w, mode="full")
        r = full[frame_len - 1:frame_len + order]
        if r[0] <= 0:
            continue
        r = r / r[0]
        r[0] = 1.0 + 1e-9
        a = _levinson(r, order)
        roots = np.roots(a)
        roots = roots[np.imag(roots) > 0]
        freqs = np.angle(roots) * target / (2.0 * np.pi)
        with np.errstate(divide="ignore"):
            bws = -(target / np.pi) * np.log(np.abs(roots))
        ok = (bws < config.max_bandwidth) & (freqs > 0)
        cand = np.sort(freqs[ok])

        f1 = f2 = None
        for f in cand:
            if f1 is None:
                if config.f1_range[0] <= f <= config.f1_range[1]:
                    f1 = f
            elif config.f2_range[0] <= f <= config.f2_range[1]:
                f2 = f
                break
        if f1 is not None and f2 is not None:
            f1_acc += f1
            f2_acc += f2
            count += 1

    if count == 0:
        return (math.nan, math.nan)
    return (f1_acc / count, f2_acc / count)
