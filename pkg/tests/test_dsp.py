import numpy as np
import pytest

from voicemarkers.config import MfccConfig, PitchConfig, SgConfig, VadConfig
from voicemarkers.corpus import AudioClip, frame_params, remove_silence
from voicemarkers.dsp import (FrameSeries, frame_signal, mel_filterbank, mfcc,
                              pitch_track, sg_derivative)
from voicemarkers.errors import DataError, UsageError
from voicemarkers.synthlab import VoiceSpec, synth_voice

SR = 44100


def _clip(x, sr=SR):
    return AudioClip(samples=np.asarray(x, np.float64), sample_rate=sr)


def test_frame_signal_counts_and_content():
    x = np.arange(100.0)
    frames = frame_signal(x, 30, 20)
    assert frames.shape == (4, 30)
    assert frames[0, 0] == 0.0
    assert frames[1, 0] == 20.0
    assert frames[3, -1] == 89.0


def test_frame_signal_short_clip_raises():
    with pytest.raises(DataError):
        frame_signal(np.zeros(10), 30, 20)


def test_mel_filterbank_shape_and_coverage():
    fb = mel_filterbank(26, 2048, SR)
    assert fb.shape == (26, 1025)
    assert (fb >= 0.0).all()
    # every filter has mass, and interior bins are covered by some filter
    assert (fb.sum(axis=1) > 0).all()
    covered = fb.sum(axis=0)
    assert (covered[10:-10] > 0).all()


def test_mfcc_gain_shifts_only_c0():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(SR)
    a = mfcc(_clip(x))
    b = mfcc(_clip(4.0 * x))
    assert a.values.shape[1] == 12
    assert np.allclose(a.values[:, 1:], b.values[:, 1:], atol=1e-9)
    shift = b.values[:, 0] - a.values[:, 0]
    assert np.allclose(shift, shift[0], atol=1e-9)
    assert shift[0] > 0


def test_mfcc_respects_coefficient_count():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(SR // 2)
    series = mfcc(_clip(x), config=MfccConfig(n_coeffs=7))
    assert series.values.shape[1] == 7


def _series(values):
    return FrameSeries(values=np.asarray(values, np.float64),
                       frame_len=1024, hop=256, sample_rate=SR)


def test_sg_delta_exact_on_linear_sequences():
    k = np.arange(40.0)
    vals = np.column_stack([2.5 * k + 1.0, -0.75 * k])
    d1 = sg_derivative(_series(vals), 1)
    w = SgConfig().window  # interior frames only
    h = w // 2
    interior = d1.values[h:-h]
    assert np.abs(interior[:, 0] - 2.5).max() < 1e-9
    assert np.abs(interior[:, 1] + 0.75).max() < 1e-9


def test_sg_delta_delta_exact_on_quadratics():
    k = np.arange(40.0)
    vals = (0.3 * k * k - 2.0 * k + 5.0)[:, None]
    d2 = sg_derivative(_series(vals), 2)
    h = SgConfig().window // 2
    interior = d2.values[h:-h]
    assert np.abs(interior - 0.6).max() < 1e-9


def test_sg_rejects_bad_order():
    with pytest.raises(UsageError):
        sg_derivative(_series(np.zeros((10, 2))), 3)


@pytest.mark.parametrize("f0", [100.0, 150.0, 250.0, 400.0])
def test_pitch_within_one_percent(f0):
    clip, _ = synth_voice(VoiceSpec(f0=f0, duration=1.0, snr_db=45.0,
                                    seed=4))
    track = pitch_track(clip)
    voiced = track.voiced_f0()
    assert voiced.size > 10
    med = float(np.median(voiced))
    assert abs(med - f0) / f0 < 0.01


def test_pitch_unvoiced_on_noise():
    rng = np.random.default_rng(5)
    clip = _clip(0.1 * rng.standard_normal(SR))
    track = pitch_track(clip)
    assert track.voicing.mean() < 0.2


def test_remove_silence_drops_silent_gap():
    frame_len, hop = frame_params(SR)
    rng = np.random.default_rng(6)
    loud = 0.5 * rng.standard_normal(SR // 2)
    clip = _clip(np.concatenate([loud, np.zeros(SR // 2), loud]))
    kept = remove_silence(clip, VadConfig(pad_ms=0.0))
    assert kept.samples.shape[0] < clip.samples.shape[0]
    assert kept.samples.shape[0] >= loud.shape[0] * 2 * 0.8


def test_remove_silence_all_silent_raises():
    clip = _clip(np.zeros(SR))
    with pytest.raises(DataError):
        remove_silence(clip, VadConfig(pad_ms=0.0))
