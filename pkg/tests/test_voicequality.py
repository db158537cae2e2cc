import numpy as np
import pytest

from voicemarkers.corpus import AudioClip
from voicemarkers.dsp import pitch_track
from voicemarkers.synthlab import VoiceSpec, synth_voice
from voicemarkers.voicequality import hnr, jitter, shimmer, track_periods

# single bright resonance keeps cycle marks unambiguous so the measured
# perturbations can be compared against the generator's ground truth
BRIGHT = ((3000.0, 600.0),)


def _voice(**kw):
    kw.setdefault("f0", 130.0)
    kw.setdefault("duration", 2.0)
    kw.setdefault("snr_db", 60.0)
    kw.setdefault("formant_poles", BRIGHT)
    kw.setdefault("seed", 9)
    clip, truth = synth_voice(VoiceSpec(**kw))
    return clip, truth


@pytest.mark.parametrize("eps", [0.005, 0.01, 0.02, 0.04])
def test_jitter_tracks_alternating_perturbation(eps):
    # alternating +/- eps perturbation: mean |dT| / mean T = 2 eps
    clip, _ = _voice(jitter_eps=eps)
    track = pitch_track(clip)
    seqs = track_periods(clip, track)
    measured = jitter(seqs)
    assert abs(measured - 2.0 * eps) / (2.0 * eps) < 0.10


@pytest.mark.parametrize("eps", [0.005, 0.01, 0.02, 0.04])
def test_shimmer_tracks_alternating_perturbation(eps):
    clip, _ = _voice(shimmer_eps=eps)
    track = pitch_track(clip)
    seqs = track_periods(clip, track)
    measured = shimmer(seqs)
    assert abs(measured - 2.0 * eps) / (2.0 * eps) < 0.10


def test_jitter_near_zero_on_clean_voice():
    clip, _ = _voice()
    track = pitch_track(clip)
    seqs = track_periods(clip, track)
    assert jitter(seqs) < 0.004
    assert shimmer(seqs) < 0.02


@pytest.mark.parametrize("snr", [0.0, 10.0, 20.0])
def test_hnr_matches_injected_snr(snr):
    # harmonic tone plus white noise mixed at an exact power ratio
    sr = 44100
    rng = np.random.default_rng(17)
    t = np.arange(int(1.5 * sr)) / sr
    tone = np.sin(2 * np.pi * 150.0 * t) + 0.4 * np.sin(2 * np.pi * 300.0 * t)
    tone /= np.sqrt(np.mean(tone ** 2))
    noise = rng.standard_normal(t.shape[0])
    noise /= np.sqrt(np.mean(noise ** 2))
    x = tone + noise * 10.0 ** (-snr / 20.0)
    clip = AudioClip(samples=0.1 * x, sample_rate=sr)
    track = pitch_track(clip)
    assert abs(hnr(clip, track) - snr) <= 1.5


def test_hnr_high_for_pure_tone():
    sr = 44100
    t = np.arange(sr) / sr
    clip = AudioClip(samples=0.3 * np.sin(2 * np.pi * 180.0 * t),
                     sample_rate=sr)
    track = pitch_track(clip)
    assert hnr(clip, track) > 25.0


def test_period_sequences_cover_the_truth():
    clip, truth = _voice(jitter_eps=0.01)
    track = pitch_track(clip)
    seqs = track_periods(clip, track)
    n_measured = sum(s.period_lengths.shape[0] for s in seqs)
    # most ground-truth cycles are recovered as consecutive period pairs
    assert n_measured > 0.8 * truth.periods.shape[0]
    mean_t = np.concatenate([s.period_lengths for s in seqs]).mean()
    assert abs(mean_t - truth.periods.mean()) / truth.periods.mean() < 0.01
