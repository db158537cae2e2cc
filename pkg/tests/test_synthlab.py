import json
import os

import numpy as np
import pytest

from voicemarkers.corpus import load_manifest
from voicemarkers.errors import DataError
from voicemarkers.synthlab import (CorpusSpec, VoiceSpec, effect_corpus_spec,
                                   null_corpus_spec, synth_corpus,
                                   synth_voice)


def test_voice_truth_consistent():
    clip, truth = synth_voice(VoiceSpec(f0=130.0, duration=1.0, seed=1))
    assert clip.sample_rate == 44100
    assert abs(clip.duration() - 1.0) < 0.05
    assert truth.periods.shape == truth.pulse_times.shape
    assert np.allclose(truth.f0_cycles, 1.0 / truth.periods)
    # clean voice: every cycle near the nominal period
    assert np.abs(truth.f0_cycles - 130.0).max() < 5.0


def test_voice_spec_validation():
    with pytest.raises(DataError):
        synth_voice(VoiceSpec(f0=30.0))
    with pytest.raises(DataError):
        synth_voice(VoiceSpec(jitter_eps=0.5))
    with pytest.raises(DataError):
        synth_voice(VoiceSpec(law="sawtooth"))


def test_voice_deterministic_per_seed():
    a, _ = synth_voice(VoiceSpec(duration=0.5, jitter_eps=0.01, seed=7,
                                 law="random_walk"))
    b, _ = synth_voice(VoiceSpec(duration=0.5, jitter_eps=0.01, seed=7,
                                 law="random_walk"))
    c, _ = synth_voice(VoiceSpec(duration=0.5, jitter_eps=0.01, seed=8,
                                 law="random_walk"))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def _tiny_spec(seed=0, **kw):
    kw.setdefault("n_participants", 6)
    kw.setdefault("n_high", 3)
    kw.setdefault("duration", 0.5)
    kw.setdefault("group_effects", {})
    kw.setdefault("missingness", "none")
    return CorpusSpec(seed=seed, **kw)


def test_synth_corpus_layout(tmp_path):
    manifest = synth_corpus(_tiny_spec(), str(tmp_path / "c"))
    records = load_manifest(manifest)
    # 6 participants x 5 questions x 2 audio conditions
    assert len(records) == 60
    assert all(os.path.exists(r.audio_path) for r in records)
    # two participants are always issued incomplete score batteries
    with_scores = {r.participant_id for r in records if r.neuropsych}
    assert len(with_scores) == 4
    truth_dir = os.path.join(os.path.dirname(manifest), "truth")
    assert len(os.listdir(truth_dir)) == 60
    gt = json.load(open(os.path.join(os.path.dirname(manifest),
                                     "ground_truth.json")))
    assert gt["n_participants"] == 6
    assert len(gt["ecog"]) == 6
    assert len(gt["clip_truth_files"]) == 60


def test_synth_corpus_group_split():
    spec = effect_corpus_spec(n_participants=10, n_high=4, duration=0.4)
    assert spec.n_high == 4
    assert spec.group_effects["jitter_eps"]["high"] > \
        spec.group_effects["jitter_eps"]["low"]
    null = null_corpus_spec(n_participants=10, n_high=4, duration=0.4)
    assert null.group_effects == {}


def test_synth_corpus_ecog_separates_groups(tmp_path):
    manifest = synth_corpus(_tiny_spec(), str(tmp_path / "c"))
    records = load_manifest(manifest)
    by_pid = {}
    for r in records:
        by_pid[r.participant_id] = r.ecog_score
    scores = sorted(by_pid.values())
    assert len(by_pid) == 6
    # the cutoff 1.81 cleanly splits the synthetic census
    assert sum(1 for s in scores if s >= 1.81) == 3
    assert all(s <= 1.75 or s >= 1.85 for s in scores)


def test_synth_corpus_deterministic(tmp_path):
    m1 = synth_corpus(_tiny_spec(seed=5), str(tmp_path / "a"))
    m2 = synth_corpus(_tiny_spec(seed=5), str(tmp_path / "b"))
    assert open(m1).read() == open(m2).read()
    gt1 = open(os.path.join(os.path.dirname(m1), "ground_truth.json")).read()
    gt2 = open(os.path.join(os.path.dirname(m2), "ground_truth.json")).read()
    assert gt1 == gt2
    wavs1 = sorted(os.listdir(os.path.join(os.path.dirname(m1), "audio")))
    for w in wavs1[:5]:
        b1 = open(os.path.join(os.path.dirname(m1), "audio", w), "rb").read()
        b2 = open(os.path.join(os.path.dirname(m2), "audio", w), "rb").read()
        assert b1 == b2


def test_paper_missingness_counts(tmp_path):
    spec = effect_corpus_spec(seed=2, duration=0.4)
    manifest = synth_corpus(spec, str(tmp_path / "c"))
    records = load_manifest(manifest)
    n_cog = sum(1 for r in records if r.condition == "cognitive")
    n_daily = sum(1 for r in records if r.condition == "daily")
    assert (n_cog, n_daily) == (259, 263)
