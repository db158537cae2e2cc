import numpy as np
import pytest

from voicemarkers.corpus import (AudioClip, frame_params, label_group,
                                 load_audio, load_manifest, save_audio)
from voicemarkers.errors import DataError

HEADER = ("participant_id,question_id,condition,audio_path,"
          "ecog,age,sex,education")


def _write_manifest(tmp_path, rows, header=HEADER):
    path = tmp_path / "manifest.csv"
    path.write_text("\n".join([header] + rows) + "\n")
    return str(path)


def test_label_group_cutoff():
    assert label_group(1.80) == "low"
    assert label_group(1.81) == "high"
    assert label_group(3.9) == "high"
    with pytest.raises(DataError):
        label_group(0.5)


def test_load_manifest_parses_and_resolves_paths(tmp_path):
    path = _write_manifest(tmp_path, [
        "P1,q_a,cognitive,audio/p1.wav,2.3,71,F,12",
        "P1,q_b,daily,audio/p1b.wav,2.3,71,F,12",
    ])
    records = load_manifest(path)
    assert len(records) == 2
    r = records[0]
    assert r.participant_id == "P1"
    assert r.sex == "female"
    assert r.audio_path.startswith(str(tmp_path))
    assert records[1].condition == "daily"


def test_load_manifest_missing_column_named(tmp_path):
    path = _write_manifest(
        tmp_path, ["P1,q_a,cognitive,a.wav,2.3,71,F"],
        header=HEADER.replace(",education", ""))
    with pytest.raises(DataError, match="education"):
        load_manifest(path)


def test_load_manifest_rejects_duplicate_response(tmp_path):
    path = _write_manifest(tmp_path, [
        "P1,q_a,cognitive,a.wav,2.3,71,F,12",
        "P1,q_a,cognitive,b.wav,2.3,71,F,12",
    ])
    with pytest.raises(DataError, match="duplicate"):
        load_manifest(path)


def test_load_manifest_rejects_bad_ecog(tmp_path):
    path = _write_manifest(tmp_path, ["P1,q_a,cognitive,a.wav,4.7,71,F,12"])
    with pytest.raises(DataError, match="ecog"):
        load_manifest(path)


def test_load_manifest_rejects_sixth_question(tmp_path):
    rows = ["P1,q_%d,cognitive,a%d.wav,2.3,71,F,12" % (i, i)
            for i in range(6)]
    path = _write_manifest(tmp_path, rows)
    with pytest.raises(DataError, match="more than 5"):
        load_manifest(path)


def test_load_manifest_collects_neuropsych_scores(tmp_path):
    header = HEADER + ",mmse,fab"
    path = _write_manifest(tmp_path, [
        "P1,q_a,cognitive,a.wav,2.3,71,F,12,27,15.5",
        "P2,q_a,cognitive,b.wav,1.2,66,M,16,,",
    ], header=header)
    records = load_manifest(path)
    assert records[0].neuropsych == {"mmse": 27.0, "fab": 15.5}
    assert records[1].neuropsych == {}


def test_audio_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    x = np.clip(0.4 * rng.standard_normal(5000), -1, 1)
    clip = AudioClip(samples=x, sample_rate=44100)
    path = str(tmp_path / "t.wav")
    save_audio(path, clip)
    back = load_audio(path)
    assert back.sample_rate == 44100
    # 16-bit quantization bound
    assert np.abs(back.samples - x).max() <= 1.0 / 32767 + 1e-9


def test_load_audio_missing_file_raises():
    with pytest.raises(DataError):
        load_audio("/nonexistent/file.wav")


def test_frame_params_25ms_10ms():
    frame_len, hop = frame_params(44100)
    assert frame_len == round(0.025 * 44100)
    assert hop == round(0.010 * 44100)
