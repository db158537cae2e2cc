"""Manifest parsing, WAV ingestion, silence elimination, label derivation."""

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.io import wavfile

from .config import VadConfig
from .errors import DataError

ECOG_CUTOFF = 1.81

COGNITIVE_QUESTIONS = (
    "counting_backward",
    "serial_subtraction",
    "phonemic_fluency",
    "semantic_fluency",
    "picture_description",
)
DAILY_QUESTIONS = (
    "childhood_activity",
    "dinner_menu",
    "risk_planning",
    "travel_planning",
    "general_knowledge",
)
CONDITIONS = ("cognitive", "daily")

NEUROPSYCH_TESTS = ("mmse", "fab", "cdt", "lm1", "lm2", "tmta", "tmtb")

_MANIFEST_COLUMNS = ("participant_id", "question_id", "condition",
                     "audio_path", "ecog", "age", "sex", "education")


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def duration(self) -> float:
        return self.samples.shape[0] / self.sample_rate


@dataclass
class ResponseRecord:
    participant_id: str
    question_id: str
    condition: str
    audio_path: str
    ecog_score: float
    age: float
    sex: str  # "female" | "male"
    education: float
    neuropsych: dict = field(default_factory=dict)


def label_group(ecog_score: float, cutoff: float = ECOG_CUTOFF) -> str:
    """Binary group from an ECog score: "high" iff score >= cutoff."""
    if not (1.0 <= ecog_score <= 4.0):
        raise DataError("ecog_score out of range: %r" % (ecog_score,))
    return "high" if ecog_score >= cutoff else "low"


def _parse_float(raw, row_num, name, lo=None, hi=None):
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise DataError("row %d: %s is not a number: %r" % (row_num, name, raw))
    if not np.isfinite(v):
        raise DataError("row %d: %s is not finite" % (row_num, name))
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise DataError("row %d: %s out of range: %r" % (row_num, name, raw))
    return v


def load_manifest(path: str) -> list:
    """Parse a manifest CSV into validated ResponseRecords, in file order.

    Audio paths are resolved relative to the manifest's directory.
    """
    if not os.path.exists(path):
        raise DataError("manifest not found: %s" % path)
    base = os.path.dirname(os.path.abspath(path))

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("no records in manifest: %s" % path)
        names = [n.strip() for n in reader.fieldnames]
        missing = [c for c in _MANIFEST_COLUMNS if c not in names]
        if missing:
            raise DataError("manifest missing columns: %s" % ", ".join(missing))
        has_np = [c for c in NEUROPSYCH_TESTS if c in names]

        records = []
        seen = set()
        condition_of = {}
        for row_num, row in enumerate(reader, start=2):
            pid = (row.get("participant_id") or "").strip()
            qid = (row.get("question_id") or "").strip()
            cond = (row.get("condition") or "").strip()
            apath = (row.get("audio_path") or "").strip()
            if not pid:
                raise DataError("row %d: participant_id empty" % row_num)
            if not qid:
                raise DataError("row %d: question_id empty" % row_num)
            if cond not in CONDITIONS:
                raise DataError("row %d: condition must be one of %s, got %r"
                                % (row_num, "/".join(CONDITIONS), cond))
            if not apath:
                raise DataError("row %d: audio_path empty" % row_num)
            if (pid, qid) in seen:
                raise DataError("row %d: duplicate (participant_id, question_id)"
                                " = (%s, %s)" % (row_num, pid, qid))
            seen.add((pid, qid))
            if qid in condition_of and condition_of[qid] != cond:
                raise DataError("row %d: question_id %s appears under two"
                                " conditions" % (row_num, qid))
            condition_of[qid] = cond
            if sum(1 for q in condition_of if condition_of[q] == cond) > 5:
                raise DataError("row %d: more than 5 distinct question_ids for"
                                " condition %s" % (row_num, cond))

            ecog = _parse_float(row.get("ecog"), row_num, "ecog_score", 1.0, 4.0)
            age = _parse_float(row.get("age"), row_num, "age")
            if age <= 0:
                raise DataError("row %d: age out of range: %r" % (row_num, age))
            sex_raw = (row.get("sex") or "").strip().upper()
            if sex_raw not in ("F", "M"):
                raise DataError("row %d: sex must be F or M, got %r"
                                % (row_num, row.get("sex")))
            sex = "female" if sex_raw == "F" else "male"
            education = _parse_float(row.get("education"), row_num, "education")
            if education < 0:
                raise DataError("row %d: education out of range: %r"
                                % (row_num, education))

            neuro = {}
            for c in has_np:
                cell = (row.get(c) or "").strip()
                if cell:
                    neuro[c] = _parse_float(cell, row_num, c)

            records.append(ResponseRecord(
                participant_id=pid,
                question_id=qid,
                condition=cond,
                audio_path=os.path.join(base, apath) if not os.path.isabs(apath) else apath,
                ecog_score=ecog,
                age=age,
                sex=sex,
                education=education,
                neuropsych=neuro,
            ))

    if not records:
        raise DataError("no records in manifest: %s" % path)
    return records


def load_audio(path: str) -> AudioClip:
    """Read a WAV file as mono float64 in [-1, 1]."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise DataError("audio file not found: %s" % path)
    except ValueError as exc:
        raise DataError("cannot read %s: %s" % (path, exc))

    if data.size == 0:
        raise DataError("zero-length audio: %s" % path)
    x = np.asarray(data)
    if x.ndim == 2:
        x = x.mean(axis=1)
    if data.dtype == np.int16:
        x = x / 32768.0
    elif data.dtype == np.int32:
        x = x / 2147483648.0
    elif data.dtype == np.uint8:
        x = (x - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        x = x.astype(np.float64)
    else:
        raise DataError("unsupported WAV sample format %s: %s" % (data.dtype, path))
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite samples in %s" % path)
    return AudioClip(samples=np.ascontiguousarray(x, dtype=np.float64),
                     sample_rate=int(rate))


def save_audio(path: str, clip: AudioClip) -> None:
    """Write a clip as 16-bit PCM WAV (values clipped to [-1, 1])."""
    x = np.clip(clip.samples, -1.0, 32767.0 / 32768.0)
    pcm = np.round(x * 32768.0).astype(np.int16)
    wavfile.write(path, int(clip.sample_rate), pcm)


def frame_params(sample_rate: int) -> tuple:
    """(frame_len, hop) in samples for the 25 ms / 10 ms analysis grid."""
    return int(0.025 * sample_rate), int(0.010 * sample_rate)


def remove_silence(clip: AudioClip, config: VadConfig = None) -> AudioClip:
    """Energy-gate VAD: keep samples covered by frames whose RMS is within
    ``drop_db`` of the loudest frame, in runs spanning at least ``min_ms``,
    padded by ``pad_ms`` per side."""
    if config is None:
        config = VadConfig()
    x = clip.samples
    sr = clip.sample_rate
    frame_len, hop = frame_params(sr)

    n = x.shape[0]
    if n < frame_len:
        starts = np.array([0])
        frame_len = n
    else:
        n_frames = (n - frame_len) // hop + 1
        starts = np.arange(n_frames) * hop

    sq = x * x
    csq = np.concatenate([[0.0], np.cumsum(sq)])
    energy = csq[starts + frame_len] - csq[starts]
    rms = np.sqrt(np.maximum(energy / frame_len, 0.0))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(rms)
    threshold = db.max() - config.drop_db

    keep = db > threshold
    if not keep.any():
        raise DataError("no voiced content")

    # runs of consecutive kept frames, filtered by minimum span
    min_len = config.min_ms / 1000.0 * sr
    pad = int(round(config.pad_ms / 1000.0 * sr))
    edges = np.flatnonzero(np.diff(np.concatenate([[0], keep.view(np.int8), [0]])))
    intervals = []
    for a, b in zip(edges[::2], edges[1::2]):  # frames [a, b) kept
        s = int(starts[a])
        e = int(starts[b - 1]) + frame_len
        if b == starts.shape[0]:
            e = n  # final frame kept: carry the tail beyond the frame grid
        if e - s < min_len:
            continue
        intervals.append((max(0, s - pad), min(n, e + pad)))
    if not intervals:
        raise DataError("no voiced content")

    merged = [intervals[0]]
    for s, e in intervals[1:]:
        if s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(e, merged[-1][1]))
        else:
            merged.append((s, e))
    out = np.concatenate([x[s:e] for s, e in merged])
    return AudioClip(samples=out, sample_rate=sr)
