"""Per-response feature vectors (42 acoustic + 3 demographic) and datasets."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .config import AnalysisConfig
from .corpus import (NEUROPSYCH_TESTS, ResponseRecord, label_group,
                     load_audio, remove_silence)
from .dsp import formants, mfcc, pitch_track, sg_derivative
from .errors import DataError, UsageError
from .voicequality import hnr, jitter, shimmer, track_periods

MFCC_VAR_NAMES = tuple("mfcc_var_%d" % i for i in range(12))
DMFCC_VAR_NAMES = tuple("dmfcc_var_%d" % i for i in range(12))
DDMFCC_VAR_NAMES = tuple("ddmfcc_var_%d" % i for i in range(12))
SUMMARY_NAMES = ("pitch_variation", "f1_mean", "f2_mean",
                 "jitter", "shimmer", "hnr")
ACOUSTIC_NAMES = MFCC_VAR_NAMES + DMFCC_VAR_NAMES + DDMFCC_VAR_NAMES + SUMMARY_NAMES
DEMOGRAPHIC_NAMES = ("age", "sex", "education")
ALL_FEATURE_NAMES = ACOUSTIC_NAMES + DEMOGRAPHIC_NAMES  # 45, fixed order

NEUROPSYCH_FEATURE_NAMES = NEUROPSYCH_TESTS + DEMOGRAPHIC_NAMES  # 10


@dataclass
class FeatureVector:
    participant_id: str
    question_id: str
    condition: str
    group: str
    ecog_score: float
    values: dict  # name -> float, nan marks missing

    def as_array(self, names=ALL_FEATURE_NAMES) -> np.ndarray:
        return np.array([self.values.get(n, math.nan) for n in names])


@dataclass
class Dataset:
    X: np.ndarray             # (n_rows, n_features), nan = missing
    y: np.ndarray             # 1 = high (positive class), 0 = low
    feature_names: tuple
    participant_ids: list     # per row
    row_keys: list            # (participant_id, question_id or "") per row
    condition: str
    positive_class: str = "high"
    n_excluded: int = 0
    ecog: np.ndarray = None   # per row, for the stats battery


def encode_sex(sex: str) -> float:
    return 1.0 if sex == "female" else 0.0


def extract_features(record: ResponseRecord,
                     config: AnalysisConfig = None) -> FeatureVector:
    """All 45 variables for one response.

    Raises DataError when the clip is unloadable or fully silent (the caller
    skips and logs the record); individual failed sub-features are nan.
    """
    if config is None:
        config = AnalysisConfig()
    clip = load_audio(record.audio_path)
    clip = remove_silence(clip, config.vad)

    vals = {}
    base = mfcc(clip, config=config.mfcc)
    d1 = sg_derivative(base, 1, config=config.sg)
    d2 = sg_derivative(base, 2, config=config.sg)
    for names, series in ((MFCC_VAR_NAMES, base), (DMFCC_VAR_NAMES, d1),
                          (DDMFCC_VAR_NAMES, d2)):
        var = np.var(series.values, axis=0)  # population variance over frames
        for i, name in enumerate(names):
            vals[name] = float(var[i])

    track = pitch_track(clip, config=config.pitch, vad=config.vad)
    voiced = track.voiced_f0()
    vals["pitch_variation"] = float(np.std(voiced)) if voiced.size else math.nan
    f1, f2 = formants(clip, track, config=config.formant)
    vals["f1_mean"] = f1
    vals["f2_mean"] = f2
    seqs = track_periods(clip, track, config=config.vq)
    vals["jitter"] = jitter(seqs)
    vals["shimmer"] = shimmer(seqs)
    vals["hnr"] = hnr(clip, track)

    vals["age"] = float(record.age)
    vals["sex"] = encode_sex(record.sex)
    vals["education"] = float(record.education)

    return FeatureVector(
        participant_id=record.participant_id,
        question_id=record.question_id,
        condition=record.condition,
        group=label_group(record.ecog_score),
        ecog_score=record.ecog_score,
        values=vals,
    )


def build_dataset(records: list, condition: str, vectors: list = None,
                  config: AnalysisConfig = None) -> Dataset:
    """Dataset matrix for one evaluation condition.

    cognitive/daily: one row per response of that condition (vectors may be
    passed to reuse already-extracted features; otherwise extraction runs
    here and unreadable/silent clips are skipped and counted).
    neuropsych: one row per participant from the 7 test scores + 3
    demographics; participants missing any score are excluded and counted.
    """
    if condition == "neuropsych":
        return _neuropsych_dataset(records)
    if condition not in ("cognitive", "daily"):
        raise UsageError("condition must be cognitive/daily/neuropsych, got %r"
                         % (condition,))

    wanted = [r for r in records if r.condition == condition]
    if vectors is None:
        vectors = []
        skipped = 0
        for rec in wanted:
            try:
                vectors.append(extract_features(rec, config=config))
            except DataError:
                skipped += 1
    else:
        have = {(v.participant_id, v.question_id): v for v in vectors}
        keys = [(r.participant_id, r.question_id) for r in wanted]
        vectors = [have[k] for k in keys if k in have]
        skipped = len(keys) - len(vectors)

    if not vectors:
        raise DataError("no usable rows for condition %r" % (condition,))
    X = np.stack([v.as_array() for v in vectors])
    y = np.array([1 if v.group == "high" else 0 for v in vectors], dtype=np.int64)
    return Dataset(
        X=X, y=y, feature_names=ALL_FEATURE_NAMES,
        participant_ids=[v.participant_id for v in vectors],
        row_keys=[(v.participant_id, v.question_id) for v in vectors],
        condition=condition, n_excluded=skipped,
        ecog=np.array([v.ecog_score for v in vectors]),
    )


def _neuropsych_dataset(records: list) -> Dataset:
    per_participant = {}
    for r in records:
        per_participant.setdefault(r.participant_id, r)
    rows, pids, ecog = [], [], []
    skipped = 0
    for pid in per_participant:
        r = per_participant[pid]
        if any(t not in r.neuropsych for t in NEUROPSYCH_TESTS):
            skipped += 1
            continue
        row = [float(r.neuropsych[t]) for t in NEUROPSYCH_TESTS]
        row += [float(r.age), encode_sex(r.sex), float(r.education)]
        rows.append(row)
        pids.append(pid)
        ecog.append(r.ecog_score)
    if not rows:
        raise DataError("no participants with complete neuropsych scores")
    X = np.array(rows)
    y = np.array([1 if label_group(e) == "high" else 0 for e in ecog],
                 dtype=np.int64)
    return Dataset(X=X, y=y, feature_names=NEUROPSYCH_FEATURE_NAMES,
                   participant_ids=pids, row_keys=[(p, "") for p in pids],
                   condition="neuropsych", n_excluded=skipped,
                   ecog=np.array(ecog))


_META_COLUMNS = ("participant_id", "question_id", "condition", "group", "ecog")


def save_features_csv(vectors: list, path: str) -> None:
    """One row per response; missing values are empty cells."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(_META_COLUMNS) + list(ALL_FEATURE_NAMES))
        for v in vectors:
            row = [v.participant_id, v.question_id, v.condition, v.group,
                   repr(float(v.ecog_score))]
            for name in ALL_FEATURE_NAMES:
                x = v.values.get(name, math.nan)
                row.append("" if (x is None or math.isnan(x)) else repr(float(x)))
            w.writerow(row)


def load_features_csv(path: str) -> list:
    vectors = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("empty features file: %s" % path)
        missing = [c for c in _META_COLUMNS + ALL_FEATURE_NAMES
                   if c not in reader.fieldnames]
        if missing:
            raise DataError("features file missing columns: %s"
                            % ", ".join(missing))
        for row_num, row in enumerate(reader, start=2):
            vals = {}
            for name in ALL_FEATURE_NAMES:
                cell = (row.get(name) or "").strip()
                if cell:
                    try:
                        vals[name] = float(cell)
                    except ValueError:
                        raise DataError("row %d: %s is not a number: %r"
                                        % (row_num, name, cell))
                else:
                    vals[name] = math.nan
            vectors.append(FeatureVector(
                participant_id=row["participant_id"],
                question_id=row["question_id"],
                condition=row["condition"],
                group=row["group"],
                ecog_score=float(row["ecog"]),
                values=vals,
            ))
    if not vectors:
        raise DataError("no rows in features file: %s" % path)
    return vectors
