"""Synthetic voice and corpus generation with exact ground truth.

Voices are built from a Rosenberg-style glottal pulse train. Each cycle k
starts at time t_k, has period T_k = (1/f0_k)(1 + law(k) * jitter_eps) where
f0_k follows a slow sinusoidal drift, and carries peak amplitude
A_k = 1 + law(k) * shimmer_eps. The pulse shape is fixed (parameterized by
the nominal f0, not the perturbed cycle length) so waveform peaks land
exactly at t_k + t_peak and peak-to-peak intervals equal T_k; the alternating
law then gives closed-form jitter = shimmer = 2 * eps.

Pulses are evaluated analytically at fractional sample times, so period
ground truth is not quantized to the sample grid.
"""

import json
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.signal import lfilter

from .corpus import (AudioClip, COGNITIVE_QUESTIONS, DAILY_QUESTIONS,
                     NEUROPSYCH_TESTS, save_audio)
from .errors import DataError

DRIFT_RATE_HZ = 2.0
DEFAULT_FORMANTS = ((500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0))


@dataclass
class VoiceSpec:
    f0: float = 130.0
    duration: float = 3.0
    jitter_eps: float = 0.0
    shimmer_eps: float = 0.0
    snr_db: float = 30.0
    formant_poles: tuple = DEFAULT_FORMANTS
    f0_drift: float = 0.0
    seed: int = 0
    law: str = "alternating"  # or "random_walk"
    sample_rate: int = 44100

    def validate(self):
        if not (75.0 <= self.f0 <= 500.0):
            raise DataError("f0 outside [75, 500]: %r" % (self.f0,))
        if self.duration <= 0:
            raise DataError("duration must be positive")
        for name, eps in (("jitter_eps", self.jitter_eps),
                          ("shimmer_eps", self.shimmer_eps)):
            if not (0.0 <= eps <= 0.1):
                raise DataError("%s outside [0, 0.1]: %r" % (name, eps))
        if self.law not in ("alternating", "random_walk"):
            raise DataError("unknown perturbation law: %r" % (self.law,))


@dataclass
class VoiceTruth:
    pulse_times: np.ndarray   # cycle start times t_k (s)
    periods: np.ndarray       # T_k (s)
    amplitudes: np.ndarray    # A_k
    f0_cycles: np.ndarray     # 1 / T_k (Hz)
    spec: VoiceSpec

    def to_json_dict(self):
        d = asdict(self.spec)
        d["formant_poles"] = [list(p) for p in self.spec.formant_poles]
        return {
            "pulse_times": [float(v) for v in self.pulse_times],
            "periods": [float(v) for v in self.periods],
            "amplitudes": [float(v) for v in self.amplitudes],
            "f0_cycles": [float(v) for v in self.f0_cycles],
            "spec": d,
        }


def _law_values(spec: VoiceSpec, n: int, rng) -> np.ndarray:
    if spec.law == "alternating":
        law = np.ones(n)
        law[1::2] = -1.0
        return law
    steps = rng.standard_normal(n) * 0.5
    return np.clip(np.cumsum(steps), -2.0, 2.0)


def synth_voice(spec: VoiceSpec):
    """Synthesize one voice; returns (AudioClip, VoiceTruth)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    sr = spec.sample_rate

    # fixed pulse shape: rise t_p, fall t_n, well inside the shortest period
    t_p = 0.32 / spec.f0
    t_n = 0.13 / spec.f0

    # upper bound on cycle count, then walk the cycles
    max_cycles = int(spec.duration * (spec.f0 + abs(spec.f0_drift)) * 1.2) + 4
    law = _law_values(spec, max_cycles, rng)

    times = []
    periods = []
    t = 0.25 / spec.f0
    k = 0
    end = spec.duration - (t_p + t_n) - 1.0 / sr
    while t < end and k < max_cycles:
        f0_k = spec.f0 + spec.f0_drift * math.sin(2.0 * math.pi * DRIFT_RATE_HZ * t)
        t_k = (1.0 / f0_k) * (1.0 + law[k] * spec.jitter_eps)
        times.append(t)
        periods.append(t_k)
        t += t_k
        k += 1
    times = np.asarray(times)
    periods = np.asarray(periods)
    amps = 1.0 + law[:len(times)] * spec.shimmer_eps

    n = int(round(spec.duration * sr))
    x = np.zeros(n)
    for t_k, a_k in zip(times, amps):
        n0 = int(math.ceil(t_k * sr))
        n1 = min(n - 1, int(math.floor((t_k + t_p + t_n) * sr)))
        if n1 < n0:
            continue
        tau = np.arange(n0, n1 + 1) / sr - t_k
        seg = np.where(
            tau <= t_p,
            0.5 * (1.0 - np.cos(np.pi * tau / t_p)),
            np.cos(0.5 * np.pi * (tau - t_p) / t_n),
        )
        x[n0:n1 + 1] += a_k * seg

    # radiation characteristic (+6 dB/oct): differentiate the flow so the
    # spectral balance matches recorded speech; without it LPC formant
    # estimation fights a large low-frequency source hump
    x[1:] = x[1:] - x[:-1]

    for freq, bw in spec.formant_poles:
        r = math.exp(-math.pi * bw / sr)
        theta = 2.0 * math.pi * freq / sr
        x = lfilter([1.0], [1.0, -2.0 * r * math.cos(theta), r * r], x)

    peak = np.abs(x).max()
    if peak > 0:
        x = x * (0.5 / peak)

    p_clean = float(np.mean(x * x))
    noise_std = math.sqrt(p_clean / (10.0 ** (spec.snr_db / 10.0)))
    x = x + rng.standard_normal(n) * noise_std

    truth = VoiceTruth(pulse_times=times, periods=periods, amplitudes=amps,
                       f0_cycles=1.0 / periods, spec=spec)
    return AudioClip(samples=x, sample_rate=sr), truth


@dataclass
class CorpusSpec:
    """Recipe for a labeled synthetic corpus.

    group_effects maps a VoiceSpec parameter name to
    {"low": mean, "high": mean, "sd": between-participant sd}; parameters
    not listed stay at their baseline for both groups.
    """
    n_participants: int = 54
    n_high: int = 32
    duration: float = 3.0
    sample_rate: int = 44100
    group_effects: dict = field(default_factory=dict)
    missingness: str = "none"   # "none" | "paper" | "rate:<float>"
    with_neuropsych: bool = True
    seed: int = 0

    def validate(self):
        if self.n_participants < 2:
            raise DataError("need at least 2 participants")
        if not (0 < self.n_high < self.n_participants):
            raise DataError("n_high must split the participants")


_BASELINES = {
    "f0": (118.0, 8.0, 100.0, 145.0),
    "jitter_eps": (0.010, 0.003, 0.0, 0.05),
    "shimmer_eps": (0.020, 0.006, 0.0, 0.08),
    "snr_db": (18.0, 3.0, 3.0, 45.0),
    "f0_drift": (2.5, 0.8, 0.0, 12.0),
}

# §-pattern of absent responses: 11 cognitive + 7 daily across 10 participants
_PAPER_MISSING = (
    ("phonemic_fluency",),
    ("phonemic_fluency",),
    ("counting_backward",),
    ("serial_subtraction",),
    ("picture_description",),
    ("dinner_menu",),
    ("risk_planning",),
    ("general_knowledge", "risk_planning"),
    ("semantic_fluency", "phonemic_fluency", "picture_description"),
    ("counting_backward", "serial_subtraction", "phonemic_fluency",
     "childhood_activity", "dinner_menu", "general_knowledge"),
)


def effect_corpus_spec(seed: int = 0, n_participants: int = 54,
                       n_high: int = 32, duration: float = 3.0) -> CorpusSpec:
    """Corpus with strong (>= 1 SD) acoustic separation between groups."""
    return CorpusSpec(
        n_participants=n_participants, n_high=n_high, duration=duration,
        group_effects={
            "jitter_eps": {"low": 0.008, "high": 0.022, "sd": 0.003},
            "snr_db": {"low": 22.0, "high": 12.0, "sd": 2.5},
            "f0_drift": {"low": 1.5, "high": 4.5, "sd": 0.8},
        },
        missingness="paper", seed=seed)


def null_corpus_spec(seed: int = 0, n_participants: int = 54,
                     n_high: int = 32, duration: float = 3.0) -> CorpusSpec:
    """Corpus whose acoustics are independent of the group label."""
    return CorpusSpec(n_participants=n_participants, n_high=n_high,
                      duration=duration, group_effects={},
                      missingness="none", seed=seed)


def _participant_params(cspec: CorpusSpec, is_high, rng):
    n = cspec.n_participants
    params = {}
    for name, (mean, sd, lo, hi) in _BASELINES.items():
        eff = cspec.group_effects.get(name)
        if eff is None:
            vals = rng.normal(mean, sd, size=n)
        else:
            centers = np.where(is_high, eff["high"], eff["low"])
            vals = rng.normal(centers, eff["sd"])
        params[name] = np.clip(vals, lo, hi)
    return params


def _missing_map(cspec: CorpusSpec, rng):
    """Set of (participant_index, question_id) to omit."""
    omit = set()
    if cspec.missingness == "none":
        return omit
    if cspec.missingness == "paper":
        if cspec.n_participants < len(_PAPER_MISSING):
            raise DataError("paper missingness needs >= 10 participants")
        chosen = np.sort(rng.choice(cspec.n_participants,
                                    size=len(_PAPER_MISSING), replace=False))
        for pi, questions in zip(chosen, _PAPER_MISSING):
            for q in questions:
                omit.add((int(pi), q))
        return omit
    if cspec.missingness.startswith("rate:"):
        rate = float(cspec.missingness.split(":", 1)[1])
        for pi in range(cspec.n_participants):
            for q in COGNITIVE_QUESTIONS + DAILY_QUESTIONS:
                if rng.random() < rate:
                    omit.add((pi, q))
        return omit
    raise DataError("unknown missingness mode: %r" % (cspec.missingness,))


def _neuropsych_scores(ecog, rng):
    """Plausible test scores loosely tracking ECog (higher ECog = worse)."""
    z = (ecog - 1.0) / 3.0
    return {
        "mmse": float(np.clip(29.0 - 6.0 * z + rng.normal(0, 1.2), 0, 30)),
        "fab": float(np.clip(17.0 - 5.0 * z + rng.normal(0, 1.0), 0, 18)),
        "cdt": float(np.clip(9.5 - 3.0 * z + rng.normal(0, 0.8), 0, 10)),
        "lm1": float(np.clip(14.0 - 7.0 * z + rng.normal(0, 2.0), 0, 25)),
        "lm2": float(np.clip(12.0 - 8.0 * z + rng.normal(0, 2.0), 0, 25)),
        "tmta": float(np.clip(35.0 + 60.0 * z + rng.normal(0, 8.0), 15, 240)),
        "tmtb": float(np.clip(90.0 + 120.0 * z + rng.normal(0, 20.0), 30, 300)),
    }


def synth_corpus(cspec: CorpusSpec, out_dir: str) -> str:
    """Generate WAVs, per-clip truth sidecars, a corpus truth file, and a
    manifest under out_dir; returns the manifest path."""
    cspec.validate()
    rng = np.random.default_rng(cspec.seed)
    os.makedirs(os.path.join(out_dir, "audio"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "truth"), exist_ok=True)

    n = cspec.n_participants
    is_high = np.zeros(n, dtype=bool)
    is_high[rng.choice(n, size=cspec.n_high, replace=False)] = True

    ecog = np.where(is_high,
                    rng.uniform(1.85, 3.95, size=n),
                    rng.uniform(1.00, 1.75, size=n))
    age = np.clip(rng.normal(76.1, 6.0, size=n), 55.0, 95.0)
    education = np.clip(np.round(rng.normal(13.2, 2.7, size=n)), 6.0, 20.0)
    sex = np.where(rng.random(n) < 0.463, "F", "M")
    params = _participant_params(cspec, is_high, rng)
    omit = _missing_map(cspec, rng)

    neuro = {}
    if cspec.with_neuropsych:
        skip_np = set(int(i) for i in rng.choice(n, size=min(2, n), replace=False))
        for pi in range(n):
            neuro[pi] = {} if pi in skip_np else _neuropsych_scores(ecog[pi], rng)

    questions = COGNITIVE_QUESTIONS + DAILY_QUESTIONS
    header = list("participant_id,question_id,condition,audio_path,ecog,age,sex,education".split(","))
    if cspec.with_neuropsych:
        header += list(NEUROPSYCH_TESTS)

    rows = []
    truth_index = {}
    for pi in range(n):
        pid = "P%03d" % (pi + 1)
        for qi, q in enumerate(questions):
            if (pi, q) in omit:
                continue
            cond = "cognitive" if q in COGNITIVE_QUESTIONS else "daily"
            clip_seed = int(np.random.SeedSequence(
                entropy=(cspec.seed, pi, qi)).generate_state(1)[0])
            vspec = VoiceSpec(
                f0=float(params["f0"][pi]),
                duration=cspec.duration,
                jitter_eps=float(params["jitter_eps"][pi]),
                shimmer_eps=float(params["shimmer_eps"][pi]),
                snr_db=float(params["snr_db"][pi]),
                f0_drift=float(params["f0_drift"][pi]),
                seed=clip_seed,
                sample_rate=cspec.sample_rate,
            )
            clip, truth = synth_voice(vspec)
            rel_wav = os.path.join("audio", "%s_%s.wav" % (pid, q))
            save_audio(os.path.join(out_dir, rel_wav), clip)
            sidecar = os.path.join("truth", "%s_%s.json" % (pid, q))
            with open(os.path.join(out_dir, sidecar), "w") as fh:
                json.dump(truth.to_json_dict(), fh, sort_keys=True)
            truth_index["%s/%s" % (pid, q)] = sidecar

            row = [pid, q, cond, rel_wav, repr(float(ecog[pi])),
                   repr(float(age[pi])), str(sex[pi]), repr(float(education[pi]))]
            if cspec.with_neuropsych:
                scores = neuro.get(pi, {})
                row += [repr(scores[c]) if c in scores else ""
                        for c in NEUROPSYCH_TESTS]
            rows.append(row)

    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")

    corpus_truth = {
        "seed": cspec.seed,
        "n_participants": n,
        "n_high": int(is_high.sum()),
        "group_effects": cspec.group_effects,
        "labels": {"P%03d" % (i + 1): ("high" if is_high[i] else "low")
                   for i in range(n)},
        "ecog": {"P%03d" % (i + 1): float(ecog[i]) for i in range(n)},
        "voice_params": {name: {"P%03d" % (i + 1): float(vals[i])
                                for i in range(n)}
                         for name, vals in params.items()},
        "clip_truth_files": truth_index,
    }
    with open(os.path.join(out_dir, "ground_truth.json"), "w") as fh:
        json.dump(corpus_truth, fh, sort_keys=True, indent=1)
    return manifest_path
