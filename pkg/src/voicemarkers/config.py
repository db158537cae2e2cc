"""Analysis configuration with dotted-key overrides.

Defaults are the pinned values used throughout the pipeline; any of them can
be overridden from a JSON config file (``--config``) whose keys use the
dotted form, e.g. ``{"mfcc.n_coeffs": 12, "pitch.fmin": 60}``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import DataError


@dataclass
class VadConfig:
    # energy gate: threshold = max frame RMS in dB minus drop_db
    drop_db: float = 35.0
    min_ms: float = 100.0
    pad_ms: float = 50.0


@dataclass
class MfccConfig:
    n_coeffs: int = 12
    n_mels: int = 26
    fft_size: int | None = None  # None: next power of two >= frame length
    first_coeff: int = 0  # 0 keeps c0..c11; 1 keeps c1..c12
    preemphasis: float = 0.97


@dataclass
class SgConfig:
    window: int = 9
    polyorder: int = 2


@dataclass
class PitchConfig:
    fmin: float = 75.0
    fmax: float = 500.0
    voicing_threshold: float = 0.45


@dataclass
class FormantConfig:
    lpc_order: int = 12
    target_rate: int = 10000
    max_bandwidth: float = 400.0
    f1_range: tuple[float, float] = (90.0, 1000.0)
    f2_range: tuple[float, float] = (600.0, 3000.0)


@dataclass
class VqConfig:
    mark_window_lo: float = 0.8
    mark_window_hi: float = 1.25


@dataclass
class AnalysisConfig:
    vad: VadConfig = field(default_factory=VadConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    sg: SgConfig = field(default_factory=SgConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    formant: FormantConfig = field(default_factory=FormantConfig)
    vq: VqConfig = field(default_factory=VqConfig)

    def apply_overrides(self, overrides: dict) -> "AnalysisConfig":
        """Return a copy with dotted-key overrides applied."""
        cfg = dataclasses.replace(
            self,
            vad=dataclasses.replace(self.vad),
            mfcc=dataclasses.replace(self.mfcc),
            sg=dataclasses.replace(self.sg),
            pitch=dataclasses.replace(self.pitch),
            formant=dataclasses.replace(self.formant),
            vq=dataclasses.replace(self.vq),
        )
        for key, value in overrides.items():
            parts = key.split(".")
            if len(parts) != 2:
                raise DataError(f"config key {key!r} is not of the form section.name")
            section, name = parts
            target = getattr(cfg, section, None)
            if target is None or not hasattr(target, name):
                raise DataError(f"unknown config key {key!r}")
            setattr(target, name, value)
        return cfg

    def to_mapping(self) -> dict:
        flat = {}
        for section_field in dataclasses.fields(self):
            section = getattr(self, section_field.name)
            for f in dataclasses.fields(section):
                value = getattr(section, f.name)
                if isinstance(value, tuple):
                    value = list(value)
                flat[f"{section_field.name}.{f.name}"] = value
        return flat


def load_config_file(path: str) -> dict:
    """Read a JSON overrides file of dotted keys."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"config file {path} must contain a JSON object")
    return data
