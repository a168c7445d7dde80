"""Flat ``key = value`` configuration with dotted section keys.

Precedence is command-line flags, then the config file, then defaults.
Unknown keys and malformed values are rejected before any work starts.
"""

from __future__ import annotations

from pathlib import Path

from .evaluation import ALL_METHODS, ExperimentConfig
from .io import ValidationError
from .sampler import AnnealSchedule
from .signals import ExtractionConfig, RPeakConfig, ScrConfig, WindowSpec
from .synth import ClassParams, SyntheticSpec


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


DEFAULTS: dict[str, tuple[type | callable, object]] = {
    "seed": (int, 0),
    "window.seconds": (float, 100.0),
    "window.step_seconds": (float, 50.0),
    "filter.order": (int, 5),
    "filter.hand_eda_hz": (float, 1.0),
    "filter.foot_eda_hz": (float, 1.0),
    "filter.ecg_hz": (float, 40.0),
    "filter.resp_hz": (float, 10.0),
    "scr.onset_slope": (float, 0.01),
    "scr.max_rise_seconds": (float, 5.0),
    "scr.recovery_fraction": (float, 0.5),
    "scr.min_amplitude": (float, 0.0),
    "rpeak.integration_seconds": (float, 0.15),
    "rpeak.refractory_seconds": (float, 0.25),
    "rpeak.threshold_fraction": (float, 0.5),
    "resp.segment_seconds": (float, 50.0),
    "qubo.alpha": (float, 1.0),
    "anneal.sweeps": (int, 1000),
    "anneal.beta_start": (float, 0.1),
    "anneal.beta_end": (float, 10.0),
    "anneal.n_reads": (int, 100),
    "select.method": (str, "qa"),
    "select.k": (_opt_int, None),
    "select.sampler": (str, "annealing"),
    "select.bins": (int, 10),
    "experiment.fractions": (_floats, (1.0, 0.3, 0.2, 0.1)),
    "experiment.n_repeats": (int, 10),
    "experiment.methods": (_names, ALL_METHODS),
    "experiment.knn_k": (int, 5),
    "experiment.test_fraction": (float, 0.3),
    "experiment.bins": (int, 10),
    "experiment.baseline_k": (_opt_int, None),
    "experiment.sampler": (str, "annealing"),
    "experiment.significance_test": (str, "welch"),
    "synth.duration_seconds": (float, 7200.0),
    "synth.sampling_rate_hz": (float, 10.0),
    "synth.segments": (_names, ("low", "medium", "high")),
    "synth.noise": (float, 0.02),
    "synth.eda_noise": (float, 1e-4),
    "synth.rr_jitter": (float, 0.04),
    "synth.low.scr_per_minute": (float, 1.0),
    "synth.low.heart_rate_bpm": (float, 65.0),
    "synth.low.resp_hz": (float, 0.20),
    "synth.medium.scr_per_minute": (float, 2.0),
    "synth.medium.heart_rate_bpm": (float, 78.0),
    "synth.medium.resp_hz": (float, 0.27),
    "synth.high.scr_per_minute": (float, 3.0),
    "synth.high.heart_rate_bpm": (float, 92.0),
    "synth.high.resp_hz": (float, 0.34),
}


def parse_text(text: str, origin: str = "<config>") -> dict[str, str]:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in DEFAULTS:
            raise ValidationError(f"{origin}:{lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


def load(path=None, overrides: dict[str, str] | None = None) -> dict:
    """Resolved settings: defaults, then file values, then overrides."""
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file {path} does not exist")
        raw.update(parse_text(path.read_text(), str(path)))
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ValidationError(f"unknown config key {key!r}")
        raw[key] = value
    settings = {k: default for k, (_, default) in DEFAULTS.items()}
    for key, value in raw.items():
        conv = DEFAULTS[key][0]
        try:
            settings[key] = conv(value)
        except ValueError:
            raise ValidationError(f"invalid value {value!r} for {key}") from None
    return settings


def _checked(build, *args, **kwargs):
    try:
        return build(*args, **kwargs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def extraction_config(s: dict) -> ExtractionConfig:
    cutoffs = {
        "hand_eda": s["filter.hand_eda_hz"],
        "foot_eda": s["filter.foot_eda_hz"],
        "ecg": s["filter.ecg_hz"],
        "resp": s["filter.resp_hz"],
    }
    if min(cutoffs.values()) <= 0:
        raise ValidationError("filter cutoffs must be positive")
    if s["filter.order"] < 1:
        raise ValidationError("filter.order must be >= 1")
    return ExtractionConfig(
        window=_checked(WindowSpec, s["window.seconds"], s["window.step_seconds"]),
        cutoffs_hz=cutoffs,
        filter_order=s["filter.order"],
        scr=ScrConfig(
            s["scr.onset_slope"], s["scr.max_rise_seconds"], s["scr.recovery_fraction"], s["scr.min_amplitude"]
        ),
        rpeak=RPeakConfig(
            s["rpeak.integration_seconds"], s["rpeak.refractory_seconds"], s["rpeak.threshold_fraction"]
        ),
        resp_segment_seconds=s["resp.segment_seconds"],
    )


def anneal_schedule(s: dict) -> AnnealSchedule:
    return _checked(
        AnnealSchedule, s["anneal.sweeps"], s["anneal.beta_start"], s["anneal.beta_end"], s["anneal.n_reads"]
    )


def experiment_config(s: dict) -> ExperimentConfig:
    if s["experiment.sampler"] not in ("annealing", "exhaustive"):
        raise ValidationError("experiment.sampler must be 'annealing' or 'exhaustive'")
    return _checked(
        ExperimentConfig,
        fractions=s["experiment.fractions"],
        n_repeats=s["experiment.n_repeats"],
        methods=s["experiment.methods"],
        alpha=s["qubo.alpha"],
        schedule=anneal_schedule(s),
        knn_k=s["experiment.knn_k"],
        seed=s["seed"],
        test_fraction=s["experiment.test_fraction"],
        bins=s["experiment.bins"],
        baseline_k=s["experiment.baseline_k"],
        sampler=s["experiment.sampler"],
        significance_test=s["experiment.significance_test"],
    )


def synthetic_spec(s: dict) -> SyntheticSpec:
    names = ("low", "medium", "high")
    bad = [v for v in s["synth.segments"] if v not in names]
    if bad:
        raise ValidationError(f"synth.segments: unknown classes {bad}")
    params = tuple(
        ClassParams(
            s[f"synth.{c}.scr_per_minute"], s[f"synth.{c}.heart_rate_bpm"], s[f"synth.{c}.resp_hz"]
        )
        for c in names
    )
    return _checked(
        SyntheticSpec,
        duration_seconds=s["synth.duration_seconds"],
        sampling_rate_hz=s["synth.sampling_rate_hz"],
        segments=tuple(names.index(v) for v in s["synth.segments"]),
        class_params=params,
        rr_jitter=s["synth.rr_jitter"],
        noise=s["synth.noise"],
        eda_noise=s["synth.eda_noise"],
        seed=s["seed"],
    )
