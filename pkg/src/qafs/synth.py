"""Synthetic data for tests and demos.

``synth_record`` produces class-dependent physiological channels. Stress
raises the SCR rate, the heart rate and the breathing frequency.
``planted_matrix`` produces a 39-column feature matrix whose label is driven
by a handful of independent latent factors, each measured by one column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._random import PortableRandom, derive_seed
from .signals import FEATURE_NAMES, FEATURE_SOURCES, FeatureMatrix, SignalRecord


@dataclass(frozen=True)
class ClassParams:
    scr_per_minute: float
    heart_rate_bpm: float
    resp_hz: float


DEFAULT_CLASS_PARAMS = (
    ClassParams(scr_per_minute=1.0, heart_rate_bpm=65.0, resp_hz=0.20),
    ClassParams(scr_per_minute=2.0, heart_rate_bpm=78.0, resp_hz=0.27),
    ClassParams(scr_per_minute=3.0, heart_rate_bpm=92.0, resp_hz=0.34),
)


@dataclass(frozen=True)
class SyntheticSpec:
    duration_seconds: float = 7200.0
    sampling_rate_hz: float = 10.0
    # classes of the consecutive equal-length segments
    segments: tuple[int, ...] = (0, 1, 2)
    class_params: tuple[ClassParams, ...] = field(default=DEFAULT_CLASS_PARAMS)
    rr_jitter: float = 0.04
    noise: float = 0.02
    # skin conductance is smooth; the SCR onset slope test is noise-sensitive
    eda_noise: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.sampling_rate_hz <= 0 or self.duration_seconds <= 0:
            raise ValueError("duration and sampling rate must be positive")
        if not self.segments or any(s not in (0, 1, 2) for s in self.segments):
            raise ValueError("segments must be a non-empty sequence of classes 0..2")
        for p in self.class_params:
            if min(p.scr_per_minute, p.heart_rate_bpm, p.resp_hz) <= 0:
                raise ValueError("class parameters must be positive")


def _segment_labels(spec: SyntheticSpec, n: int) -> np.ndarray:
    bounds = np.linspace(0, n, len(spec.segments) + 1).round().astype(np.int64)
    labels = np.empty(n, dtype=np.int64)
    for k, c in enumerate(spec.segments):
        labels[bounds[k] : bounds[k + 1]] = c
    return labels


def _event_times(rng: PortableRandom, rates_hz: np.ndarray, fs: float) -> list[float]:
    """Poisson events with a piecewise-constant rate given per sample."""
    times, t, end = [], 0.0, rates_hz.size / fs
    while True:
        # thinning against the maximum rate
        t += rng.exponential(1.0 / rates_hz.max())
        if t >= end:
            return times
        if rng.random() < rates_hz[min(int(t * fs), rates_hz.size - 1)] / rates_hz.max():
            times.append(t)


def _eda(rng: PortableRandom, scr_rate: np.ndarray, fs: float, noise: float) -> np.ndarray:
    n = scr_rate.size
    t = np.arange(n) / fs
    x = 2.0 + 0.2 * np.sin(2 * np.pi * t / 600.0)
    tau_rise, tau_decay = 0.75, 2.0
    for onset in _event_times(rng, scr_rate, fs):
        amp = 0.2 + 0.4 * rng.random()
        i0 = int(np.ceil(onset * fs))
        i1 = min(n, i0 + int(12 * tau_decay * fs))
        s = t[i0:i1] - onset
        shape = np.exp(-s / tau_decay) - np.exp(-s / tau_rise)
        x[i0:i1] += amp * shape / 0.31
    return x + rng.normal(0.0, noise, n)


def synth_record(spec: SyntheticSpec = SyntheticSpec()) -> SignalRecord:
    fs = spec.sampling_rate_hz
    n = int(round(spec.duration_seconds * fs))
    labels = _segment_labels(spec, n)
    params = [spec.class_params[c] for c in labels]
    scr_rate = np.array([p.scr_per_minute / 60.0 for p in params])
    hr = np.array([p.heart_rate_bpm for p in params])
    resp_f = np.array([p.resp_hz for p in params])
    t = np.arange(n) / fs

    rng = PortableRandom(derive_seed(spec.seed, "ecg"))
    ecg = np.zeros(n)
    sigma = max(0.015, 0.4 / fs)
    beat = rng.random() * 60.0 / hr[0]
    while beat < t[-1]:
        i = int(round(beat * fs))
        lo, hi = max(0, i - int(4 * sigma * fs) - 1), min(n, i + int(4 * sigma * fs) + 2)
        ecg[lo:hi] += np.exp(-0.5 * ((t[lo:hi] - beat) / sigma) ** 2)
        rr = 60.0 / hr[min(i, n - 1)] * (1.0 + spec.rr_jitter * rng.normal())
        beat += max(rr, 0.3)
    ecg += rng.normal(0.0, spec.noise, n)

    hand = _eda(PortableRandom(derive_seed(spec.seed, "hand_eda")), scr_rate, fs, spec.eda_noise)
    foot = _eda(PortableRandom(derive_seed(spec.seed, "foot_eda")), scr_rate, fs, spec.eda_noise)

    rng = PortableRandom(derive_seed(spec.seed, "resp"))
    phase = 2 * np.pi * np.cumsum(resp_f) / fs
    resp = np.sin(phase + 2 * np.pi * rng.random()) + rng.normal(0.0, 5 * spec.noise, n)

    return SignalRecord({"ecg": ecg, "hand_eda": hand, "foot_eda": foot, "resp": resp}, fs, labels)


def planted_matrix(
    n_rows: int = 300,
    informative=(2, 14, 25, 35),
    measurement_noise: float = 0.5,
    seed: int = 0,
) -> FeatureMatrix:
    """Feature matrix with planted complementary informative columns.

    A latent stress score is the sum of one independent standard-normal
    factor per informative column; labels are its tertiles. Each informative
    column observes its own factor plus noise, so those columns are relevant
    to the label but not to each other. All other columns are pure noise.
    """
    informative = list(informative)
    rng = PortableRandom(derive_seed(seed, "planted"))
    n_feat = len(FEATURE_NAMES)
    X = rng.normal(size=n_rows * n_feat).reshape(n_rows, n_feat)
    Z = rng.normal(size=n_rows * len(informative)).reshape(n_rows, len(informative))
    score = Z.sum(axis=1)
    cuts = np.quantile(score, [1 / 3, 2 / 3])
    labels = np.searchsorted(cuts, score, side="right")
    X[:, informative] = Z + measurement_noise * X[:, informative]
    return FeatureMatrix(X, labels, FEATURE_NAMES, FEATURE_SOURCES)
