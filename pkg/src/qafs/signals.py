"""Physiological signal preprocessing and windowed feature extraction.

Channels are z-scored over the whole record, low-pass filtered, cut into
overlapping windows, and each window is reduced to 39 features:

    ======  =====  ==========================================
    source  count  features
    ======  =====  ==========================================
    H-EDA   6      level, spread and skin-conductance responses
    F-EDA   6      same as H-EDA, foot electrode
    ECG     21     15 RR/heart-rate statistics, 6 HRV spectral
    RESP    6      level, spread, power in four 0.1 Hz bands
    ======  =====  ==========================================
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

CHANNELS = ("ecg", "hand_eda", "foot_eda", "resp")
LABEL_NAMES = ("low", "medium", "high")
SOURCES = ("ECG", "H-EDA", "F-EDA", "RESP")

DEFAULT_CUTOFFS_HZ = {"hand_eda": 1.0, "foot_eda": 1.0, "ecg": 40.0, "resp": 10.0}

EDA_FEATURES = (
    "mean",
    "variance",
    "peak_count",
    "peak_amplitude_sum",
    "response_duration_sum",
    "range",
)
ECG_FEATURES = (
    "mean_rr",
    "median_rr",
    "std_rr",
    "min_rr",
    "max_rr",
    "range_rr",
    "rmssd",
    "sdsd",
    "nn50",
    "pnn50",
    "cv_rr",
    "hr_mean",
    "hr_max",
    "hr_min",
    "hr_std",
    "vlf_power",
    "lf_power",
    "hf_power",
    "lf_hf_ratio",
    "lf_norm",
    "hf_norm",
)
RESP_FEATURES = (
    "mean",
    "variance",
    "band_power_0_0.1",
    "band_power_0.1_0.2",
    "band_power_0.2_0.3",
    "band_power_0.3_0.4",
)

RESP_BANDS_HZ = ((0.0, 0.1), (0.1, 0.2), (0.2, 0.3), (0.3, 0.4))
VLF_BAND_HZ = (0.003, 0.04)
LF_BAND_HZ = (0.04, 0.15)
HF_BAND_HZ = (0.15, 0.4)
TACHOGRAM_HZ = 4.0


def _inventory() -> tuple[tuple[str, ...], tuple[str, ...]]:
    names, sources = [], []
    for prefix, src, feats in (
        ("heda", "H-EDA", EDA_FEATURES),
        ("feda", "F-EDA", EDA_FEATURES),
        ("ecg", "ECG", ECG_FEATURES),
        ("resp", "RESP", RESP_FEATURES),
    ):
        names += [f"{prefix}_{f}" for f in feats]
        sources += [src] * len(feats)
    return tuple(names), tuple(sources)


FEATURE_NAMES, FEATURE_SOURCES = _inventory()


class FilterSkippedWarning(UserWarning):
    """Requested cutoff is at or above Nyquist; the channel is left unfiltered."""


class DegenerateWindowError(ValueError):
    """Window has too few detected R peaks to describe heart rhythm."""


@dataclass
class SignalRecord:
    channels: dict[str, np.ndarray]
    sampling_rate_hz: float
    labels: np.ndarray

    def __post_init__(self):
        if not self.sampling_rate_hz > 0:
            raise ValueError("sampling_rate_hz must be positive")
        missing = [c for c in CHANNELS if c not in self.channels]
        if missing:
            raise ValueError(f"missing channels: {', '.join(missing)}")
        self.channels = {c: np.asarray(self.channels[c], dtype=np.float64) for c in CHANNELS}
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.labels.shape[0]
        for c, v in self.channels.items():
            if v.shape != (n,):
                raise ValueError(f"channel {c!r} has {v.shape[0]} samples, labels have {n}")
        if n and (self.labels.min() < 0 or self.labels.max() > 2):
            raise ValueError("labels must be 0 (low), 1 (medium) or 2 (high)")

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class WindowSpec:
    window_seconds: float = 100.0
    step_seconds: float = 50.0

    def __post_init__(self):
        if not (0 < self.step_seconds <= self.window_seconds):
            raise ValueError("need 0 < step_seconds <= window_seconds")


@dataclass
class FeatureMatrix:
    """Windows by features, with per-column names and source tags."""

    values: np.ndarray
    labels: np.ndarray
    names: tuple[str, ...] = FEATURE_NAMES
    sources: tuple[str, ...] = FEATURE_SOURCES

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.names = tuple(self.names)
        self.sources = tuple(self.sources)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        n_rows, n_cols = self.values.shape
        if len(self.names) != n_cols or len(self.sources) != n_cols:
            raise ValueError(f"names/sources must have {n_cols} entries")
        if self.labels.shape != (n_rows,):
            raise ValueError("labels must have one entry per row")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")
        bad = set(self.sources) - set(SOURCES)
        if bad:
            raise ValueError(f"unknown source tags: {sorted(bad)}")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureMatrix(self.values[rows], self.labels[rows], self.names, self.sources)


def normalize(samples) -> np.ndarray:
    """Z-score with population std; constant input maps to zeros."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalize an empty sequence")
    std = x.std()
    if std == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / std


def butterworth_sos(cutoff_hz: float, fs_hz: float, order: int = 5) -> np.ndarray:
    """Digital low-pass Butterworth sections (bilinear, prewarped)."""
    return sps.butter(order, cutoff_hz, btype="low", fs=fs_hz, output="sos")


def butterworth_lowpass(samples, cutoff_hz: float, fs_hz: float, order: int = 5) -> np.ndarray:
    """Zero-phase Butterworth low-pass.

    Runs forward and backward, so the magnitude response is the square of
    the single-pass design. A cutoff at or above Nyquist returns the input
    unchanged with a :class:`FilterSkippedWarning`.
    """
    x = np.asarray(samples, dtype=np.float64)
    if cutoff_hz <= 0 or fs_hz <= 0:
        raise ValueError("cutoff_hz and fs_hz must be positive")
    if order < 1:
        raise ValueError("order must be >= 1")
    if cutoff_hz >= fs_hz / 2:
        warnings.warn(
            f"cutoff {cutoff_hz} Hz is not below Nyquist ({fs_hz / 2} Hz); filter skipped",
            FilterSkippedWarning,
            stacklevel=2,
        )
        return x.copy()
    sos = butterworth_sos(cutoff_hz, fs_hz, order)
    padlen = min(x.size - 1, 3 * (2 * sos.shape[0] + 1))
    return sps.sosfiltfilt(sos, x, padlen=padlen)


def window_slices(n_samples: int, fs_hz: float, spec: WindowSpec = WindowSpec()) -> list[tuple[int, int]]:
    """Half-open ``[start, end)`` sample ranges of the running windows."""
    width = int(round(spec.window_seconds * fs_hz))
    step = max(1, int(round(spec.step_seconds * fs_hz)))
    if width < 1 or n_samples < width:
        return []
    count = (n_samples - width) // step + 1
    return [(k * step, k * step + width) for k in range(count)]


@dataclass(frozen=True)
class ScrConfig:
    """Skin-conductance-response detector thresholds (normalized units)."""

    onset_slope: float = 0.01
    max_rise_seconds: float = 5.0
    recovery_fraction: float = 0.5
    min_amplitude: float = 0.0


@dataclass(frozen=True)
class Scr:
    onset: int
    peak: int
    amplitude: float
    duration_seconds: float


def detect_scrs(x, fs_hz: float, config: ScrConfig = ScrConfig()) -> list[Scr]:
    """Skin-conductance responses in one window.

    An onset is where the slope rises through ``onset_slope`` per second;
    the response peaks at the next local maximum, which must come within
    ``max_rise_seconds``. Duration runs from onset to the first sample below
    ``onset + recovery_fraction * amplitude``, or to the window end.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 3:
        return []
    slope = np.diff(x) * fs_hz
    max_rise = config.max_rise_seconds * fs_hz
    out = []
    t = 0
    while t < n - 1:
        if not (slope[t] > config.onset_slope and (t == 0 or slope[t - 1] <= config.onset_slope)):
            t += 1
            continue
        onset = t
        p = onset + 1
        while p < n - 1 and slope[p] > 0:
            p += 1
        # a rise still climbing at the window edge has no confirmed peak
        if p < n - 1 and p - onset <= max_rise:
            amp = x[p] - x[onset]
            if amp > config.min_amplitude:
                level = x[onset] + config.recovery_fraction * amp
                below = np.flatnonzero(x[p + 1 :] < level)
                end = p + 1 + int(below[0]) if below.size else n - 1
                out.append(Scr(onset, p, float(amp), (end - onset) / fs_hz))
        t = p
    return out


def extract_eda_features(window, fs_hz: float, scr: ScrConfig = ScrConfig()) -> dict[str, float]:
    x = np.asarray(window, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty EDA window")
    responses = detect_scrs(x, fs_hz, scr)
    return {
        "mean": float(x.mean()),
        "variance": float(x.var()),
        "peak_count": float(len(responses)),
        "peak_amplitude_sum": float(sum(r.amplitude for r in responses)),
        "response_duration_sum": float(sum(r.duration_seconds for r in responses)),
        # sixth feature; the other five cover level, spread and responses
        "range": float(x.max() - x.min()),
    }


@dataclass(frozen=True)
class RPeakConfig:
    integration_seconds: float = 0.15
    refractory_seconds: float = 0.25
    threshold_fraction: float = 0.5
    history: int = 8
    warmup_seconds: float = 2.0


def detect_r_peaks(x, fs_hz: float, config: RPeakConfig = RPeakConfig()) -> np.ndarray:
    """R-peak sample indices via derivative, squaring and moving integration.

    A candidate is a local maximum of the integrated energy above
    ``threshold_fraction`` times the mean of recently accepted maxima
    (seeded by the largest value in the warm-up span). The R peak is the
    largest raw sample in the integration window behind the candidate.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 3:
        return np.zeros(0, dtype=np.int64)
    d = np.diff(x, prepend=x[0])
    width = max(1, int(round(config.integration_seconds * fs_hz)))
    integ = np.convolve(d * d, np.ones(width) / width)[:n]
    refractory = config.refractory_seconds * fs_hz

    is_max = np.zeros(n, dtype=bool)
    is_max[1:-1] = (integ[1:-1] > integ[:-2]) & (integ[1:-1] >= integ[2:])
    candidates = np.flatnonzero(is_max)

    warm = integ[: max(1, int(config.warmup_seconds * fs_hz))]
    recent = [float(warm.max())]
    peaks: list[int] = []
    last_candidate = -math.inf
    for c in candidates:
        mean_recent = sum(recent[-config.history :]) / len(recent[-config.history :])
        if integ[c] < config.threshold_fraction * mean_recent or integ[c] <= 0:
            continue
        if c - last_candidate < refractory:
            continue
        last_candidate = c
        lo = max(0, c - width)
        r = lo + int(np.argmax(x[lo : c + 1]))
        if not peaks or r != peaks[-1]:
            peaks.append(r)
        recent.append(float(integ[c]))
    return np.asarray(peaks, dtype=np.int64)


def _band_power(freqs, psd, lo, hi) -> float:
    df = freqs[1] - freqs[0] if freqs.size > 1 else 0.0
    sel = (freqs >= lo) & (freqs < hi)
    return float(psd[sel].sum() * df)


def hrv_spectrum(peak_times) -> tuple[np.ndarray, np.ndarray]:
    """Welch PSD of the RR tachogram resampled at 4 Hz (mean removed)."""
    t = np.asarray(peak_times, dtype=np.float64)
    rr = np.diff(t)
    beat_t = t[1:]
    grid = np.arange(beat_t[0], beat_t[-1] + 1e-12, 1.0 / TACHOGRAM_HZ)
    if grid.size < 2:
        return np.zeros(1), np.zeros(1)
    series = np.interp(grid, beat_t, rr)
    series -= series.mean()
    nperseg = min(256, series.size)
    return sps.welch(
        series,
        fs=TACHOGRAM_HZ,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
    )


def ecg_features_from_peaks(peak_times) -> dict[str, float]:
    t = np.asarray(peak_times, dtype=np.float64)
    if t.size < 3:
        raise DegenerateWindowError(f"need at least 3 R peaks, found {t.size}")
    rr = np.diff(t)
    drr = np.diff(rr)
    hr = 60.0 / rr
    nn50 = float(np.sum(np.abs(drr) > 0.05))
    freqs, psd = hrv_spectrum(t)
    vlf = _band_power(freqs, psd, *VLF_BAND_HZ)
    lf = _band_power(freqs, psd, *LF_BAND_HZ)
    hf = _band_power(freqs, psd, *HF_BAND_HZ)
    # guard: without HF (or any LF+HF) power the ratios are reported as 0
    ratio = lf / hf if hf >= 1e-12 else 0.0
    total = lf + hf
    lf_norm = lf / total if total >= 1e-12 else 0.0
    hf_norm = hf / total if total >= 1e-12 else 0.0
    mean_rr = float(rr.mean())
    return {
        "mean_rr": mean_rr,
        "median_rr": float(np.median(rr)),
        "std_rr": float(rr.std()),
        "min_rr": float(rr.min()),
        "max_rr": float(rr.max()),
        "range_rr": float(rr.max() - rr.min()),
        "rmssd": float(np.sqrt(np.mean(drr**2))),
        "sdsd": float(drr.std()),
        "nn50": nn50,
        "pnn50": nn50 / drr.size,
        "cv_rr": float(rr.std() / mean_rr),
        "hr_mean": float(hr.mean()),
        "hr_max": float(hr.max()),
        "hr_min": float(hr.min()),
        "hr_std": float(hr.std()),
        "vlf_power": vlf,
        "lf_power": lf,
        "hf_power": hf,
        "lf_hf_ratio": ratio,
        "lf_norm": lf_norm,
        "hf_norm": hf_norm,
    }


def extract_ecg_features(window, fs_hz: float, rpeak: RPeakConfig = RPeakConfig()) -> dict[str, float]:
    """RR-interval, heart-rate and HRV-spectrum features of one ECG window.

    Raises :class:`DegenerateWindowError` when fewer than 3 R peaks are found.
    """
    peaks = detect_r_peaks(window, fs_hz, rpeak)
    return ecg_features_from_peaks(peaks / fs_hz)


def extract_resp_features(window, fs_hz: float, segment_seconds: float = 50.0) -> dict[str, float]:
    """Level, variance and mean Welch PSD in each respiration band."""
    x = np.asarray(window, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty respiration window")
    if fs_hz < 2 * RESP_BANDS_HZ[-1][1]:
        raise ValueError(f"sampling rate {fs_hz} Hz is too low for bands up to 0.4 Hz")
    nperseg = min(x.size, max(1, int(round(segment_seconds * fs_hz))))
    freqs, psd = sps.welch(
        x, fs=fs_hz, window="hann", nperseg=nperseg, noverlap=nperseg // 2, detrend="constant"
    )
    out = {"mean": float(x.mean()), "variance": float(x.var())}
    for (lo, hi), name in zip(RESP_BANDS_HZ, RESP_FEATURES[2:]):
        sel = (freqs >= lo) & (freqs < hi)
        out[name] = float(psd[sel].mean()) if sel.any() else 0.0
    return out


def window_label(labels) -> int:
    """Majority label; ties go to the higher stress class."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=3)
    return int(2 - np.argmax(counts[::-1]))


@dataclass(frozen=True)
class ExtractionConfig:
    window: WindowSpec = WindowSpec()
    cutoffs_hz: dict = field(default_factory=lambda: dict(DEFAULT_CUTOFFS_HZ))
    filter_order: int = 5
    scr: ScrConfig = ScrConfig()
    rpeak: RPeakConfig = RPeakConfig()
    resp_segment_seconds: float = 50.0


def preprocess(record: SignalRecord, config: ExtractionConfig = ExtractionConfig()) -> dict[str, np.ndarray]:
    """Z-score then low-pass every channel."""
    fs = record.sampling_rate_hz
    return {
        c: butterworth_lowpass(normalize(record.channels[c]), config.cutoffs_hz[c], fs, config.filter_order)
        for c in CHANNELS
    }


def build_feature_matrix(
    record: SignalRecord, config: ExtractionConfig = ExtractionConfig()
) -> tuple[FeatureMatrix, int]:
    """Feature rows for every usable window, plus the dropped-window count.

    Windows whose ECG yields fewer than 3 R peaks are dropped from every
    source so rows stay aligned.
    """
    fs = record.sampling_rate_hz
    clean = preprocess(record, config)
    rows, labels, dropped = [], [], 0
    for start, end in window_slices(record.n_samples, fs, config.window):
        try:
            ecg = extract_ecg_features(clean["ecg"][start:end], fs, config.rpeak)
        except DegenerateWindowError:
            dropped += 1
            continue
        heda = extract_eda_features(clean["hand_eda"][start:end], fs, config.scr)
        feda = extract_eda_features(clean["foot_eda"][start:end], fs, config.scr)
        resp = extract_resp_features(clean["resp"][start:end], fs, config.resp_segment_seconds)
        rows.append(
            [heda[k] for k in EDA_FEATURES]
            + [feda[k] for k in EDA_FEATURES]
            + [ecg[k] for k in ECG_FEATURES]
            + [resp[k] for k in RESP_FEATURES]
        )
        labels.append(window_label(record.labels[start:end]))
    if not rows:
        raise ValueError("no usable windows in record")
    return FeatureMatrix(np.array(rows), np.array(labels)), dropped
