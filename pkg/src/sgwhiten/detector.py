"""Quadratic-pulse detection statistic built on an orthonormalized basis.

The per-sample statistic is the ratio of fitted foreground power (the
quadratic coefficient alone) to fitted background power (everything except
the constant and quadratic terms), both measured in the metric psi' W psi of
the filter's own weight matrix.  A Cholesky factor U of that metric turns
each masked coefficient vector into orthonormal coordinates where the powers
are plain squared norms:

    Z[n] = |U a1[n]|^2 / (|U a0[n]|^2 + eps)

with a1, a0 the masked coefficient vectors.  W is first rescaled to unit
maximum element so the guard constant eps has a comparable effect for every
filter.  Crossings of a decibel threshold become detection events; with
ground-truth pulse extents the per-pulse peak SNR can be extracted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis_bank import FeatureSeries
from .errors import NotPositiveDefiniteError

DEFAULT_EPSILON = 1e-3
DEFAULT_GAMMA_DB = 20.0

# Decibel floor applied when serializing; in-memory values may be -inf.
DB_FLOOR = -300.0


@dataclass(frozen=True)
class HypothesisMask:
    """Index sets defining the foreground and background hypotheses.

    The defaults keep only the quadratic term (l = 2) in the foreground and
    zero the constant and quadratic terms (l = 0, 2) in the background, so
    dc offsets never count and odd or quartic content counts against a pulse.
    """

    foreground_keep: tuple[int, ...] = (2,)
    background_zero: tuple[int, ...] = (0, 2)

    def foreground_vector(self, order: int) -> np.ndarray:
        mask = np.zeros(order)
        mask[list(self.foreground_keep)] = 1.0
        return mask

    def background_vector(self, order: int) -> np.ndarray:
        mask = np.ones(order)
        mask[list(self.background_zero)] = 0.0
        return mask


DEFAULT_MASKS = HypothesisMask()


@dataclass(frozen=True)
class OrthoTransform:
    """Upper-triangular U with U'U = psi' W_s psi, and the rescaled W_s."""

    u: np.ndarray
    w_scaled: np.ndarray

    def __post_init__(self) -> None:
        for name in ("u", "w_scaled"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def order(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class DetectionReport:
    """Statistic series with threshold crossings and optional per-pulse peaks.

    ``offset`` maps series index i to the absolute input sample i + offset.
    """

    z: np.ndarray
    z_db: np.ndarray
    gamma_db: float
    events: np.ndarray            # absolute sample indices with Z_dB > gamma
    offset: int
    peak_snr_db: tuple = ()       # per-pulse peaks, set when ground truth known

    def __post_init__(self) -> None:
        for name in ("z", "z_db", "events"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def build_ortho_transform(psi: np.ndarray, weight: np.ndarray) -> OrthoTransform:
    """Cholesky-orthonormalize the monomial basis under a weight matrix.

    The weight is rescaled to unit maximum element before forming
    psi' W_s psi.  Raises NotPositiveDefiniteError when the metric is not
    positive definite (no orthonormal basis exists in that case).
    """
    w = np.asarray(weight, dtype=float)
    peak = w.max()
    if peak <= 0:
        raise NotPositiveDefiniteError("weight matrix has no positive elements")
    w_scaled = w / peak
    gram = psi.T @ w_scaled @ psi
    gram = 0.5 * (gram + gram.T)
    try:
        lower = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "psi' W psi is not positive definite; cannot orthonormalize") from exc
    return OrthoTransform(u=lower.T.copy(), w_scaled=w_scaled)


def compute_statistic(features: FeatureSeries, transform: OrthoTransform,
                      masks: HypothesisMask = DEFAULT_MASKS,
                      epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Foreground-to-background power ratio per sample.

    Returns the linear-scale series aligned with ``features``; use
    ``to_decibels`` for the dB form.  ``epsilon`` guards the denominator and
    must be positive.
    """
    if epsilon <= 0:
        raise ValueError("denominator guard epsilon must be positive")
    order = features.order
    u = transform.u
    fg = masks.foreground_vector(order)
    bg = masks.background_vector(order)
    beta1 = (features.coeffs * fg) @ u.T
    beta0 = (features.coeffs * bg) @ u.T
    p1 = np.einsum("ij,ij->i", beta1, beta1)
    p0 = np.einsum("ij,ij->i", beta0, beta0)
    return p1 / (p0 + epsilon)


def to_decibels(z: np.ndarray, floor_db: float | None = None) -> np.ndarray:
    """10 log10 of a power ratio; optionally clamped at a floor."""
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.asarray(z, dtype=float))
    if floor_db is not None:
        db = np.maximum(db, floor_db)
    return db


def threshold_detect(z_db: np.ndarray, gamma_db: float = DEFAULT_GAMMA_DB,
                     offset: int = 0, collapse_runs: bool = False) -> np.ndarray:
    """Absolute sample indices where the statistic exceeds the threshold.

    With ``collapse_runs`` each contiguous run of crossings is reduced to its
    peak sample; by default every crossing sample is reported.
    """
    above = np.asarray(z_db) > gamma_db
    idx = np.nonzero(above)[0]
    if collapse_runs and len(idx):
        keep = []
        run_start = 0
        for i in range(1, len(idx) + 1):
            if i == len(idx) or idx[i] != idx[i - 1] + 1:
                run = idx[run_start:i]
                keep.append(run[np.argmax(z_db[run])])
                run_start = i
        idx = np.asarray(keep)
    return idx + offset


def peak_snr(z_db: np.ndarray, extents, offset: int, half_window: int) -> list[float]:
    """Peak statistic within each pulse extent, in dB.

    ``extents`` are (start, stop) half-open supports in absolute sample
    indices; each is widened by the half window on both sides before taking
    the maximum, so any analysis window overlapping the pulse counts.
    Raises ValueError when an extent has no overlap with the series.
    """
    z_db = np.asarray(z_db)
    peaks = []
    for start, stop in extents:
        lo = max(start - half_window, offset)
        hi = min(stop + half_window, offset + len(z_db))
        if lo >= hi:
            raise ValueError(
                f"pulse extent [{start}, {stop}) lies outside the analyzed range")
        peaks.append(float(z_db[lo - offset:hi - offset].max()))
    return peaks


def detect(features: FeatureSeries, transform: OrthoTransform,
           masks: HypothesisMask = DEFAULT_MASKS,
           epsilon: float = DEFAULT_EPSILON,
           gamma_db: float = DEFAULT_GAMMA_DB,
           pulse_extents=None, half_window: int | None = None,
           collapse_runs: bool = False) -> DetectionReport:
    """Run the statistic, threshold it, and assemble a report.

    ``pulse_extents`` (with ``half_window``) adds per-pulse peak SNR values
    for ground-truth supports.
    """
    z = compute_statistic(features, transform, masks, epsilon)
    z_db = to_decibels(z)
    events = threshold_detect(z_db, gamma_db, offset=features.offset,
                              collapse_runs=collapse_runs)
    peaks: tuple = ()
    if pulse_extents is not None:
        if half_window is None:
            raise ValueError("half_window is required alongside pulse_extents")
        peaks = tuple(peak_snr(z_db, pulse_extents, features.offset, half_window))
    return DetectionReport(z=z, z_db=z_db, gamma_db=gamma_db, events=events,
                           offset=features.offset, peak_snr_db=peaks)
