"""Apply designed filters and the full polynomial analysis bank to sequences.

Convolution emits interior (fully overlapped) samples only; no padding is
ever applied, and the half-window group delay is carried as alignment
metadata instead.  The bank runs all L analysis rows at once, producing a
per-sample vector of local monomial coefficient estimates from which a
polynomial segment can be re-synthesized.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True)
class SampleSequence:
    """Uniformly sampled values with sampling period and absolute start index."""

    values: np.ndarray
    ts: float = 1.0
    start: int = 0

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("sample sequence must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample sequence contains NaN or infinity")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FeatureSeries:
    """Per-sample coefficient vectors, center-indexed with group delay ``offset``.

    Row i holds the L coefficient estimates for the window centered on input
    sample ``offset + i``.
    """

    coeffs: np.ndarray
    offset: int
    ts: float = 1.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim != 2:
            raise ValueError("feature series must be 2-d (samples x L)")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def order(self) -> int:
        return self.coeffs.shape[1]


def _taps(filt) -> np.ndarray:
    return np.asarray(getattr(filt, "h", filt), dtype=float)


def convolve(x: SampleSequence, filt) -> SampleSequence:
    """Filter a sequence, keeping only fully overlapped output samples.

    y[n] = sum over m of h[m] x[n - m], evaluated for the interior centers
    n = K..N-1-K; the output start index is shifted by K so that output
    sample i refers to the same absolute time as input sample i + K.
    """
    taps = _taps(filt)
    n = len(x)
    m = len(taps)
    if n < m:
        raise ValueError(f"input length {n} is shorter than the filter length {m}")
    k = (m - 1) // 2
    # y[n] = sum h[m] x[n-m] is the correlation of x with the reversed taps.
    interior = np.convolve(x.values, taps, mode="valid")
    return SampleSequence(values=interior, ts=x.ts, start=x.start + k)


def analyze(window: np.ndarray, h_matrix: np.ndarray) -> np.ndarray:
    """Coefficient estimates for one window: alpha = H x, centered coordinates."""
    window = np.asarray(window, dtype=float)
    if window.shape != (h_matrix.shape[1],):
        raise ValueError(
            f"window length {window.shape} does not match bank width {h_matrix.shape[1]}")
    # einsum keeps the summation order independent of batching, so sliding,
    # streaming, and single-window results are bit-identical.
    return np.einsum("m,lm->l", window, h_matrix)


def synthesize(alpha: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Reconstruct the fitted polynomial segment over the window: psi alpha."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (psi.shape[1],):
        raise ValueError("coefficient vector length does not match basis")
    return psi @ alpha


def run_bank(x: SampleSequence, h_matrix: np.ndarray) -> FeatureSeries:
    """Slide the full analysis bank along a sequence.

    Equivalent to L parallel valid-region convolutions with the reversed rows
    of H; implemented as one windowed matrix product.
    """
    h_matrix = np.asarray(h_matrix, dtype=float)
    m = h_matrix.shape[1]
    if len(x) < m:
        raise ValueError(f"input length {len(x)} is shorter than the window {m}")
    k = (m - 1) // 2
    windows = sliding_window_view(x.values, m)
    coeffs = np.einsum("nm,lm->nl", windows, h_matrix)
    return FeatureSeries(coeffs=coeffs, offset=x.start + k, ts=x.ts)


class StreamingBank:
    """Ring-buffer wrapper around run_bank with identical numerical results.

    Push samples one at a time; once the window is full, each push yields the
    coefficient vector for the center that just became fully covered (the
    current sample index minus the group delay).
    """

    def __init__(self, h_matrix: np.ndarray):
        self.h_matrix = np.asarray(h_matrix, dtype=float)
        self.window = deque(maxlen=self.h_matrix.shape[1])

    def push(self, sample: float) -> np.ndarray | None:
        self.window.append(float(sample))
        if len(self.window) < self.window.maxlen:
            return None
        return analyze(np.asarray(self.window), self.h_matrix)

    def reset(self) -> None:
        self.window.clear()
