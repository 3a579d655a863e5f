"""Periodogram ordinates at Fourier frequencies of a mean-centered series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arma import TimeSeries
from .errors import InputError


@dataclass(frozen=True, eq=False)
class Periodogram:
    """Ordinates I(w_j) at the Fourier frequencies w_j = 2*pi*j/T kept in
    (0, pi), i.e. j = 1..floor((T-1)/2).

    Frequencies at 0 (killed by mean-centering) and pi, and the symmetric
    upper half, are dropped; this is the standard retained set for Whittle
    estimation.  Instances built by :func:`compute_periodogram` satisfy:
    freqs strictly increasing in (0, pi), ords >= 0, n = floor((T-1)/2).
    """

    freqs: np.ndarray
    ords: np.ndarray
    T: int

    @property
    def n(self) -> int:
        return int(self.ords.size)


def _ordinates(values: np.ndarray, mean: float, T: int, freqs: np.ndarray) -> np.ndarray:
    # Direct O(T*n) sine/cosine sums with t = 1..T; fast enough for the
    # series lengths this library targets and free of FFT scaling choices.
    t = np.arange(1, T + 1, dtype=float)
    x = values - mean
    arg = np.outer(freqs, t)
    s = np.sin(arg) @ x
    c = np.cos(arg) @ x
    return (s * s + c * c) / (2.0 * np.pi * T)


def compute_periodogram(series: TimeSeries) -> Periodogram:
    """Periodogram of a series: I(w_j) = [ (sum_t (z_t - zbar) sin(w_j t))^2
    + (sum_t (z_t - zbar) cos(w_j t))^2 ] / (2*pi*T) at w_j = 2*pi*j/T for
    j = 1..floor((T-1)/2)."""
    T = series.T
    if T < 4:
        raise InputError(f"need T >= 4, got {T}")
    n = (T - 1) // 2
    freqs = 2.0 * np.pi * np.arange(1, n + 1, dtype=float) / T
    ords = _ordinates(series.values, series.mean, T, freqs)
    return Periodogram(freqs=freqs, ords=ords, T=T)


def all_fourier_ordinates(series: TimeSeries) -> tuple[np.ndarray, np.ndarray]:
    """Ordinates at every Fourier frequency 2*pi*j/T, j = 1..T-1.

    Used for whole-set identities (the full-set ordinate sum equals
    sum_t (z_t - zbar)^2 / (2*pi)); the retained half set for inference is
    produced by :func:`compute_periodogram`.
    """
    T = series.T
    freqs = 2.0 * np.pi * np.arange(1, T, dtype=float) / T
    return freqs, _ordinates(series.values, series.mean, T, freqs)
