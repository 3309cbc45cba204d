"""Empirical spectral tools: periodogram, Welch averaging, the spectrum
implied by an estimated kernel, and the second-order structure function.

Frequencies are radians per sample for series-based estimates; to_continuous
and to_hz rescale both axis and density so that total power is preserved.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from cmakit.errors import DomainError, SegmentTooLong
from cmakit.estimators import SampledSeries

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpectralFunction:
    """Tabulated nonnegative spectral density over increasing frequencies."""

    freqs: np.ndarray
    values: np.ndarray
    unit: str = "rad/sample"
    method: str = "model"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.freqs.shape != self.values.shape or self.freqs.ndim != 1:
            raise DomainError("freqs and values must be matching 1-d arrays")
        if np.any(np.diff(self.freqs) <= 0):
            raise DomainError("freqs must be strictly increasing")
        if np.any(self.values < 0):
            raise DomainError("spectral values must be nonnegative")

    def to_continuous(self, delta):
        """Rescale a rad/sample density to rad/time: w -> w/delta and
        f -> delta * f, preserving integrated power."""
        if self.unit != "rad/sample":
            raise DomainError(f"cannot convert from unit {self.unit!r}")
        return SpectralFunction(
            freqs=self.freqs / delta,
            values=self.values * delta,
            unit="rad/time",
            method=self.method,
            meta={**self.meta, "delta": delta},
        )

    def to_hz(self, delta=None):
        """Rescale to cycles per time unit: phi = w/(2 pi delta)."""
        if self.unit == "rad/sample":
            if delta is None:
                raise DomainError("delta required to convert rad/sample to Hz")
            return SpectralFunction(
                freqs=self.freqs / (TWO_PI * delta),
                values=self.values * TWO_PI * delta,
                unit="hz",
                method=self.method,
                meta={**self.meta, "delta": delta},
            )
        if self.unit == "rad/time":
            return SpectralFunction(
                freqs=self.freqs / TWO_PI,
                values=self.values * TWO_PI,
                unit="hz",
                method=self.method,
                meta=dict(self.meta),
            )
        raise DomainError(f"cannot convert from unit {self.unit!r}")


def periodogram(series):
    """Raw periodogram I(w_k) = |sum_t (Y_t - Ybar) e^(-i t w_k)|^2 / (2 pi n)
    at Fourier frequencies w_k = 2 pi k / n, k = 1..floor(n/2)."""
    x = series.values - np.mean(series.values)
    n = x.size
    spec = np.abs(np.fft.rfft(x)) ** 2 / (TWO_PI * n)
    k = np.arange(1, n // 2 + 1)
    return SpectralFunction(
        freqs=TWO_PI * k / n,
        values=spec[1 : n // 2 + 1],
        unit="rad/sample",
        method="periodogram",
        meta={"n": n, "delta": series.delta},
    )


def _window(kind, m):
    if kind == "hamming":
        t = np.arange(m)
        return 0.54 - 0.46 * np.cos(TWO_PI * t / (m - 1))
    if kind == "rectangular":
        return np.ones(m)
    raise DomainError(f"unknown window {kind!r}")


def welch(series, segment_len, overlap=0.5, window="hamming"):
    """Welch estimate: average of windowed periodograms over overlapping
    segments, normalized by the window power sum(w^2) so a flat spectrum is
    estimated without bias."""
    n = series.n
    m = int(segment_len)
    if m < 2:
        raise DomainError("segment_len must be at least 2")
    if m > n:
        raise SegmentTooLong(f"segment_len = {m} exceeds n = {n}")
    if not (0.0 <= overlap <= 0.95):
        raise DomainError("overlap must lie in [0, 0.95]")
    w = _window(window, m)
    step = max(1, int(np.floor(m * (1.0 - overlap))))
    x = series.values - np.mean(series.values)
    starts = range(0, n - m + 1, step)
    acc = np.zeros(m // 2)
    count = 0
    norm = TWO_PI * np.sum(w**2)
    for s in starts:
        seg = x[s : s + m] * w
        acc += np.abs(np.fft.rfft(seg)[1 : m // 2 + 1]) ** 2 / norm
        count += 1
    k = np.arange(1, m // 2 + 1)
    return SpectralFunction(
        freqs=TWO_PI * k / m,
        values=acc / count,
        unit="rad/sample",
        method="welch",
        meta={
            "n": n,
            "delta": series.delta,
            "segment_len": m,
            "overlap": overlap,
            "window": window,
            "segments": count,
        },
    )


def spectrum_from_kernel(kernel_est, omega=None, n_freq=512):
    """Spectral density implied by a tabulated kernel:
    f(w) = (1/2 pi) |sum_j g_j e^(i w (j+h) delta) delta|^2,
    the discrete transform of the estimate on its own grid. Frequencies are
    rad/time; the default grid is geometric up to the output Nyquist rate."""
    g = np.asarray(kernel_est.g_hat, dtype=np.float64)
    delta = kernel_est.delta
    t = (np.arange(g.size) + kernel_est.offset_h) * delta
    peak = np.max(np.abs(g))
    if peak > 0 and np.abs(g[-1]) > 1e-3 * peak:
        warnings.warn("kernel grid may not cover the effective support; trailing value above 1e-3 of peak")
    if omega is None:
        omega = np.geomspace(TWO_PI / (g.size * delta), np.pi / delta, n_freq)
    omega = np.asarray(omega, dtype=np.float64)
    transform = (np.exp(1j * np.outer(omega, t)) @ g) * delta
    return SpectralFunction(
        freqs=omega,
        values=np.abs(transform) ** 2 / TWO_PI,
        unit="rad/time",
        method="kernel-derived",
        meta={"delta": delta, "offset_h": kernel_est.offset_h, "n_points": g.size},
    )


def splice_spectra(low, high, cut):
    """Join two spectral functions at the frequency cut: low-frequency values
    below, high-frequency values at or above. Units must match."""
    if low.unit != high.unit:
        raise DomainError("cannot splice spectra with different units")
    mask_lo = low.freqs < cut
    mask_hi = high.freqs >= cut
    freqs = np.concatenate((low.freqs[mask_lo], high.freqs[mask_hi]))
    values = np.concatenate((low.values[mask_lo], high.values[mask_hi]))
    if freqs.size == 0 or np.any(np.diff(freqs) <= 0):
        raise DomainError("spliced frequency axis is not strictly increasing")
    return SpectralFunction(
        freqs=freqs,
        values=values,
        unit=low.unit,
        method=f"{low.method}+{high.method}",
        meta={"cut": cut, "low": low.method, "high": high.method},
    )


def structure_function(obj, delta):
    """Second-order structure function S2(delta) = E[(Y_delta - Y_0)^2].

    Models (anything with autocovariance) give 2(gamma(0) - gamma(delta));
    a SampledSeries gives the mean squared difference at the nearest integer
    lag, which must match delta.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    if delta == 0:
        return 0.0
    if isinstance(obj, SampledSeries):
        lag = delta / obj.delta
        if abs(lag - round(lag)) > 1e-9 or round(lag) < 1:
            raise DomainError("delta must be a positive integer multiple of the series spacing")
        lag = int(round(lag))
        if lag >= obj.n:
            raise DomainError("lag exceeds the series length")
        d = obj.values[lag:] - obj.values[:-lag]
        return float(np.mean(d**2))
    if hasattr(obj, "autocovariance"):
        return float(2.0 * (obj.autocovariance(0.0) - obj.autocovariance(delta)))
    raise DomainError("expected a SampledSeries or a model with autocovariance")


def gamma_structure_asymptote(nu, lam, delta):
    """Small-delta reference for the gamma-kernel structure function, by
    regime: (lam delta)^(2 nu - 1) scaling for nu < 3/2, a |log delta|
    correction exactly at nu = 3/2, and (lam delta)^2 above."""
    import math

    if not (nu > 0.5 and lam > 0 and delta > 0):
        raise DomainError("need nu > 1/2, lam > 0, delta > 0")
    gamma0 = (2.0 * lam) ** (1.0 - 2.0 * nu) * math.gamma(2.0 * nu - 1.0)
    x = lam * delta
    if nu < 1.5:
        shape = 2.0 ** (1.0 - 2.0 * nu) * math.gamma(1.5 - nu) / math.gamma(nu + 0.5) * x ** (2.0 * nu - 1.0)
    elif nu == 1.5:
        shape = 0.5 * x**2 * abs(math.log(delta))
    else:
        shape = x**2 / (4.0 * (nu - 1.5))
    return 2.0 * gamma0 * shape
