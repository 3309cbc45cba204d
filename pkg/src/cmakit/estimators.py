"""Nonparametric kernel estimation from regularly sampled data.

The sampled process has a Wold representation Y_n = sum_j psi_j Z_{n-j} with
innovation variance sigma2_Delta, and (sigma_Delta/sqrt(Delta)) psi_j
approximates the kernel g at t = j Delta. Estimating (psi, sigma2_Delta) from
the sample autocovariance therefore estimates g. Two routes are implemented:

* innovations algorithm: theta_{m,j} and v_m converge to psi_j and
  sigma2_Delta as the order m grows;
* Durbin-Levinson: fit a long causal AR, invert phi(z) into a power series
  beta(z) = 1/phi(z), and use (beta_j, tau2_m).

Both feed estimate_kernel, which evaluates at t = (j + h) Delta; the default
half-offset keeps the step-function bias centered.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from cmakit import _core
from cmakit.errors import (
    DomainError,
    LagTooLarge,
    MRequired,
    NonCausalAR,
    NonPositiveV,
)


@dataclass(frozen=True)
class SampledSeries:
    """Equally spaced observations Y_delta, Y_2delta, ..., Y_ndelta.

    mean_removed marks data whose mean is known to be zero (already removed,
    or simulated from a zero-mean model); estimators then skip re-centering,
    which would otherwise inject an O(1/(n delta)) bias.
    """

    delta: float
    values: np.ndarray
    mean_removed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if not (self.delta > 0):
            raise DomainError("delta must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise DomainError("need a 1-d series of length at least 2")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("series contains non-finite values")

    @property
    def n(self):
        return self.values.size

    @property
    def span(self):
        return self.n * self.delta


@dataclass(frozen=True)
class AcvfSequence:
    """Autocovariances gamma(0) .. gamma(h_max), either sample or exact."""

    gamma: np.ndarray
    source: str = "sample"
    delta: float | None = None
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=np.float64))
        if self.source not in ("sample", "exact-model"):
            raise DomainError(f"unknown acvf source {self.source!r}")
        if self.gamma.ndim != 1 or self.gamma.size < 1:
            raise DomainError("need at least gamma(0)")
        if not (self.gamma[0] > 0):
            raise DomainError("gamma(0) must be positive")

    @property
    def h_max(self):
        return self.gamma.size - 1

    def __len__(self):
        return self.gamma.size


def sample_acvf(series, h_max):
    """Biased (divisor n) sample autocovariance at lags 0..h_max, computed by
    FFT; the divisor-n convention keeps the sequence nonnegative definite.
    Centering is skipped when the series is flagged mean_removed."""
    n = series.n
    if not (0 <= h_max < n):
        raise LagTooLarge(f"h_max = {h_max} with n = {n}")
    x = series.values if series.mean_removed else series.values - np.mean(series.values)
    nfft = int(2 ** np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: h_max + 1] / n
    return AcvfSequence(gamma=acov, source="sample", delta=series.delta, n=n)


def exact_acvf(model, delta, h_max):
    """Model autocovariances on the sampling grid, for estimator studies
    without simulation noise. model needs a vectorized autocovariance(h)."""
    if not (delta > 0):
        raise DomainError("delta must be positive")
    lags = np.arange(h_max + 1) * delta
    return AcvfSequence(gamma=model.autocovariance(lags), source="exact-model", delta=delta)


@dataclass(frozen=True)
class InnovationsFit:
    """Innovations coefficients theta_{k,j} (rows k = 0..m, columns j = 0..k)
    and one-step prediction variances v_0..v_m."""

    m: int
    theta: np.ndarray
    v: np.ndarray

    def psi_estimates(self, j_max):
        """Wold coefficient estimates [1, theta_{m,1}, ..., theta_{m,j_max}]."""
        if j_max > self.m:
            raise DomainError(f"need j_max <= m = {self.m}")
        out = self.theta[self.m, : j_max + 1].copy()
        out[0] = 1.0
        return out

    @property
    def v_m(self):
        return float(self.v[self.m])


def innovations_algorithm(acvf, m):
    """Run the innovations recursion to order m on gamma(0..h_max), m <= h_max."""
    if not (0 < m < len(acvf)):
        raise DomainError(f"need 0 < m < {len(acvf)} available lags, got m = {m}")
    try:
        theta, v = _core.innovations_recursion(np.ascontiguousarray(acvf.gamma), m)
    except ValueError as exc:
        raise NonPositiveV(str(exc)) from exc
    if np.any(v <= 0):
        raise NonPositiveV("non-positive prediction variance")
    return InnovationsFit(m=m, theta=theta, v=v)


def durbin_levinson(acvf, m):
    """Levinson recursion: AR(m) coefficients phi_1..phi_m and the order-m
    prediction error variance tau2."""
    if not (0 < m < len(acvf)):
        raise DomainError(f"need 0 < m < {len(acvf)} available lags, got m = {m}")
    try:
        phi, tau2 = _core.levinson_recursion(np.ascontiguousarray(acvf.gamma), m)
    except ValueError as exc:
        raise NonPositiveV(str(exc)) from exc
    if not (tau2 > 0):
        raise NonPositiveV(f"tau2 = {tau2}")
    return phi, float(tau2)


def ar_to_ma(phi, j_max):
    """Power series coefficients of 1/phi(z), phi(z) = 1 - sum phi_k z^k.

    beta_0 = 1, beta_j = sum_{k<=min(j,m)} phi_k beta_{j-k}; requires phi(z)
    zero-free on the closed unit disc, otherwise the series diverges.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 1 or phi.size == 0:
        raise DomainError("phi must be a nonempty 1-d array")
    if j_max < 0:
        raise DomainError("j_max must be nonnegative")
    if np.any(phi != 0.0):
        roots = np.roots(np.concatenate((-phi[::-1], [1.0])))
        bad = np.abs(roots) <= 1.0 + 1e-12
        if np.any(bad):
            raise NonCausalAR(
                f"fitted AR polynomial has zeros of modulus {np.min(np.abs(roots)):.6g} "
                "on or inside the unit circle"
            )
    return _core.ma_expansion(np.ascontiguousarray(phi), j_max)


@dataclass(frozen=True)
class KernelEstimate:
    """Kernel values on the grid t_j = (j + offset_h) delta, j = 0..N-1, with
    plug-in asymptotic standard errors when the sample size is known."""

    delta: float
    offset_h: float
    g_hat: np.ndarray
    band: np.ndarray | None
    method: str
    m_used: int
    v_hat: float
    n: int | None = None

    @property
    def t(self):
        return (np.arange(self.g_hat.size) + self.offset_h) * self.delta

    @property
    def n_points(self):
        return self.g_hat.size

    def __call__(self, t):
        """Step-function evaluation: value at index floor(t/delta)."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.floor(t / self.delta + 1e-12).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.g_hat.size):
            raise DomainError("t outside the estimated grid")
        out = self.g_hat[idx]
        return out if out.shape else float(out)


def _resolve_inputs(data, delta, t_max, m, method):
    if isinstance(data, SampledSeries):
        if delta is not None and abs(delta - data.delta) > 1e-12 * data.delta:
            raise DomainError("delta argument disagrees with series.delta")
        delta = data.delta
        n = data.n
    elif isinstance(data, AcvfSequence):
        if delta is None:
            delta = data.delta
        if delta is None:
            raise DomainError("delta required with an AcvfSequence input")
        n = data.n
    else:
        raise DomainError("data must be a SampledSeries or AcvfSequence")

    n_grid = int(round(t_max / delta))
    if n_grid < 1:
        raise DomainError("t_max must be at least delta")

    default_m = m is None
    if default_m:
        m = 3 * n_grid
    if method == "innovations" and m < n_grid - 1:
        raise DomainError(f"innovations method needs m >= N-1 = {n_grid - 1}, got m = {m}")

    avail = data.n - 1 if isinstance(data, SampledSeries) else len(data) - 1
    if m > avail:
        if default_m:
            raise MRequired(
                f"default order m = 3N = {m} exceeds the {avail} available lags; pass m explicitly"
            )
        raise DomainError(f"m = {m} exceeds the {avail} available lags")
    if default_m and n is not None and m > n ** (1.0 / 3.0):
        warnings.warn(
            f"default m = {m} exceeds n^(1/3) = {n ** (1/3):.1f}; "
            "consistency theory assumes m = o(n^(1/3))",
            UserWarning,
        )
    return delta, n, n_grid, m


def estimate_kernel(data, delta=None, t_max=8.0, method="innovations", m=None, offset_h=0.5):
    """Estimate the kernel on [0, t_max] from a series or an ACVF.

    method 'innovations' uses (sqrt(v_m)/sqrt(delta)) theta_{m,j} with
    theta_{m,0} := 1; 'durbin-levinson' uses (sqrt(tau2)/sqrt(delta)) beta_j.
    m defaults to 3N (N grid points); a warning fires when that exceeds
    n^(1/3). The band is sqrt(sum_{i<j} psi_i^2 * v/(n delta)), empty sum at
    j=0, and is omitted for exact ACVFs where n is unknown.
    """
    if not (0.0 <= offset_h < 1.0):
        raise DomainError("offset_h must lie in [0, 1)")
    if method not in ("innovations", "durbin-levinson"):
        raise DomainError(f"unknown method {method!r}")
    delta, n, n_grid, m = _resolve_inputs(data, delta, t_max, m, method)

    acvf = sample_acvf(data, m) if isinstance(data, SampledSeries) else data
    if method == "innovations":
        fit = innovations_algorithm(acvf, m)
        weights = fit.psi_estimates(n_grid - 1)
        v_hat = fit.v_m
    else:
        phi, v_hat = durbin_levinson(acvf, m)
        weights = ar_to_ma(phi, n_grid - 1)

    scale = np.sqrt(v_hat / delta)
    g_hat = scale * weights
    band = None
    if n is not None:
        partial = np.concatenate(([0.0], np.cumsum(weights[:-1] ** 2)))
        band = np.sqrt(partial * v_hat / (n * delta))
    return KernelEstimate(
        delta=delta,
        offset_h=offset_h,
        g_hat=g_hat,
        band=band,
        method=method,
        m_used=m,
        v_hat=v_hat,
        n=n,
    )


def clt_band(kernel_est, g_ref=None):
    """Asymptotic standard errors sqrt(int_0^t g^2(u) du / (n delta)) on the
    estimate grid, using the estimate itself or a reference kernel."""
    if kernel_est.n is None:
        raise DomainError("sample size unknown; clt_band needs a series-based estimate")
    t = kernel_est.t
    if g_ref is not None:
        vals = np.asarray([float(g_ref(ti)) for ti in t])
        # anchor the trapezoid at the right limit g(0+); causal kernels are
        # identically zero at t <= 0 so g_ref(0.0) would drop the first panel
        v0 = float(g_ref(1e-12 * kernel_est.delta))
    else:
        vals = kernel_est.g_hat
        v0 = float(vals[0])
    x = np.concatenate(([0.0], t))
    y2 = np.concatenate(([v0], vals)) ** 2
    integral = cumulative_trapezoid(y2, x, initial=0.0)[1:]
    return np.sqrt(integral / (kernel_est.n * kernel_est.delta))
