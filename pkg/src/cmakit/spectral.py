"""Sampling asymptotics for processes with regularly varying spectral densities.

If f_Y(w) = |w|^(-alpha) ell(|w|) with ell slowly varying at infinity, the
spectral density of the Delta-sampled sequence satisfies, as Delta -> 0,

    f_Delta(w) ~ ell(1/Delta) Delta^(alpha-1) *
        [ |w|^(-alpha) + (2 pi)^(-alpha) (zeta(alpha, 1 - w/2pi)
                                          + zeta(alpha, 1 + w/2pi)) ]

uniformly on [-pi, pi], where zeta is the Hurwitz zeta function. The bracket is
the folded power sum sum_k |w + 2 pi k|^(-alpha). From it follow the constant
C_alpha (geometric mean of the bracket, controlling the one-step prediction
variance via Kolmogorov's formula), the increment constants S_{p,alpha}, and
the closed-form spectra used as test beds (FICARMA, von Karman, Kaimal).

Frequencies are angular throughout: continuous-time densities take rad/time,
sampled densities take rad/sample on [-pi, pi].
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from cmakit import _core
from cmakit.carma import carma_spectral_density
from cmakit.errors import (
    DomainError,
    InsufficientPoints,
    NonPositiveDensity,
    QuadratureFailure,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class HurwitzParams:
    """Validated (s, r) arguments for hurwitz_zeta."""

    s: float
    r: float

    def __post_init__(self):
        if not (1.0 < self.s <= 64.0):
            raise DomainError(f"need 1 < s <= 64, got s = {self.s}")
        if not (0.0 < self.r <= 4.0):
            raise DomainError(f"need 0 < r <= 4, got r = {self.r}")


def hurwitz_zeta(s, r):
    """Hurwitz zeta sum_{k>=0} (r+k)^(-s) for 1 < s <= 64, 0 < r <= 4.

    Euler-Maclaurin with 12 explicit terms and Bernoulli corrections through
    B_12; truncation error below 1e-12 on the stated domain.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if r_arr.ndim == 0:
        HurwitzParams(float(s), float(r_arr))
        return _core.hurwitz_zeta_scalar(float(s), float(r_arr))
    HurwitzParams(float(s), float(np.min(r_arr)))
    HurwitzParams(float(s), float(np.max(r_arr)))
    return _core.hurwitz_zeta_array(float(s), np.ascontiguousarray(r_arr))


def folded_power_sum(alpha, omega):
    """sum_{k in Z} |omega + 2 pi k|^(-alpha) for omega in [-pi, pi] \\ {0},
    via the Hurwitz zeta closed form."""
    omega = np.asarray(omega, dtype=np.float64)
    if np.any(omega == 0.0):
        raise DomainError("omega must be nonzero")
    if np.any(np.abs(omega) > np.pi * (1 + 1e-12)):
        raise DomainError("omega must lie in [-pi, pi]")
    u = omega / TWO_PI
    rest = TWO_PI**-alpha * (
        _core.hurwitz_zeta_array(alpha, np.ascontiguousarray(1.0 - u, dtype=np.float64).ravel()).reshape(u.shape)
        + _core.hurwitz_zeta_array(alpha, np.ascontiguousarray(1.0 + u, dtype=np.float64).ravel()).reshape(u.shape)
    )
    out = np.abs(omega) ** -alpha + rest
    return out if out.shape else float(out)


def _log_folded_power_sum(alpha, omega):
    """log of folded_power_sum, stable for omega near 0 where the direct power
    overflows."""
    aw = abs(float(omega))
    if aw == 0.0:
        raise DomainError("omega must be nonzero")
    u = omega / TWO_PI
    rest = TWO_PI**-alpha * (
        _core.hurwitz_zeta_scalar(alpha, 1.0 - u) + _core.hurwitz_zeta_scalar(alpha, 1.0 + u)
    )
    # aw^alpha * rest underflows harmlessly to 0 for tiny aw
    return -alpha * math.log(aw) + math.log1p(aw**alpha * rest)


@dataclass(frozen=True)
class QuadratureConfig:
    epsabs: float = 1e-10
    epsrel: float = 1e-10
    limit: int = 300


def _quad(fn, a, b, cfg, what, **kw):
    res = quad(fn, a, b, epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit,
               full_output=1, **kw)
    if len(res) > 3:
        raise QuadratureFailure(f"{what}: {res[3]}")
    return res[0]


@dataclass(frozen=True)
class RegVaryingSpectrum:
    """A spectral density f_Y(w) = |w|^(-alpha) ell(|w|), ell slowly varying.

    density maps continuous angular frequency to f_Y; ell_limit is the limit of
    ell at infinity when it exists (used for aliasing tail corrections).
    """

    alpha: float
    density: object
    ell_limit: float | None = None
    label: str = ""

    def __post_init__(self):
        if not (self.alpha > 1):
            raise DomainError("regular variation index alpha must exceed 1")

    def __call__(self, omega):
        return self.density(omega)

    def ell_at(self, x):
        """Slowly varying factor ell(x) = f_Y(x) x^alpha."""
        return self.density(x) * np.abs(x) ** self.alpha

    @classmethod
    def from_carma(cls, model):
        return cls(
            alpha=2.0 * (model.p - model.q),
            density=lambda w: carma_spectral_density(model, w),
            ell_limit=model.sigma2 / TWO_PI,
            label=f"carma({model.p},{model.q})",
        )

    @classmethod
    def from_ficarma(cls, model, d):
        return cls(
            alpha=2.0 * (model.p - model.q + d),
            density=lambda w: ficarma_spectral_density(model, d, w),
            ell_limit=model.sigma2 / TWO_PI,
            label=f"ficarma({model.p},{model.q};d={d})",
        )

    @classmethod
    def from_power_law(cls, alpha, scale=1.0):
        return cls(
            alpha=float(alpha),
            density=lambda w: scale * np.abs(w) ** -float(alpha),
            ell_limit=float(scale),
            label=f"power({alpha})",
        )


def asymptotic_sampled_density(spec, delta, omega):
    """Leading-order sampled spectral density ell(1/Delta) Delta^(alpha-1) *
    folded_power_sum(alpha, omega)."""
    if not (delta > 0):
        raise DomainError("delta must be positive")
    ell = float(spec.ell_at(1.0 / delta))
    return ell * delta ** (spec.alpha - 1.0) * folded_power_sum(spec.alpha, omega)


def sampled_spectral_density_aliasing(spec, delta, omega, k_trunc=None):
    """Sampled density by direct frequency folding:
    f_Delta(w) = (1/Delta) sum_k f_Y((w + 2 pi k)/Delta).

    When spec.ell_limit is known the truncated tail is replaced by its
    power-law value through Hurwitz zeta, giving near machine accuracy at small
    k_trunc; otherwise k_trunc is chosen so the analytic tail bound
    2 (2 pi K - pi)^(1-alpha) / ((alpha-1) 2 pi) stays below 1e-10.
    """
    if not (delta > 0):
        raise DomainError("delta must be positive")
    omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
    if np.any(omega == 0.0) and spec.alpha >= 1:
        # k = 0 term diverges at 0 for genuinely regularly varying densities
        raise DomainError("omega must be nonzero")
    alpha = spec.alpha
    if k_trunc is None:
        if spec.ell_limit is not None:
            k_trunc = 1000
        else:
            k_trunc = int(((2.0 / (1e-10 * (alpha - 1) * TWO_PI)) ** (1.0 / (alpha - 1)) + np.pi) / TWO_PI) + 1
            if k_trunc > 10**6:
                warnings.warn("aliasing truncation capped at 1e6 terms; tail not corrected")
                k_trunc = 10**6

    total = np.zeros(omega.shape)
    block = 200_000
    for lo in range(-k_trunc, k_trunc + 1, block):
        ks = np.arange(lo, min(lo + block, k_trunc + 1))
        args = (omega[:, None] + TWO_PI * ks[None, :]) / delta
        total += np.sum(spec.density(args), axis=1)
    total /= delta

    if spec.ell_limit is not None:
        u = omega / TWO_PI
        base = k_trunc + 1.0
        tail = np.empty(omega.shape)
        for i, ui in enumerate(u):
            tail[i] = _core.hurwitz_zeta_scalar(alpha, base + ui) + _core.hurwitz_zeta_scalar(alpha, base - ui)
        total += spec.ell_limit * delta ** (alpha - 1.0) * TWO_PI**-alpha * tail
    out = total if total.shape != (1,) else float(total[0])
    return out


def c_alpha(alpha, cfg=QuadratureConfig(epsabs=1e-9, epsrel=1e-9)):
    """Geometric-mean constant exp{(1/2pi) int_-pi^pi log folded_power_sum dw}.

    The integrand has an integrable -alpha*log|w| singularity at 0; the
    substitution w = e^u flattens it before adaptive quadrature.
    """
    if not (1.0 < alpha <= 40.0):
        raise DomainError("need 1 < alpha <= 40")
    integrand = lambda u: math.exp(u) * _log_folded_power_sum(alpha, math.exp(u))
    val = _quad(integrand, -45.0, math.log(math.pi), cfg, "c_alpha")
    return math.exp(val / math.pi)


def s_p_alpha(p, alpha, cfg=QuadratureConfig(epsabs=1e-12, epsrel=1e-10)):
    """Increment constant S = int_-pi^pi (1-cos w)^p folded_power_sum(alpha, w) dw,
    finite for 1 < alpha < 2p+1."""
    if not (isinstance(p, (int, np.integer)) and p >= 1):
        raise DomainError("p must be a positive integer")
    if not (1.0 < alpha < 2 * p + 1):
        raise DomainError("need 1 < alpha < 2p+1")
    expo = 2.0 * p - alpha

    def smooth(w):
        # integrand with the algebraic w^{2p-alpha} endpoint factor divided out,
        # assembled in log space so no intermediate piece can overflow
        if w == 0.0:
            return 0.5**p
        lg = math.log(2.0) + 2.0 * math.log(math.sin(0.5 * w))
        return math.exp(p * lg + _log_folded_power_sum(alpha, w) - expo * math.log(w))

    val = _quad(smooth, 0.0, math.pi, cfg, "s_p_alpha", weight="alg", wvar=(expo, 0.0))
    return 2.0 * val


def kolmogorov_sigma2(f_delta, cfg=None):
    """One-step prediction error variance 2 pi exp{(1/2pi) int log f_Delta dw}
    of the stationary sequence with spectral density f_Delta on [-pi, pi]."""
    cfg = cfg or QuadratureConfig()

    def logf(w):
        val = float(f_delta(w))
        if not (val > 0.0):
            raise NonPositiveDensity(f"f({w}) = {val}")
        return math.log(val)

    val = _quad(logf, -np.pi, np.pi, cfg, "kolmogorov_sigma2")
    return TWO_PI * math.exp(val / TWO_PI)


def wold_variance_asymptotics_rv(spec, delta):
    """Asymptotic innovation variance 2 pi C_alpha ell(1/Delta) Delta^(alpha-1)."""
    if not (delta > 0):
        raise DomainError("delta must be positive")
    return TWO_PI * c_alpha(spec.alpha) * float(spec.ell_at(1.0 / delta)) * delta ** (spec.alpha - 1.0)


def ficarma_spectral_density(model, d, omega):
    """Fractionally integrated CARMA density
    sigma^2/(2 pi) |w|^(-2d) |b(iw)/a(iw)|^2, 0 < d < 1/2."""
    if not (0.0 < d < 0.5):
        raise DomainError("need 0 < d < 0.5")
    omega = np.asarray(omega, dtype=np.float64)
    if np.any(omega == 0.0):
        raise DomainError("omega must be nonzero")
    out = np.abs(omega) ** (-2.0 * d) * carma_spectral_density(model, omega)
    return out if out.shape else float(out)


def von_karman_spectrum(omega, c, u_bar, c_ell, ell_bar):
    """Isotropic energy spectrum
    C Ubar^(-2/3) |w|^(-5/3) (w^2/(w^2 + c_ell/ellbar^2))^(17/6),
    evaluated in the cancellation-free form |w|^4 (w^2 + c_ell/ellbar^2)^(-17/6)."""
    if min(c, u_bar, c_ell, ell_bar) <= 0:
        raise DomainError("von Karman parameters must be positive")
    omega = np.asarray(omega, dtype=np.float64)
    out = c * u_bar ** (-2.0 / 3.0) * np.abs(omega) ** 4 * (omega**2 + c_ell / ell_bar**2) ** (-17.0 / 6.0)
    return out if out.shape else float(out)


def kaimal_spectrum(omega, v, ell_bar):
    """Longitudinal energy spectrum 4 v ellbar / (1 + 6 ellbar |w|)^(5/3); the
    absolute value keeps the density even."""
    if min(v, ell_bar) <= 0:
        raise DomainError("Kaimal parameters must be positive")
    omega = np.asarray(omega, dtype=np.float64)
    out = 4.0 * v * ell_bar / (1.0 + 6.0 * ell_bar * np.abs(omega)) ** (5.0 / 3.0)
    return out if out.shape else float(out)


def turbulence_spectra(kind, params, omega):
    """Dispatch to the closed-form turbulence densities; kind is 'vonKarman'
    (params c, u_bar, c_ell, ell_bar) or 'Kaimal' (params v, ell_bar)."""
    if kind == "vonKarman":
        return von_karman_spectrum(omega, **params)
    if kind == "Kaimal":
        return kaimal_spectrum(omega, **params)
    raise DomainError(f"unknown turbulence spectrum kind: {kind!r}")


def differenced_density_limit(alpha, omega):
    """Bounded limit shape 2^(alpha/2) (1-cos w)^(alpha/2) folded_power_sum(alpha, w)
    of the rescaled density of the (alpha/2)-differenced sampled sequence;
    tends to 1 as w -> 0."""
    omega = np.atleast_1d(np.asarray(omega, dtype=np.float64))
    out = np.array(
        [
            math.exp(0.5 * alpha * math.log(2.0 - 2.0 * math.cos(w)) + _log_folded_power_sum(alpha, w))
            for w in omega
        ]
    )
    return out if out.size > 1 else float(out[0])


def tail_index_diagnostic(freqs, values, band):
    """Estimated regular-variation index: minus the least-squares slope of
    log values against log freqs over the band (w_lo, w_hi)."""
    freqs = np.asarray(freqs, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if freqs.shape != values.shape:
        raise DomainError("freqs and values must have matching shapes")
    lo, hi = band
    mask = (freqs >= lo) & (freqs <= hi)
    if int(np.sum(mask)) < 8:
        raise InsufficientPoints(f"only {int(np.sum(mask))} points in band [{lo}, {hi}]")
    if np.any(values[mask] <= 0):
        raise DomainError("spectral values must be positive in the band")
    slope = np.polyfit(np.log(freqs[mask]), np.log(values[mask]), 1)[0]
    return -float(slope)
