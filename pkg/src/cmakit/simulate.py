"""Samplers for CMA processes.

Three generators, all second-order exact or convergent:

* circulant embedding for Gaussian CMA given any ACVF (the workhorse for the
  gamma kernel, whose ACVF is Whittle-Matern);
* exact state-space recursion for Gaussian CARMA at the output spacing;
* Euler fine-grid integration for compound-Poisson driven CARMA.

Randomness comes from counter-based Philox generators keyed by (seed, stream)
so Monte Carlo replications are reproducible independently of scheduling.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov
from scipy.signal import lfilter

from cmakit.errors import (
    BesselFailure,
    DomainError,
    EmbeddingFailure,
    NonStationaryInit,
)
from cmakit.estimators import SampledSeries
from cmakit.spectral import RegVaryingSpectrum

TWO_PI = 2.0 * np.pi

_BESSEL_REL_TOL = 1e-11
_BESSEL_MAX_REFINE = 4
_SMALL_ARG = 1e-6


def _log_cosh(t):
    return np.abs(t) + np.log1p(np.exp(-2.0 * np.abs(t))) - math.log(2.0)


def _bessel_k_block(nu, x, h):
    """Trapezoid sum of exp(-x cosh t) cosh(nu t) over t = 0, h, 2h, ... with
    adaptive truncation; x is a 1-d array with max(x) <= ~740."""
    anu = abs(nu)
    # truncate once past the integrand peak and below 1e-18 relative
    t_peak = math.asinh(anu / np.min(x)) if anu > 0 else 0.0
    total = 0.5 * np.exp(-x)  # t = 0 term, cosh(0) = 1, trapezoid half weight
    k = 1
    while True:
        t = k * h
        term = np.exp(-x * math.cosh(t) + _log_cosh(anu * t))
        total += term
        if t > t_peak and np.max(term / (total + 1e-300)) < 1e-18:
            break
        if t > 750.0:
            raise BesselFailure(f"truncation not reached for nu = {nu}")
        k += 1
    return h * total


def bessel_k(nu, x):
    """Modified Bessel function K_nu(x), |nu| <= 20, x > 0, via the even
    integral representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.

    The trapezoid rule converges geometrically for this integrand; the step is
    halved until successive values agree to 1e-11 relative.
    """
    if abs(nu) > 20:
        raise DomainError("need |nu| <= 20")
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(x_arr <= 0) or not np.all(np.isfinite(x_arr)):
        raise DomainError("x must be positive and finite")
    out = np.zeros(x_arr.shape)
    live = x_arr <= 740.0  # beyond this K underflows to 0 in double precision
    if np.any(live):
        xs = x_arr[live]
        vals = np.empty_like(xs)
        block = 65536
        for lo in range(0, xs.size, block):
            xb = xs[lo : lo + block]
            h = min(0.25, 1.5 / math.sqrt(float(np.max(xb))))
            prev = _bessel_k_block(nu, xb, h)
            for _ in range(_BESSEL_MAX_REFINE):
                h *= 0.5
                cur = _bessel_k_block(nu, xb, h)
                if np.max(np.abs(cur - prev) / (np.abs(cur) + 1e-300)) < _BESSEL_REL_TOL:
                    break
                prev = cur
            else:
                raise BesselFailure("step refinement did not converge to 1e-11")
            vals[lo : lo + block] = cur
        out[live] = vals
    return out if np.asarray(x).shape else float(out[0])


@dataclass(frozen=True)
class GammaKernelModel:
    """CMA with kernel g(t) = t^(nu-1) e^(-lambda t) on t > 0; square
    integrable for nu > 1/2. Its autocorrelation is Whittle-Matern."""

    nu: float
    lam: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.nu > 0.5):
            raise DomainError("need nu > 1/2 for a square-integrable kernel")
        if not (self.lam > 0):
            raise DomainError("need lambda > 0")
        if not (self.sigma2 > 0):
            raise DomainError("need sigma2 > 0")

    def kernel(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.where(t > 0, np.abs(t) ** (self.nu - 1.0) * np.exp(-self.lam * np.abs(t)), 0.0)
        return out if out.shape else float(out)

    @property
    def gamma0(self):
        return self.sigma2 * (2.0 * self.lam) ** (1.0 - 2.0 * self.nu) * math.gamma(2.0 * self.nu - 1.0)

    def autocorrelation(self, h):
        alpha = self.nu - 0.5
        x = np.abs(self.lam * np.atleast_1d(np.asarray(h, dtype=np.float64)))
        rho = np.ones(x.shape)
        small = x < _SMALL_ARG
        if alpha < 1.0 and np.any(small):
            # two-term small-argument expansion of x^alpha K_alpha(x); the
            # x^(2 alpha) correction is non-negligible for small alpha
            xs = x[small]
            rho[small] = 1.0 + math.gamma(-alpha) / math.gamma(alpha) * (xs / 2.0) ** (2.0 * alpha)
        big = ~small
        if np.any(big):
            xb = x[big]
            rho[big] = (
                2.0 ** (1.5 - self.nu)
                / math.gamma(alpha)
                * xb**alpha
                * bessel_k(alpha, xb)
            )
        return rho if np.asarray(h).shape else float(rho[0])

    def autocovariance(self, h):
        return self.gamma0 * self.autocorrelation(h)

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=np.float64)
        out = self.sigma2 * math.gamma(self.nu) ** 2 / (TWO_PI * (self.lam**2 + omega**2) ** self.nu)
        return out if out.shape else float(out)

    def regvar_spectrum(self):
        return RegVaryingSpectrum(
            alpha=2.0 * self.nu,
            density=self.spectral_density,
            ell_limit=self.sigma2 * math.gamma(self.nu) ** 2 / TWO_PI,
            label=f"gamma(nu={self.nu},lambda={self.lam})",
        )


def gamma_acvf(model, h):
    """Autocovariance gamma(h) = gamma(0) * Whittle-Matern correlation of the
    gamma-kernel CMA."""
    return model.autocovariance(h)


@dataclass(frozen=True)
class SimulationPlan:
    """Fine/output grid layout, sample size, seed and driving noise.

    All drivers are normalized to Var(L_1) = 1; the model's sigma2 scales the
    increments. The compound-Poisson driver uses N(0, 1/rate) jumps.
    """

    fine_delta: float
    out_delta: float
    n_out: int
    seed: int
    driver: str = "gaussian"
    cp_rate: float = 1.0
    stream: int = 0

    def __post_init__(self):
        if not (self.fine_delta > 0 and self.out_delta > 0):
            raise DomainError("grid spacings must be positive")
        ratio = self.out_delta / self.fine_delta
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise DomainError("out_delta must be a positive integer multiple of fine_delta")
        if self.n_out < 2:
            raise DomainError("need n_out >= 2")
        if self.driver not in ("gaussian", "compound-poisson"):
            raise DomainError(f"unknown driver {self.driver!r}")
        if not (self.cp_rate > 0):
            raise DomainError("cp_rate must be positive")

    @property
    def ratio(self):
        return int(round(self.out_delta / self.fine_delta))

    @classmethod
    def refined(cls, out_delta, n_out, seed, factor=16, **kwargs):
        """Plan with the default fine grid out_delta/factor."""
        return cls(fine_delta=out_delta / factor, out_delta=out_delta, n_out=n_out, seed=seed, **kwargs)


def make_rng(seed, stream=0):
    """Counter-based generator keyed by (seed, stream); streams are
    statistically independent and order-independent."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _circulant_eigenvalues(acvf, m_embed, fine_delta):
    lags = np.arange(m_embed + 1) * fine_delta
    gam = np.asarray(acvf(lags), dtype=np.float64)
    row = np.concatenate((gam, gam[-2:0:-1]))
    return np.fft.fft(row).real


def simulate_gaussian_cma(acvf, plan):
    """Exact-in-distribution Gaussian path via circulant embedding of the ACVF
    on the fine grid, subsampled to the output spacing.

    The embedding is nonnegative definite for most decaying ACVFs; marginally
    negative eigenvalues (within 1e-8 of the largest) are clipped, larger ones
    trigger up to two grid doublings before EmbeddingFailure.
    """
    n_fine = plan.n_out * plan.ratio
    m_embed = 1 << max(1, int(math.ceil(math.log2(n_fine))))
    eig = None
    for _ in range(3):
        eig = _circulant_eigenvalues(acvf, m_embed, plan.fine_delta)
        worst = eig.min()
        top = eig.max()
        if top <= 0.0:
            # degenerate zero-variance input
            if np.allclose(eig, 0.0):
                values = np.zeros(plan.n_out)
                return SampledSeries(delta=plan.out_delta, values=values)
            raise EmbeddingFailure("circulant eigenvalues are all non-positive")
        if worst >= -1e-8 * top:
            break
        m_embed *= 2
    else:
        raise EmbeddingFailure(
            f"negative circulant eigenvalues persist after two doublings (min/max = {worst / top:.3g})"
        )
    if eig.min() < 0.0:
        warnings.warn("clipping marginally negative circulant eigenvalues")
        eig = np.clip(eig, 0.0, None)

    rng = make_rng(plan.seed, plan.stream)
    two_m = 2 * m_embed
    re = rng.standard_normal(m_embed + 1)
    im = rng.standard_normal(m_embed - 1)
    w = np.zeros(two_m, dtype=np.complex128)
    w[0] = re[0]
    w[m_embed] = re[m_embed]
    w[1:m_embed] = (re[1:m_embed] + 1j * im) / math.sqrt(2.0)
    w[m_embed + 1 :] = np.conj(w[m_embed - 1 : 0 : -1])
    path = np.fft.fft(np.sqrt(eig / two_m) * w).real[:n_fine]
    values = path[plan.ratio - 1 :: plan.ratio][: plan.n_out]
    return SampledSeries(delta=plan.out_delta, values=values)


def _companion(model):
    p = model.p
    a_mat = np.zeros((p, p))
    if p > 1:
        a_mat[:-1, 1:] = np.eye(p - 1)
    a_mat[-1, :] = -np.asarray(model.a)[::-1]
    e_vec = np.zeros(p)
    e_vec[-1] = 1.0
    b_vec = np.zeros(p)
    b_vec[: len(model.b)] = model.b
    return a_mat, e_vec, b_vec


def _psd_factor(mat, what):
    sym = 0.5 * (mat + mat.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -1e-10 * max(vals.max(), 1e-300):
        raise NonStationaryInit(f"{what} is not nonnegative definite")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _stationary_covariance(model, a_mat, e_vec):
    try:
        v_inf = solve_continuous_lyapunov(a_mat, -model.sigma2 * np.outer(e_vec, e_vec))
    except Exception as exc:
        raise NonStationaryInit(str(exc)) from exc
    if not np.all(np.isfinite(v_inf)):
        raise NonStationaryInit("Lyapunov solve returned non-finite covariance")
    return v_inf


def _step_noise_covariance(model, a_mat, e_vec, delta, n_nodes=64):
    """int_0^delta exp(Au) e e' exp(A'u) sigma2 du by Gauss-Legendre."""
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    u = 0.5 * delta * (nodes + 1.0)
    cov = np.zeros((a_mat.shape[0],) * 2)
    for ui, wi in zip(u, weights):
        m = expm(a_mat * ui) @ e_vec
        cov += wi * np.outer(m, m)
    return 0.5 * delta * model.sigma2 * cov


def _propagate(f_mat, b_vec, x0, shocks):
    """Y_k = b' X_k for X_{k+1} = F X_k + shock_k, k = 0..n-1; shocks is
    (n, p). Scalar state goes through lfilter, general p through a loop."""
    n, p = shocks.shape
    if p == 1:
        zi = np.array([f_mat[0, 0] * x0[0]])
        x_path, _ = lfilter([1.0], [1.0, -f_mat[0, 0]], shocks[:, 0], zi=zi)
        return b_vec[0] * x_path
    out = np.empty(n)
    x = x0.copy()
    for k in range(n):
        x = f_mat @ x + shocks[k]
        out[k] = b_vec @ x
    return out


def simulate_carma_statespace(model, plan):
    """Sample a CARMA path through its state-space form.

    Gaussian driver: exact discretization at the output spacing, X_{k+1} =
    exp(A delta) X_k + w_k with w_k drawn from the integrated noise
    covariance, stationary Gaussian start. Compound-Poisson driver: Euler on
    the fine grid (refinement >= 16 required), jumps N(0, 1/rate), with a
    second-order-correct Gaussian stationary start.
    """
    a_mat, e_vec, b_vec = _companion(model)
    v_inf = _stationary_covariance(model, a_mat, e_vec)
    l_init = _psd_factor(v_inf, "stationary covariance")
    rng = make_rng(plan.seed, plan.stream)
    x0 = l_init @ rng.standard_normal(model.p)

    if plan.driver == "gaussian":
        f_mat = expm(a_mat * plan.out_delta)
        step_cov = _step_noise_covariance(model, a_mat, e_vec, plan.out_delta)
        l_step = _psd_factor(step_cov, "step noise covariance")
        shocks = rng.standard_normal((plan.n_out, model.p)) @ l_step.T
        values = _propagate(f_mat, b_vec, x0, shocks)
        return SampledSeries(delta=plan.out_delta, values=values)

    if plan.ratio < 16:
        raise DomainError("compound-poisson driver needs out_delta/fine_delta >= 16")
    n_fine = plan.n_out * plan.ratio
    counts = rng.poisson(plan.cp_rate * plan.fine_delta, n_fine)
    increments = rng.standard_normal(n_fine) * np.sqrt(counts * (model.sigma2 / plan.cp_rate))
    fine_path = _euler_path_from_increments(model, x0, increments, plan.fine_delta)
    values = fine_path[plan.ratio - 1 :: plan.ratio][: plan.n_out]
    return SampledSeries(delta=plan.out_delta, values=values)


def _euler_path_from_increments(model, x0, increments, dt):
    """Explicit Euler output path Y_k driven by given noise increments."""
    a_mat, e_vec, b_vec = _companion(model)
    f_mat = np.eye(model.p) + a_mat * dt
    shocks = increments[:, None] * e_vec[None, :]
    return _propagate(f_mat, b_vec, np.asarray(x0, dtype=np.float64), shocks)


def _exact_path_from_increments(model, x0, increments, dt):
    """Reference path: matrix-exponential propagation with the same increments
    applied at step ends; the strong-order benchmark for the Euler path."""
    a_mat, e_vec, b_vec = _companion(model)
    f_mat = expm(a_mat * dt)
    shocks = increments[:, None] * e_vec[None, :]
    return _propagate(f_mat, b_vec, np.asarray(x0, dtype=np.float64), shocks)
