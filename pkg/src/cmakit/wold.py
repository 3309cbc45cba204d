"""Small-Delta asymptotics of the sampled-process Wold representation.

The sampled CARMA sequence Y_n = Y_{n Delta} is an ARMA(p, p-1) process. As
Delta -> 0 its moving-average polynomial factorizes, up to o(1), into

    prod_{i=1}^{p-q-1} (1 + eta(xi_i) z) * prod_{k=1}^{q} (1 - zeta_k z),

where the xi_i are the zeros of the order-(p-q-1) member of a family of
polynomials arising from the odd-power series coefficients of
sinh(z)/(cosh z - 1 + x), eta picks the contraction branch of the quadratic
eta^2 - 2(xi - 1) eta + 1 = 0, and zeta_k = 1 + mu_k Delta for the
moving-average zeros mu_k. The innovation variance and MA(infinity)
coefficients of the sampled process then admit the closed forms implemented
here, and (sigma_Delta / sqrt(Delta)) psi_{floor(t/Delta)} approximates the
continuous-time kernel sigma * g(t).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from cmakit.carma import _require_real, _sort_complex
from cmakit.errors import (
    DomainError,
    NearMultipleRoots,
    OrderTooLarge,
    UnitModulusBranch,
)

MAX_ALPHA_ORDER = 12
_DENOM_TOL = 1e-12


def _numerator_coefficients(k):
    """Integer coefficients (ascending) of the degree-k numerator N_k, from the
    exact recurrence N_k(x) = x^k - sum_{j<k} C(2k+1, 2j+1) N_j(x) x^(k-1-j),
    N_0 = 1. All arithmetic is exact (python ints)."""
    table = [[1]]
    for kk in range(1, k + 1):
        coeffs = [0] * kk + [1]  # x^kk
        for j in range(kk):
            c = math.comb(2 * kk + 1, 2 * j + 1)
            shift = kk - 1 - j
            for deg, val in enumerate(table[j]):
                coeffs[deg + shift] -= c * val
        table.append(coeffs)
    return table[k]


@dataclass(frozen=True)
class AlphaPolynomial:
    """alpha_k(x) = N_k(x) / ((2k+1)! x^(k+1)) with integer numerator N_k."""

    order: int
    numerator: tuple  # ascending integer coefficients of N_k, monic
    roots: np.ndarray = field(repr=False)  # zeros xi_{k,i} of N_k

    @property
    def factorial(self):
        return math.factorial(2 * self.order + 1)

    @property
    def pole_order(self):
        return self.order + 1

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.complex128)
        num = np.polyval(np.array(self.numerator[::-1], dtype=np.float64), x)
        out = num / (self.factorial * x**self.pole_order)
        return out if out.shape else complex(out)


def alpha_polynomial(k):
    """The k-th coefficient polynomial of the odd-power expansion of
    sinh(z)/(cosh z - 1 + x); supports k <= 12."""
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise DomainError("k must be a non-negative integer")
    if k > MAX_ALPHA_ORDER:
        raise OrderTooLarge(f"alpha polynomials supported up to k = {MAX_ALPHA_ORDER}")
    coeffs = _numerator_coefficients(int(k))
    if k == 0:
        roots = np.array([], dtype=np.complex128)
    else:
        roots = _sort_complex(np.roots(np.array(coeffs[::-1], dtype=np.float64)))
    return AlphaPolynomial(order=int(k), numerator=tuple(coeffs), roots=roots)


def eta_of_xi(xi):
    """The root of eta^2 - 2(xi - 1) eta + 1 = 0 with modulus below one.

    The two roots are reciprocal, so exactly one lies inside the unit circle
    unless both sit on it, in which case no contraction branch exists.
    """
    z = complex(xi) - 1.0
    root = np.sqrt(complex(z * z - 1.0))
    lo, hi = sorted((z - root, z + root), key=abs)
    if abs(abs(lo) - 1.0) < 1e-12 and abs(abs(hi) - 1.0) < 1e-12:
        raise UnitModulusBranch(f"both branches have unit modulus at xi = {xi}")
    return lo


@dataclass(frozen=True)
class MaFactorization:
    """Asymptotic factor data of the sampled-process MA polynomial."""

    delta: float
    etas: np.ndarray
    zetas: np.ndarray
    sigma2_delta: float

    def ma_coefficients(self):
        """Real coefficients (ascending, degree p-1) of
        prod_i (1 + eta_i z) * prod_k (1 - zeta_k z)."""
        poly = np.ones(1, dtype=np.complex128)
        for e in self.etas:
            poly = np.convolve(poly, np.array([1.0, e]))
        for z in self.zetas:
            poly = np.convolve(poly, np.array([1.0, -z]))
        return _require_real(poly, "ma_coefficients")


def ma_factorization(model, delta):
    if not (delta > 0):
        raise DomainError("delta must be positive")
    k = model.p - model.q - 1
    alpha = alpha_polynomial(k)
    etas = np.array([eta_of_xi(x) for x in alpha.roots], dtype=np.complex128)
    zetas = 1.0 + model.ma_roots.values * delta

    pq = model.p - model.q
    denom = math.factorial(2 * pq - 1)
    prod = np.prod(etas) * np.prod(zetas) if (etas.size or zetas.size) else 1.0
    prod = complex(prod)
    if abs(prod.imag) > 1e-10 * (1.0 + abs(prod.real)):
        raise DomainError("eta/zeta product is not real; root set is inconsistent")
    s2 = (
        delta ** (2 * pq - 1)
        * math.exp(-model.a1 * delta)
        * model.sigma2
        / (denom * prod.real)
    )
    if not (s2 > 0):
        raise DomainError(f"asymptotic variance is not positive at delta = {delta}")
    return MaFactorization(delta=float(delta), etas=etas, zetas=zetas, sigma2_delta=s2)


def asymptotic_sigma2_delta(model, delta):
    """Leading-order innovation variance of the sampled sequence:
    Delta^(2(p-q)-1) e^(-a_1 Delta) sigma^2 /
    ((2(p-q)-1)! prod_i eta(xi_i) prod_k (1 + mu_k Delta))."""
    return ma_factorization(model, delta).sigma2_delta


def asymptotic_psi(model, delta, j_max, normalized=True):
    """Leading-order MA(infinity) coefficients psi_0..psi_jmax of the sampled
    sequence, psi_j = sum_r w_r e^{j lambda_r Delta} with weights determined by
    the eta/zeta factorization; normalized so psi_0 = 1 unless disabled."""
    if j_max < 0:
        raise DomainError("j_max must be non-negative")
    fac = ma_factorization(model, delta)
    lam = model.ar_roots.values
    p = lam.size
    w = np.zeros(p, dtype=np.complex128)
    for r in range(p):
        num = 1.0 + 0.0j
        erl = np.exp(-lam[r] * delta)
        for e in fac.etas:
            num *= 1.0 + e * erl
        for z in fac.zetas:
            num *= 1.0 - z * erl
        others = np.delete(np.arange(p), r)
        den = np.prod(1.0 - np.exp((lam[others] - lam[r]) * delta)) if p > 1 else 1.0
        if abs(den) < _DENOM_TOL:
            raise NearMultipleRoots(
                f"sampled autoregressive roots coincide at delta = {delta}"
            )
        w[r] = num / den
    j = np.arange(j_max + 1)
    psi = np.exp(np.outer(j, lam * delta)) @ w
    psi = _require_real(psi, "asymptotic_psi")
    if normalized:
        if psi[0] == 0:
            raise DomainError("psi_0 vanished; cannot normalize")
        psi = psi / psi[0]
    return psi


@dataclass(frozen=True)
class WoldApprox:
    """Step-function kernel approximation (sigma_Delta/sqrt(Delta)) psi_floor(t/Delta)."""

    delta: float
    t_max: float
    psi: np.ndarray
    sigma2_delta: float

    @property
    def scale(self):
        return math.sqrt(self.sigma2_delta / self.delta)

    @property
    def j_max(self):
        return self.psi.size - 1

    def evaluate(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t > self.t_max * (1 + 1e-12)):
            raise DomainError(f"kernel approximation tabulated only up to t = {self.t_max}")
        idx = np.floor(t / self.delta + 1e-12).astype(int)
        out = np.where(t < 0, 0.0, self.scale * self.psi[np.clip(idx, 0, self.j_max)])
        return out if out.shape else float(out)

    __call__ = evaluate


def wold_kernel_approx(model, delta, t_max):
    if not (t_max > 0):
        raise DomainError("t_max must be positive")
    j_max = int(np.floor(t_max / delta + 1e-12))
    psi = asymptotic_psi(model, delta, j_max)
    s2 = asymptotic_sigma2_delta(model, delta)
    return WoldApprox(delta=float(delta), t_max=float(t_max), psi=psi, sigma2_delta=s2)
