"""Continuous-time ARMA models: kernels, spectra, autocovariances, sampling.

A CARMA(p, q) process is the stationary solution of a(D)Y = b(D)DL for a Levy
process L with Var(L_1) = sigma^2, where a and b are polynomials of degrees p
and q < p. With distinct autoregressive zeros lambda_1..lambda_p, all in the
open left half-plane, the process is a causal moving average with kernel

    g(t) = sum_r b(lambda_r)/a'(lambda_r) * exp(lambda_r t),  t > 0,

and the sampled sequence Y_{n Delta} has an exact spectral density given by a
residue sum over the same roots. Everything here works in complex arithmetic
internally and enforces realness at the public boundary.
"""

import numpy as np

from cmakit.errors import CmakitError, DomainError, NearMultipleRoots

ROOT_RESIDUAL_TOL = 1e-12  # relative to the polynomial evaluation scale
ROOT_SEPARATION_TOL = 1e-9
REALNESS_TOL = 1e-10
PERTURBATION = 1e-6


def _require_real(values, what):
    """Strip an imaginary part that should only be rounding noise."""
    values = np.asarray(values)
    scale = 1.0 + np.abs(values.real)
    if np.any(np.abs(values.imag) > REALNESS_TOL * scale):
        worst = float(np.max(np.abs(values.imag) / scale))
        raise CmakitError(
            f"{what}: imaginary residue {worst:.3e} exceeds the realness tolerance"
        )
    return values.real.copy()


def _sort_complex(values):
    order = np.lexsort((values.imag, values.real))
    return values[order]


def polynomial_roots(coeffs, residual_tol=ROOT_RESIDUAL_TOL):
    """Roots of a real polynomial (descending coefficients) via the companion
    matrix, Newton-polished, with a residual check relative to the evaluation
    scale sum |c_i| |z|^i (an absolute 1e-12 would be unattainable for large
    coefficient scales in double precision)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    roots = np.roots(coeffs)
    dcoeffs = np.polyder(coeffs)
    for _ in range(3):
        pz = np.polyval(coeffs, roots)
        dz = np.polyval(dcoeffs, roots)
        safe = np.abs(dz) > 0
        step = np.zeros_like(roots)
        step[safe] = pz[safe] / dz[safe]
        roots = roots - step
    scale = np.polyval(np.abs(coeffs), np.abs(roots))
    bad = np.abs(np.polyval(coeffs, roots)) > residual_tol * np.maximum(scale, 1.0)
    if np.any(bad):
        raise CmakitError(
            f"root residual above {residual_tol:g} of the evaluation scale "
            f"for {int(np.sum(bad))} root(s)"
        )
    return _sort_complex(roots)


class ComplexRootSet:
    """A conjugate-closed set of polynomial roots, sorted by (real, imag)."""

    def __init__(self, values):
        values = _sort_complex(np.asarray(values, dtype=np.complex128))
        conj = _sort_complex(values.conj())
        if values.size and np.max(np.abs(values - conj)) > ROOT_SEPARATION_TOL:
            raise DomainError("root set is not closed under conjugation")
        self.values = values

    @classmethod
    def from_polynomial(cls, coeffs):
        return cls(polynomial_roots(coeffs))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def min_separation(self):
        if len(self.values) < 2:
            return np.inf
        diff = self.values[:, None] - self.values[None, :]
        off = ~np.eye(len(self.values), dtype=bool)
        return float(np.min(np.abs(diff[off])))

    def max_real(self):
        return float(np.max(self.values.real)) if len(self.values) else -np.inf


def _spread_coincident(values, tol=ROOT_SEPARATION_TOL, shift=PERTURBATION):
    """Separate coincident roots by symmetric imaginary offsets of +-shift,
    preserving conjugate closure (groups with negative imaginary center are
    mirrored from their positive partners)."""
    values = np.array(values, dtype=np.complex128)
    used = np.zeros(len(values), dtype=bool)
    groups = []
    for i in range(len(values)):
        if used[i]:
            continue
        members = [i]
        used[i] = True
        for j in range(i + 1, len(values)):
            if not used[j] and abs(values[j] - values[i]) <= tol:
                members.append(j)
                used[j] = True
        groups.append(members)

    out = values.copy()
    handled = set()
    for members in groups:
        if len(members) == 1 or members[0] in handled:
            continue
        center = values[members[0]]
        n = len(members)
        offsets = (np.arange(n) - (n - 1) / 2.0) * 2.0 * shift
        if abs(center.imag) <= tol:
            for k, idx in enumerate(members):
                out[idx] = center.real + 1j * offsets[k]
        elif center.imag > 0:
            # locate the mirror group and keep the pair conjugate
            mirror = None
            for other in groups:
                if len(other) == n and abs(values[other[0]] - center.conjugate()) <= tol:
                    mirror = other
                    break
            if mirror is None:
                raise DomainError("coincident complex roots without conjugate partners")
            for k, idx in enumerate(members):
                out[idx] = center + 1j * offsets[k]
            for k, idx in enumerate(mirror):
                out[idx] = (center + 1j * offsets[k]).conjugate()
            handled.add(mirror[0])
        handled.add(members[0])
    return out


class CarmaModel:
    """CARMA(p, q) model a(z) = z^p + a[0] z^(p-1) + ... + a[p-1],
    b(z) = b[0] + b[1] z + ... + b[q] z^q with b[q] = 1.

    Parameters
    ----------
    a : array of the p autoregressive coefficients (a_1 .. a_p).
    b : array of the q+1 moving-average coefficients (b_0 .. b_q), b_q = 1.
        For q = 0 pass [1.0].
    sigma2 : variance of the driving Levy process per unit time.
    separate_close_roots : when True, coincident autoregressive roots are
        perturbed by +-1e-6i instead of raising NearMultipleRoots.
    """

    def __init__(self, a, b, sigma2=1.0, separate_close_roots=False):
        a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        if a.ndim != 1 or a.size < 1:
            raise DomainError("a must be a non-empty coefficient vector")
        if b.ndim != 1 or b.size < 1 or b.size > a.size:
            raise DomainError("need 0 <= q < p, so len(b) must be in 1..len(a)")
        if b[-1] != 1.0:
            raise DomainError("normalization requires b_q = 1")
        if not np.isfinite(a).all() or not np.isfinite(b).all():
            raise DomainError("coefficients must be finite")
        if not (sigma2 > 0):
            raise DomainError("sigma2 must be positive")
        self.a = a
        self.b = b
        self.sigma2 = float(sigma2)

        ar = polynomial_roots(np.r_[1.0, a])
        sep = ComplexRootSet(ar).min_separation()
        if sep <= ROOT_SEPARATION_TOL:
            if not separate_close_roots:
                raise NearMultipleRoots(
                    f"autoregressive roots within {sep:.2e}; pass "
                    "separate_close_roots=True to perturb them by +-1e-6i"
                )
            ar = _spread_coincident(ar)
        self.ar_roots = ComplexRootSet(ar)
        if self.ar_roots.min_separation() <= ROOT_SEPARATION_TOL:
            raise NearMultipleRoots("autoregressive roots remain coincident after perturbation")
        if self.ar_roots.max_real() >= 0:
            raise DomainError("autoregressive roots must lie in the open left half-plane")

        if self.q > 0:
            self.ma_roots = ComplexRootSet.from_polynomial(b[::-1])
            if self.ma_roots.max_real() >= 0:
                raise DomainError("moving-average roots must lie in the open left half-plane")
        else:
            self.ma_roots = ComplexRootSet(np.array([], dtype=np.complex128))
        if self.q > 0:
            cross = np.abs(
                self.ar_roots.values[:, None] - self.ma_roots.values[None, :]
            )
            if np.min(cross) <= ROOT_SEPARATION_TOL:
                raise DomainError("a and b share a zero; the model is not identifiable")

        # residues b(lambda_r)/a'(lambda_r), fixed by the model
        da = np.polyder(np.r_[1.0, self.a])
        lam = self.ar_roots.values
        self._weights = np.polyval(self.b[::-1], lam) / np.polyval(da, lam)

    @property
    def p(self):
        return self.a.size

    @property
    def q(self):
        return self.b.size - 1

    @property
    def a1(self):
        return float(self.a[0])

    def __repr__(self):
        return (
            f"CarmaModel(p={self.p}, q={self.q}, a={self.a.tolist()}, "
            f"b={self.b.tolist()}, sigma2={self.sigma2})"
        )

    def kernel(self, t):
        return carma_kernel(self, t)

    def spectral_density(self, omega):
        return carma_spectral_density(self, omega)

    def autocovariance(self, h):
        return carma_autocovariance(self, h)

    def sampled_spectral_density(self, delta, omega):
        return sampled_spectral_density_exact(self, delta, omega)

    def sampled_ar_coefficients(self, delta):
        return sampled_ar_polynomial(self, delta)

    def kernel_object(self):
        return CmaKernel(lambda t: carma_kernel(self, t), label=f"carma({self.p},{self.q})")


def carma_kernel(model, t):
    """Moving-average kernel g(t); zero on t <= 0."""
    t = np.asarray(t, dtype=np.float64)
    lam = model.ar_roots.values
    pos = t > 0
    out = np.zeros(t.shape, dtype=np.complex128)
    tp = t[pos]
    out[pos] = np.sum(model._weights[:, None] * np.exp(np.outer(lam, tp)), axis=0)
    res = _require_real(out, "carma_kernel")
    return res if res.shape else float(res)


def carma_spectral_density(model, omega):
    """Spectral density sigma^2 |b(i w)|^2 / (2 pi |a(i w)|^2) of Y."""
    omega = np.asarray(omega, dtype=np.float64)
    iw = 1j * omega
    num = np.abs(np.polyval(model.b[::-1], iw)) ** 2
    den = np.abs(np.polyval(np.r_[1.0, model.a], iw)) ** 2
    out = model.sigma2 / (2.0 * np.pi) * num / den
    return out if out.shape else float(out)


def carma_autocovariance(model, h):
    """ACVF gamma(h) = sigma^2 sum_{r,s} c_r c_s e^{lambda_r |h|} / (-lambda_r - lambda_s)."""
    h = np.abs(np.asarray(h, dtype=np.float64))
    lam = model.ar_roots.values
    c = model._weights
    out = np.zeros(h.shape, dtype=np.complex128)
    for r in range(lam.size):
        coef = np.sum(c[r] * c / (-lam[r] - lam))
        out += coef * np.exp(lam[r] * h)
    res = _require_real(model.sigma2 * out, "carma_autocovariance")
    return res if res.shape else float(res)


def sampled_spectral_density_exact(model, delta, omega):
    """Spectral density of the sampled sequence (Y_{n Delta}) on [-pi, pi].

    Residue form: -sigma^2/(2 pi) * sum_r b(l)b(-l)/(a'(l)a(-l)) *
    sinh(Delta l)/(cosh(Delta l) - cos w) over the autoregressive roots l.
    """
    if not (delta > 0):
        raise DomainError("delta must be positive")
    omega = np.asarray(omega, dtype=np.float64)
    lam = model.ar_roots.values
    acoef = np.r_[1.0, model.a]
    da = np.polyder(acoef)
    bcoef = model.b[::-1]
    out = np.zeros(omega.shape, dtype=np.complex128)
    cosw = np.cos(omega)
    for l in lam:
        resid = (
            np.polyval(bcoef, l)
            * np.polyval(bcoef, -l)
            / (np.polyval(da, l) * np.polyval(acoef, -l))
        )
        out += resid * np.sinh(delta * l) / (np.cosh(delta * l) - cosw)
    res = _require_real(-model.sigma2 / (2.0 * np.pi) * out, "sampled_spectral_density_exact")
    return res if res.shape else float(res)


def sampled_ar_polynomial(model, delta):
    """Coefficients c_1..c_p of prod_j (1 - e^{lambda_j Delta} z), ascending in z
    (the constant term 1 is implied)."""
    if not (delta > 0):
        raise DomainError("delta must be positive")
    poly = np.ones(1, dtype=np.complex128)
    for lam in model.ar_roots.values:
        poly = np.convolve(poly, np.array([1.0, -np.exp(lam * delta)]))
    return _require_real(poly[1:], "sampled_ar_polynomial")


class CmaKernel:
    """Causal kernel wrapper: evaluates to fn(t) for t > 0 and 0 elsewhere."""

    def __init__(self, fn, sigma=1.0, label=""):
        self.fn = fn
        self.sigma = float(sigma)
        self.label = label

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape)
        pos = t > 0
        if np.any(pos):
            out[pos] = np.asarray(self.fn(t[pos]), dtype=np.float64)
        return out if out.shape else float(out)

    @classmethod
    def from_carma(cls, model):
        return cls(lambda t: carma_kernel(model, t), label=f"carma({model.p},{model.q})")

    def l2_norm(self, upper=np.inf):
        from scipy.integrate import quad

        val, _ = quad(lambda u: float(self(u)) ** 2, 0.0, upper, limit=200)
        return float(np.sqrt(val))
