"""Pure-python backend mirroring cmakit._core._recursions.

The innovations table is obtained from the unit-lower-triangular Cholesky
factorization of the Toeplitz covariance matrix, which satisfies the same
triangular system as the textbook recursion; the MA expansion is an IIR
impulse response. Both are LAPACK-backed, so this module stays usable when the
compiled extension is unavailable, just slower on the recursions that the
extension unrolls.
"""

import numpy as np
import scipy.linalg
import scipy.signal

BACKEND = "python"

MAX_M = 100_000  # sanity guard, matches no physical limit in the compiled path


def innovations_recursion(gamma, m):
    gamma = np.ascontiguousarray(gamma, dtype=np.float64)
    if m < 0:
        raise ValueError("m must be non-negative")
    if gamma.shape[0] < m + 1:
        raise ValueError("need gamma at lags 0..m")
    if gamma[0] <= 0.0:
        raise ValueError("non-positive innovation variance at step 0")
    cov = scipy.linalg.toeplitz(gamma[: m + 1])
    try:
        lower = scipy.linalg.cholesky(cov, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"non-positive innovation variance ({exc})") from None
    d = np.diag(lower)
    # Gamma = L D L' with unit-lower L: scale each column by its pivot
    coeffs = lower / d[None, :]
    theta = np.zeros((m + 1, m + 1))
    for k in range(1, m + 1):
        theta[k, 1 : k + 1] = coeffs[k, k - 1 :: -1]
    return theta, d**2


def levinson_recursion(gamma, m):
    gamma = np.ascontiguousarray(gamma, dtype=np.float64)
    if m < 1:
        raise ValueError("m must be at least 1")
    if gamma.shape[0] < m + 1:
        raise ValueError("need gamma at lags 0..m")
    if gamma[0] <= 0.0:
        raise ValueError("non-positive innovation variance at step 0")
    phi = np.zeros(m)
    v = gamma[0]
    for k in range(1, m + 1):
        head = phi[: k - 1]
        ref = (gamma[k] - head @ gamma[k - 1 : 0 : -1]) / v
        head -= ref * head[::-1]
        phi[k - 1] = ref
        v *= 1.0 - ref * ref
        if v <= 0.0:
            raise ValueError(f"non-positive innovation variance at step {k}")
    return phi, v


def ma_expansion(phi, jmax):
    if jmax < 0:
        raise ValueError("jmax must be non-negative")
    phi = np.asarray(phi, dtype=np.float64)
    impulse = np.zeros(jmax + 1)
    impulse[0] = 1.0
    if phi.size == 0:
        return impulse
    return scipy.signal.lfilter([1.0], np.r_[1.0, -phi], impulse)


# Euler-Maclaurin tail: Bernoulli B_{2j}/(2j)! for j = 1..6
_BFACT = np.array(
    [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ]
)
_EM_N = 12


def _hurwitz(s, r):
    r = np.asarray(r, dtype=np.float64)
    k = np.arange(_EM_N)
    acc = np.sum((r[..., None] + k) ** (-s), axis=-1)
    base = r + _EM_N
    acc += base ** (1.0 - s) / (s - 1.0) + 0.5 * base**-s
    term = base ** (-s - 1.0)
    binv = base**-2.0
    poch = s
    for j in range(6):
        acc = acc + _BFACT[j] * poch * term
        poch *= (s + 2 * j + 1) * (s + 2 * j + 2)
        term = term * binv
    return acc


def hurwitz_zeta_scalar(s, r):
    return float(_hurwitz(float(s), float(r)))


def hurwitz_zeta_array(s, r):
    return _hurwitz(float(s), np.ascontiguousarray(r, dtype=np.float64))
