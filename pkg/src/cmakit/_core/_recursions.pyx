# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hot recursions: innovations, Durbin-Levinson, MA expansion, Hurwitz zeta.

These are the sequential loops that dominate estimator runtime. The module is
optional; cmakit._core._fallback provides the same interface in numpy/LAPACK.
Errors are raised as plain ValueError so this module stays dependency free;
callers translate them into the package exception types.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def innovations_recursion(double[::1] gamma, Py_ssize_t m):
    """Innovations algorithm on an ACVF slice gamma[0..m].

    Returns (theta, v): theta[k, j] holds the coefficient applied to the j-th
    most recent innovation at step k (1 <= j <= k), v[k] the one-step mean
    squared prediction error after k observations.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if gamma.shape[0] < m + 1:
        raise ValueError("need gamma at lags 0..m")
    theta_arr = np.zeros((m + 1, m + 1), dtype=np.float64)
    v_arr = np.zeros(m + 1, dtype=np.float64)
    cdef double[:, ::1] theta = theta_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t k, j, i
    cdef double s

    if gamma[0] <= 0.0:
        raise ValueError("non-positive innovation variance at step 0")
    v[0] = gamma[0]
    for k in range(1, m + 1):
        for j in range(k):
            s = gamma[k - j]
            for i in range(j):
                s -= theta[j, j - i] * theta[k, k - i] * v[i]
            theta[k, k - j] = s / v[j]
        s = gamma[0]
        for j in range(k):
            s -= theta[k, k - j] * theta[k, k - j] * v[j]
        if s <= 0.0:
            raise ValueError(f"non-positive innovation variance at step {k}")
        v[k] = s
    return theta_arr, v_arr


def levinson_recursion(double[::1] gamma, Py_ssize_t m):
    """Durbin-Levinson fit of an order-m AR model to gamma[0..m].

    Returns (phi, tau2) where phi are the prediction coefficients
    (X_t ~ phi[0] X_{t-1} + ... + phi[m-1] X_{t-m}) and tau2 the final
    prediction error variance.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if gamma.shape[0] < m + 1:
        raise ValueError("need gamma at lags 0..m")
    if gamma[0] <= 0.0:
        raise ValueError("non-positive innovation variance at step 0")
    phi_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] phi = phi_arr
    cdef double v = gamma[0]
    cdef double ref, s, lo, hi
    cdef Py_ssize_t k, j, a, b

    for k in range(1, m + 1):
        s = gamma[k]
        for j in range(1, k):
            s -= phi[j - 1] * gamma[k - j]
        ref = s / v
        # phi_{k,j} = phi_{k-1,j} - ref * phi_{k-1,k-j}, updated in place
        a = 0
        b = k - 2
        while a < b:
            lo = phi[a]
            hi = phi[b]
            phi[a] = lo - ref * hi
            phi[b] = hi - ref * lo
            a += 1
            b -= 1
        if a == b:
            phi[a] = phi[a] - ref * phi[a]
        phi[k - 1] = ref
        v = v * (1.0 - ref * ref)
        if v <= 0.0:
            raise ValueError(f"non-positive innovation variance at step {k}")
    return phi_arr, v


def ma_expansion(double[::1] phi, Py_ssize_t jmax):
    """Impulse response beta[0..jmax] of the AR filter with coefficients phi."""
    if jmax < 0:
        raise ValueError("jmax must be non-negative")
    beta_arr = np.zeros(jmax + 1, dtype=np.float64)
    cdef double[::1] beta = beta_arr
    cdef Py_ssize_t p = phi.shape[0]
    cdef Py_ssize_t j, k, kmax
    cdef double s
    beta[0] = 1.0
    for j in range(1, jmax + 1):
        kmax = j if j < p else p
        s = 0.0
        for k in range(1, kmax + 1):
            s += phi[k - 1] * beta[j - k]
        beta[j] = s
    return beta_arr


# Bernoulli numbers B_{2j} divided by (2j)!, j = 1..6
cdef double[6] _BFACT
_BFACT[0] = 1.0 / 12.0
_BFACT[1] = -1.0 / 720.0
_BFACT[2] = 1.0 / 30240.0
_BFACT[3] = -1.0 / 1209600.0
_BFACT[4] = 1.0 / 47900160.0
_BFACT[5] = -691.0 / 1307674368000.0

cdef Py_ssize_t _EM_N = 12


cdef double _hurwitz(double s, double r) except? -1.0:
    cdef double acc = 0.0
    cdef double base, binv, term, poch
    cdef Py_ssize_t k, j
    for k in range(_EM_N):
        acc += (r + k) ** (-s)
    base = r + _EM_N
    acc += base ** (1.0 - s) / (s - 1.0)
    acc += 0.5 * base ** (-s)
    binv = 1.0 / (base * base)
    term = base ** (-s - 1.0)
    poch = s
    for j in range(6):
        acc += _BFACT[j] * poch * term
        poch *= (s + 2 * j + 1) * (s + 2 * j + 2)
        term *= binv
    return acc


def hurwitz_zeta_scalar(double s, double r):
    return _hurwitz(s, r)


def hurwitz_zeta_array(double s, double[::1] r):
    out_arr = np.empty(r.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(r.shape[0]):
        out[i] = _hurwitz(s, r[i])
    return out_arr
