import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmakit.carma import CarmaModel
from cmakit.errors import DomainError
from cmakit.estimators import exact_acvf, innovations_algorithm
from cmakit.wold import (
    alpha_polynomial,
    asymptotic_psi,
    asymptotic_sigma2_delta,
    eta_of_xi,
    ma_factorization,
    wold_kernel_approx,
)

OU = CarmaModel(a=[1.0], b=[1.0])
CARMA21 = CarmaModel(a=[3.0, 2.0], b=[0.5, 1.0])
CARMA20 = CarmaModel(a=[3.0, 2.0], b=[1.0])
# AR roots -1 and -1 +- 2i, MA root -0.5
CARMA31 = CarmaModel(a=[3.0, 7.0, 5.0], b=[0.5, 1.0])


def test_alpha_polynomial_low_order_numerators():
    # alpha_0 = 1/x, alpha_1 = (x-3)/(3! x^2), alpha_2 = (x^2-15x+30)/(5! x^3);
    # numerator coefficients are stored ascending
    assert alpha_polynomial(0).numerator == (1,)
    assert alpha_polynomial(1).numerator == (-3, 1)
    assert alpha_polynomial(2).numerator == (30, -15, 1)


def test_alpha_polynomial_evaluate():
    assert_allclose(alpha_polynomial(0).evaluate(2.0), 0.5, rtol=1e-15)
    assert_allclose(alpha_polynomial(1).evaluate(4.0), (4.0 - 3.0) / (6.0 * 16.0), rtol=1e-14)
    assert_allclose(alpha_polynomial(2).evaluate(3.0), (9.0 - 45.0 + 30.0) / (120.0 * 27.0), rtol=1e-14)


def test_alpha_polynomial_roots_k1_k2():
    assert_allclose(alpha_polynomial(1).roots.real, [3.0], atol=1e-12)
    r2 = np.sort(alpha_polynomial(2).roots.real)
    disc = math.sqrt(225.0 - 120.0)
    assert_allclose(r2, [(15.0 - disc) / 2.0, (15.0 + disc) / 2.0], rtol=1e-10)


@pytest.mark.parametrize("k", range(7))
def test_alpha_root_product_identity(k):
    roots = alpha_polynomial(k).roots
    prod = np.prod(roots) if roots.size else 1.0
    assert_allclose(prod.real, math.factorial(2 * k + 1) * 2.0**-k, rtol=1e-9)
    assert abs(np.imag(prod)) < 1e-9 * abs(prod)


def test_eta_closed_form_values():
    assert_allclose(eta_of_xi(3.0).real, 2.0 - math.sqrt(3.0), atol=1e-12)
    # frozen from a first run at the smaller alpha_2 root
    r2 = np.sort(alpha_polynomial(2).roots.real)
    assert_allclose(eta_of_xi(r2[0]).real, 0.430575347100, atol=1e-10)


def test_eta_branch_product_is_one():
    rng = np.random.default_rng(np.random.Philox(key=[4, 0]))
    for xi in rng.uniform(2.1, 50.0, size=12):
        eta = eta_of_xi(xi)
        other = (xi - 1.0) + math.sqrt((xi - 1.0) ** 2 - 1.0)
        assert_allclose(eta.real * other, 1.0, rtol=1e-12)


@pytest.mark.parametrize("k", range(1, 7))
def test_eta_modulus_below_one(k):
    for xi in alpha_polynomial(k).roots:
        assert abs(eta_of_xi(xi)) < 1.0


def test_sigma2_delta_ou():
    # leading term Delta e^{-a1 Delta}; exact value (1 - e^{-2 Delta})/2
    assert_allclose(asymptotic_sigma2_delta(OU, 0.1), 0.1 * np.exp(-0.1), rtol=1e-12)
    for delta in (2.0**-4, 2.0**-6, 2.0**-8):
        exact = (1.0 - np.exp(-2.0 * delta)) / 2.0
        assert_allclose(asymptotic_sigma2_delta(OU, delta), exact, rtol=2.0 * delta)


def test_sigma2_delta_carma20_denominator():
    # p - q = 2 pulls in the eta(3) factor: sigma^2 Delta^3 e^{-a1 Delta} / (6 (2 - sqrt 3))
    delta = 0.05
    expected = delta**3 * np.exp(-3.0 * delta) / (6.0 * (2.0 - math.sqrt(3.0)))
    assert_allclose(asymptotic_sigma2_delta(CARMA20, delta), expected, rtol=1e-12)


def test_sigma2_delta_order_one_empty_products():
    delta = 0.07
    assert_allclose(asymptotic_sigma2_delta(OU, delta), delta * np.exp(-delta), rtol=1e-12)


def test_asymptotic_psi_ou_geometric():
    psi = asymptotic_psi(OU, 0.25, 20)
    assert_allclose(psi, np.exp(-0.25 * np.arange(21)), atol=1e-12)


@pytest.mark.parametrize("model", [OU, CARMA21, CARMA31])
def test_asymptotic_psi_normalized(model):
    psi = asymptotic_psi(model, 2.0**-6, 8)
    assert psi[0] == 1.0
    assert psi.dtype == np.float64


def test_asymptotic_psi_vs_innovations_oracle():
    """Leading-term psi converge to the exact Wold coefficients, computed by
    the innovations recursion on the exact sampled ACVF."""
    errs = []
    for delta in (2.0**-4, 2.0**-6):
        psi = asymptotic_psi(CARMA21, delta, 64)
        fit = innovations_algorithm(exact_acvf(CARMA21, delta, 520), 500)
        errs.append(np.max(np.abs(psi - fit.psi_estimates(64))))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-3  # first run: 4.8e-4 at Delta = 2^-6


def test_wold_kernel_approx_ou_closed_form():
    delta = 0.125
    wa = wold_kernel_approx(OU, delta, 4.0)
    t = np.array([0.0, 0.3, 1.0, 3.9])
    # the step shape is exact; the scale is the leading-term sigma_Delta,
    # within O(Delta^2) of the exact (1 - e^{-2 Delta})/(2 Delta) form
    scale_lead = math.sqrt(asymptotic_sigma2_delta(OU, delta) / delta)
    assert_allclose(wa.evaluate(t), scale_lead * np.exp(-delta * np.floor(t / delta)), rtol=1e-12)
    scale_exact = math.sqrt((1.0 - math.exp(-2.0 * delta)) / (2.0 * delta))
    assert_allclose(scale_lead, scale_exact, rtol=2.0 * delta**2)


def test_wold_kernel_approx_at_zero_matches_kernel_jump():
    # for relative degree one, sigma_Delta/sqrt(Delta) -> sigma g(0+) = 1
    wa = wold_kernel_approx(CARMA21, 2.0**-10, 1.0)
    assert_allclose(wa.evaluate(0.0), 1.0, atol=5e-3)  # first run: 0.99878


@pytest.mark.parametrize("model", [OU, CARMA21])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 4.0])
def test_wold_kernel_pointwise_convergence(model, t):
    errs = []
    for k in range(4, 11):
        wa = wold_kernel_approx(model, 2.0**-k, 8.0)
        errs.append(abs(wa.evaluate(t) - model.sigma2**0.5 * model.kernel(t)))
    errs = np.array(errs)
    # monotone decrease with 5% slack for the floor-cell effect
    assert np.all(errs[1:] <= errs[:-1] * 1.05)


def test_wold_kernel_sup_error_first_order():
    tg = np.linspace(1e-6, 8.0, 20001)
    sups = []
    for k in range(4, 9):
        wa = wold_kernel_approx(OU, 2.0**-k, 8.0)
        sups.append(np.max(np.abs(wa.evaluate(tg) - np.exp(-tg))))
    ratios = np.array(sups[1:]) / np.array(sups[:-1])
    assert np.all((ratios > 0.4) & (ratios < 0.6))


def test_ma_factorization_real_coefficients():
    delta = 2.0**-6
    # CARMA(2,1): no eta factor, one zeta = 1 + mu delta
    fac21 = ma_factorization(CARMA21, delta)
    assert_allclose(fac21.ma_coefficients(), [1.0, -(1.0 - 0.5 * delta)], rtol=1e-12)
    # CARMA(3,1): eta(3) from the complex-pair bookkeeping times the zeta factor
    fac31 = ma_factorization(CARMA31, delta)
    coeffs = fac31.ma_coefficients()
    assert coeffs.dtype == np.float64
    assert coeffs.shape == (3,)
    eta, zeta = 2.0 - math.sqrt(3.0), 1.0 - 0.5 * delta
    assert_allclose(coeffs, [1.0, eta - zeta, -eta * zeta], rtol=1e-10)
    assert fac31.sigma2_delta == pytest.approx(asymptotic_sigma2_delta(CARMA31, delta))


def test_alpha_polynomial_rejects_negative_order():
    with pytest.raises(DomainError):
        alpha_polynomial(-1)
