import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from cmakit.carma import (
    CarmaModel,
    CmaKernel,
    carma_autocovariance,
    carma_kernel,
    carma_spectral_density,
    polynomial_roots,
    sampled_ar_polynomial,
    sampled_spectral_density_exact,
)
from cmakit.errors import DomainError, NearMultipleRoots

OU = CarmaModel(a=[1.0], b=[1.0])
# AR roots -1, -2; MA root -0.5
CARMA21 = CarmaModel(a=[3.0, 2.0], b=[0.5, 1.0])
# complex AR pair -1 +- 2i
CARMA21C = CarmaModel(a=[2.0, 5.0], b=[0.5, 1.0])


def test_model_validation():
    with pytest.raises(DomainError):
        CarmaModel(a=[-1.0], b=[1.0])  # unstable root
    with pytest.raises(DomainError):
        CarmaModel(a=[3.0, 2.0], b=[0.5, 2.0])  # leading MA coefficient not 1
    with pytest.raises(DomainError):
        CarmaModel(a=[3.0, 2.0], b=[1.0, 3.0, 1.0])  # q >= p
    with pytest.raises(NearMultipleRoots):
        CarmaModel(a=[2.0, 1.0], b=[1.0])  # coincident AR roots
    with pytest.raises(DomainError):
        CarmaModel(a=[3.0, 2.0], b=[1.0, 1.0])  # shared AR/MA root at -1


def test_kernel_ou_closed_form():
    assert_allclose(OU.kernel(1.0), np.exp(-1.0), rtol=1e-14)
    assert OU.kernel(-0.5) == 0.0
    assert isinstance(OU.kernel(1.0), float)


def test_kernel_vectorized_matches_scalar():
    t = np.array([-1.0, 0.0, 0.5, 2.0])
    vals = CARMA21.kernel(t)
    assert vals.shape == t.shape
    assert_allclose(vals, [CARMA21.kernel(ti) for ti in t], rtol=1e-14)


def test_kernel_near_double_root():
    # a(z) = (z+1)^2 + 1e-6: kernel approaches t e^{-t}
    model = CarmaModel(a=[2.0, 1.0 + 1e-6], b=[1.0])
    assert_allclose(model.kernel(2.0), 2.0 * np.exp(-2.0), atol=1e-4)


def test_separate_close_roots_flag():
    model = CarmaModel(a=[2.0, 1.0], b=[1.0], separate_close_roots=True)
    assert_allclose(model.kernel(2.0), 2.0 * np.exp(-2.0), atol=1e-3)


def test_spectral_density_ou_values():
    assert_allclose(OU.spectral_density(0.0), 1.0 / (2.0 * np.pi), rtol=1e-14)
    assert_allclose(OU.spectral_density(1.0), 1.0 / (4.0 * np.pi), rtol=1e-14)


@pytest.mark.parametrize("model", [OU, CARMA21, CARMA21C])
def test_spectral_density_even(model):
    rng = np.random.default_rng(np.random.Philox(key=[1, 0]))
    w = rng.uniform(-20.0, 20.0, size=16)
    assert_allclose(model.spectral_density(w), model.spectral_density(-w), rtol=1e-13)


@pytest.mark.parametrize("model", [OU, CARMA21, CARMA21C])
def test_spectral_density_matches_kernel_transform(model):
    """sigma^2/(2 pi) |g~(omega)|^2 from a numeric Fourier transform of the
    kernel must reproduce the rational closed form."""
    for w in (0.0, 0.3, 1.0, 3.0, 10.0):
        re, re_err = quad(model.kernel, 0.0, 40.0, weight="cos", wvar=w, limit=400)
        im, im_err = quad(model.kernel, 0.0, 40.0, weight="sin", wvar=w, limit=400)
        assert max(re_err, im_err) < 1e-7
        f_num = model.sigma2 * (re**2 + im**2) / (2.0 * np.pi)
        assert_allclose(f_num, model.spectral_density(w), rtol=1e-6)


def test_autocovariance_ou_values():
    assert_allclose(OU.autocovariance(0.0), 0.5, rtol=1e-14)
    assert_allclose(OU.autocovariance(1.0), np.exp(-1.0) / 2.0, rtol=1e-14)


@pytest.mark.parametrize("model", [OU, CARMA21, CARMA21C])
def test_autocovariance_symmetric(model):
    rng = np.random.default_rng(np.random.Philox(key=[2, 0]))
    h = rng.uniform(0.0, 10.0, size=8)
    assert_allclose(model.autocovariance(h), model.autocovariance(-h), rtol=1e-13)


@pytest.mark.parametrize("model", [CARMA21, CARMA21C])
@pytest.mark.parametrize("h", [0.0, 0.1, 1.0, 5.0])
def test_autocovariance_matches_kernel_convolution(model, h):
    # independent oracle: gamma(h) = sigma^2 int g(u) g(u+h) du
    val, err = quad(lambda u: model.kernel(u) * model.kernel(u + h), 0.0, 60.0, limit=200)
    assert err < 1e-7
    assert_allclose(model.autocovariance(h), model.sigma2 * val, atol=1e-8)


def test_sampled_density_frozen_value():
    # frozen after a first run against the truncated aliasing sum (|k| <= 1e6,
    # midpoint integral tail); the two routes agreed to 2e-9 absolute
    assert_allclose(sampled_spectral_density_exact(OU, 0.25, np.pi / 2), 0.019490007889, atol=1e-9)


def test_sampled_density_aliasing_oracle():
    delta, w = 0.25, np.pi / 2
    k = np.arange(1, 10**6 + 1)
    total = OU.spectral_density(w / delta)
    total += np.sum(OU.spectral_density((w + 2 * np.pi * k) / delta))
    total += np.sum(OU.spectral_density((w - 2 * np.pi * k) / delta))
    # midpoint tail of sum_{|k| > K} f_Y((omega + 2 pi k)/delta):
    # f_Y(u) ~ sigma^2/(2 pi u^2) so each side integrates in closed form
    kc = 2.0 * np.pi * (10**6 + 0.5)
    tail = OU.sigma2 * delta**2 / (4.0 * np.pi**2) * (1.0 / (kc + w) + 1.0 / (kc - w))
    oracle = (total + tail) / delta
    assert_allclose(sampled_spectral_density_exact(OU, delta, w), oracle, rtol=1e-8)


@pytest.mark.parametrize("model", [OU, CARMA21, CARMA21C])
def test_sampled_density_even(model):
    for w in (0.3, 1.1, 2.9):
        assert_allclose(
            model.sampled_spectral_density(0.25, w),
            model.sampled_spectral_density(0.25, -w),
            rtol=1e-12,
        )


def test_sampled_density_total_mass():
    val, err = quad(lambda w: sampled_spectral_density_exact(OU, 0.25, w), -np.pi, np.pi, limit=200)
    assert_allclose(val, OU.autocovariance(0.0), atol=1e-6)
    assert err < 1e-8


def test_sampled_ar_polynomial_single_root():
    assert_allclose(sampled_ar_polynomial(OU, 0.25), [-np.exp(-0.25)], rtol=1e-14)


def test_sampled_ar_polynomial_two_roots():
    model = CarmaModel(a=[3.0, 2.0], b=[1.0])
    expected = [-(np.exp(-0.5) + np.exp(-1.0)), np.exp(-1.5)]
    assert_allclose(sampled_ar_polynomial(model, 0.5), expected, rtol=1e-13)


def test_sampled_ar_polynomial_complex_pair_real_output():
    coeffs = sampled_ar_polynomial(CARMA21C, 0.25)
    assert coeffs.dtype == np.float64
    # expand (1 - e^{l1 D} z)(1 - e^{l2 D} z) by hand for the complex pair
    e1, e2 = np.exp((-1 + 2j) * 0.25), np.exp((-1 - 2j) * 0.25)
    assert_allclose(coeffs, [(-(e1 + e2)).real, (e1 * e2).real], atol=1e-12)


def test_polynomial_roots_residual_polish():
    roots = polynomial_roots([1.0, 3.0, 2.0])  # z^2 + 3z + 2
    assert_allclose(np.sort(roots.real), [-2.0, -1.0], atol=1e-12)
    assert_allclose(roots.imag, 0.0, atol=1e-12)


def test_module_level_wrappers_match_methods():
    assert carma_kernel(CARMA21, 1.3) == CARMA21.kernel(1.3)
    assert carma_spectral_density(CARMA21, 0.7) == CARMA21.spectral_density(0.7)
    assert carma_autocovariance(CARMA21, 0.7) == CARMA21.autocovariance(0.7)


def test_cma_kernel_l2_norm():
    k = CmaKernel(lambda t: np.exp(-t), sigma=1.0, label="ou")
    assert_allclose(k.l2_norm(), np.sqrt(0.5), rtol=1e-9)
