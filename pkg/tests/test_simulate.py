import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from cmakit.carma import CarmaModel
from cmakit.errors import DomainError, EmbeddingFailure
from cmakit.simulate import (
    GammaKernelModel,
    SimulationPlan,
    _euler_path_from_increments,
    _exact_path_from_increments,
    bessel_k,
    gamma_acvf,
    make_rng,
    simulate_carma_statespace,
    simulate_gaussian_cma,
)

OU = CarmaModel(a=[1.0], b=[1.0])
CARMA21 = CarmaModel(a=[3.0, 2.0], b=[0.5, 1.0])


class TestBesselK:
    def test_half_integer_closed_forms(self):
        # K_{1/2}(x) = sqrt(pi/2x) e^-x and K_{3/2}(x) = K_{1/2}(x)(1 + 1/x)
        k12 = math.sqrt(math.pi / 2.0) * math.exp(-1.0)
        assert_allclose(bessel_k(0.5, 1.0), k12, atol=1e-9)
        assert_allclose(bessel_k(1.5, 1.0), 2.0 * k12, atol=1e-9)

    def test_symmetric_in_nu(self):
        assert_allclose(bessel_k(-0.75, 2.3), bessel_k(0.75, 2.3), rtol=1e-11)

    @pytest.mark.parametrize("nu", [0.25, 1.0 / 3.0, 1.0, 4.5, 12.0])
    def test_matches_scipy(self, nu):
        from scipy.special import kv

        x = np.array([0.01, 0.1, 1.0, 5.0, 30.0, 200.0])
        assert_allclose(bessel_k(nu, x), kv(nu, x), rtol=1e-10)

    def test_underflow_region_is_zero(self):
        assert bessel_k(1.0, 745.0) == 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_k(21.0, 1.0)
        with pytest.raises(DomainError):
            bessel_k(1.0, 0.0)
        with pytest.raises(DomainError):
            bessel_k(1.0, -2.0)

    def test_vectorized_shape(self):
        x = np.linspace(0.5, 3.0, 7)
        out = bessel_k(2.0, x)
        assert out.shape == x.shape
        assert isinstance(bessel_k(2.0, 1.0), float)


class TestGammaKernelModel:
    def test_gamma0_integer_nu(self):
        # gamma(0) = (2 lam)^(1-2 nu) Gamma(2 nu - 1)
        gm = GammaKernelModel(nu=2.0, lam=1.0)
        assert_allclose(gm.gamma0, 0.25, rtol=1e-14)
        assert_allclose(gm.autocorrelation(0.0), 1.0, rtol=1e-14)

    @pytest.mark.parametrize("nu", [0.75, 1.05, 2.0])
    def test_acvf_matches_kernel_convolution(self, nu):
        gm = GammaKernelModel(nu=nu, lam=1.3, sigma2=0.7)
        for h in (0.2, 1.0, 2.5):
            val, err = quad(lambda u: gm.kernel(u) * gm.kernel(u + h), 0.0, 60.0,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
            assert err < 1e-9
            assert_allclose(gamma_acvf(gm, h), 0.7 * val, rtol=1e-8)

    def test_small_lag_branch_is_continuous(self):
        gm = GammaKernelModel(nu=0.75, lam=1.0)
        below = gm.autocorrelation(0.9e-6)
        above = gm.autocorrelation(1.1e-6)
        assert abs(below - above) < 1e-4
        assert below < 1.0

    def test_spectral_density_value(self):
        gm = GammaKernelModel(nu=5.0 / 6.0, lam=1.0, sigma2=2.0)
        w = 1.7
        expected = 2.0 * math.gamma(5.0 / 6.0) ** 2 / (2.0 * np.pi * (1.0 + w * w) ** (5.0 / 6.0))
        assert_allclose(gm.spectral_density(w), expected, rtol=1e-14)
        spec = gm.regvar_spectrum()
        assert_allclose(spec.alpha, 5.0 / 3.0, rtol=1e-14)

    def test_validation(self):
        with pytest.raises(DomainError):
            GammaKernelModel(nu=0.5, lam=1.0)
        with pytest.raises(DomainError):
            GammaKernelModel(nu=1.0, lam=0.0)
        with pytest.raises(DomainError):
            GammaKernelModel(nu=1.0, lam=1.0, sigma2=-1.0)


class TestSimulationPlan:
    def test_validation(self):
        with pytest.raises(DomainError):
            SimulationPlan(fine_delta=0.3, out_delta=0.5, n_out=10, seed=1)
        with pytest.raises(DomainError):
            SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=1, seed=1)
        with pytest.raises(DomainError):
            SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=10, seed=1, driver="levy")
        with pytest.raises(DomainError):
            SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=10, seed=1, cp_rate=0.0)

    def test_refined_constructor(self):
        plan = SimulationPlan.refined(out_delta=0.5, n_out=10, seed=7)
        assert plan.ratio == 16
        assert_allclose(plan.fine_delta, 0.5 / 16)
        plan2 = SimulationPlan.refined(out_delta=0.5, n_out=10, seed=7, factor=4, stream=3)
        assert plan2.ratio == 4
        assert plan2.stream == 3


class TestMakeRng:
    def test_deterministic_and_stream_separated(self):
        a = make_rng(42, 0).standard_normal(8)
        b = make_rng(42, 0).standard_normal(8)
        c = make_rng(42, 1).standard_normal(8)
        d = make_rng(43, 0).standard_normal(8)
        assert_allclose(a, b, rtol=0.0, atol=0.0)
        assert not np.allclose(a, c)
        assert not np.allclose(a, d)


class TestGaussianCma:
    def test_zero_acvf_gives_zero_path(self):
        plan = SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=16, seed=1)
        series = simulate_gaussian_cma(lambda h: np.zeros_like(np.asarray(h)), plan)
        assert_allclose(series.values, 0.0, atol=0.0)
        assert series.delta == 0.5

    def test_bit_identical_runs(self):
        plan = SimulationPlan.refined(out_delta=0.25, n_out=256, seed=11, factor=4)
        a = simulate_gaussian_cma(OU.autocovariance, plan)
        b = simulate_gaussian_cma(OU.autocovariance, plan)
        assert np.array_equal(a.values, b.values)
        other = SimulationPlan.refined(out_delta=0.25, n_out=256, seed=11, factor=4, stream=1)
        assert not np.array_equal(a.values, simulate_gaussian_cma(OU.autocovariance, other).values)

    def test_ou_moments(self):
        n, delta = 2**16, 0.0625
        plan = SimulationPlan(fine_delta=delta, out_delta=delta, n_out=n, seed=11)
        series = simulate_gaussian_cma(OU.autocovariance, plan)
        assert series.n == n and series.delta == delta
        phi = math.exp(-delta)
        lrv = 0.5 * (1.0 + 2.0 * phi / (1.0 - phi))
        assert abs(series.values.mean()) < 3.0 * math.sqrt(lrv / n)
        gam_hat = [np.mean(series.values[: n - h] * series.values[h:]) for h in range(3)]
        se0 = math.sqrt(2.0 * lrv * 0.5 / n)  # crude long-run bound for gamma_hat
        for h, gh in enumerate(gam_hat):
            assert abs(gh - OU.autocovariance(h * delta)) < 4.0 * se0

    def test_marginally_negative_eigenvalues_are_clipped(self):
        c = 0.5 + 2.5e-9

        def acvf(lags):
            lags = np.asarray(lags, dtype=np.float64)
            out = np.zeros_like(lags)
            out[np.isclose(lags, 0.0)] = 1.0
            out[np.isclose(lags, 0.5)] = c
            return out

        plan = SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=8, seed=4)
        with pytest.warns(UserWarning, match="clipping"):
            series = simulate_gaussian_cma(acvf, plan)
        assert np.all(np.isfinite(series.values))

    def test_strongly_negative_embedding_fails(self):
        def acvf(lags):
            lags = np.asarray(lags, dtype=np.float64)
            out = np.zeros_like(lags)
            out[np.isclose(lags, 0.0)] = 1.0
            out[np.isclose(lags, 0.5)] = 0.9
            out[np.isclose(lags, 1.0)] = 0.8
            return out

        plan = SimulationPlan(fine_delta=0.5, out_delta=0.5, n_out=64, seed=4)
        with pytest.raises(EmbeddingFailure):
            simulate_gaussian_cma(acvf, plan)


class TestStatespace:
    def test_ou_exact_discretization_residuals_are_white(self):
        n, delta = 2**16, 0.05
        plan = SimulationPlan(fine_delta=delta, out_delta=delta, n_out=n, seed=3)
        y = simulate_carma_statespace(OU, plan).values
        phi = math.exp(-delta)
        resid = y[1:] - phi * y[:-1]
        v_true = 0.5 * (1.0 - phi * phi)
        assert abs(np.var(resid) / v_true - 1.0) < 0.03
        r = resid - resid.mean()
        lag1 = np.sum(r[1:] * r[:-1]) / np.sum(r * r)
        assert abs(lag1) < 4.0 / math.sqrt(n)

    def test_carma21_variance(self):
        n = 2**18
        plan = SimulationPlan(fine_delta=0.1, out_delta=0.1, n_out=n, seed=5)
        y = simulate_carma_statespace(CARMA21, plan).values
        gamma0 = CARMA21.autocovariance(0.0)
        # long-run variance of gamma_hat(0) for a Gaussian series
        gam = CARMA21.autocovariance(np.arange(400) * 0.1)
        se = math.sqrt(2.0 * np.sum(gam**2) / n)
        assert abs(np.mean(y * y) - gamma0) < 4.0 * se

    def test_bit_identical_runs(self):
        plan = SimulationPlan(fine_delta=0.25, out_delta=0.25, n_out=128, seed=9)
        a = simulate_carma_statespace(CARMA21, plan)
        b = simulate_carma_statespace(CARMA21, plan)
        assert np.array_equal(a.values, b.values)

    def test_compound_poisson_needs_refinement(self):
        plan = SimulationPlan(fine_delta=0.1, out_delta=0.4, n_out=64, seed=2,
                              driver="compound-poisson")
        with pytest.raises(DomainError):
            simulate_carma_statespace(OU, plan)

    def test_compound_poisson_matches_gaussian_acvf(self):
        # same second-order structure, heavier tails; kurtosis-inflated bands
        n, delta, rate = 2**15, 0.05, 2.0
        cp_plan = SimulationPlan.refined(out_delta=delta, n_out=n, seed=22,
                                         driver="compound-poisson", cp_rate=rate)
        g_plan = SimulationPlan(fine_delta=delta, out_delta=delta, n_out=n, seed=21)
        ycp = simulate_carma_statespace(OU, cp_plan).values
        yg = simulate_carma_statespace(OU, g_plan).values
        gam = OU.autocovariance(np.arange(400) * delta)
        # excess fourth cumulant of the driver is 3/rate per unit time
        kappa4 = 3.0 / rate
        for h in range(3):
            target = gam[h]
            se_g = math.sqrt(2.0 * np.sum(gam**2) / n)
            se_cp = math.sqrt((2.0 * np.sum(gam**2) + kappa4 * target**2 / delta) / n)
            assert abs(np.mean(yg[: n - h] * yg[h:]) - target) < 4.0 * se_g
            assert abs(np.mean(ycp[: n - h] * ycp[h:]) - target) < 4.0 * se_cp
        # the Euler fine grid keeps the marginal close to Gaussian in variance
        # but the jump driver shows in the fourth moment
        assert np.mean(ycp**4) > np.mean(yg**4)


@pytest.mark.parametrize("model", [OU, CARMA21], ids=["ou", "carma21"])
def test_euler_path_first_order_convergence(model):
    """Halving the step halves the Euler-vs-exact path discrepancy."""
    rng = make_rng(77)
    n_fine = 4096 * 64
    dt_fine = 2.0**-10
    dw = rng.standard_normal(n_fine) * math.sqrt(dt_fine)
    x0 = np.zeros(model.p)
    errs = []
    for agg in (64, 32, 16, 8):
        inc = dw.reshape(-1, agg).sum(axis=1)
        dt = agg * dt_fine
        ye = _euler_path_from_increments(model, x0, inc, dt)
        yx = _exact_path_from_increments(model, x0, inc, dt)
        errs.append(math.sqrt(np.mean((ye - yx) ** 2)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(1.7 < r < 2.3 for r in ratios)
