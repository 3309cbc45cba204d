"""Kernel estimation for Levy-driven continuous-time moving averages.

The sampled process admits a Wold representation whose coefficients, scaled
by the innovation standard deviation, converge to the kernel as the sampling
step shrinks. The package provides the CARMA closed forms, the small-step
asymptotics of the Wold coefficients and innovation variance, the sampling
theory for regularly varying spectra, nonparametric estimators with their
central-limit bands, simulators, and empirical spectral tools.
"""

from cmakit._core import BACKEND
from cmakit.carma import (
    CarmaModel,
    CmaKernel,
    ComplexRootSet,
    carma_autocovariance,
    carma_kernel,
    carma_spectral_density,
    polynomial_roots,
    sampled_ar_polynomial,
    sampled_spectral_density_exact,
)
from cmakit.empirical import (
    SpectralFunction,
    gamma_structure_asymptote,
    periodogram,
    spectrum_from_kernel,
    splice_spectra,
    structure_function,
    welch,
)
from cmakit.errors import (
    BesselFailure,
    CmakitError,
    DomainError,
    EmbeddingFailure,
    InsufficientPoints,
    LagTooLarge,
    MRequired,
    NearMultipleRoots,
    NonCausalAR,
    NonPositiveDensity,
    NonPositiveV,
    NonStationaryInit,
    OrderTooLarge,
    QuadratureFailure,
    SegmentTooLong,
    UnitModulusBranch,
)
from cmakit.estimators import (
    AcvfSequence,
    InnovationsFit,
    KernelEstimate,
    SampledSeries,
    ar_to_ma,
    clt_band,
    durbin_levinson,
    estimate_kernel,
    exact_acvf,
    innovations_algorithm,
    sample_acvf,
)
from cmakit.simulate import (
    GammaKernelModel,
    SimulationPlan,
    bessel_k,
    gamma_acvf,
    make_rng,
    simulate_carma_statespace,
    simulate_gaussian_cma,
)
from cmakit.spectral import (
    HurwitzParams,
    QuadratureConfig,
    RegVaryingSpectrum,
    asymptotic_sampled_density,
    c_alpha,
    differenced_density_limit,
    ficarma_spectral_density,
    folded_power_sum,
    hurwitz_zeta,
    kaimal_spectrum,
    kolmogorov_sigma2,
    s_p_alpha,
    sampled_spectral_density_aliasing,
    tail_index_diagnostic,
    turbulence_spectra,
    von_karman_spectrum,
    wold_variance_asymptotics_rv,
)
from cmakit.wold import (
    AlphaPolynomial,
    MaFactorization,
    WoldApprox,
    alpha_polynomial,
    asymptotic_psi,
    asymptotic_sigma2_delta,
    eta_of_xi,
    ma_factorization,
    wold_kernel_approx,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # carma
    "CarmaModel",
    "CmaKernel",
    "ComplexRootSet",
    "carma_autocovariance",
    "carma_kernel",
    "carma_spectral_density",
    "polynomial_roots",
    "sampled_ar_polynomial",
    "sampled_spectral_density_exact",
    # wold
    "AlphaPolynomial",
    "MaFactorization",
    "WoldApprox",
    "alpha_polynomial",
    "asymptotic_psi",
    "asymptotic_sigma2_delta",
    "eta_of_xi",
    "ma_factorization",
    "wold_kernel_approx",
    # spectral theory
    "HurwitzParams",
    "QuadratureConfig",
    "RegVaryingSpectrum",
    "asymptotic_sampled_density",
    "c_alpha",
    "differenced_density_limit",
    "ficarma_spectral_density",
    "folded_power_sum",
    "hurwitz_zeta",
    "kaimal_spectrum",
    "kolmogorov_sigma2",
    "s_p_alpha",
    "sampled_spectral_density_aliasing",
    "tail_index_diagnostic",
    "turbulence_spectra",
    "von_karman_spectrum",
    "wold_variance_asymptotics_rv",
    # estimation
    "AcvfSequence",
    "InnovationsFit",
    "KernelEstimate",
    "SampledSeries",
    "ar_to_ma",
    "clt_band",
    "durbin_levinson",
    "estimate_kernel",
    "exact_acvf",
    "innovations_algorithm",
    "sample_acvf",
    # simulation
    "GammaKernelModel",
    "SimulationPlan",
    "bessel_k",
    "gamma_acvf",
    "make_rng",
    "simulate_carma_statespace",
    "simulate_gaussian_cma",
    # empirical spectra
    "SpectralFunction",
    "gamma_structure_asymptote",
    "periodogram",
    "spectrum_from_kernel",
    "splice_spectra",
    "structure_function",
    "welch",
    # errors
    "CmakitError",
    "DomainError",
    "BesselFailure",
    "EmbeddingFailure",
    "InsufficientPoints",
    "LagTooLarge",
    "MRequired",
    "NearMultipleRoots",
    "NonCausalAR",
    "NonPositiveDensity",
    "NonPositiveV",
    "NonStationaryInit",
    "OrderTooLarge",
    "QuadratureFailure",
    "SegmentTooLong",
    "UnitModulusBranch",
]
