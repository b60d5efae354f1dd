"""Atom-count statistics of a Bose-condensate photodetector.

A photon absorbed by a trapped condensate ejects exactly one atom; the
number of ejected atoms read out after a time window is the detector's
measurement record. This package computes the conditional count
distribution P_a(q, p | n), the quantum efficiency eta_D connecting the
mean count to the photon number, detector-level statistics for mixed
photon inputs, and two independent oracles that validate the closed
form: a seeded Monte Carlo trajectory sampler and an exact sector-basis
solver of the underlying master equation.
"""

from .amplitudes import (
    AmplitudeParams,
    EscapeIntegral,
    WaitingTimeDensity,
    amplitude_params,
    matrix_element_closed,
    psi_exact,
    psi_lowest_order,
    transition_probability_integral,
    waiting_density,
)
from .counting import (
    CountDistribution,
    LaplaceRational,
    Moments,
    PartialFractionResult,
    RouteCrosscheck,
    binomial_pmf,
    count_distribution,
    count_distribution_partial_fraction,
    efficiency,
    moments,
    route_crosscheck,
    survival_laplace,
    vector_moments,
    waiting_laplace,
)
from .params import (
    DetectorParams,
    PhysicalConfig,
    RegimeError,
    ReducedParams,
    TrapScales,
    derive_detector_params,
    derive_trap_scales,
    reduced_params,
    resonance_wavenumber,
    saturation,
    saturation_from_q,
)
from .sector_oracle import (
    EffectiveHamiltonianSector,
    SectorBasis,
    build_heff,
    build_heff_zero_order,
    exact_count_statistics,
    jump_operator,
)
from .statistics import (
    DetectorResponse,
    DeviationReport,
    PhotonStatistics,
    binomial_reference,
    detector_response,
    deviation,
    mandel_counts,
    mix,
)
from .stochastic import RngStream, sample_waiting_time, simulate_counts

__version__ = "0.1.0"

__all__ = [
    "AmplitudeParams",
    "CountDistribution",
    "DetectorParams",
    "DetectorResponse",
    "DeviationReport",
    "EffectiveHamiltonianSector",
    "EscapeIntegral",
    "LaplaceRational",
    "Moments",
    "PartialFractionResult",
    "PhotonStatistics",
    "PhysicalConfig",
    "ReducedParams",
    "RegimeError",
    "RngStream",
    "RouteCrosscheck",
    "SectorBasis",
    "TrapScales",
    "WaitingTimeDensity",
    "amplitude_params",
    "binomial_pmf",
    "binomial_reference",
    "build_heff",
    "build_heff_zero_order",
    "count_distribution",
    "count_distribution_partial_fraction",
    "derive_detector_params",
    "derive_trap_scales",
    "detector_response",
    "deviation",
    "efficiency",
    "exact_count_statistics",
    "jump_operator",
    "mandel_counts",
    "matrix_element_closed",
    "mix",
    "moments",
    "psi_exact",
    "psi_lowest_order",
    "reduced_params",
    "resonance_wavenumber",
    "route_crosscheck",
    "sample_waiting_time",
    "saturation",
    "saturation_from_q",
    "simulate_counts",
    "survival_laplace",
    "transition_probability_integral",
    "vector_moments",
    "waiting_density",
    "waiting_laplace",
]
