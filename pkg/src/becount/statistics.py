"""Detector-level statistics: mixing over photon inputs and Binomial references.

A number-diagonal photon state P_n sent into the detector produces the
count statistics P_a = sum_n P(a|n) P_n. This module builds truncated
photon statistics (Fock, coherent, thermal, custom), the detector
response matrix P(a|n) over a range of n, the Binomial reference
distribution of conventional photo-counting at a given efficiency, and
deviation metrics between a computed distribution and its reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .counting import (
    CountDistribution,
    binomial_pmf,
    count_distribution,
    vector_moments,
)


@dataclass(frozen=True)
class PhotonStatistics:
    """Truncated photon-number distribution with its declared tail bound.

    probabilities[n] is the weight of n photons; truncation_error bounds
    the discarded tail mass, so sum(probabilities) >= 1 - truncation_error.
    """

    probabilities: np.ndarray
    label: str
    truncation_error: float

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    def mean(self) -> float:
        return float(np.arange(len(self.probabilities)) @ self.probabilities)

    @classmethod
    def fock(cls, n: int) -> "PhotonStatistics":
        """Exactly n photons."""
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        probs = np.zeros(n + 1)
        probs[n] = 1.0
        return cls(probabilities=probs, label=f"fock({n})", truncation_error=0.0)

    @classmethod
    def coherent(cls, mean: float, tail_bound: float = 1e-12) -> "PhotonStatistics":
        """Poissonian statistics of a coherent state, truncated to tail_bound."""
        if mean < 0:
            raise ValueError(f"mean must be >= 0, got {mean}")
        if mean == 0.0:
            return cls(
                probabilities=np.array([1.0]), label="coherent(0)", truncation_error=0.0
            )
        # extend until the remaining tail is provably below the bound
        n_max = max(8, int(mean))
        while True:
            n = np.arange(n_max + 1)
            probs = np.exp(n * math.log(mean) - mean - gammaln(n + 1))
            tail = 1.0 - probs.sum()
            if tail < tail_bound:
                break
            n_max = 2 * n_max
        return cls(
            probabilities=probs,
            label=f"coherent({mean})",
            truncation_error=max(tail, 0.0),
        )

    @classmethod
    def thermal(cls, mean: float, tail_bound: float = 1e-12) -> "PhotonStatistics":
        """Bose-Einstein statistics P_n = mean^n/(1+mean)^(n+1), truncated."""
        if mean < 0:
            raise ValueError(f"mean must be >= 0, got {mean}")
        if mean == 0.0:
            return cls(
                probabilities=np.array([1.0]), label="thermal(0)", truncation_error=0.0
            )
        ratio = mean / (1.0 + mean)
        # tail after n_max is ratio^(n_max+1)
        n_max = int(math.ceil(math.log(tail_bound) / math.log(ratio))) + 1
        n = np.arange(n_max + 1)
        probs = np.exp(n * math.log(ratio)) / (1.0 + mean)
        return cls(
            probabilities=probs,
            label=f"thermal({mean})",
            truncation_error=ratio ** (n_max + 1),
        )

    @classmethod
    def custom(cls, probabilities, label: str = "custom") -> "PhotonStatistics":
        """User-supplied vector; must be nonnegative and sum to at most 1."""
        probs = np.asarray(probabilities, dtype=float)
        if probs.ndim != 1 or len(probs) == 0:
            raise ValueError("probabilities must be a nonempty vector")
        if probs.min() < 0:
            raise ValueError(f"negative probability {probs.min()}")
        total = probs.sum()
        if total > 1.0 + 1e-9:
            raise ValueError(f"probabilities sum to {total} > 1")
        return cls(
            probabilities=probs,
            label=label,
            truncation_error=max(1.0 - total, 0.0),
        )


@dataclass(frozen=True)
class DetectorResponse:
    """Matrix of conditional count distributions P(a|n) for n = 0..n_max.

    Row n holds count_distribution(q, p, n) padded with zeros above a = n.
    """

    q: float
    p: float
    matrix: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.matrix) - 1


def detector_response(q: float, p: float, n_max: int) -> DetectorResponse:
    """Build the response matrix row by row from the closed-form route."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    matrix = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        matrix[n, : n + 1] = count_distribution(q, p, n).probabilities
    return DetectorResponse(q=q, p=p, matrix=matrix)


def mix(photons: PhotonStatistics, response: DetectorResponse) -> np.ndarray:
    """Count statistics of a photon mixture: P_a = sum_n P(a|n) P_n.

    Normalized to within the photon statistics' truncation bound; no
    renormalization is applied.
    """
    if response.n_max < photons.n_max:
        raise ValueError(
            f"response covers n <= {response.n_max} but photons reach "
            f"n = {photons.n_max}"
        )
    return photons.probabilities @ response.matrix[: photons.n_max + 1]


def binomial_reference(eta: float, n: int) -> CountDistribution:
    """Binomial(n, eta): the conventional counting statistics at efficiency eta."""
    return CountDistribution(
        n=n,
        probabilities=binomial_pmf(n, eta),
        q=math.inf,
        p=eta,
        method="binomial",
    )


def mandel_counts(photons: PhotonStatistics, eta: float) -> np.ndarray:
    """Conventional photo-counting: Binomial thinning of the photon statistics.

    For number-diagonal inputs the classic counting formula reduces to
    P_a = sum_n C(n,a) eta^a (1-eta)^(n-a) P_n.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    n_max = photons.n_max
    matrix = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        matrix[n, : n + 1] = binomial_pmf(n, eta)
    return photons.probabilities @ matrix


@dataclass(frozen=True)
class DeviationReport:
    """Elementwise and summary deviation between a distribution and a reference."""

    per_a: np.ndarray
    total_variation: float
    fano_ratio: float


def deviation(dist, ref) -> DeviationReport:
    """Compare two count probability vectors, padding the shorter with zeros.

    per_a = dist - ref; total_variation = sum|per_a|/2; fano_ratio =
    fano(dist)/fano(ref) with the 0/0 -> 1 convention inside each fano.
    """
    dist = np.asarray(dist, dtype=float)
    ref = np.asarray(ref, dtype=float)
    width = max(len(dist), len(ref))
    d = np.zeros(width)
    r = np.zeros(width)
    d[: len(dist)] = dist
    r[: len(ref)] = ref
    diff = d - r
    return DeviationReport(
        per_a=diff,
        total_variation=0.5 * float(np.abs(diff).sum()),
        fano_ratio=vector_moments(d).fano / vector_moments(r).fano,
    )
