"""Conditional atom-count statistics P_a(q, p | n) and the quantum efficiency.

Given n initial excitations, atoms escape one by one; the delay before
escape k+1 is hypoexponential with rates (n-k+jq)/tau0, j in {0, 1, 2}.
The count distribution after time tau, parameterized by the escape
probability p = 1 - exp(-tau/tau0), is computed two ways:

* the primary route propagates the pure-death Markov chain over the
  3-stage-per-level ladder with a single matrix exponential of its
  generator. Every intermediate quantity is a probability, so the route
  is unconditionally stable for any (q, p, n);

* a partial-fraction inverse Laplace transform of the same rational
  product, evaluated in extended precision, serves as an independent
  cross-check. Its alternating sums can cancel catastrophically in
  double precision, which is why it is never the primary route; the
  implementation tracks the cancellation and flags unreliable results
  instead of returning them silently.

The q = inf sentinel (zero saturation) returns Binomial(n, p) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln


@dataclass(frozen=True)
class LaplaceRational:
    """Sum of terms coef * prod_j 1/(z + rate_j), rates nonnegative.

    Represents the Laplace transforms of waiting-time densities (a single
    fully factored term) and survival probabilities (a short sum). A rate
    of exactly 0 encodes a 1/z factor.
    """

    terms: tuple[tuple[float, tuple[float, ...]], ...]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for coef, rates in self.terms:
            part = np.full_like(z, coef)
            for lam in rates:
                part = part / (z + lam)
            total = total + part
        if total.ndim == 0:
            return complex(total)
        return total


def _ladder_rates(k: int, n: int, q: float, tau0: float) -> tuple[float, ...]:
    """The three stage rates before escape k+1 out of n, in 1/tau0 units times 1/tau0."""
    m = float(n - k)
    return (m / tau0, (m + q) / tau0, (m + 2.0 * q) / tau0)


def waiting_laplace(k: int, n: int, q: float, tau0: float) -> LaplaceRational:
    """Laplace transform of the waiting-time density before escape k+1.

    Factored form prod_j lambda_j/(z + lambda_j) with lambda_j =
    (n-k+jq)/tau0; equals 1 at z = 0 (normalization). For the q = inf
    sentinel only the slow stage survives.
    """
    if not 0 <= k < n:
        raise ValueError(f"need 0 <= k < n, got k = {k}, n = {n}")
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    if math.isinf(q):
        lam = (n - k) / tau0
        return LaplaceRational(terms=((lam, (lam,)),))
    rates = _ladder_rates(k, n, q, tau0)
    coef = rates[0] * rates[1] * rates[2]
    return LaplaceRational(terms=((coef, rates),))


def survival_laplace(a: int, n: int, q: float, tau0: float) -> LaplaceRational:
    """Laplace transform of the no-escape probability with n-a excitations left.

    For a < n this is (1 - w(z))/z with w the waiting transform of the
    next escape, expanded telescopically into three proper terms so z = 0
    is manifestly removable:

        1/(z+l0) + l0/((z+l0)(z+l1)) + l0*l1/((z+l0)(z+l1)(z+l2)).

    For a = n nothing can escape, W(t) = 1, transform 1/z.
    """
    if not 0 <= a <= n:
        raise ValueError(f"need 0 <= a <= n, got a = {a}, n = {n}")
    if a == n:
        return LaplaceRational(terms=((1.0, (0.0,)),))
    if math.isinf(q):
        lam = (n - a) / tau0
        return LaplaceRational(terms=((1.0, (lam,)),))
    l0, l1, l2 = _ladder_rates(a, n, q, tau0)
    return LaplaceRational(
        terms=(
            (1.0, (l0,)),
            (l0, (l0, l1)),
            (l0 * l1, (l0, l1, l2)),
        )
    )


@dataclass(frozen=True)
class CountDistribution:
    """Probability vector over the number of escaped atoms a = 0..n.

    method identifies the producing route: "markov", "partial-fraction",
    "monte-carlo", "sector-exact" or "binomial". stderr carries per-bin
    standard errors for Monte Carlo results.
    """

    n: int
    probabilities: np.ndarray
    q: float
    p: float
    method: str
    stderr: np.ndarray | None = None

    def __post_init__(self):
        if len(self.probabilities) != self.n + 1:
            raise ValueError(
                f"need n+1 = {self.n + 1} probabilities, got {len(self.probabilities)}"
            )


def binomial_pmf(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) probabilities via log-Gamma, stable for any n."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n == 0:
        return np.array([1.0])
    if p == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    a = np.arange(n + 1)
    logpmf = (
        gammaln(n + 1)
        - gammaln(a + 1)
        - gammaln(n - a + 1)
        + a * math.log(p)
        + (n - a) * math.log1p(-p)
    )
    return np.exp(logpmf)


def _validate_qpn(q: float, p: float, n: int) -> None:
    if not (q > 0 or math.isinf(q)):
        raise ValueError(f"q must be positive or inf, got {q}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")


def _ladder_generator(q: float, n: int) -> np.ndarray:
    """Generator of the 3n+1 state pure-death ladder in 1/tau0 units.

    State 3k+j means k escapes done and stage j of the next one in
    progress; state 3n is absorbing (all escaped). Rates (n-k+jq) move
    probability down the ladder.
    """
    dim = 3 * n + 1
    gen = np.zeros((dim, dim))
    for k in range(n):
        for j in range(3):
            s = 3 * k + j
            rate = (n - k) + j * q
            gen[s, s] = -rate
            gen[s + 1, s] = rate
    return gen


def count_distribution(q: float, p: float, n: int) -> CountDistribution:
    """Conditional count distribution P_a(q, p | n), primary stable route.

    Propagates the pure-death ladder generator to the dimensionless time
    theta = -ln(1-p) with a matrix exponential. The generator is Metzler
    and triangular, so the scaling-and-squaring exponential only ever
    multiplies nonnegative matrices: no cancellation at any (q, p, n).
    P_a sums probability over the three stages of level a.
    """
    _validate_qpn(q, p, n)
    if math.isinf(q):
        return CountDistribution(
            n=n, probabilities=binomial_pmf(n, p), q=q, p=p, method="binomial"
        )
    if n == 0:
        probs = np.array([1.0])
    elif p == 0.0:
        probs = np.zeros(n + 1)
        probs[0] = 1.0
    elif p == 1.0:
        probs = np.zeros(n + 1)
        probs[n] = 1.0
    else:
        theta = -math.log1p(-p)
        col = expm(_ladder_generator(q, n) * theta)[:, 0]
        if col.min() < -1e-12:
            raise FloatingPointError(
                f"ladder propagation produced probability {col.min():.2e} < 0"
            )
        col = np.maximum(col, 0.0)
        probs = np.zeros(n + 1)
        probs[:n] = col[: 3 * n].reshape(n, 3).sum(axis=1)
        probs[n] = col[3 * n]
    return CountDistribution(n=n, probabilities=probs, q=q, p=p, method="markov")


def _divided_difference_exp(rates: list, theta, ctx) -> object:
    """Divided difference of mu -> exp(-mu*theta) over possibly repeated nodes.

    Confluent (Hermite) rule: a table entry over r+1 equal nodes mu is
    (-theta)^r exp(-mu*theta)/r!. The inverse Laplace transform of
    prod_i 1/(z + mu_i) at theta is (-1)^(M-1) times this divided
    difference over all M nodes.
    """
    order = sorted(range(len(rates)), key=lambda i: ctx.mpf(rates[i]))
    mus = [ctx.mpf(rates[i]) for i in order]
    m = len(mus)
    table = [ctx.e ** (-mu * theta) for mu in mus]
    for level in range(1, m):
        new = []
        for i in range(m - level):
            lo, hi = mus[i], mus[i + level]
            if hi == lo:
                new.append((-theta) ** level * ctx.e ** (-lo * theta) / ctx.factorial(level))
            else:
                new.append((table[i + 1] - table[i]) / (hi - lo))
        table = new
    return table[0]


def _partial_fraction_probs(q: float, p: float, n: int, dps: int) -> np.ndarray:
    """One evaluation of the inverse-Laplace product route at dps digits."""
    probs = np.zeros(n + 1)
    with mp.workdps(dps):
        theta = -mp.log(1 - mp.mpf(p))
        qq = mp.mpf(q)
        for a in range(n + 1):
            # waiting factors for escapes 0..a-1, in dimensionless rates m+jq
            base_rates: list = []
            coef = mp.mpf(1)
            for k in range(a):
                m = n - k
                stage = [m, m + qq, m + 2 * qq]
                coef *= stage[0] * stage[1] * stage[2]
                base_rates.extend(stage)
            if a == n:
                term_list = [(coef, base_rates + [mp.mpf(0)])]
            else:
                m = n - a
                l0, l1, l2 = m, m + qq, m + 2 * qq
                term_list = [
                    (coef, base_rates + [l0]),
                    (coef * l0, base_rates + [l0, l1]),
                    (coef * l0 * l1, base_rates + [l0, l1, l2]),
                ]
            total = mp.mpf(0)
            for tcoef, rates in term_list:
                sign = -1 if len(rates) % 2 == 0 else 1
                total += tcoef * sign * _divided_difference_exp(rates, theta, mp)
            probs[a] = float(total)
    return probs


@dataclass(frozen=True)
class PartialFractionResult:
    """Cross-check distribution plus its cancellation diagnostics.

    digits_lost[a] is how many of the working digits the alternating
    inverse-Laplace sums for P_a burned: measured by re-running with 20
    guard digits and comparing. unstable is True when the result is not
    certified to 1e-12 absolute; such results must never be consumed as
    references.
    """

    distribution: CountDistribution
    digits_lost: np.ndarray
    working_dps: int
    unstable: bool


def count_distribution_partial_fraction(
    q: float, p: float, n: int, dps: int = 60
) -> PartialFractionResult:
    """Cross-check route: inverse Laplace of the explicit transform product.

    P_a is the inverse transform at theta = -ln(1-p) of the product of a
    waiting transforms and one survival transform, expanded into sums of
    pole products and inverted term by term with confluent divided
    differences (exact for repeated poles, e.g. integer q). Evaluated
    with mpmath at dps working digits and certified against a second run
    with 20 guard digits.
    """
    _validate_qpn(q, p, n)
    if math.isinf(q) or n == 0 or p in (0.0, 1.0):
        base = count_distribution(q, p, n)
        dist = CountDistribution(
            n=n,
            probabilities=base.probabilities,
            q=q,
            p=p,
            method="partial-fraction",
        )
        return PartialFractionResult(
            distribution=dist,
            digits_lost=np.zeros(n + 1),
            working_dps=dps,
            unstable=False,
        )

    probs = _partial_fraction_probs(q, p, n, dps)
    guard = _partial_fraction_probs(q, p, n, dps + 20)
    abs_err = np.abs(probs - guard)
    with np.errstate(divide="ignore"):
        digits_lost = np.maximum(0.0, dps + np.log10(abs_err, where=abs_err > 0,
                                                     out=np.full(n + 1, -np.inf)))
    unstable = bool(np.any(abs_err > 1e-12))
    dist = CountDistribution(
        n=n, probabilities=probs, q=q, p=p, method="partial-fraction"
    )
    return PartialFractionResult(
        distribution=dist, digits_lost=digits_lost, working_dps=dps, unstable=unstable
    )


@dataclass(frozen=True)
class RouteCrosscheck:
    """Agreement report between the Markov and partial-fraction routes."""

    total_variation: float
    unstable: bool
    digits_lost: np.ndarray


def route_crosscheck(q: float, p: float, n: int, dps: int = 60) -> RouteCrosscheck:
    """Total-variation distance between the two independent routes.

    If the partial-fraction evaluation is flagged unstable the distance
    is still reported but must be interpreted as unreliable; callers
    treat unstable results as a failed cross-check, never as agreement.
    """
    markov = count_distribution(q, p, n)
    pf = count_distribution_partial_fraction(q, p, n, dps=dps)
    tv = 0.5 * float(
        np.abs(markov.probabilities - pf.distribution.probabilities).sum()
    )
    return RouteCrosscheck(
        total_variation=tv, unstable=pf.unstable, digits_lost=pf.digits_lost
    )


def efficiency(q: float, p: float, n: int) -> float:
    """Quantum efficiency eta_D = (mean count)/n for n conditioning excitations."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    dist = count_distribution(q, p, n)
    a = np.arange(n + 1)
    return float(a @ dist.probabilities) / n


@dataclass(frozen=True)
class Moments:
    """Mean, variance and Fano factor of a count distribution."""

    mean: float
    variance: float
    fano: float


def vector_moments(probabilities: np.ndarray) -> Moments:
    """Moments of a probability vector indexed by count a = 0, 1, 2, ...

    The Fano factor variance/mean is defined as 1 when mean = 0 (a point
    mass at zero counts is Poisson-like by convention).
    """
    probs = np.asarray(probabilities, dtype=float)
    a = np.arange(len(probs))
    mean = float(a @ probs)
    variance = float(((a - mean) ** 2) @ probs)
    fano = variance / mean if mean > 0 else 1.0
    return Moments(mean=mean, variance=variance, fano=fano)


def moments(dist: CountDistribution) -> Moments:
    """Moments of a CountDistribution."""
    return vector_moments(dist.probabilities)
