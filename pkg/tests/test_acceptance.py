"""Acceptance gate: seven headline requirements, one test per criterion.

Tolerances and grids here are pinned; they must never be loosened to
make a run green. Criterion 4(ii) is expected to fail at (q = 10,
n = 3): the closed form carries a collective renormalization error of
order S per escape, and at S ~ 0.17 that error (total variation ~ 0.07
against the exact sector solver) exceeds the 0.01 + n/A budget. The
failure is genuine, reproducible and documented; the remaining grid
points pass.
"""

import math
import time

import mpmath as mp
import numpy as np
from scipy.linalg import expm

from becount import (
    binomial_pmf,
    count_distribution,
    efficiency,
    exact_count_statistics,
    matrix_element_closed,
    reduced_params,
    route_crosscheck,
    saturation_from_q,
    simulate_counts,
    transition_probability_integral,
    vector_moments,
)

GRID_Q = (10.0, 100.0)
GRID_P = (0.6, 0.9)
GRID_N = (1, 3, 10)


def rotation_matrix(alpha, beta, n):
    dim = n + 1
    m = np.arange(dim)
    gen = np.zeros((dim, dim), dtype=complex)
    gen[m, m] = 1j * beta * (m - n / 2.0)
    c = 1j * alpha * np.sqrt((n - m[:-1]) * (m[:-1] + 1)) / 2.0
    gen[m[1:], m[1:] - 1] += c
    gen[m[1:] - 1, m[1:]] += c
    return gen


def element_mp(alpha, beta, n, dps=40):
    """Dense matrix exponential in dps-digit arithmetic from exact entries."""
    with mp.workdps(dps):
        gen = rotation_matrix(alpha, beta, n)
        mat = mp.matrix(n + 1, n + 1)
        for i in range(n + 1):
            for j in range(n + 1):
                mat[i, j] = mp.mpc(gen[i, j])
        return complex(mp.expm(mat)[n - 1, n])


def test_criterion_1_reference_efficiencies():
    start = time.time()
    cases = [
        (100.0, 0.9, 0.8862),
        (10.0, 0.9, 0.7730),
        (100.0, 0.6, 0.5639),
        (10.0, 0.6, 0.3968),
    ]
    failures = []
    for q, p, expect in cases:
        got = efficiency(q, p, 10)
        print(f"eta_D(q={q:g}, p={p}) = {got:.6f}  reference {expect}")
        if abs(got - expect) > 5e-4:
            failures.append(f"eta_D(q={q:g}, p={p}) = {got:.6f} != {expect} +- 5e-4")
    elapsed = time.time() - start
    print(f"criterion 1 elapsed: {elapsed:.2f}s (budget 1s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 1.0


def test_criterion_2_binomial_limit():
    start = time.time()
    failures = []
    for p in GRID_P:
        for n in (1, 10, 20):
            eta = efficiency(1e6, p, n)
            dist = count_distribution(1e6, p, n)
            tv = 0.5 * np.abs(dist.probabilities - binomial_pmf(n, p)).sum()
            print(f"q=1e6 p={p} n={n}: |eta - p| = {abs(eta - p):.2e}, "
                  f"TV to Binomial = {tv:.2e}")
            if abs(eta - p) > 1e-3:
                failures.append(f"efficiency(1e6, {p}, {n}) off by {abs(eta - p):.2e}")
            if tv > 1e-3:
                failures.append(f"TV(1e6, {p}, {n}) = {tv:.2e} > 1e-3")
    elapsed = time.time() - start
    print(f"criterion 2 elapsed: {elapsed:.2f}s (budget 1s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 1.0


def test_criterion_3_narrower_than_conventional():
    start = time.time()
    failures = []
    for p, eta_ref in ((0.9, 0.7730), (0.6, 0.3968)):
        fano = vector_moments(count_distribution(10.0, p, 10).probabilities).fano
        fano_ref = vector_moments(binomial_pmf(10, eta_ref)).fano
        print(f"p={p}: fano = {fano:.4f} vs Binomial({eta_ref}) fano = {fano_ref:.4f}")
        if not fano < fano_ref:
            failures.append(f"fano({p}) = {fano:.4f} not below {fano_ref:.4f}")
    elapsed = time.time() - start
    print(f"criterion 3 elapsed: {elapsed:.2f}s (budget 1s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 1.0


def test_criterion_4_oracle_triangle():
    start = time.time()
    failures = []

    # (i) Monte Carlo vs closed form, 1e6 shots, 4 standard errors per bin
    shots = 1_000_000
    for i, (q, p, n) in enumerate(
        [(q, p, n) for q in GRID_Q for p in GRID_P for n in GRID_N]
    ):
        closed = count_distribution(q, p, n)
        mc = simulate_counts(n, q, p, shots, rng=1000 + i)
        scale = np.sqrt(closed.probabilities * (1 - closed.probabilities)
                        / shots) + 1.0 / shots
        worst = float(np.max(np.abs(mc.probabilities - closed.probabilities)
                             / scale))
        print(f"MC q={q:g} p={p} n={n}: worst bin deviation {worst:.2f} sigma")
        if worst > 4.0:
            failures.append(
                f"Monte Carlo (q={q:g}, p={p}, n={n}) deviates {worst:.2f} "
                "standard errors"
            )

    # (ii) exact sector solver at A = 200 on resonance, coupling chosen to
    # reproduce each q exactly; budget 0.01 + n/A for n <= 4
    A, gamma = 200, 1.0
    for q in GRID_Q:
        S = saturation_from_q(q)
        omega = 0.25 * gamma * math.sqrt(S / A)
        red = reduced_params(S, gamma, 0.0)
        for p in GRID_P:
            tau = -red.tau0 * math.log1p(-p)
            for n in [n for n in GRID_N if n <= 4]:
                exact = exact_count_statistics(A, n, tau, omega, 0.0, gamma)
                closed = count_distribution(q, p, n)
                tv = 0.5 * np.abs(exact.probabilities
                                  - closed.probabilities).sum()
                budget = 0.01 + n / A
                print(f"sector q={q:g} p={p} n={n}: TV = {tv:.4f} "
                      f"(budget {budget:.4f})")
                if tv > budget:
                    failures.append(
                        f"sector solver (q={q:g}, p={p}, n={n}): TV {tv:.4f} "
                        f"exceeds {budget:.4f}; the closed form's O(S) "
                        "renormalization error dominates at this saturation"
                    )

    elapsed = time.time() - start
    print(f"criterion 4 elapsed: {elapsed:.2f}s (budget 120s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 120.0


def test_criterion_5_rotation_element_and_escape_integral():
    start = time.time()
    failures = []

    # closed form vs dense matrix exponential, 50 draws per n
    rng = np.random.default_rng(20260817)
    worst = 0.0
    for n in range(1, 13):
        for _ in range(50):
            alpha = complex(*rng.normal(0.0, 0.5, 2))
            beta = complex(*rng.normal(0.0, 0.5, 2))
            ref = expm(rotation_matrix(alpha, beta, n))[n - 1, n]
            got = matrix_element_closed(alpha, beta, n)
            rel = abs(got - ref) / abs(ref)
            worst = max(worst, rel)
            if rel > 1e-10:
                failures.append(
                    f"element(n={n}, alpha={alpha:.3f}, beta={beta:.3f}) "
                    f"off by {rel:.2e}"
                )
        # larger rotation angles, checked in 40-digit arithmetic where the
        # double-precision reference itself loses accuracy
        for _ in range(2):
            alpha = complex(*rng.normal(0.0, 1.5, 2))
            beta = complex(*rng.normal(0.0, 1.5, 2))
            ref = element_mp(alpha, beta, n)
            got = matrix_element_closed(alpha, beta, n)
            rel = abs(got - ref) / abs(ref)
            worst = max(worst, rel)
            if rel > 1e-10:
                failures.append(
                    f"element(n={n}) at wide angles off by {rel:.2e}"
                )
    print(f"rotation element: worst relative error {worst:.2e} over 624 draws")

    # total escape probability at weak saturation
    for n in (1, 2, 3):
        for S in (1e-4, 1e-5):
            A = 10000 * n
            omega = 0.25 * math.sqrt(S / (A - (n - 1) / 2.0))
            res = transition_probability_integral(A, n, omega, 1.0)
            print(f"integral n={n} S={S:g}: {res.value:.12f} "
                  f"(certified to {res.error_bound:.1e})")
            if res.error_bound > 1e-10:
                failures.append(f"integral(n={n}, S={S:g}) bound too loose")
            if not (0.999 <= res.value <= 1.0 + res.error_bound):
                failures.append(
                    f"integral(n={n}, S={S:g}) = {res.value!r} outside [0.999, 1]"
                )

    elapsed = time.time() - start
    print(f"criterion 5 elapsed: {elapsed:.2f}s (budget 10s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 10.0


def test_criterion_6_normalization_and_support():
    start = time.time()
    failures = []
    for q in (10.0, 100.0, 1e6):
        for p in GRID_P:
            for n in range(31):
                dist = count_distribution(q, p, n)
                total = dist.probabilities.sum()
                if abs(total - 1.0) > 1e-10:
                    failures.append(f"sum(q={q:g}, p={p}, n={n}) = {total!r}")
                if dist.probabilities.min() < 0.0:
                    failures.append(f"negative bin at (q={q:g}, p={p}, n={n})")
                if len(dist.probabilities) != n + 1:
                    failures.append(f"support beyond n at (q={q:g}, p={p}, n={n})")
    print("normalization within 1e-10 across 186 grid points, support = 0..n")
    elapsed = time.time() - start
    print(f"criterion 6 elapsed: {elapsed:.2f}s (budget 5s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 5.0


def test_criterion_7_route_equivalence():
    start = time.time()
    failures = []
    worst = 0.0
    for q in GRID_Q:
        for p in GRID_P:
            for n in range(1, 16):
                res = route_crosscheck(q, p, n, dps=60)
                if res.unstable:
                    failures.append(
                        f"partial fractions flagged unstable at "
                        f"(q={q:g}, p={p}, n={n}); cross-check not usable"
                    )
                    continue
                worst = max(worst, res.total_variation)
                if res.total_variation > 1e-8:
                    failures.append(
                        f"routes differ by TV {res.total_variation:.2e} at "
                        f"(q={q:g}, p={p}, n={n})"
                    )
    print(f"route equivalence: worst TV {worst:.2e} over 60 grid points")
    elapsed = time.time() - start
    print(f"criterion 7 elapsed: {elapsed:.2f}s (budget 30s)")
    assert not failures, "; ".join(failures)
    assert elapsed < 30.0
