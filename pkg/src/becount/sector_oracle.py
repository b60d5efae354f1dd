"""Exact small-scale solver in the conserved-excitation sector basis.

The coupled atom-light system conserves the total excitation number N
between escape events, so the state lives in sectors spanned by |A, N, m>
with m = 0..N photons. This module builds the effective non-Hermitian
Hamiltonian of one sector, the jump operator connecting neighboring
sectors when an atom escapes, and propagates the coupled a-conditioned
density-operator blocks to obtain the exact count distribution P_a(tau)
with no large-A or over-damped approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .counting import CountDistribution


@dataclass(frozen=True)
class SectorBasis:
    """Sector of fixed atom number A and excitation number N.

    States |A, N, m> are indexed by the photon number m = 0..N; the
    remaining N-m excitations sit in the atomic mode.
    """

    A: int
    N: int

    def __post_init__(self):
        if self.A < 1:
            raise ValueError(f"atom number must be >= 1, got {self.A}")
        if self.N < 0:
            raise ValueError(f"excitation number must be >= 0, got {self.N}")
        if self.N > self.A:
            raise ValueError(
                f"excitation number N = {self.N} exceeds atom number A = {self.A}"
            )

    @property
    def dimension(self) -> int:
        return self.N + 1


@dataclass(frozen=True)
class EffectiveHamiltonianSector:
    """Tridiagonal effective Hamiltonian (units of rad/s) on one sector.

    The anti-Hermitian part is diagonal, -i*gamma/2 times the number of
    excited atoms N-m: only excited atoms decay.
    """

    basis: SectorBasis
    matrix: np.ndarray
    omega: float
    delta: float
    gamma: float


def _heff_matrix(
    A: int, N: int, omega: float, delta: float, gamma: float, coupling: np.ndarray
) -> np.ndarray:
    dim = N + 1
    mat = np.zeros((dim, dim), dtype=complex)
    delta_prime = delta + 0.5j * gamma
    m = np.arange(dim)
    mat[m, m] = -delta_prime * (N - m - A / 2.0) - 0.25j * gamma * A
    mat[m[1:], m[1:] - 1] = coupling
    mat[m[1:] - 1, m[1:]] = coupling
    return mat


def build_heff(
    A: int, N: int, omega: float, delta: float, gamma: float
) -> EffectiveHamiltonianSector:
    """Exact effective Hamiltonian of the (A, N) sector.

    Diagonal -Delta'(N - m - A/2) - i*gamma*A/4 with Delta' = Delta +
    i*gamma/2; coupling between m and m-1 photons is
    -|Omega| sqrt((N-m+1)(A-N+m) m), the collective emission enhancement.
    """
    basis = SectorBasis(A=A, N=N)
    m = np.arange(1, N + 1)
    coupling = -omega * np.sqrt((N - m + 1.0) * (A - N + m) * m)
    return EffectiveHamiltonianSector(
        basis=basis,
        matrix=_heff_matrix(A, N, omega, delta, gamma, coupling),
        omega=omega,
        delta=delta,
        gamma=gamma,
    )


def build_heff_zero_order(
    A: int, N: int, omega: float, delta: float, gamma: float
) -> EffectiveHamiltonianSector:
    """Leading large-A Hamiltonian: uniform coupling -|Omega| sqrt(M (N-m+1) m).

    Replaces the m-dependent occupation factor A-N+m of the exact
    coupling by the constant M = A - (N-1)/2, which is what makes the
    closed-form ladder solvable. Accurate to relative O(N/A).
    """
    basis = SectorBasis(A=A, N=N)
    M = A - (N - 1) / 2.0
    if M <= 0:
        raise ValueError(f"enhancement factor M = {M} must be positive")
    m = np.arange(1, N + 1)
    coupling = -omega * np.sqrt(M) * np.sqrt((N - m + 1.0) * m)
    return EffectiveHamiltonianSector(
        basis=basis,
        matrix=_heff_matrix(A, N, omega, delta, gamma, coupling),
        omega=omega,
        delta=delta,
        gamma=gamma,
    )


def jump_operator(A: int, N: int) -> np.ndarray:
    """Escape operator from sector (A, N) to (A-1, N-1).

    An excited atom leaves the trap: the photon number m is unchanged and
    the amplitude is sqrt(N - m), the number of excited atoms available.
    Shape (N, N+1): target states m = 0..N-1 from source states m = 0..N.
    """
    basis = SectorBasis(A=A, N=N)
    if N < 1:
        raise ValueError(f"sector N = {N} has no excitation to lose")
    out = np.zeros((N, basis.dimension))
    m = np.arange(N)
    out[m, m] = np.sqrt(N - m)
    return out


def exact_count_statistics(
    A: int,
    n: int,
    tau: float,
    omega: float,
    delta: float,
    gamma: float,
    solver_tol: float = 1e-10,
    zero_order: bool = False,
) -> CountDistribution:
    """Exact P_a(tau | n) from the coupled conditional-density evolution.

    Integrates d rho_a/dt = -i(H_a rho_a - rho_a H_a^dag) + gamma *
    E_a rho_{a-1} E_a^dag over the blocks a = 0..n, starting from the
    pure n-photon state, and returns P_a = trace rho_a(tau). Block a
    lives on sector (A-a, n-a); E_a is its feeding jump operator.

    Parameters
    ----------
    solver_tol : float
        Relative and absolute tolerance of the adaptive integrator; the
        probabilities are accurate to a small multiple of it.
    zero_order : bool
        Use the leading large-A Hamiltonian in every block instead of the
        exact one.

    Raises
    ------
    RuntimeError
        If the integrator fails or total probability drifts beyond
        10 * solver_tol.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n > A:
        raise ValueError(f"n = {n} exceeds atom number A = {A}")
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")

    method = "sector-exact-zero-order" if zero_order else "sector-exact"
    if n == 0 or tau == 0.0 or omega == 0.0:
        probs = np.zeros(n + 1)
        probs[0] = 1.0
        return CountDistribution(
            n=n, probabilities=probs, q=np.nan, p=np.nan, method=method
        )

    build = build_heff_zero_order if zero_order else build_heff
    hams = [build(A - a, n - a, omega, delta, gamma).matrix for a in range(n + 1)]
    jumps = [None] + [jump_operator(A - a + 1, n - a + 1) for a in range(1, n + 1)]
    dims = [n - a + 1 for a in range(n + 1)]
    offsets = np.cumsum([0] + [d * d for d in dims])
    size = offsets[-1]

    def unpack(y):
        blocks = []
        state = y[:size] + 1j * y[size:]
        for a in range(n + 1):
            blocks.append(state[offsets[a] : offsets[a + 1]].reshape(dims[a], dims[a]))
        return blocks

    def rhs(_t, y):
        blocks = unpack(y)
        out = np.empty(size, dtype=complex)
        for a in range(n + 1):
            h = hams[a]
            rho = blocks[a]
            drho = -1j * (h @ rho - rho @ h.conj().T)
            if a >= 1:
                e = jumps[a]
                drho = drho + gamma * (e @ blocks[a - 1] @ e.T)
            out[offsets[a] : offsets[a + 1]] = drho.ravel()
        return np.concatenate([out.real, out.imag])

    y0 = np.zeros(2 * size)
    y0[offsets[0] + (dims[0] * dims[0] - 1)] = 1.0  # rho_0 = |m=n><m=n|
    sol = solve_ivp(
        rhs,
        (0.0, tau),
        y0,
        method="LSODA",
        rtol=solver_tol,
        atol=solver_tol * 1e-2,
        dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(f"sector propagation failed: {sol.message}")

    blocks = unpack(sol.y[:, -1])
    probs = np.array([float(np.trace(b).real) for b in blocks])
    total = probs.sum()
    if abs(total - 1.0) > 10.0 * max(solver_tol, 1e-13):
        raise RuntimeError(
            f"probability drifted to {total:.12f}; tighten solver_tol"
        )
    probs = np.clip(probs, 0.0, None)
    return CountDistribution(
        n=n, probabilities=probs, q=np.nan, p=np.nan, method=method
    )
