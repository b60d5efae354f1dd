"""Physical trap and light parameters reduced to detector parameters.

Converts raw experimental inputs (atom mass, trap frequency, photon
wavenumber, Rabi frequency, detuning, atom number) into the derived
quantities that parameterize the counting statistics: the escape rate
gamma, the Lamb-Dicke parameter eta, the saturation S, and the reduced
triple (q, tau0, p) consumed by every downstream module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR


class RegimeError(ValueError):
    """Raised when parameters leave the supported over-damped regime."""


@dataclass(frozen=True)
class PhysicalConfig:
    """Raw experimental inputs, SI units throughout.

    Parameters
    ----------
    atom_mass : float
        Atom mass in kg.
    trap_frequency : float
        Angular trap frequency nu in rad/s.
    photon_wavenumber : float
        Wavenumber k0 of the probe light in 1/m.
    rabi_frequency : float
        Vacuum Rabi frequency |Omega| in rad/s (mode overlap folded in).
    detuning : float
        Detuning Delta in rad/s; any real value.
    atom_number : int
        Number of condensed atoms A, at least 1.
    transition_frequency : float, optional
        Atomic transition frequency omega_eg in rad/s. Only needed by
        resonance_wavenumber.
    """

    atom_mass: float
    trap_frequency: float
    photon_wavenumber: float
    rabi_frequency: float
    detuning: float
    atom_number: int
    transition_frequency: float | None = None

    def __post_init__(self):
        if self.atom_mass <= 0:
            raise ValueError(f"atom_mass must be positive, got {self.atom_mass}")
        if self.trap_frequency <= 0:
            raise ValueError(
                f"trap_frequency must be positive, got {self.trap_frequency}"
            )
        if self.photon_wavenumber <= 0:
            raise ValueError(
                f"photon_wavenumber must be positive, got {self.photon_wavenumber}"
            )
        if self.rabi_frequency < 0:
            raise ValueError(
                f"rabi_frequency must be nonnegative, got {self.rabi_frequency}"
            )
        if self.atom_number < 1:
            raise ValueError(f"atom_number must be >= 1, got {self.atom_number}")


@dataclass(frozen=True)
class TrapScales:
    """Length, velocity and rate scales of the trapped emitter."""

    ground_spread: float
    lamb_dicke: float
    group_velocity: float
    escape_rate: float


@dataclass(frozen=True)
class DetectorParams:
    """Derived detector parameters.

    ground_spread, lamb_dicke, group_velocity and escape_rate are the
    trap scales; saturation, q, tau0 and escape_probability parameterize
    the counting statistics. q is math.inf for saturation = 0.
    """

    ground_spread: float
    lamb_dicke: float
    group_velocity: float
    escape_rate: float
    saturation: float
    q: float
    tau0: float
    escape_probability: float


@dataclass(frozen=True)
class ReducedParams:
    """The (q, tau0, p) triple plus the saturation that produced it."""

    q: float
    tau0: float
    p: float
    saturation: float


def derive_trap_scales(cfg: PhysicalConfig) -> TrapScales:
    """Ground-state spread, Lamb-Dicke parameter, group velocity, escape rate.

    The emitted photon leaves the trap region of size delta_x0 at group
    velocity v_g; the escape rate is gamma = 2*pi*v_g/delta_x0. The
    bracket [1 + 1/(2 eta)^2] is kept exactly rather than dropped in the
    large-eta limit.

    Returns
    -------
    TrapScales
        ground_spread = sqrt(hbar/(2 m nu)), lamb_dicke = k0*ground_spread,
        group_velocity = (hbar k0/2m)[1 + (2 eta)^-2],
        escape_rate = (pi hbar k0^2/(m eta))[1 + (2 eta)^-2].
    """
    dx0 = math.sqrt(HBAR / (2.0 * cfg.atom_mass * cfg.trap_frequency))
    eta = cfg.photon_wavenumber * dx0
    bracket = 1.0 + 1.0 / (2.0 * eta) ** 2
    v_g = HBAR * cfg.photon_wavenumber / (2.0 * cfg.atom_mass) * bracket
    gamma = (
        math.pi
        * HBAR
        * cfg.photon_wavenumber**2
        / (cfg.atom_mass * eta)
        * bracket
    )
    return TrapScales(
        ground_spread=dx0, lamb_dicke=eta, group_velocity=v_g, escape_rate=gamma
    )


def resonance_wavenumber(cfg: PhysicalConfig) -> float:
    """Wavenumber satisfying the trap-shifted resonance c*k0 = omega_eg - nu/4."""
    if cfg.transition_frequency is None:
        raise ValueError("transition_frequency is required for the resonance check")
    return (cfg.transition_frequency - cfg.trap_frequency / 4.0) / SPEED_OF_LIGHT


def saturation(A: int, N: int, omega: float, gamma: float, delta: float) -> float:
    """Saturation parameter S_{A,N} = 4 |Omega|^2 M / (Delta^2 + (gamma/2)^2).

    M = A - (N-1)/2 is the collective enhancement factor. On resonance
    with a single excitation this reduces to S_A = 16 Omega^2 A / gamma^2.
    """
    if A < 1:
        raise ValueError(f"atom number must be >= 1, got {A}")
    if N < 0:
        raise ValueError(f"excitation number must be >= 0, got {N}")
    M = A - (N - 1) / 2.0
    if M <= 0:
        raise ValueError(
            f"enhancement factor M = A - (N-1)/2 = {M} is not positive; "
            f"too many excitations for A = {A}"
        )
    return 4.0 * omega**2 * M / (delta**2 + (gamma / 2.0) ** 2)


def saturation_from_q(q: float) -> float:
    """Inverse map S(q) = (1 + 2q)/(1 + q)^2; S(inf) = 0."""
    if math.isinf(q):
        return 0.0
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    return (1.0 + 2.0 * q) / (1.0 + q) ** 2


def reduced_params(S: float, gamma: float, tau: float) -> ReducedParams:
    """Reduce (S, gamma, tau) to the counting parameters (q, tau0, p).

    q = sqrt(1-S)/(1 - sqrt(1-S)), 1/tau0 = (gamma/2)(1 - sqrt(1-S)),
    p = 1 - exp(-tau/tau0). S = 0 maps to q = inf and tau0 = inf with
    p = 0: the loss-free limit, handled downstream as the exact Binomial
    sentinel.

    Raises
    ------
    RegimeError
        If S >= 1 (Rabi regime, outside the over-damped domain).
    """
    if not 0.0 <= S:
        raise ValueError(f"saturation must be nonnegative, got {S}")
    if S >= 1.0:
        raise RegimeError(
            f"saturation S = {S} is not in the over-damped regime S < 1"
        )
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    root = math.sqrt(1.0 - S)
    if S == 0.0:
        return ReducedParams(q=math.inf, tau0=math.inf, p=0.0, saturation=0.0)
    # 1 - sqrt(1-S) computed via S/(1+sqrt(1-S)) to avoid cancellation at small S
    one_minus_root = S / (1.0 + root)
    q = root / one_minus_root
    tau0 = 2.0 / (gamma * one_minus_root)
    p = -math.expm1(-tau / tau0)
    return ReducedParams(q=q, tau0=tau0, p=p, saturation=S)


def derive_detector_params(cfg: PhysicalConfig, tau: float) -> DetectorParams:
    """Full pipeline from physical inputs to DetectorParams.

    Uses the single-excitation saturation S_{A,1} evaluated at the
    configured detuning, then reduces with the derived escape rate and
    the observation time tau.
    """
    scales = derive_trap_scales(cfg)
    S = saturation(
        cfg.atom_number, 1, cfg.rabi_frequency, scales.escape_rate, cfg.detuning
    )
    red = reduced_params(S, scales.escape_rate, tau)
    return DetectorParams(
        ground_spread=scales.ground_spread,
        lamb_dicke=scales.lamb_dicke,
        group_velocity=scales.group_velocity,
        escape_rate=scales.escape_rate,
        saturation=S,
        q=red.q,
        tau0=red.tau0,
        escape_probability=red.p,
    )
