"""Parameter derivations: trap scales, saturation, reduced counting parameters."""

import math

import numpy as np
import pytest
from scipy.constants import c as SPEED_OF_LIGHT

from becount import (
    PhysicalConfig,
    RegimeError,
    derive_detector_params,
    derive_trap_scales,
    reduced_params,
    resonance_wavenumber,
    saturation,
    saturation_from_q,
)

# Rb-87-like inputs used for the frozen reference scales below
MASS = 1.443e-25
NU = 2.0 * math.pi * 100.0
K0 = 2.0 * math.pi / 780e-9


def make_config(**overrides):
    fields = dict(
        atom_mass=MASS,
        trap_frequency=NU,
        photon_wavenumber=K0,
        rabi_frequency=1.0,
        detuning=0.0,
        atom_number=1,
    )
    fields.update(overrides)
    return PhysicalConfig(**fields)


def test_trap_scales_frozen_reference():
    # 40-digit evaluation of the same formulas, rounded to double
    ts = derive_trap_scales(make_config())
    assert ts.ground_spread == pytest.approx(7.6260558753114102e-7, rel=1e-13)
    assert ts.lamb_dicke == pytest.approx(6.1430669522419504, rel=1e-13)
    assert ts.group_velocity == pytest.approx(0.002963007183218722, rel=1e-13)
    assert ts.escape_rate == pytest.approx(24412.518742405905, rel=1e-13)


def test_escape_rate_quadruples_with_wavenumber_at_fixed_lamb_dicke():
    # doubling k0 and quadrupling nu leaves eta unchanged, so gamma ~ k0^2
    base = derive_trap_scales(make_config())
    scaled = derive_trap_scales(make_config(photon_wavenumber=2.0 * K0,
                                            trap_frequency=4.0 * NU))
    assert scaled.lamb_dicke == pytest.approx(base.lamb_dicke, rel=1e-14)
    assert scaled.escape_rate == pytest.approx(4.0 * base.escape_rate, rel=1e-13)


def test_weak_binding_limit():
    # nu -> 0 sends eta -> inf: v_g -> hbar k0 / 2m and gamma -> 0
    from scipy.constants import hbar

    loose = derive_trap_scales(make_config(trap_frequency=1e-6 * NU))
    tight = derive_trap_scales(make_config())
    assert loose.group_velocity == pytest.approx(hbar * K0 / (2.0 * MASS), rel=1e-6)
    assert loose.escape_rate < 1e-2 * tight.escape_rate


def test_resonance_wavenumber_quarter_trap_shift():
    # omega_eg = c*k + nu/4 makes k0 come out as exactly k
    k = 1.23e7
    nu = 4.0 * SPEED_OF_LIGHT * 1e-3
    cfg = make_config(trap_frequency=nu,
                      transition_frequency=SPEED_OF_LIGHT * k + nu / 4.0)
    assert resonance_wavenumber(cfg) == pytest.approx(k, rel=1e-14)


def test_resonance_wavenumber_frozen_reference():
    cfg = make_config(transition_frequency=2.0 * math.pi * 384.2304844685e12)
    assert resonance_wavenumber(cfg) == pytest.approx(8052875.4815533632, rel=1e-13)


def test_resonance_wavenumber_requires_transition_frequency():
    with pytest.raises(ValueError):
        resonance_wavenumber(make_config())


@pytest.mark.parametrize("bad", [
    dict(atom_mass=0.0),
    dict(atom_mass=-1e-25),
    dict(trap_frequency=0.0),
    dict(photon_wavenumber=-1.0),
    dict(atom_number=0),
])
def test_config_rejects_nonpositive_inputs(bad):
    with pytest.raises(ValueError):
        make_config(**bad)


def test_saturation_resonant_single_excitation():
    # S_{A,1} on resonance reduces to 16 Omega^2 A / gamma^2
    for A, omega, gamma in [(100, 0.0035, 1.0), (7, 0.02, 2.5), (1, 0.1, 3.0)]:
        expect = 16.0 * omega**2 * A / gamma**2
        assert saturation(A, 1, omega, gamma, 0.0) == pytest.approx(expect, rel=1e-14)
    assert saturation(100, 1, 0.0035, 1.0, 0.0) == pytest.approx(0.0196, rel=1e-12)


def test_saturation_lorentzian_detuning():
    s0 = saturation(50, 2, 0.01, 2.0, 0.0)
    sd = saturation(50, 2, 0.01, 2.0, 3.0)
    assert sd == pytest.approx(s0 * 1.0 / (3.0**2 + 1.0) * 1.0, rel=1e-14)


def test_saturation_zero_coupling():
    assert saturation(10, 1, 0.0, 1.0, 0.5) == 0.0


def test_saturation_rejects_depleted_enhancement():
    # M = A - (N-1)/2 <= 0 has no over-damped description
    with pytest.raises(ValueError):
        saturation(2, 6, 0.1, 1.0, 0.0)


def test_saturation_from_q_exact_values():
    assert saturation_from_q(1.0) == pytest.approx(0.75, rel=1e-15)
    assert saturation_from_q(100.0) == pytest.approx(201.0 / 10201.0, rel=1e-15)
    assert saturation_from_q(math.inf) == 0.0
    with pytest.raises(ValueError):
        saturation_from_q(0.0)


@pytest.mark.parametrize("q", [0.3, 1.0, 2.0, 10.0, 100.0, 1e4, 1e6])
def test_q_round_trip(q):
    got = reduced_params(saturation_from_q(q), 1.0, 0.0).q
    assert got == pytest.approx(q, rel=1e-11)


def test_reduced_params_strong_saturation():
    red = reduced_params(0.75, 2.0, 0.0)
    assert red.q == pytest.approx(1.0, rel=1e-15)
    assert red.tau0 == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("S", [1e-3, 1e-5, 1e-8, 1e-12])
def test_reduced_params_small_saturation_expansion(S):
    # q = 2/S - 3/2 + O(S) and 1/tau0 = (gamma S/4)(1 + O(S)), with no
    # cancellation even when S is at the rounding floor
    red = reduced_params(S, 1.0, 0.0)
    assert abs(red.q - 2.0 / S) <= 2.0
    assert red.tau0 == pytest.approx(4.0 / S, rel=S + 1e-14)


def test_reduced_params_escape_probability():
    red = reduced_params(0.3, 2.0, 1.7)
    assert red.p == pytest.approx(1.0 - math.exp(-1.7 / red.tau0), rel=1e-14)
    assert reduced_params(0.3, 2.0, 0.0).p == 0.0
    assert reduced_params(0.3, 2.0, 1e6).p == 1.0


def test_reduced_params_loss_free_sentinel():
    red = reduced_params(0.0, 2.0, 5.0)
    assert math.isinf(red.q)
    assert math.isinf(red.tau0)
    assert red.p == 0.0


def test_reduced_params_regime_gate():
    with pytest.raises(RegimeError):
        reduced_params(1.0, 1.0, 0.0)
    with pytest.raises(RegimeError):
        reduced_params(1.3, 1.0, 0.0)
    with pytest.raises(ValueError):
        reduced_params(-0.1, 1.0, 0.0)
    assert issubclass(RegimeError, ValueError)


def test_detector_params_pipeline_consistency():
    cfg = make_config(rabi_frequency=8.0, atom_number=100)
    tau = 1e-4
    det = derive_detector_params(cfg, tau)
    ts = derive_trap_scales(cfg)
    assert det.escape_rate == ts.escape_rate
    assert det.saturation == pytest.approx(
        saturation(100, 1, 8.0, ts.escape_rate, 0.0), rel=1e-14)
    red = reduced_params(det.saturation, ts.escape_rate, tau)
    assert det.q == red.q
    assert det.tau0 == red.tau0
    assert det.escape_probability == red.p
    assert 0.0 < det.escape_probability < 1.0
