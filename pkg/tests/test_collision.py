"""Collision-operator properties: conservation, fixed points, forcing, and
parameter plumbing."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis.extra.numpy import arrays
from hypothesis.strategies import floats, tuples

from fslbm.collision import (TrtParams, collide, equilibrium,
                             equilibrium_parts, from_tau,
                             lambda_plus_for_viscosity, moments, set_magic,
                             viscosity)
from fslbm.lattice import C, Q, W

# physically scaled random states: weights perturbed by up to 20 percent,
# so rho stays near 1 and absolute tolerances mean what they say
states = arrays(float, (Q,), elements=floats(-0.2, 0.2)).map(
    lambda eps: W * (1.0 + eps))

rates = floats(-1.9, -0.1)


@given(states, rates, rates)
def test_mass_is_conserved(f, lam_p, lam_m):
    params = TrtParams(lambda_plus=lam_p, lambda_minus=lam_m)
    assert abs(collide(f, params).sum() - f.sum()) < 1e-14


@given(states, rates, rates)
def test_momentum_is_conserved_without_force(f, lam_p, lam_m):
    params = TrtParams(lambda_plus=lam_p, lambda_minus=lam_m)
    j_before = f @ C.astype(float)
    j_after = collide(f, params) @ C.astype(float)
    assert np.max(np.abs(j_after - j_before)) < 1e-14


@given(states, rates, tuples(floats(-1e-3, 1e-3), floats(-1e-3, 1e-3),
                             floats(-1e-3, 1e-3)))
def test_force_adds_exactly_one_unit_of_momentum(f, lam_m, force):
    """The shifted-equilibrium forcing yields sum_q c_q f~ = sum_q c_q f + F."""
    params = TrtParams(lambda_plus=-1.0, lambda_minus=lam_m, force=force)
    j_before = f @ C.astype(float)
    j_after = collide(f, params) @ C.astype(float)
    assert np.max(np.abs(j_after - (j_before + np.asarray(force)))) < 1e-14


@given(floats(0.9, 1.1), tuples(floats(-0.05, 0.05), floats(-0.05, 0.05),
                                floats(-0.05, 0.05)), rates, rates)
def test_equilibrium_is_a_fixed_point(rho, u, lam_p, lam_m):
    params = TrtParams(lambda_plus=lam_p, lambda_minus=lam_m)
    eq = equilibrium(rho, np.asarray(u), params)
    assert np.max(np.abs(collide(eq, params) - eq)) < 1e-14


@given(floats(0.9, 1.1), tuples(floats(-0.05, 0.05), floats(-0.05, 0.05),
                                floats(-0.05, 0.05)))
def test_equilibrium_moments_match_inputs(rho, u):
    params = TrtParams()
    eq = equilibrium(rho, np.asarray(u), params)
    state = moments(eq, params)
    assert abs(state.rho - rho) < 1e-14
    assert np.max(np.abs(state.u - np.asarray(u))) < 1e-14


def test_moments_apply_the_half_force_shift():
    params = TrtParams(force=(2e-3, 0.0, 0.0))
    state = moments(W.copy(), params)  # rest populations, rho0 = 1
    assert state.u[0] == pytest.approx(1e-3, abs=0, rel=1e-15)
    assert state.u[1] == state.u[2] == 0.0


def test_equilibrium_odd_part_carries_the_force_shift():
    force = (3e-3, 0.0, 0.0)
    params = TrtParams(lambda_minus=-1.2, force=force)
    _, e_minus = equilibrium_parts(1.0, np.zeros(3), params)
    j_eq = -(0.5 + 1.0 / params.lambda_minus) * np.asarray(force)
    expect = 3.0 * W * (C.astype(float) @ j_eq)
    assert np.max(np.abs(e_minus - expect)) < 1e-18


def test_compressible_equilibrium_is_homogeneous_in_density():
    u = np.array([0.02, 0.0, -0.01])
    comp = TrtParams(rho0=None)
    eq19 = equilibrium(1.9, u, comp)
    eq10 = equilibrium(1.0, u, comp)
    state = moments(eq19, comp)
    assert state.rho == pytest.approx(1.9, rel=1e-14)
    assert np.max(np.abs(state.u - u)) < 1e-15
    # rho0 = rho makes every equilibrium term linear in rho ...
    assert np.max(np.abs(eq19 - 1.9 * eq10)) < 1e-15
    # ... whereas the incompressible variant pins momentum and N_q at rho0 = 1
    inc = TrtParams(rho0=1.0)
    assert not np.allclose(equilibrium(1.9, u, inc), 1.9 * equilibrium(1.0, u, inc),
                           atol=1e-12)


def test_linear_equilibrium_drops_the_quadratic_term():
    u = np.array([0.05, 0.01, 0.0])
    lin = equilibrium(1.0, u, TrtParams(use_nonlinear=False))
    non = equilibrium(1.0, u, TrtParams(use_nonlinear=True))
    cu = C.astype(float) @ u
    n_q = 3.0 * W * (1.5 * cu * cu - 0.5 * (u @ u))
    assert np.max(np.abs(non - lin - n_q)) < 1e-16


def test_viscosity_round_trip():
    for nu in (1.0 / 6.0, 0.5, 1.0, 1.0 / 3.0):
        lam = lambda_plus_for_viscosity(nu)
        assert viscosity(TrtParams(lambda_plus=lam)) == pytest.approx(nu, rel=1e-15)


def test_from_tau_matches_bgk_convention():
    params = from_tau(1.0)
    assert params.lambda_plus == params.lambda_minus == -1.0
    assert viscosity(from_tau(2.0)) == pytest.approx(0.5, rel=1e-15)


def test_set_magic_hits_the_target_product():
    base = TrtParams(lambda_plus=-0.5)
    for target in (3.0 / 16.0, 0.25, 0.5):
        tuned = set_magic(base, target)
        assert tuned.magic == pytest.approx(target, rel=1e-14)
        assert tuned.lambda_plus == base.lambda_plus


def test_set_magic_rejects_unreachable_targets():
    with pytest.raises(ValueError, match="positive"):
        set_magic(TrtParams(), -0.1)
    with pytest.raises(ValueError, match="positive"):
        set_magic(TrtParams(), 0.0)
    # an overflowing target drives lambda_minus to -0.0, out of range
    with pytest.raises(ValueError, match="outside"):
        set_magic(TrtParams(), float("inf"))


@pytest.mark.parametrize("bad", [-2.0, -2.5, 0.0, 0.3])
def test_relaxation_rates_are_range_checked(bad):
    with pytest.raises(ValueError, match=r"lambda_plus out of \(-2,0\)"):
        TrtParams(lambda_plus=bad)
    with pytest.raises(ValueError, match=r"lambda_minus out of \(-2,0\)"):
        TrtParams(lambda_minus=bad)


def test_rho0_must_be_positive():
    with pytest.raises(ValueError, match="rho0"):
        TrtParams(rho0=-1.0)


def test_magic_parameter_definition():
    params = TrtParams(lambda_plus=-1.0, lambda_minus=-1.0)
    # Lambda_pm = -(1/2 + 1/lambda_pm) = 1/2 at lambda = -1, so magic = 1/4
    assert params.Lambda_plus == 0.5
    assert params.magic == 0.25


def test_collide_is_vectorized_over_leading_axes():
    rng = np.random.default_rng(11)
    f = W * (1.0 + 0.1 * rng.standard_normal((4, 5, Q)))
    params = TrtParams(lambda_plus=-1.3, lambda_minus=-0.7)
    batch = collide(f, params)
    rowwise = np.stack([collide(f[i, j], params)
                        for i in range(4) for j in range(5)])
    assert np.max(np.abs(batch.reshape(-1, Q) - rowwise)) < 1e-15
