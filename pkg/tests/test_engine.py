"""Channel and free-surface solver plumbing: geometry, invariance, stepping."""

from fractions import Fraction

import numpy as np
import pytest

from fslbm.collision import TrtParams, set_magic
from fslbm.engine import (
    ChannelSolver,
    ChannelSpec,
    DivergenceError,
    FreeSurfaceSolver,
)
from fslbm.lattice import GAS, INTERFACE, LIQUID, OPPOSITE, Q, W, WALL
from fslbm.oracles import error_norms, oracle_film_parabola


def test_channel_spec_defaults_nx_to_the_slope_denominator():
    spec = ChannelSpec(height=8.0, slope=Fraction(1, 4))
    assert spec.nx == 4
    assert spec.zshift == 1
    assert ChannelSpec(height=8.0).nx == 1
    assert ChannelSpec(height=8.0).zshift == 0


def test_channel_spec_frame_is_orthonormal():
    spec = ChannelSpec(height=5.0, slope=Fraction(1, 7))
    t, n = spec.tangent, spec.normal
    assert np.hypot(*t[[0, 2]]) == pytest.approx(1.0, rel=1e-15)
    assert np.hypot(*n[[0, 2]]) == pytest.approx(1.0, rel=1e-15)
    assert abs(t @ n) < 1e-16
    assert t[0] > 0 and n[2] > 0  # x-ish tangent, z-ish normal


def test_channel_spec_rejects_incompatible_wrap_and_rules():
    with pytest.raises(ValueError, match="slope"):
        ChannelSpec(height=4.0, slope=Fraction(1, 4), nx=6)
    with pytest.raises(ValueError, match="wall rule"):
        ChannelSpec(height=4.0, bottom="fsl")
    with pytest.raises(ValueError, match="top rule"):
        ChannelSpec(height=4.0, top="slip")


def test_straight_channel_puts_nodes_half_a_cell_off_the_wall():
    solver = ChannelSolver(ChannelSpec(height=8.0, nx=4, ny=2), TrtParams())
    depths = solver.node_depths()
    active = solver.active_interior()
    assert solver.nz == 8
    assert active.all()  # every interior node sits strictly inside the channel
    expect = np.arange(8) + 0.5
    assert np.allclose(depths[0, 0], expect, rtol=0, atol=0)
    # walls live below the interior, gas above — checked via the flag array
    assert (solver.flags[:, :, 0] == WALL).all()
    assert (solver.flags[1:-1, 1:-1, -1] == GAS).all()


def test_rotated_channel_link_cuts_stay_in_range():
    spec = ChannelSpec(height=8.0, slope=Fraction(1, 4), bottom="cli")
    solver = ChannelSolver(spec, TrtParams())
    assert len(solver.tables) == 2  # one per boundary
    for tab in solver.tables:
        assert len(tab) > 0
        assert np.all((tab.delta >= 0.0) & (tab.delta <= 1.0))
        assert np.array_equal(tab.qbar, OPPOSITE[tab.q])
    # active nodes exist at several distinct depths in a rotated channel
    d = solver.node_depths()[solver.active_interior()]
    assert np.unique(np.round(d, 12)).size > 8


@pytest.mark.parametrize("slope,bottom,top", [
    (Fraction(0), "bounce-back", "fsl"),
    (Fraction(0), "bounce-back", "fsk"),
    (Fraction(1, 4), "cli", "fsl-simplified"),
])
def test_rest_state_is_invariant_under_stepping(slope, bottom, top):
    spec = ChannelSpec(height=6.0, slope=slope, bottom=bottom, top=top)
    solver = ChannelSolver(spec, TrtParams(lambda_plus=-1.2, lambda_minus=-0.8))
    solver.run(20)
    assert np.max(np.abs(solver.velocity()[solver.active_interior()])) < 1e-15
    assert np.allclose(solver.f[solver.active], W, rtol=0, atol=1e-15)


def test_chapman_enskog_start_holds_a_linear_shear_profile():
    a = 0.002
    S_top = np.zeros((3, 3))
    S_top[0, 2] = S_top[2, 0] = a / 2
    spec = ChannelSpec(height=8.0, nx=4, top="fsl", S_top=S_top)
    solver = ChannelSolver(spec, TrtParams())
    u = np.zeros(solver.shape + (3,))
    u[..., 0] = a * solver.depth
    S = np.zeros(solver.shape + (3, 3))
    S[..., 0, 2] = S[..., 2, 0] = a / 2
    solver.initialize_chapman_enskog(u, S)
    solver.run(60)
    active = solver.active_interior()
    got = solver.velocity()[..., 0][active]
    want = a * solver.node_depths()[active]
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-12


def test_gravity_film_relaxes_to_the_exact_parabola():
    g, nu = 1e-5, 1.0 / 6.0
    params = set_magic(TrtParams(force=(g, 0.0, 0.0)), 3.0 / 16.0)
    spec = ChannelSpec(height=4.0, top="fsl")
    solver = ChannelSolver(spec, params)
    steps = solver.run_to_steady(tol=1e-13)
    assert steps < 2_000_000
    z = solver.node_depths()[0, 0]
    l2, _ = error_norms(solver.velocity()[0, 0, :, 0],
                        oracle_film_parabola(z, 4.0, g, nu))
    assert l2 < 1e-10


def test_runaway_forcing_raises_divergence_error():
    spec = ChannelSpec(height=4.0, top="fsl")
    solver = ChannelSolver(spec, TrtParams(force=(0.01, 0.0, 0.0)))
    with pytest.raises(DivergenceError, match="incompressible"):
        solver.run(400)


def _box_flags(nx, ny, nz, fill_to):
    """Open box: liquid up to fill_to, one interface layer, gas above."""
    flags = np.full((nx, ny, nz), GAS, dtype=np.int8)
    flags[:, :, :fill_to] = LIQUID
    flags[:, :, fill_to] = INTERFACE
    return flags


def test_free_surface_solver_rejects_unknown_rules():
    with pytest.raises(ValueError, match="unknown free-surface rule"):
        FreeSurfaceSolver(_box_flags(4, 1, 4, 2), TrtParams(), rule="bounce-back")


@pytest.mark.parametrize("rule", ["fsk", "fsl"])
def test_static_pool_stays_put_without_gravity(rule):
    flags0 = _box_flags(6, 1, 6, 3)
    solver = FreeSurfaceSolver(flags0, TrtParams(), rule=rule)
    fill0 = solver.fill.copy()
    for _ in range(50):
        solver.step()
    assert np.max(np.abs(solver.velocity())) < 1e-14
    assert np.array_equal(solver.flags[1:-1, 1:-1, 1:-1], flags0)
    assert np.allclose(solver.fill, fill0, rtol=0, atol=1e-14)


def test_dynamic_run_conserves_total_mass():
    flags0 = np.full((12, 1, 8), GAS, dtype=np.int8)
    flags0[:5, :, :4] = LIQUID
    flags0[4, :, :4] = INTERFACE
    flags0[:5, :, 3] = INTERFACE
    g = 1e-4
    solver = FreeSurfaceSolver(flags0, TrtParams(force=(0, 0, -g)), rule="fsk")
    m0 = solver.total_mass()
    for _ in range(60):
        solver.step()
    assert solver.total_mass() == pytest.approx(m0, rel=1e-12)
    solver.check_divergence()  # still well inside the incompressible regime


def test_front_position_tracks_the_rightmost_wet_cell():
    flags0 = np.full((10, 1, 5), GAS, dtype=np.int8)
    flags0[:5, :, :3] = LIQUID
    flags0[4, :, :3] = INTERFACE
    flags0[:5, :, 2] = INTERFACE
    solver = FreeSurfaceSolver(flags0, TrtParams())
    assert solver.front_position() == 5
    # a nose riding above a friction-pinned bottom row still counts
    solver.fill[8, 1, 2] = 0.8
    assert solver.front_position() == 8


def test_interior_views_report_interior_shapes():
    flags0 = _box_flags(4, 2, 5, 2)
    solver = FreeSurfaceSolver(flags0, TrtParams())
    rho, u, fill, flags = solver.interior_views()
    assert rho.shape == (4, 2, 5)
    assert u.shape == (4, 2, 5, 3)
    assert fill.shape == (4, 2, 5)
    assert np.array_equal(flags, flags0)
    assert np.allclose(rho[flags0 == LIQUID], 1.0, rtol=0, atol=1e-15)


def test_check_divergence_flags_nonsense_states():
    solver = FreeSurfaceSolver(_box_flags(4, 1, 4, 2), TrtParams())
    solver.f[2, 1, 1, 1] = np.nan
    with pytest.raises(DivergenceError):
        solver.check_divergence()
