"""Lattice model invariants, checked in exact rational arithmetic where the
quantities are rational, and streaming/ghost-layer mechanics."""

from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis.extra.numpy import arrays
from hypothesis.strategies import floats

from fslbm.lattice import (C, CS2, OPPOSITE, Q, W, W_EXACT, DistributionField,
                           build_d3q19, even_odd_split, fill_ghosts, stream)

CS2_EXACT = Fraction(1, 3)


def delta(a, b):
    return Fraction(1) if a == b else Fraction(0)


def test_weights_sum_to_one_exactly():
    assert sum(W_EXACT) == Fraction(1)


def test_weights_match_float_table():
    assert all(float(we) == wf for we, wf in zip(W_EXACT, W))


def test_first_moment_vanishes():
    for a in range(3):
        assert sum(w * int(C[q, a]) for q, w in enumerate(W_EXACT)) == 0


def test_second_moment_is_isotropic():
    for a in range(3):
        for b in range(3):
            m = sum(w * int(C[q, a]) * int(C[q, b])
                    for q, w in enumerate(W_EXACT))
            assert m == CS2_EXACT * delta(a, b)


def test_third_moment_vanishes():
    for a in range(3):
        for b in range(3):
            for c in range(3):
                m = sum(w * int(C[q, a]) * int(C[q, b]) * int(C[q, c])
                        for q, w in enumerate(W_EXACT))
                assert m == 0


def test_fourth_moment_is_isotropic():
    # sum_q w c_a c_b c_c c_d = cs^4 (d_ab d_cd + d_ac d_bd + d_ad d_bc)
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for d in range(3):
                    m = sum(w * int(C[q, a]) * int(C[q, b])
                            * int(C[q, c]) * int(C[q, d])
                            for q, w in enumerate(W_EXACT))
                    iso = (delta(a, b) * delta(c, d)
                           + delta(a, c) * delta(b, d)
                           + delta(a, d) * delta(b, c))
                    assert m == CS2_EXACT ** 2 * iso


def test_opposite_is_an_involution_and_reverses_velocities():
    assert np.array_equal(OPPOSITE[OPPOSITE], np.arange(Q))
    assert np.array_equal(C[OPPOSITE], -C)
    assert np.array_equal(W[OPPOSITE], W)


def test_velocity_set_shape():
    model = build_d3q19()
    assert model.q == Q == 19
    assert model.sound_speed_sq == CS2
    speeds = np.sum(C * C, axis=1)
    assert speeds[0] == 0
    assert np.all(speeds[1:7] == 1)
    assert np.all(speeds[7:] == 2)


@given(arrays(float, (4, Q), elements=floats(-1.0, 1.0, allow_subnormal=False)))
def test_even_odd_split_reconstructs_and_has_parity(f):
    f_plus, f_minus = even_odd_split(f)
    # reconstruction is exact up to one rounding of (f + fbar) and (f - fbar)
    scale = np.maximum(np.abs(f), np.abs(f[..., OPPOSITE]))
    assert np.all(np.abs(f_plus + f_minus - f) <= 4e-16 * scale + 1e-320)
    assert np.array_equal(f_plus[..., OPPOSITE], f_plus)
    assert np.array_equal(f_minus[..., OPPOSITE], -f_minus)


def test_distribution_field_alloc_and_swap():
    field = DistributionField.alloc((3, 2, 4))
    assert field.current.shape == (5, 4, 6, Q)
    assert np.all(field.current == W)
    field.interior("next")[0, 0, 0, 0] = 7.0
    field.swap()
    assert field.interior()[0, 0, 0, 0] == 7.0


def test_stream_moves_a_pulse_by_its_velocity():
    nx, ny, nz = 4, 3, 5
    src = np.zeros((nx + 2, ny + 2, nz + 2, Q))
    dst = np.empty_like(src)
    src[2, 2, 2, :] = 1.0
    fill_ghosts(src, periodic=(True, True, False))
    stream(src, dst)
    for q in range(Q):
        cx, cy, cz = C[q]
        tx, ty, tz = 2 + cx, 2 + cy, 2 + cz
        assert dst[tx, ty, tz, q] == 1.0


def test_periodic_wrap_streams_across_the_x_face():
    nx, ny, nz = 3, 1, 3
    src = np.zeros((nx + 2, ny + 2, nz + 2, Q))
    dst = np.empty_like(src)
    q = 1  # (+1, 0, 0)
    src[nx, 1, 2, q] = 1.0  # last interior x cell
    fill_ghosts(src, periodic=(True, True, False))
    stream(src, dst)
    assert dst[1, 1, 2, q] == 1.0  # re-enters at the first interior x cell


def test_shifted_wrap_matches_skew_periodic_function():
    """Ghost layers of a field with f(x + nx, z + s) = f(x, z) must equal the
    wrapped interior values shifted by the z offset."""
    nx, ny, nz, s = 4, 1, 9, 1  # slope 1/4: crossing x by nx shifts z by 1
    arr = np.zeros((nx + 2, ny + 2, nz + 2, 1))
    for ix in range(1, nx + 1):
        for iz in range(1, nz + 1):
            arr[ix, 1, iz, 0] = np.sin(0.7 * ((ix - 1) - (iz - 0.5) / s))
    fill_ghosts(arr, periodic=(True, True, False), zshift=s)
    for iz in range(1, nz + 1 - s):
        assert arr[0, 1, iz, 0] == arr[nx, 1, iz + s, 0]
    for iz in range(1 + s, nz + 1):
        assert arr[nx + 1, 1, iz, 0] == arr[1, 1, iz - s, 0]


def test_stream_then_reverse_stream_is_identity_on_the_torus():
    rng = np.random.default_rng(5)
    nx = ny = nz = 4
    src = rng.random((nx + 2, ny + 2, nz + 2, Q))
    fwd = np.empty_like(src)
    back = np.empty_like(src)
    fill_ghosts(src, periodic=(True, True, True))
    stream(src, fwd)
    # streaming the opposite populations undoes the displacement
    rev = fwd[..., OPPOSITE].copy()
    fill_ghosts(rev, periodic=(True, True, True))
    stream(rev, back)
    inner = (slice(1, -1),) * 3
    assert np.array_equal(back[inner][..., OPPOSITE], src[inner])
