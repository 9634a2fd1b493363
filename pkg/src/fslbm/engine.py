"""Time stepping engines.

ChannelSolver: flow between two parallel planes (optionally inclined with a
rational slope), with the plane-link cut fractions computed analytically and
boundary closures applied through precomputed link tables.  Used for the
Couette / film / plate / Poiseuille scenarios where geometry is static.

FreeSurfaceSolver: dynamic VOF simulation (dam break): interface links are
rediscovered from the cell flags every step, boundary values at the surface
are taken first-order from the interface cell itself, and liquid mass is
advected by exchange_mass / update_flags.

Both solvers hold ghost-padded (nx+2, ny+2, nz+2) arrays and follow the same
step skeleton: pre-collision moments -> collide -> evaluate closures from the
post-collision state -> stream -> overwrite the closure slots.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .lattice import (C, CS2, GAS, INTERFACE, LIQUID, OPPOSITE, Q, W, WALL,
                      fill_ghosts, stream)
from .collision import TrtParams, equilibrium, equilibrium_parts
from .boundary import (bounce_back_coefficients, cli_coefficients,
                       fs_family_coefficients, fsk_coefficients,
                       fsl_coefficients, project_stress)
from . import freesurface as fs

CF = C.astype(float)

FREE_SURFACE_RULES = ("fsk", "fsk-simplified", "fsl", "fsl-simplified")
WALL_RULES = ("bounce-back", "cli")


class DivergenceError(RuntimeError):
    """Raised when the velocity field leaves the incompressible regime."""


def surface_coefficients(rule: str, q: int, delta: float, params: TrtParams):
    base, _, suffix = rule.partition("-")
    simplified = suffix == "simplified"
    if base == "fsk":
        return fsk_coefficients(q, params, simplified=simplified)
    if base == "fsl":
        return fsl_coefficients(q, delta, params, simplified=simplified)
    raise ValueError(f"unknown free-surface rule {rule!r}")


@dataclass
class LinkTable:
    """Vectorized closure bookkeeping for one group of boundary links.

    All members are 1-D arrays over links; f_qbar(x_b, t+1) is assembled as

        a0 f~_q(x_b) + ab0 f~_qbar(x_b) + a1 f~_q(up1) + Cc n^+_q(x_b)
        + ap e^+(rho_b, u_b) + am_e_minus + d_ccs

    with u_b extrapolated along the link using weights (l0, l1, l2) at
    (x_b, up1, up2).  am_e_minus and d_ccs are precomputed constants
    (imposed wall velocity / imposed surface stress).
    """

    ix: np.ndarray
    iy: np.ndarray
    iz: np.ndarray
    q: np.ndarray
    qbar: np.ndarray
    delta: np.ndarray
    a0: np.ndarray
    ab0: np.ndarray
    a1: np.ndarray
    Cc: np.ndarray
    ap: np.ndarray
    d_ccs: np.ndarray
    am_e_minus: np.ndarray
    up1: tuple[np.ndarray, np.ndarray, np.ndarray]
    up2: tuple[np.ndarray, np.ndarray, np.ndarray]
    l0: np.ndarray
    l1: np.ndarray
    l2: np.ndarray

    def __len__(self):
        return self.ix.size


def _empty_table() -> LinkTable:
    z = np.zeros(0)
    zi = np.zeros(0, dtype=np.intp)
    return LinkTable(zi, zi, zi, zi, zi, z, z, z, z, z, z, z, z,
                     (zi, zi, zi), (zi, zi, zi), z, z, z)


@dataclass
class ChannelSpec:
    """Geometry + boundary-rule description of a (possibly inclined) channel.

    The bottom plane passes through the physical origin with slope dz/dx;
    the top plane lies at perpendicular distance ``height``.  Node (ix, iy,
    iz) of the interior grid sits at physical (ix - 1, iy - 1, iz - 1/2),
    so straight channels get the usual half-way wall at z = 0.  x is
    periodic (with the shifted wrap that maps the channel onto itself),
    y is periodic, z is open.
    """

    height: float
    slope: Fraction = Fraction(0)
    nx: int | None = None
    ny: int = 1
    bottom: str = "bounce-back"
    top: str = "fsl"
    u_wall_bottom: tuple[float, float, float] = (0.0, 0.0, 0.0)
    u_wall_top: tuple[float, float, float] = (0.0, 0.0, 0.0)
    S_top: np.ndarray | None = None
    ub_points: int = 3

    def __post_init__(self):
        if self.nx is None:
            self.nx = self.slope.denominator if self.slope else 1
        if (self.slope * self.nx).denominator != 1:
            raise ValueError("slope * nx must be an integer for the shifted wrap")
        if self.bottom not in WALL_RULES:
            raise ValueError(f"unknown wall rule {self.bottom!r}")
        if self.top not in FREE_SURFACE_RULES + WALL_RULES:
            raise ValueError(f"unknown top rule {self.top!r}")

    @property
    def zshift(self) -> int:
        return int(self.slope * self.nx)

    @property
    def tangent(self) -> np.ndarray:
        s = float(self.slope)
        return np.array([1.0, 0.0, s]) / np.hypot(1.0, s)

    @property
    def normal(self) -> np.ndarray:
        s = float(self.slope)
        return np.array([-s, 0.0, 1.0]) / np.hypot(1.0, s)


class ChannelSolver:
    def __init__(self, spec: ChannelSpec, params: TrtParams):
        self.spec = spec
        self.params = params
        s = float(spec.slope)
        self.c_offset = spec.height * np.hypot(1.0, s)
        nx, ny = spec.nx, spec.ny

        # physical node coordinates and activity
        def node_xyz(ix, iz):
            return ix - 1.0, iz - 0.5

        def raw_depth(px, pz):  # distance above bottom plane, scaled by sec
            return pz - s * px

        nz = int(np.floor(s * (nx - 1) + self.c_offset + 0.5 - 1e-12))
        self.nx, self.ny, self.nz = nx, ny, nz
        self.shape = (nx + 2, ny + 2, nz + 2)

        px = np.arange(nx + 2)[:, None] - 1.0
        pz = np.arange(nz + 2)[None, :] - 0.5
        d = (raw_depth(px, pz)) / np.hypot(1.0, s)  # perpendicular distance
        self.depth = np.broadcast_to(d[:, None, :], self.shape).copy()
        active2d = (d > 0.0) & (d < spec.height)
        self.active = np.broadcast_to(active2d[:, None, :], self.shape).copy()
        self.active[0], self.active[-1] = False, False
        self.active[:, 0], self.active[:, -1] = False, False

        self.flags = np.full(self.shape, GAS, dtype=np.int8)
        self.flags[np.broadcast_to(d[:, None, :] <= 0.0, self.shape)] = WALL
        self.flags[self.active] = LIQUID

        self._build_link_tables()

        self.f = np.empty(self.shape + (Q,))
        self.f_next = np.full(self.shape + (Q,), W)  # scratch stays finite
        self.initialize_rest()

    # -- geometry helpers -------------------------------------------------

    def _wrap_index(self, ix, iy, iz):
        """Map literal neighbour offsets onto interior indices (shifted wrap)."""
        m = (ix - 1) // self.nx
        ixw = ix - m * self.nx
        izw = iz - m * self.spec.zshift
        iyw = 1 + (iy - 1) % self.ny
        return ixw, iyw, izw

    def _is_active_point(self, px, pz):
        s = float(self.spec.slope)
        d = pz - s * px
        return 0.0 < d < self.c_offset

    def _build_link_tables(self):
        s = float(self.spec.slope)
        spec = self.spec
        rows = {"bottom": [], "top": []}
        for ix in range(1, self.nx + 1):
            for iz in range(1, self.nz + 1):
                if not self.active[ix, 1, iz]:
                    continue
                px, pz = ix - 1.0, iz - 0.5
                d0 = pz - s * px
                for q in range(1, Q):
                    cx, cy, cz = C[q]
                    slope_rate = cz - s * cx  # d(d0)/dt along the link
                    dn = d0 + slope_rate
                    if dn <= 0.0:
                        rows["bottom"].append((ix, iz, q, d0 / -slope_rate))
                    elif dn >= self.c_offset:
                        rows["top"].append((ix, iz, q,
                                            (self.c_offset - d0) / slope_rate))

        self.tables: list[LinkTable] = []
        for side, items in rows.items():
            rule = spec.bottom if side == "bottom" else spec.top
            u_wall = spec.u_wall_bottom if side == "bottom" else spec.u_wall_top
            S_imp = None if side == "bottom" else spec.S_top
            self.tables.append(self._make_table(items, rule, u_wall, S_imp))

    def _make_table(self, items, rule, u_wall, S_imposed) -> LinkTable:
        if not items:
            return _empty_table()
        n = len(items)
        tab = _empty_table()
        ix = np.array([it[0] for it in items], dtype=np.intp)
        iz = np.array([it[1] for it in items], dtype=np.intp)
        qs = np.array([it[2] for it in items], dtype=np.intp)
        deltas = np.array([it[3] for it in items])

        # replicate over the y extent (geometry is y-invariant)
        ys = np.arange(1, self.ny + 1, dtype=np.intp)
        ix = np.repeat(ix, self.ny)
        iz = np.repeat(iz, self.ny)
        qs = np.repeat(qs, self.ny)
        deltas = np.repeat(deltas, self.ny)
        iy = np.tile(ys, n)
        n = ix.size

        coeffs = np.zeros((n, 6))  # a0, ab0, a1, C, ap, D
        am = np.zeros(n)
        for i in range(n):
            q, delta = int(qs[i]), float(deltas[i])
            if rule in FREE_SURFACE_RULES:
                co = surface_coefficients(rule, q, delta, self.params)
            elif rule == "cli":
                co = cli_coefficients(q, delta)
            else:
                co = bounce_back_coefficients(q)
            coeffs[i] = (co.a0, co.abar0, co.a1, co.C, co.alpha_plus, co.D)
            am[i] = co.alpha_minus

        # imposed boundary terms that are constant in time
        uw = np.asarray(u_wall, dtype=float)
        rho0 = 1.0 if self.params.rho0 is None else self.params.rho0
        e_minus_wall = 3.0 * W[qs] * rho0 * (CF[qs] @ uw)
        am_e_minus = am * e_minus_wall

        # upwind sample indices along -c_q, with graceful degradation of the
        # u_b extrapolation stencil where samples leave the channel
        cx, cy, cz = C[qs, 0], C[qs, 1], C[qs, 2]
        up1 = self._wrap_index(ix - cx, iy - cy, iz - cz)
        up2 = self._wrap_index(ix - 2 * cx, iy - cy, iz - 2 * cz)
        have1 = np.array([self._is_active_point(ix[i] - cx[i] - 1.0,
                                                iz[i] - cz[i] - 0.5)
                          for i in range(n)])
        have2 = np.array([self._is_active_point(ix[i] - 2 * cx[i] - 1.0,
                                                iz[i] - 2 * cz[i] - 0.5)
                          for i in range(n)]) & have1
        ok1 = have1 & (self.spec.ub_points >= 2)
        ok2 = have2 & (self.spec.ub_points >= 3)
        d_ = deltas
        l0 = np.where(ok2, 0.5 * (1 + d_) * (2 + d_),
                      np.where(ok1, 1.0 + d_, 1.0))
        l1 = np.where(ok2, -d_ * (2 + d_), np.where(ok1, -d_, 0.0))
        l2 = np.where(ok2, 0.5 * d_ * (1 + d_), 0.0)
        # invalid sample indices are redirected at the cell itself (weight 0)
        self_idx = (ix, iy, iz)
        up1 = tuple(np.where(ok1, up1[d], self_idx[d]) for d in range(3))
        up2 = tuple(np.where(ok2, up2[d], self_idx[d]) for d in range(3))
        if not np.all(coeffs[:, 2][~have1] == 0.0):
            # a1-rules without an upwind cell fall back to the local rule
            bad = ~have1 & (coeffs[:, 2] != 0.0)
            for i in np.nonzero(bad)[0]:
                if rule in FREE_SURFACE_RULES:
                    co = fsk_coefficients(int(qs[i]), self.params,
                                          simplified=rule.endswith("simplified"))
                else:
                    co = bounce_back_coefficients(int(qs[i]))
                coeffs[i] = (co.a0, co.abar0, co.a1, co.C, co.alpha_plus, co.D)

        if S_imposed is None:
            d_ccs = np.zeros(n)
        else:
            ccs = np.einsum("la,ab,lb->l", CF[qs], np.asarray(S_imposed, float), CF[qs])
            d_ccs = coeffs[:, 5] * ccs

        return LinkTable(ix=ix, iy=iy, iz=iz, q=qs, qbar=np.array(OPPOSITE)[qs],
                         delta=deltas, a0=coeffs[:, 0], ab0=coeffs[:, 1],
                         a1=coeffs[:, 2], Cc=coeffs[:, 3], ap=coeffs[:, 4],
                         d_ccs=d_ccs, am_e_minus=am_e_minus,
                         up1=up1, up2=up2, l0=l0, l1=l1, l2=l2)

    # -- state initialisation ---------------------------------------------

    def initialize_rest(self):
        self.f[...] = W
        self._ghost(self.f)

    def initialize_chapman_enskog(self, u: np.ndarray, S: np.ndarray):
        """f = e(1, u) + (w/cs2) (c.S.c)/lambda_plus — second-order consistent
        start from a prescribed velocity/shear field (padded arrays)."""
        e = equilibrium(np.ones(self.shape), u, self.params)
        ccs = np.einsum("qa,...ab,qb->...q", CF, S, CF)
        self.f[...] = e + 3.0 * W * ccs / self.params.lambda_plus
        self.f[~self.active] = W
        self._ghost(self.f)

    # -- stepping ----------------------------------------------------------

    def _ghost(self, arr):
        fill_ghosts(arr, periodic=(True, True, False), zshift=self.spec.zshift)

    def step(self):
        p = self.params
        f = self.f
        rho = f.sum(axis=-1)
        rho0 = rho if p.rho0 is None else p.rho0
        u = (f @ CF + 0.5 * p.force_vec) / np.expand_dims(np.asarray(rho0), -1)
        e_plus, e_minus = equilibrium_parts(rho, u, p)
        f_bar = f[..., OPPOSITE]
        half_sum = 0.5 * (f + f_bar)
        half_dif = 0.5 * (f - f_bar)
        f_post = (f + p.lambda_plus * (half_sum - e_plus)
                  + p.lambda_minus * (half_dif - e_minus))
        self._ghost(f_post)

        closures = [self._closure_values(tab, f, half_sum, e_plus, u, f_post)
                    for tab in self.tables]

        stream(f_post, self.f_next)
        for tab, vals in zip(self.tables, closures):
            self.f_next[tab.ix, tab.iy, tab.iz, tab.qbar] = vals
        self.f, self.f_next = self.f_next, self.f
        self._ghost(self.f)

    def _closure_values(self, tab: LinkTable, f, half_sum, e_plus, u, f_post):
        if len(tab) == 0:
            return np.zeros(0)
        cell = (tab.ix, tab.iy, tab.iz)
        n_plus = half_sum[cell + (tab.q,)] - e_plus[cell + (tab.q,)]
        u_b = (tab.l0[:, None] * u[cell]
               + tab.l1[:, None] * u[tab.up1]
               + tab.l2[:, None] * u[tab.up2])
        w = W[tab.q]
        e_plus_b = 3.0 * w * CS2  # rho_b = 1
        if self.params.use_nonlinear:
            rho0 = 1.0 if self.params.rho0 is None else self.params.rho0
            cu = np.einsum("la,la->l", CF[tab.q], u_b)
            e_plus_b = e_plus_b + 3.0 * w * rho0 * (
                1.5 * cu * cu - 0.5 * np.einsum("la,la->l", u_b, u_b))
        return (tab.a0 * f_post[cell + (tab.q,)]
                + tab.ab0 * f_post[cell + (tab.qbar,)]
                + tab.a1 * f_post[tab.up1 + (tab.q,)]
                + tab.Cc * n_plus
                + tab.ap * e_plus_b
                + tab.am_e_minus
                + tab.d_ccs)

    def run(self, steps: int, check_every: int = 200):
        for n in range(steps):
            self.step()
            if check_every and (n + 1) % check_every == 0:
                self._check_divergence()

    def run_to_steady(self, tol: float = 1e-12, check_every: int = 100,
                      max_steps: int = 2_000_000) -> int:
        """Advance until max |u - u_prev| / max |u| < tol over a check window."""
        u_prev = self.velocity()[self.active[1:-1, 1:-1, 1:-1]]
        steps = 0
        while steps < max_steps:
            self.run(check_every, check_every=check_every)
            steps += check_every
            u_now = self.velocity()[self.active[1:-1, 1:-1, 1:-1]]
            scale = np.max(np.abs(u_now))
            change = np.max(np.abs(u_now - u_prev))
            if scale > 0 and change / scale < tol:
                return steps
            if scale == 0 and change < tol:
                return steps
            u_prev = u_now
        return steps

    def _check_divergence(self):
        u = self.velocity()[self.active[1:-1, 1:-1, 1:-1]]
        m = np.max(np.abs(u)) if u.size else 0.0
        if not np.isfinite(m) or m > 0.3:
            raise DivergenceError(f"|u| = {m:.3g} exceeds incompressible regime")

    # -- observables --------------------------------------------------------

    def macro(self):
        p = self.params
        f = self.f
        rho = f.sum(axis=-1)
        rho0 = rho if p.rho0 is None else p.rho0
        u = (f @ CF + 0.5 * p.force_vec) / np.expand_dims(np.asarray(rho0), -1)
        return rho, u

    def velocity(self) -> np.ndarray:
        _, u = self.macro()
        return u[1:-1, 1:-1, 1:-1]

    def tangential_velocity(self) -> np.ndarray:
        return self.velocity() @ self.spec.tangent

    def node_depths(self) -> np.ndarray:
        return self.depth[1:-1, 1:-1, 1:-1]

    def active_interior(self) -> np.ndarray:
        return self.active[1:-1, 1:-1, 1:-1]


class FreeSurfaceSolver:
    """Dynamic free-surface run on a walled box (periodic in y by default)."""

    def __init__(self, flags0: np.ndarray, params: TrtParams, rule: str = "fsk",
                 mass0: np.ndarray | None = None,
                 periodic=(False, True, False)):
        if rule not in FREE_SURFACE_RULES:
            raise ValueError(f"unknown free-surface rule {rule!r}")
        self.params = params
        self.rule = rule
        self.periodic = periodic
        nx, ny, nz = flags0.shape
        self.dims = (nx, ny, nz)
        self.shape = (nx + 2, ny + 2, nz + 2)

        self.flags = np.full(self.shape, WALL, dtype=np.int8)
        self.flags[1:-1, 1:-1, 1:-1] = flags0
        self._ghost_flags()

        self.f = np.tile(W, self.shape + (1,)).reshape(self.shape + (Q,))
        self.f_next = self.f.copy()  # scratch stays finite
        self.mass = np.zeros(self.shape)
        if mass0 is not None:
            self.mass[1:-1, 1:-1, 1:-1] = mass0
        else:
            rho = self.f.sum(axis=-1)
            self.mass[self.flags == LIQUID] = rho[self.flags == LIQUID]
            self.mass[self.flags == INTERFACE] = rho[self.flags == INTERFACE]
        self.fill = fs.fill_fraction(self.mass, self.f.sum(axis=-1), self.flags)
        self.residual = [0.0]
        self.step_count = 0

        # tank walls never move; cache the wall-adjacency per direction
        self._wall_nb = {}
        for q in range(1, Q):
            cx, cy, cz = C[q]
            nb = np.roll(self.flags, (-cx, -cy, -cz), axis=(0, 1, 2))
            self._wall_nb[q] = fs._interior_only(nb == WALL)

    def _ghost_flags(self):
        for axis, per in enumerate(self.periodic):
            if per:
                sl = [slice(None)] * 3
                src_hi, src_lo = [slice(None)] * 3, [slice(None)] * 3
                sl[axis], src_hi[axis] = 0, -2
                self.flags[tuple(sl)] = self.flags[tuple(src_hi)]
                sl[axis], src_lo[axis] = -1, 1
                self.flags[tuple(sl)] = self.flags[tuple(src_lo)]

    def _ghost(self, arr):
        # periodic wrap on the requested axes; wall-side ghosts keep whatever
        # they hold (their flags are WALL, so their data is never consumed)
        for axis, per in enumerate(self.periodic):
            if per:
                sl = [slice(None)] * 3
                src = [slice(None)] * 3
                sl[axis], src[axis] = 0, -2
                arr[tuple(sl)] = arr[tuple(src)]
                sl[axis], src[axis] = -1, 1
                arr[tuple(sl)] = arr[tuple(src)]

    def step(self):
        p = self.params
        f = self.f
        self._ghost(f)
        self._ghost(self.fill)
        self._ghost_flags()

        rho = f.sum(axis=-1)
        rho0 = rho if p.rho0 is None else p.rho0
        u = (f @ CF + 0.5 * p.force_vec) / np.expand_dims(np.asarray(rho0), -1)
        e_plus, e_minus = equilibrium_parts(rho, u, p)
        f_bar = f[..., OPPOSITE]
        half_sum = 0.5 * (f + f_bar)
        f_post = (f + p.lambda_plus * (half_sum - e_plus)
                  + p.lambda_minus * (0.5 * (f - f_bar) - e_minus))
        self._ghost(f_post)

        surf = self._surface_links()
        surf_vals = self._surface_closure(surf, f, half_sum, e_plus, u, f_post)

        stream(f_post, self.f_next)

        active = fs._interior_only((self.flags == LIQUID) | (self.flags == INTERFACE))
        for q in range(1, Q):
            mask = self._wall_nb[q] & active
            if mask.any():
                self.f_next[mask, OPPOSITE[q]] = f_post[mask, q]
        for (cells, qs), vals in zip([surf], [surf_vals]):
            self.f_next[cells[0], cells[1], cells[2], np.array(OPPOSITE)[qs]] = vals

        fs.exchange_mass(f_post, self.flags, self.fill, self.mass)
        self.f, self.f_next = self.f_next, self.f
        fs.update_flags(self.flags, self.fill, self.mass, self.f, p,
                        residual=self.residual, periodic=self.periodic)
        self.step_count += 1

    def _surface_links(self):
        """(cells, q) arrays of interface->gas links, discovered from flags."""
        cols = []
        for q in range(1, Q):
            cx, cy, cz = C[q]
            nb = np.roll(self.flags, (-cx, -cy, -cz), axis=(0, 1, 2))
            mask = fs._interior_only((self.flags == INTERFACE) & (nb == GAS))
            idx = np.nonzero(mask)
            if idx[0].size:
                cols.append((idx, np.full(idx[0].size, q, dtype=np.intp)))
        if not cols:
            zi = np.zeros(0, dtype=np.intp)
            return (zi, zi, zi), zi
        cells = tuple(np.concatenate([c[0][d] for c in cols]) for d in range(3))
        qs = np.concatenate([c[1] for c in cols])
        return cells, qs

    def _surface_closure(self, surf, f, half_sum, e_plus, u, f_post):
        (ix, iy, iz), qs = surf
        n = ix.size
        if n == 0:
            return np.zeros(0)
        p = self.params
        cell = (ix, iy, iz)
        qbar = np.array(OPPOSITE)[qs]
        base, _, suffix = self.rule.partition("-")
        simplified = suffix == "simplified"

        deltas = np.full(n, 0.5)
        if base == "fsl":
            nb = (ix + C[qs, 0], iy + C[qs, 1], iz + C[qs, 2])
            phi0, phi1 = self.fill[cell], self.fill[nb]
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(phi0 == phi1, 0.5,
                             np.clip((phi0 - 0.5) / (phi0 - phi1 + (phi0 == phi1)),
                                     0.0, 1.0))
            deltas = d

        lam, Lp = p.lambda_plus, p.Lambda_plus
        alpha = np.full(n, 2.0 if base == "fsk" else 1.0)
        dd = np.full(n, 0.5) if base == "fsk" else deltas
        a0 = 1.0 - alpha * (0.5 + dd)
        ab0 = 1.0 - 0.5 * alpha
        a1 = dd * alpha - 1.0
        Cc = alpha * lam * (0.5 + dd) - 2.0 * lam
        D = np.zeros(n) if simplified else -alpha * Lp * W[qs] / CS2

        up1 = (ix - C[qs, 0], iy - C[qs, 1], iz - C[qs, 2])
        up1 = tuple(np.clip(up1[d], 0, self.shape[d] - 1) for d in range(3))
        up_ok = (self.flags[up1] == LIQUID) | (self.flags[up1] == INTERFACE)
        # no upwind fluid cell: fall back to the local rule for that link
        if base == "fsl" and not up_ok.all():
            m = ~up_ok
            alpha[m] = 2.0
            a0[m], ab0[m], a1[m], Cc[m] = -1.0, 0.0, 0.0, 0.0
            D[m] = 0.0 if simplified else -2.0 * Lp * W[qs[m]] / CS2
        up1 = tuple(np.where(up_ok, up1[d], cell[d]) for d in range(3))

        n_plus = half_sum[cell + (qs,)] - e_plus[cell + (qs,)]
        u_b = u[cell]
        rho_b = 1.0
        w = W[qs]
        e_plus_b = 3.0 * w * CS2 * rho_b
        if p.use_nonlinear:
            rho0 = 1.0 if p.rho0 is None else p.rho0
            cu = np.einsum("la,la->l", CF[qs], u_b)
            e_plus_b = e_plus_b + 3.0 * w * rho0 * (
                1.5 * cu * cu - 0.5 * np.einsum("la,la->l", u_b, u_b))

        if simplified or not D.any():
            d_ccs = np.zeros(n)
        else:
            S_cells = self._boundary_stress(u)
            ccs = np.einsum("la,lab,lb->l", CF[qs], S_cells[cell], CF[qs])
            d_ccs = D * ccs

        return (a0 * f_post[cell + (qs,)] + ab0 * f_post[cell + (qbar,)]
                + a1 * f_post[up1 + (qs,)] + Cc * n_plus
                + alpha * e_plus_b + d_ccs)

    def _boundary_stress(self, u):
        """Per-cell S^b at interface cells: the shear tensor is measured in
        the bulk (liquid cells), carried over to each interface cell from its
        liquid neighbours, and projected onto the free-surface stress
        conditions with the fill-gradient normal."""
        grad = np.zeros(self.shape + (3, 3))
        fluid = (self.flags == LIQUID) | (self.flags == INTERFACE)
        for a in range(3):
            hi = np.roll(u, -1, axis=a)
            lo = np.roll(u, 1, axis=a)
            hi_ok = np.roll(fluid, -1, axis=a)
            lo_ok = np.roll(fluid, 1, axis=a)
            both = hi_ok & lo_ok
            g = np.zeros_like(u)
            g[both] = 0.5 * (hi[both] - lo[both])
            only_hi = hi_ok & ~lo_ok
            g[only_hi] = hi[only_hi] - u[only_hi]
            only_lo = lo_ok & ~hi_ok
            g[only_lo] = u[only_lo] - lo[only_lo]
            grad[..., a, :] = g
        S = 0.5 * (grad + np.swapaxes(grad, -1, -2))

        # extrapolate from the bulk: average S of the liquid neighbours
        liquid = self.flags == LIQUID
        acc = np.zeros_like(S)
        cnt = np.zeros(self.shape)
        for q in range(1, Q):
            shift = (-C[q, 0], -C[q, 1], -C[q, 2])
            nb_liq = np.roll(liquid, shift, axis=(0, 1, 2))
            acc[nb_liq] += np.roll(S, shift, axis=(0, 1, 2))[nb_liq]
            cnt[nb_liq] += 1.0
        with np.errstate(invalid="ignore"):
            S_b = acc / np.maximum(cnt, 1.0)[..., None, None]

        normal = fs.surface_normal(self.fill)
        out = np.zeros_like(S)
        iface = fs._interior_only(self.flags == INTERFACE)
        idx = np.argwhere(iface)
        for ixyz in idx:
            cell = tuple(ixyz)
            nvec = normal[cell]
            if np.linalg.norm(nvec) > 1e-12:
                out[cell] = project_stress(S_b[cell], nvec)
        return out

    # -- observables --------------------------------------------------------

    def velocity(self) -> np.ndarray:
        p = self.params
        rho = self.f.sum(axis=-1)
        rho0 = rho if p.rho0 is None else p.rho0
        u = (self.f @ CF + 0.5 * p.force_vec) / np.expand_dims(np.asarray(rho0), -1)
        return u[1:-1, 1:-1, 1:-1]

    def total_mass(self) -> float:
        return fs.total_mass(self.flags, self.f, self.mass) + self.residual[0]

    def front_position(self) -> int:
        """Leading edge of the liquid body: rightmost cell with phi > 1/2.

        Measured over the whole height — the no-slip wall pins the bottom
        row, so the visible surge front travels a little above it."""
        wet = self.fill[1:-1, 1:-1, 1:-1] > 0.5
        hits = np.nonzero(wet.any(axis=(1, 2)))[0]
        return int(hits[-1] + 1) if hits.size else 0

    def check_divergence(self):
        u = self.velocity()
        fluid = fs._interior_only((self.flags == LIQUID)
                                  | (self.flags == INTERFACE))[1:-1, 1:-1, 1:-1]
        m = np.max(np.abs(u[fluid])) if fluid.any() else 0.0
        if not np.isfinite(m) or m > 0.3:
            raise DivergenceError(f"|u| = {m:.3g} exceeds incompressible regime")

    def interior_views(self):
        rho = self.f.sum(axis=-1)[1:-1, 1:-1, 1:-1]
        return (rho, self.velocity(), self.fill[1:-1, 1:-1, 1:-1],
                self.flags[1:-1, 1:-1, 1:-1])
