"""Volume-of-fluid interface tracking.

Liquid mass per cell is advected by exchanging post-collision populations
across interface links; fill fractions follow as phi = m / rho.  Cells
convert between gas, interface and liquid when their mass over- or
under-runs the cell density, with the surplus pushed to neighbouring
interface cells so that total mass (plus a small residual accumulator for
isolated cells) is conserved exactly.

All field arrays live on ghost-padded grids (nx+2, ny+2, nz+2[, 19]); the
caller refreshes the ghost layers (periodic wrap or wall flags) before
calling in here.  Interior cells are [1:nx+1, 1:ny+1, 1:nz+1].
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import C, GAS, INTERFACE, LIQUID, OPPOSITE, Q
from .collision import TrtParams, equilibrium, moments

# conversion hysteresis: fill at m >= rho (1 + EPS), empty at m <= -rho EPS
EPS_FILL = 1.0e-3

INTERFACE_TO_LIQUID = "interface_to_liquid"
INTERFACE_TO_GAS = "interface_to_gas"
GAS_TO_INTERFACE = "gas_to_interface"
LIQUID_TO_INTERFACE = "liquid_to_interface"


@dataclass
class ConversionEvent:
    cell: tuple[int, int, int]
    kind: str
    excess: float = 0.0


def _interior_only(mask: np.ndarray) -> np.ndarray:
    """Zero a boolean cell mask on the ghost layers."""
    out = mask.copy()
    out[0], out[-1] = False, False
    out[:, 0], out[:, -1] = False, False
    out[:, :, 0], out[:, :, -1] = False, False
    return out


def fill_fraction(mass: np.ndarray, rho: np.ndarray, flags: np.ndarray) -> np.ndarray:
    """phi = m/rho clamped to [0,1] on interface cells; 1 on liquid, 0 elsewhere."""
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.clip(mass / rho, 0.0, 1.0)
    phi[flags == LIQUID] = 1.0
    phi[(flags != LIQUID) & (flags != INTERFACE)] = 0.0
    return phi


def exchange_mass(fields: np.ndarray, flags: np.ndarray, fill: np.ndarray,
                  mass: np.ndarray, model=None) -> None:
    """Advect liquid mass along interface links.

    For each interface cell x and link q to a liquid or interface neighbour,

        dm_q = (f_qbar(x + c_q) - f_q(x)) * w,   w = 1            (liquid)
                                                 w = (phi_x+phi_n)/2 (interface)

    evaluated on the post-collision populations ``fields``.  The pairwise
    weights are symmetric, so the exchange is exactly antisymmetric and
    conserves total mass.  Deltas are accumulated read-only and applied to
    ``mass`` in place at the end (owner-writes).
    """
    interface = _interior_only(flags == INTERFACE)
    delta = np.zeros_like(mass)
    for q in range(1, Q):
        cx, cy, cz = C[q]
        f_out = fields[..., q]
        f_in = np.roll(fields[..., OPPOSITE[q]], (-cx, -cy, -cz), axis=(0, 1, 2))
        nb_flags = np.roll(flags, (-cx, -cy, -cz), axis=(0, 1, 2))
        nb_fill = np.roll(fill, (-cx, -cy, -cz), axis=(0, 1, 2))
        w = np.where(nb_flags == LIQUID, 1.0,
                     np.where(nb_flags == INTERFACE, 0.5 * (fill + nb_fill), 0.0))
        delta += w * (f_in - f_out)
    mass[interface] += delta[interface]


def surface_normal(fill: np.ndarray) -> np.ndarray:
    """Outward (liquid -> gas) interface normal from central differences of phi.

    Returned un-normalized; a zero vector means no usable gradient.
    """
    n = np.zeros(fill.shape + (3,))
    n[1:-1, :, :, 0] = -0.5 * (fill[2:, :, :] - fill[:-2, :, :])
    n[:, 1:-1, :, 1] = -0.5 * (fill[:, 2:, :] - fill[:, :-2, :])
    n[:, :, 1:-1, 2] = -0.5 * (fill[:, :, 2:] - fill[:, :, :-2])
    return n


def delta_from_fill(fill: np.ndarray, cell: tuple[int, int, int], q: int) -> float:
    """Cut fraction along link q: linear interpolation of phi to the 1/2 level."""
    ix, iy, iz = cell
    cx, cy, cz = C[q]
    phi0 = fill[ix, iy, iz]
    phi1 = fill[ix + cx, iy + cy, iz + cz]
    if phi0 == phi1:
        return 0.5
    return float(np.clip((phi0 - 0.5) / (phi0 - phi1), 0.0, 1.0))


def _neighbors(cell, shape, periodic=(False, False, False)):
    """18-neighbourhood of an interior cell on the padded grid.

    Periodic axes wrap to the interior partner cell; non-periodic neighbour
    indices may land on ghost layers, whose wall flags make them inert.
    """
    for q in range(1, Q):
        nb = []
        for d in range(3):
            i = cell[d] + C[q][d]
            if periodic[d]:
                i = 1 + (i - 1) % (shape[d] - 2)
            nb.append(i)
        yield tuple(nb)


def init_new_interface_cell(cell: tuple[int, int, int], fields: np.ndarray,
                            flags: np.ndarray, params: TrtParams, model=None,
                            exclude=(), periodic=(False, False, False)) -> None:
    """Fill a freshly activated (gas -> interface) cell with the equilibrium of
    the averaged (rho, u) of its liquid/interface neighbours."""
    rhos, us = [], []
    for nb in _neighbors(cell, flags.shape, periodic):
        if nb in exclude:
            continue
        if flags[nb] in (LIQUID, INTERFACE):
            state = moments(fields[nb], params, model)
            rhos.append(state.rho)
            us.append(state.u)
    if rhos:
        rho_avg = float(np.mean(rhos))
        u_avg = np.mean(us, axis=0)
    else:  # no informed neighbour; fall back to rest
        rho_avg, u_avg = 1.0, np.zeros(3)
    fields[cell] = equilibrium(rho_avg, u_avg, params, model)


def update_flags(flags: np.ndarray, fill: np.ndarray, mass: np.ndarray,
                 fields: np.ndarray, params: TrtParams | None = None,
                 model=None, residual: list[float] | None = None,
                 periodic=(False, False, False)) -> list[ConversionEvent]:
    """Convert over-full / emptied interface cells and repair the flag invariant.

    Fills (m >= rho(1+eps)) are handled before empties (m <= -rho eps); an
    empty candidate adjacent to a fill candidate stays interface this step so
    no liquid cell ever touches a gas cell.  Conversions and redistribution
    run in ascending cell-index order for reproducibility.  Excess mass goes
    in equal parts to neighbouring interface cells; with no interface
    neighbour it is pushed to ``residual`` (a 1-element accumulator list) and
    a warning is emitted.
    """
    params = params or TrtParams()
    events: list[ConversionEvent] = []
    rho = fields.sum(axis=-1)

    interface = _interior_only(flags == INTERFACE)
    fill_mask = interface & (mass >= rho * (1.0 + EPS_FILL))
    empty_mask = interface & (mass <= -rho * EPS_FILL)
    fill_cells = [tuple(c) for c in np.argwhere(fill_mask)]
    fill_set = set(fill_cells)
    empty_cells = [tuple(c) for c in np.argwhere(empty_mask & ~fill_mask)
                   if not any(nb in fill_set
                              for nb in _neighbors(tuple(c), flags.shape, periodic))]

    new_from_gas: set[tuple[int, int, int]] = set()

    for cell in fill_cells:
        excess = float(mass[cell] - rho[cell])
        events.append(ConversionEvent(cell, INTERFACE_TO_LIQUID, excess))
        flags[cell] = LIQUID
        mass[cell] = rho[cell]
        for nb in _neighbors(cell, flags.shape, periodic):
            if flags[nb] == GAS:
                flags[nb] = INTERFACE
                mass[nb] = 0.0
                new_from_gas.add(nb)
                events.append(ConversionEvent(nb, GAS_TO_INTERFACE))

    for cell in empty_cells:
        excess = float(mass[cell])
        events.append(ConversionEvent(cell, INTERFACE_TO_GAS, excess))
        flags[cell] = GAS
        mass[cell] = 0.0
        for nb in _neighbors(cell, flags.shape, periodic):
            if flags[nb] == LIQUID:
                flags[nb] = INTERFACE
                mass[nb] = rho[nb]
                events.append(ConversionEvent(nb, LIQUID_TO_INTERFACE))

    for cell in sorted(new_from_gas):
        init_new_interface_cell(cell, fields, flags, params, model,
                                exclude=new_from_gas, periodic=periodic)

    # redistribute recorded excesses now that the final flags are known
    for ev in events:
        if ev.kind not in (INTERFACE_TO_LIQUID, INTERFACE_TO_GAS) or ev.excess == 0.0:
            continue
        receivers = [nb for nb in _neighbors(ev.cell, flags.shape, periodic)
                     if flags[nb] == INTERFACE]
        if not receivers:
            if residual is not None:
                residual[0] += ev.excess
            warnings.warn(f"isolated conversion at {ev.cell}: "
                          f"{ev.excess:+.3e} mass moved to residual accumulator")
            continue
        share = ev.excess / len(receivers)
        for nb in receivers:
            mass[nb] += share

    fill[...] = fill_fraction(mass, rho, flags)
    return events


def total_mass(flags: np.ndarray, fields: np.ndarray, mass: np.ndarray) -> float:
    """Global liquid mass: cell density on liquid cells plus tracked interface mass."""
    rho = fields.sum(axis=-1)
    liquid = _interior_only(flags == LIQUID)
    interface = _interior_only(flags == INTERFACE)
    return float(rho[liquid].sum() + mass[interface].sum())
