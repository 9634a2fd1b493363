"""Plain-text field snapshots (legacy VTK structured-points layout) and CSV
profile extracts.

Values are written with repr() so a written file re-parses to bit-identical
arrays; the reader exists mainly to make that round trip checkable.
"""
from __future__ import annotations

import numpy as np

from .collision import TrtParams
from .lattice import C, INTERFACE, LIQUID

AXES = {"x": 0, "y": 1, "z": 2}


def _macro(fields: np.ndarray, flags: np.ndarray, params: TrtParams):
    """Density and velocity, written at rest (rho=1, u=0) outside the fluid.

    Gas and wall cells still carry populations (the collision kernel runs on
    the whole array) but those values are never read back into the flow, so
    the snapshot reports them at rest instead of as phantom motion."""
    rho = fields.sum(axis=-1)
    rho0 = rho if params.rho0 is None else params.rho0
    u = (fields @ C.astype(float) + 0.5 * params.force_vec) / np.expand_dims(
        np.asarray(rho0, dtype=float), -1)
    fluid = (flags == LIQUID) | (flags == INTERFACE)
    rho = np.where(fluid, rho, 1.0)
    u = np.where(fluid[..., None], u, 0.0)
    return rho, u


def _flat(arr: np.ndarray):
    """x-fastest, then y, then z — the structured-points point order."""
    if arr.ndim == 3:
        return arr.transpose(2, 1, 0).ravel()
    return arr.transpose(2, 1, 0, 3).reshape(-1, arr.shape[-1])


def write_snapshot(fields: np.ndarray, flags: np.ndarray, fill: np.ndarray,
                   path, params: TrtParams | None = None,
                   profile_axis: str = "z") -> None:
    """Write density/velocity/fill/flag point data for an interior field block,
    plus a CSV profile extract (<path>.csv) along ``profile_axis`` through the
    first cell of the two remaining axes.  Non-fluid cells (gas, wall) are
    written at rest; fill and flag arrays are written raw."""
    params = params or TrtParams()
    rho, u = _macro(fields, flags, params)
    nx, ny, nz = flags.shape
    lines = [
        "# vtk DataFile Version 3.0",
        "fslbm snapshot",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN 0 0 0",
        "SPACING 1 1 1",
        f"POINT_DATA {nx * ny * nz}",
        "SCALARS density double 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend(repr(float(v)) for v in _flat(rho))
    lines.append("VECTORS velocity double")
    lines.extend(" ".join(repr(float(c)) for c in row) for row in _flat(u))
    lines.append("SCALARS fill_fraction double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(repr(float(v)) for v in _flat(fill))
    lines.append("SCALARS flag int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(str(int(v)) for v in _flat(flags))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    axis = AXES[profile_axis]
    sel = [0, 0, 0]
    coords = np.arange(flags.shape[axis])
    rows = []
    for i in coords:
        sel[axis] = i
        ix, iy, iz = sel
        rows.append((float(i), rho[ix, iy, iz], *u[ix, iy, iz],
                     fill[ix, iy, iz]))
    with open(str(path) + ".csv", "w", newline="") as fh:
        fh.write(f"{profile_axis},density,u_x,u_y,u_z,fill\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_snapshot(path) -> dict[str, np.ndarray]:
    """Re-parse a snapshot written by write_snapshot into its point arrays."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    dims = None
    i = 0
    while i < len(lines):
        if lines[i].startswith("DIMENSIONS"):
            dims = tuple(int(t) for t in lines[i].split()[1:4])
        if lines[i].startswith("POINT_DATA"):
            i += 1
            break
        i += 1
    if dims is None:
        raise ValueError(f"{path}: missing DIMENSIONS header")
    nx, ny, nz = dims
    n = nx * ny * nz

    def unflat(flat, dtype=float):
        arr = np.asarray(flat, dtype=dtype)
        if arr.ndim == 1:
            return arr.reshape(nz, ny, nx).transpose(2, 1, 0)
        return arr.reshape(nz, ny, nx, arr.shape[-1]).transpose(2, 1, 0, 3)

    out = {}
    while i < len(lines):
        header = lines[i].split()
        if not header:
            i += 1
            continue
        if header[0] == "SCALARS":
            name, dtype = header[1], (int if header[2] == "int" else float)
            i += 2  # skip LOOKUP_TABLE
            vals = [dtype(lines[i + k]) for k in range(n)]
            out[name] = unflat(vals, dtype=dtype)
            i += n
        elif header[0] == "VECTORS":
            name = header[1]
            i += 1
            vals = [[float(t) for t in lines[i + k].split()] for k in range(n)]
            out[name] = unflat(vals)
            i += n
        else:
            i += 1
    return out
