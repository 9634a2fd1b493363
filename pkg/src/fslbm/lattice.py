"""D3Q19 lattice model, even/odd link algebra, field storage, and streaming.

The velocity ordering is fixed and documented here because output files and
precomputed link tables depend on it:

    0           : ( 0, 0, 0)                                weight 1/3
    1 .. 6      : (+-1,0,0), (0,+-1,0), (0,0,+-1)           weight 1/18
    7 .. 18     : the twelve (+-1,+-1,0)-type diagonals     weight 1/36

Opposite directions are stored adjacently (q=1 pairs with q=2, 3 with 4, ...),
so ``opposite[q]`` is q+1 for odd q and q-1 for even q >= 2.

Fields carry one layer of ghost cells on every side so the stream loop is
branch-free; periodic images (optionally with a z-shift, used for channels
rotated against the lattice) are copied into the ghosts before streaming.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

# Cell classification flags (uint8).  ACTIVE cells carry hydrodynamics.
GAS = 0
INTERFACE = 1
LIQUID = 2
WALL = 3
GHOST = 4

Q = 19

C = np.array(
    [
        (0, 0, 0),
        (1, 0, 0), (-1, 0, 0),
        (0, 1, 0), (0, -1, 0),
        (0, 0, 1), (0, 0, -1),
        (1, 1, 0), (-1, -1, 0),
        (1, -1, 0), (-1, 1, 0),
        (1, 0, 1), (-1, 0, -1),
        (1, 0, -1), (-1, 0, 1),
        (0, 1, 1), (0, -1, -1),
        (0, 1, -1), (0, -1, 1),
    ],
    dtype=np.int64,
)

OPPOSITE = np.array(
    [0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17],
    dtype=np.int64,
)

#: Exact rational weights, index-aligned with C.
W_EXACT = tuple(
    Fraction(1, 3) if i == 0 else Fraction(1, 18) if i <= 6 else Fraction(1, 36)
    for i in range(Q)
)

W = np.array([float(w) for w in W_EXACT])

CS2 = 1.0 / 3.0


@dataclass(frozen=True)
class LatticeModel:
    """The D3Q19 velocity set with weights and the opposite-index map."""

    velocities: np.ndarray = field(default_factory=lambda: C.copy())
    weights: np.ndarray = field(default_factory=lambda: W.copy())
    opposite: np.ndarray = field(default_factory=lambda: OPPOSITE.copy())
    sound_speed_sq: float = CS2
    weights_exact: tuple = W_EXACT

    @property
    def q(self) -> int:
        return len(self.weights)


def build_d3q19() -> LatticeModel:
    """Return the standard D3Q19 model (weights 1/3, 1/18, 1/36)."""
    return LatticeModel()


def even_odd_split(f: np.ndarray, model: LatticeModel | None = None):
    """Split populations into symmetric and antisymmetric link parts.

    f may have any leading shape as long as the last axis is the 19
    populations.  Returns (f_plus, f_minus) with
    ``f_plus[q] = (f[q] + f[qbar])/2`` and ``f_minus[q] = (f[q] - f[qbar])/2``,
    so that ``f = f_plus + f_minus`` exactly.
    """
    opp = OPPOSITE if model is None else model.opposite
    fbar = f[..., opp]
    return 0.5 * (f + fbar), 0.5 * (f - fbar)


@dataclass
class DistributionField:
    """Double-buffered population storage with one ghost layer per side.

    ``current`` and ``next`` have shape (nx+2, ny+2, nz+2, 19); the active
    cells live at index 1..n in each spatial axis.  ``swap`` is the only
    transfer between time levels.
    """

    dims: tuple[int, int, int]
    current: np.ndarray
    next: np.ndarray

    @classmethod
    def alloc(cls, dims) -> "DistributionField":
        nx, ny, nz = dims
        shape = (nx + 2, ny + 2, nz + 2, Q)
        cur = np.empty(shape)
        cur[...] = W  # finite rest-state filler everywhere, ghosts included
        return cls(dims=(nx, ny, nz), current=cur, next=cur.copy())

    def swap(self) -> None:
        self.current, self.next = self.next, self.current

    def interior(self, which: str = "current") -> np.ndarray:
        buf = self.current if which == "current" else self.next
        return buf[1:-1, 1:-1, 1:-1]


def fill_ghosts(arr: np.ndarray, periodic=(True, True, False), zshift: int = 0) -> None:
    """Copy periodic images into the ghost layers of ``arr``.

    arr has shape (nx+2, ny+2, nz+2, ...).  ``zshift`` implements the skewed
    periodic wrap used for rotated channels: crossing the +x face re-enters at
    -x shifted *down* by ``zshift`` cells (the geometry z = s*x + c maps onto
    itself under x -> x + nx, z -> z + s*nx).  The x pass runs first and the y
    pass covers the full x extent, so edge ghosts needed by the diagonal
    velocities are filled too.  Rows whose shifted source falls outside the
    stored z range keep their previous (finite) contents; such cells are never
    inside the active channel, so their populations are either ignored or
    overwritten by boundary closures.
    """
    nx = arr.shape[0] - 2
    ny = arr.shape[1] - 2
    nz = arr.shape[2] - 2
    if periodic[0]:
        if zshift == 0:
            arr[0] = arr[nx]
            arr[nx + 1] = arr[1]
        else:
            # field(x + nx, z + s) = field(x, z): the low-x ghost column sits
            # one period below the cells at x = nx-1, i.e. s cells *up* in
            # their frame, and the high-x ghost s cells *down* relative to x=0.
            s = zshift
            lo = max(0, -s)
            hi = min(nz + 2, nz + 2 - s)
            arr[0, :, lo:hi] = arr[nx, :, lo + s:hi + s]
            lo = max(0, s)
            hi = min(nz + 2, nz + 2 + s)
            arr[nx + 1, :, lo:hi] = arr[1, :, lo - s:hi - s]
    if periodic[1]:
        arr[:, 0] = arr[:, ny]
        arr[:, ny + 1] = arr[:, 1]
    if periodic[2]:
        arr[:, :, 0] = arr[:, :, nz]
        arr[:, :, nz + 1] = arr[:, :, 1]


def stream(src: np.ndarray, dst: np.ndarray, flags: np.ndarray | None = None) -> None:
    """Pull-stream every population: dst_q(x) = src_q(x - c_q).

    Operates on raw (nx+2, ny+2, nz+2, 19) buffers whose ghosts have been
    filled.  Slots whose upstream cell is not an active fluid cell receive
    whatever that cell holds; the boundary rules overwrite exactly those slots
    afterwards, so no branching is needed here.  ``flags`` is accepted for
    interface compatibility but not consulted.
    """
    nx, ny, nz = src.shape[0] - 2, src.shape[1] - 2, src.shape[2] - 2
    for q in range(Q):
        cx, cy, cz = C[q]
        dst[1:nx + 1, 1:ny + 1, 1:nz + 1, q] = src[
            1 - cx:nx + 1 - cx, 1 - cy:ny + 1 - cy, 1 - cz:nz + 1 - cz, q
        ]
