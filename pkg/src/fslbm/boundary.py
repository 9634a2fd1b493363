"""Link-wise boundary closures.

Missing incoming populations at a boundary node x_b are produced by the
linear multi-reflection closure

    f_qbar(x_b, t+1) = a0 f~_q(x_b) + abar0 f~_qbar(x_b) + a1 f~_q(x_b - c_q)
                     + C n_q^+(x_b) + f_q^b,

    f_q^b = alpha_plus e_q^+(rho_b, u_b) + alpha_minus e_q^-(rho_b, u_b)
          + D c_qa c_qb S^b_ab,

where q is the link pointing out of the fluid (x_b + c_q is not active),
delta in [0,1] locates the wall/surface point x_w = x_b + delta c_q, and
n_q^+ is the symmetric non-equilibrium part of the *pre-collision*
populations of the current step.  The boundary equilibria e_q^{+-}(rho_b,u_b)
carry no force shift: they encode wall/surface values, not bulk collision
targets.

Concrete rules (coefficient rows):

  bounce-back   (1, 0, 0, alpha+=0, C=0, D=0, alpha-=-2)          delta = 1/2
  CLI wall      (1, -k, k, alpha+=0, C=0, D=0, alpha-=-4/(1+2d))  k=(1-2d)/(1+2d)
  FSK surface   (-1, 0, 0, alpha+=2, C=0, D=-2 L+ w/cs2)          any delta
  FSL surface   (1/2-d, 1/2, d-1, alpha+=1, C=l+(d-3/2), D=-L+ w/cs2)

FSK/FSL rows are the alpha_plus = 2 (pinned at delta = 1/2) and
alpha_plus = 1 instances of the same second-order construction; setting D = 0
("simplified") drops the boundary shear-rate term, which reproduces the
original purely local free-surface rule in the FSK case.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .lattice import C as CQ, CS2, OPPOSITE, W
from .collision import TrtParams, collide, moments


@dataclass(frozen=True)
class ClosureCoefficients:
    a0: float
    abar0: float
    a1: float
    alpha_plus: float
    C: float
    D: float
    delta: float = 0.5
    alpha_minus: float = 0.0


@dataclass(frozen=True)
class LinkCut:
    """Boundary link: cell x_b, outgoing direction q, cut fraction delta."""

    cell: tuple[int, int, int]
    q: int
    delta: float


@dataclass
class BoundaryValue:
    """Macroscopic values at the wall/surface point of one cut link."""

    rho_b: float = 1.0
    u_b: np.ndarray = dc_field(default_factory=lambda: np.zeros(3))
    S_b: np.ndarray = dc_field(default_factory=lambda: np.zeros((3, 3)))


def fs_family_coefficients(q: int, delta: float, alpha_plus: float,
                           params: TrtParams, simplified: bool = False) -> ClosureCoefficients:
    """Second-order pressure/shear closure row for free parameter alpha_plus."""
    lam = params.lambda_plus
    return ClosureCoefficients(
        a0=1.0 - alpha_plus * (0.5 + delta),
        abar0=1.0 - 0.5 * alpha_plus,
        a1=delta * alpha_plus - 1.0,
        alpha_plus=alpha_plus,
        C=alpha_plus * lam * (0.5 + delta) - 2.0 * lam,
        D=0.0 if simplified else -alpha_plus * params.Lambda_plus * W[q] / CS2,
        delta=delta,
    )


def fsk_coefficients(q: int, params: TrtParams, model=None,
                     simplified: bool = False) -> ClosureCoefficients:
    """Local first-order free-surface rule: f_qbar = -f~_q + 2 e_q^+(rho_b,u_b) (+ shear term)."""
    co = fs_family_coefficients(q, 0.5, 2.0, params, simplified)
    # pinning delta = 1/2 makes the row (-1, 0, 0, 2, 0, D), independent of the cut
    assert (co.a0, co.abar0, co.a1, co.C) == (-1.0, 0.0, 0.0, 0.0)
    return co


def fsl_coefficients(q: int, delta: float, params: TrtParams, model=None,
                     simplified: bool = False) -> ClosureCoefficients:
    """Linear-interpolation second-order free-surface rule (alpha_plus = 1)."""
    return fs_family_coefficients(q, delta, 1.0, params, simplified)


def bounce_back_coefficients(q: int = 0) -> ClosureCoefficients:
    """Half-way bounce-back with the moving-wall momentum term."""
    return ClosureCoefficients(a0=1.0, abar0=0.0, a1=0.0, alpha_plus=0.0,
                               C=0.0, D=0.0, delta=0.5, alpha_minus=-2.0)


def cli_coefficients(q: int, delta: float) -> ClosureCoefficients:
    """Central-linear-interpolation no-slip wall rule for an arbitrary cut.

    Exact for linear flows at any delta when linear equilibria are used;
    degenerates to bounce-back at delta = 1/2.
    """
    k = (1.0 - 2.0 * delta) / (1.0 + 2.0 * delta)
    return ClosureCoefficients(a0=1.0, abar0=-k, a1=k, alpha_plus=0.0,
                               C=0.0, D=0.0, delta=delta,
                               alpha_minus=-4.0 / (1.0 + 2.0 * delta))


def boundary_equilibria(q, rho_b, u_b, params: TrtParams):
    """(e_q^+, e_q^-) at prescribed wall/surface values — no force shift.

    Vectorized over q (int or int array).
    """
    w = W[q]
    c = CQ[q].astype(float)
    rho0 = rho_b if params.rho0 is None else params.rho0
    cu = c @ np.asarray(u_b, dtype=float)
    e_plus = 3.0 * w * (CS2 * rho_b)
    if params.use_nonlinear:
        usq = float(np.dot(u_b, u_b))
        e_plus = e_plus + 3.0 * w * rho0 * (1.5 * cu * cu - 0.5 * usq)
    e_minus = 3.0 * w * rho0 * cu
    return e_plus, e_minus


def closure_rhs(co: ClosureCoefficients, f_post_q: float, f_post_qbar: float,
                f_post_up: float, n_plus_q: float, e_plus_b: float,
                e_minus_b: float, ccS: float) -> float:
    """Pure arithmetic form of the closure; ccS = c_qa c_qb S^b_ab."""
    return (co.a0 * f_post_q + co.abar0 * f_post_qbar + co.a1 * f_post_up
            + co.C * n_plus_q
            + co.alpha_plus * e_plus_b + co.alpha_minus * e_minus_b
            + co.D * ccS)


def apply_closure(co: ClosureCoefficients, cut: LinkCut, fields: np.ndarray,
                  bval: BoundaryValue, params: TrtParams, model=None) -> float:
    """Evaluate the closure for one link from pre-collision populations.

    ``fields`` is a ghost-filled (nx+2, ny+2, nz+2, 19) pre-collision buffer;
    the post-collision values at x_b and x_b - c_q and the pre-collision
    n_q^+(x_b) are computed here.  Returns the missing population
    f_qbar(x_b, t+1).  Raises LookupError when a1 != 0 but the upwind cell is
    not available (callers fall back to the local FSK rule).
    """
    ix, iy, iz = cut.cell
    q = cut.q
    f_b = fields[ix, iy, iz]
    f_post_b = collide(f_b, params, model)

    if co.a1 != 0.0:
        cx, cy, cz = CQ[q]
        ux, uy, uz = ix - cx, iy - cy, iz - cz
        if not (0 <= ux < fields.shape[0] and 0 <= uy < fields.shape[1]
                and 0 <= uz < fields.shape[2]):
            raise LookupError(f"upwind cell of link {q} at {cut.cell} missing")
        f_post_up = collide(fields[ux, uy, uz], params, model)[q]
    else:
        f_post_up = 0.0

    state = moments(f_b, params, model)
    from .collision import equilibrium_parts  # local import avoids cycle confusion
    e_plus, _ = equilibrium_parts(state.rho, state.u, params, model)
    n_plus_q = 0.5 * (f_b[q] + f_b[OPPOSITE[q]]) - e_plus[q]

    e_plus_b, e_minus_b = boundary_equilibria(q, bval.rho_b, bval.u_b, params)
    c = CQ[q].astype(float)
    ccS = float(c @ bval.S_b @ c)
    return closure_rhs(co, f_post_b[q], f_post_b[OPPOSITE[q]], f_post_up,
                       n_plus_q, e_plus_b, e_minus_b, ccS)


def bounce_back(cut: LinkCut, fields: np.ndarray, params: TrtParams | None = None,
                u_wall=(0.0, 0.0, 0.0), model=None) -> float:
    """f_qbar(x_b, t+1) = f~_q(x_b, t) (- wall momentum term when u_wall != 0)."""
    params = params or TrtParams()
    bval = BoundaryValue(rho_b=1.0, u_b=np.asarray(u_wall, dtype=float))
    return apply_closure(bounce_back_coefficients(cut.q), cut, fields, bval, params, model)


def cli_wall(cut: LinkCut, fields: np.ndarray, params: TrtParams,
             u_wall=(0.0, 0.0, 0.0), model=None) -> float:
    """CLI no-slip rule; falls back to bounce-back when the upwind cell is missing."""
    bval = BoundaryValue(rho_b=1.0, u_b=np.asarray(u_wall, dtype=float))
    try:
        return apply_closure(cli_coefficients(cut.q, cut.delta), cut, fields,
                             bval, params, model)
    except LookupError:
        return apply_closure(bounce_back_coefficients(cut.q), cut, fields,
                             bval, params, model)


def orthonormal_frame(n: np.ndarray) -> np.ndarray:
    """Columns (t1, t2, n) of a right-handed orthonormal frame for unit normal n."""
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("zero normal vector")
    n = n / norm
    # seed with the axis least aligned with n to keep t1 well-conditioned
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(n)))] = 1.0
    t1 = seed - np.dot(seed, n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return np.column_stack([t1, t2, n])


def project_stress(S: np.ndarray, n: np.ndarray,
                   normal_normal: float | None = None) -> np.ndarray:
    """Impose the free-surface stress conditions on S in the local frame.

    Rotates S into {t1, t2, n}, zeroes the tangential-normal pairs (the
    tangential condition 0 = d_tau j_n + d_n j_tau), keeps the tangential
    block and — unless ``normal_normal`` overrides it — the extrapolated
    normal-normal entry, then rotates back.
    """
    L = orthonormal_frame(n)
    S_loc = L.T @ np.asarray(S, dtype=float) @ L
    S_loc[0, 2] = S_loc[2, 0] = 0.0
    S_loc[1, 2] = S_loc[2, 1] = 0.0
    if normal_normal is not None:
        S_loc[2, 2] = normal_normal
    return L @ S_loc @ L.T


def extrapolate_boundary_values(cut: LinkCut, rho: np.ndarray, u: np.ndarray,
                                flags: np.ndarray, normal: np.ndarray | None = None,
                                rho_b: float = 1.0,
                                shear_from_field: bool = True) -> BoundaryValue:
    """First-order (next-neighbor) boundary values at a free-surface link.

    rho/u are the ghost-excluded macroscopic fields indexed like flags;
    the interface node's own values serve as the next-neighbor estimate of
    u_b, and S_b is assembled from one-sided first-order differences of the
    momentum toward available active neighbors, then projected onto the
    free-surface conditions with ``normal`` (skipped if no normal is known).
    """
    from .lattice import INTERFACE, LIQUID

    ix, iy, iz = cut.cell
    u_b = u[ix, iy, iz].copy()
    if not shear_from_field:
        return BoundaryValue(rho_b=rho_b, u_b=u_b, S_b=np.zeros((3, 3)))

    grad_j = np.zeros((3, 3))  # grad_j[a, b] = d_a j_b
    dims = flags.shape
    for a in range(3):
        step = [0, 0, 0]
        step[a] = 1
        hi = (ix + step[0], iy + step[1], iz + step[2])
        lo = (ix - step[0], iy - step[1], iz - step[2])
        hi_ok = all(0 <= hi[d] < dims[d] for d in range(3)) and flags[hi] in (LIQUID, INTERFACE)
        lo_ok = all(0 <= lo[d] < dims[d] for d in range(3)) and flags[lo] in (LIQUID, INTERFACE)
        if hi_ok and lo_ok:
            grad_j[a] = 0.5 * (u[hi] - u[lo])
        elif hi_ok:
            grad_j[a] = u[hi] - u[ix, iy, iz]
        elif lo_ok:
            grad_j[a] = u[ix, iy, iz] - u[lo]
    S = 0.5 * (grad_j + grad_j.T)
    if normal is not None and np.linalg.norm(normal) > 0.0:
        S = project_stress(S, normal)
    return BoundaryValue(rho_b=rho_b, u_b=u_b, S_b=S)
