"""Two-relaxation-time collision: equilibria, moments, forcing, parameters.

The collision step relaxes the symmetric (even) and antisymmetric (odd) link
parts of the populations with independent rates lambda_plus and lambda_minus,
both in (-2, 0):

    f~_q = f_q + lambda_plus * n_q^+ + lambda_minus * n_q^-,
    n_q^{+-} = f_q^{+-} - e_q^{+-}.

Body forces enter exclusively through the shifted equilibrium velocity
u_eq = U - F/lambda_minus (no per-link source term), which keeps a single
code path and yields the exact one-step momentum input
sum_q c_q f~_q = sum_q c_q f_q + F.

The even equilibrium is e_q^+ = (w_q/c_s^2) (P + N_q) with P = c_s^2 rho and
the quadratic term N_q = rho0/2 * u_a u_b (c_qa c_qb / c_s^2 - delta_ab);
the odd part is e_q^- = (w_q/c_s^2) c_q . j_eq.  rho0 = 1 selects the
incompressible equilibrium; rho0 = None uses the local density (compressible).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import C, CS2, W, LatticeModel, even_odd_split


@dataclass(frozen=True)
class TrtParams:
    """Relaxation rates, reference density, equilibrium options, body force."""

    lambda_plus: float = -1.0
    lambda_minus: float = -1.0
    rho0: float | None = 1.0  # None -> compressible (rho0 = local rho)
    use_nonlinear: bool = True
    force: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name, lam in (("lambda_plus", self.lambda_plus),
                          ("lambda_minus", self.lambda_minus)):
            if not (-2.0 < lam < 0.0):
                raise ValueError(f"{name} out of (-2,0): {lam}")
        if self.rho0 is not None and self.rho0 <= 0.0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")

    @property
    def Lambda_plus(self) -> float:
        return -(0.5 + 1.0 / self.lambda_plus)

    @property
    def Lambda_minus(self) -> float:
        return -(0.5 + 1.0 / self.lambda_minus)

    @property
    def magic(self) -> float:
        return self.Lambda_plus * self.Lambda_minus

    @property
    def force_vec(self) -> np.ndarray:
        return np.asarray(self.force, dtype=float)


def viscosity(params: TrtParams) -> float:
    """Kinematic lattice viscosity nu = -(1/3)(1/lambda_plus + 1/2)."""
    return -(1.0 / 3.0) * (1.0 / params.lambda_plus + 0.5)


def lambda_plus_for_viscosity(nu: float) -> float:
    """Invert viscosity(): the even rate that yields lattice viscosity nu."""
    return -1.0 / (3.0 * nu + 0.5)


def from_tau(tau: float, **kwargs) -> TrtParams:
    """Build params from the BGK relaxation-time convention lambda_plus = -1/tau."""
    return TrtParams(lambda_plus=-1.0 / tau, lambda_minus=-1.0 / tau, **kwargs)


def set_magic(params: TrtParams, magic_target: float) -> TrtParams:
    """Return params with lambda_minus adjusted so Lambda_plus*Lambda_minus = magic_target."""
    if magic_target <= 0.0:
        raise ValueError(f"magic target must be positive, got {magic_target}")
    lam_minus = -1.0 / (magic_target / params.Lambda_plus + 0.5)
    if not (-2.0 < lam_minus < 0.0):
        raise ValueError(
            f"magic {magic_target} with lambda_plus={params.lambda_plus} "
            f"requires lambda_minus={lam_minus}, outside (-2,0)"
        )
    return replace(params, lambda_minus=lam_minus)


@dataclass
class MacroState:
    """Macroscopic moments: density, velocity (post force shift), momentum."""

    rho: np.ndarray
    u: np.ndarray
    j: np.ndarray

    @property
    def pressure(self) -> np.ndarray:
        return CS2 * self.rho


def _rho0_of(rho, params: TrtParams):
    return rho if params.rho0 is None else params.rho0


def moments(f: np.ndarray, params: TrtParams, model: LatticeModel | None = None) -> MacroState:
    """Zeroth/first moments with the F/2 force shift: u = U + F/(2 rho0)."""
    rho = f.sum(axis=-1)
    momentum = f @ C.astype(float)  # rho0 * U
    rho0 = np.expand_dims(np.asarray(_rho0_of(rho, params), dtype=float), -1)
    u = (momentum + 0.5 * params.force_vec) / rho0
    return MacroState(rho=rho, u=u, j=rho0 * u)


def equilibrium_parts(rho, u, params: TrtParams, model: LatticeModel | None = None):
    """Return (e_plus, e_minus) for macroscopic state (rho, u).

    The odd part absorbs the force shift: it is evaluated at the momentum
    j_eq = rho0*u - F/2 - F/lambda_minus, so callers always pass the physical
    fluid velocity u.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    rho0 = np.expand_dims(np.asarray(_rho0_of(rho, params), dtype=float), -1)
    cf = C.astype(float)

    pi = np.expand_dims(CS2 * rho, -1)
    if params.use_nonlinear:
        cu = u @ cf.T                                          # (..., 19)
        usq = np.sum(u * u, axis=-1, keepdims=True)            # (..., 1)
        pi = pi + rho0 * (1.5 * cu * cu - 0.5 * usq)
    e_plus = 3.0 * W * pi

    j_eq = rho0 * u - (0.5 + 1.0 / params.lambda_minus) * params.force_vec
    e_minus = 3.0 * W * (j_eq @ cf.T)
    return e_plus, e_minus


def equilibrium(rho, u, params: TrtParams, model: LatticeModel | None = None) -> np.ndarray:
    e_plus, e_minus = equilibrium_parts(rho, u, params, model)
    return e_plus + e_minus


def collide(f: np.ndarray, params: TrtParams, model: LatticeModel | None = None) -> np.ndarray:
    """Post-collision populations f~ for any (..., 19) input."""
    params.validate()
    state = moments(f, params, model)
    e_plus, e_minus = equilibrium_parts(state.rho, state.u, params, model)
    f_plus, f_minus = even_odd_split(f, model)
    return (
        f
        + params.lambda_plus * (f_plus - e_plus)
        + params.lambda_minus * (f_minus - e_minus)
    )
