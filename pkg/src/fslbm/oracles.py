"""Analytic reference solutions, error norms and convergence-order fits."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class ErrorReport:
    resolution: float  # grid spacing dx relative to the coarsest setup
    L2: float
    Linf: float
    observed_order: float = math.nan


def oracle_plate_transient(z, t, h, mu=1.0 / 6.0, rho=1.0, u_wall=1e-3,
                           k_max=None):
    """Startup flow above an impulsively moved plate at z = h, stress-free at z = 0.

    u(z, t)/u_wall = 1 - sum_k 4(-1)^k/((2k+1) pi)
                         exp(-(2k+1)^2 pi^2 mu t / (4 rho h^2))
                         cos((2k+1) pi z / (2 h))

    With k_max=None the series is summed until the magnitude bound of the
    next term drops below 1e-14 * u_wall (the truncation error of this
    alternating-type series is bounded by the first omitted term).
    """
    z = np.asarray(z, dtype=float)
    alpha = math.pi ** 2 * mu * t / (4.0 * rho * h ** 2)
    if k_max is None:
        k_max = 0
        while 4.0 / ((2 * k_max + 1) * math.pi) * math.exp(
                -(2 * k_max + 1) ** 2 * alpha) > 1e-14:
            k_max += 1
            if k_max > 10_000_000:
                raise RuntimeError("plate-transient series does not truncate")
    k = np.arange(k_max + 1)
    odd = 2 * k + 1
    terms = (4.0 * (-1.0) ** k / (odd * math.pi)
             * np.exp(-(odd ** 2) * alpha)
             * np.cos(odd[:, None] * math.pi * z.ravel()[None, :] / (2.0 * h)).T)
    u = u_wall * (1.0 - terms.sum(axis=1))
    return u.reshape(z.shape) if z.shape else float(u[0])


def oracle_couette(z, h, shear):
    """Linear shear profile u = shear * z (z measured from the no-slip wall)."""
    return shear * np.asarray(z, dtype=float)


def oracle_film_parabola(z, h, g, nu):
    """Gravity-driven film: no-slip at z = 0, zero shear at the surface z = h."""
    z = np.asarray(z, dtype=float)
    return (g / nu) * (h * z - 0.5 * z * z)


def oracle_poiseuille(z, h, g, nu):
    """Channel flow between no-slip walls at z = 0 and z = h; the half-channel
    matches the film profile of height h/2."""
    return oracle_film_parabola(z, 0.5 * h, g, nu)


def error_norms(field, oracle_field):
    """Relative (L2, Linf) deviation of ``field`` from ``oracle_field``.

    L2 = sqrt(sum (u - u_id)^2 / sum u_id^2); Linf = max|u - u_id| / max|u_id|.
    A vanishing oracle would divide by zero; in that case the absolute norms
    are returned and a warning is emitted.
    """
    field = np.asarray(field, dtype=float).ravel()
    oracle_field = np.asarray(oracle_field, dtype=float).ravel()
    diff = field - oracle_field
    ref_sq = float(np.sum(oracle_field ** 2))
    ref_max = float(np.max(np.abs(oracle_field))) if oracle_field.size else 0.0
    if ref_sq == 0.0 or ref_max == 0.0:
        warnings.warn("oracle field is identically zero; reporting absolute norms")
        return float(np.sqrt(np.mean(diff ** 2))), float(np.max(np.abs(diff)))
    l2 = math.sqrt(float(np.sum(diff ** 2)) / ref_sq)
    linf = float(np.max(np.abs(diff))) / ref_max
    return l2, linf


def plate_epsilon(u, u_id, u_wall):
    """Wall-normalized RMS deviation over the sampled column."""
    u = np.asarray(u, dtype=float)
    u_id = np.asarray(u_id, dtype=float)
    return float(np.sqrt(np.mean((u - u_id) ** 2)) / u_wall)


EXACT_FLOOR = 1e-13  # below this the run hit the scheme's fixed point exactly


def observed_order(reports) -> float:
    """Least-squares slope of log(L2 error) against log(dx).

    Needs at least three resolutions.  When any error sits at numerical
    zero the fit is degenerate (the scheme is exact there) and +inf is
    returned so callers can report "exact".
    """
    if len(reports) < 3:
        raise ValueError("observed_order needs at least 3 resolutions")
    dx = np.array([r.resolution for r in reports], dtype=float)
    err = np.array([r.L2 for r in reports], dtype=float)
    if np.any(err <= EXACT_FLOOR):
        return math.inf
    slope = np.polyfit(np.log(dx), np.log(err), 1)[0]
    return float(slope)
