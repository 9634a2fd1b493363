"""Declarative scenario descriptions and convergence-study runners.

A Scenario pins geometry, collision parameters, boundary rules and forcing
for one experiment; run_scenario executes it over its resolution list and
returns per-resolution error reports against the analytic profile.  Forcing
follows diffusive scaling so the Reynolds number is resolution-independent:
body force g = g0 dx^3, imposed surface shear a = a0 dx^2, wall velocity
constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .collision import TrtParams, set_magic, viscosity, lambda_plus_for_viscosity
from .engine import ChannelSolver, ChannelSpec, FreeSurfaceSolver
from .lattice import GAS, INTERFACE, LIQUID
from .oracles import (ErrorReport, error_norms, observed_order,
                      oracle_couette, oracle_film_parabola,
                      oracle_plate_transient, oracle_poiseuille, plate_epsilon)


@dataclass
class Scenario:
    name: str
    kind: str = "steady-channel"  # steady-channel | plate-transient | dam-break
    oracle: str = "film"          # couette | film | poiseuille | plate
    height: float = 8.0           # channel height at dx = 1 (perpendicular)
    slope: Fraction = Fraction(0)
    ny: int = 1
    bottom: str = "bounce-back"
    rule: str = "fsl"             # top boundary rule
    lambda_plus: float = -1.0
    magic: float = 3.0 / 16.0
    nonlinear: bool = False
    u_wall: float = 0.0           # tangential wall speed (plate transient)
    gravity0: float = 0.0         # tangential body force at dx = 1
    shear0: float = 0.0           # imposed surface velocity gradient at dx = 1
    resolutions: tuple[float, ...] = (1.0,)
    times: tuple[float, ...] = () # plate transient: dimensionless T samples
    init: str = "analytic"        # analytic | rest
    steady_tol: float = 1e-12
    max_steps: int = 2_000_000
    # dam-break extras
    column: tuple[int, int] = (80, 40)
    tank: tuple[int, int] = (320, 56)
    samples: tuple[int, ...] = (2000, 4000, 6000, 8000)

    def params(self, dx: float = 1.0) -> TrtParams:
        t_hat = ChannelSpec(height=1.0, slope=self.slope).tangent
        force = tuple(self.gravity0 * dx ** 3 * t_hat)
        base = TrtParams(lambda_plus=self.lambda_plus, lambda_minus=-1.0,
                         rho0=1.0, use_nonlinear=self.nonlinear, force=force)
        return set_magic(base, self.magic)

    def shear(self, dx: float) -> float:
        return self.shear0 * dx ** 2

    def gravity(self, dx: float) -> float:
        return self.gravity0 * dx ** 3


# -- named experiment setups -------------------------------------------------

def plate_transient_scenario(rule: str = "fsl") -> Scenario:
    return Scenario(
        name=f"plate-transient-{rule}", kind="plate-transient", oracle="plate",
        height=8.0, rule=rule, u_wall=1e-3, lambda_plus=-1.0, magic=0.25,
        resolutions=(1.0, 0.5, 0.25, 0.125),
        times=(1 / 64, 1 / 8, 3 / 8, 3 / 4), init="rest")


def couette_exact_scenario(height: float, nonlinear: bool = False,
                           rule: str = "fsl") -> Scenario:
    return Scenario(
        name=f"couette-h{height}-{'nl' if nonlinear else 'lin'}",
        oracle="couette", height=height, rule=rule, nonlinear=nonlinear,
        lambda_plus=-1.0, magic=3 / 16, shear0=2e-3, init="rest")


def film_exact_scenario(height: float, rule: str) -> Scenario:
    nu = 1.0 / 6.0
    return Scenario(
        name=f"film-h{height}-{rule}", oracle="film", height=height, rule=rule,
        lambda_plus=lambda_plus_for_viscosity(nu), magic=3 / 16,
        gravity0=2 * 0.02 * nu / height ** 2, init="rest")


def poiseuille_scenario(height: float = 16.0) -> Scenario:
    nu = 1.0 / 6.0
    return Scenario(
        name=f"poiseuille-h{height}", oracle="poiseuille", height=height,
        bottom="bounce-back", rule="bounce-back",
        lambda_plus=lambda_plus_for_viscosity(nu), magic=3 / 16,
        gravity0=8 * nu * 0.02 / height ** 2, init="rest")


def film_study_scenario(rule: str = "fsk") -> Scenario:
    sc = film_exact_scenario(8.33, rule)
    return replace(sc, name=f"film-study-{rule}",
                   resolutions=(1.0, 0.5, 0.25, 0.125), init="analytic")


def rotated_couette_scenario(rule: str = "fsl") -> Scenario:
    nu = 1.0
    return Scenario(
        name=f"rotated-couette-{rule}", oracle="couette", height=8.0,
        slope=Fraction(1, 4), bottom="cli", rule=rule, nonlinear=True,
        lambda_plus=lambda_plus_for_viscosity(nu), magic=0.25, shear0=1e-3,
        resolutions=(1.0, 0.5, 0.25, 0.125), init="analytic")


def rotated_film_scenario(rule: str) -> Scenario:
    nu = 0.5  # tau = 2
    h0 = 8.33
    return Scenario(
        name=f"rotated-film-{rule}", oracle="film", height=h0,
        slope=Fraction(1, 7), bottom="cli", rule=rule,
        lambda_plus=-0.5, magic=0.25,
        gravity0=2 * 0.02 * nu / h0 ** 2,
        resolutions=(1.0, 0.5, 0.25, 0.125, 0.0625), init="analytic")


def dam_break_scenario(rule: str = "fsk") -> Scenario:
    nu = 1.0 / 3.0
    u_max = 0.05
    return Scenario(
        name="dam-break", kind="dam-break", rule=rule,
        lambda_plus=lambda_plus_for_viscosity(nu), magic=3 / 16,
        gravity0=u_max ** 2 / (2 * 40), column=(80, 40), tank=(320, 56))


NAMED_SCENARIOS = {
    "plate-transient": plate_transient_scenario,
    "couette": lambda: couette_exact_scenario(8.0),
    "film": lambda: film_exact_scenario(8.33, "fsl"),
    "poiseuille": poiseuille_scenario,
    "film-study": film_study_scenario,
    "rotated-couette": rotated_couette_scenario,
    "rotated-film": lambda: rotated_film_scenario("fsl"),
    "dam-break": dam_break_scenario,
}


# -- execution ----------------------------------------------------------------

def build_channel_solver(sc: Scenario, dx: float) -> ChannelSolver:
    h = sc.height / dx
    params = sc.params(dx)
    S_top = None
    if sc.oracle == "couette":
        a = sc.shear(dx)
        t_hat, n_hat = _frame(sc)
        S_top = 0.5 * a * (np.outer(t_hat, n_hat) + np.outer(n_hat, t_hat))
    spec = ChannelSpec(height=h, slope=sc.slope, ny=sc.ny, bottom=sc.bottom,
                       top=sc.rule, S_top=S_top,
                       u_wall_bottom=tuple(sc.u_wall * _frame(sc)[0]))
    solver = ChannelSolver(spec, params)
    if sc.init == "analytic":
        _apply_analytic_init(sc, dx, solver)
    return solver


def _frame(sc: Scenario):
    spec = ChannelSpec(height=1.0, slope=sc.slope)
    return spec.tangent, spec.normal


def _profile(sc: Scenario, dx: float, d, nu: float):
    h = sc.height / dx
    if sc.oracle == "couette":
        return oracle_couette(d, h, sc.shear(dx))
    if sc.oracle == "film":
        return oracle_film_parabola(d, h, sc.gravity(dx), nu)
    if sc.oracle == "poiseuille":
        return oracle_poiseuille(d, h, sc.gravity(dx), nu)
    raise ValueError(f"no steady profile for oracle {sc.oracle!r}")


def _profile_slope(sc: Scenario, dx: float, d, nu: float):
    h = sc.height / dx
    if sc.oracle == "couette":
        return np.full_like(np.asarray(d, dtype=float), sc.shear(dx))
    if sc.oracle == "film":
        return (sc.gravity(dx) / nu) * (h - np.asarray(d, dtype=float))
    if sc.oracle == "poiseuille":
        g = sc.gravity(dx)
        return (g / nu) * (0.5 * h - np.asarray(d, dtype=float))
    raise ValueError(f"no steady profile for oracle {sc.oracle!r}")


def _apply_analytic_init(sc: Scenario, dx: float, solver: ChannelSolver):
    nu = viscosity(solver.params)
    t_hat, n_hat = _frame(sc)
    d = np.clip(solver.depth, 0.0, sc.height / dx)
    u = _profile(sc, dx, d, nu)[..., None] * t_hat
    sym = 0.5 * (np.outer(t_hat, n_hat) + np.outer(n_hat, t_hat))
    S = _profile_slope(sc, dx, d, nu)[..., None, None] * sym
    solver.initialize_chapman_enskog(u, S)


def run_channel_resolution(sc: Scenario, dx: float):
    solver = build_channel_solver(sc, dx)
    steps = solver.run_to_steady(tol=sc.steady_tol, max_steps=sc.max_steps)
    active = solver.active_interior()
    u_t = solver.tangential_velocity()[active]
    d = solver.node_depths()[active]
    u_id = _profile(sc, dx, d, viscosity(solver.params))
    l2, linf = error_norms(u_t, u_id)
    return ErrorReport(resolution=dx, L2=l2, Linf=linf), steps, solver


def run_scenario(sc: Scenario) -> list[ErrorReport]:
    """Execute every resolution of a scenario and attach the observed order."""
    if sc.kind == "dam-break":
        raise ValueError("dam-break scenarios run through cli.run_dam_break")
    if sc.kind == "plate-transient":
        if len(sc.times) != 1:
            raise ValueError("run_scenario needs a single sample time; "
                             "use run_plate_study for the full time set")
        return run_plate_study(sc)[sc.times[0]]
    reports = [run_channel_resolution(sc, dx)[0] for dx in sc.resolutions]
    _attach_order(reports)
    return reports


def _attach_order(reports: list[ErrorReport]):
    if len(reports) >= 3:
        order = observed_order(reports)
        for r in reports:
            r.observed_order = order


def run_plate_study(sc: Scenario) -> dict[float, list[ErrorReport]]:
    """One transient run per resolution, sampled at all requested T values."""
    mu = viscosity(sc.params()) * 1.0  # rho0 = 1
    out: dict[float, list[ErrorReport]] = {t: [] for t in sc.times}
    for dx in sc.resolutions:
        h = sc.height / dx
        if abs(h - round(h)) > 1e-9:
            raise ValueError("plate transient expects integer channel heights")
        h = int(round(h))
        sample_steps = {}
        for T in sc.times:
            step = T * h ** 2 / mu
            if abs(step - round(step)) > 1e-9:
                raise ValueError(f"T={T} is not an integer step count at h={h}")
            sample_steps[int(round(step))] = T
        solver = build_channel_solver(sc, dx)
        z = solver.node_depths()[0, 0, :][solver.active_interior()[0, 0, :]]
        now = 0
        for step in sorted(sample_steps):
            solver.run(step - now)
            now = step
            T = sample_steps[step]
            u_x = solver.velocity()[0, 0, :, 0][solver.active_interior()[0, 0, :]]
            u_id = oracle_plate_transient(h - z, step, h, mu=mu, rho=1.0,
                                          u_wall=sc.u_wall)
            eps = plate_epsilon(u_x, u_id, sc.u_wall)
            out[T].append(ErrorReport(resolution=dx, L2=eps, Linf=eps))
    for reports in out.values():
        _attach_order(reports)
    return out


# -- dam break ---------------------------------------------------------------

def build_dam_break_solver(sc: Scenario, rule: str | None = None) -> FreeSurfaceSolver:
    """Liquid column against the left wall of a closed tank, gas elsewhere."""
    nx, nz = sc.tank
    cw, ch = sc.column
    flags = np.full((nx, 1, nz), GAS, dtype=np.int8)
    flags[:cw, :, :ch] = LIQUID
    flags[cw - 1, :, :ch] = INTERFACE
    flags[:cw, :, ch - 1] = INTERFACE
    params = replace(sc.params(1.0), force=(0.0, 0.0, -sc.gravity0))
    return FreeSurfaceSolver(flags, params, rule=rule or sc.rule)


def run_dam_break_rule(sc: Scenario, rule: str, snapshot_cb=None,
                       check_every: int = 200,
                       snap_every: int = 0) -> tuple[dict[int, int], float]:
    """Run one rule variant; returns {step: front position} and mass drift."""
    solver = build_dam_break_solver(sc, rule)
    mass0 = solver.total_mass()
    fronts = {0: solver.front_position()}
    last = max(sc.samples)
    for step in range(1, last + 1):
        solver.step()
        if step % check_every == 0:
            solver.check_divergence()
        if step in sc.samples:
            fronts[step] = solver.front_position()
        if snapshot_cb is not None and snap_every and step % snap_every == 0:
            snapshot_cb(step, solver)
    drift = abs(solver.total_mass() - mass0) / mass0
    return fronts, drift


# -- CSV emission --------------------------------------------------------------

def format_order(order: float) -> str:
    if math.isinf(order):
        return "exact"
    if math.isnan(order):
        return ""
    return repr(order)


def error_csv_rows(scenario_name: str, rule: str, reports: list[ErrorReport]):
    for r in reports:
        yield (scenario_name, rule, repr(float(r.resolution)), repr(r.L2),
               repr(r.Linf), format_order(r.observed_order))


def write_error_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write("scenario,rule,dx,L2,Linf,observed_order\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
