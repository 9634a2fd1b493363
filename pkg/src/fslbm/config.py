"""Plain-text run configuration.

Format: `key = value` lines, `#` comments, and an optional `[scenario]`
section overriding fields of the named base scenario:

    scenario = rotated-film      # base setup (see scenarios.NAMED_SCENARIOS)
    rule = fsl
    out = results
    snapshots_every = 0

    [scenario]
    height = 8.33
    slope = 1/7
    resolutions = 1, 0.5, 0.25

Unknown keys are rejected with file:line:column diagnostics; field values are
validated after coercion (e.g. relaxation rates must lie in (-2, 0)).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .engine import FREE_SURFACE_RULES, WALL_RULES
from .scenarios import NAMED_SCENARIOS, Scenario


class ConfigError(Exception):
    def __init__(self, path, line, col, message):
        self.path, self.line, self.col = path, line, col
        super().__init__(f"{path}:{line}:{col}: {message}")


@dataclass
class RunConfig:
    scenario_path: str
    out_dir: str = "out"
    rule: str | None = None
    snapshots_every: int = 0
    seed: int = 0
    quiet: bool = False
    scenario: Scenario | None = None


def _number(text: str) -> float:
    return float(Fraction(text)) if "/" in text else float(text)


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _tuple_of(conv):
    return lambda text: tuple(conv(t.strip()) for t in text.split(",") if t.strip())


SCENARIO_COERCERS = {
    "name": str,
    "kind": str,
    "oracle": str,
    "height": _number,
    "slope": Fraction,
    "ny": int,
    "bottom": str,
    "rule": str,
    "lambda_plus": _number,
    "magic": _number,
    "nonlinear": _bool,
    "u_wall": _number,
    "gravity0": _number,
    "shear0": _number,
    "resolutions": _tuple_of(_number),
    "times": _tuple_of(_number),
    "init": str,
    "steady_tol": _number,
    "max_steps": int,
    "column": _tuple_of(int),
    "tank": _tuple_of(int),
    "samples": _tuple_of(int),
}

TOP_COERCERS = {
    "scenario": str,
    "rule": str,
    "out": str,
    "snapshots_every": int,
    "seed": int,
    "quiet": _bool,
}

KINDS = ("steady-channel", "plate-transient", "dam-break")
ORACLES = ("couette", "film", "poiseuille", "plate")
INITS = ("analytic", "rest")


def _scan(path):
    """Yield (line_no, col_no, section, key, value) for every assignment."""
    with open(path) as fh:
        section = ""
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            stripped = line.strip()
            col = raw.index(stripped[0]) + 1
            if stripped.startswith("["):
                if not stripped.endswith("]"):
                    raise ConfigError(path, line_no, col, "unterminated section header")
                section = stripped[1:-1].strip()
                if section != "scenario":
                    raise ConfigError(path, line_no, col,
                                      f"unknown section [{section}]")
                continue
            if "=" not in stripped:
                raise ConfigError(path, line_no, col,
                                  "expected `key = value` or a [section] header")
            key, value = stripped.split("=", 1)
            key_token = key.strip()
            key_col = raw.index(key_token) + 1
            yield line_no, key_col, section, key_token, value.strip()


def parse_config(path) -> tuple[Scenario, RunConfig]:
    run = RunConfig(scenario_path=str(path))
    overrides: dict[str, object] = {}
    positions: dict[str, tuple[int, int]] = {}
    base_name = None

    for line_no, col, section, key, value in _scan(path):
        table = SCENARIO_COERCERS if section == "scenario" else TOP_COERCERS
        if key not in table:
            raise ConfigError(path, line_no, col, f"unknown key {key!r}")
        try:
            coerced = table[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(path, line_no, col, f"bad value for {key}: {exc}")
        if section == "scenario":
            overrides[key] = coerced
            positions[key] = (line_no, col)
        elif key == "scenario":
            base_name = coerced
            positions[key] = (line_no, col)
        elif key == "out":
            run.out_dir = coerced
        elif key == "rule":
            run.rule = coerced
            positions["rule"] = (line_no, col)
        else:
            setattr(run, key, coerced)
            positions[key] = (line_no, col)

    if base_name is None:
        raise ConfigError(path, 0, 0, "missing required key `scenario`")
    if base_name not in NAMED_SCENARIOS:
        line, col = positions["scenario"]
        known = ", ".join(sorted(NAMED_SCENARIOS))
        raise ConfigError(path, line, col,
                          f"unknown scenario {base_name!r} (known: {known})")

    scenario = replace(NAMED_SCENARIOS[base_name](), **overrides)
    if run.rule is not None:
        scenario = replace(scenario, rule=run.rule)

    def where(key):
        return positions.get(key, (0, 0))

    _validate(scenario, run, path, where)
    run.scenario = scenario
    return scenario, run


def _validate(sc: Scenario, run: RunConfig, path, where):
    def fail(key, message):
        line, col = where(key)
        raise ConfigError(path, line, col, message)

    if sc.kind not in KINDS:
        fail("kind", f"kind must be one of {KINDS}, got {sc.kind!r}")
    if sc.oracle not in ORACLES:
        fail("oracle", f"oracle must be one of {ORACLES}, got {sc.oracle!r}")
    if sc.init not in INITS:
        fail("init", f"init must be one of {INITS}, got {sc.init!r}")
    if sc.rule not in FREE_SURFACE_RULES + WALL_RULES:
        fail("rule", f"unknown boundary rule {sc.rule!r}")
    if sc.bottom not in WALL_RULES:
        fail("bottom", f"unknown wall rule {sc.bottom!r}")
    if sc.height <= 0:
        fail("height", "height must be positive")
    if not all(r > 0 for r in sc.resolutions):
        fail("resolutions", "grid spacings must be positive")
    if any(b >= a for a, b in zip(sc.resolutions, sc.resolutions[1:])):
        fail("resolutions", "resolutions must be strictly increasing "
                            "(descending dx)")
    if run.snapshots_every < 0:
        fail("snapshots_every", "snapshot cadence must be >= 0")
    try:
        sc.params(1.0)
    except ValueError as exc:
        key = "lambda_plus" if "lambda_plus" in str(exc) else "magic"
        fail(key, str(exc))
