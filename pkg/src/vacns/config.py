"""Run configuration: flat key-path grammar, validation, defaults, echo.

A configuration file is plain text, one ``key.path = value`` per line;
``#`` starts a comment and blank lines are ignored. Values are decimal
numbers, booleans (true/false), bare strings, comma-separated lists, or
``rho:value`` pairs for viscosity tables. The full key set with defaults
is in ``DEFAULTS`` below and in the README. Parsing validates everything
and reports *all* errors, not just the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import initial as initial_data
from .grid import Boundary, Grid
from .io import load_state
from .linstep import LinStepConfig
from .picard import PicardConfig
from .state import (FluidState, PhysParams, PowerLaw, SmoothLaw, check_admissible,
                    constant_law, linear_law)

EXPERIMENTS = ("simulate", "oracle-compare", "vacuum-study", "nondecay", "audits")
INITIAL_KINDS = ("constant", "fourier_mode", "remark12_profile", "checkpoint")
VISCOSITY_KINDS = ("constant", "linear", "table", "powerlaw")

DEFAULTS: dict[str, str] = {
    "experiment": "simulate",
    "T_final": "0.1",
    "seed": "0",
    "grid.dim": "1",
    "grid.points": "128",
    "grid.extent": "6.283185307179586",
    "grid.boundary": "periodic",
    "physics.A": "1",
    "physics.gamma": "2",
    "physics.alpha": "1",
    "physics.c_inf": "1",
    "physics.eps_vac": "1e-10",
    "physics.rho_max": "10",
    "physics.outside_theorem": "false",
    "physics.viscosity.kind": "constant",
    "physics.viscosity.beta": "0",
    "physics.viscosity.coef": "1",
    "physics.viscosity.b": "1.5",
    "physics.viscosity.table": "",
    "scheme.dt": "0.001",
    "scheme.cfl_max": "0.9",
    "scheme.lin_tol": "1e-10",
    "scheme.lin_maxit": "500",
    "picard.window": "0.01",
    "picard.max_iter": "20",
    "picard.gamma_tol": "1e-10",
    "picard.delta_list": "0.01,0.001,0.0001",
    "picard.refreeze_per_step": "false",
    "initial.kind": "constant",
    "initial.c_val": "1",
    "initial.u_val": "0",
    "initial.k": "1",
    "initial.amplitude": "0.1",
    "initial.u_mean": "0",
    "initial.c_amplitude": "0",
    "initial.sigma": "2",
    "initial.path": "",
    "output.dir": "out",
    "output.cadence": "1",
    "oracle.levels": "3",
    "oracle.t": "0.5",
    "oracle.min_order": "0.9",
    "audits.corpus": "100",
    "audits.kmax": "3",
    "audits.max_change": "0.1",
}


class ConfigError(Exception):
    """All validation problems of one parse, joined for the report."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    experiment: str
    t_final: float
    seed: int
    grid: Grid
    params: PhysParams
    lin: LinStepConfig
    pic: PicardConfig
    initial_kind: str
    initial_opts: dict
    output_dir: str
    cadence: int
    oracle_levels: int
    oracle_t: float
    oracle_min_order: float
    audits_corpus: int
    audits_kmax: int
    audits_max_change: float
    raw: dict[str, str] = field(default_factory=dict, repr=False)

    def echo(self) -> str:
        """Normalized key = value lines; itself a valid configuration file."""
        return "\n".join(f"{k} = {self.raw[k]}" for k in sorted(self.raw)) + "\n"


def _parse_lines(text: str, errors: list[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, val = (part.strip() for part in stripped.split("=", 1))
        if key not in DEFAULTS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        values[key] = val
    return values


class _Reader:
    def __init__(self, values: dict[str, str], errors: list[str]):
        self.values = values
        self.errors = errors

    def _get(self, key: str) -> str:
        return self.values.get(key, DEFAULTS[key])

    def number(self, key: str) -> float:
        try:
            return float(self._get(key))
        except ValueError:
            self.errors.append(f"{key}: expected a number, got {self._get(key)!r}")
            return float("nan")

    def integer(self, key: str) -> int:
        raw = self._get(key)
        try:
            val = int(raw)
        except ValueError:
            self.errors.append(f"{key}: expected an integer, got {raw!r}")
            return 0
        return val

    def boolean(self, key: str) -> bool:
        raw = self._get(key).lower()
        if raw in ("true", "1", "yes"):
            return True
        if raw in ("false", "0", "no"):
            return False
        self.errors.append(f"{key}: expected true/false, got {raw!r}")
        return False

    def choice(self, key: str, options: tuple[str, ...]) -> str:
        raw = self._get(key)
        if raw not in options:
            self.errors.append(f"{key}: expected one of {options}, got {raw!r}")
            return options[0]
        return raw

    def string(self, key: str) -> str:
        return self._get(key)

    def number_list(self, key: str) -> list[float]:
        raw = self._get(key)
        if not raw.strip():
            return []
        try:
            return [float(tok) for tok in raw.split(",")]
        except ValueError:
            self.errors.append(f"{key}: expected comma-separated numbers, got {raw!r}")
            return []

    def int_list(self, key: str) -> list[int]:
        return [int(v) for v in self.number_list(key)]


def _build_viscosity(rd: _Reader) -> SmoothLaw | PowerLaw:
    kind = rd.choice("physics.viscosity.kind", VISCOSITY_KINDS)
    if kind == "constant":
        return constant_law(rd.number("physics.viscosity.beta"))
    if kind == "linear":
        return linear_law(rd.number("physics.viscosity.coef"))
    if kind == "powerlaw":
        b = rd.number("physics.viscosity.b")
        try:
            return PowerLaw(b)
        except ValueError as err:
            rd.errors.append(f"physics.viscosity.b: {err}")
            return constant_law(0.0)
    raw = rd.string("physics.viscosity.table")
    pairs = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            r, v = tok.split(":")
            pairs.append((float(r), float(v)))
        except ValueError:
            rd.errors.append(f"physics.viscosity.table: bad entry {tok!r}")
    if len(pairs) < 4:
        rd.errors.append("physics.viscosity.table: need at least 4 rho:value pairs")
        return constant_law(0.0)
    pairs.sort()
    from scipy.interpolate import CubicSpline
    spline = CubicSpline([p[0] for p in pairs], [p[1] for p in pairs])
    return SmoothLaw(lambda rho: np.asarray(spline(rho), dtype=float), name="table")


def parse_config_text(text: str) -> RunConfig:
    errors: list[str] = []
    values = _parse_lines(text, errors)
    rd = _Reader(values, errors)

    experiment = rd.choice("experiment", EXPERIMENTS)
    t_final = rd.number("T_final")
    seed = rd.integer("seed")

    dim = rd.integer("grid.dim")
    pts = rd.int_list("grid.points")
    ext = rd.number_list("grid.extent")
    bnd = rd.choice("grid.boundary", ("periodic", "decay_box"))
    grid = None
    if dim in (1, 2, 3):
        try:
            grid = Grid(dim,
                        tuple(pts) if len(pts) > 1 else (pts[0] if pts else 0),
                        tuple(ext) if len(ext) > 1 else (ext[0] if ext else 0.0),
                        Boundary(bnd))
        except (ValueError, IndexError) as err:
            errors.append(f"grid: {err}")
    else:
        errors.append(f"grid.dim: must be 1, 2 or 3, got {dim}")

    viscosity = _build_viscosity(rd)
    gamma = rd.number("physics.gamma")
    params = None
    try:
        params = PhysParams(
            A=rd.number("physics.A"), gamma=gamma,
            alpha=rd.number("physics.alpha"), second_viscosity=viscosity,
            c_inf=rd.number("physics.c_inf"), eps_vac=rd.number("physics.eps_vac"),
            allow_outside_theorem=rd.boolean("physics.outside_theorem"))
    except ValueError as err:
        errors.append(f"physics block (keys physics.*): {err}")
    if params is not None:
        verdict = check_admissible(params, rd.number("physics.rho_max"))
        if not verdict.ok:
            errors.append(
                f"physics.alpha/viscosity: 2*alpha + 3*E(rho) = "
                f"{verdict.min_combination:g} < 0 at rho = {verdict.rho_violation:g}")

    lin = None
    try:
        lin = LinStepConfig(dt=rd.number("scheme.dt"), cfl_max=rd.number("scheme.cfl_max"),
                            lin_tol=rd.number("scheme.lin_tol"),
                            lin_maxit=rd.integer("scheme.lin_maxit"))
    except ValueError as err:
        errors.append(f"scheme: {err}")

    pic = None
    try:
        pic = PicardConfig(window=rd.number("picard.window"),
                           max_iter=rd.integer("picard.max_iter"),
                           gamma_tol=rd.number("picard.gamma_tol"),
                           delta_list=tuple(rd.number_list("picard.delta_list")),
                           refreeze_per_step=rd.boolean("picard.refreeze_per_step"))
    except ValueError as err:
        errors.append(f"picard: {err}")
    if lin is not None and pic is not None and pic.window < lin.dt:
        errors.append(f"picard.window: window {pic.window:g} is shorter than "
                      f"scheme.dt {lin.dt:g}")

    kind = rd.choice("initial.kind", INITIAL_KINDS)
    opts: dict = {}
    if kind == "constant":
        opts = {"c_val": rd.number("initial.c_val"),
                "u_val": tuple(rd.number_list("initial.u_val")) or 0.0}
        if opts["c_val"] < 0:
            errors.append("initial.c_val: must be nonnegative")
    elif kind == "fourier_mode":
        opts = {"k": rd.integer("initial.k"), "amplitude": rd.number("initial.amplitude"),
                "u_mean": tuple(rd.number_list("initial.u_mean")) or 0.0,
                "c_amplitude": rd.number("initial.c_amplitude")}
        if opts["k"] < 1:
            errors.append("initial.k: wavenumber must be a positive integer")
        if params is not None and abs(opts["c_amplitude"]) > params.c_inf:
            errors.append("initial.c_amplitude: density mode would drive c negative")
    elif kind == "remark12_profile":
        sigma = rd.number("initial.sigma")
        opts = {"sigma": sigma}
        if 1.0 < gamma <= 3.0:
            bound = max(1.0, 1.0 / (gamma - 1.0))
            if not sigma > bound:
                errors.append(f"initial.sigma: sigma must exceed "
                              f"max(1, 1/(gamma-1)) = {bound:g}, got {sigma:g}")
    else:
        path = rd.string("initial.path")
        opts = {"path": path}
        if not path:
            errors.append("initial.path: checkpoint runs need a path")
        elif not Path(path).exists():
            errors.append(f"initial.path: no such file {path!r}")

    cadence = rd.integer("output.cadence")
    if cadence < 1:
        errors.append("output.cadence: must be >= 1")
    if t_final <= 0 or not np.isfinite(t_final):
        errors.append(f"T_final: must be positive, got {rd.string('T_final')}")

    out = RunConfig(
        experiment=experiment, t_final=t_final, seed=seed, grid=grid, params=params,
        lin=lin, pic=pic, initial_kind=kind, initial_opts=opts,
        output_dir=rd.string("output.dir"), cadence=cadence,
        oracle_levels=rd.integer("oracle.levels"), oracle_t=rd.number("oracle.t"),
        oracle_min_order=rd.number("oracle.min_order"),
        audits_corpus=rd.integer("audits.corpus"), audits_kmax=rd.integer("audits.kmax"),
        audits_max_change=rd.number("audits.max_change"),
        raw={key: values.get(key, DEFAULTS[key]) for key in DEFAULTS})
    if errors:
        raise ConfigError(errors)
    return out


def parse_config(path) -> RunConfig:
    return parse_config_text(Path(path).read_text())


def build_initial_state(cfg: RunConfig) -> FluidState:
    kind, opts = cfg.initial_kind, cfg.initial_opts
    if kind == "constant":
        return initial_data.constant_state(cfg.grid, cfg.params, **opts)
    if kind == "fourier_mode":
        return initial_data.fourier_mode(cfg.grid, cfg.params, **opts)
    if kind == "remark12_profile":
        return initial_data.inverse_power_profile(cfg.grid, cfg.params, **opts)
    state = load_state(opts["path"])
    if state.grid != cfg.grid:
        raise ConfigError([f"initial.path: checkpoint grid {state.grid} does not "
                           f"match configured grid {cfg.grid}"])
    return state
