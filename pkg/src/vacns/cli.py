"""Command-line entry point: one experiment per invocation.

    vacns <experiment> --config PATH [--out DIR] [--seed N] [--quiet]

Experiments: simulate, oracle-compare, vacuum-study, nondecay, audits.
Exit codes: 0 all enabled checks passed, 1 a check failed, 2 configuration
error, 3 solver failure. Each run writes a manifest that echoes the full
normalized configuration (the manifest itself parses as a config file), the
CSV reports of the diagnostics schemas, and state checkpoints at the sample
cadence. A failing run additionally writes ``failures.txt`` with one
``check= expected= actual= margin=`` line per failed check.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, build_initial_state, parse_config
from .diagnostics import (commutator_audit, conserved_table, gn_audit,
                          nondecay_check, original_residual, regularity_monitor)
from .grid import Grid
from .io import (save_state, write_audits_csv, write_conserved_csv,
                 write_regularity_csv, write_trace_csv)
from .linstep import (CFLError, FrozenVelocity, LinStepConfig,
                      characteristics_oracle, transport_step)
from .picard import time_march, vacuum_study
from .solvers import LinearSolveError
from .state import rho_from_c


@dataclass
class Check:
    name: str
    passed: bool
    expected: str
    actual: str
    margin: float


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, name: str, passed: bool, expected, actual, margin: float) -> None:
        self.checks.append(Check(name, bool(passed), str(expected), str(actual),
                                 float(margin)))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self, failed_only: bool = False) -> list[str]:
        out = []
        for c in self.checks:
            if failed_only and c.passed:
                continue
            status = "pass" if c.passed else "FAIL"
            out.append(f"check={c.name} status={status} expected={c.expected} "
                       f"actual={c.actual} margin={c.margin:.6g}")
        return out


def _write_manifest(out_dir: Path, cfg: RunConfig, wall_s: float) -> None:
    text = (f"# run manifest (parses as a configuration file)\n"
            f"# code_version = {__version__}\n"
            f"# wall_seconds = {wall_s:.3f}\n") + cfg.echo()
    (out_dir / "manifest.txt").write_text(text)


def _write_report(out_dir: Path, report: Report) -> None:
    (out_dir / "report.txt").write_text("\n".join(report.lines() + report.notes) + "\n")
    if not report.ok:
        (out_dir / "failures.txt").write_text("\n".join(report.lines(failed_only=True)) + "\n")


def _simulate_common(cfg: RunConfig, out_dir: Path, report: Report):
    state0 = build_initial_state(cfg)
    traj = time_march(state0, cfg.t_final, cfg.params, cfg.lin, cfg.pic,
                      sample_cadence=cfg.cadence)
    if not traj.completed:
        raise LinearSolveError(f"march aborted: {traj.failure}")

    records = conserved_table(traj, cfg.params)
    write_conserved_csv(out_dir / "conserved.csv", records, cfg.grid.dim)
    write_regularity_csv(out_dir / "regularity.csv", regularity_monitor(traj, cfg.params))
    write_trace_csv(out_dir / "trace.csv", traj.traces)
    for i, s in enumerate(traj.states):
        save_state(out_dir / f"state_{i:05d}.ckpt", s)

    for s in traj.states:
        finite = all(np.all(np.isfinite(a)) for a in (s.c, s.psi, s.u))
        if not finite:
            report.add("fields_finite", False, "finite", "non-finite", -1.0)
            break
    else:
        report.add("fields_finite", True, "finite", "finite", 0.0)

    floors_apply = records[0].u_floor is not None
    if floors_apply:
        ek_margin = min(r.ek_margin for r in records)
        u_margin = min(r.u_margin for r in records)
        if cfg.grid.is_periodic:
            report.add("kinetic_energy_floor", ek_margin >= 0.0, ">=0",
                       f"{ek_margin:.6g}", ek_margin)
            report.add("velocity_sup_floor", u_margin >= 0.0, ">=0",
                       f"{u_margin:.6g}", u_margin)
        else:
            # decay boxes inject boundary drift: margins are reported, not asserted
            report.notes.append(f"note=floor_margins ek={ek_margin:.6g} u={u_margin:.6g}")
    else:
        report.notes.append("note=floors not-applicable (zero initial momentum or mass)")
    clamps = sum(tr.c_clamps + tr.e_clamps for tr in traj.traces)
    report.notes.append(f"note=clamp_events count={clamps}")
    return traj, records


def run_simulate(cfg: RunConfig, out_dir: Path, report: Report) -> None:
    traj, _ = _simulate_common(cfg, out_dir, report)
    if len(traj.states) >= 2:
        dt = traj.times[-1] - traj.times[-2]
        r_mass, r_mom = original_residual(traj.states[-1], traj.states[-2], dt, cfg.params)
        report.notes.append(f"note=recovered_residuals r_mass={r_mass:.6g} r_mom={r_mom:.6g}")


def run_nondecay(cfg: RunConfig, out_dir: Path, report: Report) -> None:
    traj, _ = _simulate_common(cfg, out_dir, report)
    verdict = nondecay_check(traj, cfg.params)
    if not verdict.applicable:
        report.notes.append("note=nondecay not-applicable (zero initial momentum)")
        return
    report.add("nondecay_velocity_floor", verdict.passed,
               f">={verdict.u_floor * (1 - verdict.allowance):.6g}",
               f"{verdict.min_sup_u:.6g}", verdict.margin)


def run_oracle_compare(cfg: RunConfig, out_dir: Path, report: Report) -> None:
    """Transport convergence against the characteristics integrator.

    Canonical 1D study on a decay box: contracting-characteristics velocity
    v(x) = x with a Gaussian bump, marched to oracle.t at fixed dt/h over
    ``oracle.levels`` grid halvings; passes when the observed order meets
    oracle.min_order.
    """
    if cfg.grid.is_periodic or cfg.grid.dim != 1:
        raise ConfigError(["oracle-compare runs on a 1D decay_box grid"])
    base_n = cfg.grid.points[0]
    extent = cfg.grid.extent[0]
    t_end = cfg.oracle_t
    errs, ns = [], []
    for level in range(cfg.oracle_levels + 1):
        n = base_n * 2 ** level
        g = Grid.decay_box(1, n, extent)
        x = g.meshgrid()[0]
        c = np.exp(-2.0 * x ** 2)
        v = np.stack([x], axis=-1)
        fv = FrozenVelocity.from_field(g, v)
        vmax = fv.max_speed_sum()
        nsteps = int(np.ceil(t_end * vmax / (0.4 * cfg.lin.cfl_max)))
        dt = t_end / nsteps
        cfg_l = LinStepConfig(dt=dt, cfl_max=cfg.lin.cfl_max,
                              lin_tol=cfg.lin.lin_tol, lin_maxit=cfg.lin.lin_maxit)
        for _ in range(nsteps):
            c = transport_step(c, fv, cfg.params, cfg_l)
        exact = characteristics_oracle(
            g, lambda pts: np.exp(-2.0 * pts[..., 0] ** 2),
            lambda pts: pts, t_end, cfg.params,
            div_v=lambda pts: np.ones(pts.shape[:-1]))
        errs.append(float(np.abs(c - exact).max()))
        ns.append(n)
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    order = float(np.mean(orders))
    lines = ["points,linf_error"] + [f"{n},{e:.17g}" for n, e in zip(ns, errs)]
    (out_dir / "oracle.csv").write_text("\n".join(lines) + "\n")
    report.add("transport_oracle_order", order >= cfg.oracle_min_order,
               f">={cfg.oracle_min_order}", f"{order:.4f}", order - cfg.oracle_min_order)


def run_vacuum_study(cfg: RunConfig, out_dir: Path, report: Report) -> None:
    state0 = build_initial_state(cfg)
    rho0 = rho_from_c(state0.c, cfg.params)
    rows, decreasing = vacuum_study(cfg.grid, rho0, cfg.params, cfg.lin, cfg.pic,
                                    cfg.t_final, u0=state0.u)
    lines = ["delta_hi,delta_lo,difference"]
    lines += [f"{r.delta_hi:.17g},{r.delta_lo:.17g},{r.difference:.17g}" for r in rows]
    (out_dir / "vacuum.csv").write_text("\n".join(lines) + "\n")
    diffs = [r.difference for r in rows]
    margin = min(diffs[i] - diffs[i + 1] for i in range(len(diffs) - 1)) if len(diffs) > 1 else 0.0
    report.add("vacuum_regularization_cauchy", decreasing, "strictly decreasing",
               ",".join(f"{d:.3g}" for d in diffs), margin)


def run_audits(cfg: RunConfig, out_dir: Path, report: Report) -> None:
    if not cfg.grid.is_periodic:
        raise ConfigError(["audits run on a periodic grid"])
    size = cfg.audits_corpus
    rows: list[tuple[int, str, float]] = []
    results = {}
    for n in (size, 2 * size):
        gn = gn_audit(cfg.grid, n, cfg.seed)
        comm = commutator_audit(cfg.grid, n, cfg.seed)
        for p, ratio in gn.items():
            rows.append((n, f"gn_p{p:g}", ratio))
        for label, ratio in comm.items():
            rows.append((n, f"commutator_{label}", ratio))
        results[n] = {**{f"gn_p{p:g}": v for p, v in gn.items()},
                      **{f"commutator_{k}": v for k, v in comm.items()}}
    write_audits_csv(out_dir / "audits.csv", rows)
    for label, base in results[size].items():
        grown = results[2 * size][label]
        change = abs(grown - base) / max(base, 1e-300)
        report.add(f"audit_stable_{label}", change < cfg.audits_max_change,
                   f"<{cfg.audits_max_change:g}", f"{change:.4g}",
                   cfg.audits_max_change - change)


RUNNERS = {
    "simulate": run_simulate,
    "oracle-compare": run_oracle_compare,
    "vacuum-study": run_vacuum_study,
    "nondecay": run_nondecay,
    "audits": run_audits,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="vacns", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("experiment", choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, help="configuration file path")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    def say(msg):
        if not args.quiet:
            print(msg)

    try:
        cfg = parse_config(args.config)
    except FileNotFoundError:
        print(f"configuration error: no such file {args.config!r}", file=sys.stderr)
        return 2
    except ConfigError as err:
        for e in err.errors:
            print(f"configuration error: {e}", file=sys.stderr)
        return 2

    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw["seed"] = str(args.seed)
    if cfg.experiment != args.experiment:
        cfg.experiment = args.experiment
        cfg.raw["experiment"] = args.experiment
    out_dir = Path(args.out if args.out is not None else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = Report()
    start = time.perf_counter()
    try:
        RUNNERS[args.experiment](cfg, out_dir, report)
    except ConfigError as err:
        for e in err.errors:
            print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (LinearSolveError, CFLError, FloatingPointError, RuntimeError) as err:
        _write_manifest(out_dir, cfg, time.perf_counter() - start)
        (out_dir / "failures.txt").write_text(
            f"check=solver expected=completion actual={err} margin=nan\n")
        print(f"solver failure: {err}", file=sys.stderr)
        return 3
    _write_manifest(out_dir, cfg, time.perf_counter() - start)
    _write_report(out_dir, report)
    for line in report.lines() + report.notes:
        say(line)
    if not report.ok:
        print("one or more checks failed; see failures.txt", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
