"""Command line entry point: ``ep-annulus <command> --config <path> [--out <dir>]``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import decomposition as d3
from .background import find_sonic_radius, integrate_background
from .errors import ConfigError, SolverError
from .io import RunConfig, load_config, write_csv, write_profile_csv
from .iteration import SolveReport, fixed_point_solve, full_residual
from .section import AxisymBackground, DeviationField

COMMANDS = ("background", "sonic", "solve", "check3d", "residual", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

GNUPLOT_FIELDS = """\
set datafile separator ','
set key autotitle columnhead
set xlabel 'r'
set ylabel 'x3'
set view map
splot '{csv}' using 1:2:{col} with points palette pt 5 ps 0.5
"""


def _background(cfg: RunConfig) -> AxisymBackground:
    return AxisymBackground.from_inlet(cfg.inlet, cfg.grid, min_nodes=cfg.n_nodes)


def write_solve_outputs(report: SolveReport, bg: AxisymBackground, out: Path, gnuplot: bool = False) -> None:
    k = np.arange(1, report.iterations + 1)
    ratios = [0.0] + list(report.ratios)
    ratios += [0.0] * (report.iterations - len(ratios))
    write_csv(out / "report.csv", ("iteration", "increment", "c1_increment", "ratio"),
              (k, report.increments, report.c1_increments, ratios))
    R, Z = bg.grid.mesh()
    W = report.field
    write_csv(out / "fields.csv", ("r", "x3", "W1", "W2", "W3", "W4", "W5", "W6"),
              [R.ravel(), Z.ravel()] + [w.ravel() for w in W])
    res = report.residual
    write_csv(out / "residuals.csv", ("equation", "sup", "l2"), (list(res.names), res.sup, res.l2))
    if gnuplot:
        (out / "fields.gp").write_text(GNUPLOT_FIELDS.format(csv="fields.csv", col=3))


def cmd_background(cfg: RunConfig, out: Path) -> str:
    prof = integrate_background(cfg.inlet, cfg.n_nodes)
    write_profile_csv(prof, out / "profile.csv")
    return f"regime: {prof.regime.name}"


def cmd_sonic(cfg: RunConfig, out: Path) -> str:
    prof = integrate_background(cfg.inlet, cfg.n_nodes)
    r_c = find_sonic_radius(prof)
    text = "none" if r_c is None else format(r_c, ".17g")
    write_csv(out / "sonic.csv", ("regime", "r_c"), ([prof.regime.name], [text]))
    return f"sonic radius: {text}"


def cmd_solve(cfg: RunConfig, out: Path) -> str:
    bg = _background(cfg)
    report = fixed_point_solve(bg, cfg.boundary, cfg.solver)
    write_solve_outputs(report, bg, out, cfg.gnuplot)
    return (f"converged in {report.iterations} iterations, |W| = {report.field.sup_norm():.6g}, "
            f"contraction ratio {report.contraction_ratio:.3g}")


def cmd_residual(cfg: RunConfig, out: Path) -> str:
    """Six-equation residual of the unperturbed background on the grid and its refinement."""
    rows = ([], [], [], [], [])
    zero = cfg.boundary.with_eps(0.0)
    for grid in (cfg.grid, cfg.grid.refine()):
        bg = AxisymBackground.from_inlet(cfg.inlet, grid, min_nodes=cfg.n_nodes)
        res = full_residual(DeviationField.zeros(grid), bg, zero)
        for name, s, l in zip(res.names, res.sup, res.l2):
            for col, v in zip(rows, (grid.nr, grid.nz, name, s, l)):
                col.append(v)
    write_csv(out / "residuals.csv", ("nr", "nz", "equation", "sup", "l2"), rows)
    return f"background residual written for {cfg.grid.nr}x{cfg.grid.nz} and its refinement"


def _field_3d(cfg: RunConfig, n: int) -> d3.CylField3D:
    grid = d3.CylGrid3D.cube(n, cfg.inlet.r0, cfg.inlet.r1)
    preset = cfg.check3d.preset
    if preset == "background":
        return d3.lifted_background(cfg.inlet, grid)
    if preset not in d3.PRESETS_3D:
        raise ConfigError(f"[check3d] unknown preset {preset!r}")
    try:
        return d3.PRESETS_3D[preset](grid, **cfg.check3d.params)
    except TypeError as exc:
        raise ConfigError(f"[check3d] {exc}") from None


def cmd_check3d(cfg: RunConfig, out: Path) -> str:
    rows = ([], [], [], [])
    for n in cfg.check3d.levels:
        rep = d3.equivalence_check(_field_3d(cfg, n))
        for family, norms in (("euler", rep.euler), ("decomposition", rep.decomposition)):
            for name, v in norms.items():
                for col, x in zip(rows, (n, family, name, v)):
                    col.append(x)
    write_csv(out / "residuals3d.csv", ("n", "family", "equation", "sup"), rows)
    return f"3D residuals for {cfg.check3d.preset} on levels {list(cfg.check3d.levels)}"


def _threads() -> int:
    raw = os.environ.get("EP_ANNULUS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"EP_ANNULUS_THREADS={raw!r} is not an integer") from None


def cmd_sweep(cfg: RunConfig, out: Path) -> str:
    bg = _background(cfg)

    def run(item):
        i, eps = item
        report = fixed_point_solve(bg, cfg.boundary.with_eps(eps), cfg.solver)
        write_solve_outputs(report, bg, out / f"case_{i:02d}", cfg.gnuplot)
        return report

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = list(pool.map(run, enumerate(cfg.sweep_eps)))
    eps = np.array(cfg.sweep_eps)
    sup = np.array([r.field.sup_norm() for r in reports])
    scaled = sup / eps
    write_csv(out / "linearity.csv",
              ("case", "eps", "sup_norm", "sup_over_eps", "linearity_ratio", "iterations", "contraction_ratio"),
              (np.arange(len(eps)), eps, sup, scaled, scaled / scaled[0],
               [r.iterations for r in reports], [r.contraction_ratio for r in reports]))
    return "linearity ratios: " + ", ".join(f"{x:.4f}" for x in scaled / scaled[0])


HANDLERS = {
    "background": cmd_background,
    "sonic": cmd_sonic,
    "solve": cmd_solve,
    "check3d": cmd_check3d,
    "residual": cmd_residual,
    "sweep": cmd_sweep,
}


def dispatch(command: str, config: RunConfig, out: Optional[Path] = None) -> int:
    """Run one command; returns the process exit code."""
    out = Path(out) if out is not None else config.out_dir
    try:
        if command not in HANDLERS:
            raise ConfigError(f"unknown command {command!r}")
        out.mkdir(parents=True, exist_ok=True)
        print(HANDLERS[command](config, out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="ep-annulus", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="TOML run file")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default from config)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
