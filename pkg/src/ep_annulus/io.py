"""Run configuration (TOML) and CSV output."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import tomli
import tomli_w

from .background import BackgroundProfile, Invalid, InletData, classify_inlet, mach_profile
from .boundary import BoundaryPerturbation
from .errors import ConfigError
from .grid import Grid2D
from .iteration import SolveOptions

DEFAULT_N_NODES = 2049
DEFAULT_SWEEP = (1e-3, 5e-4)
SECTIONS = ("inlet", "grid", "boundary", "solver", "check3d", "output")
INLET_KEYS = ("gamma", "rho0", "u10", "u20", "a0", "e0", "b0", "r0", "r1")


@dataclass(frozen=True)
class Check3DSpec:
    preset: str = "swirl_shear"
    levels: tuple[int, ...] = (17, 33)
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    inlet: InletData
    grid: Grid2D
    boundary: BoundaryPerturbation
    solver: SolveOptions = SolveOptions()
    n_nodes: int = DEFAULT_N_NODES
    sweep_eps: tuple[float, ...] = DEFAULT_SWEEP
    check3d: Check3DSpec = Check3DSpec()
    out_dir: Path = Path("out")
    gnuplot: bool = False

    def to_dict(self) -> dict[str, Any]:
        solver: dict[str, Any] = {
            "tol": self.solver.tol,
            "max_iter": self.solver.max_iter,
            "method": self.solver.method,
            "sweep_eps": list(self.sweep_eps),
        }
        if self.solver.delta_guard is not None:
            solver["delta_guard"] = self.solver.delta_guard
        return {
            "inlet": {k: getattr(self.inlet, k) for k in INLET_KEYS},
            "grid": {"nr": self.grid.nr, "nz": self.grid.nz, "n_nodes": self.n_nodes},
            "boundary": self.boundary.to_dict(),
            "solver": solver,
            "check3d": {
                "preset": self.check3d.preset,
                "levels": list(self.check3d.levels),
                "params": dict(self.check3d.params),
            },
            "output": {"dir": str(self.out_dir), "gnuplot": self.gnuplot},
        }


def _take(section: dict, key: str, kind, where: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{where}] missing key {key!r}")
        return default
    value = section[key]
    try:
        if kind is float and isinstance(value, bool):
            raise TypeError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"[{where}] {key} = {value!r} is not a valid {kind.__name__}") from None


def _check_keys(section: dict, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"[{where}] unknown keys: {', '.join(unknown)}")


def config_from_dict(doc: dict[str, Any], base_dir: Optional[Path] = None) -> RunConfig:
    _check_keys(doc, SECTIONS, "top level")
    for required in ("inlet", "grid"):
        if required not in doc:
            raise ConfigError(f"missing section [{required}]")

    sec = doc["inlet"]
    _check_keys(sec, INLET_KEYS, "inlet")
    vals = {k: _take(sec, k, float, "inlet") for k in INLET_KEYS[:7]}
    vals["r0"] = _take(sec, "r0", float, "inlet", 1.0)
    vals["r1"] = _take(sec, "r1", float, "inlet", 2.0)
    inlet = InletData(**vals)
    regime = classify_inlet(inlet)
    if isinstance(regime, Invalid):
        raise ConfigError(f"[inlet] invalid inlet: {regime.reason}")

    sec = doc["grid"]
    _check_keys(sec, ("nr", "nz", "n_nodes"), "grid")
    try:
        grid = Grid2D(_take(sec, "nr", int, "grid"), _take(sec, "nz", int, "grid"), inlet.r0, inlet.r1)
    except ValueError as exc:
        raise ConfigError(f"[grid] {exc}") from None
    n_nodes = _take(sec, "n_nodes", int, "grid", DEFAULT_N_NODES)
    if n_nodes < 16:
        raise ConfigError("[grid] n_nodes must be at least 16")

    try:
        boundary = BoundaryPerturbation.from_dict(doc.get("boundary", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"[boundary] {exc}") from None
    boundary.check_compatibility()

    sec = doc.get("solver", {})
    _check_keys(sec, ("tol", "max_iter", "delta_guard", "method", "sweep_eps"), "solver")
    method = str(sec.get("method", "lu"))
    if method not in ("lu", "bicgstab"):
        raise ConfigError(f"[solver] unknown method {method!r}")
    guard = sec.get("delta_guard")
    try:
        solver = SolveOptions(
            tol=_take(sec, "tol", float, "solver", 1e-10),
            max_iter=_take(sec, "max_iter", int, "solver", 100),
            delta_guard=None if guard is None else float(guard),
            grid=None,
            method=method,
        )
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None
    sweep = tuple(float(e) for e in sec.get("sweep_eps", DEFAULT_SWEEP))
    if not sweep:
        raise ConfigError("[solver] sweep_eps must not be empty")

    sec = doc.get("check3d", {})
    _check_keys(sec, ("preset", "levels", "params"), "check3d")
    check3d = Check3DSpec(
        preset=str(sec.get("preset", "swirl_shear")),
        levels=tuple(int(n) for n in sec.get("levels", (17, 33))),
        params=dict(sec.get("params", {})),
    )

    sec = doc.get("output", {})
    _check_keys(sec, ("dir", "gnuplot"), "output")
    out_dir = Path(sec.get("dir", "out"))
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    return RunConfig(inlet, grid, boundary, solver, n_nodes, sweep, check3d, out_dir, bool(sec.get("gnuplot", False)))


def load_config(path) -> RunConfig:
    """Parse a TOML run file; syntax errors carry the line number reported by the parser."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc)


def dump_config(cfg: RunConfig) -> str:
    """Canonical TOML text: fixed section and key order, every default spelled out."""
    return tomli_w.dumps(cfg.to_dict())


# -- CSV -----------------------------------------------------------------------------------


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: Sequence[str], columns: Sequence[Sequence]) -> Path:
    """One column per header entry; numbers at 17 significant digits, strings verbatim."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [list(c) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in (c[i] for c in cols)))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_profile_csv(profile: BackgroundProfile, path) -> Path:
    mach = mach_profile(profile)
    return write_csv(
        path,
        ("r", "rho", "u1", "u2", "E", "Phi", "M1sq", "M2sq"),
        (profile.r_nodes, profile.rho, profile.u1, profile.u2, profile.e_field, profile.phi, mach.m1_sq, mach.m2_sq),
    )


def read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]) if len(lines) > 1 else np.empty((0, len(header)))
    return header, data
