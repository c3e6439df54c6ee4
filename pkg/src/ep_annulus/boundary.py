"""Analytic boundary profiles and the perturbation data of the axisymmetric problem."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CompatibilityError, ConfigError


class Profile:
    """A smooth function of x3 that also evaluates its derivatives."""

    kind = "abstract"

    def __call__(self, x, nu: int = 0):
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Profile):
    kind = "zero"

    def __call__(self, x, nu: int = 0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class CosPi(Profile):
    """``sum_k coeffs[k] * cos(k pi x3)``."""

    coeffs: tuple[float, ...]
    kind = "cospi"

    def __call__(self, x, nu: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, c in enumerate(self.coeffs):
            w = k * np.pi
            # d^nu/dx^nu cos(w x) = w^nu cos(w x + nu pi / 2)
            out = out + c * w**nu * np.cos(w * x + nu * np.pi / 2)
        return out

    def to_dict(self):
        return {"kind": self.kind, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class SinPi(Profile):
    """``sum_k coeffs[k] * sin(k pi x3)``."""

    coeffs: tuple[float, ...]
    kind = "sinpi"

    def __call__(self, x, nu: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, c in enumerate(self.coeffs):
            w = k * np.pi
            out = out + c * w**nu * np.sin(w * x + nu * np.pi / 2)
        return out

    def to_dict(self):
        return {"kind": self.kind, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Poly(Profile):
    """Polynomial with coefficients in descending powers (``[1, 0]`` is x3)."""

    coeffs: tuple[float, ...]
    kind = "poly"

    def __call__(self, x, nu: int = 0):
        p = np.poly1d(self.coeffs)
        if nu:
            p = p.deriv(nu)
        return p(np.asarray(x, dtype=float)) * np.ones_like(np.asarray(x, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class Table(Profile):
    """Cubic spline through sampled values, clamped slopes at both ends."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    end_slopes: tuple[float, float] = (0.0, 0.0)
    kind = "table"

    def __post_init__(self):
        if len(self.x) != len(self.y) or len(self.x) < 4:
            raise ConfigError("table profile needs matching x and y with at least 4 samples")
        if not np.all(np.diff(self.x) > 0):
            raise ConfigError("table profile x must be strictly increasing")

    @property
    def _spline(self) -> CubicSpline:
        bc = ((1, self.end_slopes[0]), (1, self.end_slopes[1]))
        return CubicSpline(self.x, self.y, bc_type=bc)

    def __call__(self, x, nu: int = 0):
        return self._spline(np.asarray(x, dtype=float), nu)

    def to_dict(self):
        return {
            "kind": self.kind,
            "x": list(self.x),
            "y": list(self.y),
            "end_slopes": list(self.end_slopes),
        }


@dataclass(frozen=True)
class FuncProfile(Profile):
    """Wraps plain callables ``[f, f', f'', ...]``; not serializable."""

    funcs: tuple[Callable, ...]
    kind = "func"

    def __call__(self, x, nu: int = 0):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.funcs[nu](x), dtype=float) * np.ones_like(x)

    def to_dict(self):
        raise ConfigError("callable profiles cannot be serialized")


PRESETS = {"zero": Zero, "cospi": CosPi, "sinpi": SinPi, "poly": Poly, "table": Table}


def profile_from_dict(spec: dict[str, Any]) -> Profile:
    kind = spec.get("kind")
    if kind not in PRESETS:
        raise ConfigError(f"unknown profile preset {kind!r}")
    if kind == "zero":
        return Zero()
    if kind == "table":
        return Table(
            tuple(float(v) for v in spec["x"]),
            tuple(float(v) for v in spec["y"]),
            tuple(float(v) for v in spec.get("end_slopes", (0.0, 0.0))),
        )
    coeffs = spec.get("coeffs")
    if not coeffs:
        raise ConfigError(f"preset {kind!r} needs a non-empty coeffs list")
    return PRESETS[kind](tuple(float(c) for c in coeffs))


@dataclass(frozen=True)
class IonPerturbation:
    """``b_tilde(r, x3) = poly_r(r) * profile(x3)`` with ``poly_r`` in descending powers."""

    profile: Profile = field(default_factory=Zero)
    r_coeffs: tuple[float, ...] = (1.0,)

    def __call__(self, r, z):
        return np.poly1d(self.r_coeffs)(np.asarray(r, dtype=float)) * self.profile(z)

    def to_dict(self):
        d = self.profile.to_dict()
        d["r_coeffs"] = list(self.r_coeffs)
        return d


@dataclass(frozen=True)
class BoundaryPerturbation:
    eps: float
    u2_en: Profile = field(default_factory=Zero)
    u3_en: Profile = field(default_factory=Zero)
    a_en: Profile = field(default_factory=Zero)
    k_en: Profile = field(default_factory=Zero)
    phi_en: Profile = field(default_factory=Zero)
    u1_ex: Profile = field(default_factory=Zero)
    phi_ex: Profile = field(default_factory=Zero)
    b_tilde: IonPerturbation = field(default_factory=IonPerturbation)

    PROFILE_NAMES = ("u2_en", "u3_en", "a_en", "k_en", "phi_en", "u1_ex", "phi_ex")

    def with_eps(self, eps: float) -> "BoundaryPerturbation":
        return replace(self, eps=eps)

    def compatibility_violations(self, tol: float = 1e-10) -> list[str]:
        """Names of the wall conditions that fail, e.g. ``"u3_en(1) != 0"``."""
        failed = []

        def check(name: str, nu: int):
            prof = getattr(self, name)
            for wall in (-1.0, 1.0):
                if abs(float(prof(np.array([wall]), nu)[0])) > tol:
                    tick = "'" * nu
                    failed.append(f"{name}{tick}({wall:+g}) != 0".replace("+1", "1"))

        check("u3_en", 0)
        check("u3_en", 2)
        for name in ("u1_ex", "u2_en", "k_en", "a_en", "phi_en", "phi_ex"):
            check(name, 1)
        return failed

    def check_compatibility(self, tol: float = 1e-10) -> None:
        failed = self.compatibility_violations(tol)
        if failed:
            raise CompatibilityError("compatibility violated: " + ", ".join(failed))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"eps": self.eps}
        for name in self.PROFILE_NAMES:
            d[name] = getattr(self, name).to_dict()
        d["b_tilde"] = self.b_tilde.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BoundaryPerturbation":
        unknown = set(d) - set(cls.PROFILE_NAMES) - {"eps", "b_tilde"}
        if unknown:
            raise ConfigError(f"unknown boundary keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {"eps": float(d.get("eps", 0.0))}
        for name in cls.PROFILE_NAMES:
            if name in d:
                kwargs[name] = profile_from_dict(d[name])
        if "b_tilde" in d:
            spec = dict(d["b_tilde"])
            r_coeffs = tuple(float(c) for c in spec.pop("r_coeffs", (1.0,)))
            kwargs["b_tilde"] = IonPerturbation(profile_from_dict(spec), r_coeffs)
        return cls(**kwargs)


def smooth_test_boundary(eps: float) -> BoundaryPerturbation:
    """A compatible data set touching every boundary input; used by tests and the CLI demo."""
    return BoundaryPerturbation(
        eps=eps,
        u2_en=CosPi((0.0, 1.0)),
        u3_en=SinPi((0.0, 0.0, 1.0)),
        a_en=CosPi((0.0, 0.0, 0.5)),
        k_en=CosPi((0.0, 0.5)),
        phi_en=CosPi((0.0, 0.0, 0.3)),
        u1_ex=CosPi((0.0, 1.0)),
        phi_ex=CosPi((0.0, 0.4)),
        b_tilde=IonPerturbation(CosPi((0.0, 1.0)), (1.0,)),
    )
