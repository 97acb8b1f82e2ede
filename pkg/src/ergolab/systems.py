"""Registry of named dynamical systems and measurable regions.

Each registry entry can build the representations it supports: a separable
Hamiltonian, a vector field (with analytic divergence and Jacobian where the
closed forms are known), or a point map.  Regions back the recurrence and
volume experiments: boxes, disks, annuli and half-spaces, all exposed as
vectorised indicators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .boxes import Box
from .fields import PointMap, VectorField
from .hamiltonians import SeparableHamiltonian, harmonic_oscillator, pendulum


def harmonic_field(m: float = 1.0, omega: float = 1.0) -> VectorField:
    """Oscillator phase flow (q, p) -> (p/m, -m omega^2 q) with analytic derivatives."""
    if m <= 0 or omega <= 0:
        raise ValueError(f"need m > 0 and omega > 0, got m={m}, omega={omega}")
    k = m * omega**2
    jac = np.array([[0.0, 1.0 / m], [-k, 0.0]])
    return VectorField(
        dim=2,
        eval=lambda z: np.stack([z[..., 1] / m, -k * z[..., 0]], axis=-1),
        divergence_analytic=lambda z: 0.0,
        jacobian_analytic=lambda z: jac,
    )


def pendulum_field(g_over_L: float = 1.0) -> VectorField:
    """Pendulum phase flow (theta, p) -> (p, -(g/L) sin theta)."""
    if g_over_L <= 0:
        raise ValueError(f"need g/L > 0, got {g_over_L}")

    def jac(z):
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape[:-1] + (2, 2))
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = -g_over_L * np.cos(z[..., 0])
        return out

    return VectorField(
        dim=2,
        eval=lambda z: np.stack([z[..., 1], -g_over_L * np.sin(z[..., 0])], axis=-1),
        divergence_analytic=lambda z: 0.0,
        jacobian_analytic=jac,
    )


def damped_oscillator_field(gamma: float = 0.5) -> VectorField:
    """Damped oscillator (q, p) -> (p, -q - gamma p); constant divergence -gamma."""
    if gamma < 0:
        raise ValueError(f"damping must be non-negative, got {gamma}")
    jac = np.array([[0.0, 1.0], [-1.0, -gamma]])
    return VectorField(
        dim=2,
        eval=lambda z: np.stack([z[..., 1], -z[..., 0] - gamma * z[..., 1]], axis=-1),
        divergence_analytic=lambda z: -gamma,
        jacobian_analytic=lambda z: jac,
    )


def rotation_map(alpha: float = 0.3) -> PointMap:
    """Circle rotation x -> x + alpha mod 1 on [0, 1)."""
    return PointMap(dim=1, eval=lambda x: np.mod(x + alpha, 1.0))


def doubling_map() -> PointMap:
    """Doubling map x -> 2x mod 1 on [0, 1)."""
    return PointMap(dim=1, eval=lambda x: np.mod(2.0 * x, 1.0))


def contraction_map(factor: float = 0.5) -> PointMap:
    """Contraction x -> factor * x; does not preserve the measure."""
    if not 0 < factor < 1:
        raise ValueError(f"contraction factor must be in (0, 1), got {factor}")
    return PointMap(dim=1, eval=lambda x: factor * x)


def polynomial_field(dim: int, components) -> VectorField:
    """Vector field with polynomial components and exact derivatives.

    ``components`` has one entry per output coordinate; each entry is a list
    of terms ``[c, k_1, ..., k_d]`` meaning c * x_1^k_1 * ... * x_d^k_d.
    Divergence and Jacobian are obtained by differentiating the term lists.
    """
    if dim < 1:
        raise ValueError(f"dimension must be at least 1, got {dim}")
    if len(components) != dim:
        raise ValueError(f"need {dim} component term lists, got {len(components)}")
    terms = []
    for i, comp in enumerate(components):
        parsed = []
        for term in comp:
            if len(term) != dim + 1:
                raise ValueError(
                    f"component {i} term {term} must be [coefficient, {dim} exponents]"
                )
            coeff = float(term[0])
            exponents = np.asarray(term[1:], dtype=float)
            if np.any(exponents < 0) or np.any(exponents != np.round(exponents)):
                raise ValueError(f"exponents must be non-negative integers, got {term[1:]}")
            parsed.append((coeff, exponents))
        terms.append(parsed)

    def eval_component(parsed, x):
        total = np.zeros(np.asarray(x).shape[:-1])
        for coeff, exponents in parsed:
            total = total + coeff * np.prod(np.asarray(x) ** exponents, axis=-1)
        return total

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.stack([eval_component(t, x) for t in terms], axis=-1)

    def partial(parsed, j):
        # d/dx_j of c * prod x^k  ->  (c k_j) * x^(k - e_j)
        out = []
        for coeff, exponents in parsed:
            if exponents[j] > 0:
                reduced = exponents.copy()
                reduced[j] -= 1
                out.append((coeff * exponents[j], reduced))
        return out

    partials = [[partial(terms[i], j) for j in range(dim)] for i in range(dim)]

    def jacobian_fn(x):
        x = np.asarray(x, dtype=float)
        rows = [
            np.stack([eval_component(partials[i][j], x) for j in range(dim)], axis=-1)
            for i in range(dim)
        ]
        return np.stack(rows, axis=-2)

    def divergence_fn(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for i in range(dim):
            total = total + eval_component(partials[i][i], x)
        return total

    return VectorField(
        dim=dim, eval=evaluate, divergence_analytic=divergence_fn, jacobian_analytic=jacobian_fn
    )


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: Optional[float]
    doc: str
    validate: Callable[[float], bool]
    requirement: str


def positive(name: str, default: Optional[float], doc: str) -> ParamSpec:
    return ParamSpec(name, default, doc, lambda v: v > 0, "> 0")


def non_negative(name: str, default: Optional[float], doc: str) -> ParamSpec:
    return ParamSpec(name, default, doc, lambda v: v >= 0, ">= 0")


def open_unit(name: str, default: Optional[float], doc: str) -> ParamSpec:
    return ParamSpec(name, default, doc, lambda v: 0 < v < 1, "in (0, 1)")


def any_real(name: str, default: Optional[float], doc: str) -> ParamSpec:
    return ParamSpec(name, default, doc, lambda v: np.isfinite(v), "finite")


@dataclass(frozen=True)
class SystemSpec:
    """A named system and the representations it can build."""

    key: str
    kind: str  # "hamiltonian" | "field" | "map"
    summary: str
    params: tuple[ParamSpec, ...]
    build_hamiltonian: Optional[Callable[..., SeparableHamiltonian]] = None
    build_field: Optional[Callable[..., VectorField]] = None
    build_map: Optional[Callable[..., PointMap]] = None

    def param_names(self) -> set[str]:
        return {p.name for p in self.params}

    def resolve_params(self, values: dict) -> dict:
        out = {}
        for spec in self.params:
            if spec.name in values:
                value = values[spec.name]
            elif spec.default is not None:
                value = spec.default
            else:
                raise ValueError(f"system {self.key!r} needs parameter {spec.name!r}")
            if spec.name == "components":
                out[spec.name] = value
                continue
            value = float(value)
            if not spec.validate(value):
                raise ValueError(
                    f"parameter {spec.name!r} of system {self.key!r} must be {spec.requirement}, got {value}"
                )
            out[spec.name] = value
        return out


def _custom_polynomial_build(dim, components):
    return polynomial_field(int(dim), components)


_COMPONENTS_SPEC = ParamSpec(
    "components",
    None,
    "per-coordinate term lists [c, k_1, ..., k_d]",
    lambda v: True,
    "term lists",
)

REGISTRY: dict[str, SystemSpec] = {
    "harmonic": SystemSpec(
        key="harmonic",
        kind="hamiltonian",
        summary="linear harmonic oscillator, H = p^2/2m + m omega^2 q^2 / 2",
        params=(positive("m", 1.0, "mass"), positive("omega", 1.0, "angular frequency")),
        build_hamiltonian=lambda m, omega: harmonic_oscillator(m, omega),
        build_field=lambda m, omega: harmonic_field(m, omega),
    ),
    "pendulum": SystemSpec(
        key="pendulum",
        kind="hamiltonian",
        summary="planar pendulum, H = p^2/2 + (g/L)(1 - cos theta)",
        params=(positive("g_over_L", 1.0, "gravity over length"),),
        build_hamiltonian=lambda g_over_L: pendulum(g_over_L),
        build_field=lambda g_over_L: pendulum_field(g_over_L),
    ),
    "damped": SystemSpec(
        key="damped",
        kind="field",
        summary="damped oscillator (q, p) -> (p, -q - gamma p), divergence -gamma",
        params=(non_negative("gamma", 0.5, "damping coefficient"),),
        build_field=lambda gamma: damped_oscillator_field(gamma),
    ),
    "rotation": SystemSpec(
        key="rotation",
        kind="map",
        summary="circle rotation x -> x + alpha mod 1",
        params=(any_real("alpha", 0.3, "rotation amount"),),
        build_map=lambda alpha: rotation_map(alpha),
    ),
    "doubling": SystemSpec(
        key="doubling",
        kind="map",
        summary="doubling map x -> 2x mod 1",
        params=(),
        build_map=lambda: doubling_map(),
    ),
    "contraction": SystemSpec(
        key="contraction",
        kind="map",
        summary="contraction x -> factor x; control case, not measure preserving",
        params=(open_unit("factor", 0.5, "contraction factor"),),
        build_map=lambda factor: contraction_map(factor),
    ),
    "custom-polynomial": SystemSpec(
        key="custom-polynomial",
        kind="field",
        summary="vector field with polynomial components and exact derivatives",
        params=(positive("dim", None, "state dimension"), _COMPONENTS_SPEC),
        build_field=_custom_polynomial_build,
    ),
}


@dataclass(frozen=True)
class Region:
    """Measurable region exposed as a vectorised indicator."""

    description: str
    indicator: Callable[[np.ndarray], np.ndarray]

    def __call__(self, points):
        return self.indicator(points)


def region_from_config(config: dict) -> Region:
    """Build a region from a JSON-style description.

    Supported types: ``interval`` (lo, hi), ``box`` (bounds), ``disk``
    (center, radius), ``annulus`` (center, r_inner, r_outer), ``halfspace``
    (axis, threshold; the side x_axis < threshold).
    """
    if not isinstance(config, dict) or "type" not in config:
        raise ValueError(f"region needs a 'type' key, got {config!r}")
    kind = config["type"]
    keys = set(config) - {"type"}

    if kind == "interval":
        _expect_keys(keys, {"lo", "hi"}, kind)
        box = Box.from_bounds([(config["lo"], config["hi"])])
        return Region(f"interval [{config['lo']:g}, {config['hi']:g})", box.contains)
    if kind == "box":
        _expect_keys(keys, {"bounds"}, kind)
        box = Box.from_bounds([tuple(b) for b in config["bounds"]])
        return Region(repr(box), box.contains)
    if kind == "disk":
        _expect_keys(keys, {"center", "radius"}, kind)
        center = np.asarray(config["center"], dtype=float)
        radius = float(config["radius"])
        if radius <= 0:
            raise ValueError(f"disk radius must be positive, got {radius}")
        return Region(
            f"disk(center={center.tolist()}, radius={radius:g})",
            lambda pts: np.sum((np.asarray(pts) - center) ** 2, axis=-1) < radius**2,
        )
    if kind == "annulus":
        _expect_keys(keys, {"center", "r_inner", "r_outer"}, kind)
        center = np.asarray(config["center"], dtype=float)
        r_in, r_out = float(config["r_inner"]), float(config["r_outer"])
        if not 0 <= r_in < r_out:
            raise ValueError(f"annulus needs 0 <= r_inner < r_outer, got {r_in}, {r_out}")
        def annulus(pts):
            r2 = np.sum((np.asarray(pts) - center) ** 2, axis=-1)
            return (r2 >= r_in**2) & (r2 < r_out**2)
        return Region(
            f"annulus(center={center.tolist()}, r=[{r_in:g}, {r_out:g}))", annulus
        )
    if kind == "halfspace":
        _expect_keys(keys, {"axis", "threshold"}, kind)
        axis = int(config["axis"])
        threshold = float(config["threshold"])
        return Region(
            f"halfspace(x_{axis} < {threshold:g})",
            lambda pts: np.asarray(pts)[..., axis] < threshold,
        )
    raise ValueError(f"unknown region type {kind!r}")


def _expect_keys(got: set, expected: set, kind: str):
    if got != expected:
        raise ValueError(f"region {kind!r} takes keys {sorted(expected)}, got {sorted(got)}")
