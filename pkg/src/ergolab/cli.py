"""Command-line front end: JSON experiment configs in, CSV/SVG/manifest out.

Usage: ``ergolab <experiment> --config file.json [--seed N] [--output STEM]
[--check]`` where the experiment is one of portrait, simulate, liouville,
recurrence, volume, invariance; ``ergolab list-systems [--json]`` prints the
registry.  Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 check failure; every failure writes a one-line JSON diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .boxes import Box
from .hamiltonians import energy, phase_portrait, wrap_angle
from .integrators import NonFiniteStateError, integrate
from .liouville import det_comparison_profile
from .montecarlo import estimate_volume_mc, invariance_by_integrals
from .recurrence import recurrence_experiment_flow, recurrence_experiment_map
from .report import ARTIFACT_VERSION, render_portrait_svg, write_csv, write_manifest
from .systems import REGISTRY, region_from_config

EXPERIMENTS = ("portrait", "simulate", "liouville", "recurrence", "volume", "invariance")


class ConfigError(ValueError):
    """Configuration failed validation."""


_REQUIRED = object()


class ParamReader:
    """Pulls typed values out of the flat parameter map, tracking what was used."""

    def __init__(self, params: dict, system_keys: set[str] = frozenset()):
        if not isinstance(params, dict):
            raise ConfigError(f"'parameters' must be an object, got {type(params).__name__}")
        self.params = params
        self.consumed: dict = {}
        self.system_keys = set(system_keys)

    def _raw(self, name, default):
        if name in self.params:
            return self.params[name]
        if default is _REQUIRED:
            raise ConfigError(f"missing required parameter {name!r}")
        return default

    def number(self, name, default=_REQUIRED, *, minimum=None, positive=False, integer=False):
        value = self._raw(name, default)
        if value is None:
            self.consumed[name] = None
            return None
        try:
            value = int(value) if integer else float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {name!r} must be a number, got {value!r}") from None
        if integer and not float(self.params.get(name, value)).is_integer():
            raise ConfigError(f"parameter {name!r} must be an integer, got {self.params[name]!r}")
        if positive and not value > 0:
            raise ConfigError(f"parameter {name!r} must be positive, got {value}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"parameter {name!r} must be >= {minimum}, got {value}")
        self.consumed[name] = value
        return value

    def choice(self, name, options, default=_REQUIRED):
        value = self._raw(name, default)
        if value not in options:
            raise ConfigError(f"parameter {name!r} must be one of {sorted(options)}, got {value!r}")
        self.consumed[name] = value
        return value

    def vector(self, name, default=_REQUIRED):
        value = self._raw(name, default)
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {name!r} must be a list of numbers") from None
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
            raise ConfigError(f"parameter {name!r} must be a nonempty list of finite numbers")
        self.consumed[name] = [float(v) for v in arr]
        return arr

    def obj(self, name, default=_REQUIRED):
        value = self._raw(name, default)
        self.consumed[name] = value
        return value

    def domain_box(self, name="domain") -> Box:
        bounds = self.obj(name)
        try:
            return Box.from_bounds([tuple(map(float, b)) for b in bounds])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {name!r} is not a valid list of [lo, hi] bounds: {exc}") from None

    def finish(self):
        unknown = set(self.params) - set(self.consumed) - self.system_keys
        if unknown:
            raise ConfigError(f"unknown parameters: {sorted(unknown)}")

    def echo(self, system_values: dict | None = None) -> dict:
        merged = dict(self.consumed)
        if system_values:
            merged.update(system_values)
        return merged


def _system_spec(config, experiment, kinds):
    key = config.get("system")
    if key is None:
        raise ConfigError(f"experiment {experiment!r} needs a 'system' entry")
    if key not in REGISTRY:
        raise ConfigError(f"unknown system {key!r}; see `ergolab list-systems`")
    spec = REGISTRY[key]
    if spec.kind not in kinds:
        raise ConfigError(
            f"experiment {experiment!r} needs a system of kind {sorted(kinds)}, "
            f"but {key!r} is a {spec.kind}"
        )
    return spec


def _resolve_system(spec, reader: ParamReader):
    try:
        values = spec.resolve_params(reader.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    reader.system_keys |= spec.param_names()
    return values


class _Checks:
    """Collects threshold violations so outputs and manifest still get written."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.failures: list[str] = []

    def expect(self, ok: bool, detail: str):
        if self.enabled and not ok:
            self.failures.append(detail)


# ---------------------------------------------------------------- portrait

def run_portrait(config, stem, check):
    spec = _system_spec(config, "portrait", {"hamiltonian"})
    reader = ParamReader(config.get("parameters", {}))
    sys_values = _resolve_system(spec, reader)
    levels = reader.vector("energy_levels")
    if np.any(levels <= 0):
        raise ConfigError("energy_levels must all be positive")
    t_final = reader.number("t_final", 20.0, positive=True)
    dt = reader.number("dt", 1e-3, positive=True)
    scheme = reader.choice("scheme", ("rk4", "symplectic_euler", "leapfrog"), "rk4")
    tolerance = reader.number("tolerance", 1e-4, positive=True)
    reader.finish()

    hamiltonian = spec.build_hamiltonian(**sys_values)
    ics, labels, level_of = [], [], []
    for e_level in levels:
        if spec.key == "harmonic":
            m, omega = sys_values["m"], sys_values["omega"]
            ics.append(np.array([math.sqrt(2.0 * e_level / (m * omega**2)), 0.0]))
            labels.append(f"E={e_level:g}")
            level_of.append(e_level)
        else:
            for sign in (1.0, -1.0):
                ics.append(np.array([0.0, sign * math.sqrt(2.0 * e_level)]))
                labels.append(f"E={e_level:g}" + ("" if sign > 0 else " (reverse)"))
                level_of.append(e_level)

    portrait = phase_portrait(hamiltonian, ics, t_final, dt, scheme)
    if not portrait.orbits:
        raise NonFiniteStateError("every orbit of the portrait failed to integrate")
    for index, message in portrait.failures:
        print(json.dumps({"warning": "orbit_failed", "orbit": index, "detail": message}),
              file=sys.stderr)

    rows = []
    for trace in portrait.orbits:
        energies = energy(hamiltonian, np.column_stack([trace.q, trace.p]))
        wrapped = trace.q_wrapped
        for k in range(trace.times.size):
            rows.append((trace.index, level_of[trace.index], trace.times[k],
                         trace.q[k], wrapped[k], trace.p[k], energies[k]))
    csv_path = stem + ".csv"
    write_csv(csv_path, ["orbit_index", "energy", "t", "q", "q_wrapped", "p", "H"], rows)
    svg_path = stem + ".svg"
    render_portrait_svg(
        svg_path,
        portrait.orbits,
        [labels[trace.index] for trace in portrait.orbits],
        title=hamiltonian.label,
        wrap=(spec.key == "pendulum"),
        equal_aspect=(spec.key == "harmonic"),
    )

    if check.enabled:
        worst = 0.0
        for trace in portrait.orbits:
            e_level = level_of[trace.index]
            if spec.key == "harmonic":
                m, omega = sys_values["m"], sys_values["omega"]
                residual = trace.p**2 / (2.0 * m * e_level) + trace.q**2 * (m * omega**2) / (2.0 * e_level) - 1.0
            else:
                residual = (energy(hamiltonian, np.column_stack([trace.q, trace.p])) - e_level) / max(e_level, 1.0)
            worst = max(worst, float(np.max(np.abs(residual))))
        check.expect(worst <= tolerance,
                     f"portrait level-set residual {worst:g} exceeds tolerance {tolerance:g}")

    echo = {"experiment": "portrait", "system": spec.key,
            "parameters": reader.echo(sys_values), "output": stem}
    return echo, [csv_path, svg_path]


# ---------------------------------------------------------------- simulate

def run_simulate(config, stem, check):
    spec = _system_spec(config, "simulate", {"hamiltonian", "field"})
    reader = ParamReader(config.get("parameters", {}))
    sys_values = _resolve_system(spec, reader)
    t_final = reader.number("t_final", positive=True)
    dt = reader.number("dt", positive=True)
    if dt > t_final:
        raise ConfigError(f"dt={dt} must not exceed t_final={t_final}")

    if spec.kind == "hamiltonian":
        scheme = reader.choice("scheme", ("rk4", "symplectic_euler", "leapfrog"), "rk4")
        q0 = reader.vector("q0")
        p0 = reader.vector("p0")
        if q0.size != p0.size:
            raise ConfigError("q0 and p0 must have the same length")
        max_drift = reader.number("max_energy_drift", None, positive=True)
        reader.finish()
        system = spec.build_hamiltonian(**sys_values)
        z0 = np.concatenate([q0, p0])
    else:
        scheme = reader.choice("scheme", ("rk4",), "rk4")
        z0 = reader.vector("x0")
        max_drift = None
        reader.finish()
        system = spec.build_field(**sys_values)
        if z0.size != system.dim:
            raise ConfigError(f"x0 has dimension {z0.size}, the field expects {system.dim}")

    trajectory = integrate(system, z0, t_final, dt, scheme)

    if spec.kind == "hamiltonian":
        n = system.n
        energies = energy(system, trajectory.states)
        header = (["t"] + [f"q{j + 1}" for j in range(n)] + [f"p{j + 1}" for j in range(n)] + ["H"])
        rows = [
            (trajectory.times[k], *trajectory.states[k], energies[k])
            for k in range(trajectory.times.size)
        ]
    else:
        header = ["t"] + [f"x{j + 1}" for j in range(system.dim)]
        rows = [(trajectory.times[k], *trajectory.states[k]) for k in range(trajectory.times.size)]
    csv_path = stem + ".csv"
    write_csv(csv_path, header, rows)

    if check.enabled and max_drift is not None:
        drift = float(np.max(np.abs(energies - energies[0])))
        check.expect(drift <= max_drift,
                     f"energy drift {drift:g} exceeds max_energy_drift {max_drift:g}")

    echo = {"experiment": "simulate", "system": spec.key,
            "parameters": reader.echo(sys_values), "output": stem}
    return echo, [csv_path]


# ---------------------------------------------------------------- liouville

def run_liouville(config, stem, check):
    spec = _system_spec(config, "liouville", {"hamiltonian", "field"})
    reader = ParamReader(config.get("parameters", {}))
    sys_values = _resolve_system(spec, reader)
    x0 = reader.vector("x0")
    times = reader.vector("times")
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ConfigError("times must be positive and strictly increasing")
    dt = reader.number("dt", 1e-3, positive=True)
    tolerance = reader.number("tolerance", 1e-4, positive=True)
    reader.finish()

    field = spec.build_field(**sys_values)
    if x0.size != field.dim:
        raise ConfigError(f"x0 has dimension {x0.size}, the field expects {field.dim}")
    profile = det_comparison_profile(field, x0, list(times), dt)

    if spec.key == "damped":
        reference = [math.exp(-sys_values["gamma"] * t) for t in times]
    elif spec.key in ("harmonic", "pendulum"):
        reference = [1.0] * len(times)
    else:
        reference = [None] * len(times)

    rows = [
        (rec.t, rec.det_variational, rec.det_liouville, ref)
        for rec, ref in zip(profile, reference)
    ]
    csv_path = stem + ".csv"
    write_csv(csv_path, ["t", "det_variational", "det_liouville", "reference"], rows)

    for rec, ref in zip(profile, reference):
        gap = abs(rec.det_variational - rec.det_liouville)
        check.expect(gap <= tolerance,
                     f"determinant routes disagree by {gap:g} at t={rec.t:g} (tolerance {tolerance:g})")
        if ref is not None:
            err = max(abs(rec.det_variational - ref), abs(rec.det_liouville - ref))
            check.expect(err <= tolerance,
                         f"determinant misses reference by {err:g} at t={rec.t:g} (tolerance {tolerance:g})")

    echo = {"experiment": "liouville", "system": spec.key,
            "parameters": reader.echo(sys_values), "output": stem}
    return echo, [csv_path]


# ---------------------------------------------------------------- recurrence

def run_recurrence(config, stem, check):
    spec = _system_spec(config, "recurrence", {"map", "hamiltonian", "field"})
    reader = ParamReader(config.get("parameters", {}))
    sys_values = _resolve_system(spec, reader)
    region = _region(reader.obj("set"))
    domain = reader.domain_box()
    n_points = reader.number("n_points", 500, integer=True, minimum=1)
    seed = reader.number("seed", 0, integer=True, minimum=0)
    min_frac = reader.number("min_returning_fraction", None, minimum=0.0)
    max_frac = reader.number("max_returning_fraction", None, minimum=0.0)

    if spec.kind == "map":
        horizon = reader.number("horizon", integer=True, minimum=1)
        reader.finish()
        system = spec.build_map(**sys_values)
        report = recurrence_experiment_map(system, region, domain, n_points, horizon, seed)
    else:
        t_horizon = reader.number("t_horizon", positive=True)
        dt = reader.number("dt", positive=True)
        if dt > t_horizon:
            raise ConfigError(f"dt={dt} must not exceed t_horizon={t_horizon}")
        reader.finish()
        system = spec.build_field(**sys_values)
        report = recurrence_experiment_flow(system, region, domain, n_points, t_horizon, dt, seed)

    d = domain.dim
    header = (["point_index"] + [f"start_{j + 1}" for j in range(d)]
              + ["first_return", "return_count"])
    rows = [
        (i, *record.start, record.first_return, record.return_count)
        for i, record in enumerate(report.records)
    ]
    csv_path = stem + ".csv"
    write_csv(csv_path, header, rows)
    print(f"returning_fraction={report.returning_fraction:.6f} "
          f"mean_first_return={report.mean_first_return} "
          f"set_measure_estimate={report.set_measure_estimate:.6g}")

    if min_frac is not None:
        check.expect(report.returning_fraction >= min_frac,
                     f"returning fraction {report.returning_fraction:g} below {min_frac:g}")
    if max_frac is not None:
        check.expect(report.returning_fraction <= max_frac,
                     f"returning fraction {report.returning_fraction:g} above {max_frac:g}")

    echo = {"experiment": "recurrence", "system": spec.key,
            "parameters": reader.echo(sys_values), "output": stem}
    return echo, [csv_path]


# ---------------------------------------------------------------- volume

def run_volume(config, stem, check):
    if config.get("system") is not None:
        raise ConfigError("the volume experiment takes no 'system'; the region defines the set")
    reader = ParamReader(config.get("parameters", {}))
    region = _region(reader.obj("region"))
    domain = reader.domain_box()
    n = reader.number("n", integer=True, minimum=1)
    seed = reader.number("seed", 0, integer=True, minimum=0)
    workers = reader.number("workers", 1, integer=True, minimum=1)
    reference = reader.number("reference", None)
    k_sigma = reader.number("k_sigma", 4.0, positive=True)
    reader.finish()
    if check.enabled and reference is None:
        raise ConfigError("--check for the volume experiment needs a 'reference' parameter")

    estimate = estimate_volume_mc(region, domain, n, seed, workers=workers)
    csv_path = stem + ".csv"
    write_csv(
        csv_path,
        ["estimate", "standard_error", "n_samples", "seed", "reference"],
        [(estimate.estimate, estimate.standard_error, estimate.n_samples, estimate.seed, reference)],
    )

    if reference is not None:
        gap = abs(estimate.estimate - reference)
        check.expect(gap <= k_sigma * estimate.standard_error,
                     f"estimate {estimate.estimate:.6g} is {gap:.3g} from reference "
                     f"{reference:.6g}, beyond {k_sigma:g} standard errors")

    echo = {"experiment": "volume", "parameters": reader.echo(), "output": stem}
    return echo, [csv_path]


# ---------------------------------------------------------------- invariance

_TEST_FUNCTIONS = ("cos2pi", "power", "indicator", "coordinate")


def _build_test_function(cfg):
    if not isinstance(cfg, dict) or cfg.get("type") not in _TEST_FUNCTIONS:
        raise ConfigError(
            f"test function must be an object with 'type' in {_TEST_FUNCTIONS}, got {cfg!r}"
        )
    kind = cfg["type"]
    keys = set(cfg) - {"type"}
    if kind == "cos2pi":
        if keys:
            raise ConfigError(f"test function 'cos2pi' takes no extra keys, got {sorted(keys)}")
        fn = lambda x: np.cos(2.0 * np.pi * np.asarray(x)[..., 0])  # noqa: E731
        fn.__name__ = "cos2pi"
        return fn
    if kind == "power":
        if keys != {"exponent"}:
            raise ConfigError("test function 'power' takes exactly the key 'exponent'")
        k = float(cfg["exponent"])
        fn = lambda x: np.asarray(x)[..., 0] ** k  # noqa: E731
        fn.__name__ = f"power{k:g}"
        return fn
    if kind == "indicator":
        if keys != {"lo", "hi"}:
            raise ConfigError("test function 'indicator' takes exactly the keys 'lo' and 'hi'")
        lo, hi = float(cfg["lo"]), float(cfg["hi"])
        if lo > hi:
            raise ConfigError(f"indicator needs lo <= hi, got [{lo}, {hi})")
        def fn(x):
            x0 = np.asarray(x)[..., 0]
            return ((x0 >= lo) & (x0 < hi)).astype(float)
        fn.__name__ = f"indicator[{lo:g},{hi:g})"
        return fn
    fn = lambda x: np.asarray(x)[..., 0]  # noqa: E731
    fn.__name__ = "coordinate"
    return fn


def run_invariance(config, stem, check):
    spec = _system_spec(config, "invariance", {"map"})
    reader = ParamReader(config.get("parameters", {}))
    sys_values = _resolve_system(spec, reader)
    tf_configs = reader.obj("test_functions")
    if not isinstance(tf_configs, list) or not tf_configs:
        raise ConfigError("'test_functions' must be a nonempty list")
    domain = reader.domain_box()
    n = reader.number("n", integer=True, minimum=2)
    seed = reader.number("seed", 0, integer=True, minimum=0)
    k_sigma = reader.number("k_sigma", 4.0, positive=True)
    reader.finish()

    functions = [_build_test_function(cfg) for cfg in tf_configs]
    system = spec.build_map(**sys_values)
    report = invariance_by_integrals(system, functions, domain, n, seed, k_sigma)

    rows = [
        (rec.name, rec.lhs_integral, rec.rhs_integral, rec.discrepancy,
         rec.combined_mc_error, rec.discrepancy <= k_sigma * rec.combined_mc_error)
        for rec in report.per_test_function
    ]
    csv_path = stem + ".csv"
    write_csv(
        csv_path,
        ["test_function", "lhs_integral", "rhs_integral", "discrepancy",
         "combined_mc_error", "within_k_sigma"],
        rows,
    )

    failing = [r.name for r in report.per_test_function
               if r.discrepancy > k_sigma * r.combined_mc_error]
    check.expect(report.verdict,
                 f"invariance rejected at {k_sigma:g} sigma for: {', '.join(failing)}")

    echo = {"experiment": "invariance", "system": spec.key,
            "parameters": reader.echo(sys_values), "output": stem}
    return echo, [csv_path]


def _region(cfg):
    try:
        return region_from_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_RUNNERS = {
    "portrait": run_portrait,
    "simulate": run_simulate,
    "liouville": run_liouville,
    "recurrence": run_recurrence,
    "volume": run_volume,
    "invariance": run_invariance,
}


# ---------------------------------------------------------------- plumbing

def load_config(path: str, experiment: str, seed_override, output_override) -> tuple[dict, str]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            config = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(config) - {"experiment", "system", "parameters", "output"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    declared = config.get("experiment", experiment)
    if declared != experiment:
        raise ConfigError(
            f"config declares experiment {declared!r} but {experiment!r} was invoked"
        )
    config.setdefault("parameters", {})
    if seed_override is not None:
        config["parameters"]["seed"] = seed_override
    stem = output_override or config.get("output")
    if not stem:
        raise ConfigError("no output stem: set 'output' in the config or pass --output")
    return config, str(stem)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "validation", "detail": message}), file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ergolab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--output", default=None, help="override the output path stem")
        p.add_argument("--check", action="store_true",
                       help="exit 4 if results violate the configured thresholds")
    lst = sub.add_parser("list-systems", help="print the system registry")
    lst.add_argument("--json", action="store_true", dest="as_json",
                     help="machine-readable registry listing")
    return parser


def list_systems(as_json: bool) -> int:
    if as_json:
        payload = {
            "artifact_version": ARTIFACT_VERSION,
            "systems": [
                {
                    "key": spec.key,
                    "kind": spec.kind,
                    "summary": spec.summary,
                    "parameters": [
                        {"name": p.name, "default": p.default, "requirement": p.requirement,
                         "doc": p.doc}
                        for p in spec.params
                    ],
                }
                for spec in REGISTRY.values()
            ],
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"{'system':<18} {'kind':<12} {'parameters':<34} summary")
    for spec in REGISTRY.values():
        params = ", ".join(
            f"{p.name}={p.default:g}" if isinstance(p.default, float) else p.name
            for p in spec.params
        ) or "-"
        print(f"{spec.key:<18} {spec.kind:<12} {params:<34} {spec.summary}")
    return 0


def _diagnostic(kind: str, detail: str):
    print(json.dumps({"error": kind, "detail": detail}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "list-systems":
        return list_systems(args.as_json)

    started = time.perf_counter()
    checks = _Checks(args.check)
    try:
        config, stem = load_config(args.config, args.command, args.seed, args.output)
        echo, outputs = _RUNNERS[args.command](config, stem, checks)
    except ConfigError as exc:
        _diagnostic("validation", str(exc))
        return 2
    except NonFiniteStateError as exc:
        _diagnostic("numerical", str(exc))
        return 3
    write_manifest(stem, echo, outputs, time.perf_counter() - started)
    if checks.failures:
        _diagnostic("check", "; ".join(checks.failures))
        return 4
    return 0


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
