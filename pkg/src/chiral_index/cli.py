"""Scenario runner.

Every subcommand reads an optional JSON config, merges ``--param`` overrides,
validates the result against the scenario's schema (unknown keys are
rejected), runs the computation and writes ``report.json`` into ``--out``.

Exit status: 0 when the index is finite, 2 when the report says
``finite = false``, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

from . import cfs as cfs_mod
from . import homotopy as hom
from .index import TruncationPolicy, noether_index
from .pinum import PiRational
from .reports import (
    index_report_dict,
    sweep_report_dict,
    write_json,
    write_singular_values,
    write_sweep_csv,
)
from .spectral import KernelComputationError
from .spiral import (
    MuCoefficients,
    MuPositivityError,
    assemble_spiral_sl,
    build_mu,
    mu_positivity,
    seeded_coefficients,
    spiral_index,
)
from .torus import (
    FourierCutoffError,
    FourierSeries,
    assemble_torus_sl,
    constant_series,
    fourier_coefficients,
    poisson_series,
    torus_index0,
)

EXIT_OK, EXIT_ERROR, EXIT_INFINITE = 0, 1, 2


class ConfigError(ValueError):
    pass


class UsageError(Exception):
    pass


class InputError(OSError):
    pass


# -- parameter validation ---------------------------------------------------

REQUIRED = object()


def _int(name, lo=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name} must be an integer, got {v!r}")
        if lo is not None and v < lo:
            raise ConfigError(f"{name} must be >= {lo}, got {v}")
        return v

    return check


def _real(name, positive=False, nonzero=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{name} must be a finite number, got {v!r}")
        if positive and v <= 0:
            raise ConfigError(f"{name} must be positive, got {v}")
        if nonzero and v == 0:
            raise ConfigError(f"{name} must be nonzero")
        return float(v)

    return check


def _bool(name):
    def check(v):
        if not isinstance(v, bool):
            raise ConfigError(f"{name} must be true or false, got {v!r}")
        return v

    return check


def _pi_value(name):
    def check(v):
        try:
            val = PiRational.parse(v)
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
        if float(val) <= 0:
            raise ConfigError(f"{name} must be positive")
        return val

    return check


def _any(v):
    return v


POLICY_KEYS = {
    "boundary_band": (None, lambda v: v if v is None else _int("boundary_band", 1)(v)),
    "mass_threshold": (0.5, _real("mass_threshold", positive=True)),
    "rel_tol": (1e-10, _real("rel_tol", positive=True)),
}

SCHEMAS: dict[str, dict[str, tuple[Any, Callable]]] = {
    "shift": {
        "p": (REQUIRED, _int("p", 1)),
        "N": (None, lambda v: v if v is None else _int("N", 4)(v)),
        "negate_gamma": (False, _bool("negate_gamma")),
        **POLICY_KEYS,
    },
    "torus": {
        "p": (REQUIRED, _int("p", 1)),
        "K": (40, _int("K", 2)),
        "conformal": ({"poisson": {"r": 0.5}}, _any),
        "stabilize": (True, _bool("stabilize")),
        **POLICY_KEYS,
    },
    "spiral": {
        "p": (REQUIRED, _int("p", 1)),
        "K": (16, _int("K", 2)),
        "nu": (1.0, _real("nu", nonzero=True)),
        "seed": (0, _int("seed", 0)),
        "amplitude": (0.01, _real("amplitude", positive=True)),
        "decay": (0.85, _real("decay", positive=True)),
        "coefficients": (None, _any),
        **POLICY_KEYS,
    },
    "lifetime": {
        "T": (REQUIRED, _pi_value("T")),
        "K": (50, _int("K", 2)),
        **POLICY_KEYS,
    },
    "conformal-homotopy": {
        "path": ("conformal", _any),
        "T": ("pi", _pi_value("T")),
        "K": (32, _int("K", 2)),
        "steps": (9, _int("steps", 3)),
        "from": (None, _any),
        "to": (None, _any),
        "samples": (hom.MIN_SAMPLES, _int("samples", hom.MIN_SAMPLES)),
        **POLICY_KEYS,
    },
    "cfs": {
        "K": (None, lambda v: v if v is None else _int("K", 2)(v)),
        **POLICY_KEYS,
    },
}


def resolve(scenario: str, raw: dict) -> dict:
    """Check ``raw`` against the scenario schema and fill in defaults."""
    if scenario not in SCHEMAS:
        raise UsageError(f"unknown scenario {scenario!r}")
    schema = SCHEMAS[scenario]
    raw = dict(raw)
    named = raw.pop("scenario", scenario)
    if named != scenario and not (scenario == "cfs" and named == "cfs-file"):
        raise ConfigError(f"config is for scenario {named!r}, not {scenario!r}")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {scenario}: {', '.join(unknown)}")
    out = {}
    for key, (default, check) in schema.items():
        if key in raw:
            out[key] = check(raw[key])
        elif default is REQUIRED:
            raise ConfigError(f"missing required key {key!r} for {scenario}")
        else:
            out[key] = default if default is None else check(default)
    return out


def _policy(params: dict, K: int) -> TruncationPolicy:
    try:
        return TruncationPolicy(K, params["boundary_band"], params["mass_threshold"], params["rel_tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _echo(params: dict) -> dict:
    return {k: (str(v) if isinstance(v, PiRational) else v) for k, v in params.items()}


# -- scenarios ---------------------------------------------------------------


class Outcome:
    def __init__(self, doc: dict, finite: bool, index_report=None, sweep=None, matrix=None):
        self.doc, self.finite = doc, finite
        self.index_report, self.sweep, self.matrix = index_report, sweep, matrix


def _cfs_outcome(system: cfs_mod.DiscreteCFS, params: dict, K: int | None) -> Outcome:
    validations = system.validate()
    S_L, S_R = cfs_mod.assemble_chiral(system)
    S = cfs_mod.assemble_signature(system)
    direct = cfs_mod.assemble_right_direct(system)
    policy = _policy(params, K or system.hilbert_dim)
    rep = noether_index(S_L, policy)
    doc = index_report_dict(rep)
    doc["checks"] = {
        "pseudoscalar_valid": all(v.ok for v in validations),
        "violations": [f"point {i}: {msg}" for i, v in enumerate(validations) for msg in v.violations],
        "adjoint_deviation": S_R.max_abs_diff(direct),
        "splitting_deviation": (S_L + S_R).max_abs_diff(S),
    }
    return Outcome(doc, rep.finite, rep, matrix=S_L)


def run_shift(params: dict, args) -> Outcome:
    p = params["p"]
    N = params["N"] or 20 * p
    if args.truncation is not None:
        N = args.truncation
    params["N"] = N
    try:
        system = cfs_mod.build_shift_cfs(p, N)
    except cfs_mod.CFSError as exc:
        raise ConfigError(str(exc)) from exc
    if params["negate_gamma"]:
        system = system.with_negated_gamma()
    return _cfs_outcome(system, params, N)


def _torus_series(conformal: Any, p: int, K: int) -> tuple[FourierSeries, dict]:
    need = 4 * K + p
    if not isinstance(conformal, dict) or len(conformal) != 1:
        raise ConfigError("conformal must be one of {poisson: {r}}, {fourier: {coeffs}}, {samples: [...]}, {constant: {value}}")
    (kind, spec), = conformal.items()
    if kind == "poisson":
        if not isinstance(spec, dict) or set(spec) - {"r"}:
            raise ConfigError("poisson takes exactly the key r")
        r = _real("r")(spec.get("r", 0.5))
        if not 0 <= r < 1:
            raise ConfigError("poisson r must lie in [0, 1)")
        return poisson_series(r, need), {"poisson": {"r": r}}
    if kind == "constant":
        if not isinstance(spec, dict) or set(spec) - {"value"}:
            raise ConfigError("constant takes exactly the key value")
        return constant_series(need, _real("value", positive=True)(spec.get("value", 1.0))), {"constant": spec}
    if kind == "fourier":
        if not isinstance(spec, dict) or set(spec) - {"coeffs"}:
            raise ConfigError("fourier takes exactly the key coeffs")
        coeffs = {}
        for row in spec.get("coeffs", []):
            if not isinstance(row, list) or len(row) not in (2, 3):
                raise ConfigError("fourier coeffs are [k, re] or [k, re, im]")
            k = _int("k")(row[0])
            if abs(k) > need:
                raise ConfigError(f"coefficient index {k} beyond the cutoff {need}")
            coeffs[k] = complex(row[1], row[2] if len(row) == 3 else 0.0)
        try:
            return FourierSeries(need, coeffs), {"fourier": spec}
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "samples":
        try:
            return fourier_coefficients(spec, need), {"samples": len(spec)}
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"samples: {exc}") from exc
    raise ConfigError(f"unknown conformal factor kind {kind!r}")


def run_torus(params: dict, args) -> Outcome:
    p, K = params["p"], args.truncation or params["K"]
    params["K"] = K
    series, desc = _torus_series(params["conformal"], p, K)
    params["conformal"] = desc
    rep = torus_index0(series, p, K, _policy(params, K), stabilize=params["stabilize"])
    S_L, _ = assemble_torus_sl(series, p, 2 * K if params["stabilize"] else K)
    return Outcome(index_report_dict(rep), rep.finite, rep, matrix=S_L)


def _explicit_coefficients(spec: Any, nu: float) -> MuCoefficients:
    if not isinstance(spec, dict) or set(spec) - {"a", "b", "nu"}:
        raise ConfigError("coefficients take the keys a, b and optionally nu")

    def table(rows, name):
        out = {}
        for row in rows or []:
            if not isinstance(row, list) or len(row) not in (2, 3):
                raise ConfigError(f"{name} entries are [index, re] or [index, re, im]")
            out[_int(name)(row[0])] = complex(row[1], row[2] if len(row) == 3 else 0.0)
        return out

    try:
        return MuCoefficients(table(spec.get("a"), "a"), table(spec.get("b"), "b"), spec.get("nu", nu))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_spiral(params: dict, args) -> Outcome:
    p, K = params["p"], args.truncation or params["K"]
    params["K"] = K
    if args.seed is not None:
        params["seed"] = args.seed
    if params["coefficients"] is not None:
        co = _explicit_coefficients(params["coefficients"], params["nu"])
    else:
        co = seeded_coefficients(p, 2 * K, params["seed"], params["amplitude"], params["decay"], params["nu"])
    mu = build_mu(co)
    pos = mu_positivity(mu)
    try:
        rep = spiral_index(co, p, K, _policy(params, K))
    except MuPositivityError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = index_report_dict(rep)
    doc["mu"] = {
        "grid_min": pos.grid_min,
        "grid_argmin": list(pos.argmin),
        "coefficient_bound": pos.coefficient_bound,
        "rigorous": pos.rigorous,
    }
    return Outcome(doc, rep.finite, rep, matrix=assemble_spiral_sl(co, p, 2 * K, mu))


def run_lifetime(params: dict, args) -> Outcome:
    K = args.truncation or params["K"]
    params["K"] = K
    rep = hom.lifetime_index0(params["T"], K, _policy(params, K // 2))
    doc = index_report_dict(rep)
    doc["census"] = hom.census(rep)
    return Outcome(doc, rep.finite, rep, matrix=hom.assemble_lifetime(params["T"], K)[0])


def _bump(spec: Any, T: float, samples: int, side: str) -> hom.SampledFunction:
    spec = spec or {"bump": "cos4" if side == "from" else "poly3"}
    if not isinstance(spec, dict) or set(spec) - {"bump", "scale"}:
        raise ConfigError(f"{side} takes the keys bump and scale")
    name = spec.get("bump", "cos4")
    if name not in hom.BUMPS:
        raise ConfigError(f"unknown bump {name!r}; choose from {sorted(hom.BUMPS)}")
    scale = _real("scale", positive=True)(spec.get("scale", 1.0))
    return hom.SampledFunction.from_callable(hom.BUMPS[name](T), T, samples).scaled(scale)


def run_homotopy(params: dict, args) -> Outcome:
    K = args.truncation or params["K"]
    params["K"] = K
    steps = params["steps"]
    if params["path"] == "lifetime":
        T0 = _pi_value("from")(params["from"] if params["from"] is not None else 1)
        T1 = _pi_value("to")(params["to"] if params["to"] is not None else "pi")
        params["from"], params["to"] = str(T0), str(T1)
        path, builder = hom.lifetime_path(T0, T1, steps), hom.lifetime_builder
    elif params["path"] == "conformal":
        T = float(params["T"])
        f0 = _bump(params["from"], T, params["samples"], "from")
        f1 = _bump(params["to"], T, params["samples"], "to")
        params["from"] = params["from"] or {"bump": "cos4"}
        params["to"] = params["to"] or {"bump": "poly3"}
        path, builder = hom.conformal_path(f0, f1, steps), hom.conformal_builder
    else:
        raise ConfigError(f"path must be 'lifetime' or 'conformal', got {params['path']!r}")
    sweep = hom.homotopy_sweep(path, builder, K, _policy(params, K // 2))
    finite = all(r.finite for r in sweep.reports)
    return Outcome(sweep_report_dict(sweep), finite, sweep=sweep)


def run_cfs_file(params: dict, args) -> Outcome:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read CFS file {args.file}: {exc.strerror}") from exc
    try:
        system = cfs_mod.DiscreteCFS.loads(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid CFS document: {exc}") from exc
    K = args.truncation or params["K"]
    params["K"] = K or system.hilbert_dim
    return _cfs_outcome(system, params, K)


RUNNERS = {
    "shift": run_shift,
    "torus": run_torus,
    "spiral": run_spiral,
    "lifetime": run_lifetime,
    "conformal-homotopy": run_homotopy,
    "cfs": run_cfs_file,
}


# -- command line ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with scenario parameters")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="override one parameter; VALUE is parsed as JSON when possible")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--csv", action="store_true", help="also write singular values, sweeps and S_L as CSV")
    p.add_argument("--seed", type=int, help="seed for generated coefficients (spiral only)")
    p.add_argument("--truncation", type=int, help="cutoff K (N for the shift scenario)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chiral-index", description="Chiral index scenarios.")
    sub = parser.add_subparsers(dest="scenario", required=True, parser_class=_Parser)
    for name, text in (
        ("shift", "shift-operator causal fermion system"),
        ("torus", "massless odd example with a conformal factor"),
        ("spiral", "spiral example on the full solution space"),
        ("lifetime", "finite-lifetime example"),
        ("conformal-homotopy", "index sweep along a homotopy"),
    ):
        _common(sub.add_parser(name, help=text))
    cfs_p = sub.add_parser("cfs", help="causal fermion systems from files")
    cfs_sub = cfs_p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run_p = cfs_sub.add_parser("run", help="index of a DiscreteCFS JSON document")
    run_p.add_argument("file")
    _common(run_p)
    return parser


def _load_params(args) -> dict:
    raw: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read config {args.config}: {exc.strerror}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            raw[key] = json.loads(value)
        except json.JSONDecodeError:
            raw[key] = value
    return raw


def _write_outputs(outcome: Outcome, scenario: str, params: dict, args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        doc = {"scenario": scenario, "parameters": _echo(params), **outcome.doc}
        write_json(doc, out / "report.json")
        if args.csv:
            if outcome.index_report is not None:
                write_singular_values(outcome.index_report, out / "singular_values.csv")
            if outcome.sweep is not None:
                write_sweep_csv(outcome.sweep, out / "sweep.csv")
            if outcome.matrix is not None:
                outcome.matrix.dump_csv(out / "S_L.csv")
    except OSError as exc:
        raise InputError(f"cannot write output to {out}: {exc.strerror or exc}") from exc
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_ERROR
    scenario = args.scenario
    try:
        if args.seed is not None and scenario != "spiral":
            raise ConfigError("--seed only applies to the spiral scenario")
        if args.truncation is not None and args.truncation < 2:
            raise ConfigError("--truncation must be at least 2")
        params = resolve(scenario, _load_params(args))
        outcome = RUNNERS[scenario](params, args)
        out = _write_outputs(outcome, "cfs-file" if scenario == "cfs" else scenario, params, args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ConfigError as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except InputError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (MuPositivityError, FourierCutoffError, KernelComputationError) as exc:
        print(f"error: computation failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    verdict = outcome.doc.get("verdict")
    index = outcome.doc.get("index")
    summary = verdict if verdict is not None else (f"index {index}" if outcome.finite else "index undefined")
    print(f"{scenario}: {summary} (report in {out / 'report.json'})")
    return EXIT_OK if outcome.finite else EXIT_INFINITE


if __name__ == "__main__":
    sys.exit(main())
