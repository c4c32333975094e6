"""Command-line front end: ``mellin-sampler {synth,verify,experiment,bounds}``.

Every run writes ``config.json`` next to its outputs.  That file is the
effective configuration (overrides applied, defaults filled in), and
re-running it reproduces every output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import VARIANTS, evaluate_bounds, main_theorem_constants
from .core import LatticeFunction, SpaceParams
from .errors import (
    ConcentrationError,
    ConvergenceError,
    LatticeSizeError,
    MellinSamplerError,
    NormOverflowError,
    ParameterError,
    RejectionExhaustedError,
)
from .mellin import bandlimit_residual, mellin_transform, reproduce_integral
from .quadrature import QuadratureSpec
from .rng import substream
from .sampling import monte_carlo_experiment
from .synthesis import (
    ConcentrationCube,
    SynthesisProfile,
    concentration,
    norm_parseval,
    norm_quadrature,
    random_band_function,
    sup_error_on_cube,
    truncate_to_BN,
    truncation_error_bound,
)

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_REJECTION = 3
EXIT_NUMERICAL = 4

# stream tag for verification probes
_VERIFY_STREAM = 5

VERIFY_TOLERANCES = {
    "interpolation": 1e-12,
    "parseval": 2e-3,
    "pointwise": 1e-6,
    "reproduce_integral": 1e-3,
    "bandlimit": 1e-3,
    "spectrum": 2e-2,
}

BOUNDS_COLUMNS = ("n", "T", "R", "epsilon", "mu", "r", "target_failure", "variant", "d_eps",
                  "log_covering", "log_prob_est", "alpha", "log_beta", "log_failure_bound",
                  "failure_bound_raw", "failure_bound", "vacuous", "min_r", "min_r_remark")


class ConfigError(ParameterError):
    code = "config-error"


# --- config handling ------------------------------------------------------

def _take(data: dict, allowed: dict, where: str) -> dict:
    """Fill defaults and reject unknown keys.  ``allowed`` maps key -> default
    (``...`` marks a required key)."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    out = {}
    for key, default in allowed.items():
        if key in data:
            out[key] = data[key]
        elif default is ...:
            raise ConfigError(f"missing key {key!r} in {where}")
        else:
            out[key] = default
    return out


def _space(data) -> SpaceParams:
    d = _take(data, {"n": 1, "c": 0.0, "T": 1.0}, "space")
    c = d["c"]
    return SpaceParams(n=d["n"], c=tuple(c) if isinstance(c, list) else c, T=d["T"])


def _space_dict(params: SpaceParams) -> dict:
    return {"n": params.n, "c": list(params.c), "T": params.T}


def _profile(data, seed_override) -> SynthesisProfile:
    d = _take(data, {"seed": 0, "support_half_width": 3, "decay": "flat", "q": None,
                     "target_delta": None, "max_rejections": 100}, "profile")
    if seed_override is not None:
        d["seed"] = seed_override
    return SynthesisProfile(**d)


def _quad(data) -> QuadratureSpec | None:
    return None if data is None else QuadratureSpec.from_dict(data)


def _variants(choice: str) -> list[str]:
    return list(VARIANTS) if choice == "both" else [choice]


def _check_variant(choice) -> str:
    if choice not in (*VARIANTS, "both"):
        raise ConfigError(f"variant must be paper, corrected or both, got {choice!r}")
    return choice


def load_config(path: Path, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"format_version must be {FORMAT_VERSION}")
    if data.get("command", command) != command:
        raise ConfigError(f"config is for {data['command']!r}, not {command!r}")
    return data


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    if x is None:
        return "none"
    return str(x)


# --- commands -------------------------------------------------------------

def cmd_synth(cfg: dict, out: Path, args) -> int:
    d = _take(cfg, {"format_version": ..., "command": "synth", "space": {}, "R": ...,
                    "profile": {}, "quad": None}, "config")
    params = _space(d["space"])
    cube = ConcentrationCube(float(d["R"]), params.n)
    profile = _profile(d["profile"], args.seed)
    quad = _quad(d["quad"])
    effective = {
        "format_version": FORMAT_VERSION, "command": "synth", "space": _space_dict(params),
        "R": cube.R, "profile": _profile_dict(profile),
        "quad": None if quad is None else quad.to_dict(),
    }
    f = random_band_function(params, profile, cube, quad)
    report = concentration(f, cube, quad)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.json", _dump(effective))
    _write(out / "function.json", f.to_json() + "\n")
    _write(out / "concentration.json", report.to_json() + "\n")
    print(json.dumps({"delta": report.delta, "norm": norm_parseval(f),
                      "support_size": int(f.keys.shape[0])}))
    return EXIT_OK


def _profile_dict(p: SynthesisProfile) -> dict:
    return {"seed": int(p.seed), "support_half_width": p.support_half_width, "decay": p.decay,
            "q": p.q, "target_delta": p.target_delta, "max_rejections": p.max_rejections}


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def run_verification(f: LatticeFunction, cube: ConcentrationCube, seed: int = 0,
                     random_points: int = 1000, reproduce_points: int = 5,
                     tolerances: dict | None = None,
                     quad: QuadratureSpec | None = None) -> list[dict]:
    """Run the verification checks on one function; one dict per check."""
    tol = dict(VERIFY_TOLERANCES, **(tolerances or {}))
    params = f.params
    n, T = params.n, params.T
    rng = substream(seed, _VERIFY_STREAM)
    checks = []

    def record(name, value, limit, ok=None):
        ok = bool(value <= limit) if ok is None else bool(ok)
        checks.append({"name": name, "pass": ok, "value": float(value), "tolerance": float(limit)})

    # interpolation at every support node
    scale = max(1.0, float(np.max(np.abs(f.values), initial=0.0)))
    if f.keys.shape[0]:
        nodes = np.exp(f.keys / T)
        err = float(np.max(np.abs(f(nodes) - f.values))) / scale
    else:
        err = 0.0
    record("interpolation", err, tol["interpolation"])

    # Parseval against log-axis quadrature
    norm = norm_parseval(f)
    record("parseval", _rel(norm**2, norm_quadrature(f, quad=quad)), tol["parseval"])

    # pointwise bound x^c |f(x)| <= T^{n/2} ||f||
    reach = (f.support_radius + 30.0) / T
    u = rng.uniform(-reach, reach, size=(random_points, n))
    weighted = np.abs(f.on_log_axis(u))
    bound = T ** (n / 2.0) * norm
    excess = float(np.max(weighted - bound * (1.0 + tol["pointwise"]), initial=-np.inf))
    record("pointwise_bound", max(excess, 0.0), 0.0, excess <= 1e-12)

    # reproducing integral against the series
    x = np.exp(rng.uniform(-reach, reach, size=(reproduce_points, n)))
    series = f(x)
    integral = reproduce_integral(f, x, quad)
    record("reproduce_integral", float(np.max(np.abs(series - integral), initial=0.0)),
           tol["reproduce_integral"])

    # truncation error dominated by its bound
    N0 = math.floor(2.0 * T * math.log(cube.R)) + 1
    N_grid = range(N0, max(N0, 2 * f.support_radius + 2) + 1)
    worst = 0.0
    for N in N_grid:
        measured = sup_error_on_cube(f, truncate_to_BN(f, N), cube)
        limit = truncation_error_bound(N, params, cube, norm)
        worst = max(worst, measured - limit)
    record("truncation", worst, 1e-12)

    # exact spectrum vanishes beyond pi T; quadrature agrees inside the band
    record("bandlimit", bandlimit_residual(f, params, math.pi * T), tol["bandlimit"])
    if n == 1 and f.keys.shape[0]:
        exact = mellin_transform(f, params, math.pi * T / 2, 33, method="exact").values
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            numeric = mellin_transform(f, params, math.pi * T / 2, 33, method="quadrature").values
        dev = float(np.max(np.abs(exact - numeric)) / np.max(np.abs(exact)))
        record("spectrum_consistency", dev, tol["spectrum"])
    else:
        # tensor quadrature is too slow to be a routine check for n >= 2
        checks.append({"name": "spectrum_consistency", "pass": True, "value": 0.0,
                       "tolerance": float(tol["spectrum"]), "skipped": True})
    return checks


def cmd_verify(cfg: dict, out: Path, args, base: Path) -> int:
    d = _take(cfg, {"format_version": ..., "command": "verify", "function": ..., "R": ...,
                    "seed": 0, "random_points": 1000, "reproduce_points": 5,
                    "tolerances": {}, "quad": None}, "config")
    tolerances = _take(d["tolerances"], {k: v for k, v in VERIFY_TOLERANCES.items()},
                       "tolerances")
    path = Path(d["function"])
    if not path.is_absolute():
        path = (base / path).resolve()
    try:
        f = LatticeFunction.from_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read function file: {exc}") from exc
    seed = d["seed"] if args.seed is None else args.seed
    cube = ConcentrationCube(float(d["R"]), f.params.n)
    quad = _quad(d["quad"])
    effective = {
        "format_version": FORMAT_VERSION, "command": "verify", "function": str(path),
        "R": cube.R, "seed": int(seed), "random_points": int(d["random_points"]),
        "reproduce_points": int(d["reproduce_points"]), "tolerances": tolerances,
        "quad": None if quad is None else quad.to_dict(),
    }
    checks = run_verification(f, cube, int(seed), int(d["random_points"]),
                              int(d["reproduce_points"]), tolerances, quad)
    failing = [c["name"] for c in checks if not c["pass"]]
    report = {"all_pass": not failing, "failing": failing, "checks": checks}
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.json", _dump(effective))
    _write(out / "verify.json", _dump(report))
    print(json.dumps({"all_pass": not failing, "failing": failing}))
    return EXIT_OK if not failing else EXIT_CHECK_FAILED


def cmd_experiment(cfg: dict, out: Path, args) -> int:
    d = _take(cfg, {"format_version": ..., "command": "experiment", "space": {}, "R": ...,
                    "profile": {}, "mu": ..., "r": ..., "trials": ..., "seed": 0,
                    "reuse_function": False, "variant": "paper", "quad": None}, "config")
    params = _space(d["space"])
    cube = ConcentrationCube(float(d["R"]), params.n)
    profile = _profile(d["profile"], None)
    seed = int(d["seed"] if args.seed is None else args.seed)
    variant = _check_variant(args.variant or d["variant"])
    rs = d["r"] if isinstance(d["r"], list) else [d["r"]]
    if not rs or any(not isinstance(r, int) or r < 1 for r in rs):
        raise ConfigError("r must be a positive integer or a non-empty list of them")
    quad = _quad(d["quad"])
    effective = {
        "format_version": FORMAT_VERSION, "command": "experiment",
        "space": _space_dict(params), "R": cube.R, "profile": _profile_dict(profile),
        "mu": float(d["mu"]), "r": d["r"], "trials": int(d["trials"]), "seed": seed,
        "reuse_function": bool(d["reuse_function"]), "variant": variant,
        "quad": None if quad is None else quad.to_dict(),
    }
    variants = _variants(variant)
    outputs = {}
    summary = []
    for r in rs:
        report = monte_carlo_experiment(params, cube, profile, float(d["mu"]), r,
                                        int(d["trials"]), seed, bool(d["reuse_function"]),
                                        variants[0], max(1, args.threads or 1), quad)
        body = report.to_dict()
        body["theoretical_bounds"] = {}
        for v in variants:
            log_bound = main_theorem_constants(float(d["mu"]), params.T, cube.R, params.n,
                                               v).log_failure(r)
            raw = math.exp(log_bound) if log_bound < 709.0 else math.inf
            vacuous = log_bound >= 0.0
            body["theoretical_bounds"][v] = {
                "log": log_bound,
                "raw": raw if math.isfinite(raw) else None,
                "clamped": min(raw, 1.0),
                "vacuous": vacuous,
                "dominates_wilson_upper": None if vacuous else raw >= report.failure_rate_ci[1],
            }
        outputs[f"experiment_r{r}.json"] = _dump(body)
        outputs[f"experiment_r{r}.csv"] = report.to_csv()
        summary.append({
            "r": r, "failure_rate": report.failures_sharp / report.trials,
            "failure_rate_paper": report.failures_paper / report.trials,
            "wilson": list(report.failure_rate_ci),
            "theoretical_bound": {v: body["theoretical_bounds"][v]["raw"] for v in variants},
            "vacuous": {v: body["theoretical_bounds"][v]["vacuous"] for v in variants},
        })
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.json", _dump(effective))
    for name, text in outputs.items():
        _write(out / name, text)
    for line in summary:
        print(json.dumps(line))
    return EXIT_OK


def bounds_table(grid: dict, variants: list[str]) -> list:
    """Evaluate every bound over the Cartesian product of ``grid`` values."""
    axes = ("n", "T", "R", "epsilon", "mu", "r", "target_failure")
    rows = []
    for point in itertools.product(*(grid[a] for a in axes)):
        kw = dict(zip(axes, point))
        for v in variants:
            rows.append(evaluate_bounds(variant=v, **kw))
    return rows


def cmd_bounds(cfg: dict, out: Path, args) -> int:
    d = _take(cfg, {"format_version": ..., "command": "bounds", "grid": ...,
                    "variant": "both"}, "config")
    grid = _take(d["grid"], {"n": [1], "T": [1.0], "R": [2.0], "epsilon": [0.5],
                             "mu": [0.1], "r": [1000], "target_failure": [0.05]}, "grid")
    for key, values in grid.items():
        if not isinstance(values, list):
            raise ConfigError(f"grid.{key} must be a list")
    variant = _check_variant(args.variant or d["variant"])
    effective = {"format_version": FORMAT_VERSION, "command": "bounds", "grid": grid,
                 "variant": variant}
    rows = bounds_table(grid, _variants(variant))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BOUNDS_COLUMNS)
    for row in rows:
        rd = row.to_dict()
        rd["failure_bound_raw"] = row.failure_bound_raw
        writer.writerow([_fmt(rd[c]) for c in BOUNDS_COLUMNS])
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "config.json", _dump(effective))
    _write(out / "bounds.csv", buf.getvalue())
    _write(out / "bounds.json", _dump([row.to_dict() for row in rows]))
    vacuous = sum(row.vacuous for row in rows)
    print(json.dumps({"rows": len(rows), "vacuous_rows": vacuous}))
    return EXIT_OK


# --- entry point ----------------------------------------------------------

def _exit_code(exc: Exception) -> int:
    if isinstance(exc, RejectionExhaustedError):
        return EXIT_REJECTION
    if isinstance(exc, (ConvergenceError, NormOverflowError, LatticeSizeError,
                        ConcentrationError)):
        return EXIT_NUMERICAL
    if isinstance(exc, ParameterError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def _error_payload(exc: Exception) -> dict:
    payload = {"error": getattr(exc, "code", "error"), "message": str(exc)}
    for attr in ("best_delta", "trial", "trial_seed"):
        if hasattr(exc, attr):
            value = getattr(exc, attr)
            payload[attr] = str(value) if attr == "trial_seed" else value
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mellin-sampler",
                                     description="Exponential sampling experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("synth", "draw a random band-limited function"),
                       ("verify", "run numerical checks on a function file"),
                       ("experiment", "Monte Carlo test of the sampling inequality"),
                       ("bounds", "tabulate the closed-form bounds")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--variant", choices=("paper", "corrected", "both"), default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        cfg = load_config(args.config, args.command)
        if args.command == "synth":
            return cmd_synth(cfg, args.out, args)
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args, args.config.resolve().parent)
        if args.command == "experiment":
            return cmd_experiment(cfg, args.out, args)
        return cmd_bounds(cfg, args.out, args)
    except (MellinSamplerError, ValueError, TypeError) as exc:
        if not isinstance(exc, MellinSamplerError):
            exc = ConfigError(str(exc))
        sys.stderr.write(json.dumps(_error_payload(exc)) + "\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
