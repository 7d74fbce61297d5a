"""Command-line front end.

Reads a JSON config describing one task (interpolation, single-increment
estimation, filtering, minimax, or an oracle cross-check), runs it, and
writes a JSON report and/or CSV artifacts into the output directory.

Exit codes: 0 when the solution passed its internal validity gates, 1 for
input problems, 2 when a diagnostic gate failed (residuals, positivity,
integrability, convergence).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from math import pi
from pathlib import Path

import numpy as np

from . import errors
from .filtering import FilteringProblem, solve_filtering
from .increments import IncrementSpec
from .interpolate import (
    InterpolationProblem,
    extract_time_weights,
    solve_functional,
    solve_increment_functional,
    solve_single_increment,
)
from .minimax import DensityClass, minimax_characteristic, verify_saddle_D0
from .oracle import OracleConfig, compare_spectral_vs_oracle, monte_carlo_check, projection_oracle
from .spectral import DensityModel, QuadratureConfig

SCHEMA_VERSION = 1

_DIAGNOSTIC_ERRORS = (
    errors.NonIntegrableDensityError,
    errors.QuadratureConvergenceError,
    errors.InsufficientFourierRangeError,
    errors.SingularOperatorError,
    errors.ResidualFailureError,
    errors.SupportLeakageError,
    errors.PositivityViolationError,
    errors.FactorizationError,
    errors.NoConvergenceError,
)

_EXPR_NAMES = {
    "pi": np.pi,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "where": np.where,
}


def _density_from_config(spec: IncrementSpec, cfg: dict, base: Path) -> DensityModel:
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise errors.ConfigError(f"density config must be an object with 'type': {cfg!r}")
    kind = cfg["type"]
    if kind == "increment-constant":
        return DensityModel.increment_constant(spec, float(cfg["sigma2"]))
    if kind == "weighted-inverse":
        return DensityModel.from_weighted_inverse_coeffs(
            spec, np.asarray(cfg["coeffs"], dtype=float)
        )
    if kind == "tabulated":
        path = Path(cfg["path"])
        if not path.is_absolute():
            path = base / path
        return DensityModel.from_csv(spec, path)
    if kind == "expression":
        expr = cfg["rho"]
        code = compile(expr, "<density-expression>", "eval")

        def rho_fn(lam):
            ns = dict(_EXPR_NAMES)
            ns["lam"] = lam
            return eval(code, {"__builtins__": {}}, ns)  # noqa: S307

        try:
            rho_fn(np.linspace(0.1, 3.0, 5))
        except Exception as exc:
            raise errors.ConfigError(f"bad density expression {expr!r}: {exc}")
        return DensityModel.closed_form(spec, rho_fn)
    raise errors.ConfigError(f"unknown density type {kind!r}")


def _quad_from_config(cfg: dict | None) -> QuadratureConfig | None:
    if cfg is None:
        return None
    return QuadratureConfig(
        panels=int(cfg.get("panels", 32)),
        order=int(cfg.get("order", 10)),
        rtol=float(cfg.get("rtol", 1e-9)),
    )


def _write_weights_csv(path: Path, tw) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "weight", "block"])
        for k, val in zip(tw.past_k, tw.past):
            w.writerow([int(k), repr(float(val)), "past"])
        for k, val in zip(tw.future_k, tw.future):
            w.writerow([int(k), repr(float(val)), "future"])


def _write_density_csv(path: Path, f: DensityModel, g: DensityModel, points: int = 513):
    lam = np.linspace(-pi, pi, points)
    fv = f.increment_density(lam)
    gv = g.increment_density(lam)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "f", "g"])
        for x, a, b in zip(lam, fv, gv):
            w.writerow([repr(float(x)), repr(float(a)), repr(float(b))])


def _solution_report(sol) -> dict:
    rep = {
        "mse": sol.mse,
        "mse_quadratic": sol.mse_quadratic,
        "residual_primary": sol.residual_primary,
        "residual_coupling": sol.residual_coupling,
        "shift": sol.shift,
        "truncation": sol.L,
        "minimax": sol.minimax,
        "c": sol.c.tolist(),
        "e": sol.e_vec.tolist(),
        "b": sol.b.tolist(),
    }
    if sol.v is not None:
        rep["v"] = sol.v.tolist()
    return rep


def _run(config: dict, base: Path, seed: int | None, verbose: bool) -> tuple[dict, object]:
    if config.get("schema") != SCHEMA_VERSION:
        raise errors.ConfigError(
            f"config schema must be {SCHEMA_VERSION}, got {config.get('schema')!r}"
        )
    command = config.get("command")
    spec = IncrementSpec(int(config["n"]), int(config["mu"]))
    quad = _quad_from_config(config.get("quad"))
    L = config.get("L")
    L = int(L) if L is not None else None

    def density(key):
        return _density_from_config(spec, config[key], base)

    if verbose:
        print(f"running command {command!r} with n={spec.n}, mu={spec.mu}",
              file=sys.stderr)

    if command == "interpolate":
        prob = InterpolationProblem(
            spec=spec, a=np.asarray(config["a"], dtype=float),
            f=density("f"), g=density("g"), L=L, quad=quad,
        )
        sol = solve_functional(prob)
        return {"command": command, "solution": _solution_report(sol)}, sol

    if command == "increment":
        f, g = density("f"), density("g")
        if "m" in config:
            sol = solve_single_increment(
                spec, int(config["m"]), int(config["N"]), f, g, L=L, quad=quad
            )
        else:
            sol = solve_increment_functional(
                spec, np.asarray(config["b"], dtype=float), f, g, L=L, quad=quad
            )
        return {"command": command, "solution": _solution_report(sol)}, sol

    if command == "filter":
        prob = FilteringProblem(
            spec=spec, N=int(config["N"]),
            a_future=np.asarray(config["a_future"], dtype=float),
            f=density("f"), g=density("g"), L=L, quad=quad,
        )
        sol = solve_filtering(prob)
        return {"command": command, "solution": _solution_report(sol)}, sol

    if command == "minimax":
        ccfg = config["class"]
        dclass = DensityClass(
            kind=ccfg["kind"],
            P1=ccfg.get("P1"),
            P2=ccfg.get("P2"),
            M=ccfg.get("M"),
            r1=None if ccfg.get("r1") is None else np.asarray(ccfg["r1"], float),
            r2=None if ccfg.get("r2") is None else np.asarray(ccfg["r2"], float),
        )
        g = density("g") if "g" in config else None
        a = np.asarray(config["a"], dtype=float)
        cand, sol = minimax_characteristic(
            spec, a.size - 1, a, dclass, g=g, L=L, quad=quad
        )
        rep = {
            "command": command,
            "solution": _solution_report(sol),
            "least_favorable": {
                "f0_head": cand.f0_head.tolist(),
                "g0_head": cand.g0_head.tolist(),
                "p1": cand.p1_vec.tolist(),
                "p2": cand.p2_vec.tolist(),
                "gamma": None if cand.gamma is None else cand.gamma.tolist(),
                "method": cand.method,
                "converged": cand.converged,
            },
        }
        if dclass.kind == "D0":
            rep["verification"] = {
                k: v for k, v in verify_saddle_D0(cand, dclass, L=L).items()
            }
        return rep, sol

    if command == "oracle-check":
        f, g = density("f"), density("g")
        ocfg = config.get("oracle", {})
        cfg = OracleConfig(
            T=int(ocfg.get("T", 200)),
            samples=int(ocfg.get("samples", 100_000)),
            seed=int(seed if seed is not None else ocfg.get("seed", 0)),
            jitter=float(ocfg.get("jitter", 1e-10)),
        )
        if "a" in config:
            prob = InterpolationProblem(
                spec=spec, a=np.asarray(config["a"], dtype=float),
                f=f, g=g, L=L, quad=quad,
            )
            sol = solve_functional(prob)
        else:
            sol = solve_increment_functional(
                spec, np.asarray(config["b"], dtype=float), f, g, L=L, quad=quad
            )
        comp = compare_spectral_vs_oracle(sol, cfg)
        rep = {
            "command": command,
            "solution": _solution_report(sol),
            "comparison": {
                "mse_spectral": comp.mse_spectral,
                "mse_oracle": comp.mse_oracle,
                "rel_gap": comp.rel_gap,
                "weight_gap": comp.weight_gap,
                "passed": comp.passed,
            },
        }
        if ocfg.get("monte_carlo", False):
            ora = projection_oracle(sol.spec, sol.b, f, g, cfg, shift=sol.shift)
            mc = monte_carlo_check(ora, sol.b, cfg)
            rep["monte_carlo"] = {
                "empirical_mse": mc.empirical_mse,
                "std_error": mc.std_error,
                "n_samples": mc.n_samples,
                "seed": mc.seed,
            }
        if not comp.passed:
            raise errors.ResidualFailureError(
                f"oracle comparison failed: rel gap {comp.rel_gap:.3e}"
            )
        return rep, sol

    raise errors.ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="statinc",
        description="Estimation for sequences with stationary differences",
    )
    parser.add_argument("--config", required=True, help="path to JSON config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=["json", "csv", "both"], default="json")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    out_dir = Path(args.out)
    try:
        cfg_path = Path(args.config)
        with open(cfg_path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 1

    try:
        report, sol = _run(config, cfg_path.parent, args.seed, args.verbose)
    except errors.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: bad config: {exc!r}", file=sys.stderr)
        return 1
    except _DIAGNOSTIC_ERRORS as exc:
        print(f"diagnostic failure: {exc}", file=sys.stderr)
        report = {
            "schema": SCHEMA_VERSION,
            "valid": False,
            "failure": {"type": type(exc).__name__, "message": str(exc)},
        }
        with open(out_dir / "report.json", "w") as fh:
            json.dump(report, fh, indent=2)
        return 2

    report["schema"] = SCHEMA_VERSION
    report["valid"] = True

    if args.format in ("json", "both"):
        with open(out_dir / "report.json", "w") as fh:
            json.dump(report, fh, indent=2)
    if args.format in ("csv", "both"):
        try:
            tail = int(config.get("tail", 30))
            tw = extract_time_weights(sol, tail=tail)
            _write_weights_csv(out_dir / "weights.csv", tw)
            _write_density_csv(out_dir / "density.csv", sol.f_model, sol.g_model)
        except _DIAGNOSTIC_ERRORS as exc:
            print(f"diagnostic failure: {exc}", file=sys.stderr)
            return 2
    if args.verbose:
        print(f"wrote results to {out_dir}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
