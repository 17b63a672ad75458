"""Command-line front end.

Subcommands: ``polytrope``, ``critical``, ``sweep``, ``verify``,
``asymptotics``, ``bounds``.  CSV output carries 12 significant digits
with LF line endings; JSON output is a single object per invocation with
non-finite numbers serialized as null.  Exit codes: 0 success, 1
verification failure, 2 usage or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import critical as crit
from . import verify as ver
from .numerics import NumericsError, Tolerances
from .polytrope import solve_polytrope

SWEEP_HEADER = (
    "beta,n,xi_n,slope_product,R_beta,C_beta,lower_kz,upper_kz,upper_improved,source"
)


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _emit(text: str, out_path: str | None) -> None:
    if out_path and out_path != "-":
        try:
            with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValueError(f"cannot write output file {out_path}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _tolerances(args) -> Tolerances:
    return Tolerances(rel=args.tol_rel, abs=args.tol_abs)


def _parse_beta(token: str) -> float:
    if token.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"cannot parse beta value {token!r}") from None


def _grid(beta_min: float, beta_max: float, points: int, spacing: str) -> np.ndarray:
    if points < 2:
        raise ValueError("a sweep needs at least 2 grid points")
    if beta_min < 1.5:
        raise ValueError("sweep grids start at or above beta = 3/2")
    if not beta_max > beta_min:
        raise ValueError("beta_max must exceed beta_min")
    if spacing == "linear":
        return np.linspace(beta_min, beta_max, points)
    if spacing == "log-offset":
        # Uniform in log(beta - 3/2) to resolve the steep near-critical part.
        lo = max(beta_min - 1.5, 1e-12)
        grid = 1.5 + np.geomspace(lo, beta_max - 1.5, points)
        grid[0], grid[-1] = beta_min, beta_max
        return grid
    raise ValueError(f"unknown spacing {spacing!r}")


def cmd_polytrope(args) -> int:
    if not 0.0 <= args.n < 5.0:
        raise ValueError(
            f"polytropic index must lie in [0, 5); n = {args.n} has no finite "
            "first zero (theta_5 is the closed-form Plummer profile)"
        )
    p = solve_polytrope(args.n, _tolerances(args))
    if args.profile:
        rows = ["xi,theta,dtheta"]
        for xi, (th, dth) in zip(p.profile.nodes, p.profile.states):
            rows.append(f"{_fmt(xi)},{_fmt(th)},{_fmt(dth)}")
        _emit("\n".join(rows) + "\n", args.profile)
    if args.json:
        payload = {
            "n": p.n,
            "xi_n": p.xi_n,
            "slope_at_zero": p.slope_at_zero,
            "slope_product": p.slope_product,
        }
        _emit(json.dumps(payload) + "\n", args.out)
    else:
        lines = [
            f"n              = {_fmt(p.n)}",
            f"xi_n           = {p.xi_n!r}",
            f"theta'(xi_n)   = {p.slope_at_zero!r}",
            f"-xi_n^2 theta' = {p.slope_product!r}",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _report_payload(r: crit.CriticalReport) -> dict:
    return {
        "beta": _jsonable(r.beta),
        "n": r.n,
        "xi_n": _jsonable(r.xi_n),
        "slope": r.slope,
        "slope_product": r.slope_product,
        "c_beta": r.c_beta,
        "alpha_n": r.alpha_n,
        "A_n": _jsonable(r.A_n),
        "R_beta": _jsonable(r.R_beta),
        "C_beta": r.C_beta,
        "lower_kz": r.lower_kz,
        "upper_kz": r.upper_kz,
        "upper_improved": r.upper_improved,
        "source": r.source,
    }


def cmd_critical(args) -> int:
    beta = _parse_beta(args.beta)
    if beta < 1.5:
        raise ValueError(
            f"C_beta = 0 for beta < 3/2 (no positive critical constant); got {beta}"
        )
    r = crit.critical_report(beta, _tolerances(args))
    if args.json:
        _emit(json.dumps(_report_payload(r)) + "\n", args.out)
    else:
        lines = [f"beta           = {r.beta!r}", f"source         = {r.source}"]
        for name in (
            "n", "xi_n", "slope_product", "c_beta", "alpha_n", "A_n",
            "R_beta", "C_beta", "lower_kz", "upper_kz", "upper_improved",
        ):
            lines.append(f"{name:<14} = {getattr(r, name)!r}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _sweep_rows(grid: np.ndarray, tol: Tolerances) -> list[str]:
    if grid.size >= 50:
        improved = crit.improved_upper_bound(grid)
    else:
        improved = np.array([crit._improved_at(b) for b in grid])
    rows = [SWEEP_HEADER]
    for beta, imp in zip(grid, improved):
        r = crit.critical_report(float(beta), tol)
        rows.append(
            ",".join(
                [
                    _fmt(r.beta), _fmt(r.n), _fmt(r.xi_n), _fmt(r.slope_product),
                    _fmt(r.R_beta), _fmt(r.C_beta), _fmt(r.lower_kz),
                    _fmt(r.upper_kz), _fmt(imp), r.source,
                ]
            )
        )
    return rows


def cmd_sweep(args) -> int:
    grid = _grid(args.beta_min, args.beta_max, args.points, args.spacing)
    rows = _sweep_rows(grid, _tolerances(args))
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    beta = _parse_beta(args.beta)
    if beta < 1.5:
        raise ValueError(
            f"verification refused: C_beta = 0 for beta < 3/2 (got beta = {beta})"
        )
    report = ver.run_full_verification(beta, _tolerances(args))
    if args.json:
        _emit(json.dumps(report.to_json_dict()) + "\n", args.out)
    else:
        lines = [f"beta = {report.beta!r}"]
        for name, value in report.residuals.items():
            ok = "pass" if value <= report.thresholds[name] else "FAIL"
            lines.append(
                f"{name:<10} residual = {value:.3e}  "
                f"(threshold {report.thresholds[name]:.1e})  {ok}"
            )
        lines.append("overall: " + ("pass" if report.passed else "FAIL"))
        _emit("\n".join(lines) + "\n", args.out)
    if not report.passed:
        failing = [k for k, ok in report.passed_checks.items() if not ok]
        print(f"verification failed: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


def cmd_asymptotics(args) -> int:
    if not args.beta_max > 1.5:
        raise ValueError("beta_max must exceed 3/2")
    if args.points < 2:
        raise ValueError("need at least 2 points")
    tol = _tolerances(args)
    grid = 1.5 + np.geomspace(
        max(crit.EXACT_MIN_BETA - 1.5, (args.beta_max - 1.5) * 1e-4),
        args.beta_max - 1.5,
        args.points,
    )
    rows = ["beta,C_exact,C_asymptotic,rel_gap"]
    c0 = crit.critical_at_three_halves()
    rows.append(f"{_fmt(1.5)},{_fmt(c0)},{_fmt(crit.asymptotic_critical(1.5))},{_fmt(0.0)}")
    for beta in grid:
        beta = float(beta)
        exact = crit.critical_report(beta, tol).C_beta
        approx = crit.asymptotic_critical(beta)
        gap = abs(approx - exact) / exact
        rows.append(f"{_fmt(beta)},{_fmt(exact)},{_fmt(approx)},{_fmt(gap)}")
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def cmd_bounds(args) -> int:
    if args.beta is not None:
        beta = _parse_beta(args.beta)
        lower, upper = crit.bounds_kz(beta)
        improved = crit._improved_at(beta)
        payload = {
            "beta": _jsonable(beta),
            "lower_kz": lower,
            "upper_kz": upper,
            "upper_improved": improved,
        }
        if args.json:
            _emit(json.dumps(payload) + "\n", args.out)
        else:
            lines = [f"{k:<14} = {v!r}" for k, v in payload.items()]
            _emit("\n".join(lines) + "\n", args.out)
        return 0
    grid = _grid(args.beta_min, args.beta_max, args.points, "log-offset")
    improved = crit.improved_upper_bound(grid) if grid.size >= 50 else np.array(
        [crit._improved_at(b) for b in grid]
    )
    rows = ["beta,lower_kz,upper_kz,upper_improved"]
    for beta, imp in zip(grid, improved):
        lower, upper = crit.bounds_kz(float(beta))
        rows.append(f"{_fmt(beta)},{_fmt(lower)},{_fmt(upper)},{_fmt(imp)}")
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rel", type=float, default=1e-10, help="relative error target")
    common.add_argument("--tol-abs", type=float, default=1e-12, help="absolute error target")
    common.add_argument("--json", action="store_true", help="emit a JSON object")
    common.add_argument("--out", default=None, metavar="PATH", help="output path (default stdout)")

    parser = argparse.ArgumentParser(
        prog="rvpcrit",
        description="Critical constants for the attractive relativistic "
        "Vlasov-Poisson system via Lane-Emden polytropes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polytrope", parents=[common], help="solve one standard polytrope")
    p.add_argument("--n", type=float, required=True, help="polytropic index in [0, 5)")
    p.add_argument("--profile", metavar="CSV", help="dump xi,theta,dtheta at the integrator nodes")
    p.set_defaults(func=cmd_polytrope)

    p = sub.add_parser("critical", parents=[common], help="critical constant for one exponent")
    p.add_argument("--beta", required=True, help="exponent > 3/2, 3/2 exactly, or 'inf'")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("sweep", parents=[common], help="sweep a beta grid to CSV")
    p.add_argument("--beta-min", type=float, default=1.51)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--spacing", choices=["linear", "log-offset"], default="log-offset")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the identity checks")
    p.add_argument("--beta", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("asymptotics", parents=[common], help="exact vs near-critical expansion")
    p.add_argument("--beta-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=40)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("bounds", parents=[common], help="lower/upper/improved bounds")
    p.add_argument("--beta", default=None, help="single exponent (>= 3/2 or 'inf')")
    p.add_argument("--beta-min", type=float, default=1.5)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
