"""Command line front-end: ``zonal-uncertainty {table,verify,closed-form,limit}``.

Exit codes: 0 success, 1 computation or verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import abel_poisson as ap
from .qseries import canonical_string, s_closed_form
from .verify import Verifier, as_dicts

log = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "n",
    "rho",
    "var_space",
    "var_momentum",
    "uncertainty",
    "limit_uncertainty",
    "margin_over_half_n",
)
LIMIT_COLUMNS = ("n", "limit_uncertainty", "half_n", "excess")
MAX_CLOSED_FORM_M = 12


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n_values: tuple[int, ...]
    rho_min: float
    rho_max: float
    rho_points: int = 1
    spacing: str = "linear"

    def __post_init__(self):
        if not self.n_values:
            raise UsageError("at least one dimension is required")
        if any(n < 2 for n in self.n_values):
            raise UsageError(f"dimensions must be >= 2, got {self.n_values}")
        if not self.rho_min > 0:
            raise UsageError(f"rho_min must be positive, got {self.rho_min}")
        if self.rho_points < 1:
            raise UsageError(f"need at least one rho point, got {self.rho_points}")
        if self.rho_min > self.rho_max:
            raise UsageError(f"rho_min {self.rho_min} exceeds rho_max {self.rho_max}")
        if self.spacing not in ("linear", "log"):
            raise UsageError(f"unknown spacing {self.spacing!r}")

    def rhos(self) -> list[float]:
        if self.rho_points == 1:
            return [self.rho_min]
        if self.spacing == "log":
            return [float(r) for r in np.geomspace(self.rho_min, self.rho_max, self.rho_points)]
        return [float(r) for r in np.linspace(self.rho_min, self.rho_max, self.rho_points)]

    def points(self) -> list[tuple[int, float]]:
        return [(n, rho) for n in sorted(set(self.n_values)) for rho in sorted(self.rhos())]


def table_row(n: int, rho: float, tol: float = 1e-12) -> dict:
    w = ap.AbelPoissonWavelet(n, rho)
    vs = ap.ap_var_space(w, tol)
    vm = ap.ap_var_momentum_closed(w)
    u = math.sqrt(vs * vm)
    return {
        "n": n,
        "rho": rho,
        "var_space": vs,
        "var_momentum": vm,
        "uncertainty": u,
        "limit_uncertainty": ap.ap_limit_uncertainty(n),
        "margin_over_half_n": u - n / 2,
    }


def _row_task(args):
    return table_row(*args)


def compute_table(grid: GridSpec, tol: float = 1e-12, jobs: int = 1) -> list[dict]:
    """Rows in (n, rho) order regardless of which worker finishes first."""
    tasks = [(n, rho, tol) for n, rho in grid.points()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row_task, tasks))
    return [_row_task(t) for t in tasks]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(value)
    return format(float(value), ".17g")


def write_rows(rows: list[dict], columns, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])


def _parse_dims(values: list[str]) -> tuple[int, ...]:
    dims = []
    for item in values:
        for part in item.split(","):
            if part.strip():
                try:
                    dims.append(int(part))
                except ValueError:
                    raise UsageError(f"dimension must be an integer, got {part!r}")
    return tuple(dims)


def cmd_table(args, out) -> int:
    grid = GridSpec(
        _parse_dims(args.n),
        args.rho_min,
        args.rho_max if args.rho_max is not None else args.rho_min,
        args.points,
        "log" if args.log else "linear",
    )
    rows = compute_table(grid, args.tol, args.jobs)
    flagged = [r for r in rows if r["margin_over_half_n"] < -1e-9]
    for r in flagged:
        log.warning("U < n/2 at n=%s rho=%s (margin %.3g)", r["n"], r["rho"], r["margin_over_half_n"])
    write_rows(rows, TABLE_COLUMNS, args.format, out)
    return 0


def cmd_verify(args, out) -> int:
    checks = Verifier(args.tol, args.quad_tol, args.inject_fault).run(args.level)
    failed = [c for c in checks if not c.passed]
    if args.format == "json":
        json.dump({"level": args.level, "passed": not failed, "checks": as_dicts(checks)}, out, indent=2)
        out.write("\n")
    else:
        for c in checks:
            out.write(f"{'PASS' if c.passed else 'FAIL'}  [{c.suite}] {c.name}  {c.detail}\n")
        out.write(f"{len(checks) - len(failed)}/{len(checks)} checks passed\n")
    return 1 if failed else 0


def cmd_closed_form(args, out) -> int:
    if args.dim < 2 or not 0 <= args.m <= MAX_CLOSED_FORM_M:
        raise UsageError(f"need n >= 2 and 0 <= m <= {MAX_CLOSED_FORM_M}")
    out.write(canonical_string(s_closed_form(args.dim, args.m)) + "\n")
    return 0


def cmd_limit(args, out) -> int:
    if args.n_max < 2:
        raise UsageError(f"n_max must be >= 2, got {args.n_max}")
    rows = []
    for n in range(2, args.n_max + 1):
        lim = ap.ap_limit_uncertainty(n)
        rows.append({"n": n, "limit_uncertainty": lim, "half_n": n / 2, "excess": lim - n / 2})
    write_rows(rows, LIMIT_COLUMNS, args.format, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zonal-uncertainty",
        description="Uncertainty product of the spherical Abel-Poisson wavelet.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    table = sub.add_parser("table", help="var_S, var_M and U over an (n, rho) grid")
    table.add_argument("--n", nargs="+", default=["2"], help="dimensions, e.g. --n 2 3 or --n 2,3")
    table.add_argument("--rho-min", type=float, required=True)
    table.add_argument("--rho-max", type=float, default=None)
    table.add_argument("--points", type=int, default=1)
    table.add_argument("--log", action="store_true", help="log-spaced rho values")
    table.add_argument("--format", choices=("csv", "json"), default="csv")
    table.add_argument("--tol", type=float, default=1e-12, help="relative series tail tolerance")
    table.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    table.set_defaults(func=cmd_table)

    verify = sub.add_parser("verify", help="run the verification suites")
    verify.add_argument("--level", choices=("fast", "full"), default="fast")
    verify.add_argument("--format", choices=("text", "json"), default="text")
    verify.add_argument("--tol", type=float, default=1e-12)
    verify.add_argument("--quad-tol", type=float, default=1e-8)
    verify.add_argument("--inject-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    verify.set_defaults(func=cmd_verify)

    closed = sub.add_parser("closed-form", help="exact S_{n,m} as a rational function of q = exp(-2 rho)")
    closed.add_argument("dim", type=int, metavar="N")
    closed.add_argument("m", type=int, metavar="M")
    closed.set_defaults(func=cmd_closed_form)

    limit = sub.add_parser("limit", help="rho -> 0 limit of U against n/2")
    limit.add_argument("--n-max", type=int, required=True)
    limit.add_argument("--format", choices=("csv", "json"), default="csv")
    limit.set_defaults(func=cmd_limit)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
