"""Command-line front end.

``fracenergy solve | verify | converge | suite``. Exit codes: 0 success,
2 bad input or violated hypotheses, 3 numerical failure, 4 I/O error.
Output files go to ``--out``, else ``$FRACENERGY_OUT``, else ``./fracenergy-out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from fracenergy.energy_monitor import (
    DEFAULT_TOL,
    NormTrace,
    check_auxiliary,
    check_theorem,
    l2_sq,
    norms,
)
from fracenergy.errors import HypothesisError, NumericalError, ProblemFileError
from fracenergy.problem_file import load_problem
from fracenergy.problem_spec import CATALOG, ProblemSpec, manufactured
from fracenergy.solver import SolutionField, solve
from fracenergy.suite import observed_orders, resolve_selection, run_suite

__all__ = ["RunConfig", "main", "build_parser", "OUT_ENV"]

OUT_ENV = "FRACENERGY_OUT"
DEFAULT_OUT = "fracenergy-out"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    catalog: str | None = None
    problem_file: str | None = None
    alpha: float | None = None
    nx: int = 64
    nt: int = 64
    levels: int = 4
    out: str = DEFAULT_OUT
    tol: float | None = None
    only: str | None = None
    constant: float | None = None
    floor: float = 1.0

    def __post_init__(self) -> None:
        for name in ("nx", "nt"):
            n = getattr(self, name)
            if n < 4 or n & (n - 1):
                raise ValueError(f"--{name} must be a power of two >= 4, got {n}")
        if not 2 <= self.levels <= 6:
            raise ValueError(f"--levels must lie in [2, 6], got {self.levels}")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


class _InputError(Exception):
    pass


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value:g}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracenergy",
        description="Solve time-fractional diffusion/wave problems and check their energy estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--catalog", metavar="NAME", help=f"one of: {', '.join(CATALOG)}")
            src.add_argument("--problem-file", metavar="PATH", help="problem description file")
            p.add_argument("--alpha", type=_alpha, help="fractional order in (0, 1) (default 0.5)")
            p.add_argument("--nx", type=int, default=64, help="space intervals (power of two)")
            p.add_argument("--nt", type=int, default=64, help="time steps (power of two)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--tol", type=float, help="tolerance override")

    p = sub.add_parser("solve", help="solve a problem and write solution and norm CSVs")
    common(p)
    p = sub.add_parser("verify", help="solve and check the matching energy estimate")
    common(p)
    p.add_argument("--constant", type=float, help="override the estimate constant")
    p = sub.add_parser("converge", help="refinement study against the exact solution")
    common(p)
    p.add_argument("--levels", type=int, default=4, help="number of grids, 2..6")
    p.add_argument("--floor", type=float, default=1.0, help="minimum final observed order")
    p = sub.add_parser("suite", help="run the acceptance battery")
    common(p, problem=False)
    p.add_argument("--only", help="comma-separated row names or criterion numbers")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    out = ns.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    kw = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    kw["out"] = out
    return RunConfig(**kw)


def _problem(cfg: RunConfig) -> tuple[ProblemSpec, object, str]:
    if cfg.problem_file is not None:
        parsed = load_problem(cfg.problem_file, cfg.alpha)
        return parsed.spec, parsed.exact, parsed.name
    alpha = 0.5 if cfg.alpha is None else cfg.alpha
    spec, exact = manufactured(cfg.catalog, alpha)
    return spec, exact, cfg.catalog


def _g(x: float) -> str:
    return f"{x:.17g}"


def norms_csv(trace: NormTrace) -> str:
    lines = ["n, t, l2_sq, grad_sq, w21, left_sq, right_sq"]
    cols = [trace.l2_sq, trace.grad_sq, trace.w21, trace.left_sq, trace.right_sq]
    for n, t in enumerate(trace.grid.t):
        lines.append(", ".join([str(n), _g(t)] + [_g(c.values[n]) for c in cols]))
    return "\n".join(lines) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _stem(name: str, spec: ProblemSpec, cfg: RunConfig) -> str:
    return f"{name}-a{spec.alpha:g}-nx{cfg.nx}-nt{cfg.nt}"


# {{{ commands


def cmd_solve(cfg: RunConfig) -> int:
    spec, _, name = _problem(cfg)
    field = solve(spec, spec.grid(cfg.nx, cfg.nt))
    stem = _stem(name, spec, cfg)
    p1 = _write(cfg, f"{stem}-solution.csv", field.to_csv())
    trace = norms(field)
    p2 = _write(cfg, f"{stem}-norms.csv", norms_csv(trace))
    print(f"solved {name} ({spec.kind.value}/{spec.bc.kind.value}, alpha={_g(spec.alpha)}, "
          f"nx={cfg.nx}, nt={cfg.nt}, scheme={field.scheme})")
    print(f"  ||u(T)||^2 = {_g(trace.l2_sq.values[-1])}")
    print(f"  wrote {p1}")
    print(f"  wrote {p2}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec, _, name = _problem(cfg)
    field = solve(spec, spec.grid(cfg.nx, cfg.nt))
    tol = DEFAULT_TOL if cfg.tol is None else cfg.tol
    rep = check_theorem(field, spec, constant=cfg.constant, tol=tol)
    stem = _stem(name, spec, cfg)
    path = _write(cfg, f"{stem}-{rep.name}.csv", rep.to_csv())
    ok = rep.passed
    print(f"{rep.name}: {'PASS' if rep.passed else 'FAIL'}")
    for key, value in rep.summary().items():
        print(f"  {key} = {value}")
    for note in rep.notes:
        print(f"  note: {note}")
    if "printed_lhs" in rep.extras:
        printed = rep.extras["printed_lhs"].values
        margin = rep.rhs.values - printed
        print(f"  printed-form min_margin = {_g(float(np.min(margin)))} (informational)")
    print(f"  wrote {path}")

    for label, res in check_auxiliary(field).items():
        if hasattr(res, "passed"):
            good, margin = res.passed, res.min_margin
            _write(cfg, f"{stem}-{label}.csv", res.to_csv())
        else:
            good, margin = res["passed"], res["min_margin"]
        ok &= good
        print(f"{label}: {'PASS' if good else 'FAIL'} (min_margin = {_g(margin)})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_converge(cfg: RunConfig) -> int:
    spec, exact, name = _problem(cfg)
    if exact is None:
        raise _InputError(f"{name} has no exact solution; add an [exact] section")
    rows = []
    nx, nt = cfg.nx, cfg.nt

    g0 = spec.grid(nx, nt)
    ref = exact(g0.x[None, :], g0.t[:, None])
    sanity = float(np.max(np.abs(ref - ref)))

    for _ in range(cfg.levels):
        g = spec.grid(nx, nt)
        field = solve(spec, g)
        err = field.values - exact(g.x[None, :], g.t[:, None])
        emax = float(np.max(np.abs(err)))
        el2 = float(np.max(np.sqrt(l2_sq(err, g.h))))
        rows.append((nx, nt, emax, el2))
        nx, nt = 2 * nx, 2 * nt

    omax = observed_orders([r[2] for r in rows])
    ol2 = observed_orders([r[3] for r in rows])
    lines = ["level, nx, nt, max_err, l2_err, order_max, order_l2"]
    lines.append(f"exact, {cfg.nx}, {cfg.nt}, {_g(sanity)}, {_g(sanity)}, , ")
    for i, (a, b, e1, e2) in enumerate(rows):
        o1 = _g(omax[i - 1]) if i else ""
        o2 = _g(ol2[i - 1]) if i else ""
        lines.append(f"{i}, {a}, {b}, {_g(e1)}, {_g(e2)}, {o1}, {o2}")
    text = "\n".join(lines) + "\n"
    path = _write(cfg, f"{name}-a{spec.alpha:g}-converge.csv", text)
    print(text, end="")
    final = float(omax[-1])
    ok = final >= cfg.floor and sanity == 0.0
    print(f"final observed order {_g(final)} {'>=' if ok else '<'} floor {_g(cfg.floor)}")
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_suite(cfg: RunConfig) -> int:
    resolve_selection(cfg.only)
    rows = run_suite(cfg.only, cfg.tol, cfg.out, echo=print)
    passed = sum(r.passed for r in rows)
    print(f"{passed}/{len(rows)} criteria passed")
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "converge": cmd_converge, "suite": cmd_suite}


# }}}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)

    def fail(code: int, msg: str) -> int:
        print(f"fracenergy: error: {msg}", file=sys.stderr)
        return code

    try:
        cfg = _config(ns)
        return COMMANDS[cfg.command](cfg)
    except HypothesisError as exc:
        for line in exc.report.summary().splitlines():
            print(line, file=sys.stderr)
        return fail(EXIT_INPUT, str(exc))
    except (ProblemFileError, _InputError, ValueError) as exc:
        return fail(EXIT_INPUT, str(exc))
    except KeyError as exc:
        return fail(EXIT_INPUT, exc.args[0] if exc.args else str(exc))
    except NumericalError as exc:
        return fail(EXIT_NUMERICAL, str(exc))
    except (ArithmeticError, FloatingPointError) as exc:
        return fail(EXIT_NUMERICAL, str(exc))
    except OSError as exc:
        return fail(EXIT_IO, str(exc))


if __name__ == "__main__":
    sys.exit(main())
