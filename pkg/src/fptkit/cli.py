"""Command-line interface.

Exit status is 0 on success, 2 for domain errors (bad inputs, horizons,
poles) and 3 for accuracy failures. Errors and diagnostics go to stderr as
one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import closedform, identities, specfun, volterra
from .boundary import TransformParams, apply_transform, from_spec, transform_density
from .errors import AccuracyError, DomainError, FptError
from .grid import FptSolution, TimeGrid
from .montecarlo import mc_fpt

EXIT_OK, EXIT_DOMAIN, EXIT_ACCURACY = 0, 2, 3


class _Ctx:
    def __init__(self, args):
        self.quiet = args.quiet
        self.json_diag = args.json_diagnostics

    def diag(self, level: str, **fields):
        if level == "info" and (self.quiet or not self.json_diag):
            return
        print(json.dumps({"level": level, **fields}, default=str), file=sys.stderr)

    def out(self, text: str):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(x) -> str:
    return f"{float(x):.15g}"


def _read_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise DomainError(f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from None


def _load_boundary(path: str):
    return from_spec(_read_json(path))


def _load_solution(path: str) -> FptSolution:
    if not Path(path).is_file():
        raise DomainError(f"file not found: {path}")
    return FptSolution.from_csv(path)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise DomainError(f"cannot parse complex number {text!r}") from None


def _parse_params(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise DomainError(f"parameter {item!r} must look like name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise DomainError(f"parameter {k!r}: {v!r} is not a number") from None
    return out


def _need(params: dict, *names: str) -> list[float]:
    missing = [n for n in names if n not in params]
    if missing:
        raise DomainError(f"missing parameters: {', '.join(missing)}")
    return [params[n] for n in names]


def _times(text: str | None, horizon: float) -> list[float]:
    if text:
        return [float(v) for v in text.split(",")]
    return [horizon / 4, horizon / 2, horizon]


def cmd_solve(args, ctx: _Ctx) -> int:
    b = _load_boundary(args.boundary)
    grid = TimeGrid.uniform(args.horizon, args.steps)
    t0 = time.perf_counter()
    if args.p == "second-kind":
        sol = volterra.solve_second_kind(b, grid)
    else:
        sol = volterra.solve_first_kind(int(args.p), b, grid)
    sol.to_csv(args.out)
    ctx.diag("info", event="solve", seconds=round(time.perf_counter() - t0, 6), rows=grid.steps + 1,
             F_T=float(sol.cdf[-1]))
    if sol.accuracy_warning:
        ctx.diag("error", kind="accuracy", message="solution flagged: negative density or coarse grid",
                 out=args.out)
        return EXIT_ACCURACY
    return EXIT_OK


def cmd_check(args, ctx: _Ctx) -> int:
    b = _load_boundary(args.boundary)
    sol = _load_solution(args.solution)
    eq = args.equation
    rows = ["t,residual,lhs,relative"]
    for t in _times(args.times, sol.grid.horizon):
        if eq == "case4":
            r = volterra.residual_case4(b, sol, t)
        elif eq == "case5":
            r = volterra.residual_case5(b, sol, t)
        elif eq.startswith("widder:"):
            atoms = _read_json(eq.split(":", 1)[1])
            y = args.y if args.y is not None else float(b(t)) - 1.0
            r = volterra.residual_widder(atoms, b, sol, t, y)
        elif eq.startswith("p:"):
            p = float(eq[2:])
            if args.y is None:
                r = volterra.residual_family(volterra.KernelSpec(p, "limit"), b, sol, t)
            else:
                r = volterra.residual_family(volterra.KernelSpec(p, "offset"), b, sol, t, args.y)
        else:
            raise DomainError(f"unknown equation {eq!r}")
        rows.append(",".join(_fmt(v) for v in (t, r.value, r.lhs, r.relative)))
    ctx.out("\n".join(rows))
    return EXIT_OK


def cmd_fredholm(args, ctx: _Ctx) -> int:
    b = _load_boundary(args.boundary)
    sol = _load_solution(args.solution)
    probe = identities.FredholmProbe(_parse_complex(args.alpha), args.horizon, args.tail_policy)
    r = identities.fredholm_residual(b, sol, probe)
    ctx.out("residual_re,residual_im,tail_bound,tail_mass\n"
            + ",".join(_fmt(v) for v in (r.residual.real, r.residual.imag, r.tail_bound, r.tail_mass)))
    return EXIT_OK


def cmd_closed_form(args, ctx: _Ctx) -> int:
    params = _parse_params(args.params)
    fam = args.family
    if fam == "sqrt-mellin":
        if not args.solution:
            raise DomainError("sqrt-mellin needs --solution")
        x, p, q = _need(params, "x", "p", "q")
        m = closedform.sqrt_mellin_check(x, p, q, _load_solution(args.solution))
        ctx.out("x,lhs,rhs,residual,relative\n" + ",".join(_fmt(v) for v in (x, m.lhs, m.rhs, m.value, m.relative)))
        return EXIT_OK
    if args.times:
        times = [float(v) for v in args.times.split(",")]
    elif args.solution:
        times = list(_load_solution(args.solution).t[1:])
    else:
        raise DomainError("give --times or --solution")
    rows = []
    if fam == "reflection":
        (c,) = _need(params, "c")
        rows = ["t,F,f"] + [f"{_fmt(t)},{_fmt(closedform.reflection_cdf(c, t))},"
                            f"{_fmt(closedform.reflection_density(c, t))}" for t in times]
    elif fam == "bachelier-levy":
        a, slope = _need(params, "a", "slope")
        rows = ["t,f"] + [f"{_fmt(t)},{_fmt(closedform.bachelier_levy_density(a, slope, t))}" for t in times]
    elif fam == "quadratic":
        p, q = _need(params, "p", "q")
        cfg = closedform.LaplaceInversionConfig(order=int(params.get("order", 14)),
                                                check_order=int(params.get("check_order", 12)))
        rows = ["t,f"] + [f"{_fmt(t)},{_fmt(closedform.quadratic_density(t, p, q, cfg))}" for t in times]
    else:
        raise DomainError(f"unknown family {fam!r}")
    ctx.out("\n".join(rows))
    return EXIT_OK


def cmd_mc(args, ctx: _Ctx) -> int:
    b = _load_boundary(args.boundary)
    grid = TimeGrid.uniform(args.horizon, args.steps)
    t0 = time.perf_counter()
    est = mc_fpt(b, grid, args.paths, args.seed, bridge=not args.no_bridge)
    est.to_csv(args.out)
    ctx.diag("info", event="mc", seconds=round(time.perf_counter() - t0, 6), paths=args.paths)
    return EXIT_OK


def cmd_specfun(args, ctx: _Ctx) -> int:
    vals = [float(v) for v in args.args]
    fn = args.fn
    if fn in ("pcf", "hermite"):
        if len(vals) < 2:
            raise DomainError(f"{fn} needs an order followed by one or more arguments")
        order, zs = vals[0], vals[1:]
        if fn == "pcf":
            res = [specfun.pcf_d(order, z) for z in zs]
        else:
            if order != int(order):
                raise DomainError("hermite order must be an integer")
            res = [specfun.hermite(int(order), z) for z in zs]
    elif fn == "airy":
        res = [specfun.airy_ai(x) for x in vals]
    elif fn == "kq":
        res = [specfun.bessel_k_quarter(w) for w in vals]
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown function {fn}")
    ctx.out("\n".join(_fmt(v) for v in res))
    return EXIT_OK


def cmd_transform(args, ctx: _Ctx) -> int:
    b = _load_boundary(args.boundary)
    sol = _load_solution(args.solution)
    params = TransformParams(args.alpha, args.gamma, args.beta)
    grid = TimeGrid.uniform(args.horizon, args.steps or sol.grid.steps) if args.horizon else None
    out = transform_density(sol, b, params, grid)
    out.to_csv(args.out)
    if args.boundary_out:
        Path(args.boundary_out).write_text(json.dumps(apply_transform(b, params).spec, indent=2))
    if out.accuracy_warning:
        ctx.diag("error", kind="accuracy", message="transformed density flagged", out=args.out)
        return EXIT_ACCURACY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fptkit", description="First-passage times of Brownian motion "
                                 "to curved boundaries.")
    ap.add_argument("--quiet", action="store_true", help="suppress informational output")
    ap.add_argument("--json-diagnostics", action="store_true", help="emit info records as JSON on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a Volterra equation for the density")
    s.add_argument("--boundary", required=True)
    s.add_argument("--p", required=True, choices=["-1", "0", "second-kind"])
    s.add_argument("--horizon", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check", help="residuals of the integral-equation family")
    s.add_argument("--boundary", required=True)
    s.add_argument("--solution", required=True)
    s.add_argument("--equation", required=True, help="p:<val> | case4 | case5 | widder:atoms.json")
    s.add_argument("--y", type=float, help="level for offset mode (default: limit mode)")
    s.add_argument("--times", help="comma-separated grid times (default T/4,T/2,T)")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("fredholm", help="Fredholm identity residual")
    s.add_argument("--boundary", required=True)
    s.add_argument("--solution", required=True)
    s.add_argument("--alpha", required=True, help='real or complex, e.g. "1.0+0.5i"')
    s.add_argument("--horizon", type=float)
    s.add_argument("--tail-policy", default="bound-only", choices=list(identities.TAIL_POLICIES))
    s.set_defaults(func=cmd_fredholm)

    s = sub.add_parser("closed-form", help="closed-form oracles")
    s.add_argument("--family", required=True, choices=["reflection", "bachelier-levy", "quadratic", "sqrt-mellin"])
    s.add_argument("--params", nargs="*", default=[], help="name=value pairs")
    s.add_argument("--solution")
    s.add_argument("--times")
    s.set_defaults(func=cmd_closed_form)

    s = sub.add_parser("mc", help="Monte Carlo estimate of the distribution")
    s.add_argument("--boundary", required=True)
    s.add_argument("--horizon", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--paths", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--no-bridge", action="store_true")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("specfun", help="evaluate special functions")
    ssub = s.add_subparsers(dest="action", required=True)
    e = ssub.add_parser("eval")
    e.add_argument("--fn", required=True, choices=["pcf", "airy", "hermite", "kq"])
    e.add_argument("--args", nargs="+", required=True)
    e.set_defaults(func=cmd_specfun)

    s = sub.add_parser("transform", help="transform a solution to the mapped boundary")
    s.add_argument("--boundary", required=True)
    s.add_argument("--solution", required=True)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--horizon", type=float, help="target horizon (default: image of the solved one)")
    s.add_argument("--steps", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--boundary-out", help="write the transformed boundary spec here")
    s.set_defaults(func=cmd_transform)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    ctx = _Ctx(args)
    try:
        return args.func(args, ctx)
    except AccuracyError as exc:
        ctx.diag("error", kind="accuracy", command=args.command, message=str(exc))
        return EXIT_ACCURACY
    except (DomainError, ValueError) as exc:
        ctx.diag("error", kind="domain", command=args.command, message=str(exc))
        return EXIT_DOMAIN
    except (FptError, OSError) as exc:
        ctx.diag("error", kind=type(exc).__name__, command=args.command, message=str(exc))
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
