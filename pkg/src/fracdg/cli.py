"""Command-line driver: single solves, convergence studies, self tests."""

from __future__ import annotations

import argparse
import sys

from .configfile import read_key_value_file
from .errors import ArgumentContractError, CoefficientError, OutputError, SolverError
from .norms import beta_weight, error_norms
from .problems import registry_lookup
from .selftest import run_selftest
from .stepper import (
    NEWTON_MAX_OUTER,
    NEWTON_TOL,
    SemilinearProblemSpec,
    solve_linear,
    solve_semilinear,
)
from .study import (
    NORM_NAMES,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    emit_outputs,
    resolve_N,
    resolve_r,
    run_convergence,
)

EXIT_ARGUMENT = 2
EXIT_COEFFICIENT = 3
EXIT_SOLVER = 4
EXIT_IO = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdg",
        description="Fractional advection-diffusion-reaction solver lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one problem and write its outputs")
    solve.add_argument("--problem", required=True, help="registry id or config path")
    solve.add_argument("--alpha", type=float, required=True, help="fractional order in (0,1)")
    solve.add_argument("--M", type=int, required=True, help="number of spatial elements")
    solve.add_argument("--N", default="coupled", help="time levels, or 'coupled' for M-matched")
    solve.add_argument("--k", type=int, default=1, help="polynomial degree (default 1)")
    solve.add_argument("--r", default="optimal", help="mesh grading exponent, or 'optimal' for (2-a)/a")
    solve.add_argument("--sigma", type=float, default=1.0, help="penalty parameter (default 1)")
    solve.add_argument("--out", default=".", help="output directory (default current)")

    conv = sub.add_parser("converge", help="run a convergence study from a config file")
    conv.add_argument("--config", required=True, help="key=value config path")

    sub.add_parser("selftest", help="run the built-in property suites")
    return parser


def _parse_n(text: str) -> object:
    if text == "coupled":
        return "coupled"
    try:
        value = int(text)
    except ValueError:
        raise ArgumentContractError(f"--N expects an integer or 'coupled', got {text!r}") from None
    if value < 1:
        raise ArgumentContractError(f"--N must be positive, got {value}")
    return value


def _parse_r(text: str) -> object:
    if text == "optimal":
        return "optimal"
    try:
        return float(text)
    except ValueError:
        raise ArgumentContractError(f"--r expects a number or 'optimal', got {text!r}") from None


def _cmd_solve(args) -> int:
    spec = registry_lookup(args.problem, args.alpha)
    r = resolve_r(args.alpha, _parse_r(args.r))
    n_policy = _parse_n(args.N)
    N = resolve_N(args.M, args.alpha, ("coupled" if n_policy == "coupled" else (n_policy,)), 0)

    if isinstance(spec, SemilinearProblemSpec):
        result = solve_semilinear(spec, args.M, N, args.k, r, args.sigma,
                                  tol=NEWTON_TOL, max_outer=NEWTON_MAX_OUTER)
        print(f"newton iterations: {result.newton_iterations}")
    else:
        result = solve_linear(spec, args.M, N, args.k, r, args.sigma)

    beta = beta_weight(spec, result.space, result.l1)
    exact_pair = (lambda y: spec.exact(y, spec.T), lambda y: spec.exact_dy(y, spec.T))
    report = error_norms(result.final(), exact_pair, result.space, beta)

    table = ResultTable(metadata={"problem": spec.name})
    for name in NORM_NAMES:
        table.rows.append(ResultRow(
            problem=spec.name, alpha=args.alpha, M=args.M, N=N, k=args.k, r=r,
            sigma=args.sigma, reduction="final-time", norm=name,
            error=report.value(name), order=None,
        ))
    paths = emit_outputs(
        table, result, args.out, csv_name="norms.csv",
        write_surface=True, write_curve=True, make_figures=True,
        exact_final=lambda y: spec.exact(y, spec.T),
    )
    print(f"problem {spec.name}: alpha={args.alpha:g} M={args.M} N={N} k={args.k} r={r:g}")
    for name in NORM_NAMES:
        print(f"  {name:9s} error: {report.value(name):.6e}")
    for label, path in sorted(paths.items()):
        print(f"wrote {label}: {path}")
    return 0


_CONFIG_KEYS = {
    "problem", "alpha", "M", "N", "k", "r", "sigma", "norms",
    "reduction", "out", "newton_tol", "newton_max_outer",
}


def _config_to_experiment(params: dict) -> tuple:
    unknown = set(params) - _CONFIG_KEYS
    if unknown:
        raise ArgumentContractError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "problem" not in params:
        raise ArgumentContractError("config is missing the problem key")
    if "alpha" not in params or "M" not in params:
        raise ArgumentContractError("config needs alpha and M lists")

    def floats(text):
        try:
            return tuple(float(tok) for tok in text.split())
        except ValueError:
            raise ArgumentContractError(f"expected numbers, got {text!r}") from None

    def ints(text):
        try:
            return tuple(int(tok) for tok in text.split())
        except ValueError:
            raise ArgumentContractError(f"expected integers, got {text!r}") from None

    n_text = params.get("N", "coupled")
    n_policy = n_text if n_text in ("coupled", "equal") else ints(n_text)
    r_text = params.get("r", "optimal")

    config = ExperimentConfig(
        problem=params["problem"],
        alphas=floats(params["alpha"]),
        Ms=ints(params["M"]),
        k=int(params.get("k", "1")),
        r_policy=_parse_r(r_text),
        n_policy=n_policy,
        sigma=float(params.get("sigma", "1.0")),
        norms=tuple(params.get("norms", "l2 linf dg discrete").split()),
        reduction=params.get("reduction", "final-time"),
        newton_tol=float(params.get("newton_tol", NEWTON_TOL)),
        newton_max_outer=int(params.get("newton_max_outer", NEWTON_MAX_OUTER)),
    )
    return config, params.get("out", ".")


def _cmd_converge(args) -> int:
    config, out_dir = _config_to_experiment(read_key_value_file(args.config))
    table = run_convergence(config)
    paths = emit_outputs(table, None, out_dir, make_figures=True)
    print(f"problem {config.problem}: {len(table.rows)} result rows")
    for label, path in sorted(paths.items()):
        print(f"wrote {label}: {path}")
    return 0


def _cmd_selftest(_args) -> int:
    results = run_selftest()
    failed = 0
    for check in results:
        status = "ok  " if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return EXIT_SOLVER
    print(f"all {len(results)} checks passed")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGUMENT

    handlers = {"solve": _cmd_solve, "converge": _cmd_converge, "selftest": _cmd_selftest}
    try:
        return handlers[args.command](args)
    except ArgumentContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except CoefficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COEFFICIENT
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
