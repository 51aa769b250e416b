"""Command-line front end.

Exit codes: 0 success / assertion true, 1 assertion false (e.g. a candidate
is not a symmetry), 2 input or parse error, 3 numeric failure.  All errors
print one machine-parsable line ``ERROR <code>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import sys

from . import fileio, models
from .algebra import SingularMatrixError, ZeroDenominatorError
from .center import HomologicalSolveError, compute_center_manifold, reduce_to_center
from .expr import ExprError
from .numerics import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    NumericsError,
    flow_generator,
    integrate_adaptive,
    solution_invariance,
    write_csv,
)
from .odesys import split_by_names
from .symmetry import lemma4_check, lsc_residual

EXIT_OK = 0
EXIT_ASSERTION_FALSE = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_binding(chunks) -> dict[str, float]:
    binding: dict[str, float] = {}
    for chunk in chunks or []:
        for pair in chunk.split(","):
            pair = pair.strip()
            if not pair:
                continue
            if "=" not in pair:
                raise CliError(EXIT_INPUT_ERROR, f"bad parameter setting {pair!r}; use sym=value")
            name, _, value = pair.partition("=")
            try:
                binding[name.strip()] = float(value)
            except ValueError:
                raise CliError(EXIT_INPUT_ERROR, f"bad numeric value in {pair!r}") from None
    return binding


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_INPUT_ERROR, f"bad {what} {text!r}; expected comma-separated numbers") from None


def _parse_split(sys_, spec: str):
    if "|" in spec:
        center_part, _, hyp_part = spec.partition("|")
    else:
        center_part, hyp_part = spec, ""
    center = [s.strip() for s in center_part.split(",") if s.strip()]
    hyp = [s.strip() for s in hyp_part.split(",") if s.strip()]
    unknown = [s for s in center + hyp if s not in sys_.state_syms]
    if unknown:
        raise CliError(EXIT_INPUT_ERROR, f"split names {unknown} are not states of the system")
    if hyp:
        covered = set(center) | set(hyp)
        if covered != set(sys_.state_syms) or set(center) & set(hyp):
            raise CliError(EXIT_INPUT_ERROR, "split must partition the states exactly")
    if not center:
        raise CliError(EXIT_INPUT_ERROR, "split needs at least one center variable")
    return split_by_names(sys_, center)


def _load_system(path):
    try:
        return fileio.load_system(path)
    except (fileio.FileFormatError, ExprError, ValueError, OSError) as exc:
        raise CliError(EXIT_INPUT_ERROR, f"cannot load system {path}: {exc}") from exc


def _load_generator(path, sys_):
    try:
        return fileio.load_generator(path, sys_)
    except (fileio.FileFormatError, ExprError, ValueError, OSError) as exc:
        raise CliError(EXIT_INPUT_ERROR, f"cannot load generator {path}: {exc}") from exc


def _load_matrix(path, sys_):
    try:
        return fileio.load_matrix(path, sys_)
    except (fileio.FileFormatError, ExprError, ValueError, OSError) as exc:
        raise CliError(EXIT_INPUT_ERROR, f"cannot load matrix {path}: {exc}") from exc


def _print_matrix(label, m):
    print(f"{label}:")
    for i in range(m.rows):
        print("  [" + ", ".join(str(e) for e in m.row(i)) + "]")


def cmd_analyze(args) -> int:
    sys_ = _load_system(args.system)
    jac = sys_.jacobian_origin()
    print(f"states: {', '.join(sys_.state_syms)}")
    print(f"params: {', '.join(sys_.param_syms) or '(none)'}")
    _print_matrix("jacobian at origin", jac)
    _, nonlinear = sys_.linear_nonlinear_split()
    print("nonlinear residual:")
    for name, g in zip(sys_.state_syms, nonlinear):
        print(f"  {name}': {g}")
    if args.split is None:
        return EXIT_OK
    split = _parse_split(sys_, args.split)
    samples = [_parse_binding([p]) for p in (args.params or [])]
    report = sys_.check_normal_form(split, samples=samples, tol_eig=args.tol_eig)
    _print_matrix("center block", split.a_center)
    _print_matrix("hyperbolic block", split.a_hyperbolic)
    for sample in report.eigen_samples:
        print(
            f"eigenvalues at {sample.binding}: center {sample.center_eigenvalues} "
            f"hyperbolic {sample.hyperbolic_eigenvalues} -> {'ok' if sample.ok else 'VIOLATION'}"
        )
    if report.passed:
        print("normal form: PASS")
        return EXIT_OK
    print("normal form: FAIL")
    for v in report.violations():
        print(f"  {v}")
    return EXIT_ASSERTION_FALSE


def cmd_transform(args) -> int:
    sys_ = _load_system(args.system)
    matrix = _load_matrix(args.matrix, sys_)
    names = [s.strip() for s in args.names.split(",")] if args.names else None
    try:
        new_sys = sys_.change_coordinates(matrix, names)
    except SingularMatrixError as exc:
        raise CliError(EXIT_INPUT_ERROR, f"transform matrix is singular: {exc}") from exc
    if args.out:
        fileio.save_system(new_sys, args.out)
        print(f"wrote {args.out}")
    else:
        fileio.save_system(new_sys, sys.stdout)
    return EXIT_OK


def cmd_center_manifold(args) -> int:
    sys_ = _load_system(args.system)
    split = _parse_split(sys_, args.split)
    report = sys_.check_normal_form(split)
    if not report.passed:
        raise CliError(
            EXIT_INPUT_ERROR,
            "system is not in normal form for this split: " + "; ".join(report.violations()),
        )
    try:
        h = compute_center_manifold(sys_, split, args.order)
    except HomologicalSolveError as exc:
        raise CliError(EXIT_NUMERIC_ERROR, f"homological solve failed: {exc}") from exc
    if h.is_zero:
        print(f"h = 0 through order {args.order}")
    else:
        vanish = h.vanishing_degrees()
        if vanish:
            print(f"h vanishes at degrees {vanish} (nonzero elsewhere)")
        print("h map:")
    for name, expr_text in h.as_string_map().items():
        print(f"  {name} = {expr_text}")
    reduced = reduce_to_center(sys_, split, h)
    print("reduced system:")
    for name, f in zip(reduced.state_syms, reduced.rhs):
        print(f"  {name}' = {f}")
    if args.out_map:
        fileio.save_manifold_map(h.as_string_map(), args.out_map)
        print(f"wrote {args.out_map}")
    if args.out_reduced:
        fileio.save_system(reduced, args.out_reduced)
        print(f"wrote {args.out_reduced}")
    return EXIT_OK


def cmd_check_symmetry(args) -> int:
    sys_ = _load_system(args.system)
    all_pass = True
    for path in args.generator:
        gen = _load_generator(path, sys_)
        report = lsc_residual(gen, sys_)
        if report.is_symmetry:
            print(f"PASS {path}")
        else:
            all_pass = False
            print(f"FAIL {path}")
            for name, r in zip(sys_.state_syms, report.residuals):
                if not r.is_zero:
                    print(f"  residual[{name}] = {r}")
    return EXIT_OK if all_pass else EXIT_ASSERTION_FALSE


def cmd_lemma4(args) -> int:
    sys_ = _load_system(args.system)
    split = _parse_split(sys_, args.split)
    gen = _load_generator(args.generator, sys_)
    try:
        h = compute_center_manifold(sys_, split, args.order)
    except HomologicalSolveError as exc:
        raise CliError(EXIT_NUMERIC_ERROR, f"homological solve failed: {exc}") from exc
    report = lemma4_check(gen, sys_, split, h)
    if report.invariant:
        print(f"invariant: the generator leaves the center manifold invariant through order {args.order}")
        return EXIT_OK
    print("NOT invariant; residuals:")
    hyp_names = [sys_.state_syms[i] for i in split.hyperbolic_indices]
    for name, r in zip(hyp_names, report.residuals):
        print(f"  psi[{name}] - (Dh phi)[{name}] = {r}")
    return EXIT_ASSERTION_FALSE


def cmd_simulate(args) -> int:
    if bool(args.model) == bool(args.system):
        raise CliError(EXIT_INPUT_ERROR, "exactly one of --model or --system is required")
    if args.model:
        try:
            scenario = models.scenario_by_name(args.model)
        except ValueError as exc:
            raise CliError(EXIT_INPUT_ERROR, str(exc)) from exc
        sys_ = models.full_model()
        binding = dict(scenario.binding)
        binding.update(_parse_binding(args.params))
        ic = list(scenario.ic)
        t_end = args.t_end if args.t_end is not None else scenario.t_end
    else:
        sys_ = _load_system(args.system)
        binding = _parse_binding(args.params)
        if args.ic is None:
            raise CliError(EXIT_INPUT_ERROR, "--ic is required with --system")
        ic = _parse_floats(args.ic, "initial condition")
        t_end = args.t_end if args.t_end is not None else 50.0
    if args.ic is not None and args.model:
        ic = _parse_floats(args.ic, "initial condition")
    if len(ic) != sys_.dim:
        raise CliError(EXIT_INPUT_ERROR, f"initial condition needs {sys_.dim} entries")
    traj = integrate_adaptive(sys_, binding, ic, t_end, rtol=args.rtol, atol=args.atol)
    final = ", ".join(f"{n}={_fmt(v)}" for n, v in zip(sys_.state_syms, traj.final_state()))
    print(
        f"integrated to t={_fmt(traj.t_end)} in {traj.accepted} steps "
        f"({traj.rejected} rejected); final: {final}"
    )
    if args.model:
        shape = models.check_scenario_shape(models.scenario_by_name(args.model), traj)
        for line in shape.details:
            print(f"  {line}")
    if args.out:
        write_csv(traj, args.out, samples=args.samples)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_flow(args) -> int:
    sys_ = _load_system(args.system)
    gen = _load_generator(args.generator, sys_)
    binding = _parse_binding(args.params)
    point = _parse_floats(args.point, "point")
    if len(point) != sys_.dim + 1:
        raise CliError(EXIT_INPUT_ERROR, f"--point needs t plus {sys_.dim} state entries")
    t_new, y_new = flow_generator(
        gen,
        sys_.state_syms,
        binding,
        (point[0], point[1:]),
        args.gamma,
        substeps=args.substeps,
        rtol=args.rtol,
        atol=args.atol,
    )
    parts = ", ".join(f"{n}={_fmt(v)}" for n, v in zip(sys_.state_syms, y_new))
    print(f"gamma={_fmt(args.gamma)}: t={_fmt(t_new)}, {parts}")
    return EXIT_OK


def cmd_invariance(args) -> int:
    sys_ = _load_system(args.system)
    gen = _load_generator(args.generator, sys_)
    binding = _parse_binding(args.params)
    ic = _parse_floats(args.ic, "initial condition")
    if len(ic) != sys_.dim:
        raise CliError(EXIT_INPUT_ERROR, f"initial condition needs {sys_.dim} entries")
    report = solution_invariance(
        sys_,
        gen,
        binding,
        ic,
        args.gamma,
        t_end=args.t_end,
        rtol=args.rtol,
        atol=args.atol,
    )
    if not report.lsc_is_symmetry:
        print("note: generator fails the linearized symmetry condition")
    if report.monotone_prefix_only:
        print(
            f"note: transformed times not strictly increasing; compared the first "
            f"{report.compared_points} points only"
        )
    print(f"max_rel_deviation = {_fmt(report.max_rel_deviation)} over {report.compared_points} points")
    if args.tol is None:
        return EXIT_OK
    if report.passes(args.tol):
        print(f"PASS (tolerance {_fmt(args.tol)})")
        return EXIT_OK
    print(f"FAIL (tolerance {_fmt(args.tol)})")
    return EXIT_ASSERTION_FALSE


def cmd_model_export(args) -> int:
    try:
        written = fileio.export_case(args.case, args.dir)
    except ValueError as exc:
        raise CliError(EXIT_INPUT_ERROR, str(exc)) from exc
    for name in written:
        print(f"wrote {args.dir}/{name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmlie",
        description="Center-manifold and Lie point-symmetry analysis of polynomial ODE systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_numeric_flags(p, t_end_default=None):
        p.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
        p.add_argument("--atol", type=float, default=DEFAULT_ATOL)
        p.add_argument("--t-end", dest="t_end", type=float, default=t_end_default)

    p = sub.add_parser("analyze", help="Jacobian, split blocks, normal-form report")
    p.add_argument("--system", required=True)
    p.add_argument("--split", help="center|hyperbolic state names, e.g. u|v,w")
    p.add_argument("--params", action="append", help="sample binding sym=value,... (repeatable)")
    p.add_argument("--tol-eig", type=float, default=1e-9)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("transform", help="rewrite a system under y = T z")
    p.add_argument("--system", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--names", help="comma-separated new state names")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("center-manifold", help="compute h and the reduced system")
    p.add_argument("--system", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--out-map")
    p.add_argument("--out-reduced")
    p.set_defaults(func=cmd_center_manifold)

    p = sub.add_parser("check-symmetry", help="verify generators against a system")
    p.add_argument("--system", required=True)
    p.add_argument("--generator", action="append", required=True)
    p.set_defaults(func=cmd_check_symmetry)

    p = sub.add_parser("lemma4", help="center-manifold invariance of a generator")
    p.add_argument("--system", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_lemma4)

    p = sub.add_parser("simulate", help="integrate a built-in scenario or a system file")
    p.add_argument("--model", help="scenario name, e.g. paper-G0")
    p.add_argument("--system")
    p.add_argument("--params", action="append")
    p.add_argument("--ic")
    p.add_argument("--samples", type=int)
    p.add_argument("--out")
    add_numeric_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("flow", help="transport a point along a generator's flow")
    p.add_argument("--system", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--point", required=True, help="t,y1,y2,...")
    p.add_argument("--params", action="append")
    p.add_argument("--substeps", type=int, default=1)
    p.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    p.add_argument("--atol", type=float, default=DEFAULT_ATOL)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("invariance", help="does the flow map solutions to solutions?")
    p.add_argument("--system", required=True)
    p.add_argument("--generator", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--ic", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--params", action="append")
    add_numeric_flags(p, t_end_default=50.0)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("model", help="built-in corpus utilities")
    msub = p.add_subparsers(dest="model_command", required=True)
    pe = msub.add_parser("export", help="write a built-in case as JSON files")
    pe.add_argument("--case", required=True, help="g0 or gnz")
    pe.add_argument("--dir", required=True)
    pe.set_defaults(func=cmd_model_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return exc.code
    except (ExprError, fileio.FileFormatError) as exc:
        print(f"ERROR {EXIT_INPUT_ERROR}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (NumericsError, ZeroDenominatorError) as exc:
        print(f"ERROR {EXIT_NUMERIC_ERROR}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    except ValueError as exc:
        print(f"ERROR {EXIT_INPUT_ERROR}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
