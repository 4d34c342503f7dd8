"""
Command-line front end.

Exit codes: 0 success, 1 no convergence, 2 input validation, 3 collision,
4 verification-gate failure.
"""

import argparse
import csv
import logging
import os
import sys
import time
from dataclasses import replace
from math import comb

import numpy as np

from . import __version__
from .analysis import (
    hessian_composed,
    hessian_f,
    radial_eigencheck,
    spectra_correspondence,
    spectrum,
    sphere_restricted,
)
from .cochain import Masses, OneCochain, coboundary0, mass_norm_c1, project_pm, project_to_x
from .errors import CollisionError, ConvergenceError, DegenerateConfigurationError
from .fileio import (
    CochainFile,
    FileFormatError,
    ProblemFile,
    SolutionFile,
    SpectrumFile,
    emit,
    read,
    write,
)
from .gallery import GALLERY, build
from .geometry import corollary_checks, triple_q
from .potential import PotentialParams, cc_residual, lambda_of
from .solvers import (
    CCSolution,
    Method,
    SolveSettings,
    as_solution,
    moulton_orderings,
    multistart_solve,
    rescale_to_lambda,
    solve,
    solve_moulton,
)

log = logging.getLogger("centralconf")

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 1
EXIT_INPUT = 2
EXIT_COLLISION = 3
EXIT_VERIFY = 4

OUTPUT_ENV = "CENTRALCONF_OUTPUT_DIR"
DEFAULT_SOLVE_TOL = 1e-11
DEFAULT_VERIFY_TOL = 1e-9
GALLERY_TOL = 1e-10


class InputError(ValueError):
    pass


# -- helpers -------------------------------------------------------------------


def _parse_masses(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--masses must be a comma-separated list of numbers, got {text!r}") from None


def _problem_from_args(args, default_d=2):
    if getattr(args, "input", None):
        prob = read(args.input)
        if isinstance(prob, SolutionFile):
            prob = prob.problem
        if not isinstance(prob, ProblemFile):
            raise InputError(f"{args.input} is not a problem file")
        return prob
    masses = _parse_masses(args.masses) if args.masses else None
    n = args.n if args.n is not None else (len(masses) if masses else None)
    if n is None:
        raise InputError("give --n, --masses or --input")
    if masses is None:
        masses = [1.0] * n
    d = args.d if args.d is not None else default_d
    return ProblemFile(n=n, d=d, alpha=args.alpha, masses=masses, rng_seed=args.seed or 0)


def _masses(prob, args):
    m = Masses(prob.masses)
    user_given = bool(getattr(args, "masses", None) or getattr(args, "input", None))
    if user_given and abs(m.scale - 1.0) > 1e-12:
        log.warning("masses sum to %r; normalized to 1 (scale recorded)", m.scale)
    return m


def _output_dir(args):
    out = getattr(args, "output", None) or os.environ.get(OUTPUT_ENV)
    if out:
        os.makedirs(out, exist_ok=True)
    return out


def _emit_all(named, args):
    """Write ``(filename, object)`` pairs to the output directory, or print them."""
    out = _output_dir(args)
    for name, obj in named:
        if out:
            write(obj, os.path.join(out, name))
        else:
            sys.stdout.write(emit(obj))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _positions_csv(path, q):
    q = np.asarray(q)
    _write_csv(path, ["body"] + [f"x{k}" for k in range(q.shape[1])], [[j, *q[j]] for j in range(q.shape[0])])


def _spectrum_csv(path, ev):
    _write_csv(path, ["index", "eigenvalue"], [[k, v] for k, v in enumerate(ev)])


def _solution_file(prob, sol, m, timing=None):
    op = sphere_restricted(hessian_f(sol.configuration, m, sol.params), sol.configuration)
    rep = spectrum(op)
    return SolutionFile(
        problem=prob,
        configuration=sol.configuration.tolist(),
        lam=sol.lam,
        residual_norm=sol.residual_norm,
        morse_index=rep.morse_index,
        spectrum=rep.eigenvalues.tolist(),
        classification=sorted(sol.classification),
        method=sol.method.value,
        iterations=sol.iterations,
        label=sol.label,
        mass_scale=m.scale,
        timing=timing,
    )


def _summary(sf):
    tags = ",".join(sf.classification) or "-"
    return (
        f"{sf.label or '-':>12}  lambda={sf.lam:+.12g}  residual={sf.residual_norm:.3e}  "
        f"morse={sf.morse_index}  tags={tags}"
    )


def _emit_solutions(prob, sols, m, args, prefix="solution", timing=None):
    files = [_solution_file(prob, s, m, timing) for s in sols]
    named = [(f"{prefix}_{k:03d}.json", sf) for k, sf in enumerate(files)]
    _emit_all(named, args)
    out = _output_dir(args)
    if out and args.csv:
        for k, sf in enumerate(files):
            _positions_csv(os.path.join(out, f"{prefix}_{k:03d}_positions.csv"), sf.configuration)
            _spectrum_csv(os.path.join(out, f"{prefix}_{k:03d}_spectrum.csv"), sf.spectrum)
    for sf in files:
        print(_summary(sf), file=sys.stderr)
    return files


def _load_configuration(path):
    """Configuration, masses and alpha from a solution or positions file."""
    obj = read(path)
    if isinstance(obj, SolutionFile):
        return np.array(obj.configuration), obj.problem
    if isinstance(obj, ProblemFile):
        if obj.positions is None:
            raise InputError(f"{path} has no positions to verify")
        return np.array(obj.positions), obj
    raise InputError(f"{path} is neither a solution nor a positions file")


# -- subcommands ----------------------------------------------------------------


def cmd_solve(args):
    prob = _problem_from_args(args)
    m = _masses(prob, args)
    p = PotentialParams(prob.alpha)
    settings = dict(prob.settings)
    method = args.method or settings.get("method", Method.NEWTON.value)
    tol = args.tol if args.tol is not None else settings.get("residualTolerance", DEFAULT_SOLVE_TOL)
    starts = args.starts if args.starts is not None else settings.get("starts", 20)
    max_it = settings.get("maxIterations", 200 if method != Method.FIXED_POINT.value else 5000)
    seed = args.seed if args.seed is not None else prob.rng_seed
    s = SolveSettings(method=method, residual_tolerance=tol, max_iterations=max_it, rng_seed=seed)
    prob = replace(
        prob,
        rng_seed=seed,
        settings={"method": s.method.value, "residualTolerance": tol, "maxIterations": max_it, "starts": starts},
    )
    t0 = time.perf_counter()
    if prob.positions is not None:
        try:
            sols = [solve(np.array(prob.positions), m, p, s)]
        except ConvergenceError as exc:
            print(f"no convergence: {exc} (best residual {exc.residual_norm:.3e})", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
    else:
        diag = []
        sols = multistart_solve(prob.n, prob.d, m, p, s, starts=starts, diagnostics=diag)
        for k, msg in diag:
            log.info("start %d: %s", k, msg)
    timing = time.perf_counter() - t0 if args.timing else None
    if not sols:
        print(f"no start converged out of {starts}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    _emit_solutions(prob, sols, m, args, timing=timing)
    return EXIT_OK


def _verify_report(q, prob, tol, abs_tol=False):
    m = Masses(prob.masses)
    p = PotentialParams(prob.alpha)
    res = cc_residual(q, m, p)
    lam = lambda_of(q, m, p)
    measure = mass_norm_c1(res.cochain, m) if abs_tol else res.norm
    lines = [
        f"n={prob.n} d={prob.d} alpha={prob.alpha!r}",
        f"lambda         {lam!r}",
        f"residualNorm   {res.norm:.6e}" + (f"  (absolute {measure:.6e})" if abs_tol else ""),
        "triples (i j k)   |Q_ijk|/scale   cross/scale   class",
    ]
    n = q.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                tr = triple_q(q, (i, j, k), p)
                lines.append(
                    f"  {i} {j} {k}         {tr.magnitude / tr.scale:.3e}       "
                    f"{tr.cross / tr.scale:.3e}     {tr.classification.value}"
                )
    for chk in corollary_checks(q):
        status = "PASS" if chk.passed else "FAIL"
        extra = f" ({chk.detail})" if chk.detail else ""
        applies = "" if chk.applicable else " [not applicable]"
        lines.append(f"[{status}] {chk.name} deviation={chk.deviation:.3e}{applies}{extra}")
    ok = measure <= tol
    lines.append(f"{'PASS' if ok else 'FAIL'}: residual {measure:.6e} {'<=' if ok else '>'} tolerance {tol:g}")
    return ok, lines, lam, res.norm


def cmd_verify(args):
    path = args.path or args.input
    if not path:
        raise InputError("verify needs a file")
    q, prob = _load_configuration(path)
    tol = args.tol if args.tol is not None else DEFAULT_VERIFY_TOL
    ok, lines, _, _ = _verify_report(q, prob, tol, args.abs_tol)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_spectrum(args):
    path = args.path or args.input
    if not path:
        raise InputError("spectrum needs a file")
    q, prob = _load_configuration(path)
    tol = args.tol if args.tol is not None else DEFAULT_VERIFY_TOL
    ok, _, lam, resn = _verify_report(q, prob, tol, args.abs_tol)
    if not ok:
        print(f"refusing: input is not a central configuration (residual {resn:.3e} > {tol:g})", file=sys.stderr)
        return EXIT_VERIFY
    m = Masses(prob.masses)
    p = PotentialParams(prob.alpha)
    x = project_to_x(q, m)
    sol = CCSolution(x, lam, resn, 0, Method.NEWTON, m, p)
    x2 = rescale_to_lambda(sol, -2.0, p)
    reports = {
        "sphereRestricted": spectrum(sphere_restricted(hessian_f(x, m, p, lam), x)),
        "fullHessianLambdaMinus2": spectrum(hessian_f(x2, m, p, -2.0)),
        "composedCochainHessian": spectrum(hessian_composed(coboundary0(x2), m, p)),
    }
    expected, measured = radial_eigencheck(sol, p)
    rel = abs(expected - measured) / abs(expected)
    corr = spectra_correspondence(sol, m, p)
    checks = [
        {"name": "radialEigenvalue", "passed": bool(rel <= 1e-8), "expected": expected, "measured": measured,
         "relativeError": rel},
        {"name": "spectraCorrespondence", "passed": bool(corr.passed), "maxRelativeError": corr.max_relative_error},
    ]
    for name, rep in reports.items():
        print(f"{name}: morse={rep.morse_index} nullity={rep.nullity} eigenvalues={np.array2string(rep.eigenvalues, precision=10)}")
    print(f"[{'PASS' if checks[0]['passed'] else 'FAIL'}] radial check: expected {expected!r} measured {measured!r} (rel err {rel:.1e})")
    print(f"[{'PASS' if corr.passed else 'FAIL'}] spectra correspondence: {corr.message}")
    if not corr.passed:
        print(corr.diff())
    sections = {
        k: {"eigenvalues": r.eigenvalues.tolist(), "morseIndex": r.morse_index, "nullity": r.nullity,
            "zeroThreshold": r.zero_threshold}
        for k, r in reports.items()
    }
    out = _output_dir(args)
    if out:
        write(SpectrumFile(os.path.basename(path), sections, checks), os.path.join(out, "spectrum.json"))
        if args.csv:
            for k, r in reports.items():
                _spectrum_csv(os.path.join(out, f"spectrum_{k}.csv"), r.eigenvalues)
    return EXIT_OK if checks[0]["passed"] and corr.passed else EXIT_VERIFY


def cmd_moulton(args):
    prob = _problem_from_args(args, default_d=1)
    prob = replace(prob, d=1, positions=None)
    m = _masses(prob, args)
    p = PotentialParams(prob.alpha)
    tol = args.tol if args.tol is not None else DEFAULT_SOLVE_TOL
    s = SolveSettings(method=Method.VARIATIONAL, residual_tolerance=tol)
    prob = replace(prob, settings={"method": "variational", "residualTolerance": tol})
    sols, failed = [], 0
    for order in moulton_orderings(prob.n):
        try:
            sols.append(solve_moulton(order, m, p, s))
        except ConvergenceError as exc:
            failed += 1
            print(f"ordering {order}: {exc}", file=sys.stderr)
    _emit_solutions(prob, sols, m, args, prefix="moulton")
    print(f"{len(sols)} of {len(moulton_orderings(prob.n))} chambers solved", file=sys.stderr)
    if not sols:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK if failed == 0 else EXIT_NO_CONVERGENCE


def cmd_gallery(args):
    masses = _parse_masses(args.masses) if args.masses else None
    p = PotentialParams(args.alpha)
    try:
        q, m = build(args.name, n=args.n, masses=masses, p=p)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    prob = ProblemFile(n=q.shape[0], d=q.shape[1], alpha=p.alpha, masses=masses or [1.0] * q.shape[0],
                       positions=q.tolist(), rng_seed=args.seed or 0)
    ok, lines, _, resn = _verify_report(q, prob, GALLERY_TOL)
    if not ok:
        print("internal error: gallery configuration failed verification", file=sys.stderr)
        print("\n".join(lines), file=sys.stderr)
        return EXIT_VERIFY
    sol = as_solution(q, m, p, label=args.name)
    sf = _solution_file(prob, sol, m)
    _emit_all([(f"{args.name}_problem.json", prob), (f"{args.name}_solution.json", sf)], args)
    out = _output_dir(args)
    if out and args.csv:
        _positions_csv(os.path.join(out, f"{args.name}_positions.csv"), sf.configuration)
    print(_summary(sf), file=sys.stderr)
    return EXIT_OK


def cmd_project(args):
    path = args.path or args.input
    if not path:
        raise InputError("project needs a cochain file")
    cf = read(path)
    if not isinstance(cf, CochainFile):
        raise InputError(f"{path} is not a cochain file")
    m = Masses(cf.masses)
    z = project_pm(OneCochain(np.array(cf.entries, dtype=float).reshape(comb(cf.n, 2), cf.d), cf.n), m)
    _emit_all([("projected.json", CochainFile(cf.n, cf.d, cf.masses, z.entries.tolist()))], args)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def _common(sp, problem=True):
    if problem:
        sp.add_argument("--n", type=int, help="number of bodies")
        sp.add_argument("--d", type=int, help="ambient dimension")
        sp.add_argument("--alpha", type=float, default=1.0, help="homogeneity exponent (default 1)")
        sp.add_argument("--masses", help="comma-separated positive masses")
        sp.add_argument("--equal-masses", action="store_true", help="use n equal masses (the default)")
        sp.add_argument("--seed", type=int, default=None, help="random seed")
    sp.add_argument("--tol", type=float, default=None, help="residual tolerance")
    sp.add_argument("--abs-tol", action="store_true", help="treat --tol as absolute instead of relative")
    sp.add_argument("--input", help="input file")
    sp.add_argument("--output", help=f"output directory (default: ${OUTPUT_ENV} or stdout)")
    sp.add_argument("--csv", action="store_true", help="also write CSV files for positions and spectra")


def build_parser():
    ap = argparse.ArgumentParser(prog="centralconf", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="find central configurations from random starts or given positions")
    _common(sp)
    sp.add_argument("--starts", type=int, default=None, help="number of random starts (default 20)")
    sp.add_argument("--method", choices=[mm.value for mm in Method], default=None)
    sp.add_argument("--timing", action="store_true", help="record wall time in solution files")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="check a solution or positions file")
    sp.add_argument("path", nargs="?")
    _common(sp, problem=False)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("spectrum", help="Hessian spectra and index checks for a central configuration")
    sp.add_argument("path", nargs="?")
    _common(sp, problem=False)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("moulton", help="collinear solutions, one per ordering class")
    _common(sp)
    sp.set_defaults(func=cmd_moulton)

    sp = sub.add_parser("gallery", help="emit a canonical configuration")
    sp.add_argument("name", choices=sorted(GALLERY))
    _common(sp)
    sp.set_defaults(func=cmd_gallery)

    sp = sub.add_parser("project", help="apply the cocycle projection to a cochain file")
    sp.add_argument("path", nargs="?")
    _common(sp, problem=False)
    sp.set_defaults(func=cmd_project)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (FileFormatError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CollisionError as exc:
        print(f"collision: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    except DegenerateConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
