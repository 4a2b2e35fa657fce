"""Command-line front end.

Exit statuses: 0 success, 1 validation or identity failure, 2 unreadable
input, 3 solver non-convergence. Input paths that do not exist are looked
up by file stem in the bundled gallery, so ``validate poisson_x0`` works
from any directory.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .algebroid import AlgebroidSpec, algebroid_from_json, validate_algebroid
from .cartan import (
    ConnectionForm,
    GaugeMap,
    LForm,
    as_matrix,
    bianchi_check,
    cartan_identity_suite,
    conjugate,
    connection_identity_suite,
    curvature,
    format_form,
    gauge_transform,
    reference_flatness_residual,
)
from .exactpoly import DimensionError, PolynomialSyntaxError, poly_format
from .kuranishi import (
    ConvergenceError,
    FlatnessError,
    ModuliReport,
    RepSpec,
    build_model,
    euler_characteristic,
    irreducibility_test,
    kuranishi_map,
    local_model_report,
    mc_slice_solve_bruteforce,
    obstruction,
    rep_from_json,
    validate_rep,
)

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input document."""


# ------------------------------------------------------------------- input


def gallery_path(name: str) -> Path:
    return Path(str(resources.files("algebroidkit") / "gallery" / f"{name}.json"))


def gallery_names() -> list[str]:
    folder = Path(str(resources.files("algebroidkit") / "gallery"))
    return sorted(p.stem for p in folder.glob("*.json"))


def resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    g = gallery_path(Path(path).stem)
    if g.exists():
        return g
    raise InputError(f"{path}: no such file (and no gallery entry {Path(path).stem!r})")


def load_json(path: str) -> dict:
    p = resolve(path)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: JSON syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _wrap(path, fn, *args):
    try:
        return fn(*args)
    except PolynomialSyntaxError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed document ({exc!r})") from exc
    except (DimensionError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_document(path: str, max_poly_degree: int):
    """Return ('rep', RepSpec) or ('algebroid', AlgebroidSpec)."""
    doc = load_json(path)
    if "lie_algebra" in doc:
        return "rep", _wrap(path, rep_from_json, doc, max_poly_degree)
    return "algebroid", _wrap(path, algebroid_from_json, doc, max_poly_degree)


def load_algebroid(path: str, max_poly_degree: int) -> AlgebroidSpec:
    kind, obj = load_document(path, max_poly_degree)
    return obj.algebra if kind == "rep" else obj


def load_rep(path: str, max_poly_degree: int) -> RepSpec:
    kind, obj = load_document(path, max_poly_degree)
    if kind != "rep":
        raise InputError(f"{path}: expected a representation document (with 'lie_algebra')")
    return obj


def connection_from_json(doc: dict, spec: AlgebroidSpec) -> ConnectionForm:
    m = int(doc["dim_E"])
    comps = {}
    for entry in doc.get("alpha", []):
        i = int(entry["basis_index"])
        M = as_matrix(entry["matrix"], spec.num_vars)
        if len(M) != m or any(len(row) != m for row in M):
            raise DimensionError(f"alpha matrices must be {m}x{m}")
        comps[(i,)] = M
    return ConnectionForm(LForm(spec.num_vars, spec.rank, 1, (m, m), comps))


def gauge_from_json(doc: dict, spec: AlgebroidSpec) -> GaugeMap:
    return GaugeMap(as_matrix(doc["phi"], spec.num_vars), as_matrix(doc["phi_inv"], spec.num_vars))


# ------------------------------------------------------------------ output


def _num(x, digits: int = 12):
    if x is None:
        return None
    if isinstance(x, complex) or np.iscomplexobj(x):
        return [_num(float(np.real(x))), _num(float(np.imag(x)))]
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


def _tensor(arr: np.ndarray):
    if arr.ndim == 0:
        return _num(arr.item())
    return [_tensor(a) for a in arr]


def _form_json(form: LForm) -> list:
    return [
        {"indices": list(k), "matrix": [[poly_format(p) for p in row] for row in M]}
        for k, M in sorted(form.components.items())
    ]


def report_to_dict(report: ModuliReport) -> dict:
    out = {
        "h_dims": list(report.h_dims),
        "index": report.index,
        "irreducible": report.irreducible,
        "smooth": report.smooth,
        "expected_local_dim": report.expected_local_dim,
        "commutant_dim": report.commutant_dim,
        "obstruction_vanishes": report.obstruction_vanishes,
        "quadratic_form": _tensor(report.quadratic_form),
        "radius": _num(report.radius),
        "sample_radius": _num(report.sample_radius),
        "n_samples": report.n_samples,
    }
    if report.zero_fraction is not None:
        out["zero_fraction"] = _num(report.zero_fraction)
        out["max_obstruction_norm"] = _num(report.max_obstruction_norm)
    out["solver_failures"] = report.solver_failures
    out["max_iterations"] = report.max_iterations
    out["notes"] = list(report.notes)
    return out


def emit_report(report: ModuliReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2)
    d2 = report.h_dims[2] if len(report.h_dims) > 2 else 0
    lines = [
        f"h_dims: {list(report.h_dims)}",
        f"index: {report.index}",
        f"irreducible: {str(report.irreducible).lower()} (commutant dim {report.commutant_dim})",
        f"smooth: {str(report.smooth).lower()} (dim H^2 = {d2})",
        f"expected local dimension: {report.expected_local_dim if report.smooth else 'n/a'}",
        f"contraction radius: {'unbounded' if math.isinf(report.radius) else format(report.radius, '.6g')}",
    ]
    if report.obstruction_vanishes:
        lines.append("obstruction map: identically zero (quadratic term and all samples)")
    else:
        q = float(np.max(np.abs(report.quadratic_form))) if report.quadratic_form.size else 0.0
        lines.append(f"obstruction map: nonzero (max quadratic coefficient {q:.6g})")
    if report.zero_fraction is not None:
        lines.append(
            f"samples: {report.n_samples} in ball of radius {report.sample_radius:.6g}, "
            f"zero fraction {report.zero_fraction:.6g}"
        )
    if report.solver_failures:
        lines.append(f"solver failures: {report.solver_failures}")
    lines.extend(f"note: {n}" for n in report.notes)
    return "\n".join(lines)


def _dump(payload: dict, fmt: str, text_lines: list[str]) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2)
    return "\n".join(text_lines)


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> tuple[int, str]:
    kind, obj = load_document(args.input, args.max_poly_degree)
    if kind == "algebroid":
        report = validate_algebroid(obj)
        failures = [
            {"condition": f.condition, "indices": list(f.indices), "residual": [poly_format(p) for p in f.residual]}
            for f in report.failures
        ]
        valid = report.valid
        lines = ["valid" if valid else "invalid"] + [f.describe() for f in report.failures]
    else:
        check = validate_rep(obj, args.tol_flat)
        failures = [
            {"condition": f.condition, "indices": list(f.indices), "residual": [poly_format(p) for p in f.residual]}
            for f in check.algebra.failures
        ]
        for (i, j), res in check.failures.items():
            failures.append({
                "condition": "flatness",
                "indices": [i, j],
                "residual": [[str(x) if isinstance(x, Fraction) else _num(x) for x in row] for row in res],
            })
        valid = check.valid
        lines = ["valid" if valid else "invalid"] + [f.describe() for f in check.algebra.failures]
        lines += [f"flatness ({i}, {j}): residual norm {float(check.norms[(i, j)]):.3g}" for (i, j) in check.failures]
    payload = {"kind": kind, "valid": valid, "failures": failures}
    return (EXIT_OK if valid else EXIT_INVALID), _dump(payload, args.format, lines)


def cmd_identities(args) -> tuple[int, str]:
    spec = load_algebroid(args.input, args.max_poly_degree)
    suites = [cartan_identity_suite(spec, args.trials, args.seed, args.max_degree)]
    if args.connections:
        suites.append(connection_identity_suite(spec, args.trials, args.seed, args.max_degree, args.dim_e))
    results = [r for s in suites for r in s.results]
    n_pass = sum(r.passed for r in results)
    lines = [f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.trials - r.failures}/{r.trials} trials)" for r in results]
    lines.append(f"{n_pass}/{len(results)} identities pass")
    payload = {
        "trials": args.trials,
        "seed": args.seed,
        "max_degree": args.max_degree,
        "identities": [
            {"name": r.name, "passed": r.passed, "failed_trials": r.failures,
             "residual": None if r.residual is None else format_form(r.residual)}
            for r in results
        ],
        "passed": n_pass,
        "total": len(results),
    }
    return (EXIT_OK if n_pass == len(results) else EXIT_INVALID), _dump(payload, args.format, lines)


def _connection(args, spec):
    doc = load_json(args.connection)
    return _wrap(args.connection, connection_from_json, doc, spec)


def cmd_curvature(args) -> tuple[int, str]:
    spec = load_algebroid(args.input, args.max_poly_degree)
    ref = reference_flatness_residual(spec)
    if not ref.is_zero():
        return EXIT_INVALID, "reference connection is not flat: the algebroid is invalid"
    A = _connection(args, spec)
    R = curvature(spec, A)
    bianchi = bianchi_check(spec, A)
    payload = {"curvature": _form_json(R), "flat": R.is_zero(), "bianchi_residual_zero": bianchi.is_zero()}
    lines = [
        f"curvature: {format_form(R)}",
        f"flat: {str(R.is_zero()).lower()}",
        f"bianchi residual: {'0' if bianchi.is_zero() else format_form(bianchi)}",
    ]
    return (EXIT_OK if bianchi.is_zero() else EXIT_INVALID), _dump(payload, args.format, lines)


def cmd_gauge(args) -> tuple[int, str]:
    spec = load_algebroid(args.input, args.max_poly_degree)
    A = _connection(args, spec)
    phi = _wrap(args.phi, gauge_from_json, load_json(args.phi), spec)
    moved = gauge_transform(spec, A, phi)
    residual = curvature(spec, moved) - conjugate(curvature(spec, A), phi)
    payload = {"alpha_phi": _form_json(moved.alpha), "curvature_covariance_residual_zero": residual.is_zero()}
    lines = [
        f"alpha^phi: {format_form(moved.alpha)}",
        f"curvature covariance residual: {'0' if residual.is_zero() else format_form(residual)}",
    ]
    return (EXIT_OK if residual.is_zero() else EXIT_INVALID), _dump(payload, args.format, lines)


def _checked_rep(args) -> RepSpec:
    rep = load_rep(args.input, args.max_poly_degree)
    check = validate_rep(rep, args.tol_flat)
    if not check.valid:
        raise FlatnessError(f"representation is not flat on pairs {sorted(check.failures)}")
    return rep


def cmd_cohomology(args) -> tuple[int, str]:
    rep = _checked_rep(args)
    model = build_model(rep, rank_tolerance=args.rank_tol)
    dims = model.hodge.dims
    idx = sum((-1) ** k * d for k, d in enumerate(dims))
    irr = irreducibility_test(rep, args.rank_tol)
    chi = euler_characteristic(rep.rank, rep.dim_V)
    payload = {"h_dims": dims, "index": idx, "euler_characteristic": chi,
               "irreducible": irr.irreducible, "commutant_dim": irr.commutant_dim}
    lines = [f"h_dims: {dims}", f"index: {idx} (euler characteristic {chi})",
             f"irreducible: {str(irr.irreducible).lower()} (commutant dim {irr.commutant_dim})"]
    return EXIT_OK, _dump(payload, args.format, lines)


def cmd_kuranishi(args) -> tuple[int, str]:
    rep = _checked_rep(args)
    model = build_model(rep, rank_tolerance=args.rank_tol)
    report = local_model_report(model, args.samples, args.radius, args.seed, args.tol)
    status = EXIT_SOLVER if report.solver_failures else EXIT_OK
    return status, emit_report(report, args.format)


def cmd_oracle(args) -> tuple[int, str]:
    rep = _checked_rep(args)
    model = build_model(rep, rank_tolerance=args.rank_tol)
    seed_radius = args.seed_radius if args.seed_radius is not None else min(model.radius / 2, 0.5)
    sols = mc_slice_solve_bruteforce(rep, args.seeds, args.tol, args.seed, seed_radius)
    H1 = model.hodge.harmonic_projectors[1]
    worst, inside = 0.0, 0
    for beta in sols:
        if np.linalg.norm(beta) >= model.radius:
            continue
        inside += 1
        gamma = H1 @ kuranishi_map(model, beta)
        phi = obstruction(model, gamma)
        worst = max(worst, float(np.linalg.norm(phi)) if phi.size else 0.0)
    consistent = worst <= 10 * max(args.tol, 1e-12) ** 0.5 if inside else True
    norms = [float(np.linalg.norm(b)) for b in sols]
    payload = {
        "seeds": args.seeds,
        "solutions": len(sols),
        "solutions_in_radius": inside,
        "max_solution_norm": _num(max(norms)) if norms else None,
        "max_obstruction_at_solutions": _num(worst),
        "consistent": consistent,
    }
    lines = [
        f"solutions: {len(sols)} of {args.seeds} seeds ({inside} inside radius)",
        f"max solution norm: {max(norms):.3g}" if norms else "max solution norm: n/a",
        f"max |Phi(K(beta))|: {worst:.3g}",
        f"consistent: {str(consistent).lower()}",
    ]
    return (EXIT_OK if consistent else EXIT_INVALID), _dump(payload, args.format, lines)


# ------------------------------------------------------------------ parser


def positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algebroidkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-poly-degree", type=int, default=12, help="cap on total degree of input polynomials")
    common.add_argument("--tol-flat", type=positive_float, default=1e-12)
    common.add_argument("--rank-tol", type=positive_float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check algebroid axioms or rep flatness")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("identities", parents=[common], help="exact Cartan calculus identity suite")
    p.add_argument("input")
    p.add_argument("--trials", type=positive_int, default=20)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--connections", action="store_true", help="also run the connection/curvature identities")
    p.add_argument("--dim-e", type=positive_int, default=2)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("curvature", parents=[common], help="curvature and Bianchi residual of a connection")
    p.add_argument("input")
    p.add_argument("--connection", required=True)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("gauge", parents=[common], help="gauge transform a connection")
    p.add_argument("input")
    p.add_argument("--connection", required=True)
    p.add_argument("--phi", required=True)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("cohomology", parents=[common], help="harmonic dimensions of the deformation complex")
    p.add_argument("input")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("kuranishi", parents=[common], help="local model report")
    p.add_argument("input")
    p.add_argument("--radius", type=positive_float, default=None, help="sampling radius in H^1")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tol", type=positive_float, default=1e-10)
    p.set_defaults(func=cmd_kuranishi)

    p = sub.add_parser("oracle", parents=[common], help="brute-force Maurer-Cartan slice solutions")
    p.add_argument("input")
    p.add_argument("--seeds", type=positive_int, default=20)
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.add_argument("--seed-radius", type=positive_float, default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, str]:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        return EXIT_PARSE, f"error: {exc}"
    except FlatnessError as exc:
        return EXIT_INVALID, f"error: {exc}"
    except ConvergenceError as exc:
        return EXIT_SOLVER, f"error: {exc}"


def main(argv: list[str] | None = None) -> int:
    status, text = run(argv)
    stream = sys.stdout if status in (EXIT_OK, EXIT_INVALID) else sys.stderr
    print(text, file=stream)
    return status


if __name__ == "__main__":
    sys.exit(main())
