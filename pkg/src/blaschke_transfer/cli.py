"""Command-line front end: matrix assembly, spectra, verification, figure data.

Subcommands: matrix | spectrum | interval | verify | figure-data.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical non-convergence.  Output files are written atomically
(temp file + rename) with fixed formatting so identical configurations
produce byte-identical files.  The environment variable SPECTRE_QUAD_MAX
overrides the adaptive quadrature point cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import fourier, interval, inverse_problem, spectral
from .errors import (
    AnnulusSearchError,
    EigensolverError,
    QuadratureConvergenceError,
    StructureViolationError,
)
from .maps import BlaschkeParam

FIGURES = ("map_graphs", "spectrum_vs_lambda")

# Parameters of the four reference map graphs (two real, two non-real).
MAP_GRAPH_PARAMS = (
    -0.7 + 0j,
    0.4 + 0j,
    -0.3 - 1j * math.sqrt(0.4),
    0.1 + 1j * math.sqrt(0.15),
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    lambda_re: float = 0.4
    lambda_im: float = 0.0
    n: int = 8
    m: int = 40
    tol: float = 1e-8
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        if self.lambda_re ** 2 + self.lambda_im ** 2 >= 1.0:
            raise ConfigError("|lambda| must be < 1")
        if not 1 <= self.n <= 64:
            raise ConfigError("Fourier window order N must be in 1..64")
        if not 8 <= self.m <= 128:
            raise ConfigError("collocation node count M must be in 8..128")
        if not 1e-14 <= self.tol <= 1e-3:
            raise ConfigError("tol must lie in [1e-14, 1e-3]")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")

    @property
    def param(self) -> BlaschkeParam:
        return BlaschkeParam(complex(self.lambda_re, self.lambda_im))


def quadrature_spec() -> fourier.QuadratureSpec:
    """Default quadrature budget, honoring SPECTRE_QUAD_MAX."""
    cap = os.environ.get("SPECTRE_QUAD_MAX")
    if cap is None:
        return fourier.QuadratureSpec()
    try:
        max_points = int(cap)
    except ValueError as exc:
        raise ConfigError(f"SPECTRE_QUAD_MAX must be an integer, got {cap!r}") from exc
    if max_points < 64:
        raise ConfigError("SPECTRE_QUAD_MAX must be at least 64")
    return fourier.QuadratureSpec(
        min_points=min(256, max_points), max_points=max_points
    )


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _complex_obj(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _matrix_csv(matrix: fourier.TransferMatrix) -> str:
    lines = ["n,l,re,im"]
    N = matrix.order
    for n in range(-N, N + 1):
        for l in range(-N, N + 1):
            v = matrix.entry(n, l)
            lines.append(f"{n},{l},{_fmt(v.real)},{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def _matrix_json(matrix: fourier.TransferMatrix) -> str:
    obj = {
        "order": matrix.order,
        "lambda": _complex_obj(matrix.param.lam),
        "assembly_method": matrix.assembly_method,
        "diagonal": [_complex_obj(v) for v in matrix.diagonal()],
        "entries": [[_complex_obj(v) for v in row] for row in matrix.entries],
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _eigen_rows(computed, report: spectral.SpectrumReport):
    """(eigenvalue, matched_prediction, error) rows, modulus desc, phase asc."""
    expanded = report.predicted.expanded()
    matched = {ci: expanded[pi] for ci, pi in report.pairing}
    rows = []
    for i, c in enumerate(computed):
        if i in matched:
            p = matched[i]
            rows.append((c, p, abs(c - p)))
        elif i in report.zero_cluster:
            rows.append((c, 0j, abs(c)))
        else:
            rows.append((c, None, None))
    rows.sort(key=lambda r: (-abs(r[0]), np.angle(r[0])))
    return rows


def _spectrum_csv(rows) -> str:
    lines = ["re,im,modulus,matched_prediction_re,matched_prediction_im,error"]
    for c, p, err in rows:
        if p is None:
            tail = "nan,nan,nan"
        else:
            tail = f"{_fmt(p.real)},{_fmt(p.imag)},{_fmt(err)}"
        lines.append(f"{_fmt(c.real)},{_fmt(c.imag)},{_fmt(abs(c))},{tail}")
    return "\n".join(lines) + "\n"


def _report_obj(report: spectral.SpectrumReport) -> dict:
    return {
        "computed": [_complex_obj(c) for c in report.computed],
        "predicted": [
            {"value": _complex_obj(v), "multiplicity": m}
            for v, m in report.predicted.entries
        ],
        "pairing": [list(p) for p in report.pairing],
        "max_pair_error": report.max_pair_error,
        "unmatched_computed": list(report.unmatched_computed),
        "unmatched_predicted": list(report.unmatched_predicted),
        "zero_cluster": list(report.zero_cluster),
        "tol": report.tol,
        "passed": report.passed,
    }


def cmd_matrix(config: RunConfig) -> int:
    matrix = fourier.assemble(config.param, config.n, method="fft", spec=quadrature_spec())
    out = config.out or f"matrix.{config.format}"
    text = _matrix_csv(matrix) if config.format == "csv" else _matrix_json(matrix)
    write_atomic(out, text)
    return 0


def cmd_spectrum(config: RunConfig) -> int:
    matrix = fourier.assemble(config.param, config.n, method="fft", spec=quadrature_spec())
    prediction = spectral.predicted_spectrum(config.param, config.n)
    tri = spectral.eigenvalues_triangular(matrix)
    dense = spectral.eigenvalues_dense(matrix, tol=max(config.tol, 1e-10))
    rep_tri = spectral.match_spectra(tri, prediction, config.tol)
    rep_dense = spectral.match_spectra(dense, prediction, config.tol)
    out = config.out or f"spectrum.{config.format}"
    if config.format == "csv":
        text = _spectrum_csv(_eigen_rows(dense, rep_dense))
    else:
        obj = {
            "lambda": _complex_obj(config.param.lam),
            "order": config.n,
            "triangular": _report_obj(rep_tri),
            "dense": _report_obj(rep_dense),
        }
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    write_atomic(out, text)
    return 0 if (rep_tri.passed and rep_dense.passed) else 1


def cmd_interval(config: RunConfig) -> int:
    ctx = interval.make_context(config.param)
    disc = interval.collocation_matrix(ctx, config.m)
    eigs = [complex(v) for v in disc.eigenvalues(refine_top=12)]
    prediction = interval.interval_spectrum_predicted(ctx, 8)
    report = spectral.match_spectra(eigs, prediction, max(config.tol, 1e-12))

    top8 = sorted(eigs, key=lambda z: (-abs(z), np.angle(z)))[:8]
    pred8 = prediction.expanded()[:8]
    pairs, _ = spectral.greedy_pair(pred8, top8)
    top8_error = max((d for _, _, d in pairs), default=0.0)

    nonreal = [z for z in eigs if abs(z.imag) > 1e-6 and abs(z) > 1e-6]
    out = config.out or f"interval.{config.format}"
    if config.format == "csv":
        text = _spectrum_csv(_eigen_rows(eigs, report))
    else:
        obj = {
            "lambda": _complex_obj(config.param.lam),
            "nodes": config.m,
            "deriv_at_fixed_point": ctx.deriv_fixed,
            "top8_pairing_error": top8_error,
            "nonreal_eigenvalue_count": len(nonreal),
            "nonreal_spectrum_flag": bool(nonreal) and not config.param.is_real,
            "report": _report_obj(report),
        }
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    write_atomic(out, text)
    return 0 if top8_error < config.tol else 1


def _verify_checks(config: RunConfig) -> list:
    param = config.param
    spec = quadrature_spec()
    checks = []

    matrix = fourier.assemble(param, config.n, method="fft", spec=spec)
    structure = fourier.validate_structure(matrix, 1e-12)
    checks.append(
        {"name": "matrix_structure", "residual": structure.max_violation,
         "tolerance": 1e-12, "passed": structure.passed, "skipped": False}
    )

    rng = np.random.default_rng(20260810)
    worst = 0.0
    for _ in range(5):
        f = rng.normal(size=11) + 1j * rng.normal(size=11)
        g = rng.normal(size=11) + 1j * rng.normal(size=11)
        worst = max(worst, fourier.duality_check(param, f, g, spec))
    checks.append(
        {"name": "duality", "residual": worst, "tolerance": 1e-10,
         "passed": worst < 1e-10, "skipped": False}
    )

    ctx = interval.make_context(param)
    match = interval.branch_matching_residuals(ctx)
    ok = match["order0"] < 1e-10 and match["order1"] < 1e-10 and match["order2"] < 1e-6
    checks.append(
        {"name": "branch_matching", "residual": max(match.values()),
         "tolerance": 1e-6, "passed": ok, "skipped": False}
    )

    rep0 = interval.dual_functional_check(ctx, [0.0, 1.0], 0)
    checks.append(
        {"name": "dual_functional_order0", "residual": rep0.residual,
         "tolerance": rep0.tolerance, "passed": rep0.passed, "skipped": False}
    )
    rep1 = interval.dual_functional_check(ctx, [-1.0, 0.0, 1.0], 1)
    checks.append(
        {"name": "dual_functional_order1", "residual": rep1.residual,
         "tolerance": rep1.tolerance, "passed": rep1.passed, "skipped": False}
    )

    f = rng.normal(size=9) + 1j * rng.normal(size=9)
    res = interval.intertwine_check(ctx, f)
    checks.append(
        {"name": "intertwine", "residual": res, "tolerance": 1e-9,
         "passed": res < 1e-9, "skipped": False}
    )

    if param.is_real:
        for rep in inverse_problem.run_all(param.lam.real):
            checks.append(
                {"name": f"inverse_problem_{rep.equation}",
                 "residual": rep.max_residual, "tolerance": rep.tolerance,
                 "passed": rep.passed, "skipped": False}
            )
    else:
        checks.append(
            {"name": "inverse_problem", "residual": None, "tolerance": None,
             "passed": None, "skipped": True}
        )
    return checks


def cmd_verify(config: RunConfig) -> int:
    checks = _verify_checks(config)
    failing = [c for c in checks if not c["skipped"] and not c["passed"]]
    bundle = {
        "lambda": _complex_obj(config.param.lam),
        "checks": checks,
        "passed": not failing,
    }
    out = config.out or "verify.json"
    write_atomic(out, json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    if failing:
        print(f"verification failed: {failing[0]['name']}", file=sys.stderr)
        return 1
    return 0


def _map_graphs_csv() -> str:
    lines = ["lambda_re,lambda_im,x,T"]
    grid = np.linspace(-1.0, 1.0, 512)
    for lam in MAP_GRAPH_PARAMS:
        ctx = interval.make_context(BlaschkeParam(lam))
        values = interval.T_eval(ctx, grid)
        for x, t in zip(grid, values):
            lines.append(f"{_fmt(lam.real)},{_fmt(lam.imag)},{_fmt(x)},{_fmt(t)}")
    return "\n".join(lines) + "\n"


def spectrum_sweep_rows(m_nodes: int = 40, n_powers: int = 5, grid_points: int = 199):
    """Figure data: analytic and computed eigenvalue moduli along real lambda.

    For each lambda on the grid and each power n < n_powers, emits the
    analytic moduli |lambda^n| and |((lambda+1)/2)^n| next to the moduli of
    the collocation eigenvalues greedily matched to those predictions.
    """
    grid = np.linspace(-0.99, 0.99, grid_points)
    rows = []
    for lam in grid:
        ctx = interval.make_context(BlaschkeParam(float(lam)))
        eigs = list(interval.collocation_matrix(ctx, m_nodes).eigenvalues(refine_top=12))
        rho = 1.0 / ctx.deriv_fixed
        targets = [("lead", 0, 1.0 + 0j)]
        for n in range(1, n_powers):
            copies = 2 if lam != 0.0 else 1
            for _ in range(copies):
                targets.append(("circle", n, complex(lam) ** n))
            targets.append(("fixed", n, complex(rho) ** n))
        order = sorted(range(len(targets)), key=lambda i: -abs(targets[i][2]))
        free = list(range(len(eigs)))
        matched = {}
        for i in order:
            dists = [abs(targets[i][2] - eigs[j]) for j in free]
            k = int(np.argmin(dists))
            matched[i] = eigs[free.pop(k)]
        circle_comp = {0: abs(matched[0])}
        fixed_comp = {0: abs(matched[0])}
        for i, (kind, n, _value) in enumerate(targets):
            if kind == "circle" and n not in circle_comp:
                circle_comp[n] = abs(matched[i])
            elif kind == "fixed":
                fixed_comp[n] = abs(matched[i])
        row = {"lambda": float(lam)}
        for n in range(n_powers):
            row[f"circle_analytic_{n}"] = abs(lam) ** n
            row[f"circle_computed_{n}"] = circle_comp[n]
            row[f"fixed_analytic_{n}"] = abs((lam + 1.0) / 2.0) ** n
            row[f"fixed_computed_{n}"] = fixed_comp[n]
        rows.append(row)
    return rows


def _spectrum_vs_lambda_csv(m_nodes: int) -> str:
    rows = spectrum_sweep_rows(m_nodes=m_nodes)
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in header))
    return "\n".join(lines) + "\n"


def cmd_figure_data(config: RunConfig, figure: str) -> int:
    if figure not in FIGURES:
        raise ConfigError(f"figure must be one of {FIGURES}")
    if figure == "map_graphs":
        text = _map_graphs_csv()
    else:
        text = _spectrum_vs_lambda_csv(config.m)
    out = config.out or f"{figure}.csv"
    write_atomic(out, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    lam = common.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lambda_cart", nargs=2, type=float,
                     metavar=("RE", "IM"), help="map parameter, Cartesian")
    lam.add_argument("--lambda-polar", dest="lambda_polar", nargs=2, type=float,
                     metavar=("MOD", "PHASE"), help="map parameter, polar")
    common.add_argument("--n", type=int, default=8, help="Fourier window order")
    common.add_argument("--m", type=int, default=40, help="collocation node count")
    common.add_argument("--tol", type=float, default=1e-8, help="pass tolerance")
    common.add_argument("--out", type=str, default=None, help="output path")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(
        prog="blaschke-transfer",
        description="Transfer-operator spectra of expanding Blaschke-type circle maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("matrix", parents=[common], help="write the Fourier window matrix")
    sub.add_parser("spectrum", parents=[common], help="computed vs exact circle spectrum")
    sub.add_parser("interval", parents=[common], help="interval collocation spectrum")
    sub.add_parser("verify", parents=[common], help="run the verification bundle")
    fig = sub.add_parser("figure-data", parents=[common], help="emit plot-ready data")
    fig.add_argument("--figure", choices=FIGURES, required=True)
    return parser


def _config_from_args(args) -> RunConfig:
    if args.lambda_polar is not None:
        mod, phase = args.lambda_polar
        lam_re = mod * math.cos(phase)
        lam_im = mod * math.sin(phase)
    elif args.lambda_cart is not None:
        lam_re, lam_im = args.lambda_cart
    else:
        lam_re, lam_im = 0.4, 0.0
    config = RunConfig(
        lambda_re=lam_re,
        lambda_im=lam_im,
        n=args.n,
        m=args.m,
        tol=args.tol,
        out=args.out,
        format=args.format,
    )
    config.validate()
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "matrix":
            return cmd_matrix(config)
        if args.command == "spectrum":
            return cmd_spectrum(config)
        if args.command == "interval":
            return cmd_interval(config)
        if args.command == "verify":
            return cmd_verify(config)
        return cmd_figure_data(config, args.figure)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureConvergenceError, EigensolverError, AnnulusSearchError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return 3
    except StructureViolationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
