"""Command-line front end: reproducible verification campaigns with
machine-readable CSV/JSON reports.

Every report embeds the exact configuration, its hash, the manifold hash and
the tool version; identical (config, seed, version) produce byte-identical
output.  Exit status: 0 when all configured contracts pass, 1 on a contract
failure (the failing contract is named), 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, basis, embedding, fourier, kernel
from .errors import SzegolabError
from .geometry import Manifold

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


def _parse_range(text: str) -> list[int]:
    """'a..b' -> [a, ..., b]; 'a' -> [a]; 'a,b,c' -> [a, b, c]."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ConfigError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    if "," in text:
        return [int(t) for t in text.split(",") if t.strip()]
    return [int(text)]


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([complex(t) for t in text.split(",")])
    except ValueError as e:
        raise ConfigError(f"cannot parse point {text!r}: {e}")


def _parse_weights(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def _parse_tolerances(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"tolerance override must be name=value, got {item!r}")
        name, value = item.split("=", 1)
        out[name.strip()] = float(value)
    return out


def resolve_manifold(args) -> Manifold:
    if getattr(args, "manifold", None):
        spec = json.loads(Path(args.manifold).read_text())
        return Manifold.from_spec(spec)
    preset = getattr(args, "preset", None)
    weights = _parse_weights(args.weights) if getattr(args, "weights", None) else None
    if preset == "example2":
        return Manifold.invariant_hypersurface_example()
    if preset == "sphere" or (preset is None and weights is not None):
        n = getattr(args, "n", None) or (len(weights) if weights else None)
        if n is None:
            raise ConfigError("sphere preset needs --n or --weights")
        return Manifold.sphere(int(n), weights)
    raise ConfigError("no manifold: pass --manifold, --preset, or --weights")


def _config_dict(args, skip=("out", "func", "func_cmd", "command")) -> dict:
    cfg = {k: v for k, v in vars(args).items() if v is not None}
    for k in skip:
        cfg.pop(k, None)
    cfg["version"] = __version__
    return cfg


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


def emit_report(args, M: Manifold, command: str, results: dict, contracts: list[dict],
                csv_rows=None, csv_header=None, primary: str = "json") -> int:
    config = _config_dict(args)
    report = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": config,
        "config_hash": _hash(config),
        "manifold_hash": M.content_hash,
        "results": results,
        "contracts": contracts,
        "passed": all(c["passed"] for c in contracts),
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    csv_text = None
    if csv_rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
        csv_text = buf.getvalue()
    out = getattr(args, "out", None)
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"{command}.json").write_text(text + "\n", encoding="utf-8")
        if csv_text is not None:
            (outdir / f"{command}.csv").write_text(csv_text, encoding="utf-8")
    # one artifact per stream so reports stay machine-parseable
    sys.stdout.write(csv_text if primary == "csv" and csv_text is not None else text + "\n")
    for c in contracts:
        if not c["passed"]:
            print(f"CONTRACT FAILED: {c['name']}: {c['detail']}", file=sys.stderr)
            return 1
    return 0


# -- subcommands -----------------------------------------------------------


def cmd_dims(args) -> int:
    M = resolve_manifold(args)
    ms = _parse_range(args.m)
    rows = [(m, basis.dimension(M.weights, m)) for m in ms]
    return emit_report(
        args, M, "dims",
        {"dimensions": {str(m): d for m, d in rows}},
        [],
        csv_rows=rows, csv_header=("m", "d_m"), primary="csv",
    )


def cmd_norms(args) -> int:
    M = resolve_manifold(args)
    if M.kind != "sphere":
        raise ConfigError("exact norms require a sphere preset")
    ms = _parse_range(args.m)
    rows = []
    for m in ms:
        for mi in basis.enumerate_multiindices(M.weights, m):
            norm = basis.sphere_monomial_norm_sq(mi, M.n)
            rows.append(
                (m, " ".join(map(str, mi.exponents)), str(norm.rational_part), norm.pi_power, repr(norm.value()))
            )
    return emit_report(
        args, M, "norms", {"count": len(rows)}, [],
        csv_rows=rows, csv_header=("m", "alpha", "rational", "pi_power", "value"),
        primary="csv",
    )


def cmd_kernel(args) -> int:
    M = resolve_manifold(args)
    x = M.point(_parse_point(args.point))
    y = M.point(_parse_point(args.point2)) if args.point2 else x
    ms = _parse_range(args.m)
    k = M.stratum_order(x)
    rows, results = [], {}
    hermitian_ok, diagonal_ok = True, True
    worst_h = 0.0
    for m in ms:
        B = basis.fourier_basis(M, m, measure=args.measure, samples=args.samples, seed=args.seed)
        v_xy = kernel.szego_kernel(B, x, y).value
        v_yx = kernel.szego_kernel(B, y, x).value
        diag = kernel.kernel_diagonal(B, x)
        scale = max(diag, 1.0)
        worst_h = max(worst_h, abs(v_xy - v_yx.conjugate()) / scale)
        if abs(v_xy - v_yx.conjugate()) > 1e-12 * scale:
            hermitian_ok = False
        if diag < 0:
            diagonal_ok = False
        rows.append((m, repr(v_xy.real), repr(v_xy.imag), repr(diag)))
    results["stratum_order_x"] = k
    results["hermitian_max_relative_defect"] = worst_h
    contracts = [
        {"name": "hermitian-symmetry", "passed": hermitian_ok, "detail": f"max defect {worst_h:.2e}"},
        {"name": "diagonal-nonnegative", "passed": diagonal_ok, "detail": ""},
    ]
    return emit_report(args, M, "kernel", results, contracts,
                       csv_rows=rows, csv_header=("m", "re", "im", "diag_x"))


def cmd_fit(args) -> int:
    M = resolve_manifold(args)
    tols = _parse_tolerances(args.tolerance)
    tol = tols.get("fit", 0.01)
    if args.point:
        x = M.point(_parse_point(args.point))
    else:
        from .integrate import random_surface_points

        x = random_surface_points(M, 1, args.seed)[0]
    ms = _parse_range(args.m)
    fit = kernel.fit_expansion(
        M, x, min(ms), max(ms), measure=args.measure, samples=args.samples, seed=args.seed
    )
    results = {
        "stratum_order": fit.stratum_order,
        "levels": list(fit.levels),
        "c_lead": fit.c_lead,
        "c_next": fit.c_next,
        "predicted": fit.predicted,
        "levi_determinant": fit.levi_determinant,
        "relative_error": fit.relative_error,
        "measure": fit.measure,
    }
    contracts = [
        {
            "name": "leading-coefficient",
            "passed": fit.relative_error <= tol,
            "detail": f"relative error {fit.relative_error:.4f} vs tolerance {tol}; "
            f"fitted {fit.c_lead:.6g}, predicted {fit.predicted:.6g}",
        }
    ]
    rows = list(zip(fit.levels, map(repr, fit.values)))
    return emit_report(args, M, "fit", results, contracts,
                       csv_rows=rows, csv_header=("m", "diagonal"))


def cmd_vanish(args) -> int:
    M = resolve_manifold(args)
    x0 = M.point(_parse_point(args.point))
    k = M.stratum_order(x0)
    if k <= 1:
        raise ConfigError("--point must lie on a singular stratum (order > 1)")
    ms = [m for m in _parse_range(args.m) if m % k != 0]
    if not ms:
        raise ConfigError(f"all requested levels are divisible by the stabilizer order {k}")
    measure = "round-exact" if M.kind == "sphere" else args.measure
    worst = 0.0
    rows = []
    for m in ms:
        B = basis.fourier_basis(M, m, measure=measure, samples=args.samples, seed=args.seed)
        v = kernel.stratum_vanishing_check(B, M, x0)
        worst = max(worst, v)
        rows.append((m, repr(v)))
    contracts = [
        {
            "name": "stratum-vanishing",
            "passed": worst <= 1e-12,
            "detail": f"max |f_j(x0)| = {worst:.3e} over levels with {k} not dividing m",
        }
    ]
    return emit_report(args, M, "vanish",
                       {"stratum_order": k, "levels": ms, "max_abs_value": worst},
                       contracts, csv_rows=rows, csv_header=("m", "max_abs_value"))


def cmd_ratio(args) -> int:
    M = resolve_manifold(args)
    x0 = M.point(_parse_point(args.point))
    radii = [float(t) for t in args.radii.split(",")]
    report = kernel.ratio_search(
        M, x0,
        m_candidates=_parse_range(args.m),
        radii=radii,
        sigma=args.sigma,
        imag_bound=args.i_bound,
        points_per_ball=args.points,
        measure=args.measure,
        samples=args.samples,
        seed=args.seed,
    )
    results = {
        "stratum_order": report.stratum_order,
        "passing_m": report.passing_m,
        "passing_radius": report.passing_radius,
        "attempts": [list(a) for a in report.attempts],
    }
    contracts = [
        {
            "name": "ratio-bounds",
            "passed": report.passing_m is not None,
            "detail": f"first passing (m, radius) = ({report.passing_m}, {report.passing_radius})",
        }
    ]
    rows = [(m, r, repr(wr), repr(wi)) for m, r, wr, wi in report.attempts]
    return emit_report(args, M, "ratio", results, contracts,
                       csv_rows=rows, csv_header=("m", "radius", "max_abs_one_minus_R", "max_abs_I"))


def cmd_project(args) -> int:
    M = resolve_manifold(args)
    x = M.point(_parse_point(args.point))
    func_terms = json.loads(Path(args.func).read_text())
    if isinstance(func_terms, dict):
        func_terms = func_terms["terms"]

    def u(Z):
        Z = np.asarray(Z, dtype=complex)
        out = np.zeros(Z.shape[0], dtype=complex)
        for t in func_terms:
            term = np.full(Z.shape[0], complex(str(t.get("coeff", "1"))))
            for j, e in enumerate(t["z_exponents"]):
                if e:
                    term = term * Z[:, j] ** e
            for j, e in enumerate(t["zbar_exponents"]):
                if e:
                    term = term * Z[:, j].conj() ** e
            out += term
        return out

    ms = _parse_range(args.m)
    max_orbit_degree = 0
    for t in func_terms:
        wz = sum(e * w for e, w in zip(t["z_exponents"], M.weights.weights))
        wzb = sum(e * w for e, w in zip(t["zbar_exponents"], M.weights.weights))
        max_orbit_degree = max(max_orbit_degree, abs(wz - wzb))
    Q = fourier.default_quadrature(max(max(ms), max_orbit_degree))
    rows = []
    for m in ms:
        val = fourier.circle_average(M, u, x, m, Q)
        rows.append((m, repr(val.real), repr(val.imag)))
    return emit_report(args, M, "project",
                       {"node_count": Q.node_count, "levels": ms}, [],
                       csv_rows=rows, csv_header=("m", "re", "im"), primary="csv")


def cmd_embed(args) -> int:
    M = resolve_manifold(args)
    extra = _parse_range(args.extra_levels) if args.extra_levels else []
    m = args.m_level
    if m is None:
        if args.m0 is None:
            raise ConfigError("embed needs --m or --m0")
        m = args.m0 + 1
    Phi = embedding.build_embedding(
        M, m, extra_levels=extra, measure=args.measure, samples=args.samples, seed=args.seed
    )
    imm = embedding.immersion_report(Phi, samples=args.immersion_samples, seed=args.seed)
    sep = embedding.separation_report(
        Phi, pair_count=args.pairs, threshold=args.delta, seed=args.seed
    )
    results = {
        "base_level": m,
        "levels": list(Phi.levels),
        "N": Phi.total_dim,
        "min_weight": Phi.min_weight,
        "immersion_floor": imm.min_singular_value,
        "separation_floor": sep.min_image_distance,
        "same_orbit_floor": sep.min_same_orbit_image_distance,
        "violations": list(sep.violations),
        "warnings": list(Phi.warnings),
    }
    contracts = [
        {
            "name": "immersion-floor",
            "passed": imm.min_singular_value > 1e-6,
            "detail": f"min singular value {imm.min_singular_value:.3e}",
        },
        {
            "name": "separation",
            "passed": not sep.violations,
            "detail": f"{len(sep.violations)} violating pairs",
        },
    ]
    if args.m0 is not None:
        contracts.append(
            {
                "name": "minimal-weight",
                "passed": Phi.min_weight > args.m0,
                "detail": f"min weight {Phi.min_weight} vs bound {args.m0}",
            }
        )
    rows = [
        (i, label, k, int(near), repr(s))
        for i, (label, k, near, s) in enumerate(imm.records)
    ]
    return emit_report(
        args, M, "embed", results, contracts, csv_rows=rows,
        csv_header=("sample", "label", "stratum_order", "near_stratum", "sigma_min"),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szegolab",
        description="verification campaigns for Fourier-component kernels and equivariant embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples_default=200_000):
        p.add_argument("--preset", choices=["sphere", "example2"])
        p.add_argument("--manifold", help="path to a manifold JSON spec")
        p.add_argument("--n", type=int, help="ambient complex dimension (sphere preset)")
        p.add_argument("--weights", help="comma-separated action weights")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=samples_default)
        p.add_argument("--threads", type=int, default=0,
                       help="worker cap (recorded; results are thread-count independent)")
        p.add_argument("--out", help="directory for CSV/JSON artifacts")
        p.add_argument("--measure", default="auto",
                       choices=["auto", "round-exact", "compliant-quadrature"])
        p.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                       help="override a contract tolerance")

    p = sub.add_parser("dims", help="component dimensions d_m as CSV")
    common(p)
    p.add_argument("--m", required=True, help="level or range a..b")
    p.set_defaults(func_cmd=cmd_dims)

    p = sub.add_parser("norms", help="exact sphere monomial norm table")
    common(p)
    p.add_argument("--m", required=True)
    p.set_defaults(func_cmd=cmd_norms)

    p = sub.add_parser("kernel", help="kernel values S_m(x, y)")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--point2")
    p.set_defaults(func_cmd=cmd_kernel)

    p = sub.add_parser("fit", help="diagonal growth fit against the Levi prediction")
    common(p)
    p.add_argument("--m", required=True, help="level range a..b")
    p.add_argument("--point")
    p.set_defaults(func_cmd=cmd_fit)

    p = sub.add_parser("vanish", help="exact vanishing certificate at a stabilized point")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--point", required=True)
    p.set_defaults(func_cmd=cmd_vanish)

    p = sub.add_parser("ratio", help="consecutive-level kernel ratio diagnostics")
    common(p)
    p.add_argument("--m", required=True, help="base level candidates (range or list)")
    p.add_argument("--point", required=True)
    p.add_argument("--radii", default="0.3,0.1,0.03")
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--i-bound", type=float, default=0.01)
    p.add_argument("--points", type=int, default=50)
    p.set_defaults(func_cmd=cmd_ratio)

    p = sub.add_parser("project", help="orbit Fourier coefficients of a polynomial")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--function", dest="func", required=True,
                   help="JSON file with polynomial terms")
    p.set_defaults(func_cmd=cmd_project)

    p = sub.add_parser("embed", help="equivariant embedding certificate")
    common(p, samples_default=50_000)
    p.add_argument("--m", dest="m_level", type=int)
    p.add_argument("--m0", type=int, help="minimal-weight lower bound")
    p.add_argument("--extra-levels", dest="extra_levels")
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--immersion-samples", type=int, default=100)
    p.set_defaults(func_cmd=cmd_embed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func_cmd(args)
    except (
        ConfigError,
        SzegolabError,
        ValueError,
        FileNotFoundError,
        json.JSONDecodeError,
    ) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
