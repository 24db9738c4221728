"""Command-line front end.

Subcommands: spectrum, reduce, index, conley, branch, bifurcate, verify.
Reports are UTF-8 JSON (schema 1, sorted keys, config echo) plus CSVs with
header rows.  Identical (problem, config, seed) inputs produce byte-identical
outputs.  Exit codes: 0 success, 1 validation error, 2 mathematical
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys

import numpy as np

from .branching import (bifurcating_set_index, m2_dichotomy, sine_mask,
                        switch_branches)
from .config import RunConfig
from .degree import (CoefRegion, PlanarRegion, galerkin_equilibrium_index,
                     planar_index, reduction_identity_check, winding_degree)
from .errors import (ConsistencyError, EqindexError, OrderCheckFailure,
                     ValidationError)
from .fourier import FourierVector, mode_of_index
from .manifold import bilinear_definiteness, reduce_at, residual_order_check
from .planar import chi_consistency, classify_block
from .problem import ProblemSpec, galerkin_jacobian, galerkin_residual
from .spectra import (eigendecompose_symmetric, family_split_linearization,
                      projections, split_linearization, subspace_align)

SCHEMA = 1


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _emit(report: dict, args, name: str) -> None:
    doc = {"schema": SCHEMA, "command": name, "config": args.cfg.to_dict()}
    doc.update(report)
    text = json.dumps(_sanitize(doc), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{name}.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(text)


def _write_csv(args, filename: str, header: list[str], rows) -> str | None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, filename)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
        return path
    return None


def _mode_labels(N: int) -> list[str]:
    out = []
    for i in range(2 * N + 1):
        m = mode_of_index(i)
        out.append("const" if m.parity == "const" else f"{m.parity}{m.n}")
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_spectrum(args) -> int:
    spec = args.problem
    lam = args.lam if args.lam is not None else 0.0
    u = FourierVector.zero(spec.N)
    eigs, _ = eigendecompose_symmetric(galerkin_jacobian(spec, u, lam))
    split = split_linearization(spec, u, lam)
    _emit({"lambda": lam, "eigenvalues": [float(x) for x in eigs],
           "split": split.to_dict()}, args, "spectrum")
    return 0


def cmd_reduce(args) -> int:
    spec = args.problem
    k = _require_k(args)
    rf = reduce_at(spec, k)
    split = split_linearization(spec, FourierVector.zero(spec.N), float(k * k))
    order = residual_order_check(spec, k, [1e-1, 1e-2, 1e-3, 1e-4])
    labels = _mode_labels(spec.N)
    v_tables = {}
    for name, v in zip(("v1", "v0", "v2") if rf.kernel_dim == 2 else ("v",),
                       rf.manifold.v):
        v_tables[name] = {labels[i]: float(c) for i, c in enumerate(v.coeffs)
                          if c != 0.0}
    report = {
        "k": k, "lambda0": rf.lam0, "m1": split.m1, "m2": split.m2,
        "B": [[[float(x) for x in row] for row in Bi] for Bi in rf.B],
        "definiteness": [bilinear_definiteness(rf, i + 1, args.cfg.tol_def)
                         for i in range(rf.kernel_dim)],
        "v_coefficients": v_tables,
        "residual_order": order,
    }
    _emit(report, args, "reduce")
    return 0


def cmd_index(args) -> int:
    spec = args.problem
    cfg = args.cfg
    lam = args.lam if args.lam is not None else 0.0
    method = args.method or "count"
    if args.k is not None:
        rf = reduce_at(spec, args.k)
        if args.r_in is not None and args.r_out is not None:
            region = PlanarRegion.annulus(r_in=args.r_in, r_out=args.r_out)
        else:
            region = PlanarRegion.disk(radius=args.radius or cfg.validity_radius)
        rep = planar_index(rf.planar_field(lam), region,
                           jacobian=rf.planar_jacobian(lam), cfg=cfg,
                           method=method)
        _emit({"lambda": lam, "k": args.k, "planar": True,
               **rep.to_dict()}, args, "index")
        return 0
    if method in ("winding", "both"):
        raise ValidationError(
            "winding is a planar method; pass --k to use it on the reduced field")
    if args.r_in is not None and args.r_out is not None:
        region = CoefRegion.shell(args.r_in, args.r_out)
    else:
        region = CoefRegion.ball(args.radius or 0.5)
    rep = galerkin_equilibrium_index(spec, lam, region, cfg)
    _emit({"lambda": lam, "planar": False, **rep.to_dict()}, args, "index")
    return 0


def cmd_conley(args) -> int:
    spec = args.problem
    cfg = args.cfg
    k = _require_k(args)
    rf = reduce_at(spec, k)
    lam = args.lam if args.lam is not None else rf.lam0
    radius = args.radius or 0.5 * cfg.validity_radius
    report = classify_block(rf.planar_field(lam), (0.0, 0.0), radius,
                            jacobian=rf.planar_jacobian(lam), cfg=cfg)
    _write_csv(args, "conley_flux.csv", ["theta", "flux"],
               [[float(t), float(sv)] for t, sv in report.flux_samples])
    _emit({"lambda": lam, "k": k, **report.to_dict()}, args, "conley")
    return 0


def cmd_branch(args) -> int:
    spec = args.problem
    cfg = args.cfg
    k = _require_k(args)
    mask = sine_mask(spec) if spec.is_rotation_symmetric() else None
    branches = switch_branches(spec, k, cfg=cfg, mask=mask)
    summary = []
    for i, b in enumerate(branches):
        fname = f"branch_{i}.csv"
        header = (["arclength", "lambda", "norm_u"]
                  + [f"coef_{lbl}" for lbl in _mode_labels(spec.N)[:5]]
                  + ["stability"])
        _write_csv(args, fname, header, b.csv_rows())
        summary.append({"file": fname, "points": len(b.points),
                        "termination": b.termination,
                        "data": b.termination_data,
                        "lambda_end": b.points[-1].lam,
                        "norm_end": b.points[-1].norm})
    _emit({"k": k, "branches": summary}, args, "branch")
    return 0


def cmd_bifurcate(args) -> int:
    spec = args.problem
    k = _require_k(args)
    report = m2_dichotomy(spec, k, args.cfg)
    _emit(report.to_dict(), args, "bifurcate")
    return 0


def cmd_verify(args) -> int:
    spec = args.problem
    cfg = args.cfg
    k = args.k if args.k is not None else 1
    lam0 = float(k * k)
    rows: list[tuple[str, bool, str]] = []

    def check(name, fn):
        try:
            detail = fn()
            rows.append((name, True, detail or ""))
        except EqindexError as exc:
            rows.append((name, False, str(exc)))

    def trivial_line():
        for lam in (0.3, lam0, lam0 + 2.7):
            r = galerkin_residual(spec, FourierVector.zero(spec.N), lam).norm()
            if r != 0.0:
                raise ConsistencyError(f"F(0,{lam}) = {r} != 0")
        return "F(0, lambda) = 0"

    def jacobian_fd():
        rng = np.random.default_rng(7)
        u = FourierVector(0.05 * rng.standard_normal(spec.dim))
        v = rng.standard_normal(spec.dim)
        eps = 1e-5
        fd = (galerkin_residual(spec, FourierVector(u.coeffs + eps * v), 0.7).coeffs
              - galerkin_residual(spec, FourierVector(u.coeffs - eps * v), 0.7).coeffs) / (2 * eps)
        err = float(np.max(np.abs(fd - galerkin_jacobian(spec, u, 0.7) @ v)))
        if err > 1e-7:
            raise ConsistencyError(f"finite-difference mismatch {err}")
        return f"max err {err:.2e}"

    def spectrum_closed_form():
        eigs, _ = eigendecompose_symmetric(
            galerkin_jacobian(spec, FourierVector.zero(spec.N), 1.0))
        expected = sorted([n * n - 1.0 for n in range(spec.N + 1)]
                          + [n * n - 1.0 for n in range(1, spec.N + 1)])
        if not np.array_equal(np.sort(eigs), np.array(expected)):
            raise ConsistencyError("spectrum at u=0 differs from n^2 - lambda")
        return "eigenvalues are n^2 - 1 exactly"

    def order():
        res = residual_order_check(spec, k, [1e-1, 1e-2, 1e-3, 1e-4])
        return f"slope {res['slope']}"

    def chi_vs_degree():
        rf = reduce_at(spec, k)
        chi_consistency(rf.planar_field(lam0), (0.0, 0.0),
                        0.5 * cfg.validity_radius,
                        jacobian=rf.planar_jacobian(lam0), cfg=cfg)
        return "chi equals winding degree"

    def formula_left():
        r = bifurcating_set_index(spec, k, "left", cfg)
        return f"index {r['index']} == shell {r['shell_index']}"

    def formula_right():
        r = bifurcating_set_index(spec, k, "right", cfg)
        return f"index {r['index']} == shell {r['shell_index']}"

    def reduction_identity():
        if spec.is_rotation_symmetric():
            return "covered by perturbed shell cross-validation (symmetric problem)"
        outs = []
        for lam in (lam0 - 0.03, lam0 + 0.03):
            res = reduction_identity_check(spec, k, lam, 0.01, 0.3, cfg)
            outs.append(f"{res['lhs']}=={res['rhs']}@{lam:g}")
        return ", ".join(outs)

    def alignment():
        z = FourierVector.zero(spec.N)
        ref = split_linearization(spec, z, lam0)
        P0 = projections(ref)
        Pl = projections(family_split_linearization(spec, z, lam0 + 0.02, ref))
        T, margin = subspace_align(P0, Pl)
        comm = float(np.max(np.abs(T @ Pl.P2 - P0.P2 @ T)))
        if comm > 1e-8:
            raise ConsistencyError(f"T P2 - P2 T = {comm}")
        return f"margin {margin:.2e}, commutator {comm:.2e}"

    check("trivial_equilibrium_line", trivial_line)
    check("jacobian_matches_finite_differences", jacobian_fd)
    check("spectrum_closed_form", spectrum_closed_form)
    check("manifold_remainder_order", order)
    check("chi_equals_degree", chi_vs_degree)
    check("index_formula_left", formula_left)
    check("index_formula_right", formula_right)
    check("reduction_identity", reduction_identity)
    check("subspace_alignment", alignment)

    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        sys.stdout.write(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}\n")
    failed = [r for r in rows if not r[1]]
    _emit({"k": k, "checks": [{"name": n, "pass": ok, "detail": d}
                              for n, ok, d in rows]}, args, "verify")
    return 2 if failed else 0


def _require_k(args) -> int:
    if args.k is None:
        raise ValidationError("this command requires --k")
    return args.k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="eqindex",
        description="Equilibrium index and bifurcation toolkit for the "
                    "periodic problem -u'' = lambda u + a(x) u^2 + h(x, u)")
    p.add_argument("command", choices=["spectrum", "reduce", "index", "conley",
                                       "branch", "bifurcate", "verify"])
    p.add_argument("--spec", required=True, help="problem JSON file")
    p.add_argument("--config", help="run configuration JSON file")
    p.add_argument("--out", help="output directory for JSON/CSV reports")
    p.add_argument("--k", type=int, help="bifurcation wavenumber (lambda0 = k^2)")
    p.add_argument("--lambda", dest="lam", type=float, help="parameter value")
    p.add_argument("--method", choices=["winding", "count", "both"],
                   help="planar degree method")
    p.add_argument("--seed", type=int, help="override the config RNG seed")
    p.add_argument("--radius", type=float, help="ball/disk radius")
    p.add_argument("--r-in", dest="r_in", type=float, help="shell inner radius")
    p.add_argument("--r-out", dest="r_out", type=float, help="shell outer radius")
    return p


COMMANDS = {"spectrum": cmd_spectrum, "reduce": cmd_reduce, "index": cmd_index,
            "conley": cmd_conley, "branch": cmd_branch,
            "bifurcate": cmd_bifurcate, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.problem = ProblemSpec.from_json(args.spec)
        cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        args.cfg = cfg
        return COMMANDS[args.command](args)
    except (ValidationError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ConsistencyError, OrderCheckFailure) as exc:
        sys.stderr.write(f"consistency failure: {exc}\n")
        return 2
    except EqindexError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
