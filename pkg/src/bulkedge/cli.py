"""Command-line scenario runner.

Subcommands:

* ``run <config>``            -- full pipeline on a scene file; writes
  conductance/intersection/kernel-field/decay CSV reports plus a manifest.
* ``fuzz --n K --seed S``     -- randomized geometry property suite.
* ``lattice build ...``       -- build and dump a model Hamiltonian (.npz).
* ``geom trace|chi|check-transverse`` -- geometry-only tools on a scene.
* ``report diff <a> <b>``     -- compare two report CSVs.

Every float is serialized with repr (shortest round-trip form), so
re-running an identical configuration reproduces all CSV bytes exactly.
The exit code is nonzero whenever an assertion or validation fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .conductance import ConductanceReport
from .fuzz import fuzz_geometry
from .geometry import good_set_boundary, intersection_number, transversality_profile
from .lattice import BoxWindow, build_qwz, verify_esr
from .scenes import SceneConfig, SceneResult, evaluate_scene, read_scene_config
from .spectral import resolvent_decay_check, projector_decay_check


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _conductance_rows(scene_id: str, reports: list[ConductanceReport]):
    for rep in reports:
        yield [scene_id, rep.quantity, rep.value, rep.imag_residue,
               rep.tail_estimate, rep.stability_delta, rep.full_trace,
               rep.window.inner_half_width, rep.window.buffer,
               rep.center[0], rep.center[1]]


def cmd_run(args) -> int:
    cfg_path = Path(args.config)
    text = cfg_path.read_text()
    cfg = read_scene_config(text)
    outdir = Path(args.outdir) if args.outdir else Path("runs") / cfg.scene_id
    outdir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = evaluate_scene(cfg)
    outputs = {}

    reports = [result.sigma_b_plus, result.sigma_b_minus, result.sigma_b_uv_plus,
               result.sigma_b_uv_minus, result.sigma_e, result.sigma_e_alt_profile]
    # annotate the two projector-Hall rows for readability
    quantities = ["sigma_b_plus", "sigma_b_minus", "sigma_b_uv_plus",
                  "sigma_b_uv_minus", "sigma_e", "sigma_e_alt_profile"]
    rows = []
    for name, rep in zip(quantities, reports):
        rows.append([cfg.scene_id, name, rep.value, rep.imag_residue,
                     rep.tail_estimate, rep.stability_delta, rep.full_trace,
                     rep.window.inner_half_width, rep.window.buffer,
                     rep.center[0], rep.center[1]])
    rows.append([cfg.scene_id, "residual_chi", result.residual_chi,
                 0.0, 0.0, 0.0, 0.0, cfg.inner_half_width,
                 cfg.half_width - cfg.inner_half_width, 0, 0])
    rows.append([cfg.scene_id, "residual_equality", result.residual_equality,
                 0.0, 0.0, 0.0, 0.0, cfg.inner_half_width,
                 cfg.half_width - cfg.inner_half_width, 0, 0])
    p = outdir / "conductance.csv"
    _write_csv(p, ["scene", "quantity", "value", "imag_residue", "tail",
                   "stability", "full_trace", "W", "B", "center_x1", "center_x2"], rows)
    outputs["conductance"] = str(p)

    rows = [[cfg.scene_id, "DIRECT", i, kind, contrib, result.chi.total]
            for (i, contrib), kind in zip(
                result.chi.per_curve,
                [c.kind for c in good_set_boundary(cfg.build_sets()[0])])]
    rows.append([cfg.scene_id, "DECOMPOSED", -1, "", result.chi.decomposed_total,
                 result.chi.decomposed_total])
    p = outdir / "intersection.csv"
    _write_csv(p, ["scene", "method", "curve", "kind", "contribution", "total"], rows)
    outputs["intersection"] = str(p)

    L = cfg.half_width
    rows = []
    for label, fld in (("K_UV_plus", result.kernel_field),
                       ("edge_integrand", result.edge_field)):
        vals = fld.values
        for i in range(vals.shape[0]):
            for j in range(vals.shape[1]):
                rows.append([cfg.scene_id, label, i - L, j - L,
                             float(vals[i, j].real), float(vals[i, j].imag)])
    p = outdir / "kernel_field.csv"
    _write_csv(p, ["scene", "field", "x1", "x2", "real", "imag"], rows)
    outputs["kernel_field"] = str(p)

    # decay diagnostics on the scene's bulk models
    w = BoxWindow(cfg.half_width, 2)
    decay_rows = []
    for tag, u in (("plus", cfg.u_plus), ("minus", cfg.u_minus)):
        H = build_qwz(u, w, nu=cfg.nu)
        for rep in (verify_esr(H, cfg.nu),
                    resolvent_decay_check(H, cfg.fermi + 0.5j)):
            decay_rows.append([cfg.scene_id, f"{rep.bound}_{tag}", rep.max_ratio,
                               rep.constant if rep.constant is not None else "",
                               rep.witness[0][0], rep.witness[0][1],
                               rep.witness[1][0], rep.witness[1][1],
                               rep.witness_distance, rep.passed])
    p = outdir / "decay.csv"
    _write_csv(p, ["scene", "bound", "max_ratio", "constant", "x1", "x2",
                   "y1", "y2", "d1", "passed"], decay_rows)
    outputs["decay"] = str(p)

    manifest = {
        "scene_id": cfg.scene_id,
        "config_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "timings": {**result.timings, "total": time.perf_counter() - t0},
        "outputs": outputs,
        "chi": result.chi.total,
        "residual_chi": result.residual_chi,
        "residual_equality": result.residual_equality,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    print(f"scene {cfg.scene_id}: chi = {result.chi.total:+d}, "
          f"sigma_e = {result.sigma_e.value:+.4f}, "
          f"residuals {result.residual_chi:.3g} / {result.residual_equality:.3g}")
    print(f"reports in {outdir}")
    return 0


def cmd_fuzz(args) -> int:
    if args.n < 1:
        print("fuzz: need --n >= 1", file=sys.stderr)
        return 2
    summary = fuzz_geometry(args.n, args.seed)
    for name in sorted(summary.checks):
        print(f"  {name}: {summary.checks[name]} checks")
    print(f"fuzz: {summary.scenes} scenes, {summary.failures} failures")
    if summary.failures:
        print(f"failing (seed, index) pairs: {summary.failed_seeds}", file=sys.stderr)
        return 1
    return 0


def cmd_lattice_build(args) -> int:
    if args.model != "qwz":
        print(f"unknown model {args.model}", file=sys.stderr)
        return 2
    w = BoxWindow(args.L, 2)
    H = build_qwz(args.u, w, periodic=args.periodic, nu=args.nu)
    out = Path(args.out)
    np.savez_compressed(out, entries=H.entries, L=args.L, m=2, nu=args.nu,
                        hop_range=H.hop_range, periodic=args.periodic, u=args.u)
    rep = verify_esr(H, args.nu) if not args.periodic else None
    esr = f", esr(nu={args.nu}) {'pass' if rep.passed else 'FAIL'}" if rep else ""
    print(f"qwz u={args.u} L={args.L} dim={H.dim} -> {out}{esr}")
    return 0


def _scene_sets(args):
    cfg = read_scene_config(Path(args.scene).read_text())
    return cfg, *cfg.build_sets()


def cmd_geom_trace(args) -> int:
    cfg, U, V = _scene_sets(args)
    S = U if args.which == "U" else V
    curves = good_set_boundary(S)
    rows = []
    for ci, c in enumerate(curves):
        for si, (qx, qy) in enumerate(c.points):
            rows.append([cfg.scene_id, args.which, ci, c.kind, si, int(qx), int(qy)])
    _write_csv(Path(args.out), ["scene", "set", "curve", "kind", "seq", "qx", "qy"], rows)
    print(f"{len(curves)} curves, {sum(len(c) for c in curves)} vertices -> {args.out}")
    return 0


def cmd_geom_chi(args) -> int:
    cfg, U, V = _scene_sets(args)
    rep = intersection_number(U, V)
    for i, contrib in rep.per_curve:
        print(f"  curve {i}: {contrib:+d}")
    print(f"chi = {rep.total:+d} (DIRECT) = {rep.decomposed_total:+d} (DECOMPOSED)")
    return 0


def cmd_geom_check_transverse(args) -> int:
    cfg, U, V = _scene_sets(args)
    rep = transversality_profile(U, V, args.c)
    for (r_lo, r_hi, psi_min, ratio_min) in rep.profile:
        print(f"  |x| in [{r_lo:.0f},{r_hi:.0f}): min Psi = {psi_min:.3f}, "
              f"min ln Psi/ln|x| = {ratio_min:.3f}")
    print(f"requested c = {args.c}: {'pass' if rep.verdict else 'FAIL'} "
          f"(window exponent estimate {rep.exponent_estimate:.3f}"
          f"{', boundary off-window' if rep.off_window else ''})")
    return 0 if rep.verdict else 1


def cmd_report_diff(args) -> int:
    a = Path(args.a).read_text().splitlines()
    b = Path(args.b).read_text().splitlines()
    diffs = 0
    for i in range(max(len(a), len(b))):
        la = a[i] if i < len(a) else "<missing>"
        lb = b[i] if i < len(b) else "<missing>"
        if la == lb:
            continue
        if args.tol > 0 and _rows_close(la, lb, args.tol):
            continue
        diffs += 1
        if diffs <= 20:
            print(f"line {i + 1}:\n  a: {la}\n  b: {lb}")
    print(f"{diffs} differing lines")
    return 1 if diffs else 0


def _rows_close(la: str, lb: str, tol: float) -> bool:
    ca, cb = la.split(","), lb.split(",")
    if len(ca) != len(cb):
        return False
    for va, vb in zip(ca, cb):
        if va == vb:
            continue
        try:
            if abs(float(va) - float(vb)) <= tol:
                continue
        except ValueError:
            return False
        return False
    return True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bulkedge",
        description="curved bulk-edge correspondence: conductance traces and "
                    "exact interface geometry on finite lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scene config end to end")
    p.add_argument("config")
    p.add_argument("--outdir", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fuzz", help="randomized geometry property suite")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fuzz)

    lat = sub.add_parser("lattice", help="model builders")
    lat_sub = lat.add_subparsers(dest="lattice_command", required=True)
    p = lat_sub.add_parser("build", help="build a Hamiltonian and dump it")
    p.add_argument("--model", default="qwz")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--nu", type=float, default=0.3)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--out", default="hamiltonian.npz")
    p.set_defaults(func=cmd_lattice_build)

    geom = sub.add_parser("geom", help="geometry tools")
    geom_sub = geom.add_subparsers(dest="geom_command", required=True)
    p = geom_sub.add_parser("trace", help="trace boundary curves to CSV")
    p.add_argument("--scene", required=True)
    p.add_argument("--which", choices=["U", "V"], default="U")
    p.add_argument("--out", default="curves.csv")
    p.set_defaults(func=cmd_geom_trace)
    p = geom_sub.add_parser("chi", help="intersection number of the scene")
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_geom_chi)
    p = geom_sub.add_parser("check-transverse", help="windowed transversality")
    p.add_argument("--scene", required=True)
    p.add_argument("--c", type=float, default=0.2)
    p.set_defaults(func=cmd_geom_check_transverse)

    rep = sub.add_parser("report", help="report utilities")
    rep_sub = rep.add_subparsers(dest="report_command", required=True)
    p = rep_sub.add_parser("diff", help="compare two CSV reports")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tol", type=float, default=0.0)
    p.set_defaults(func=cmd_report_diff)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
