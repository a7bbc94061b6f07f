"""Command-line front end: ``chemotax {mesh-gen,classify,simulate,sweep}``.

Exit codes: 0 success, 1 simulation-level failure, 2 usage/config error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .fem import save_field_csv
from .harness import (
    ConfigError,
    build_mesh,
    parse_config,
    parse_sweep,
    run_sweep,
    simulate,
    write_sweep_csv,
)
from .mesh import MeshError, generate_disk_mesh, mesh_area, save_mesh
from .simulator import Outcome, write_diagnostics_csv
from .theory import ModelParams, classify, theta0


def _mesh_gen(args) -> int:
    mesh = generate_disk_mesh(args.radius, args.n_rings)
    save_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, "
          f"area {mesh_area(mesh):.6f}")
    return 0


def _classify(args) -> int:
    params = ModelParams(
        k=args.k, l=args.l, alpha=args.alpha, gamma0=args.gamma0,
        gamma1=args.gamma1, chi=args.chi, xi=args.xi,
        tau=args.tau, variant=args.variant, n=args.n,
    )
    v = classify(params)
    print(f"{v.verdict.value}  [{v.matched_condition}]  Theta0={theta0(params):.6g}")
    return 0


def _simulate(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    mesh = build_mesh(cfg)
    res = simulate(cfg, mesh)
    write_diagnostics_csv(res.rows, out / "diagnostics.csv")
    st = res.final_state
    save_field_csv(mesh, st.u, out / "final_u.csv")
    if st.v is not None:
        save_field_csv(mesh, st.v, out / "final_v.csv")
    if st.w is not None:
        save_field_csv(mesh, st.w, out / "final_w.csv")
    verdict = classify(cfg.params())
    t_max = "+inf" if res.t_max_estimate is None else f"{res.t_max_estimate:.6g}"
    print(f"outcome={res.outcome.value} t_max={t_max} steps={st.step} "
          f"verdict={verdict.verdict.value}")
    if res.outcome is Outcome.SOLVER_FAILURE:
        print(f"solver failure: {res.message}", file=sys.stderr)
        return 1
    return 0


def _sweep(args) -> int:
    spec = parse_sweep(args.spec)
    report = run_sweep(spec, args.parallel)
    write_sweep_csv(report, args.out)
    for r in report.rows:
        print(f"row {r.index}: tau={r.tau} k={r.k:g} l={r.l:g} Theta0={r.theta0:.3g} "
              f"-> {r.outcome} T_max={r.t_max_label or '-'} ({r.verdict})")
    bad = report.contradictions
    if bad:
        for r in bad:
            print(f"ERROR: row {r.index} blew up but theory guarantees boundedness "
                  f"({r.matched_condition}); this indicates a solver defect",
                  file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemotax", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh-gen", help="write a ring mesh of a disk")
    p.add_argument("--radius", type=float, default=9.0)
    p.add_argument("--n-rings", type=int, default=40)
    p.add_argument("--out", default="disk.mesh")
    p.set_defaults(func=_mesh_gen)

    p = sub.add_parser("classify", help="boundedness verdict for a parameter set")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--tau", type=int, choices=(0, 1), default=0)
    p.add_argument("--variant", choices=("local", "nonlocal"), default="local")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--l", type=float, required=True)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--gamma1", type=float, default=None)
    p.set_defaults(func=_classify)

    p = sub.add_parser("simulate", help="run one configuration")
    p.add_argument("config")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_simulate)

    p = sub.add_parser("sweep", help="run a sweep spec and write a summary CSV")
    p.add_argument("spec")
    p.add_argument("--parallel", type=int, default=None)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MeshError, ValueError, OSError) as exc:
        print(f"chemotax {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
