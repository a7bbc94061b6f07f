"""Attraction-dominated growth (k > l): compare elliptic and parabolic signals.

Run: python3 demos/03_blowup.py   (about 10 s)

With k = 1.1 > l = 0.9 no boundedness criterion applies and the density
concentrates at the origin.  The threshold crossing max u >= 1e4 is the
blow-up time estimate.  Parabolic signals (tau = 1) respond with a delay,
so the crossing happens later.  On a fixed mesh these times are only
order-of-magnitude estimates; refine n_rings to see them move.
"""
from dataclasses import replace

from chemotax import P1Space
from chemotax.harness import RunConfig, build_mesh, simulate

base = RunConfig(k=1.1, l=0.9, alpha=1.0, gamma0=1.0, n_rings=30, dt=1e-5,
                 t_end=0.05, record_every=200)
mesh = build_mesh(base)
space = P1Space(mesh)

for tau in (0, 1):
    cfg = replace(base, tau=tau)
    res = simulate(cfg, mesh, space)
    peak = res.rows[-1].max_u
    print(f"tau={tau}: {res.outcome.value}, T_max ~ {res.t_max_estimate:.5g}, last max_u={peak:.4g}")
