"""A repulsion-dominated run (k < l) spreading out toward its constant equilibrium.

Run: python3 demos/02_boundedness.py   (about 20 s)

The bell-shaped initial density diffuses and is pushed apart by the
repellent.  The total mass stays fixed, so max u decays toward
mass / area.  This takes a few time units, far longer than the blow-up
runs in demos/03_blowup.py.
"""
from chemotax import classify, mesh_area
from chemotax.harness import RunConfig, build_mesh, simulate
from chemotax.theory import equilibrium

cfg = RunConfig(tau=0, k=1.1, l=1.2, n_rings=15, dt=1e-3, t_end=10.0, record_every=250)
print("verdict:", classify(cfg.params()))

mesh = build_mesh(cfg)
res = simulate(cfg, mesh)
for row in res.rows:
    print(f"t={row.time:7.3f}  max_u={row.max_u:10.4f}  mass={row.mass:.10g}")

u_eq, v_eq, w_eq = equilibrium(cfg.params(), res.rows[0].mass, mesh_area(mesh))
print(f"{res.outcome.value} at t={res.final_state.time:.3f}; equilibrium u={u_eq:.4f} "
      f"v={v_eq:.4f} w={w_eq:.4f}")
