"""Build a disk mesh, assemble the P1 operators and check what they conserve.

Run: python3 demos/01_operators.py
"""
import numpy as np

from chemotax import P1Space, generate_disk_mesh, integrate, interpolate, mesh_area

mesh = generate_disk_mesh(radius=9.0, n_rings=20)
print(f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles, area {mesh_area(mesh):.4f}"
      f" (disk: {81 * np.pi:.4f})")

space = P1Space(mesh)
M, K = space.M, space.K

# Constants are in the kernel of the stiffness matrix.
print("max |K 1|        :", np.abs(K @ np.ones(space.n)).max())

# The mass matrix integrates P1 products exactly, so 1^T M u is the integral of u.
u = interpolate(mesh, lambda x, y: 15 * np.exp(-(x**2 + y**2)) * (81 - x**2 - y**2))
print("1^T M u vs int u :", np.ones(space.n) @ (M @ u.values), integrate(mesh, u))

# The transport matrix has zero column sums: advection moves mass, never creates it.
phi = interpolate(mesh, lambda x, y: np.exp(-(x**2 + y**2))).values
C = space.csr(space.convection_data(phi))
print("max column sum   :", np.abs(C.sum(axis=0)).max())
