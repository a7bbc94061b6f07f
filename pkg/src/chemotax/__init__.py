"""Finite-element simulation and boundedness theory for attraction-repulsion chemotaxis."""
from .fem import (
    Field,
    P1Space,
    apply_production,
    assemble_convection,
    assemble_mass,
    assemble_stiffness,
    integrate,
    interpolate,
)
from .linalg import SolveReport, bicgstab_solve, cg_solve, zero_mean_solve
from .mesh import TriMesh, generate_disk_mesh, load_mesh, mesh_area, save_mesh
from .simulator import Outcome, SimResult, SimState, SteadyConfig, run
from .theory import ModelParams, RegimeVerdict, Verdict, classify, equilibrium, theta0

__version__ = "0.1.0"
