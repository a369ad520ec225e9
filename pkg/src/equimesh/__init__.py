"""Equidistributed structured meshes with overlapping Schwarz decomposition."""
from .assembly import BoundaryMode, StripProblem, compute_robin_rhs, interior_residual
from .grid import (ComputationalGrid, InterfaceTrace, PartitionError, PhysicalMesh, SubdomainSpec,
                   TransmissionKind, glue, make_uniform_mesh, partition_strips, read_mesh_csv,
                   write_mesh_csv)
from .kernels import BACKEND
from .monitor import DegenerateJacobianError, MonitorParams, monitor_matrix, s_form
from .nsolve import NewtonConfig, NewtonError, SingularMatrixError, lu_solve, newton_solve
from .quality import TangledMeshError, q_eq
from .schwarz import (ConvergenceHistory, SchwarzConfig, SchwarzError, SchwarzSolver,
                      run_overlap_sweep, run_p_sweep, schwarz_iterate, solve_single_domain)

__version__ = "0.1.0"
