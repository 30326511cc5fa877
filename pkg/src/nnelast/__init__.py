"""Normal-normal continuous mixed finite elements for 3D linear elasticity.

Three-field saddle-point discretization with a 30-DOF symmetric stress
element on tetrahedra: piecewise quadratic stresses with linear, continuous
normal-normal face traces, discontinuous P1 displacements, and a continuous
P1 trace field on the mesh skeleton.
"""

from .assembly_solve import (
    ElementMatrices,
    SaddleSystem,
    SolveReport,
    assemble,
    element_matrices,
    exact_simplex_integral,
    quad_rule,
    solve,
)
from .dof_system import GlobalDofMap, TraceField, apply_dirichlet, build_dof_map, trace_lift
from .errors import (
    DegenerateTet,
    NNElastError,
    NonConformingMesh,
    ParseError,
    SingularDofMatrix,
    SolverBreakdown,
    ToleranceNotReached,
)
from .harness_cli import ErrorRecord, ManufacturedSolution, StudyConfig, emit_csv, run_convergence
from .interpolation import DiscreteStressField, check_commuting, interpolate_nn, project_p1
from .kernels import BACKEND, ElementShapeData, build_element_data
from .mesh import MeshQualityReport, TetMesh, generate_box, import_ascii, quality
from .ref_element import (
    StressShapeSet,
    Tet,
    TetGeometry,
    build_nn_tensors,
    dof_matrix,
    geometry,
    nodal_basis,
    reduced_matrix_12,
    reference_tet,
    spanning_basis,
)
from .symtensor import Material, compliance_apply, deviator, stiffness_apply, sym_outer, trace

__version__ = "0.1.0"
