"""Convex geometry of two-body reduced density matrices for two-mode
collective-spin models."""

__version__ = "0.1.0"

from .spinops import (  # noqa: E402
    MODELS,
    BandedHermitian,
    HamiltonianSpec,
    Model,
    OperatorKind,
    assemble_hamiltonian,
    build_operator,
    model_preset,
)
from .eigen import ConvergenceError, GroundSolution, lowest_eigenpairs, spectrum_full  # noqa: E402
from .sweep import (  # noqa: E402
    BoundaryPoint,
    DirectionGrid,
    TwoRDM,
    boundary_point,
    build_two_rdm,
    observable_coords,
    project_2d,
    resolve_exposed_face,
    trace_boundary,
)
from .meanfield import (  # noqa: E402
    ConvexBody3,
    boundary_membership,
    extreme_point,
    limit_body,
    meanfield_energy,
    ruling_line,
    supporting_plane,
)
from .ruling import (  # noqa: E402
    RulingReport,
    ScalingSeries,
    classify,
    convergence_metric,
    detect_flat_faces,
    parse_family,
    scan_family,
)
