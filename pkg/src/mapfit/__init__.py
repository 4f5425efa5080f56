"""mapfit: fit multi-protein assemblies into 3D density maps by choosing
one candidate placement per protein via binary quadratic assignment."""

from mapfit._backend import BACKEND
from mapfit.assembly import (
    AssemblyProblem,
    Placement,
    ScoreKind,
    build_constraint_matrix,
    build_overlap_matrix,
    build_problem,
    build_relevance_vector,
    generate_placements,
    pairwise_score,
    synthesize_placement_maps,
)
from mapfit.grid import (
    AtomRecord,
    DensityMap,
    Resolution,
    cross_correlate,
    gaussian_blur,
    gaussian_kernel,
    laplacian_filter,
    lattice_offset,
    regrid_onto,
    resample_fourier,
    synthesize_map,
    voxelize,
)
from mapfit.pdbio import atomic_number, parse_pdb
from mapfit.quality import (
    FitQuality,
    evaluate_fit,
    heavy_atoms,
    lap_score,
    mutual_information,
    probe_map,
    rmsd,
    select_metric,
)
from mapfit.solvers import (
    AssignmentVector,
    Mode,
    SAParams,
    SolveReport,
    acceptance_probability,
    enumerate_objectives,
    objective,
    round_assignment,
    solve,
    solve_bruteforce,
    solve_linear,
    solve_sa,
    solve_sdp,
    solve_shift,
    solve_sqp,
    spectrum_shift,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyProblem", "AssignmentVector", "AtomRecord", "BACKEND",
    "DensityMap", "FitQuality", "Mode", "Placement", "Resolution",
    "SAParams", "ScoreKind", "SolveReport", "acceptance_probability",
    "atomic_number", "build_constraint_matrix", "build_overlap_matrix",
    "build_problem", "build_relevance_vector", "cross_correlate",
    "enumerate_objectives", "evaluate_fit", "gaussian_blur",
    "gaussian_kernel", "generate_placements", "heavy_atoms", "lap_score",
    "laplacian_filter", "lattice_offset", "mutual_information", "objective",
    "pairwise_score", "parse_pdb", "probe_map", "regrid_onto",
    "resample_fourier", "rmsd", "round_assignment", "select_metric", "solve",
    "solve_bruteforce", "solve_linear", "solve_sa", "solve_sdp",
    "solve_shift", "solve_sqp", "spectrum_shift", "synthesize_map",
    "synthesize_placement_maps", "voxelize",
]
