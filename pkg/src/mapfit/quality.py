"""Fit-quality metrics: paired-atom RMSD, correct-answer ratio, probe-map
synthesis, mutual information, and Laplacian-filtered correlation."""

import warnings
from dataclasses import dataclass

import numpy as np

from mapfit import grid
from mapfit.solvers import AssignmentVector, Mode

DEFAULT_RMSD_THRESHOLD = 10.0
DEFAULT_MI_BINS = 20


@dataclass(frozen=True)
class FitQuality:
    """Per-protein RMSD plus the derived correctness summary.

    beta is exactly (number of true flags) / m; flags are rmsd <= threshold
    (inclusive).  mi and lap_score are optional map-only metrics.
    """

    per_protein_rmsd: np.ndarray
    correct_flags: np.ndarray
    beta: float
    threshold: float
    mi: float = None
    lap_score: float = None

    def __post_init__(self):
        rmsd_values = np.ascontiguousarray(self.per_protein_rmsd,
                                           dtype=np.float64)
        flags = np.ascontiguousarray(self.correct_flags, dtype=bool)
        if rmsd_values.ndim != 1 or rmsd_values.shape != flags.shape:
            raise ValueError("per_protein_rmsd and correct_flags must be "
                             "1-D and the same length")
        expected = (rmsd_values <= self.threshold)
        if not np.array_equal(flags, expected):
            raise ValueError("correct_flags must equal "
                             "per_protein_rmsd <= threshold")
        if self.beta != flags.sum() / flags.size:
            raise ValueError("beta must equal correct count / m exactly")
        for arr in (rmsd_values, flags):
            arr.setflags(write=False)
        object.__setattr__(self, "per_protein_rmsd", rmsd_values)
        object.__setattr__(self, "correct_flags", flags)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def m(self):
        return self.per_protein_rmsd.size

    def to_csv(self):
        """Per-protein rows plus a summary row; optional metrics render
        as empty fields."""
        lines = ["protein_id,rmsd_A,correct"]
        for i in range(self.m):
            lines.append(
                f"{i + 1},{float(self.per_protein_rmsd[i])!r},"
                f"{str(bool(self.correct_flags[i])).lower()}"
            )
        lines.append("beta,mi,lap_score")
        mi_text = "" if self.mi is None else repr(float(self.mi))
        lap_text = "" if self.lap_score is None else repr(float(self.lap_score))
        lines.append(f"{self.beta!r},{mi_text},{lap_text}")
        return "\n".join(lines) + "\n"


def rmsd(predicted, native):
    """Root-mean-square deviation over pairs matched by list order, in Å.

    No superposition is applied; both poses are taken in the shared
    complex coordinate frame.
    """
    if len(predicted) == 0 or len(native) == 0:
        raise ValueError("rmsd needs at least one atom pair")
    if len(predicted) != len(native):
        raise ValueError(
            f"atom count mismatch: {len(predicted)} vs {len(native)}"
        )
    p = np.array([a.position for a in predicted])
    q = np.array([a.position for a in native])
    return float(np.sqrt(np.mean(np.sum((p - q) ** 2, axis=1))))


def heavy_atoms(atoms):
    return [a for a in atoms if not a.is_hydrogen]


def evaluate_fit(assignment, problem, native, threshold=DEFAULT_RMSD_THRESHOLD,
                 mi=None, lap=None):
    """Score a binary assignment against the native poses.

    native is a sequence of m atom lists (native pose per protein, same
    atom order as the placements).  Hydrogens are excluded from the RMSD
    pairing.  A protein is correct when its RMSD is <= threshold
    (inclusive); beta is the correct fraction.
    """
    if not isinstance(assignment, AssignmentVector) \
            or assignment.mode is not Mode.BINARY:
        raise ValueError("evaluate_fit needs a binary assignment")
    if (assignment.m, assignment.N) != (problem.m, problem.N):
        raise ValueError(
            f"assignment shape ({assignment.m}, {assignment.N}) does not "
            f"match problem ({problem.m}, {problem.N})"
        )
    if problem.placements is None:
        raise ValueError("problem has no placements attached")
    if len(native) != problem.m:
        raise ValueError(
            f"need {problem.m} native poses, got {len(native)}"
        )
    chosen = assignment.selected_positions()
    rmsd_values = np.empty(problem.m)
    for i in range(problem.m):
        placement = problem.placements[i * problem.N + chosen[i]]
        rmsd_values[i] = rmsd(heavy_atoms(placement.atoms),
                              heavy_atoms(native[i]))
    flags = rmsd_values <= threshold
    return FitQuality(
        per_protein_rmsd=rmsd_values,
        correct_flags=flags,
        beta=flags.sum() / problem.m,
        threshold=threshold,
        mi=mi,
        lap_score=lap,
    )


def probe_map_from_atoms(atoms, resolution, target):
    """Density map of an atom set, on the target map's lattice.

    Synthesized at 1 Å voxels with the blur width implied by the
    resolution, then Fourier-resampled to the target's voxel size.  The
    result is lattice-commensurate with target.
    """
    synthesized = grid.synthesize_map(
        atoms, 1.0, resolution,
        origin_anchor=target.origin,
        origin_spacing=target.voxel_size,
    )
    return grid.resample_fourier(synthesized, target.voxel_size)


def probe_map(assignment, problem, resolution, target):
    """Density map of the assigned poses, on the target map's lattice."""
    if problem.placements is None:
        raise ValueError("problem has no placements attached")
    chosen = assignment.selected_positions()
    atoms = []
    for i in range(problem.m):
        placement = problem.placements[i * problem.N + chosen[i]]
        atoms.extend(placement.atoms)
    return probe_map_from_atoms(atoms, resolution, target)


def _bin_indices(values, bins):
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return None
    scaled = (values.ravel() - lo) * (bins / (hi - lo))
    return np.minimum(scaled.astype(np.int64), bins - 1)


def mutual_information(probe, target, bins=DEFAULT_MI_BINS):
    """Histogram mutual information between two aligned maps, in nats.

    Each map is discretized into `bins` equal-width bins over its own
    range (top edge inclusive).  A constant map carries no information;
    that degenerate case returns 0 with a warning.
    """
    if probe.dims != target.dims:
        raise ValueError(
            f"maps must share dimensions, got {probe.dims} vs {target.dims}"
        )
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    x = _bin_indices(probe.values, bins)
    y = _bin_indices(target.values, bins)
    if x is None or y is None:
        warnings.warn("constant map has zero-width bins; "
                      "mutual information defined as 0")
        return 0.0
    joint = np.zeros((bins, bins))
    np.add.at(joint, (x, y), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    mask = joint > 0.0
    ratio = joint[mask] / np.outer(px, py)[mask]
    return float(np.sum(joint[mask] * np.log(ratio)))


def lap_score(probe, target):
    """Correlation of the Laplacian-filtered maps; higher is better."""
    return grid.cross_correlate(grid.laplacian_filter(probe),
                                grid.laplacian_filter(target))


def select_metric(resolution):
    """Map-only metric choice: contour correlation up to 10 Å resolution,
    mutual information beyond."""
    value = resolution.value if isinstance(resolution, grid.Resolution) \
        else float(resolution)
    return "lap" if value <= 10.0 else "mi"
