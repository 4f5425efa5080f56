"""Candidate placements and construction of the assignment problem.

A problem instance over m proteins with N candidate positions each is the
bundle (Q, b, A): the n x n pairwise overlap matrix (n = m*N), the
per-placement relevance vector against the full complex map, and the
one-hot block constraint matrix.  Placement (i, k) maps to flat index
a = (i - 1) * N + (k - 1) in 0-based storage.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from mapfit import grid
from mapfit.grid import AtomRecord, DensityMap


class ScoreKind(enum.Enum):
    """Pairwise overlap score variants; all are minimize-is-better."""

    CCF = 0
    CONTACT = 1
    SKIN_CORE = 2
    CORE_SKIN = 3

    @classmethod
    def from_name(cls, name):
        key = name.strip().lower().replace("_", "-")
        table = {"ccf": cls.CCF, "contact": cls.CONTACT,
                 "skin-core": cls.SKIN_CORE, "core-skin": cls.CORE_SKIN}
        if key not in table:
            raise ValueError(f"unknown score kind: {name!r}")
        return table[key]

    @property
    def label(self):
        return self.name.lower().replace("_", "-")


@dataclass(frozen=True)
class Placement:
    """One candidate rigid position of one protein.

    protein_id i and position_id k are 1-based; the flat problem index is
    (i - 1) * N + (k - 1).  The map is synthesized from the atoms and may
    be attached after construction via with_map().
    """

    protein_id: int
    position_id: int
    atoms: tuple
    map: DensityMap = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def with_map(self, density_map):
        return replace(self, map=density_map)

    def flat_index(self, N):
        return (self.protein_id - 1) * N + (self.position_id - 1)


def _rotation_matrix(axis, angle_rad):
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def _transform_atoms(atoms, rotation, translation, pivot):
    moved = []
    for a in atoms:
        pos = rotation @ (a.position - pivot) + pivot + translation
        moved.append(AtomRecord(a.element, a.atomic_number, pos, a.protein_id))
    return moved


def generate_placements(native, N, max_rotation, max_translation, seed):
    """Candidate poses per protein: the native pose plus N-1 perturbations.

    ``native`` is a list of atom lists, one per protein.  Position k=1 is
    the native pose; the rest rotate the native pose about its centroid by
    a random axis-angle (angle <= max_rotation degrees) and translate it by
    a vector drawn uniformly from the ball of radius max_translation.
    Deterministic for a fixed seed.  Maps are not attached here; see
    synthesize_placement_maps.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not native:
        raise ValueError("need at least one protein")
    rng = np.random.default_rng(seed)
    placements = []
    for i, atoms in enumerate(native, start=1):
        atoms = [AtomRecord(a.element, a.atomic_number, a.position, i)
                 for a in atoms]
        pivot = np.mean([a.position for a in atoms], axis=0)
        placements.append(Placement(i, 1, atoms))
        for k in range(2, N + 1):
            axis = rng.normal(size=3)
            norm = np.linalg.norm(axis)
            axis = axis / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
            angle = np.deg2rad(rng.uniform(0.0, max_rotation))
            direction = rng.normal(size=3)
            dnorm = np.linalg.norm(direction)
            direction = (direction / dnorm if dnorm > 0
                         else np.array([1.0, 0.0, 0.0]))
            radius = max_translation * rng.uniform() ** (1.0 / 3.0)
            rotation = _rotation_matrix(axis, angle)
            moved = _transform_atoms(atoms, rotation, radius * direction,
                                     pivot)
            placements.append(Placement(i, k, moved))
    return placements


def synthesize_placement_maps(placements, voxel_size, resolution,
                              padding=None):
    """Attach a synthesized density map to every placement.

    All maps share the global lattice (origins are integer multiples of the
    voxel size), so they are mutually commensurate.
    """
    return [p.with_map(grid.synthesize_map(p.atoms, voxel_size, resolution,
                                           padding))
            for p in placements]


def pairwise_score(p, q, kind):
    """Overlap score between two placements of different proteins.

    CCF correlates the raw maps; Contact correlates both Laplacian-filtered
    maps; Skin-Core / Core-Skin filter only the first / second map.  All
    but CCF are negated so smaller is always better.
    """
    if p.protein_id == q.protein_id:
        raise ValueError(
            f"pairwise score needs distinct proteins, both are "
            f"{p.protein_id}"
        )
    if p.map is None or q.map is None:
        raise ValueError("placements must have maps attached")
    if kind is ScoreKind.CCF:
        return grid.cross_correlate(p.map, q.map)
    if kind is ScoreKind.CONTACT:
        return -grid.cross_correlate(grid.laplacian_filter(p.map),
                                     grid.laplacian_filter(q.map))
    if kind is ScoreKind.SKIN_CORE:
        return -grid.cross_correlate(grid.laplacian_filter(p.map), q.map)
    if kind is ScoreKind.CORE_SKIN:
        return -grid.cross_correlate(p.map, grid.laplacian_filter(q.map))
    raise ValueError(f"unknown score kind: {kind!r}")


def build_constraint_matrix(m, N):
    """m x (m*N) block matrix with a row of N ones per protein."""
    if m < 1 or N < 1:
        raise ValueError(f"m and N must be >= 1, got m={m}, N={N}")
    return np.kron(np.eye(m), np.ones((1, N)))


def build_overlap_matrix(placements, kind):
    """Symmetric n x n matrix of pairwise scores; same-protein blocks zero.

    Cross-protein entries are symmetrized as (s_ab + s_ba) / 2; for CCF and
    Contact the two orders are equal already, for Skin-Core / Core-Skin the
    mean combines the two filter orders.
    """
    m = max(p.protein_id for p in placements)
    N = max(p.position_id for p in placements)
    n = m * N
    if len(placements) != n:
        raise ValueError(
            f"expected {n} placements for m={m}, N={N}, got {len(placements)}"
        )
    by_index = {}
    for p in placements:
        by_index[p.flat_index(N)] = p
    if len(by_index) != n or sorted(by_index) != list(range(n)):
        raise ValueError("placement (protein, position) indices are not "
                         "a complete grid")

    # Laplacian-filtered maps are reused across pairs.
    if kind in (ScoreKind.CONTACT, ScoreKind.SKIN_CORE, ScoreKind.CORE_SKIN):
        filtered = {a: grid.laplacian_filter(p.map)
                    for a, p in by_index.items()}
    else:
        filtered = None

    def score(a, c):
        pa, pc = by_index[a], by_index[c]
        if kind is ScoreKind.CCF:
            return grid.cross_correlate(pa.map, pc.map)
        if kind is ScoreKind.CONTACT:
            return -grid.cross_correlate(filtered[a], filtered[c])
        if kind is ScoreKind.SKIN_CORE:
            return -grid.cross_correlate(filtered[a], pc.map)
        if kind is ScoreKind.CORE_SKIN:
            return -grid.cross_correlate(pa.map, filtered[c])
        raise ValueError(f"unknown score kind: {kind!r}")

    Q = np.zeros((n, n))
    for a in range(n):
        for c in range(a + 1, n):
            if by_index[a].protein_id == by_index[c].protein_id:
                continue
            s = 0.5 * (score(a, c) + score(c, a))
            Q[a, c] = s
            Q[c, a] = s
    return Q


def build_relevance_vector(placements, complex_map):
    """Laplacian-filtered correlation of each placement map against the
    complex map; higher is better (the objective subtracts b^T x)."""
    N = max(p.position_id for p in placements)
    lap_complex = grid.laplacian_filter(complex_map)
    b = np.zeros(len(placements))
    for p in placements:
        lap_p = grid.laplacian_filter(p.map)
        b[p.flat_index(N)] = grid.cross_correlate(lap_p, lap_complex)
    return b


@dataclass(frozen=True)
class AssemblyProblem:
    """The (Q, b, A, m, N) bundle defining one optimization instance."""

    m: int
    N: int
    Q: np.ndarray
    b: np.ndarray
    A: np.ndarray
    score_kind: ScoreKind = ScoreKind.CCF
    placements: tuple = None

    def __post_init__(self):
        n = self.m * self.N
        Q = np.ascontiguousarray(self.Q, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if b.shape != (n,):
            raise ValueError(f"b must have length {n}, got {b.shape}")
        if A.shape != (self.m, n):
            raise ValueError(f"A must be {self.m}x{n}, got {A.shape}")
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * _scale(Q)):
            raise ValueError("Q must be symmetric")
        for r in range(self.m):
            block = Q[r * self.N:(r + 1) * self.N, r * self.N:(r + 1) * self.N]
            if np.any(block != 0.0):
                raise ValueError(
                    f"same-protein block {r} of Q must be exactly zero"
                )
        for arr in (Q, b, A):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A", A)
        if self.placements is not None:
            object.__setattr__(self, "placements", tuple(self.placements))

    @property
    def n(self):
        return self.m * self.N


def _scale(Q):
    s = float(np.abs(Q).max()) if Q.size else 0.0
    return max(s, 1.0)


def build_problem(placements, complex_map, kind):
    """Assemble Q, b, A from placements with maps and the complex map."""
    m = max(p.protein_id for p in placements)
    N = max(p.position_id for p in placements)
    Q = build_overlap_matrix(placements, kind)
    b = build_relevance_vector(placements, complex_map)
    A = build_constraint_matrix(m, N)
    ordered = sorted(placements, key=lambda p: p.flat_index(N))
    return AssemblyProblem(m=m, N=N, Q=Q, b=b, A=A, score_kind=kind,
                           placements=ordered)
