"""Shared fixtures and independent oracles for the mapfit test suite.

The enumeration oracle here is written from scratch (itertools over raw
matrix entries) so solver results are checked against arithmetic that
shares no code with the package internals.
"""

import itertools

import numpy as np
import pytest

from mapfit import assembly
from mapfit.grid import AtomRecord, Resolution
from mapfit.pdbio import atomic_number


# ---------------------------------------------------------------------------
# Random problem instances
# ---------------------------------------------------------------------------

def make_random_problem(m, N, seed, scale=1.0):
    """Random symmetric assembly problem with zero same-protein blocks."""
    rng = np.random.default_rng(seed)
    n = m * N
    Q = np.zeros((n, n))
    for i in range(m):
        for j in range(i + 1, m):
            block = rng.normal(size=(N, N)) * scale
            Q[i * N:(i + 1) * N, j * N:(j + 1) * N] = block
            Q[j * N:(j + 1) * N, i * N:(i + 1) * N] = block.T
    b = rng.normal(size=n)
    A = assembly.build_constraint_matrix(m, N)
    return assembly.AssemblyProblem(m=m, N=N, Q=Q, b=b, A=A)


def oracle_enumerate(problem):
    """All feasible selections and objectives by direct double summation.

    Returns (choices, objectives) in lexicographic order of the per-protein
    position indices (first protein slowest).  Independent of the package's
    own enumeration code.
    """
    m, N = problem.m, problem.N
    choices = []
    objectives = []
    for combo in itertools.product(range(N), repeat=m):
        flat = [i * N + k for i, k in enumerate(combo)]
        total = 0.0
        for a in flat:
            total -= problem.b[a]
            for c in flat:
                total += problem.Q[a, c]
        choices.append(combo)
        objectives.append(total)
    return np.array(choices), np.array(objectives)


@pytest.fixture
def random_problem():
    return make_random_problem


@pytest.fixture
def enumerate_feasible():
    return oracle_enumerate


# ---------------------------------------------------------------------------
# Atom and structure builders
# ---------------------------------------------------------------------------

def make_atom(x, y, z, element="C", protein_id=0):
    return AtomRecord(element, atomic_number(element), np.array([x, y, z]),
                      protein_id=protein_id)


def toy_chain_pair():
    """Two short helical chains that overlap enough to score against each
    other but sit at distinct locations (20 heavy atoms each)."""
    t = np.arange(20, dtype=np.float64)
    pos1 = np.stack([3 * np.cos(0.6 * t), 3 * np.sin(0.6 * t), 1.2 * t],
                    axis=1)
    pos2 = np.stack([10 + 3 * np.cos(0.7 * t), 3 * np.sin(0.7 * t),
                     0.96 * t + 2.0], axis=1)
    chain1 = [AtomRecord("C", 6, p, protein_id=1) for p in pos1]
    chain2 = [AtomRecord("N", 7, p, protein_id=2) for p in pos2]
    return chain1, chain2


@pytest.fixture
def atom_factory():
    return make_atom


@pytest.fixture
def toy_chains():
    return toy_chain_pair()


def build_toy_assembly(kind=assembly.ScoreKind.CONTACT, n_positions=4,
                       seed=7, voxel_size=1.0, resolution_value=10.0):
    """Full two-protein problem: natives, perturbed placements, maps."""
    chain1, chain2 = toy_chain_pair()
    natives = [chain1, chain2]
    placements = assembly.generate_placements(natives, n_positions,
                                              max_rotation=60.0,
                                              max_translation=6.0, seed=seed)
    resolution = Resolution(resolution_value)
    placements = assembly.synthesize_placement_maps(placements, voxel_size,
                                                    resolution)
    from mapfit.grid import synthesize_map
    complex_map = synthesize_map(chain1 + chain2, voxel_size, resolution)
    problem = assembly.build_problem(placements, complex_map, kind)
    return {
        "natives": natives,
        "placements": placements,
        "complex_map": complex_map,
        "problem": problem,
        "voxel_size": voxel_size,
        "resolution": resolution,
    }


@pytest.fixture(scope="session")
def toy_assembly():
    return build_toy_assembly()


# ---------------------------------------------------------------------------
# Fixed-column structure files
# ---------------------------------------------------------------------------

def pdb_line(serial, name, resname, chain, resseq, x, y, z, element,
             record="ATOM  "):
    return (f"{record}{serial:>5} {name:<4} {resname:<3} {chain}{resseq:>4}"
            f"    {x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}"
            f"          {element:>2}")


def write_chain_pdb(path, chains):
    """Write chains (list of lists of AtomRecord) as a fixed-column file."""
    lines = []
    serial = 1
    chain_ids = "ABCDEFGH"
    for ci, atoms in enumerate(chains):
        for ai, atom in enumerate(atoms):
            x, y, z = (float(v) for v in atom.position)
            lines.append(pdb_line(serial, atom.element, "GLY",
                                  chain_ids[ci], ai + 1, x, y, z,
                                  atom.element))
            serial += 1
    lines.append("END")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def pdb_writer():
    return write_chain_pdb
