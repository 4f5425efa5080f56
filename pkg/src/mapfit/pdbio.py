"""Minimal fixed-column PDB reader.

Parses ATOM/HETATM records only: x/y/z from columns 31-38/39-46/47-54
(f8.3) and the element symbol from columns 77-78.  Everything else is
skipped.  Chains become protein groups in order of first appearance.
"""

import numpy as np

from mapfit.grid import AtomRecord

# Atomic numbers for H through Zn; anything else is an error.
ELEMENT_NUMBERS = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Sc": 21, "Ti": 22,
    "V": 23, "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29,
    "Zn": 30,
}


def atomic_number(element):
    symbol = element.strip().capitalize()
    if symbol not in ELEMENT_NUMBERS:
        raise ValueError(f"unknown element symbol: {element!r}")
    return ELEMENT_NUMBERS[symbol]


def parse_pdb(path):
    """Read a PDB file into a list of atom groups, one per chain.

    Returns (groups, chain_ids) where groups is a list of AtomRecord lists
    in chain order of first appearance; protein_id is the 1-based group
    index.  Raises ValueError with the line number on malformed records.
    """
    groups = []
    chain_ids = []
    chain_to_group = {}
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            if not (line.startswith("ATOM") or line.startswith("HETATM")):
                continue
            try:
                x = float(line[30:38])
                y = float(line[38:46])
                z = float(line[46:54])
            except (ValueError, IndexError) as exc:
                raise ValueError(
                    f"{path}:{lineno}: bad coordinate field: {exc}"
                ) from None
            element = line[76:78].strip()
            try:
                number = atomic_number(element)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            chain = line[21] if len(line) > 21 else " "
            if chain not in chain_to_group:
                chain_to_group[chain] = len(groups)
                groups.append([])
                chain_ids.append(chain)
            gid = chain_to_group[chain]
            groups[gid].append(AtomRecord(
                element=element.capitalize(),
                atomic_number=number,
                position=np.array([x, y, z]),
                protein_id=gid + 1,
            ))
    if not groups:
        raise ValueError(f"{path}: no ATOM/HETATM records found")
    return groups, chain_ids
