"""Tests for the fixed-column structure-file reader."""

import numpy as np
import pytest

from mapfit.pdbio import ELEMENT_NUMBERS, atomic_number, parse_pdb

from conftest import pdb_line


# ---------------------------------------------------------------------------
# Element table
# ---------------------------------------------------------------------------

def test_element_table_covers_hydrogen_through_zinc():
    assert ELEMENT_NUMBERS["H"] == 1
    assert ELEMENT_NUMBERS["C"] == 6
    assert ELEMENT_NUMBERS["N"] == 7
    assert ELEMENT_NUMBERS["O"] == 8
    assert ELEMENT_NUMBERS["S"] == 16
    assert ELEMENT_NUMBERS["Fe"] == 26
    assert ELEMENT_NUMBERS["Zn"] == 30
    assert len(ELEMENT_NUMBERS) == 30
    assert sorted(ELEMENT_NUMBERS.values()) == list(range(1, 31))


def test_atomic_number_normalizes_case_and_whitespace():
    assert atomic_number(" C") == 6
    assert atomic_number("FE") == 26
    assert atomic_number("fe") == 26
    assert atomic_number("Zn ") == 30


def test_atomic_number_rejects_unknown_symbols():
    with pytest.raises(ValueError):
        atomic_number("Xx")
    with pytest.raises(ValueError):
        atomic_number("")
    with pytest.raises(ValueError):
        atomic_number("Se")  # beyond the supported range


# ---------------------------------------------------------------------------
# Record parsing
# ---------------------------------------------------------------------------

def test_parse_reads_fixed_column_coordinates(tmp_path):
    path = tmp_path / "one.pdb"
    path.write_text(
        pdb_line(1, "CA", "GLY", "A", 1, 12.345, -6.789, 0.001, "C") + "\n")
    groups, chain_ids = parse_pdb(path)
    assert chain_ids == ["A"]
    (atom,) = groups[0]
    np.testing.assert_allclose(atom.position, [12.345, -6.789, 0.001])
    assert atom.element == "C"
    assert atom.atomic_number == 6
    assert atom.protein_id == 1


def test_parse_groups_chains_by_first_appearance(tmp_path):
    lines = [
        pdb_line(1, "CA", "GLY", "B", 1, 1.0, 0.0, 0.0, "C"),
        pdb_line(2, "CA", "GLY", "A", 1, 2.0, 0.0, 0.0, "N"),
        pdb_line(3, "CB", "GLY", "B", 2, 3.0, 0.0, 0.0, "O"),
    ]
    path = tmp_path / "two.pdb"
    path.write_text("\n".join(lines) + "\n")
    groups, chain_ids = parse_pdb(path)
    assert chain_ids == ["B", "A"]
    assert [len(g) for g in groups] == [2, 1]
    assert [a.protein_id for a in groups[0]] == [1, 1]
    assert groups[1][0].protein_id == 2
    assert groups[0][1].element == "O"


def test_parse_includes_hetatm_records(tmp_path):
    lines = [
        pdb_line(1, "CA", "GLY", "A", 1, 0.0, 0.0, 0.0, "C"),
        pdb_line(2, "ZN", "ZN", "A", 2, 1.0, 1.0, 1.0, "ZN",
                 record="HETATM"),
    ]
    path = tmp_path / "het.pdb"
    path.write_text("\n".join(lines) + "\n")
    groups, _ = parse_pdb(path)
    assert [a.atomic_number for a in groups[0]] == [6, 30]


def test_parse_skips_non_atom_records(tmp_path):
    lines = [
        "HEADER    TEST",
        "REMARK  1 nothing to see",
        pdb_line(1, "CA", "GLY", "A", 1, 0.0, 0.0, 0.0, "C"),
        "TER",
        "END",
    ]
    path = tmp_path / "mixed.pdb"
    path.write_text("\n".join(lines) + "\n")
    groups, chain_ids = parse_pdb(path)
    assert len(groups) == 1
    assert len(groups[0]) == 1


def test_parse_keeps_hydrogens_in_groups(tmp_path):
    lines = [
        pdb_line(1, "CA", "GLY", "A", 1, 0.0, 0.0, 0.0, "C"),
        pdb_line(2, "H", "GLY", "A", 1, 0.5, 0.0, 0.0, "H"),
    ]
    path = tmp_path / "hyd.pdb"
    path.write_text("\n".join(lines) + "\n")
    groups, _ = parse_pdb(path)
    assert [a.is_hydrogen for a in groups[0]] == [False, True]


def test_parse_error_reports_line_number_for_bad_element(tmp_path):
    lines = [
        pdb_line(1, "CA", "GLY", "A", 1, 0.0, 0.0, 0.0, "C"),
        pdb_line(2, "XX", "GLY", "A", 2, 1.0, 0.0, 0.0, "Xx"),
    ]
    path = tmp_path / "bad.pdb"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match=":2:"):
        parse_pdb(path)


def test_parse_error_reports_line_number_for_bad_coordinates(tmp_path):
    good = pdb_line(1, "CA", "GLY", "A", 1, 0.0, 0.0, 0.0, "C")
    bad = good[:30] + "  not  a" + good[38:]
    path = tmp_path / "badxyz.pdb"
    path.write_text(good + "\n" + bad + "\n")
    with pytest.raises(ValueError, match=":2:"):
        parse_pdb(path)


def test_parse_rejects_files_without_atoms(tmp_path):
    path = tmp_path / "empty.pdb"
    path.write_text("HEADER    EMPTY\nEND\n")
    with pytest.raises(ValueError, match="no ATOM"):
        parse_pdb(path)


def test_parse_round_trips_chain_writer(tmp_path, pdb_writer, toy_chains):
    path = pdb_writer(tmp_path / "toy.pdb", list(toy_chains))
    groups, chain_ids = parse_pdb(path)
    assert chain_ids == ["A", "B"]
    assert [len(g) for g in groups] == [20, 20]
    for parsed, original in zip(groups[0], toy_chains[0]):
        np.testing.assert_allclose(parsed.position, original.position,
                                   atol=5e-4)  # written with 3 decimals
        assert parsed.atomic_number == original.atomic_number
