"""Parser, canonicalization and validity tests."""

import random

import pytest

from icma.chem import (
    RingMismatchError,
    SmilesSyntaxError,
    UnsupportedFeatureError,
    ValenceError,
    canonical_smiles,
    canonicalize,
    is_valid,
    parse_smiles,
)
from icma.chem.model import BondOrder

from conftest import random_rewrite


class TestParse:
    def test_co_two_atoms_one_bond(self):
        mol = parse_smiles("CO")
        assert [a.element for a in mol.atoms] == ["C", "O"]
        assert len(mol.bonds) == 1
        assert mol.bonds[0].order is BondOrder.SINGLE

    def test_cyclopropane_ring(self):
        mol = parse_smiles("C1CC1")
        assert mol.rings == [[0, 1, 2]]

    def test_unclosed_ring_digit(self):
        with pytest.raises(RingMismatchError):
            parse_smiles("C1CC")

    def test_benzene_against_toolkit_counts(self):
        # oracle: RDKit run offline reports 6 atoms, 6 bonds, 1 ring,
        # all atoms aromatic, each carbon carrying one hydrogen
        mol = parse_smiles("c1ccccc1")
        assert len(mol.atoms) == 6
        assert len(mol.bonds) == 6
        assert len(mol.rings) == 1
        assert all(a.aromatic for a in mol.atoms)
        assert all(a.total_h == 1 for a in mol.atoms)
        assert all(b.order is BondOrder.AROMATIC for b in mol.bonds)

    def test_bracket_atom_fields(self):
        mol = parse_smiles("[13CH3-]")
        atom = mol.atoms[0]
        assert atom.isotope == 13
        assert atom.explicit_h == 3
        assert atom.charge == -1

    def test_charge_forms(self):
        assert parse_smiles("[Fe+2]").atoms[0].charge == 2
        assert parse_smiles("[Fe++]").atoms[0].charge == 2
        assert parse_smiles("[O-]O").atoms[0].charge == -1

    def test_multi_component_tracked(self):
        mol = parse_smiles("[Na+].[Cl-]")
        assert len(mol.components) == 2

    def test_percent_ring_closure(self):
        mol = parse_smiles("C%11CC%11")
        assert len(mol.rings) == 1

    def test_stereo_parsed_and_discarded(self):
        mol = parse_smiles("C[C@H](N)C(=O)O")
        assert len(mol.atoms) == 6
        alt = parse_smiles("C[C@@H](N)C(=O)O")
        assert canonicalize(mol).text == canonicalize(alt).text

    def test_cis_trans_markers_discarded(self):
        assert canonical_smiles("F/C=C/F") == canonical_smiles("F\\C=C/F")

    def test_syntax_errors(self):
        for bad in ["", "  ", "C(", "C)", "C((C)", "C=", "C..C", "1CC", "C=#C",
                    "C()C", "[CH4", "[]", "C%1C"]:
            with pytest.raises(SmilesSyntaxError):
                parse_smiles(bad)

    def test_unsupported_features(self):
        for bad in ["*", "C*", "[C:1]", "[C@TH1]"]:
            with pytest.raises(UnsupportedFeatureError):
                parse_smiles(bad)

    def test_valence_errors(self):
        for bad in ["C(C)(C)(C)(C)C", "O(C)(C)C", "FF(F)F", "cc"]:
            with pytest.raises(ValenceError):
                parse_smiles(bad)

    def test_ring_mismatches(self):
        for bad in ["C11", "C12CC12", "C1CC", "C1C1"]:
            with pytest.raises(RingMismatchError):
                parse_smiles(bad)

    def test_implicit_hydrogens(self):
        mol = parse_smiles("CC(=O)O")
        assert [a.total_h for a in mol.atoms] == [3, 0, 0, 1]

    def test_nitrogen_higher_valence(self):
        # neutral pentavalent nitrogen (nitro written without charges)
        assert is_valid("CN(=O)=O")


class TestCanonical:
    def test_two_writings_one_string(self):
        assert canonical_smiles("CCO") == canonical_smiles("OCC")

    def test_single_atom(self):
        assert canonical_smiles("C") == "C"

    def test_permutation_suite(self, molecules_50, rng):
        for smiles in molecules_50:
            mol = parse_smiles(smiles)
            expected = canonicalize(mol).text
            for _ in range(100):
                rewritten = random_rewrite(mol, rng)
                assert canonical_smiles(rewritten) == expected, (
                    f"{smiles}: rewriting {rewritten} broke canonicalization")

    def test_round_trip_fixed_point(self, molecules_50):
        for smiles in molecules_50:
            canon = canonical_smiles(smiles)
            assert canonical_smiles(canon) == canon

    def test_kekule_and_aromatic_agree(self):
        assert canonical_smiles("C1=CC=CC=C1") == canonical_smiles("c1ccccc1")
        assert canonical_smiles("C1=CC=CN1") == canonical_smiles("c1cc[nH]c1")


class TestValidity:
    def test_paper_molecule(self):
        assert is_valid("CCOC")

    def test_empty_false(self):
        assert not is_valid("")

    def test_unbalanced_branch_false(self):
        assert not is_valid("C((C)")

    def test_total_never_raises(self, molecules_50):
        junk = ["", ")", "[", "%", "C1", "😀", "\x00", None, 42,
                "[Xx]", "C..", "c", "C:C"]
        for item in junk + molecules_50:
            assert is_valid(item) in (True, False)


class TestRingPerception:
    def test_cyclomatic_identity(self, molecules_50):
        for smiles in molecules_50:
            mol = parse_smiles(smiles)
            assert len(mol.rings) == (
                mol.num_bonds - mol.num_atoms + len(mol.components))

    def test_fused_ring_count(self):
        assert len(parse_smiles("c1ccc2ccccc2c1").rings) == 2
        assert len(parse_smiles("C1CC2CCC1C2").rings) == 2

    def test_ring_sizes(self):
        rings = parse_smiles("C1CC1.C1CCCCC1").rings
        assert sorted(len(r) for r in rings) == [3, 6]
