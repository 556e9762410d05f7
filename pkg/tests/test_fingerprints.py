"""Fingerprint tests: spec examples, brute-force oracle equivalence,
similarity identities, permutation invariance, folding."""

import random

import pytest

from icma.chem import parse_smiles
from icma.fingerprints import (
    BothEmptyError,
    FingerprintError,
    FingerprintVector,
    dice,
    morgan_fingerprint,
    path_fingerprint,
    tanimoto,
)

from conftest import MOLECULES_50, random_rewrite
from oracles import brute_morgan_ids, brute_path_ids

# oracle enumeration is exponential in path length; keep it tractable
ORACLE_MOLECULES_30 = MOLECULES_50[:30]


class TestMorgan:
    def test_methane_single_environment(self):
        fp = morgan_fingerprint(parse_smiles("C"), radius=2)
        assert len(fp.ids) == 1

    def test_permutation_invariance_small(self):
        a = morgan_fingerprint(parse_smiles("CCO"), 2)
        b = morgan_fingerprint(parse_smiles("OCC"), 2)
        assert a == b

    def test_benzene_against_enumerator(self):
        mol = parse_smiles("c1ccccc1")
        fp = morgan_fingerprint(mol, 2)
        assert list(fp.ids) == brute_morgan_ids(mol, 2)
        assert len(set(fp.ids)) == 3  # one class per radius by symmetry

    def test_oracle_equivalence_corpus(self):
        for smiles in ORACLE_MOLECULES_30:
            mol = parse_smiles(smiles)
            fp = morgan_fingerprint(mol, 2)
            assert list(fp.ids) == brute_morgan_ids(mol, 2), smiles

    def test_permutation_invariance_corpus(self, rng):
        for smiles in ORACLE_MOLECULES_30:
            mol = parse_smiles(smiles)
            base = morgan_fingerprint(mol, 2)
            for _ in range(5):
                alt = parse_smiles(random_rewrite(mol, rng))
                assert morgan_fingerprint(alt, 2) == base, smiles

    def test_radius_monotonicity(self):
        for smiles in ORACLE_MOLECULES_30:
            mol = parse_smiles(smiles)
            prev = morgan_fingerprint(mol, 0)
            for radius in (1, 2, 3):
                cur = morgan_fingerprint(mol, radius)
                assert set(prev.ids) <= set(cur.ids)
                assert len(prev.ids) <= len(cur.ids)
                prev = cur

    def test_folding_soundness(self):
        for smiles in ORACLE_MOLECULES_30:
            mol = parse_smiles(smiles)
            narrow = morgan_fingerprint(mol, 2, width=1024)
            wide = morgan_fingerprint(mol, 2, width=2048)
            assert narrow.bits == frozenset(b % 1024 for b in wide.bits)

    def test_bits_are_folded_ids(self):
        fp = morgan_fingerprint(parse_smiles("CC(=O)O"), 2)
        assert fp.bits == frozenset(i % fp.width for i in fp.ids)

    def test_param_validation(self):
        mol = parse_smiles("C")
        with pytest.raises(FingerprintError):
            morgan_fingerprint(mol, radius=-1)
        with pytest.raises(FingerprintError):
            morgan_fingerprint(mol, radius=2, width=100)


class TestPath:
    def test_ethane_two_classes(self):
        fp = path_fingerprint(parse_smiles("CC"), max_len=7)
        assert len(set(fp.ids)) == 2  # C atom, C-C path

    def test_permutation_invariance_small(self):
        assert path_fingerprint(parse_smiles("CCO"), 5) == \
            path_fingerprint(parse_smiles("OCC"), 5)

    def test_ccoc_against_enumerator(self):
        mol = parse_smiles("CCOC")
        fp = path_fingerprint(mol, 7)
        assert list(fp.ids) == brute_path_ids(mol, 7)

    def test_oracle_equivalence_corpus(self):
        for smiles in ORACLE_MOLECULES_30:
            mol = parse_smiles(smiles)
            fp = path_fingerprint(mol, 4)
            assert list(fp.ids) == brute_path_ids(mol, 4), smiles

    def test_length_monotonicity(self):
        for smiles in ORACLE_MOLECULES_30[:10]:
            mol = parse_smiles(smiles)
            prev = path_fingerprint(mol, 1)
            for max_len in (2, 3, 4):
                cur = path_fingerprint(mol, max_len)
                assert set(prev.ids) <= set(cur.ids)
                assert len(prev.ids) <= len(cur.ids)
                prev = cur

    def test_param_validation(self):
        mol = parse_smiles("C")
        with pytest.raises(FingerprintError):
            path_fingerprint(mol, max_len=0)
        with pytest.raises(FingerprintError):
            path_fingerprint(mol, max_len=8)


class TestSimilarity:
    def test_dice_identity(self):
        fp = morgan_fingerprint(parse_smiles("CCO"), 2)
        assert dice(fp, fp) == 1.0

    def test_disjoint_zero(self):
        a = FingerprintVector("morgan", 2, 2048, ids=(1, 2, 3))
        b = FingerprintVector("morgan", 2, 2048, ids=(10, 11))
        assert dice(a, b) == 0.0
        assert tanimoto(a, b) == 0.0

    def test_spec_derived_pair(self):
        # brute-force set computation: CO at radius 2 has environments
        # {C, O, C-O(from C), C-O(from O)} minus duplicates; the shared
        # structures with CCOC fold to a small overlap
        a = morgan_fingerprint(parse_smiles("CO"), 2)
        b = morgan_fingerprint(parse_smiles("CCOC"), 2)
        inter = len(a.bits & b.bits)
        expected_dice = 2 * inter / (len(a.bits) + len(b.bits))
        expected_tanimoto = inter / len(a.bits | b.bits)
        assert dice(a, b) == pytest.approx(expected_dice)
        assert tanimoto(a, b) == pytest.approx(expected_tanimoto)

    def test_tanimoto_identity(self):
        fp = path_fingerprint(parse_smiles("CCOC"), 5)
        assert tanimoto(fp, fp) == 1.0

    def test_tanimoto_le_dice_on_random_pairs(self, rng):
        mols = [parse_smiles(s) for s in MOLECULES_50]
        fps = [morgan_fingerprint(m, 2) for m in mols]
        for _ in range(1000):
            a, b = rng.choice(fps), rng.choice(fps)
            t, d = tanimoto(a, b), dice(a, b)
            assert 0.0 <= t <= d <= 1.0

    def test_both_empty_reported(self):
        empty = FingerprintVector("morgan", 2, 2048, ids=())
        with pytest.raises(BothEmptyError):
            dice(empty, empty)
        with pytest.raises(BothEmptyError):
            tanimoto(empty, empty)

    def test_kind_width_mismatch(self):
        a = morgan_fingerprint(parse_smiles("C"), 2, 2048)
        b = path_fingerprint(parse_smiles("C"), 5, 2048)
        c = morgan_fingerprint(parse_smiles("C"), 2, 1024)
        with pytest.raises(FingerprintError):
            dice(a, b)
        with pytest.raises(FingerprintError):
            dice(a, c)

    def test_symmetry(self):
        a = morgan_fingerprint(parse_smiles("CCO"), 2)
        b = morgan_fingerprint(parse_smiles("CCOC"), 2)
        assert dice(a, b) == dice(b, a)
        assert tanimoto(a, b) == tanimoto(b, a)
