"""Metric-suite tests: paper worked examples, hand fixtures, identities."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icma.metrics import (
    BLEU_EPSILON,
    EmptyInputError,
    EvalPair,
    bleu,
    evaluate,
    exact_match,
    fts_metrics,
    levenshtein,
    mean_levenshtein,
    meteor_lite,
    meteor_lite_pair,
    rouge,
    validity_rate,
)


def cap_pair(pid, ref, hyp):
    return EvalPair(pid, ref, hyp, "mol2cap")


def mol_pair(pid, ref, hyp):
    return EvalPair(pid, ref, hyp, "cap2mol")


class TestLevenshtein:
    def test_paper_worked_examples(self):
        assert levenshtein("CO", "CCOC") == 2
        assert levenshtein("CCC", "CCOC") == 1

    def test_identity(self):
        assert levenshtein("CCOC", "CCOC") == 0

    def test_known_distances(self):
        assert levenshtein("", "abc") == 3
        assert levenshtein("kitten", "sitting") == 3

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=20), st.text(max_size=20), st.text(max_size=20))
    def test_metric_axioms(self, a, b, c):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert (levenshtein(a, b) == 0) == (a == b)
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    def test_mean_aggregation(self):
        pairs = [mol_pair("1", "CO", "CCOC"), mol_pair("2", "CCC", "CCOC")]
        assert mean_levenshtein(pairs) == 1.5


class TestBleu:
    def test_identity_corpus(self):
        pairs = [cap_pair(str(i), f"the molecule number {i} is an acid",
                          f"the molecule number {i} is an acid")
                 for i in range(4)]
        assert bleu(pairs, 4) == pytest.approx(1.0)
        assert bleu(pairs, 2) == pytest.approx(1.0)

    def test_zero_overlap_at_floor(self):
        pairs = [cap_pair("1", "aaa bbb ccc ddd", "xxx yyy zzz www")]
        score = bleu(pairs, 4)
        assert 0 <= score <= BLEU_EPSILON

    def test_two_pair_hand_fixture(self):
        # pair 1: hyp "the cat sat" vs ref "the cat sat down"
        # pair 2: hyp "a dog"       vs ref "a dog"
        # 1-grams: matches 3+2=5 of 3+2=5; 2-grams: 2+1=3 of 2+1=3
        # 3-grams: 1+0 of 1+0=1; 4-grams: 0 of 0 (smoothed eps/1)
        # hyp_len 5, ref_len 6 -> BP = exp(1 - 6/5)
        pairs = [cap_pair("1", "the cat sat down", "the cat sat"),
                 cap_pair("2", "a dog", "a dog")]
        log_sum = (math.log(5 / 5) + math.log(3 / 3) + math.log(1 / 1)
                   + math.log(BLEU_EPSILON / 1)) / 4
        expected = math.exp(1 - 6 / 5) * math.exp(log_sum)
        assert bleu(pairs, 4) == pytest.approx(expected, abs=1e-6)

    def test_character_tokens_for_cap2mol(self):
        pairs = [mol_pair("1", "CCO", "CCO")]
        assert bleu(pairs, 2) == pytest.approx(1.0)
        word_pairs = [cap_pair("1", "CCO", "CCO")]
        # same text, word tokens: single token, no 2-grams -> smoothing floor
        assert bleu(word_pairs, 2) < 1.0

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            bleu([], 4)


class TestRouge:
    def test_identity(self):
        pairs = [cap_pair("1", "an aromatic ring", "an aromatic ring")]
        for variant in ("1", "2", "L"):
            assert rouge(pairs, variant) == pytest.approx(1.0)

    def test_disjoint(self):
        pairs = [cap_pair("1", "aaa bbb", "ccc ddd")]
        for variant in ("1", "2", "L"):
            assert rouge(pairs, variant) == 0.0

    def test_hand_value(self):
        # P = 2/2, R = 2/3 -> F1 = 0.8
        pairs = [cap_pair("1", "the cat sat", "the cat")]
        assert rouge(pairs, "1") == pytest.approx(0.8)

    def test_rouge_l_subsequence(self):
        # LCS("a b c d", "a x c y") = "a c" -> P = R = 2/4
        pairs = [cap_pair("1", "a b c d", "a x c y")]
        assert rouge(pairs, "L") == pytest.approx(0.5)

    def test_mean_over_pairs(self):
        pairs = [cap_pair("1", "x y", "x y"), cap_pair("2", "x y", "p q")]
        assert rouge(pairs, "1") == pytest.approx(0.5)


class TestMeteorLite:
    def test_identity_ceiling(self):
        text = "an aromatic ring with substituents"
        m = len(text.split())
        expected = 1 - 0.5 * (1 / m) ** 3
        assert meteor_lite([cap_pair("1", text, text)]) == pytest.approx(expected)

    def test_no_matches(self):
        assert meteor_lite([cap_pair("1", "aaa bbb", "ccc ddd")]) == 0.0

    def test_hand_fixture_two_chunks(self):
        # hyp "a b x c d" vs ref "a b c d": 4 matches, hyp positions
        # (0,1,3,4) -> chunks split at the gap => 2 chunks
        pair = cap_pair("1", "a b c d", "a b x c d")
        m, hyp_len, ref_len, chunks = 4, 5, 4, 2
        precision, recall = m / hyp_len, m / ref_len
        f_mean = 10 * precision * recall / (recall + 9 * precision)
        expected = f_mean * (1 - 0.5 * (chunks / m) ** 3)
        assert meteor_lite_pair(pair) == pytest.approx(expected)

    def test_bounded(self, rng):
        words = "a b c d e f g".split()
        for _ in range(200):
            ref = " ".join(rng.choices(words, k=rng.randint(1, 8)))
            hyp = " ".join(rng.choices(words, k=rng.randint(1, 8)))
            assert 0.0 <= meteor_lite_pair(cap_pair("1", ref, hyp)) <= 1.0


class TestMoleculeMetrics:
    def test_exact_match_canonical(self):
        pairs = [mol_pair("1", "CCO", "OCC")]
        assert exact_match(pairs) == 1.0

    def test_invalid_hypothesis_no_match(self):
        pairs = [mol_pair("1", "CCO", "C((")]
        assert exact_match(pairs) == 0.0

    def test_fraction_fixture(self):
        pairs = ([mol_pair(str(i), "CCO", "OCC") for i in range(4)]
                 + [mol_pair(str(i + 4), "CCO", "CCN") for i in range(6)])
        assert exact_match(pairs) == pytest.approx(0.4)

    def test_fts_identical(self):
        pairs = [mol_pair("1", "CCO", "CCO"), mol_pair("2", "c1ccccc1", "c1ccccc1")]
        assert fts_metrics(pairs, "morgan") == 1.0
        assert fts_metrics(pairs, "path") == 1.0

    def test_fts_invalid_scores_zero(self):
        pairs = [mol_pair("1", "CCO", "not-a-smiles")]
        assert fts_metrics(pairs, "morgan") == 0.0
        assert fts_metrics(pairs, "path") == 0.0

    def test_fts_three_pair_mean(self):
        from icma.chem import parse_smiles
        from icma.fingerprints import morgan_fingerprint, tanimoto
        pairs = [mol_pair("1", "CCO", "CCN"), mol_pair("2", "CCO", "CCO"),
                 mol_pair("3", "c1ccccc1", "C1CCCCC1")]
        per_pair = []
        for p in pairs:
            per_pair.append(tanimoto(
                morgan_fingerprint(parse_smiles(p.reference), 2, 2048),
                morgan_fingerprint(parse_smiles(p.hypothesis), 2, 2048)))
        assert fts_metrics(pairs, "morgan") == pytest.approx(sum(per_pair) / 3)

    def test_validity_rate(self):
        valid = [mol_pair(str(i), "C", "CCO") for i in range(7)]
        invalid = [mol_pair(str(i + 7), "C", "") for i in range(3)]
        assert validity_rate(valid + invalid) == pytest.approx(0.7)
        assert validity_rate(valid) == 1.0
        assert validity_rate(invalid) == 0.0


class TestFullSuite:
    def test_mol2cap_report(self):
        pairs = [cap_pair("1", "an acid", "an acid"),
                 cap_pair("2", "a base", "a weak base")]
        report = evaluate(pairs, "mol2cap")
        for key in ("bleu2", "bleu4", "rouge1", "rouge2", "rougeL", "meteor_lite"):
            assert 0.0 <= report.aggregates[key] <= 1.0
        assert report.counts["total"] == 2
        assert "bleu2" in report.to_table()

    def test_cap2mol_report(self):
        pairs = [mol_pair("1", "CCO", "OCC"), mol_pair("2", "CCN", "xx")]
        report = evaluate(pairs, "cap2mol")
        assert report.aggregates["exact_match"] == 0.5
        assert report.aggregates["validity"] == 0.5
        assert report.counts["invalid_hypotheses"] == 1

    def test_aggregate_consistency_from_per_pair(self):
        rng = random.Random(3)
        vocabulary = ["acid", "base", "ring", "amine", "chain", "salt"]
        pairs = [cap_pair(str(i),
                          " ".join(rng.choices(vocabulary, k=rng.randint(2, 6))),
                          " ".join(rng.choices(vocabulary, k=rng.randint(2, 6))))
                 for i in range(20)]
        report = evaluate(pairs, "mol2cap")
        for key in ("rouge1", "rouge2", "rougeL", "meteor_lite"):
            recomputed = sum(r[key] for r in report.per_pair) / len(report.per_pair)
            assert abs(recomputed - report.aggregates[key]) < 1e-12
        from icma.metrics import bleu_from_stats
        recomputed_bleu = bleu_from_stats(
            [r["bleu4_stats"] for r in report.per_pair], 4)
        assert abs(recomputed_bleu - report.aggregates["bleu4"]) < 1e-12
