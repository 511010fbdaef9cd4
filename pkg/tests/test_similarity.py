import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import edit_oracle, tanimoto_oracle, wl_oracle

from screenkit.chem import parse_smiles, write_smiles
from screenkit.similarity import (
    Fingerprint,
    WidthMismatch,
    edit_similarity,
    mix64,
    morgan_fingerprint,
    similarity_matrix,
    tanimoto,
    wl_similarity,
)


# -- fingerprints ----------------------------------------------------------------

def test_mix_constants_frozen():
    assert mix64(0) == 0
    assert mix64(1) == 0x5692161D100B05E5


def test_methane_radius0_single_bit():
    assert morgan_fingerprint(parse_smiles("C"), radius=0).popcount() == 1


def test_fingerprint_width_checks():
    with pytest.raises(ValueError):
        morgan_fingerprint(parse_smiles("C"), width=100)
    with pytest.raises(ValueError):
        morgan_fingerprint(parse_smiles("C"), radius=-1)
    with pytest.raises(WidthMismatch):
        tanimoto(Fingerprint(1, 64), Fingerprint(1, 128))


def test_ethane_twice_identical():
    assert morgan_fingerprint(parse_smiles("CC")) == morgan_fingerprint(parse_smiles("CC"))


def test_fingerprint_permutation_invariant(corpus):
    rng = random.Random(3)
    for m in rng.sample(corpus, 40):
        perm = list(range(len(m.atoms)))
        rng.shuffle(perm)
        assert morgan_fingerprint(m.permuted(perm)) == morgan_fingerprint(m)
        assert morgan_fingerprint(parse_smiles(write_smiles(m))) == morgan_fingerprint(m)


def test_popcount_bounded(corpus):
    for m in corpus[::9]:
        fp = morgan_fingerprint(m, width=64)
        assert fp.popcount() <= 64


# -- tanimoto ---------------------------------------------------------------------

def test_tanimoto_examples():
    f = Fingerprint.from_indices([1, 2, 3], 64)
    assert tanimoto(f, f) == 1.0
    assert tanimoto(Fingerprint.from_indices([1], 64), Fingerprint.from_indices([2], 64)) == 0.0
    assert tanimoto(f, Fingerprint.from_indices([2, 3, 4], 64)) == 0.5
    assert tanimoto(Fingerprint(0, 64), Fingerprint(0, 64)) == 1.0


@settings(max_examples=200)
@given(st.sets(st.integers(0, 127)), st.sets(st.integers(0, 127)))
def test_tanimoto_matches_set_oracle(a, b):
    fa, fb = Fingerprint.from_indices(a, 128), Fingerprint.from_indices(b, 128)
    assert tanimoto(fa, fb) == pytest.approx(tanimoto_oracle(fa, fb), abs=1e-12)
    assert tanimoto(fa, fb) == tanimoto(fb, fa)
    assert 0.0 <= tanimoto(fa, fb) <= 1.0


# -- edit similarity ------------------------------------------------------------------

def test_edit_examples():
    assert edit_similarity("CCO", "CCO") == 1.0
    assert edit_similarity("C", "O") == 0.0
    assert edit_similarity("CC", "CCO") == pytest.approx(2 / 3, abs=1e-12)
    assert edit_similarity("", "") == 1.0


@settings(max_examples=200)
@given(st.text("CNO()=1#", max_size=12), st.text("CNO()=1#", max_size=12))
def test_edit_matches_recursive_oracle(a, b):
    assert edit_similarity(a, b) == pytest.approx(edit_oracle(a, b), abs=1e-12)
    assert edit_similarity(a, b) == edit_similarity(b, a)


# -- WL ------------------------------------------------------------------------------

def test_wl_examples():
    assert wl_similarity(parse_smiles("CCO"), parse_smiles("OCC")) == 1.0
    for h in range(4):
        assert wl_similarity(parse_smiles("C"), parse_smiles("N"), h) == 0.0


def test_wl_ethane_ethanol_by_hand():
    # iteration 0: ethane {C:2}, ethanol {C:2, O:1}
    # iteration 1: ethane {C(C):2}, ethanol {C(C):1, C(C,O):1, O(C):1}
    # k(a,b) = 2*2 + 2*1 = 6, k(a,a) = 4 + 4 = 8, k(b,b) = 4 + 1 + 1 + 1 + 1 = 8
    value = wl_similarity(parse_smiles("CC"), parse_smiles("CCO"), iterations=1)
    assert value == pytest.approx(6 / 8, abs=1e-12)


def test_wl_matches_tuple_oracle(corpus):
    rng = random.Random(5)
    for _ in range(50):
        a, b = rng.sample(corpus, 2)
        for h in (0, 1, 3):
            assert wl_similarity(a, b, h) == pytest.approx(wl_oracle(a, b, h), abs=1e-9)


def test_wl_nonincreasing_in_iterations(corpus):
    rng = random.Random(8)
    for _ in range(40):
        a, b = rng.sample(corpus, 2)
        values = [wl_similarity(a, b, h) for h in range(5)]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


def test_similarity_matrix_shape_and_symmetry(corpus):
    mols = corpus[:6]
    fps = [morgan_fingerprint(m) for m in mols]
    s = similarity_matrix(fps, fps, tanimoto)
    assert s.shape == (6, 6)
    assert np.array_equal(s, s.T)
    assert np.all(np.diag(s) == 1.0)
