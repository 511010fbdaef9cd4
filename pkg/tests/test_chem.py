import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenkit.chem import (
    AROMATIC,
    Atom,
    Bond,
    ChemError,
    Molecule,
    SmilesError,
    TooManyAtoms,
    UnbalancedBracket,
    UnclosedRing,
    UnknownElement,
    UnsupportedFeature,
    ValenceViolation,
    from_tensors,
    has_substructure,
    is_isomorphic,
    parse_smiles,
    random_smiles,
    read_smiles_records,
    to_tensors,
    write_smiles,
)


def test_methane():
    m = parse_smiles("C")
    assert len(m.atoms) == 1 and m.bonds == ()
    assert m.atoms[0].element == "C" and m.atoms[0].hcount == 4
    assert write_smiles(m) == "C"


def test_cyclopropane():
    m = parse_smiles("C1CC1")
    assert len(m.atoms) == 3
    assert len(m.bonds) == 3 and all(b.order == 1.0 for b in m.bonds)
    assert m.ring_count == 1


def test_unbalanced_branch_reports_position():
    with pytest.raises(UnbalancedBracket) as exc:
        parse_smiles("C(")
    assert exc.value.position == 2


@pytest.mark.parametrize(
    "text, error",
    [
        ("CXC", UnknownElement),
        ("C1CC", UnclosedRing),
        ("C(=O)(=O)(=O)C", ValenceViolation),
        ("FF(F)", ValenceViolation),
        ("C[C", UnbalancedBracket),
        ("C)C", UnbalancedBracket),
        ("F/C=C/F", UnsupportedFeature),
        ("[13CH4]", UnsupportedFeature),
        ("N[C@@H](C)C(=O)O", UnsupportedFeature),
    ],
)
def test_parse_errors_carry_position(text, error):
    with pytest.raises(error) as exc:
        parse_smiles(text)
    assert 1 <= exc.value.position <= len(text)


def test_every_error_is_a_smiles_error():
    for cls in (UnbalancedBracket, UnknownElement, UnclosedRing, ValenceViolation, UnsupportedFeature):
        assert issubclass(cls, SmilesError)


def test_bracket_atoms_and_charges():
    m = parse_smiles("C[N+](C)(C)C.[Cl-]")
    charges = sorted(a.charge for a in m.atoms)
    assert charges == [-1, 0, 0, 0, 0, 1]
    n = next(a for a in m.atoms if a.element == "N")
    assert n.hcount == 0
    assert len(m.components) == 2
    oh = parse_smiles("[OH-]")
    assert oh.atoms[0].hcount == 1 and oh.atoms[0].charge == -1


def test_two_digit_ring_closure():
    a = parse_smiles("C%12CCCCC%12")
    b = parse_smiles("C1CCCCC1")
    assert is_isomorphic(a, b)


def test_aromatic_rings_and_hydrogens():
    benzene = parse_smiles("c1ccccc1")
    assert all(b.order == AROMATIC for b in benzene.bonds)
    assert all(a.hcount == 1 for a in benzene.atoms)
    pyrrole = parse_smiles("c1cc[nH]c1")
    n = next(a for a in pyrrole.atoms if a.element == "N")
    assert n.hcount == 1
    thiophene = parse_smiles("c1ccsc1")
    s = next(a for a in thiophene.atoms if a.element == "S")
    assert s.hcount == 0


def test_implicit_hydrogens_follow_lowest_valence():
    assert parse_smiles("S").atoms[0].hcount == 2
    assert parse_smiles("P").atoms[0].hcount == 3
    m = parse_smiles("CS(=O)(=O)C")
    assert next(a for a in m.atoms if a.element == "S").hcount == 0
    assert parse_smiles("Cl").atoms[0].hcount == 1


def test_molecule_invariants():
    c = Atom("C", hcount=3)
    with pytest.raises(ChemError):
        Molecule((c, c), (Bond(0, 0),))
    with pytest.raises(ChemError):
        Molecule((c, c), (Bond(0, 1), Bond(1, 0)))
    with pytest.raises(ChemError):
        Molecule((c, c), (Bond(0, 2),))
    with pytest.raises(ChemError):
        Molecule((c, c), (Bond(0, 1, AROMATIC),))
    with pytest.raises(ChemError):
        Atom("Xe")


def test_corpus_size_and_names(corpus):
    assert len(corpus) >= 500
    assert all(m.name for m in corpus)


def test_corpus_round_trip(corpus):
    for m in corpus:
        assert is_isomorphic(parse_smiles(write_smiles(m)), m), m.name


def test_permuted_copies_write_identical_text(corpus):
    rng = random.Random(11)
    for m in rng.sample(corpus, 60):
        text = write_smiles(m)
        for _ in range(5):
            perm = list(range(len(m.atoms)))
            rng.shuffle(perm)
            assert write_smiles(m.permuted(perm)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 559), st.integers(0, 2**32 - 1))
def test_random_smiles_spellings_canonicalize_identically(corpus, idx, seed):
    m = corpus[idx % len(corpus)]
    spelled = random_smiles(m, random.Random(seed))
    again = parse_smiles(spelled)
    assert is_isomorphic(again, m)
    assert write_smiles(again) == write_smiles(m)


def test_tensors_examples():
    t = to_tensors(parse_smiles("C"))
    assert t.X.shape[0] == 1 and t.X[0, 0] == 1.0
    assert t.A.tolist() == [[0.0]]
    assert to_tensors(parse_smiles("CC")).A.tolist() == [[0, 1], [1, 0]]


def test_benzene_tensor_ring_entries():
    A = to_tensors(parse_smiles("c1ccccc1")).A
    expected = np.zeros((6, 6))
    for k in range(6):
        expected[k, (k + 1) % 6] = expected[(k + 1) % 6, k] = 1.5
    assert np.array_equal(A, expected)


def test_tensors_symmetric_and_invertible(corpus):
    for m in corpus[::7]:
        t = to_tensors(m)
        assert np.array_equal(t.A, t.A.T)
        assert np.all(np.diag(t.A) == 0)
        n_elem = t.X.shape[1] - 2
        assert np.all(t.X[:, :n_elem].sum(1) == 1)
        back = from_tensors(t, [a.hcount for a in m.atoms])
        assert back.atoms == m.atoms and back.bonds == m.bonds


def test_too_many_atoms():
    with pytest.raises(TooManyAtoms):
        to_tensors(parse_smiles("C" * 39))
    assert to_tensors(parse_smiles("C" * 38)).n_atoms == 38


def test_substructure():
    toluene = parse_smiles("CC1=CC=CC=C1")
    assert has_substructure(toluene, parse_smiles("C1=CC=CC=C1"))
    assert not has_substructure(parse_smiles("C1CCCCC1"), parse_smiles("C1=CC=CC=C1"))


def test_smiles_records_skip_comments():
    lines = ["# header", "", "CCO\tethanol", "c1ccccc1", "  "]
    assert read_smiles_records(lines) == [("CCO", "ethanol"), ("c1ccccc1", "mol4")]
