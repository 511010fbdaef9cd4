import math

import numpy as np
import pytest

from screenkit.chem import parse_smiles, to_tensors
from screenkit.chem.tensors import GraphTensors
from screenkit.kg import MarginConfig, build_numeric_kg, train_kg
from screenkit.nn import (
    AMINO_ACIDS,
    BadSequence,
    BatchMismatch,
    DdiData,
    DtaData,
    EmptyDataset,
    ModelParams,
    MppData,
    SchemaError,
    TrainConfig,
    UntrainedModel,
    contrastive_align_loss,
    ddi_forward,
    grad_check,
    init_model,
    kmer_composition,
    load_dataset,
    make_batch,
    mp_forward,
    predict,
    protein_features,
    screen_library,
    train_head,
)
from screenkit.nn import autograd as ag
from screenkit.nn.train import _Prepared

SEQ = "MKTAYIAKQRQISFVKSHFSRQLEERLGLIEVQ"
FIVE = ["CCO", "c1ccccc1O", "CC(=O)N", "C#N", "C1CC1"]


def five():
    return [parse_smiles(s) for s in FIVE]


# -- gradient engine -------------------------------------------------------------

def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        keep = x[idx]
        x[idx] = keep + h
        up = f()
        x[idx] = keep - h
        down = f()
        x[idx] = keep
        g[idx] = (up - down) / (2 * h)
    return g


@pytest.mark.parametrize(
    "build",
    [
        lambda a, b: ag.total(ag.mul(a, b)),
        lambda a, b: ag.total(ag.sigmoid(ag.add(a, b))),
        lambda a, b: ag.total(ag.matmul(a, ag.transpose(b))),
        lambda a, b: ag.mean(ag.concat([a, ag.scale(b, 3.0)])),
        lambda a, b: ag.total(ag.normalize_rows(ag.add(a, ag.scale(b, 0.5)))),
        lambda a, b: ag.softmax_cross_entropy(ag.matmul(a, ag.transpose(b)), np.array([0, 1, 2])),
        lambda a, b: ag.bce_with_logits(ag.total(a, axis=1), np.array([1.0, 0.0, 1.0])),
        lambda a, b: ag.mse(ag.total(ag.mul(a, b), axis=1), np.array([0.1, -0.3, 2.0])),
        lambda a, b: ag.total(ag.take(a, np.array([2, 0, 2]))),
    ],
)
def test_primitive_gradients(build):
    rng = np.random.default_rng(0)
    a = ag.Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    b = ag.Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    out = build(a, b)
    out.backward()
    f = lambda: float(build(ag.Tensor(a.value), ag.Tensor(b.value)).value)
    for t in (a, b):
        got = np.zeros_like(t.value) if t.grad is None else t.grad
        assert np.allclose(got, numeric_grad(f, t.value), atol=1e-6)


def test_grad_check_linear_quadratic():
    rng = np.random.default_rng(1)
    p = ModelParams({})
    p.add_dense("lin", 3, 1, rng)
    x, y = rng.normal(size=(6, 3)), rng.normal(size=6)
    loss = lambda q: ag.mse(ag.total(q.dense("lin", ag.Tensor(x)), axis=1), y)
    assert grad_check(p, loss) < 1e-8


def test_grad_check_two_layer_mpnn():
    data = MppData(five(), np.random.default_rng(2).normal(size=5))
    p = init_model("mpp", seed=1, hidden=6, embed=5, head_hidden=4, layers=2)
    prep = _Prepared("mpp", data, p)
    report = grad_check(p, lambda q: prep.loss(q, np.arange(5)), report=True, max_per_tensor=30)
    assert report.max_rel_error < 1e-4
    assert report.checked > 100


def test_zero_gradient_point():
    rng = np.random.default_rng(3)
    p = ModelParams({})
    p.add_dense("a", 4, 4, rng)
    p.add_dense("b", 4, 1, rng)
    for t in p.tensors.values():
        t.value[...] = 0.0
    x = np.zeros((5, 4))
    loss = lambda q: ag.mse(ag.total(q.dense("b", ag.relu(q.dense("a", ag.Tensor(x)))), axis=1), np.zeros(5))
    p.zero_grad()
    loss(p).backward()
    norm = math.sqrt(sum(float((t.grad ** 2).sum()) for t in p.tensors.values() if t.grad is not None))
    assert norm < 1e-10


# -- encoder ---------------------------------------------------------------------

def test_permutation_invariance(corpus):
    p = init_model("mpp", seed=0)
    rng = np.random.default_rng(4)
    for m in corpus[:40:3]:
        perm = rng.permutation(len(m.atoms))
        assert np.allclose(mp_forward(m, p), mp_forward(m.permuted(list(perm)), p), atol=1e-6)


def test_disconnected_copies_same_embedding():
    p = init_model("mpp", seed=0)
    one, two = parse_smiles("CC(=O)O"), parse_smiles("CC(=O)O.CC(=O)O")
    assert np.allclose(mp_forward(one, p), mp_forward(two, p), atol=1e-12)


def test_single_atom_zero_params_gives_readout_bias():
    p = init_model("mpp", seed=0)
    for t in p.tensors.values():
        t.value[...] = 0.0
    p["enc.readout.b"].value[...] = np.arange(p["enc.readout.b"].value.size)
    assert np.array_equal(mp_forward(parse_smiles("C"), p), p["enc.readout.b"].value)


def test_shape_mismatch():
    p = init_model("mpp", seed=0)
    with pytest.raises(ValueError):
        mp_forward(GraphTensors(np.zeros((2, 3)), np.zeros((2, 2))), p)


def test_batch_matches_single_graphs():
    p = init_model("mpp", seed=5)
    mols = five()
    from screenkit.nn import encode

    batch = encode(p, make_batch(mols)).value
    for k, m in enumerate(mols):
        assert np.allclose(batch[k], mp_forward(to_tensors(m), p), atol=1e-12)


# -- heads -------------------------------------------------------------------------

@pytest.mark.parametrize(
    "task, opts, data",
    [
        ("mpp", {}, lambda: MppData(five(), np.random.default_rng(0).normal(size=5))),
        ("mpp", {"extra": 2}, lambda: MppData(five(), np.arange(5.0), np.random.default_rng(1).normal(size=(5, 2)))),
        ("dta", {}, lambda: DtaData(five(), [SEQ, "ACDEFGHIK", SEQ, SEQ, "WYWYWY"], np.arange(5.0))),
        ("dta", {"mode": "classification"}, lambda: DtaData(five(), [SEQ] * 5, np.array([1, 0, 0, 1, 1.0]))),
        ("ddi", {}, lambda: DdiData(five(), five()[::-1], np.array([1, 0, 1, 0, 1.0]))),
    ],
)
def test_head_gradients(task, opts, data):
    p = init_model(task, seed=1, hidden=6, embed=5, head_hidden=4, channel=3, **opts)
    prep = _Prepared(task, data(), p)
    assert grad_check(p, lambda q: prep.loss(q, np.arange(5)), max_per_tensor=20) < 1e-4


def test_alignment_head_gradients():
    kg = build_numeric_kg(-3, 3, 0.5)
    table = train_kg(kg, MarginConfig(epochs=30))
    p = init_model("mpp", seed=1, hidden=6, embed=5, head_hidden=4, kg_dim=table.dim)
    prep = _Prepared("mpp", MppData(five(), np.array([-1, 0.5, 2, 1, -2.0])), p, (table, kg))
    assert grad_check(p, lambda q: prep.loss(q, np.arange(5)), max_per_tensor=20) < 1e-4


def test_ddi_symmetric_bitwise(corpus):
    p = init_model("ddi", seed=3)
    a, b = corpus[:12], corpus[12:24]
    ab = ddi_forward(p, make_batch(a), make_batch(b)).value
    ba = ddi_forward(p, make_batch(b), make_batch(a)).value
    assert np.array_equal(ab, ba)


def test_contrastive_examples():
    x = np.random.default_rng(0).normal(size=(1, 4))
    assert float(contrastive_align_loss(x, x * 2).value) == pytest.approx(0.0, abs=1e-12)
    same = np.ones((5, 3))
    assert float(contrastive_align_loss(same, same, 0.3).value) == pytest.approx(math.log(5), abs=1e-12)
    eye = np.eye(2)
    assert float(contrastive_align_loss(eye, eye, 1.0).value) == pytest.approx(math.log(1 + math.exp(-1)), abs=1e-12)
    with pytest.raises(BatchMismatch):
        contrastive_align_loss(np.ones((2, 3)), np.ones((3, 3)))


def test_contrastive_nonnegative():
    rng = np.random.default_rng(6)
    for _ in range(20):
        assert float(contrastive_align_loss(rng.normal(size=(4, 3)), rng.normal(size=(4, 3))).value) >= 0


def test_constant_labels_fit_constant():
    data = MppData(five() * 2, np.full(10, 2.5))
    p, _ = train_head("mpp", data, TrainConfig(seed=0, epochs=300, lr=0.01))
    assert np.var(predict(p, data)) < 1e-6


def test_training_reproducible_bytes():
    data = MppData(five(), np.arange(5.0))
    a, ta = train_head("mpp", data, TrainConfig(seed=4, epochs=5))
    b, tb = train_head("mpp", data, TrainConfig(seed=4, epochs=5))
    assert a.to_bytes() == b.to_bytes() and ta == tb


def test_checkpoint_round_trip(tmp_path):
    p, _ = train_head("ddi", DdiData(five(), five(), np.array([1, 0, 1, 0, 1.0])), TrainConfig(epochs=2))
    p.save(tmp_path / "m.bin", {"note": "x"})
    q, meta = ModelParams.load(tmp_path / "m.bin")
    assert meta == {"note": "x"} and q.trained and q.config == p.config
    for name in p.names():
        assert np.allclose(q[name].value, p[name].value, atol=1e-6)
    with pytest.raises(ValueError):
        ModelParams.from_bytes(b"nope")


# -- screening ----------------------------------------------------------------------

def trained_dta():
    data = DtaData(five(), [SEQ] * 5, np.array([0.1, 0.9, 0.3, 0.2, 0.5]))
    return train_head("dta", data, TrainConfig(epochs=3))[0]


def test_screen_single_and_duplicates():
    p = trained_dta()
    assert screen_library([parse_smiles("CCO", name="only")], SEQ, p, 5)[0][0] == "only"
    lib = [parse_smiles("CCN", name="first"), parse_smiles("c1ccccc1", name="x"), parse_smiles("CCN", name="second")]
    ranked = screen_library(lib, SEQ, p, 3)
    scores = dict(ranked)
    assert scores["first"] == scores["second"]
    names = [n for n, _ in ranked]
    assert names.index("first") < names.index("second")
    assert [s for _, s in ranked] == sorted((s for _, s in ranked), reverse=True)


def test_screen_errors():
    p = trained_dta()
    with pytest.raises(BadSequence):
        screen_library(five(), "MKTXZ", p, 3)
    with pytest.raises(UntrainedModel):
        screen_library(five(), SEQ, init_model("dta"), 3)
    with pytest.raises(UntrainedModel):
        screen_library(five(), SEQ, init_model("mpp"), 3)


def test_protein_features_blocks_sum_to_one():
    f = protein_features(SEQ)
    v = f.vector
    assert v.shape == (400 * 5,)
    blocks = v.reshape(5, 400).sum(1)
    assert np.allclose(blocks, 1.0)
    assert kmer_composition("AC", 2)[AMINO_ACIDS.index("A") * 20 + AMINO_ACIDS.index("C")] == 1.0
    short = protein_features("ACD").vector.reshape(5, 400).sum(1)
    assert np.all((np.isclose(short, 1.0)) | (short == 0.0))
    with pytest.raises(BadSequence):
        protein_features("ACDB")


# -- datasets ------------------------------------------------------------------------

def test_dataset_loading(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("# comment\nsmiles,label,feat_a\nCCO,1.5,0.2\n\nCCN,2.0,0.1\n")
    d = load_dataset("mpp", f)
    assert d.labels.tolist() == [1.5, 2.0] and d.extra.shape == (2, 1)
    f.write_text("smiles,sequence,label\nCCO,ACDE,1\n")
    assert load_dataset("dta", f).sequences == ["ACDE"]
    f.write_text("smiles,label\n")
    with pytest.raises(EmptyDataset):
        load_dataset("mpp", f)
    f.write_text("smiles,value\nCCO,1\n")
    with pytest.raises(SchemaError):
        load_dataset("mpp", f)
    f.write_text("smiles,label\nCCO,1,2\n")
    with pytest.raises(SchemaError):
        load_dataset("mpp", f)
    f.write_text("smiles_a,smiles_b\nCCO,CCN\n")
    assert np.isnan(load_dataset("ddi", f, require_labels=False).labels).all()
