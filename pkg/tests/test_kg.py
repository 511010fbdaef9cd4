import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenkit.kg import (
    BadRange,
    DimensionMismatch,
    EmbeddingTable,
    MarginConfig,
    NumericKG,
    OutOfRange,
    build_numeric_kg,
    directional_fraction,
    embed_value,
    init_table,
    kg_gradients,
    kg_loss,
    load_table,
    save_table,
    train_kg,
)


def one_triplet(h, l, t):
    kg = NumericKG(np.array([0.0, 1.0]), triplets=np.array([[0, 0, 1]]))
    return kg, EmbeddingTable(np.array([[h], [t]], float), np.array([[l]], float))


def loss_oracle(kg, emb, gamma, metric):
    total = 0.0
    for h, r, t in kg.triplets:
        eh, er, et = emb.entities[h], emb.relations[r], emb.entities[t]
        if metric == "L1":
            pos, neg = sum(abs(x) for x in eh + er - et), sum(abs(x) for x in et + er - eh)
        else:
            pos, neg = float(np.sqrt(((eh + er - et) ** 2).sum())), float(np.sqrt(((et + er - eh) ** 2).sum()))
        total += max(0.0, gamma + pos - neg)
    return total


def test_build_counts():
    kg = build_numeric_kg(0, 0.3, 0.1)
    assert kg.n_entities == 4 and len(kg.triplets) == 3
    kg = build_numeric_kg(0, 1, 1)
    assert kg.n_entities == 2 and kg.triplets.tolist() == [[0, 0, 1]]
    assert build_numeric_kg(0, 1, 0.0001).n_entities == 10001
    with pytest.raises(BadRange):
        build_numeric_kg(0, 10, 0.0001)
    with pytest.raises(BadRange):
        build_numeric_kg(1, 0, 0.1)
    with pytest.raises(BadRange):
        build_numeric_kg(0, 1, 0)


def test_chain_links_consecutive_values():
    kg = build_numeric_kg(0, 9, 1)
    assert np.array_equal(kg.triplets[:, 2], kg.triplets[:, 0] + 1)
    assert set(kg.triplets[:, 1]) == {0}


def test_loss_substitution_examples():
    kg, emb = one_triplet(0.0, 1.0, 1.0)
    assert kg_loss(kg, emb, MarginConfig(gamma=1.0, metric="L1", dim=1)) == 0.0
    kg, emb = one_triplet(0.0, 0.0, 0.0)
    assert kg_loss(kg, emb, MarginConfig(gamma=0.5, metric="L1", dim=1)) == 0.5


@pytest.mark.parametrize("metric", ["L1", "L2"])
def test_loss_matches_per_term_oracle(metric):
    rng = np.random.default_rng(1)
    for _ in range(20):
        kg = NumericKG(np.arange(5.0), triplets=np.stack([rng.integers(0, 5, 3), np.zeros(3, int), rng.integers(0, 5, 3)], 1))
        emb = EmbeddingTable(rng.normal(size=(5, 4)), rng.normal(size=(1, 4)))
        cfg = MarginConfig(gamma=0.7, metric=metric, dim=4)
        assert kg_loss(kg, emb, cfg) == pytest.approx(loss_oracle(kg, emb, 0.7, metric), abs=1e-12)


def test_dimension_mismatch():
    kg = build_numeric_kg(0, 3, 1)
    with pytest.raises(DimensionMismatch):
        kg_loss(kg, EmbeddingTable(np.zeros((4, 3)), np.zeros((1, 2))), MarginConfig(dim=3))
    with pytest.raises(DimensionMismatch):
        kg_loss(kg, EmbeddingTable(np.zeros((3, 3)), np.zeros((1, 3))), MarginConfig(dim=3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(-5, 5), st.sampled_from(["L1", "L2"]))
def test_loss_nonnegative_and_translation_invariant(seed, shift, metric):
    rng = np.random.default_rng(seed)
    kg = build_numeric_kg(0, 6, 1)
    emb = EmbeddingTable(rng.normal(size=(7, 3)), rng.normal(size=(1, 3)))
    cfg = MarginConfig(metric=metric, dim=3)
    base = kg_loss(kg, emb, cfg)
    assert base >= 0
    moved = EmbeddingTable(emb.entities + shift, emb.relations)
    assert kg_loss(kg, moved, cfg) == pytest.approx(base, abs=1e-10)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(4)
    kg = build_numeric_kg(0, 4, 1)
    emb = EmbeddingTable(rng.normal(size=(5, 3)), rng.normal(size=(1, 3)))
    for metric in ("L1", "L2"):
        cfg = MarginConfig(metric=metric, dim=3, gamma=2.0)
        ge, gr = kg_gradients(kg, emb, cfg)
        for arr, grad in ((emb.entities, ge), (emb.relations, gr)):
            for idx in np.ndindex(arr.shape):
                keep = arr[idx]
                arr[idx] = keep + 1e-6
                up = kg_loss(kg, emb, cfg)
                arr[idx] = keep - 1e-6
                down = kg_loss(kg, emb, cfg)
                arr[idx] = keep
                assert grad[idx] == pytest.approx((up - down) / 2e-6, abs=1e-5)


def test_empty_triplets_keep_initialization():
    kg = NumericKG(np.arange(4.0))
    cfg = MarginConfig(epochs=20, seed=3)
    trained, start = train_kg(kg, cfg), init_table(kg, cfg)
    assert np.array_equal(trained.entities, start.entities)
    assert np.array_equal(trained.relations, start.relations)


def test_inactive_hinge_leaves_parameters():
    kg, emb = one_triplet(0.0, 1.0, 1.0)
    ge, gr = kg_gradients(kg, emb, MarginConfig(gamma=1.0, dim=1))
    assert not ge.any() and not gr.any()


def test_init_bounds_and_norm_projection():
    kg = build_numeric_kg(0, 9, 1)
    cfg = MarginConfig(dim=8, epochs=40)
    start = init_table(kg, cfg)
    assert np.all(np.abs(start.relations) <= 6 / np.sqrt(8))
    trained = train_kg(kg, cfg)
    assert np.all(np.linalg.norm(trained.entities, axis=1) <= 1.0 + 1e-12)
    assert np.isfinite(trained.entities).all() and np.isfinite(trained.relations).all()


def test_training_reproducible():
    kg = build_numeric_kg(0, 5, 1)
    a = train_kg(kg, MarginConfig(epochs=60, seed=9))
    b = train_kg(kg, MarginConfig(epochs=60, seed=9))
    assert a.entities.tobytes() == b.entities.tobytes()
    assert a.loss_trace == b.loss_trace


def test_directionality_on_chain():
    kg = build_numeric_kg(0, 9, 1)
    cfg = MarginConfig()
    assert directional_fraction(kg, train_kg(kg, cfg), cfg) >= 0.9


def test_embed_value_interpolation():
    kg = build_numeric_kg(0, 1, 0.1)
    emb = EmbeddingTable(np.random.default_rng(0).normal(size=(11, 3)), np.ones((1, 3)))
    assert np.array_equal(embed_value(emb, kg, 0.2), emb.entities[2])
    assert np.allclose(embed_value(emb, kg, 0.25), 0.5 * (emb.entities[2] + emb.entities[3]), atol=1e-12)
    # 0.27 sits 70% of the way from 0.2 to 0.3
    assert np.allclose(embed_value(emb, kg, 0.27), 0.3 * emb.entities[2] + 0.7 * emb.entities[3], atol=1e-12)
    with pytest.raises(OutOfRange):
        embed_value(emb, kg, 1.5)


def test_table_file_round_trip(tmp_path):
    kg = build_numeric_kg(0, 2, 0.5)
    emb = train_kg(kg, MarginConfig(epochs=5, dim=4))
    save_table(tmp_path / "t.bin", emb, kg)
    back, kg2 = load_table(tmp_path / "t.bin")
    assert np.allclose(back.entities, emb.entities, atol=1e-6)
    assert np.allclose(kg2.values, kg.values)
    assert np.array_equal(kg2.triplets, kg.triplets)
    assert (tmp_path / "t.bin").read_bytes()[:4] == b"SKKG"
