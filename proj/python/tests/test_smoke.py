import math

import pytest

import filt


def test_complex_score_matches_python_complex():
    s, r, o = complex(1, 2), complex(3, 4), complex(5, 6)
    expected = (s * r * o.conjugate()).real
    assert filt.complex_score([1, 2], [3, 4], [5, 6]) == expected == 35.0


def test_time_weights():
    w = filt.time_weights([1, 2], 3, 1.0)
    e1, e2 = math.exp(1 / 2), math.exp(1.0)
    assert w == pytest.approx([e1 / (e1 + e2), e2 / (e1 + e2)], abs=1e-12)
    assert filt.time_weights([3, 3], 3, 2.0) == [0.5, 0.5]
    with pytest.raises(filt.ArgumentError):
        filt.time_weights([1], 3, 0.0)


def test_ranks_and_metrics():
    assert filt.pessimistic_rank([3, 2, 2, 1, 2], 4) == 4
    m = filt.metrics_from_ranks([1, 2, 4])
    assert m["MRR"] == pytest.approx(1.75 / 3, abs=1e-12)
    assert m["H@1"] == pytest.approx(1 / 3)
    assert m["num_queries"] == 3
    with pytest.raises(filt.ArgumentError):
        filt.metrics_from_ranks([])


def test_apportion():
    assert filt.apportion(10, [0.8, 0.1, 0.1]) == [8, 1, 1]
    assert filt.apportion(5, [0.8, 0.1, 0.1]) == [4, 1, 0]


def test_gradcheck():
    r = filt.gradcheck("filt", "full", 6)
    assert r["max_rel_error"] < 1e-4
    assert r["checked"] > 0


def test_dataset_and_training(tmp_path):
    quads, concepts = filt.synthetic_corpus(0)
    ds = filt.Dataset.from_text(quads, concepts, seed=0, ratio=[0.6, 0.1, 0.3])
    stats = ds.stats()
    assert stats["entities"] == len(ds.entities) == 200
    assert all(ds.validate().values())
    assert "Region" in ds.concepts

    ds.save(tmp_path / "ds")
    again = filt.Dataset.load(tmp_path / "ds")
    assert again.stats() == stats
    assert again.unseen("test") == ds.unseen("test")

    settings = {"d": "16", "d_t": "4", "N": "8", "batches": "20", "eval_every": "10", "pretrain_epochs": "2"}
    a = filt.train_and_evaluate(ds, settings, shots=[1, 3])
    b = filt.train_and_evaluate(ds, settings, shots=[1, 3])
    assert a == b
    assert set(a) == {1, 3}
    assert 0.0 < a[3]["MRR"] <= 1.0


def test_errors():
    with pytest.raises(filt.ParseError):
        filt.Dataset.from_text("a\tb\tc\n")
    with pytest.raises(filt.ArgumentError):
        filt.train_and_evaluate(filt.Dataset.from_text(filt.synthetic_corpus(0)[0]), {"nope": "1"})
    with pytest.raises(filt.FiltError):
        filt.gradcheck("unknown")
