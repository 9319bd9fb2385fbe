import numpy as np
import pytest
import scipy.optimize

import hpstseg


@pytest.fixture()
def gen_config():
    cfg = hpstseg.GenConfig()
    cfg.seed = 7
    cfg.n_prongs_range = [1, 3]
    cfg.hits_per_prong_mean = 10.0
    return cfg


def test_generate_event_is_deterministic(gen_config):
    a = hpstseg.generate_event(3, gen_config)
    b = hpstseg.generate_event(3, gen_config)
    assert a.total_hits() == b.total_hits() > 0
    for va, vb in zip(a.views, b.views):
        for ha, hb in zip(va.hits, vb.hits):
            assert ha.coord == hb.coord
            assert ha.value == hb.value
    assert hpstseg.validate_event(a) == []


def test_dataset_round_trip(tmp_path, gen_config):
    path = str(tmp_path / "events.jsonl")
    header = hpstseg.generate_dataset(12, gen_config, path)
    assert header.n_events == 12
    read_header, events = hpstseg.read_events(path)
    assert read_header.n_events == 12
    assert len(events) == 12
    out = str(tmp_path / "copy.jsonl")
    hpstseg.write_events(events, read_header, out)
    assert (tmp_path / "events.jsonl").read_bytes() == (tmp_path / "copy.jsonl").read_bytes()


def test_densify_shape_and_total(gen_config):
    event = hpstseg.generate_event(0, gen_config)
    dense = event.densify()
    assert dense.shape == (2, 80, 100)
    total = sum(h.value for v in event.views for h in v.hits)
    assert dense.sum() == pytest.approx(total, rel=1e-12)


def test_linear_sum_assignment_matches_scipy():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = rng.integers(2, 9)
        cost = rng.normal(size=(n, n))
        cols, total = hpstseg.linear_sum_assignment(cost.tolist())
        rows_s, cols_s = scipy.optimize.linear_sum_assignment(cost)
        assert total == pytest.approx(cost[rows_s, cols_s].sum(), abs=1e-9)
        assert sorted(cols) == list(range(n))


def test_metrics_against_sklearn_style_oracle():
    scores = [[0.9, 0.1], [0.8, 0.2], [0.3, 0.7], [0.4, 0.6]]
    truth = [0, 0, 1, 1]
    per_class, macro = hpstseg.ovr_auc(scores, truth)
    assert per_class[0] == 1.0
    assert per_class[1] == 1.0
    assert macro == 1.0
    assert hpstseg.segmentation_accuracy([1, 1, 0], [0, 0, 1]) == 1.0
    prongs = hpstseg.prong_purity_efficiency([0, 0, 0, 0], [0, 0, 1, 1], [0, 0, 0, 0])
    assert prongs[0]["efficiency"] == 1.0
    assert prongs[0]["purity"] == 0.5


def test_train_predict_evaluate(tmp_path, gen_config):
    data = str(tmp_path / "train.jsonl")
    hpstseg.generate_dataset(16, gen_config, data)

    cfg = hpstseg.TrainConfig()
    cfg.hyper.n = 1
    cfg.hyper.m = 1
    cfg.hyper.base_dim = 4
    cfg.hyper.k_nn = 3
    cfg.epochs = 2
    cfg.batch_size = 8
    ckpt = str(tmp_path / "model.ckpt")
    result = hpstseg.train(data, cfg, ckpt)
    assert len(result["log"]) == 2

    hyper = hpstseg.checkpoint_hyper(ckpt)
    assert hyper.base_dim == 4

    _, events = hpstseg.read_events(data)
    sem_probs, ins_slot = hpstseg.predict_event(ckpt, events[0])
    for view_idx in range(2):
        assert len(sem_probs[view_idx]) == len(events[0].views[view_idx].hits)
        for row in sem_probs[view_idx]:
            assert sum(row) == pytest.approx(1.0, abs=1e-9)

    report = hpstseg.evaluate(ckpt, events)
    assert report["n_events"] == 16
    assert 0.0 <= report["macro_auc"] <= 1.0


def test_display_and_memory_model(gen_config):
    event = hpstseg.generate_event(1, gen_config)
    svg = hpstseg.render_event_display(event)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert hpstseg.sparse_bytes_for(70) / hpstseg.dense_bytes_grid() < 0.10
    assert hpstseg.sparse_dense_crossover() == 5334
