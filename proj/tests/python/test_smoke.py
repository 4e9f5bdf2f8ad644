import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import devarb


def test_scenario_and_ground_truth():
    s = devarb.sample_scenario(3)
    assert 2 <= len(s["devices"]) <= 5
    distances, closest, d1, d2 = devarb.ground_truth(json.dumps(s))
    assert distances[closest] == d1 == min(distances)
    assert d2 >= d1
    assert devarb.sample_scenario(3) == s
    assert devarb.sample_scenario(3, noise_free=True)["noises"] == []


def test_anechoic_rir_follows_inverse_distance():
    room = [8.0, 8.0, 3.0, 0.5]
    near = devarb.simulate_rir(room, [2, 4, 1.5], [3, 4, 1.5], anechoic=True)
    far = devarb.simulate_rir(room, [2, 4, 1.5], [4, 4, 1.5], anechoic=True)
    assert np.sum(near**2) / np.sum(far**2) == pytest.approx(4.0, rel=0.01)


def test_reverberant_rir_rt60():
    rir = devarb.simulate_rir([6.0, 5.0, 3.0, 0.5], [2, 2, 1.6], [4, 3, 0.75])
    assert devarb.measure_rt60(rir) == pytest.approx(0.5, rel=0.2)


def test_lfbe_shape_and_baseline():
    rng = np.random.default_rng(0)
    x = rng.normal(0, 0.1, 32000)
    feats = devarb.lfbe(x)
    assert feats.shape == (201, 64)
    assert feats.dtype == np.float32
    assert devarb.baseline_arbitrate([0.1 * x, x, 0.5 * x]) == 1
    with pytest.raises(ValueError):
        devarb.lfbe(x[:100])


def test_metrics():
    distances = [[1.0, 2.0], [3.0, 2.5], [2.0, 2.2]]
    chosen = [0, 0, 1]
    assert devarb.accuracy(distances, chosen) == pytest.approx(1 / 3)
    curve = devarb.epsilon_accuracy(distances, chosen, [0.0, 0.3, 1.0, math.inf])
    assert curve[0] == devarb.accuracy(distances, chosen)
    assert curve == sorted(curve)
    assert curve[-1] == 1.0
    assert devarb.relative_error(0.5, 0.75) == 0.5


def test_default_config_is_json():
    config = json.loads(devarb.default_config())
    assert config["counts"] == {"train": 2000, "val": 500, "test": 1000}


def test_small_pipeline(tmp_path):
    corpus = tmp_path / "corpus"
    n = devarb.write_synthetic_corpus(str(corpus), utterances=120, speakers=60,
                                      background_seconds=20.0)
    assert n == 120
    config = json.loads(devarb.default_config())
    config.update(seed=4, out=str(tmp_path / "run"), source_root=str(corpus))
    config["counts"] = {"train": 4, "val": 2, "test": 3}
    devarb.gen(config)
    files = devarb.render(config)
    assert files[2] >= 6
    metrics = devarb.evaluate(config, "baseline")
    assert metrics["test_scenarios"] == 3
    assert 0.0 <= metrics["baseline"]["accuracy"] <= 1.0
    assert "relative_error" not in metrics
    with pytest.raises(RuntimeError):
        devarb.evaluate(config, "dnn")
