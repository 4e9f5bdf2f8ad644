"""Python bindings for the devarb device arbitration library."""

import json as _json

from ._devarb import (  # noqa: F401
    DataError,
    NumericError,
    UsageError,
    accuracy,
    baseline_arbitrate,
    default_config,
    epsilon_accuracy,
    ground_truth,
    lfbe,
    measure_rt60,
    relative_error,
    simulate_rir,
    write_synthetic_corpus,
)
from . import _devarb


def sample_scenario(seed, noise_free=False, anechoic=False):
    """Returns one sampled scenario as a dict."""
    return _json.loads(_devarb.sample_scenario(seed, noise_free, anechoic))


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


def gen(config, splits=("train", "val", "test")):
    return _devarb.gen(_dump(config), list(splits))


def render(config, splits=("train", "val", "test")):
    return _devarb.render(_dump(config), list(splits))


def train(config, resume=False):
    return _devarb.train(_dump(config), resume)


def evaluate(config, system="both"):
    return _json.loads(_devarb.evaluate(_dump(config), system))
