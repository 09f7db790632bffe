# -*- coding: utf-8 -*-
"""Shared pytest configuration and fixtures."""

import os

import hypothesis
import numpy as np
import pytest

from pyclstmcnn import data_tools as dt
from pyclstmcnn import embeddings_tools as et
from pyclstmcnn import model_tools as mo
from pyclstmcnn.fofe_tools import FofeConfig


hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE",
                                                "default"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run slow acceptance experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long running experiment")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


TINY_TOKENS = ['tok{}'.format(i) for i in range(30)]


@pytest.fixture
def tiny_config():
    """Small architecture for gradient checks and quick runs."""
    return mo.ModelConfig(embed_dim=8, lstm_hidden=4, kernel_sizes=(2, 3),
                          conv_features=3, fofe=FofeConfig(1.0, 0.9),
                          fofe_dense_out=5, dropout_rate=0.5, num_classes=3,
                          seed=7)


@pytest.fixture
def tiny_table():
    """Random frozen table over the tiny vocabulary."""
    return et.random_table(TINY_TOKENS, 8, seed=3, scale=0.5)


def make_instance(rng, label, focus_len=5, left=2, right=2, length=4):
    """Random instance over the tiny vocabulary."""
    def sentence(size):
        return [TINY_TOKENS[i] for i in rng.integers(0, len(TINY_TOKENS),
                                                     size)]
    return dt.Instance(focus=sentence(focus_len),
                       left=[sentence(length) for _ in range(left)],
                       right=[sentence(length) for _ in range(right)],
                       label=label)


@pytest.fixture
def tiny_instances():
    """Two instances with contexts on both sides."""
    rng = np.random.default_rng(11)
    return [make_instance(rng, 0), make_instance(rng, 2, focus_len=3)]
