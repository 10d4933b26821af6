import pytest

from modelsrv.model import fresh_model

from synth import make_base_vocab


@pytest.fixture
def base_vocab():
    return make_base_vocab()


@pytest.fixture
def tiny_model(base_vocab):
    return fresh_model(base_vocab, seed=1)
