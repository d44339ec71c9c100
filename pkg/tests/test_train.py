import numpy as np
import pytest

from rfrdenoise.data import make_texture
from rfrdenoise.net import NetConfig
from rfrdenoise.train import PretrainConfig, pretrain


@pytest.fixture(scope="module")
def corpus():
    return [make_texture(96, np.random.default_rng([1, i])) for i in range(4)]


def test_smoke_and_loss_drops(corpus):
    cfg = PretrainConfig(steps=60, batch=2, crop=32, lr_start=1e-3, lr_end=1e-4, seed=0)
    net, losses = pretrain(corpus, NetConfig(depth=3, width=8), cfg)
    assert len(losses) == 60
    assert np.mean(losses[-10:]) < np.mean(losses[:10])


def test_deterministic(corpus):
    cfg = PretrainConfig(steps=10, batch=2, crop=32, seed=3)
    net_cfg = NetConfig(depth=3, width=4)
    a, la = pretrain(corpus, net_cfg, cfg)
    b, lb = pretrain(corpus, net_cfg, cfg)
    assert la == lb
    for x, y in zip(a.layers, b.layers):
        np.testing.assert_array_equal(x.weight, y.weight)
        np.testing.assert_array_equal(x.bias, y.bias)


def test_empty_corpus_rejected():
    with pytest.raises(ValueError, match="empty"):
        pretrain([], NetConfig(), PretrainConfig())


def test_channel_mismatch_rejected(corpus):
    with pytest.raises(ValueError, match="channels"):
        pretrain(corpus, NetConfig(in_channels=3), PretrainConfig(steps=1))


def test_crop_too_large(corpus):
    with pytest.raises(ValueError, match="crop"):
        pretrain(corpus, NetConfig(), PretrainConfig(steps=1, crop=128))
