import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from rfrdenoise.data import make_texture
from rfrdenoise.net import NetConfig, load_checkpoint, save_checkpoint
from rfrdenoise.train import PretrainConfig, pretrain

# Desk-scale pretrain budget shared by the acceptance tests. Training is
# seed-deterministic, so the on-disk cache is always valid for these settings.
PRETRAIN_STEPS = 600
PRETRAIN_SEED = 0
CACHE_DIR = Path(__file__).parent / "_cache"


def train_desk_net():
    images = [make_texture(160, np.random.default_rng([10, i])) for i in range(8)]
    cfg = PretrainConfig(steps=PRETRAIN_STEPS, batch=4, crop=48, seed=PRETRAIN_SEED)
    net, _ = pretrain(images, NetConfig(), cfg)
    return net


@pytest.fixture(scope="session")
def desk_ckpt_path():
    """Pretrained default-architecture checkpoint, cached across runs."""
    CACHE_DIR.mkdir(exist_ok=True)
    path = CACHE_DIR / f"desk_s{PRETRAIN_STEPS}_seed{PRETRAIN_SEED}.rfrd"
    if not path.exists():
        save_checkpoint(train_desk_net(), path)
    return path


@pytest.fixture(scope="session")
def desk_net(desk_ckpt_path):
    return load_checkpoint(desk_ckpt_path)
