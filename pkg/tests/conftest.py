import numpy as np
import pytest

from querysum.model import ModelConfig, QuerysumModel
from querysum.store import save_checkpoint, synth_dataset


@pytest.fixture(scope="session")
def small_ds(tmp_path_factory):
    """Small dataset for store/service/cli/training unit tests."""
    root = tmp_path_factory.mktemp("smallds")
    synth_dataset(
        root, seed=7, n_videos=2, n_shots=128, feature_dim=16,
        vocab_size=12, queries_per_video=4,
    )
    return root


@pytest.fixture(scope="session")
def small_model():
    return QuerysumModel(
        ModelConfig.toy(feature_dim=16, n_intents=4, intent_dim=16), seed=3
    )


@pytest.fixture(scope="session")
def small_ckpt(small_ds, small_model):
    ckpt_dir = small_ds / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    save_checkpoint(ckpt_dir / "unit.ivzr", small_model)
    return "unit"


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
