"""Configuration of pytest."""
import matplotlib.pyplot as plt
import pytest

from graphfs.datasets import gen_synthetic, standardize
from graphfs.files import TWO_GROUPS_FILE
from graphfs.io import load_csv
from graphfs.training import TrainConfig, train

plt.ioff()

TWO_GROUPS = load_csv(TWO_GROUPS_FILE, has_header=True, label_column="label")
BLOBS = standardize(gen_synthetic("blobs", n=60, seed=0))
MOONS = standardize(gen_synthetic("moons", n=60, seed=0))
SMALL_CONFIG = TrainConfig(m=2, k=3, gamma=0.1, zeta=50, lr=0.1, epochs=20, seed=0, log_every=5)

DB = {
    'two_groups_file': TWO_GROUPS_FILE,
    'two_groups': TWO_GROUPS,
    'blobs': BLOBS,
    'moons': MOONS,
    'small_config': SMALL_CONFIG
}


@pytest.fixture(scope="session")
def db():
    return DB


@pytest.fixture(scope="session")
def small_report():
    return train(BLOBS, SMALL_CONFIG)
