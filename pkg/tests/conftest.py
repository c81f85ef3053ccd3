from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ggflex import Dataset, load_csv

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

DATA = Path(__file__).parent / "data"

FIG1_POINTS = np.array([[0.0, 0.0], [0.5, 1.0], [2.0, 0.3], [1.5, 1.3], [1.2, -0.3]])


def fig2_dataset() -> Dataset:
    """Two columns per class; the inner columns face each other across three parallel edges."""
    neg = [(0, 0), (0.1, 1), (0, 2), (-1, 0), (-1, 1), (-1, 2)]
    pos = [(1, 0), (0.9, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
    return Dataset(np.array(neg + pos, float), np.array([0] * 6 + [1] * 6))


def fig3_dataset() -> Dataset:
    """A positive sample (row 0) enclosed by three negatives, plus a positive cluster far right."""
    ang = np.deg2rad([90, 210, 330])
    inner = np.c_[np.cos(ang), np.sin(ang)]
    ang2 = np.deg2rad(np.arange(0, 360, 30))
    outer = 2.5 * np.c_[np.cos(ang2), np.sin(ang2)]
    cluster = np.array([[7, 0], [7, 1], [7, -1], [8, 0], [8, 1], [8, -1], [6.5, 0.5], [6.5, -0.5]])
    X = np.vstack([[0, 0], inner, outer, cluster])
    y = np.r_[1, [0] * 15, [1] * len(cluster)]
    return Dataset(X, y)


def random_dataset(seed: int, m: int = 40, d: int = 2) -> Dataset:
    rng = np.random.default_rng(seed)
    y = np.zeros(m, dtype=np.int8)
    y[: m // 2] = 1
    X = rng.normal(size=(m, d)) + 1.2 * y[:, None]
    return Dataset(X, y)


@pytest.fixture
def fig1_points():
    return FIG1_POINTS.copy()


@pytest.fixture
def fig2():
    return fig2_dataset()


@pytest.fixture
def fig3():
    return fig3_dataset()


@pytest.fixture(scope="session")
def appendicitis():
    return load_csv(DATA / "appendicitis.csv", positive_label="1")


@pytest.fixture(scope="session")
def haberman_raw():
    return load_csv(DATA / "haberman.csv", positive_label="positive")


@pytest.fixture(scope="session")
def table1_path():
    return DATA / "table1_auc.csv"
