"""
Fixtures compartilhadas dos testes
"""

import numpy as np
import pytest

from src.core.models.dataset import Roles, bind_dataset
from src.core.models.dgp import DgpConfig
from src.services.simulation import generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def baseline_dgp():
    """DGP de referência: δ=2, ξ=1.5, ω=1, τ=1, β=1, b=1, σ=1, p=0.5"""
    return DgpConfig(delta=2.0, xi=1.5, omega=1.0, tau=1.0, beta=1.0, s_model=(0.0, 1.0), sigma_eps=1.0, p_treat=0.5)


@pytest.fixture
def baseline_data(baseline_dgp):
    return generate(baseline_dgp.model_copy(update={"n": 2000, "seed": 11}))


@pytest.fixture
def cell_means_data():
    """Médias das células (T,S): 11 -> 5, 01 -> 2, 10 -> 3, 00 -> 2; diferença das diferenças = 2"""
    columns = {
        "y": [4.0, 6.0, 1.0, 3.0, 2.0, 4.0, 1.0, 3.0],
        "t": [1, 1, 0, 0, 1, 1, 0, 0],
        "s": [1, 1, 1, 1, 0, 0, 0, 0],
    }
    return bind_dataset(columns, Roles("y", "t", "s"))


def random_dataset(rng, n: int, k: int, clusters: bool = False):
    """Dataset com T aleatório, S dependente de X e efeitos heterogêneos"""
    x = rng.normal(size=(n, k))
    t = rng.integers(0, 2, size=n)
    lin = 0.3 + (x[:, 0] if k else 0.0)
    s = (rng.random(n) < 1.0 / (1.0 + np.exp(-lin))).astype(int)
    # garante as quatro células
    t[:4] = [1, 1, 0, 0]
    s[:4] = [1, 0, 1, 0]
    y = 1.0 + t + s + 2.0 * t * s + (x @ rng.normal(size=k) if k else 0.0) + rng.normal(size=n)
    columns = {"y": y, "t": t, "s": s}
    names = []
    for j in range(k):
        columns[f"x{j + 1}"] = x[:, j]
        names.append(f"x{j + 1}")
    cluster = None
    if clusters:
        columns["g"] = np.array([f"c{i % 10}" for i in range(n)], dtype=object)
        cluster = "g"
    return bind_dataset(columns, Roles("y", "t", "s", tuple(names), cluster))


@pytest.fixture
def make_dataset(rng):
    def factory(n: int = 200, k: int = 2, clusters: bool = False):
        return random_dataset(rng, n, k, clusters)

    return factory


@pytest.fixture
def leverage_dataset(rng):
    """S ~ logística(3X) com classes sobrepostas e um ponto extremo (X=12, S=1)"""
    n = 400
    x = rng.normal(size=n)
    s = (rng.random(n) < 1.0 / (1.0 + np.exp(-3.0 * x))).astype(int)
    t = rng.integers(0, 2, size=n)
    x[0], s[0] = 12.0, 1
    y = 1.0 + t + s + 2.0 * t * s + x + rng.normal(size=n)
    return bind_dataset({"y": y, "t": t, "s": s, "x": x}, Roles("y", "t", "s", ("x",)))
