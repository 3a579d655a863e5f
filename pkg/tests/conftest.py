import numpy as np
import pytest

from elspec import ArmaSpec, NoiseKind, compute_periodogram, simulate


@pytest.fixture(scope="session")
def ma1_series_t70():
    return simulate(ArmaSpec(ma=[0.25]), 70, NoiseKind.STANDARD_NORMAL, seed=101)


@pytest.fixture(scope="session")
def ma1_pg_t70(ma1_series_t70):
    return compute_periodogram(ma1_series_t70)


@pytest.fixture(scope="session")
def arma11_series_t60():
    return simulate(ArmaSpec(ar=[0.5], ma=[0.3]), 60, NoiseKind.STANDARD_NORMAL, seed=11)


@pytest.fixture(scope="session")
def arma11_pg_t60(arma11_series_t60):
    return compute_periodogram(arma11_series_t60)


@pytest.fixture(scope="session")
def ma1_series_t2000():
    return simulate(ArmaSpec(ma=[0.5]), 2000, NoiseKind.STANDARD_NORMAL, seed=3)


@pytest.fixture(scope="session")
def ma1_pg_t2000(ma1_series_t2000):
    return compute_periodogram(ma1_series_t2000)


def rng_specs(count, seed=0, max_order=1):
    """Random valid specs with p,q <= max_order for property sweeps."""
    rng = np.random.default_rng(seed)
    specs = []
    while len(specs) < count:
        p = rng.integers(0, max_order + 1)
        q = rng.integers(0, max_order + 1)
        ar = rng.uniform(-0.9, 0.9, size=p)
        ma = rng.uniform(-0.9, 0.9, size=q)
        sigma2 = rng.uniform(0.2, 3.0)
        try:
            specs.append(ArmaSpec(ar=ar, ma=ma, sigma2=sigma2))
        except Exception:
            continue
    return specs
