"""Shared fixtures: moderately sized batches reused across test modules."""

import pytest

from volbound import SabrParams, simulate_paths


@pytest.fixture(scope="session")
def batch_mid():
    """20k paths of (sigma0=0.3, alpha=0.5) over half a year."""
    return simulate_paths(SabrParams(sigma0=0.3, alpha=0.5), T=0.5, steps=64, n=20_000, seed=101)


@pytest.fixture(scope="session")
def batch_flat():
    """Effectively constant volatility: alpha at the numerical floor."""
    return simulate_paths(SabrParams(sigma0=0.3, alpha=1e-12), T=1.0, steps=16, n=2_000, seed=11)


@pytest.fixture(scope="session")
def batch_with_paths():
    """Small debug-mode batch retaining the full volatility grid."""
    return simulate_paths(
        SabrParams(sigma0=0.3, alpha=0.5), T=1.0, steps=256, n=4_000, seed=29, keep_paths=True
    )
