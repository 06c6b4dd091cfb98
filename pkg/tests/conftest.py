import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skillq import MultiLevelParams


@pytest.fixture(scope="session")
def example1() -> MultiLevelParams:
    return MultiLevelParams(
        lam=(1, 1 / 2, 1 / 5, 1 / 8),
        mu=(2 / 3, 1 / 2, 1 / 4, 1 / 6),
        mu_up=(2 / 3, 1 / 2, 1 / 4),
        theta=(2, 1, 1, 1),
        k=(3, 2, 2, 2),
        gamma=(1, 1, 1, 1),
        ell=10,
        beta=0.0,
    )


@pytest.fixture(scope="session")
def example2() -> MultiLevelParams:
    return MultiLevelParams(
        lam=(1, 1 / 2, 1 / 4, 1 / 4),
        mu=(2 / 3, 1 / 2, 1 / 4, 1 / 2),
        mu_up=(2 / 3, 1 / 2, 1 / 4),
        theta=(2, 1, 1, 1),
        k=(3, 2, 2, 2),
        gamma=(1, 1, 1, 4),
        ell=10,
        beta=0.0,
    )


@pytest.fixture(scope="session")
def example3() -> MultiLevelParams:
    return MultiLevelParams(
        lam=(1 / 4, 1 / 4, 1 / 3, 1 / 8),
        mu=(1, 1 / 4, 1 / 2, 1 / 6),
        mu_up=(1, 1 / 8, 1 / 2),
        theta=(1, 1, 2, 1),
        k=(2, 2, 2, 2),
        gamma=(1, 1, 10, 1),
        ell=10,
        beta=0.0,
    )


@pytest.fixture(scope="session")
def small_multi() -> MultiLevelParams:
    """A four-level instance small enough for dense matrix-exponential oracles."""
    return MultiLevelParams(
        lam=(0.8, 0.5, 0.4, 0.3),
        mu=(1.0, 0.7, 0.6, 0.5),
        mu_up=(0.9, 0.65, 0.55),
        theta=(1.5, 1.0, 0.8, 0.6),
        k=(1, 1, 1, 1),
        gamma=(1.0, 2.0, 1.5, 3.0),
        ell=3,
        beta=0.5,
    )
