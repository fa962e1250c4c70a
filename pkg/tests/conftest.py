"""Shared fixtures and construction helpers for the test suite."""

import numpy as np
import pytest

from nwbackfit.kernels import ConstantBandwidth, Kernel
from nwbackfit.simulate import max_gap
from nwbackfit.smoothers import Dataset

ALL_KERNELS = [Kernel.UNIFORM, Kernel.EPANECHNIKOV, Kernel.TRIANGULAR, Kernel.GAUSSIAN]


def gap_passing_constant(x, rng, lo=1.15, hi=3.0) -> ConstantBandwidth:
    """Constant bandwidth comfortably above the max adjacent gap of x."""
    h = max(max_gap(x) * float(rng.uniform(lo, hi)), 1e-6)
    return ConstantBandwidth(h)


def two_cluster_dataset(rng, spread: float, n_a: int = 6, n_b: int = 6) -> Dataset:
    """Two well-separated clusters, aligned across both coordinates.

    Cluster membership is identical for u and v, so the step vector that
    is +1/n_a on one cluster and -1/n_b on the other is fixed by both
    centered smoothers whenever the bandwidth bridges neither gap.
    ``spread`` sets the within-cluster diameter: tight clusters with a
    covering bandwidth give equal within-cluster weights (a block
    averaging projector), larger spreads give distance-varying weights.
    """
    u = np.concatenate([rng.uniform(0.0, spread, n_a), rng.uniform(10.0, 10.0 + spread, n_b)])
    v = np.concatenate([rng.uniform(0.0, spread, n_a), rng.uniform(10.0, 10.0 + spread, n_b)])
    y = rng.normal(size=n_a + n_b)
    return Dataset(y=y, u=u, v=v)


@pytest.fixture
def uniform_cluster_problem():
    """Tight aligned clusters + uniform kernel: the certificate-failure fixture."""
    rng = np.random.default_rng(7)
    data = two_cluster_dataset(rng, spread=0.5)
    return data, Kernel.UNIFORM, ConstantBandwidth(1.0)


@pytest.fixture
def triangular_cluster_problem():
    """Aligned clusters with within-cluster weight variation.

    Keeps the unit eigenvalue of the centered product but starts the
    iteration off the fixed-point manifold, so the iterative solver
    genuinely fails to converge and the direct system is singular.
    """
    rng = np.random.default_rng(11)
    data = two_cluster_dataset(rng, spread=0.8)
    return data, Kernel.TRIANGULAR, ConstantBandwidth(1.0)
