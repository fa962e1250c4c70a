"""Row-stochastic smoother matrices and their mean-centered versions.

``build_smoother`` stacks the Nadaraya-Watson weight rows of one
coordinate into an n x n row-stochastic matrix.  ``center`` applies the
mean-removal projector (I - 11^T/n), which enforces the zero-mean
identification constraint on fitted component vectors.  Rows follow the
original sample order; the sort permutations live on the dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import BandwidthSpec, Kernel

__all__ = ["Dataset", "SmootherPair", "build_smoother", "center", "build_pair"]


@dataclass
class Dataset:
    """A sample of responses and two predictor coordinates.

    ``sort_u`` and ``sort_v`` are argsort permutations of the coordinates,
    derived on construction: ``u[sort_u]`` is non-decreasing.
    """

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray
    sort_u: np.ndarray = field(init=False, repr=False)
    sort_v: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        for name, arr in (("y", self.y), ("u", self.u), ("v", self.v)):
            if arr.ndim != 1:
                raise ValueError(f"{name} must be a 1-d array")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        n = len(self.y)
        if len(self.u) != n or len(self.v) != n:
            raise ValueError(
                f"length mismatch: y has {n}, u has {len(self.u)}, v has {len(self.v)}"
            )
        if n < 2:
            raise ValueError(f"need at least 2 observations, got {n}")
        self.sort_u = np.argsort(self.u, kind="stable")
        self.sort_v = np.argsort(self.v, kind="stable")

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass
class SmootherPair:
    """Smoother matrices of both coordinates plus their centered versions."""

    s1: np.ndarray
    s2: np.ndarray
    s1_star: np.ndarray
    s2_star: np.ndarray
    n: int


def build_smoother(x: np.ndarray, kernel: Kernel, bw: BandwidthSpec) -> np.ndarray:
    """Assemble the row-stochastic smoother matrix of one coordinate.

    Row i holds the normalised kernel weights of point i at bandwidth
    h_i, i.e. equals ``weight_row(kernel, x, i, h_i)``.

    Parameters
    ----------
    x : ndarray, shape (n,)
        Coordinate values, n >= 2.
    kernel : Kernel
        Kernel shape.
    bw : bandwidth spec
        Resolved against ``x`` to per-point bandwidths.

    Returns
    -------
    ndarray, shape (n, n)
        Row-stochastic matrix with a strictly positive diagonal.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError(f"need at least 2 points to build a smoother, got {n}")
    h = bw.resolve(x)
    raw = kernel.evaluate((x[:, None] - x[None, :]) / h[:, None]) / h[:, None]
    total = raw.sum(axis=1)
    bad = np.flatnonzero(total <= 0.0)
    if bad.size:
        raise ValueError(f"row {bad[0]} has zero total kernel mass")
    return raw / total[:, None]


def center(s: np.ndarray) -> np.ndarray:
    """Apply the mean-removal projector: (I - 11^T/n) s.

    Subtracts the column-mean row from every row, so the result maps any
    vector to a zero-mean vector.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    return s - s.mean(axis=0)


def build_pair(
    data: Dataset,
    kernel: Kernel,
    bw_u: BandwidthSpec,
    bw_v: BandwidthSpec,
) -> SmootherPair:
    """Build both coordinate smoothers and their centered versions."""
    s1 = build_smoother(data.u, kernel, bw_u)
    s2 = build_smoother(data.v, kernel, bw_v)
    return SmootherPair(s1=s1, s2=s2, s1_star=center(s1), s2_star=center(s2), n=data.n)
