# kernels.py
# Kernel shapes, scaled evaluation, and Nadaraya-Watson weight rows.
# Conventions:
#   K_h(t) = K(t / h) / h          for bandwidth h > 0
#   weight row of point i:  w_ik = K_{h_i}(x_i - x_k) / sum_j K_{h_i}(x_i - x_j)
# Every supported shape is symmetric with K(0) > 0, so the self-weight
# w_ii is strictly positive and the normaliser never vanishes.

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "ConstantBandwidth",
    "PerPointBandwidth",
    "KNearestBandwidth",
    "RateBandwidth",
    "BandwidthSpec",
    "parse_bandwidth",
    "eval_scaled",
    "weight_row",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Raw kernel values below this are flushed to exact zero so that strict
# positivity tests on kernel evaluations are never decided by denormals.
ZERO_THRESHOLD = 1e-300


class Kernel(enum.Enum):
    """Supported kernel shapes.

    All shapes are symmetric, nonnegative and positive at the origin.
    Compact-support shapes vanish for |t| >= 1; the Gaussian is positive
    everywhere (up to the ``ZERO_THRESHOLD`` flush).
    """

    UNIFORM = "uniform"
    EPANECHNIKOV = "epanechnikov"
    TRIANGULAR = "triangular"
    GAUSSIAN = "gaussian"

    @classmethod
    def from_name(cls, name: str) -> "Kernel":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown kernel {name!r}; choose one of: {choices}") from None

    @property
    def compact_support(self) -> bool:
        return self is not Kernel.GAUSSIAN

    def evaluate(self, t) -> np.ndarray:
        """Evaluate K(t) elementwise.

        Parameters
        ----------
        t : array_like
            Points at which to evaluate the kernel.

        Returns
        -------
        ndarray
            Nonnegative kernel values, with sub-``ZERO_THRESHOLD`` values
            flushed to exact zero.
        """
        t = np.asarray(t, dtype=float)
        if self is Kernel.UNIFORM:
            out = np.where(np.abs(t) < 1.0, 0.5, 0.0)
        elif self is Kernel.EPANECHNIKOV:
            out = 0.75 * np.maximum(0.0, 1.0 - t * t)
        elif self is Kernel.TRIANGULAR:
            out = np.maximum(0.0, 1.0 - np.abs(t))
        else:  # Gaussian
            out = np.exp(-0.5 * t * t) / _SQRT_2PI
        out = np.where(out < ZERO_THRESHOLD, 0.0, out)
        return out


def eval_scaled(kernel: Kernel, t, h: float) -> np.ndarray:
    """Evaluate the bandwidth-scaled kernel K_h(t) = K(t/h)/h.

    Parameters
    ----------
    kernel : Kernel
        Kernel shape.
    t : array_like
        Evaluation points.
    h : float
        Bandwidth, strictly positive.

    Returns
    -------
    ndarray
        Nonnegative values of K(t/h)/h.
    """
    h = float(h)
    if not h > 0.0 or not np.isfinite(h):
        raise ValueError(f"bandwidth must be a positive finite number, got {h}")
    return kernel.evaluate(np.asarray(t, dtype=float) / h) / h


def weight_row(kernel: Kernel, x: np.ndarray, i: int, h_i: float) -> np.ndarray:
    """Normalised kernel weights of sample point i against all sample points.

    Parameters
    ----------
    kernel : Kernel
        Kernel shape.
    x : ndarray, shape (n,)
        Sample coordinates.
    i : int
        Index of the target point.
    h_i : float
        Bandwidth used at point i, strictly positive.

    Returns
    -------
    ndarray, shape (n,)
        Probability vector: entries >= 0 summing to 1, with entry i > 0.
    """
    x = np.asarray(x, dtype=float)
    raw = eval_scaled(kernel, x[int(i)] - x, h_i)
    total = raw.sum()
    if not total > 0.0:
        raise ValueError(f"weight row {i} has zero total kernel mass (h={h_i})")
    return raw / total


# ---------------------------------------------------------------------------
# Bandwidth specifications
# ---------------------------------------------------------------------------
# Every spec resolves against a coordinate vector to a strictly positive
# per-point bandwidth array of matching length.


@dataclass(frozen=True)
class ConstantBandwidth:
    """A single global bandwidth h > 0."""

    h: float

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"constant bandwidth must be positive and finite, got {self.h}")

    def resolve(self, x: np.ndarray) -> np.ndarray:
        return np.full(len(x), float(self.h))

    def describe(self) -> str:
        return f"h={self.h:g}"


@dataclass(frozen=True, eq=False)
class PerPointBandwidth:
    """Explicit per-point bandwidths, one per sample point."""

    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        if self.h.ndim != 1:
            raise ValueError("per-point bandwidths must be a 1-d array")
        if not np.all(np.isfinite(self.h) & (self.h > 0.0)):
            raise ValueError("per-point bandwidths must all be positive and finite")

    def resolve(self, x: np.ndarray) -> np.ndarray:
        if len(self.h) != len(x):
            raise ValueError(
                f"per-point bandwidth length {len(self.h)} does not match sample size {len(x)}"
            )
        return self.h.copy()

    def describe(self) -> str:
        return f"per-point (n={len(self.h)})"


@dataclass(frozen=True)
class KNearestBandwidth:
    """Bandwidth of point i = distance to its k-th nearest sample neighbour.

    A tie at distance zero (k or more duplicates of a point) leaves no
    positive bandwidth and is an error.
    """

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    def resolve(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = len(x)
        if self.k > n - 1:
            raise ValueError(f"k={self.k} requires at least {self.k + 1} sample points, got {n}")
        dist = np.abs(x[:, None] - x[None, :])
        dist.sort(axis=1)
        h = dist[:, self.k]  # column 0 is the self distance
        zero = np.flatnonzero(h <= 0.0)
        if zero.size:
            raise ValueError(
                f"k-nearest bandwidth is zero at index {zero[0]}: "
                f"point has >= {self.k} duplicates"
            )
        return h

    def describe(self) -> str:
        return f"knn k={self.k}"


@dataclass(frozen=True)
class RateBandwidth:
    """Rate rule h = scale * n**(-delta), optionally scaled by the sample sd.

    The admissible decay range is 0 < delta < 1.  Resolves to a constant
    bandwidth once the sample is known.
    """

    delta: float
    sd_scale: bool = True
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"rate exponent must satisfy 0 < delta < 1, got {self.delta}")
        if not (np.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"rate scale must be positive and finite, got {self.scale}")

    def realize(self, x: np.ndarray) -> ConstantBandwidth:
        x = np.asarray(x, dtype=float)
        h = self.scale * len(x) ** (-self.delta)
        if self.sd_scale:
            sd = float(np.std(x))
            if sd <= 0.0:
                raise ValueError("sd-scaled rate bandwidth needs a non-constant coordinate")
            h *= sd
        return ConstantBandwidth(h)

    def resolve(self, x: np.ndarray) -> np.ndarray:
        return self.realize(x).resolve(x)

    def describe(self) -> str:
        sd = " * sd" if self.sd_scale else ""
        sc = f"{self.scale:g} * " if self.scale != 1.0 else ""
        return f"h={sc}n^(-{self.delta:g}){sd}"


BandwidthSpec = ConstantBandwidth | PerPointBandwidth | KNearestBandwidth | RateBandwidth


def parse_bandwidth(text: str) -> BandwidthSpec:
    """Parse a bandwidth rule string: '<float>', 'rate:<delta>' or 'knn:<k>'.

    'rate:<delta>' scales by the per-coordinate sample standard deviation.
    """
    text = text.strip()
    if text.startswith("rate:"):
        return RateBandwidth(delta=float(text[5:]))
    if text.startswith("knn:"):
        return KNearestBandwidth(k=int(text[4:]))
    return ConstantBandwidth(h=float(text))
