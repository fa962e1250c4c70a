"""Backfitting estimators for the bivariate additive model.

Fits y = alpha + m1(u) + m2(v) + noise by solving the normal equations

    m1 = S1* (y - m2),    m2 = S2* (y - m1)

either by alternating updates (Gauss-Seidel or Jacobi sweeps) or by one
dense linear solve of (I - S2* S1*) m2 = S2* (I - S1*) y followed by
back-substitution into the first equation.  The centered smoothers
annihilate constants, so the intercept separates as alpha = mean(y) and
both component fits are mean-zero by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .kernels import BandwidthSpec, ConstantBandwidth, Kernel, KNearestBandwidth, RateBandwidth
from .smoothers import Dataset, SmootherPair

__all__ = [
    "FitResult",
    "BackfitNonConvergenceError",
    "SingularSystemError",
    "backfit_iterative",
    "backfit_direct",
    "normal_equation_residual",
    "predict",
]

# Direct solves refuse systems with a 1-norm condition estimate above this.
CONDITION_LIMIT = 1e12


class BackfitNonConvergenceError(RuntimeError):
    """Iterative backfitting exhausted max_iter before meeting tol."""

    def __init__(self, message: str, iterations: int, final_delta: float):
        super().__init__(message)
        self.iterations = iterations
        self.final_delta = final_delta


class SingularSystemError(RuntimeError):
    """The direct-solve system (I - S2* S1*) is singular or near-singular."""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted additive decomposition.

    ``final_delta`` is the last iteration's max update norm (0.0 for the
    direct solve); ``residual_normal_eq`` is the summed infinity-norm
    residual of the two normal equations evaluated at the solution.
    """

    alpha_hat: float
    m1_hat: np.ndarray
    m2_hat: np.ndarray
    method: str
    sweep: str | None
    iterations: int
    final_delta: float
    residual_normal_eq: float

    @property
    def n(self) -> int:
        return len(self.m1_hat)

    def fitted_values(self) -> np.ndarray:
        return self.alpha_hat + self.m1_hat + self.m2_hat

    def residuals(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) - self.fitted_values()

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "m1_hat": [float(v) for v in self.m1_hat],
            "m2_hat": [float(v) for v in self.m2_hat],
            "method": self.method,
            "sweep": self.sweep,
            "iterations": self.iterations,
            "final_delta": self.final_delta,
            "residual_normal_eq": self.residual_normal_eq,
        }


def normal_equation_residual(
    pair: SmootherPair, y: np.ndarray, m1: np.ndarray, m2: np.ndarray
) -> float:
    """Summed infinity-norm residual of the two normal equations."""
    y = np.asarray(y, dtype=float)
    r1 = m1 - pair.s1_star @ (y - m2)
    r2 = m2 - pair.s2_star @ (y - m1)
    return float(np.abs(r1).max() + np.abs(r2).max())


def _check_y(pair: SmootherPair, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or len(y) != pair.n:
        raise ValueError(f"y must be a length-{pair.n} vector, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    return y


def default_max_iter(n: int) -> int:
    return 10 * n + 1000


def backfit_iterative(
    pair: SmootherPair,
    y: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
    sweep: str = "gauss-seidel",
) -> FitResult:
    """Alternate the two component updates until the change is below tol.

    Starting from m1 = m2 = 0, each pass recomputes m1 from a partial
    residual and then m2.  The Gauss-Seidel sweep feeds the fresh m1 into
    the m2 update; the Jacobi sweep uses the previous pass's m1 for both,
    matching the literal simultaneous recursion.  Stops when
    max(||dm1||_inf, ||dm2||_inf) <= tol, raises
    :class:`BackfitNonConvergenceError` when max_iter passes are
    exhausted first.
    """
    y = _check_y(pair, y)
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if sweep not in ("gauss-seidel", "jacobi"):
        raise ValueError(f"unknown sweep {sweep!r}; choose 'gauss-seidel' or 'jacobi'")
    if max_iter is None:
        max_iter = default_max_iter(pair.n)
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    alpha = float(y.mean())
    m1 = np.zeros(pair.n)
    m2 = np.zeros(pair.n)
    delta = np.inf
    for it in range(1, max_iter + 1):
        m1_new = pair.s1_star @ (y - m2)
        source = m1_new if sweep == "gauss-seidel" else m1
        m2_new = pair.s2_star @ (y - source)
        delta = max(
            float(np.abs(m1_new - m1).max()),
            float(np.abs(m2_new - m2).max()),
        )
        m1, m2 = m1_new, m2_new
        if delta <= tol:
            return FitResult(
                alpha_hat=alpha,
                m1_hat=m1,
                m2_hat=m2,
                method="iterative",
                sweep=sweep,
                iterations=it,
                final_delta=delta,
                residual_normal_eq=normal_equation_residual(pair, y, m1, m2),
            )
    raise BackfitNonConvergenceError(
        f"backfitting did not converge in {max_iter} iterations "
        f"(last update norm {delta:.6e}, tol {tol:g}); "
        "run certification to check the spectral radius",
        iterations=max_iter,
        final_delta=float(delta),
    )


def backfit_direct(pair: SmootherPair, y: np.ndarray) -> FitResult:
    """Solve the normal equations by one dense LU factorization.

    m2 solves (I - S2* S1*) m2 = S2* (I - S1*) y; m1 = S1* (y - m2) then
    satisfies the first normal equation exactly.  A reciprocal condition
    estimate of the factored system guards the solve: estimates above
    1e12 raise :class:`SingularSystemError` instead of returning noise.
    """
    y = _check_y(pair, y)
    n = pair.n
    system = np.eye(n) - pair.s2_star @ pair.s1_star
    anorm = float(np.linalg.norm(system, 1))
    lu, piv = lu_factor(system)
    gecon = get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        raise SingularSystemError(
            f"condition estimation failed (LAPACK info={info})", float("inf")
        )
    cond = 1.0 / rcond if rcond > 0.0 else float("inf")
    if cond > CONDITION_LIMIT:
        raise SingularSystemError(
            f"(I - S2* S1*) is singular or near-singular "
            f"(1-norm condition estimate {cond:.3e} > {CONDITION_LIMIT:g}); "
            "the dataset is likely not certified",
            cond,
        )
    rhs = pair.s2_star @ (y - pair.s1_star @ y)
    m2 = lu_solve((lu, piv), rhs)
    m1 = pair.s1_star @ (y - m2)
    return FitResult(
        alpha_hat=float(y.mean()),
        m1_hat=m1,
        m2_hat=m2,
        method="direct",
        sweep=None,
        iterations=0,
        final_delta=0.0,
        residual_normal_eq=normal_equation_residual(pair, y, m1, m2),
    )


def _query_bandwidth(bw: BandwidthSpec, x: np.ndarray, at: float) -> float:
    """Bandwidth to use at an off-sample query point."""
    if isinstance(bw, ConstantBandwidth):
        return bw.h
    if isinstance(bw, RateBandwidth):
        return bw.realize(x).h
    if isinstance(bw, KNearestBandwidth):
        dists = np.sort(np.abs(x - at))
        if bw.k > len(x):
            raise ValueError(f"k={bw.k} exceeds the sample size {len(x)}")
        h = float(dists[bw.k - 1])  # distance to the k-th nearest sample point
        if h <= 0.0:
            raise ValueError(f"k={bw.k} nearest sample points coincide with the query")
        return h
    raise ValueError(
        f"bandwidth spec {type(bw).__name__} has no off-sample rule; "
        "use a constant, rate, or k-nearest spec for prediction"
    )


def predict(
    data: Dataset,
    fit: FitResult,
    at: tuple[float, float],
    kernel: Kernel,
    bw_u: BandwidthSpec,
    bw_v: BandwidthSpec,
) -> float:
    """Predict at a query point (u, v).

    Returns alpha_hat plus the kernel-weighted averages of the fitted
    component values at u and at v.  Raises when a compact kernel places
    zero total mass on the sample at the query.
    """
    if fit.n != data.n:
        raise ValueError(f"fit has n={fit.n} but dataset has n={data.n}")
    u, v = float(at[0]), float(at[1])
    if not (np.isfinite(u) and np.isfinite(v)):
        raise ValueError(f"query point must be finite, got {at}")
    out = fit.alpha_hat
    for x, comp, q, label in ((data.u, fit.m1_hat, u, "u"), (data.v, fit.m2_hat, v, "v")):
        bw = bw_u if label == "u" else bw_v
        h = _query_bandwidth(bw, x, q)
        w = kernel.evaluate((q - x) / h) / h
        total = w.sum()
        if total <= 0.0:
            raise ValueError(
                f"zero total kernel mass at {label}={q} (bandwidth {h:g}); "
                "query is outside the kernel range of every sample point"
            )
        out += float(w @ comp) / float(total)
    return float(out)
