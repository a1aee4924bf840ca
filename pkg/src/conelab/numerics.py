"""Shared numerical kernels: seeded RNG streams, special functions, quadrature,
root finding, SVD, and logistic regression.

Conventions
-----------
* Vectors and matrices are plain numpy arrays (row-major, float64).
* All stochastic routines take an :class:`RngStream` token.  A stream is an
  immutable (master_seed, stream_id) pair backing a counter-based Philox
  generator, so the same token always reproduces the same draws, regardless
  of execution order or thread schedule.  Derive independent substreams with
  :meth:`RngStream.substream`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "RngStream",
    "gaussian_vector",
    "gaussian_matrix",
    "random_orthogonal",
    "std_normal_cdf",
    "erfc",
    "reg_incomplete_beta",
    "brent_root",
    "quadrature",
    "svd",
    "LogisticFit",
    "logistic_fit",
]


# ---------------------------------------------------------------------------
# Random number streams
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _hash64(*labels) -> int:
    """Stable 64-bit hash of a label tuple (blake2b, run-independent)."""
    text = "\x1f".join(repr(x) for x in labels)
    return int.from_bytes(
        hashlib.blake2b(text.encode(), digest_size=8).digest(), "little"
    )


@dataclass(frozen=True)
class RngStream:
    """Immutable handle for a reproducible random substream.

    Identical (master_seed, stream_id) pairs produce bit-identical sequences;
    distinct stream ids give statistically independent streams (Philox keys).
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, *labels) -> "RngStream":
        """Derive a child stream keyed by arbitrary hashable labels."""
        return RngStream(self.master_seed, _hash64(self.stream_id, *labels))


def gaussian_vector(dim: int, rng: RngStream) -> np.ndarray:
    """Standard normal vector of length ``dim`` (deterministic per stream)."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return rng.generator().standard_normal(dim)


def gaussian_matrix(rows: int, cols: int, rng: RngStream) -> np.ndarray:
    """Matrix with independent standard normal entries."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return rng.generator().standard_normal((rows, cols))


def random_orthogonal(dim: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed orthogonal matrix.

    QR of a Gaussian matrix with the sign of the triangular factor's diagonal
    folded into Q, which makes the distribution exactly uniform.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    g = rng.generator().standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def erfc(x: float) -> float:
    """Complementary error function."""
    return math.erfc(x)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to ~1e-15 via erfc."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 1e-15) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError(f"betacf failed to converge for a={a}, b={b}, x={x}")


def reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b), i.e. the Beta(a,b) CDF.

    Continued-fraction evaluation with the symmetry switch at
    x = a/(a+b); absolute error below 1e-9 over the tested domain.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


# ---------------------------------------------------------------------------
# Root finding and quadrature
# ---------------------------------------------------------------------------


def brent_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of a scalar function on a sign-changing bracket [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]")
    return optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def quadrature(f, a: float, b: float, tol: float = 1e-10, points=None) -> float:
    """Adaptive quadrature of ``f`` on [a, b] with estimated error <= tol.

    ``points`` flags known kinks of the integrand.  Raises if the error
    estimate exceeds the requested tolerance.
    """
    if a > b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    val, err = integrate.quad(
        f, a, b, epsabs=tol, epsrel=tol, limit=200, points=points
    )
    if err > max(tol, 1e-8 * abs(val)) * 10:
        raise RuntimeError(
            f"quadrature did not converge: estimate {val} with error {err} > {tol}"
        )
    return val


# ---------------------------------------------------------------------------
# Dense linear algebra
# ---------------------------------------------------------------------------


def svd(M: np.ndarray):
    """Singular value decomposition M = U @ diag(s) @ V.T.

    Returns (U, s, V) with orthonormal columns and s sorted decreasingly.
    """
    M = np.asarray(M, dtype=float)
    if not np.isfinite(M).all():
        raise ValueError("matrix has non-finite entries")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return U, s, Vt.T


# ---------------------------------------------------------------------------
# Logistic regression (binomial GLM, IRLS)
# ---------------------------------------------------------------------------

#: cap on |beta1| (on standardized abscissas) used to flag separation
_BETA_CAP = 250.0
_IRLS_RIDGE = 1e-8
_IRLS_MAX_ITER = 100


@dataclass
class LogisticFit:
    """Fitted logistic model p(x) = 1 / (1 + exp(-(beta0 + beta1 x)))."""

    beta0: float
    beta1: float
    mu: float  # transition center, -beta0/beta1
    separated: bool = False


def _separation_gap(xs, succ, trials):
    """Return the (lo, hi) gap of a perfectly separating split, or None.

    Handles both orientations (success increasing or decreasing in x) and the
    degenerate all-success / all-failure cases.
    """
    xs = np.asarray(xs, float)
    succ = np.asarray(succ, float)
    trials = np.asarray(trials, float)
    any_succ = succ > 0
    any_fail = succ < trials
    if not any_fail.any():  # all successes
        return (xs.min(), xs.min())
    if not any_succ.any():  # all failures
        return (xs.max(), xs.max())
    mixed = any_succ & any_fail
    if mixed.any():
        return None
    lo_s, hi_s = xs[any_succ].min(), xs[any_succ].max()
    lo_f, hi_f = xs[any_fail].min(), xs[any_fail].max()
    if hi_f < lo_s:  # increasing orientation
        return (hi_f, lo_s)
    if hi_s < lo_f:  # decreasing orientation
        return (hi_s, lo_f)
    return None


def logistic_fit(points) -> LogisticFit:
    """Maximum-likelihood logistic fit of (abscissa, successes, trials) data.

    Iteratively reweighted least squares with a small ridge term.  Perfectly
    separated data is detected up front: |beta1| is clamped at a documented
    cap and mu reports the midpoint of the separating gap, with the
    ``separated`` flag set.
    """
    pts = [(float(x), int(s), int(n)) for x, s, n in points]
    if len({x for x, _, _ in pts}) < 2:
        raise ValueError("need at least two distinct abscissas")
    xs = np.array([p[0] for p in pts])
    succ = np.array([p[1] for p in pts], dtype=float)
    trials = np.array([p[2] for p in pts], dtype=float)
    if (succ < 0).any() or (succ > trials).any() or (trials <= 0).any():
        raise ValueError("need 0 <= successes <= trials with trials > 0")

    # standardize the abscissa for numerical stability
    x_mean, x_scale = xs.mean(), xs.std()
    if x_scale == 0:
        raise ValueError("degenerate abscissas")
    z = (xs - x_mean) / x_scale

    gap = _separation_gap(xs, succ, trials)
    if gap is not None:
        lo, hi = gap
        mu = 0.5 * (lo + hi)
        increasing = succ[np.argmax(xs)] > 0 or succ[np.argmin(xs)] == 0
        b1 = _BETA_CAP if increasing else -_BETA_CAP
        beta1 = b1 / x_scale
        beta0 = -beta1 * mu
        return LogisticFit(beta0=beta0, beta1=beta1, mu=mu, separated=True)

    beta = np.zeros(2)  # (intercept, slope) on standardized x
    X = np.column_stack([np.ones_like(z), z])
    for _ in range(_IRLS_MAX_ITER):
        eta = X @ beta
        p = 1.0 / (1.0 + np.exp(-np.clip(eta, -500, 500)))
        w = trials * p * (1.0 - p)
        grad = X.T @ (succ - trials * p) - _IRLS_RIDGE * beta
        hess = X.T @ (w[:, None] * X) + _IRLS_RIDGE * np.eye(2)
        step = np.linalg.solve(hess, grad)
        beta += step
        if np.linalg.norm(step) < 1e-12 * (1.0 + np.linalg.norm(beta)):
            break

    separated = bool(abs(beta[1]) > _BETA_CAP)
    if separated:
        beta[1] = math.copysign(_BETA_CAP, beta[1])
    beta1 = beta[1] / x_scale
    beta0 = beta[0] - beta[1] * x_mean / x_scale
    if beta1 == 0:
        mu = math.nan
    else:
        mu = -beta0 / beta1
    return LogisticFit(beta0=beta0, beta1=beta1, mu=mu, separated=separated)
