"""Statistical dimension of convex cones.

The statistical dimension of a closed convex cone C in R^d is the expected
squared norm of the projection of a standard Gaussian vector onto C.  It
extends the linear dimension of a subspace and locates phase transitions in
random convex programs.  This module provides:

* closed forms (orthant, second-order, PSD, subspaces, products, polars),
* the exact circular-cone integral and its d*sin^2(alpha) + cos(2*alpha)
  approximation,
* Monte Carlo estimation for any projectable cone,
* the descent-cone upper bound via the dilated-subdifferential curve
  F(tau) = E dist^2(g, tau * S) with its error bound,
* the asymptotic l1 and Schatten-1 descent curves psi(rho) and psi(rho, nu),
* harmonic-number formulas for permutahedron normal cones,
* Gaussian-width estimation and the w^2 <= delta <= w^2 + 1 sandwich.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .cones import (
    Circular,
    ConeSpec,
    Orthant,
    PolarOf,
    Product,
    PsdSym,
    SecondOrder,
    Subspace,
    ambient_dimension,
    project_many,
)
from .numerics import RngStream, brent_root, erfc, quadrature

__all__ = [
    "StatDimEstimate",
    "statdim_closed_form",
    "statdim_circular_exact",
    "statdim_circular_asymptotic",
    "statdim_monte_carlo",
    "psi_l1",
    "psi_l1_inverse",
    "statdim_l1_descent",
    "psi_s1",
    "statdim_s1_descent",
    "statdim_s1_finite_size",
    "statdim_permutahedron",
    "harmonic_number",
    "L1Model",
    "S1Model",
    "GenericOracleModel",
    "SubdifferentialModel",
    "RecipeCurve",
    "recipe_statdim",
    "descent_error_bound",
    "gaussian_width_mc",
]

_SQRT_2_PI = math.sqrt(2.0 / math.pi)


@dataclass
class StatDimEstimate:
    """A statistical-dimension value with provenance and an uncertainty band."""

    value: float
    method: str  # "closed_form" | "variational" | "monte_carlo"
    stderr: float = 0.0
    lower: float = 0.0
    upper: float = 0.0

    def __post_init__(self):
        if self.lower == 0.0 and self.upper == 0.0 and self.stderr == 0.0:
            self.lower = self.upper = self.value


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def statdim_circular_exact(d: int, alpha: float, tol: float = 1e-9) -> float:
    """Exact statistical dimension of the circular cone of half-angle alpha.

    Polar-coordinate integral of the squared projection profile
    F(beta) = 1 on [0, alpha), cos^2(beta - alpha) on [alpha, pi/2 + alpha),
    0 beyond, against the sin^(d-2) surface kernel; the log-gamma prefactor
    keeps large d stable.  Absolute error well below 1e-6.
    """
    if d < 2:
        raise ValueError("circular cone needs d >= 2")
    if not 0.0 <= alpha <= math.pi / 2:
        raise ValueError(f"alpha must lie in [0, pi/2], got {alpha}")
    log_pref = (
        math.log(d)
        + math.lgamma(d / 2.0)
        - 0.5 * math.log(math.pi)
        - math.lgamma((d - 1) / 2.0)
    )
    pref = math.exp(log_pref)

    def head(beta):
        return math.sin(beta) ** (d - 2)

    def mid(beta):
        return math.sin(beta) ** (d - 2) * math.cos(beta - alpha) ** 2

    total = 0.0
    if alpha > 0.0:
        total += quadrature(head, 0.0, alpha, tol=tol)
    total += quadrature(mid, alpha, math.pi / 2 + alpha, tol=tol)
    return pref * total


def statdim_circular_asymptotic(d: int, alpha: float) -> float:
    """d sin^2(alpha) + cos(2 alpha): the O(1)-accurate circular approximation."""
    return d * math.sin(alpha) ** 2 + math.cos(2 * alpha)


def harmonic_number(d: int) -> float:
    """Partial harmonic sum H_d = 1 + 1/2 + ... + 1/d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    # sum in reverse for slightly better rounding at large d
    return float(sum(1.0 / i for i in range(d, 0, -1)))


def statdim_permutahedron(d: int, signed: bool = False) -> float:
    """Statistical dimension of the normal cone at a vertex of the
    (signed) permutahedron of a vector with distinct entries: H_d, halved
    for the signed variant."""
    h = harmonic_number(d)
    return 0.5 * h if signed else h


def statdim_closed_form(cone: ConeSpec) -> Optional[StatDimEstimate]:
    """Exact statistical dimension, when a rule applies.

    Subspace -> dim; Orthant(d) -> d/2; SecondOrder(d) -> d/2 (self-dual);
    PsdSym(n) -> n(n+1)/4; Circular -> exact integral; products add;
    polar cones complement to the ambient dimension.
    """

    def _value(c: ConeSpec) -> float:
        match c:
            case Subspace():
                return float(c.dim)
            case Orthant(d=d):
                return d / 2.0
            case SecondOrder(d=d):
                return d / 2.0
            case PsdSym(n=n):
                return n * (n + 1) / 4.0
            case Circular(d=d, alpha=alpha):
                return statdim_circular_exact(d, alpha)
            case Product(factors=fs):
                return sum(_value(f) for f in fs)
            case PolarOf(cone=inner):
                return ambient_dimension(inner) - _value(inner)
        raise LookupError

    try:
        v = _value(cone)
    except LookupError:
        return None
    return StatDimEstimate(value=v, method="closed_form")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

_MC_CHUNK = 20_000


def statdim_monte_carlo(cone: ConeSpec, samples: int, rng: RngStream) -> StatDimEstimate:
    """Sample mean of ||pi_C(g)||^2 over standard Gaussians, with a 3-sigma band."""
    if samples < 2:
        raise ValueError("need at least two samples")
    d = ambient_dimension(cone)
    gen = rng.generator()
    total = 0.0
    total_sq = 0.0
    left = samples
    while left > 0:
        n = min(left, _MC_CHUNK)
        P = project_many(cone, gen.standard_normal((n, d)))
        sq = np.einsum("ij,ij->i", P, P)
        total += float(sq.sum())
        total_sq += float((sq * sq).sum())
        left -= n
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    stderr = math.sqrt(var / samples)
    return StatDimEstimate(
        value=mean,
        method="monte_carlo",
        stderr=stderr,
        lower=mean - 3 * stderr,
        upper=mean + 3 * stderr,
    )


# ---------------------------------------------------------------------------
# l1 descent curve
# ---------------------------------------------------------------------------


def _gauss_upper(t: float) -> float:
    """int_t^inf exp(-u^2/2) du."""
    return math.sqrt(math.pi / 2.0) * erfc(t / math.sqrt(2.0))


def _psi_l1_tau(rho: float) -> float:
    """Unique positive root of the l1 stationary equation
    exp(-t^2/2)/t - int_t^inf exp(-u^2/2) du = sqrt(pi/2) rho/(1-rho)."""
    rhs = math.sqrt(math.pi / 2.0) * rho / (1.0 - rho)

    def f(t):
        return math.exp(-t * t / 2.0) / t - _gauss_upper(t) - rhs

    hi = 2.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError(f"stationary bracket blew up at rho={rho}")
    return brent_root(f, 1e-12, hi, tol=1e-14)


def psi_l1(rho: float) -> float:
    """Normalized statistical dimension of the l1 descent cone at sparsity
    fraction rho; the phase-transition curve for sparse recovery.

    Strictly increasing from psi(0) = 0 to psi(1) = 1.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 1.0
    tau = _psi_l1_tau(rho)
    q = _gauss_upper(tau)
    val = rho * (1.0 + tau * tau) + (1.0 - rho) * _SQRT_2_PI * (
        (1.0 + tau * tau) * q - tau * math.exp(-tau * tau / 2.0)
    )
    return min(1.0, max(0.0, val))


def psi_l1_inverse(target: float) -> float:
    """Sparsity fraction at which psi_l1 attains ``target`` (monotone inverse)."""
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target must lie in [0, 1], got {target}")
    if target == 0.0:
        return 0.0
    if target == 1.0:
        return 1.0
    return brent_root(lambda r: psi_l1(r) - target, 1e-12, 1.0 - 1e-12, tol=1e-12)


def statdim_l1_descent(s: int, d: int) -> StatDimEstimate:
    """Statistical dimension of the l1 descent cone at an s-sparse vector in R^d.

    value = upper = d * psi(s/d); the lower bound subtracts the recipe error
    2*sqrt(d/s) and is floored at s - 1 (the descent cone contains the
    (s-1)-dimensional face subspace).
    """
    if not 1 <= s <= d:
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    upper = d * psi_l1(s / d)
    lower = max(float(s - 1), upper - 2.0 * math.sqrt(d / s))
    return StatDimEstimate(
        value=upper, method="variational", stderr=0.0, lower=lower, upper=upper
    )


# ---------------------------------------------------------------------------
# Schatten-1 descent curve
# ---------------------------------------------------------------------------

_S1_CLAMP = 1e-3


def _mp_density(y: float) -> Callable[[float], float]:
    """Singular-value density of a p x q Gaussian matrix with q^-1 variance,
    p/q -> y: supported on [1 - sqrt(y), 1 + sqrt(y)]."""
    am = 1.0 - math.sqrt(y)
    ap = 1.0 + math.sqrt(y)

    def phi(u: float) -> float:
        t = (u * u - am * am) * (ap * ap - u * u)
        if t <= 0.0 or u <= 0.0:
            return 0.0
        return math.sqrt(t) / (math.pi * y * u)

    return phi


def psi_s1(rho: float, nu: float) -> float:
    """Normalized asymptotic statistical dimension of the Schatten-1 descent
    cone: rank fraction rho = r/m, aspect ratio nu = m/n (m <= n).

    Inputs are clamped to [1e-3, 1 - 1e-3] (with a warning) where the
    stationary solve is numerically fragile.  As nu -> 0 the curve tends to
    2*rho - rho^2.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 1.0
    rho_c = min(max(rho, _S1_CLAMP), 1.0 - _S1_CLAMP)
    nu_c = min(max(nu, _S1_CLAMP), 1.0)
    if rho_c != rho or nu_c != nu:
        warnings.warn(
            f"psi_s1 inputs clamped to (rho={rho_c}, nu={nu_c}) for stability",
            RuntimeWarning,
            stacklevel=2,
        )
    rho, nu = rho_c, nu_c

    y = nu * (1.0 - rho) / (1.0 - rho * nu)
    am = 1.0 - math.sqrt(y)
    ap = 1.0 + math.sqrt(y)
    phi = _mp_density(y)

    def moment(tau: float, power: int) -> float:
        lo = max(am, tau)
        if lo >= ap:
            return 0.0
        return quadrature(lambda u: (u - tau) ** power * phi(u), lo, ap, tol=1e-11)

    rhs = rho / (1.0 - rho)

    def stationary(tau: float) -> float:
        return moment(tau, 1) / tau - rhs  # int (u/tau - 1) phi du - rhs

    tau = brent_root(stationary, 1e-9, ap - 1e-12, tol=1e-12)
    val = rho * nu + (1.0 - rho * nu) * (
        rho * (1.0 + tau * tau) + (1.0 - rho) * moment(tau, 2)
    )
    return min(1.0, max(0.0, val))


def statdim_s1_descent(r: int, m: int, n: int) -> StatDimEstimate:
    """Asymptotic statistical dimension m*n*psi(r/m, m/n) of the Schatten-1
    descent cone at a rank-r matrix in R^(m x n), m <= n.

    The value is a large-dimension limit (method "variational"); the lower
    band subtracts the recipe error bound 2*sqrt(m/r).  For a finite-size
    Monte Carlo refinement see :func:`statdim_s1_finite_size`.
    """
    if not 1 <= r <= m <= n:
        raise ValueError(f"need 1 <= r <= m <= n, got ({r}, {m}, {n})")
    if r == m:
        value = float(m * n)  # full rank: descent cone is everything
    else:
        value = m * n * psi_s1(r / m, m / n)
    lower = max(0.0, value - 2.0 * math.sqrt(m / r))
    return StatDimEstimate(
        value=value, method="variational", stderr=0.0, lower=lower, upper=value
    )


def statdim_s1_finite_size(
    r: int, m: int, n: int, samples: int, rng: RngStream
) -> StatDimEstimate:
    """Finite-size Monte Carlo evaluation of the Schatten-1 recipe bound.

    Minimizes over tau the sampled curve
    r(m + n - r + tau^2) + E sum_i pos^2(sigma_i(G22) - tau)
    with G22 an (m-r) x (n-r) standard normal block.
    """
    if not 1 <= r <= m <= n:
        raise ValueError(f"need 1 <= r <= m <= n, got ({r}, {m}, {n})")
    if samples < 2:
        raise ValueError("need at least two samples")
    if r == m:
        return StatDimEstimate(value=float(m * n), method="monte_carlo")
    gen = rng.generator()
    sv = np.empty((samples, m - r))
    for i in range(samples):
        sv[i] = np.linalg.svd(gen.standard_normal((m - r, n - r)), compute_uv=False)
    head = float(r * (m + n - r))

    def curve(tau: float) -> np.ndarray:
        return head + r * tau * tau + np.sum(np.maximum(sv - tau, 0.0) ** 2, axis=1)

    tau_star, per_sample = _golden_min(curve, 0.0, 2.0 * (1.0 + math.sqrt(n)))
    mean = float(per_sample.mean())
    stderr = float(per_sample.std(ddof=1) / math.sqrt(samples))
    return StatDimEstimate(
        value=mean,
        method="monte_carlo",
        stderr=stderr,
        lower=mean - 3 * stderr,
        upper=mean + 3 * stderr,
    )


# ---------------------------------------------------------------------------
# Descent-cone recipe (common-random-number Monte Carlo)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1Model:
    """Subdifferential of the l1 norm at an s-sparse vector in R^d."""

    s: int
    d: int

    def __post_init__(self):
        if not 1 <= self.s <= self.d:
            raise ValueError(f"need 1 <= s <= d, got ({self.s}, {self.d})")

    @property
    def ambient(self) -> int:
        return self.d

    def bound(self) -> float:
        return math.sqrt(self.d)

    def normalized_value(self) -> float:
        return math.sqrt(self.s)

    def draw(self, rng: RngStream, samples: int):
        G = rng.generator().standard_normal((samples, self.d))
        return G[:, : self.s], np.abs(G[:, self.s :])

    def dist_sq(self, state, tau: float) -> np.ndarray:
        head, abs_tail = state
        return np.sum((head - tau) ** 2, axis=1) + np.sum(
            np.maximum(abs_tail - tau, 0.0) ** 2, axis=1
        )


@dataclass(frozen=True)
class S1Model:
    """Subdifferential of the Schatten 1-norm at a rank-r matrix in R^(m x n)."""

    r: int
    m: int
    n: int

    def __post_init__(self):
        if not 1 <= self.r <= self.m <= self.n:
            raise ValueError(f"need 1 <= r <= m <= n, got ({self.r}, {self.m}, {self.n})")

    @property
    def ambient(self) -> int:
        return self.m * self.n

    def bound(self) -> float:
        return math.sqrt(self.m)

    def normalized_value(self) -> float:
        return math.sqrt(self.r)

    def draw(self, rng: RngStream, samples: int):
        # sufficient statistics per sample: squared norm of the fixed blocks,
        # trace of the r x r corner, singular values of the free block
        gen = rng.generator()
        r, m, n = self.r, self.m, self.n
        head_dim = r * (m + n - r)
        a = np.empty(samples)
        b = np.empty(samples)
        sv = np.zeros((samples, max(m - r, 1)))
        for i in range(samples):
            G11 = gen.standard_normal((r, r))
            rest = gen.standard_normal(head_dim - r * r)
            a[i] = float(G11.ravel() @ G11.ravel() + rest @ rest)
            b[i] = float(np.trace(G11))
            if m > r:
                sv[i, : m - r] = np.linalg.svd(
                    gen.standard_normal((m - r, n - r)), compute_uv=False
                )
        return a, b, sv

    def dist_sq(self, state, tau: float) -> np.ndarray:
        a, b, sv = state
        val = a - 2.0 * tau * b + self.r * tau * tau
        if self.m > self.r:
            val = val + np.sum(np.maximum(sv - tau, 0.0) ** 2, axis=1)
        return val


@dataclass(frozen=True)
class GenericOracleModel:
    """Caller-supplied subdifferential: a dist^2(g, tau*S) evaluator over a
    batch of Gaussians, the sup-norm bound B over S, and f(x/||x||)."""

    ambient: int
    dist_sq_fn: Callable[[np.ndarray, float], np.ndarray]
    sup_norm_bound: float
    f_normalized: float

    def bound(self) -> float:
        return self.sup_norm_bound

    def normalized_value(self) -> float:
        return self.f_normalized

    def draw(self, rng: RngStream, samples: int):
        return rng.generator().standard_normal((samples, self.ambient))

    def dist_sq(self, state, tau: float) -> np.ndarray:
        return self.dist_sq_fn(state, tau)


SubdifferentialModel = Union[L1Model, S1Model, GenericOracleModel]


@dataclass
class RecipeCurve:
    """Minimum of the dilated-subdifferential distance curve."""

    tau_star: float
    F_min: float
    samples_per_tau: int


def _golden_min(curve: Callable[[float], np.ndarray], lo: float, hi: float):
    """Golden-section minimum of tau -> mean(curve(tau)) on [lo, hi].

    Returns (tau_star, per-sample values at tau_star).  Valid because the
    sample-average curve inherits convexity from each per-sample term.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(curve(c).mean())
    fd = float(curve(d).mean())
    while b - a > 1e-10 * (1.0 + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(curve(c).mean())
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(curve(d).mean())
    tau = 0.5 * (a + b)
    return tau, curve(tau)


def recipe_statdim(
    model: SubdifferentialModel, d: int, samples: int, rng: RngStream
) -> RecipeCurve:
    """Monte Carlo version of the descent-cone recipe.

    Estimates F(tau) = E dist^2(g, tau * S) with common random numbers across
    tau, locates the minimizer by golden section on [0, 10*sqrt(d)], and
    returns F(tau_star) as the upper bound on the descent cone's statistical
    dimension.  If the minimum sits at the far end of the bracket the bound
    is vacuous and F(0) = d is returned instead.
    """
    if samples < 1000:
        raise ValueError("recipe needs at least 1000 samples")
    if d != model.ambient:
        raise ValueError(f"ambient mismatch: model lives in R^{model.ambient}, got d={d}")
    state = model.draw(rng, samples)
    hi = 10.0 * math.sqrt(d)
    tau_star, per_sample = _golden_min(lambda t: model.dist_sq(state, t), 0.0, hi)
    if tau_star >= hi * (1.0 - 1e-6):
        f0 = float(model.dist_sq(state, 0.0).mean())
        return RecipeCurve(tau_star=0.0, F_min=f0, samples_per_tau=samples)
    return RecipeCurve(
        tau_star=tau_star, F_min=float(per_sample.mean()), samples_per_tau=samples
    )


def descent_error_bound(model: SubdifferentialModel) -> float:
    """Accuracy guarantee for the recipe: 2 sup{||s||: s in S} / f(x/||x||).

    Evaluates to 2*sqrt(d/s) for the l1 model and 2*sqrt(m/r) for the
    Schatten-1 model.
    """
    fval = model.normalized_value()
    if fval == 0:
        raise ValueError("normalized regularizer value is zero")
    return 2.0 * model.bound() / fval


# ---------------------------------------------------------------------------
# Gaussian width
# ---------------------------------------------------------------------------


def _sphere_sup(cone: ConeSpec, G: np.ndarray) -> np.ndarray:
    """Per-row sup of <g, x> over the cone intersected with the unit sphere."""
    match cone:
        case Subspace(basis=B):
            if B.shape[1] == 0:
                raise ValueError("width of the zero cone is undefined on the sphere")
            return np.linalg.norm(G @ B, axis=1)
        case Orthant():
            pos = np.maximum(G, 0.0)
            norm_pos = np.linalg.norm(pos, axis=1)
            any_pos = (G > 0).any(axis=1)
            return np.where(any_pos, norm_pos, G.max(axis=1))
        case SecondOrder(d=_):
            return _sphere_sup(Circular(d=cone.d, alpha=math.pi / 4), G)
        case Circular(alpha=alpha):
            t = G[:, 0]
            r = np.linalg.norm(G[:, 1:], axis=1)
            beta = np.arctan2(r, t)
            return np.linalg.norm(G, axis=1) * np.cos(np.maximum(beta - alpha, 0.0))
        case Product(factors=fs):
            sups = []
            k = 0
            for f in fs:
                df = ambient_dimension(f)
                sups.append(_sphere_sup(f, G[:, k : k + df]))
                k += df
            S = np.column_stack(sups)
            pos = np.maximum(S, 0.0)
            combined = np.linalg.norm(pos, axis=1)
            any_pos = (S > 0).any(axis=1)
            return np.where(any_pos, combined, S.max(axis=1))
    raise ValueError(f"gaussian width unsupported for cone variant {type(cone).__name__}")


def gaussian_width_mc(cone: ConeSpec, samples: int, rng: RngStream):
    """Monte Carlo Gaussian width E sup{<g, x>: x in C, ||x|| = 1}.

    Supported for orthants, circular/second-order cones, subspaces, and
    products thereof, where the per-sample supremum has a closed form.
    Returns (estimate, stderr).
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    d = ambient_dimension(cone)
    gen = rng.generator()
    total = 0.0
    total_sq = 0.0
    left = samples
    while left > 0:
        k = min(left, _MC_CHUNK)
        sup = _sphere_sup(cone, gen.standard_normal((k, d)))
        total += float(sup.sum())
        total_sq += float((sup * sup).sum())
        left -= k
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(var / samples)
