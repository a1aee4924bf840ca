"""Conic intrinsic volumes, tail functionals, and kinematic formulas.

A closed convex cone C in R^d carries d + 1 intrinsic volumes v_0..v_d: the
probabilities that the Gaussian projection onto C lands in the relative
interior of a k-dimensional face.  They form a probability distribution whose
mean is the statistical dimension.  Suffix sums give the tail functionals

    t_k = v_k + v_{k+1} + ...      h_k = v_k + v_{k+2} + ...

and drive exact intersection probabilities: a uniformly random rotation of a
codimension-m subspace meets C beyond the origin with probability exactly
2 h_{m+1}(C) (Crofton), and a rotated cone K meets C with probability
2 h_{d+1}(C x K) (kinematic formula).  The tail sequence concentrates around
the statistical dimension within a window of width omega = sqrt(min(delta,
delta_polar)), quantified by the bound p(lambda) implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cones import ConeSpec, ambient_dimension, project_many
from .numerics import RngStream, quadrature, reg_incomplete_beta

__all__ = [
    "IntrinsicVolumes",
    "ivols_subspace",
    "ivols_orthant",
    "ivols_circular",
    "ivols_product",
    "tail",
    "half_tail",
    "statdim_from_ivols",
    "tropic",
    "steiner_rhs",
    "steiner_lhs_mc",
    "concentration_bound",
    "concentration_bound_raw",
    "concentration_bound_weakened",
    "crofton",
    "kinematic_exact",
    "KinematicPrediction",
    "kinematic_predict",
    "a_eta",
    "product_tail_check",
]


@dataclass
class IntrinsicVolumes:
    """Intrinsic-volume sequence of a cone in R^d (length d + 1)."""

    d: int
    v: np.ndarray
    is_subspace: bool = False

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != (self.d + 1,):
            raise ValueError(f"need length-{self.d + 1} vector, got {self.v.shape}")

    def validate(self, tol: float = 1e-8) -> None:
        """Check distribution, Gauss-Bonnet, and interlacing invariants."""
        if (self.v < -tol).any():
            raise ValueError("negative intrinsic volume")
        if abs(self.v.sum() - 1.0) > tol:
            raise ValueError(f"intrinsic volumes sum to {self.v.sum()}, not 1")
        if not self.is_subspace:
            even = self.v[::2].sum()
            if abs(even - 0.5) > tol:
                raise ValueError(f"Gauss-Bonnet violated: even sum {even}")
            for k in range(self.d):
                tk = tail(self, k)
                if not (
                    2 * half_tail(self, k) >= tk - tol
                    and tk >= 2 * half_tail(self, k + 1) - tol
                ):
                    raise ValueError(f"interlacing violated at k={k}")

    def reversed(self) -> "IntrinsicVolumes":
        """Volumes of the polar cone (polarity reverses the sequence)."""
        return IntrinsicVolumes(self.d, self.v[::-1].copy(), self.is_subspace)


def ivols_subspace(j: int, d: int) -> IntrinsicVolumes:
    """Indicator sequence of a j-dimensional subspace of R^d."""
    if not 0 <= j <= d:
        raise ValueError(f"need 0 <= j <= d, got j={j}, d={d}")
    v = np.zeros(d + 1)
    v[j] = 1.0
    return IntrinsicVolumes(d, v, is_subspace=True)


def ivols_orthant(d: int) -> IntrinsicVolumes:
    """Binomial(d, 1/2) sequence of the nonnegative orthant."""
    if d < 1:
        raise ValueError("d must be >= 1")
    logb = np.array(
        [math.lgamma(d + 1) - math.lgamma(i + 1) - math.lgamma(d - i + 1) for i in range(d + 1)]
    )
    return IntrinsicVolumes(d, np.exp(logb - d * math.log(2.0)))


def _cap_mass(d: int, angle: float) -> float:
    """Fraction of the sphere S^(d-1) within angle ``angle`` of a fixed axis."""
    if angle <= 0.0:
        return 0.0
    total = quadrature(lambda b: math.sin(b) ** (d - 2), 0.0, math.pi, tol=1e-12)
    cap = quadrature(lambda b: math.sin(b) ** (d - 2), 0.0, min(angle, math.pi), tol=1e-12)
    return cap / total


def ivols_circular(d: int, alpha: float) -> IntrinsicVolumes:
    """Intrinsic volumes of the circular cone of half-angle alpha in R^d.

    Interior entries (k = 1..d-1) follow the analytic-extension binomial
    formula 0.5 * C((d-2)/2, (k-1)/2) sin^(k-1) cos^(d-k-1), evaluated by
    log-gamma; v_d is the spherical-cap mass of angle alpha and v_0 the cap
    mass of the polar angle pi/2 - alpha.  The residual mass (<= 1e-8) is
    split across v_0 and v_d.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0.0 < alpha < math.pi / 2:
        raise ValueError(f"alpha must lie strictly inside (0, pi/2), got {alpha}")
    v = np.zeros(d + 1)
    sin_a, cos_a = math.sin(alpha), math.cos(alpha)
    for k in range(1, d):
        logb = (
            math.lgamma(d / 2.0)
            - math.lgamma((k + 1) / 2.0)
            - math.lgamma((d - k + 1) / 2.0)
        )
        v[k] = 0.5 * math.exp(
            logb + (k - 1) * math.log(sin_a) + (d - k - 1) * math.log(cos_a)
        )
    v[d] = _cap_mass(d, alpha)
    v[0] = _cap_mass(d, math.pi / 2 - alpha)
    resid = 1.0 - v.sum()
    if abs(resid) > 1e-8:
        raise RuntimeError(f"circular volume completion residual {resid:.3e} too large")
    v[0] += resid / 2.0
    v[d] += resid / 2.0
    return IntrinsicVolumes(d, v)


def ivols_product(a: IntrinsicVolumes, b: IntrinsicVolumes) -> IntrinsicVolumes:
    """Volumes of a Cartesian product: discrete convolution of the factors."""
    v = np.convolve(a.v, b.v)
    return IntrinsicVolumes(a.d + b.d, v, is_subspace=a.is_subspace and b.is_subspace)


def tail(vols: IntrinsicVolumes, k: int) -> float:
    """t_k = v_k + v_{k+1} + ... + v_d."""
    if not 0 <= k <= vols.d:
        raise IndexError(f"k must lie in [0, {vols.d}], got {k}")
    return float(vols.v[k:].sum())


def half_tail(vols: IntrinsicVolumes, k: int) -> float:
    """h_k = v_k + v_{k+2} + ... (every other index)."""
    if not 0 <= k <= vols.d:
        raise IndexError(f"k must lie in [0, {vols.d}], got {k}")
    return float(vols.v[k::2].sum())


def statdim_from_ivols(vols: IntrinsicVolumes) -> float:
    """Statistical dimension as the mean of the intrinsic-volume distribution."""
    return float(np.arange(vols.d + 1) @ vols.v)


# ---------------------------------------------------------------------------
# Tropic functions and the Steiner formula
# ---------------------------------------------------------------------------


def tropic(k: int, d: int, eps: float) -> float:
    """P{||pi_L(theta)||^2 >= eps} for a k-dim subspace L and theta uniform on
    the sphere of R^d: the Beta(k/2, (d-k)/2) upper tail."""
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if k == 0:
        return 1.0 if eps == 0.0 else 0.0
    if k == d:
        return 1.0
    return 1.0 - reg_incomplete_beta(k / 2.0, (d - k) / 2.0, eps)


def steiner_rhs(vols: IntrinsicVolumes, eps: float) -> float:
    """Spherical Steiner sum: P{||pi_C(theta)||^2 >= eps} = sum_k v_k I_k^d(eps)."""
    return float(
        sum(vols.v[k] * tropic(k, vols.d, eps) for k in range(vols.d + 1))
    )


def steiner_lhs_mc(cone: ConeSpec, eps: float, samples: int, rng: RngStream):
    """Monte Carlo left side of the Steiner formula on normalized Gaussians.

    Returns (frequency, stderr).
    """
    d = ambient_dimension(cone)
    gen = rng.generator()
    G = gen.standard_normal((samples, d))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    P = project_many(cone, G)
    sq = np.einsum("ij,ij->i", P, P)
    hits = float((sq >= eps).mean())
    stderr = math.sqrt(max(hits * (1 - hits), 1e-12) / samples)
    return hits, stderr


# ---------------------------------------------------------------------------
# Concentration of the tail functionals
# ---------------------------------------------------------------------------


def concentration_bound_raw(delta: float, delta_polar: float, lam: float) -> float:
    """Unclamped tail bound 4 exp(-(lambda^2/8) / (omega^2 + lambda)) with
    omega^2 = min(delta, delta_polar)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    omega_sq = min(delta, delta_polar)
    denom = omega_sq + lam
    if denom <= 0.0:
        return 4.0 if lam == 0.0 else 0.0
    return 4.0 * math.exp(-(lam * lam / 8.0) / denom)


def concentration_bound(delta: float, delta_polar: float, lam: float) -> float:
    """Concentration tail probability, clamped into [0, 1]."""
    return min(1.0, concentration_bound_raw(delta, delta_polar, lam))


def concentration_bound_weakened(delta: float, delta_polar: float, lam: float) -> float:
    """Piecewise weakening: 4 exp(-lambda^2/(16 omega^2)) for lambda <= omega^2,
    4 exp(-lambda/16) beyond (an upper bound on the raw expression)."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    omega_sq = min(delta, delta_polar)
    if omega_sq <= 0.0:
        return 4.0 * math.exp(-lam / 16.0)
    if lam <= omega_sq:
        return 4.0 * math.exp(-(lam * lam) / (16.0 * omega_sq))
    return 4.0 * math.exp(-lam / 16.0)


# ---------------------------------------------------------------------------
# Exact and approximate kinematics
# ---------------------------------------------------------------------------


def crofton(vols: IntrinsicVolumes, m: int) -> float:
    """Exact probability that a random codimension-m subspace meets the cone:
    2 h_{m+1}.  Rejects subspaces (the formula assumes the cone is not one)."""
    if vols.is_subspace:
        raise ValueError("Crofton formula requires a cone that is not a subspace")
    if not 0 <= m <= vols.d:
        raise ValueError(f"codimension must lie in [0, {vols.d}], got {m}")
    if m == vols.d:
        return 0.0  # h_{d+1} is an empty suffix sum
    return 2.0 * half_tail(vols, m + 1)


def kinematic_exact(vols_c: IntrinsicVolumes, vols_k: IntrinsicVolumes) -> float:
    """Exact probability that a randomly rotated copy of the second cone meets
    the first: 2 h_{d+1} of the product cone."""
    if vols_c.is_subspace:
        raise ValueError("kinematic formula requires the first cone not be a subspace")
    if vols_c.d != vols_k.d:
        raise ValueError("cones must share the ambient dimension")
    prod = ivols_product(vols_c, vols_k)
    return 2.0 * half_tail(prod, vols_c.d + 1)


def a_eta(eta: float) -> float:
    """Width multiplier 4 sqrt(log(4/eta)) of the approximate kinematic bound."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    return 4.0 * math.sqrt(math.log(4.0 / eta))


@dataclass
class KinematicPrediction:
    verdict: str  # "likely_hit" | "likely_miss" | "transition_zone"
    bound: float  # clamped two-cone tail bound at the margin
    lam: float
    a_eta: float


def kinematic_predict(
    delta_c: float, delta_k: float, d: int, eta: float
) -> KinematicPrediction:
    """Approximate-kinematics verdict for two cones with known statistical
    dimensions in R^d.

    likely_miss when delta_c + delta_k <= d - a_eta sqrt(d), likely_hit when
    >= d + a_eta sqrt(d), else transition_zone.  The bound field carries the
    two-cone tail estimate p_C(lambda) + p_K(lambda) at lambda = |margin|/2,
    clamped to [0, 1].
    """
    a = a_eta(eta)
    margin = delta_c + delta_k - d
    lam = abs(margin) / 2.0
    p = concentration_bound_raw(delta_c, d - delta_c, lam) + concentration_bound_raw(
        delta_k, d - delta_k, lam
    )
    bound = min(1.0, p)
    if margin <= -a * math.sqrt(d):
        verdict = "likely_miss"
    elif margin >= a * math.sqrt(d):
        verdict = "likely_hit"
    else:
        verdict = "transition_zone"
    return KinematicPrediction(verdict=verdict, bound=bound, lam=lam, a_eta=a)


def product_tail_check(
    vols_c: IntrinsicVolumes, vols_k: IntrinsicVolumes, lam: float
) -> bool:
    """Exact check of the product-tail inequality

    t_ceil(dC + dK + 2 lam)(C x K) <= t_ceil(dC + lam)(C) + t_ceil(dK + lam)(K).
    """
    dc = statdim_from_ivols(vols_c)
    dk = statdim_from_ivols(vols_k)
    prod = ivols_product(vols_c, vols_k)

    def t_at(vols: IntrinsicVolumes, x: float) -> float:
        k = math.ceil(x)
        if k > vols.d:
            return 0.0
        return tail(vols, max(k, 0))

    lhs = t_at(prod, dc + dk + 2 * lam)
    rhs = t_at(vols_c, dc + lam) + t_at(vols_k, dk + lam)
    return lhs <= rhs + 1e-12
