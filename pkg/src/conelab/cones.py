"""Symbolic cone taxonomy with exact Euclidean projections.

Every cone is a small frozen spec object; projections are closed-form and
vectorized.  Supported variants:

* ``Subspace``   -- linear subspace, stored as an orthonormal basis
* ``Orthant``    -- nonnegative orthant in R^d
* ``SecondOrder``-- {x in R^d : ||x_2..d|| <= x_1} (axis-first convention)
* ``Circular``   -- {x in R^d : x_1 >= ||x|| cos(alpha)}, alpha in [0, pi/2]
* ``PsdSym``     -- positive-semidefinite matrices over the n(n+1)/2-dim
                    space of symmetric matrices, isometrically embedded
                    (off-diagonals scaled by sqrt(2) so the Euclidean norm
                    equals the Frobenius norm)
* ``Product``    -- Cartesian product, projected blockwise
* ``PolarOf``    -- polar cone, projected via the Moreau identity
                    pi_polar(x) = x - pi_C(x)

The decomposition x = projected + polar_part is orthogonal, which yields the
Pythagorean identity dist(x, C)^2 + dist(x, C_polar)^2 = ||x||^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

__all__ = [
    "Subspace",
    "Orthant",
    "SecondOrder",
    "Circular",
    "PsdSym",
    "Product",
    "PolarOf",
    "ConeSpec",
    "ProjectionResult",
    "ambient_dimension",
    "project",
    "project_many",
    "dist_to_cone",
    "circular_subspace_hit",
    "sym_to_vec",
    "vec_to_sym",
]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace given by an orthonormal basis (d x k)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.ndim != 2 or b.shape[0] < b.shape[1]:
            raise ValueError("basis must be a d x k matrix with k <= d")
        q, _ = np.linalg.qr(b)
        object.__setattr__(self, "basis", q[:, : b.shape[1]])

    @classmethod
    def canonical(cls, dim: int, ambient: int) -> "Subspace":
        """Span of the first ``dim`` coordinate axes of R^ambient."""
        if not 0 <= dim <= ambient:
            raise ValueError(f"need 0 <= dim <= ambient, got {dim}, {ambient}")
        if dim == 0:
            # zero subspace: keep an explicit empty basis
            return cls(basis=np.zeros((ambient, 0)))
        return cls(basis=np.eye(ambient)[:, :dim])

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class Orthant:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("orthant dimension must be >= 1")


@dataclass(frozen=True)
class SecondOrder:
    """Second-order (Lorentz) cone in R^d, axis along the first coordinate."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("second-order cone needs ambient dimension >= 2")


@dataclass(frozen=True)
class Circular:
    """Circular cone of half-angle ``alpha`` about the first coordinate axis."""

    d: int
    alpha: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("circular cone needs ambient dimension >= 2")
        if not 0.0 <= self.alpha <= math.pi / 2:
            raise ValueError(f"alpha must lie in [0, pi/2], got {self.alpha}")


@dataclass(frozen=True)
class PsdSym:
    """PSD cone over n x n symmetric matrices in the scaled-triangle embedding."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("matrix order must be >= 1")


@dataclass(frozen=True)
class Product:
    factors: Tuple["ConeSpec", ...]

    def __init__(self, *factors):
        if len(factors) == 1 and isinstance(factors[0], (tuple, list)):
            factors = tuple(factors[0])
        if not factors:
            raise ValueError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(factors))


@dataclass(frozen=True)
class PolarOf:
    cone: "ConeSpec"


ConeSpec = Union[Subspace, Orthant, SecondOrder, Circular, PsdSym, Product, PolarOf]


@dataclass
class ProjectionResult:
    projected: np.ndarray
    polar_part: np.ndarray
    squared_norm: float


# ---------------------------------------------------------------------------
# Symmetric-matrix embedding
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)


def _triu_indices(n: int):
    return np.triu_indices(n)


def sym_to_vec(M: np.ndarray) -> np.ndarray:
    """Isometric embedding of symmetric matrices: norm equals Frobenius norm."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    i, j = _triu_indices(n)
    v = M[..., i, j].copy()
    v[..., i != j] *= _SQRT2
    return v


def vec_to_sym(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`sym_to_vec`."""
    v = np.asarray(v, dtype=float)
    i, j = _triu_indices(n)
    off = i != j
    w = v.copy()
    w[..., off] /= _SQRT2
    M = np.zeros(v.shape[:-1] + (n, n))
    M[..., i, j] = w
    M[..., j, i] = w
    return M


# ---------------------------------------------------------------------------
# Dimensions and projections
# ---------------------------------------------------------------------------


def ambient_dimension(cone: ConeSpec) -> int:
    match cone:
        case Subspace():
            return cone.basis.shape[0]
        case Orthant(d=d) | SecondOrder(d=d) | Circular(d=d):
            return d
        case PsdSym(n=n):
            return n * (n + 1) // 2
        case Product(factors=fs):
            return sum(ambient_dimension(f) for f in fs)
        case PolarOf(cone=inner):
            return ambient_dimension(inner)
    raise TypeError(f"unknown cone spec {cone!r}")


def _project_circular(X: np.ndarray, alpha: float) -> np.ndarray:
    """Three-case circular projection on rows of X (inside / polar / boundary)."""
    t = X[:, 0]
    z = X[:, 1:]
    r = np.linalg.norm(z, axis=1)
    beta = np.arctan2(r, t)  # angle from the axis, in [0, pi]
    out = X.copy()
    polar = beta >= alpha + math.pi / 2  # ties resolve to zero
    inside = beta <= alpha
    mid = ~inside & ~polar
    out[polar] = 0.0
    if mid.any():
        a = t[mid] * math.cos(alpha) + r[mid] * math.sin(alpha)
        out[mid, 0] = a * math.cos(alpha)
        rr = r[mid]
        safe = np.where(rr > 0, rr, 1.0)
        out[mid, 1:] = (a * math.sin(alpha) / safe)[:, None] * z[mid]
    return out


def project_many(cone: ConeSpec, X: np.ndarray) -> np.ndarray:
    """Project each row of X onto the cone.  X has shape (N, ambient_dim)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = ambient_dimension(cone)
    if X.shape[1] != d:
        raise ValueError(f"dimension mismatch: cone lives in R^{d}, x in R^{X.shape[1]}")
    match cone:
        case Subspace(basis=B):
            if B.shape[1] == 0:
                return np.zeros_like(X)
            return (X @ B) @ B.T
        case Orthant():
            return np.maximum(X, 0.0)
        case SecondOrder():
            return _project_circular(X, math.pi / 4)
        case Circular(alpha=alpha):
            return _project_circular(X, alpha)
        case PsdSym(n=n):
            M = vec_to_sym(X, n)
            w, V = np.linalg.eigh(M)
            w = np.maximum(w, 0.0)
            Mp = (V * w[..., None, :]) @ np.swapaxes(V, -1, -2)
            return sym_to_vec(Mp)
        case Product(factors=fs):
            parts = []
            k = 0
            for f in fs:
                df = ambient_dimension(f)
                parts.append(project_many(f, X[:, k : k + df]))
                k += df
            return np.concatenate(parts, axis=1)
        case PolarOf(cone=inner):
            return X - project_many(inner, X)
    raise TypeError(f"unknown cone spec {cone!r}")


def project(cone: ConeSpec, x: np.ndarray) -> ProjectionResult:
    """Euclidean projection of a single vector, with its Moreau complement."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("project expects a single vector; use project_many for batches")
    p = project_many(cone, x[None, :])[0]
    return ProjectionResult(
        projected=p, polar_part=x - p, squared_norm=float(p @ p)
    )


def dist_to_cone(cone: ConeSpec, x: np.ndarray) -> float:
    """Euclidean distance from x to the cone, i.e. the polar part's norm."""
    return float(np.linalg.norm(project(cone, x).polar_part))


def circular_subspace_hit(alpha: float, L: np.ndarray, d: int) -> bool:
    """Exact test whether Circular(d, alpha) meets the column span of L
    beyond the origin.

    The circular cone touches the subspace iff the subspace contains a unit
    vector within angle alpha of the axis, i.e. iff ||pi_L(e_1)|| >= cos(alpha).
    Boundary contact counts as a hit.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != d:
        raise ValueError(f"basis must be {d} x k")
    if L.shape[1] == 0:
        return False
    gram_err = np.abs(L.T @ L - np.eye(L.shape[1])).max()
    if gram_err > 1e-8:
        raise ValueError(f"basis columns are not orthonormal (error {gram_err:.2e})")
    proj_norm = float(np.linalg.norm(L[0, :]))  # ||L^T e_1||
    return proj_norm >= math.cos(alpha)
