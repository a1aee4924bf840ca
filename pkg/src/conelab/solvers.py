"""First-order solvers for the five random convex program families.

All programs are solved by operator splitting:

* basis pursuit (l1 / nuclear): ADMM alternating between projection onto the
  affine data constraint (cached QR of A^T) and a shrinkage prox
  (soft-thresholding entries / singular values), with over-relaxation and
  residual balancing of the penalty parameter;
* demixing (l1+l1 / S1+l1): ADMM alternating a shrinkage prox of the
  objective with an exact l1-ball projection of the constrained component;
* cone feasibility: projected gradient on 0.5*||Ax - b||^2 with Nesterov
  momentum, step 1/||A||_2^2, and a stall detector for the infeasible case;
* permutahedron gauge minimization: a dense LP solved with lazily generated
  top-k majorization cuts from a sorting separation oracle.

Every solver kernel is vectorized over a batch of independent instances
(leading axis); the public single-instance functions wrap a batch of one.
A recovery is declared successful when the candidate is within SUCCESS_TOL
of the planted truth in Euclidean (Frobenius) norm; solver convergence
tolerances are far tighter so the verdict is not solver noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .cones import ConeSpec, ambient_dimension, project_many

__all__ = [
    "SolverParams",
    "SolveResult",
    "ProblemInstance",
    "SUCCESS_TOL",
    "soft_threshold",
    "sv_threshold",
    "project_simplex",
    "project_l1_ball",
    "basis_pursuit_l1",
    "nuclear_bp",
    "demix_l1_l1",
    "demix_s1_l1",
    "cone_feasibility",
    "cone_unbounded_certificate",
    "permutahedron_gauge_min",
    "success_check",
    "bp_l1_batch",
    "bp_nuclear_batch",
    "demix_l1l1_batch",
    "demix_s1l1_batch",
    "cone_feasibility_batch",
]

SUCCESS_TOL = 1e-5


@dataclass(frozen=True)
class SolverParams:
    """Shared tuning knobs. Defaults follow the documented contracts."""

    rho: float = 1.0              # initial ADMM penalty; rebalanced 2x at ratio 10
    over_relaxation: float = 1.8
    tol: float = 1e-8             # ADMM residual tolerance, relative
    max_iters: int = 10_000
    feas_tol: float = 1e-6        # cone-feasibility residual tolerance, relative
    feas_max_iters: int = 20_000
    stall_window: int = 500
    stall_eps: float = 1e-10
    lp_violation_tol: float = 1e-9
    lp_max_rounds: int = 500


@dataclass
class SolveResult:
    solution: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    status: str  # "converged" | "max_iters" | "infeasible_certificate"
    success: bool
    aux: Optional[np.ndarray] = None  # second demixing component / gauge value


@dataclass
class ProblemInstance:
    """A generated random program with its planted truth.

    Construction verifies that the observation is exactly consistent with the
    ground truth under the operator.
    """

    kind: str
    operator: np.ndarray
    observation: np.ndarray
    truth: np.ndarray
    truth_secondary: Optional[np.ndarray] = None
    side: Optional[dict] = None

    def __post_init__(self):
        if self.kind in ("L1BasisPursuit", "NuclearBasisPursuit", "PermGauge"):
            resid = np.linalg.norm(self.operator @ self.truth - self.observation)
            if resid > 1e-12 * max(1.0, np.linalg.norm(self.observation)):
                raise ValueError(f"inconsistent instance: residual {resid:.2e}")
        elif self.kind in ("DemixL1L1", "DemixS1L1"):
            recon = self.truth + self.operator @ self.truth_secondary
            resid = np.linalg.norm(recon - self.observation)
            if resid > 1e-12 * max(1.0, np.linalg.norm(self.observation)):
                raise ValueError(f"inconsistent instance: residual {resid:.2e}")


# ---------------------------------------------------------------------------
# Proximal building blocks
# ---------------------------------------------------------------------------


def soft_threshold(v: np.ndarray, t) -> np.ndarray:
    """Entrywise shrinkage by t (t may broadcast over the batch axis)."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def sv_threshold(M: np.ndarray, t) -> np.ndarray:
    """Singular-value shrinkage of a (batch of) matrices."""
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - np.asarray(t)[..., None], 0.0)
    return (U * s[..., None, :]) @ Vt


def project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Row-wise projection onto {u >= 0, sum(u) = radius} (sorted waterfilling)."""
    v = np.atleast_2d(v)
    n = v.shape[-1]
    u = np.sort(v, axis=-1)[:, ::-1]
    cssv = np.cumsum(u, axis=-1) - radius
    k = np.arange(1, n + 1)
    active = (u - cssv / k > 0).sum(axis=-1)
    theta = cssv[np.arange(len(v)), active - 1] / active
    return np.maximum(v - theta[:, None], 0.0)


def project_l1_ball(v: np.ndarray, radius) -> np.ndarray:
    """Row-wise projection onto the l1 ball of the given radius.

    radius may be a scalar or a per-row vector; rows already inside the ball
    are returned unchanged.
    """
    v = np.atleast_2d(v)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (v.shape[0],))
    if (radius < 0).any():
        raise ValueError("l1-ball radius must be nonnegative")
    a = np.abs(v)
    out = v.copy()
    out[radius == 0] = 0.0
    outside = (a.sum(axis=-1) > radius) & (radius > 0)
    if outside.any():
        idx = np.where(outside)[0]
        u = np.sort(a[idx], axis=-1)[:, ::-1]
        cssv = np.cumsum(u, axis=-1) - radius[idx, None]
        k = np.arange(1, v.shape[-1] + 1)
        active = (u - cssv / k > 0).sum(axis=-1)
        theta = cssv[np.arange(len(idx)), active - 1] / active
        out[idx] = np.sign(v[idx]) * np.maximum(a[idx] - theta[:, None], 0.0)
    return out


# ---------------------------------------------------------------------------
# Affine-constrained ADMM core (basis pursuit, l1 and nuclear)
# ---------------------------------------------------------------------------


class _AffineProjector:
    """Batched projector onto {x: A_r x = z_r} via QR of A^T (stable)."""

    def __init__(self, As: np.ndarray, z0s: np.ndarray):
        R, m, d = As.shape
        if m > d:
            raise ValueError(f"expected m <= d, got A of shape {m} x {d}")
        Q, Rm = np.linalg.qr(np.swapaxes(As, 1, 2))  # A^T = Q Rm
        diag = np.abs(np.diagonal(Rm, axis1=1, axis2=2))
        if (diag.min(axis=1) <= 1e-12 * diag.max(axis=1)).any():
            raise np.linalg.LinAlgError("rank-deficient measurement matrix")
        self.Q = Q  # (R, d, m)
        rhs = np.linalg.solve(np.swapaxes(Rm, 1, 2), z0s[..., None])
        self.x_particular = (Q @ rhs)[..., 0]  # min-norm solution

    def __call__(self, v: np.ndarray) -> np.ndarray:
        w = v - self.x_particular
        coeff = np.einsum("rdm,rd->rm", self.Q, w)
        return v - np.einsum("rdm,rm->rd", self.Q, coeff)


def _admm_bp(As, z0s, prox, params: SolverParams):
    """Shared ADMM loop: min g(x) s.t. Ax = z0, with prox the shrinkage of g.

    Returns (solutions, iterations, primal, dual, converged) arrays over the
    batch.  Solutions are snapshotted at first convergence (affine-feasible
    iterate), so they satisfy the data constraint to machine precision.
    """
    R, m, d = As.shape
    proj = _AffineProjector(As, z0s)
    alpha = params.over_relaxation
    rho = np.full(R, params.rho)
    scale = np.maximum(1.0, np.linalg.norm(z0s, axis=1))
    z = proj.x_particular.copy()
    u = np.zeros((R, d))
    sols = z.copy()
    iters = np.zeros(R, dtype=int)
    prim = np.full(R, np.inf)
    dual = np.full(R, np.inf)
    done = np.zeros(R, dtype=bool)
    for it in range(1, params.max_iters + 1):
        x = proj(z - u)
        xr = alpha * x + (1.0 - alpha) * z
        z_old = z
        z = prox(xr + u, 1.0 / rho)
        u = u + xr - z
        r = np.linalg.norm(x - z, axis=1)
        s = rho * np.linalg.norm(z - z_old, axis=1)
        newly = (~done) & (r <= params.tol * scale) & (s <= params.tol * scale)
        if newly.any():
            sols[newly] = x[newly]
            iters[newly] = it
            prim[newly] = r[newly]
            dual[newly] = s[newly]
            done |= newly
            if done.all():
                break
        live = ~done
        up = live & (r > 10.0 * s)
        dn = live & (s > 10.0 * r)
        rho[up] *= 2.0
        u[up] /= 2.0
        rho[dn] /= 2.0
        u[dn] *= 2.0
    if not done.all():
        live = ~done
        sols[live] = x[live]
        iters[live] = params.max_iters
        prim[live] = r[live]
        dual[live] = s[live]
    return sols, iters, prim, dual, done


def bp_l1_batch(As, z0s, params: SolverParams = SolverParams()):
    """Batched l1 basis pursuit: min ||x||_1 s.t. Ax = z0."""
    return _admm_bp(As, z0s, lambda v, t: soft_threshold(v, t[:, None]), params)


def bp_nuclear_batch(As, z0s, rows: int, cols: int, params: SolverParams = SolverParams()):
    """Batched nuclear-norm basis pursuit over vectorized (rows x cols) matrices."""

    def prox(v, t):
        M = v.reshape(v.shape[0], rows, cols)
        return sv_threshold(M, t).reshape(v.shape[0], rows * cols)

    return _admm_bp(As, z0s, prox, params)


def _wrap_single(batch_result, truth=None, tol=SUCCESS_TOL, aux=None):
    sols, iters, prim, dual, done = batch_result
    status = "converged" if done[0] else "max_iters"
    success = bool(done[0]) and (
        truth is not None and success_check(sols[0], truth, tol)
    )
    return SolveResult(
        solution=sols[0],
        iterations=int(iters[0]),
        primal_residual=float(prim[0]),
        dual_residual=float(dual[0]),
        status=status,
        success=success,
        aux=aux,
    )


def basis_pursuit_l1(
    A: np.ndarray,
    z0: np.ndarray,
    params: SolverParams = SolverParams(),
    truth: Optional[np.ndarray] = None,
) -> SolveResult:
    """min ||x||_1 subject to A x = z0 (A is m x d Gaussian, m <= d)."""
    res = bp_l1_batch(A[None], z0[None], params)
    return _wrap_single(res, truth)


def nuclear_bp(
    A: np.ndarray,
    z0: np.ndarray,
    rows: int,
    cols: int,
    params: SolverParams = SolverParams(),
    truth: Optional[np.ndarray] = None,
) -> SolveResult:
    """min ||X||_S1 subject to A vec(X) = z0; the solution is vectorized."""
    res = bp_nuclear_batch(A[None], z0[None], rows, cols, params)
    truth_vec = truth.ravel() if truth is not None else None
    return _wrap_single(res, truth_vec)


# ---------------------------------------------------------------------------
# Demixing (constrained form)
# ---------------------------------------------------------------------------


def _admm_demix(Us, z0s, bounds, prox_obj, params: SolverParams):
    """min g(z0 - U y) s.t. ||y||_1 <= bound, batched over instances.

    prox_obj is the shrinkage of g (entrywise soft-threshold for l1,
    singular-value threshold for S1 on vectorized matrices).
    Returns (x_hats, y_hats, iterations, primal, dual, converged).
    """
    R, D, _ = Us.shape
    alpha = params.over_relaxation
    rho = np.full(R, params.rho)
    scale = np.maximum(1.0, np.linalg.norm(z0s, axis=1))
    w = z0s.copy()
    y = np.zeros((R, D))
    u = np.zeros((R, D))
    ys = y.copy()
    iters = np.zeros(R, dtype=int)
    prim = np.full(R, np.inf)
    dual = np.full(R, np.inf)
    done = np.zeros(R, dtype=bool)
    Uy = np.zeros((R, D))
    for it in range(1, params.max_iters + 1):
        target = np.einsum("rij,ri->rj", Us, z0s - w - u)  # U^T (...)
        y = project_l1_ball(target, bounds)
        Uy = np.einsum("rij,rj->ri", Us, y)
        h = alpha * Uy + (1.0 - alpha) * (z0s - w)  # over-relaxed mixing term
        w_old = w
        w = prox_obj(z0s - h - u, 1.0 / rho)
        u = u + w + h - z0s
        r = np.linalg.norm(w + Uy - z0s, axis=1)
        s = rho * np.linalg.norm(w - w_old, axis=1)
        newly = (~done) & (r <= params.tol * scale) & (s <= params.tol * scale)
        if newly.any():
            ys[newly] = y[newly]
            iters[newly] = it
            prim[newly] = r[newly]
            dual[newly] = s[newly]
            done |= newly
            if done.all():
                break
        live = ~done
        up = live & (r > 10.0 * s)
        dn = live & (s > 10.0 * r)
        rho[up] *= 2.0
        u[up] /= 2.0
        rho[dn] /= 2.0
        u[dn] *= 2.0
    if not done.all():
        live = ~done
        ys[live] = y[live]
        iters[live] = params.max_iters
        prim[live] = r[live]
        dual[live] = s[live]
    x_hats = z0s - np.einsum("rij,rj->ri", Us, ys)
    return x_hats, ys, iters, prim, dual, done


def demix_l1l1_batch(Us, z0s, bounds, params: SolverParams = SolverParams()):
    """Batched sparse+sparse demixing: min ||z0 - Uy||_1 s.t. ||y||_1 <= bound."""
    return _admm_demix(
        Us, z0s, bounds, lambda v, t: soft_threshold(v, t[:, None]), params
    )


def demix_s1l1_batch(Us, z0s, bounds, rows: int, cols: int, params: SolverParams = SolverParams()):
    """Batched low-rank+sparse demixing on vectorized (rows x cols) matrices."""

    def prox(v, t):
        M = v.reshape(v.shape[0], rows, cols)
        return sv_threshold(M, t).reshape(v.shape[0], rows * cols)

    return _admm_demix(Us, z0s, bounds, prox, params)


def _wrap_demix(batch_result, truth_x, truth_y, tol=SUCCESS_TOL):
    xh, yh, iters, prim, dual, done = batch_result
    status = "converged" if done[0] else "max_iters"
    success = (
        bool(done[0])
        and truth_x is not None
        and success_check(xh[0], truth_x, tol)
        and success_check(yh[0], truth_y, tol)
    )
    return SolveResult(
        solution=xh[0],
        iterations=int(iters[0]),
        primal_residual=float(prim[0]),
        dual_residual=float(dual[0]),
        status=status,
        success=success,
        aux=yh[0],
    )


def demix_l1_l1(
    U: np.ndarray,
    z0: np.ndarray,
    bound: float,
    params: SolverParams = SolverParams(),
    truth_x: Optional[np.ndarray] = None,
    truth_y: Optional[np.ndarray] = None,
) -> SolveResult:
    """Morphological component separation: recover (x, y) from z0 = x + U y
    with both pieces sparse; the l1 bound is the side information g(y0)."""
    res = demix_l1l1_batch(U[None], z0[None], np.array([bound]), params)
    return _wrap_demix(res, truth_x, truth_y)


def demix_s1_l1(
    U: np.ndarray,
    z0: np.ndarray,
    bound: float,
    rows: int,
    cols: int,
    params: SolverParams = SolverParams(),
    truth_x: Optional[np.ndarray] = None,
    truth_y: Optional[np.ndarray] = None,
) -> SolveResult:
    """Rank-sparsity decomposition: min ||Z0 - U(Y)||_S1 s.t. ||Y||_1 <= bound.

    All matrices are vectorized; U acts on the vectorized space.
    """
    res = demix_s1l1_batch(U[None], z0[None], np.array([bound]), rows, cols, params)
    return _wrap_demix(res, truth_x, truth_y)


# ---------------------------------------------------------------------------
# Cone feasibility (projected gradient with momentum)
# ---------------------------------------------------------------------------


def cone_feasibility_batch(As, bs, cone: ConeSpec, params: SolverParams = SolverParams()):
    """Batched feasibility of {x in C: Ax = b} by accelerated projected
    gradient on 0.5*||Ax - b||^2 with step 1/||A||_2^2.

    Returns (feasible, iterations, rel_residual, stalled) arrays.  An
    instance is feasible when the relative residual reaches feas_tol;
    it earns an infeasibility certificate when its best residual stops
    improving (relative progress < stall_eps over stall_window iterations)
    above the threshold.
    """
    R, m, d = As.shape
    if ambient_dimension(cone) != d:
        raise ValueError("cone dimension does not match the constraint matrix")
    sigma = np.linalg.svd(As, compute_uv=False)[:, 0]
    steps = 1.0 / sigma**2
    bn = np.linalg.norm(bs, axis=1)
    x = np.zeros((R, d))
    yv = x.copy()
    t_mom = 1.0
    feasible = np.zeros(R, dtype=bool)
    stalled = np.zeros(R, dtype=bool)
    iters = np.zeros(R, dtype=int)
    relres = np.full(R, np.inf)
    best = np.full(R, np.inf)
    window_best = np.full(R, np.inf)  # best residual as of one window ago
    for it in range(1, params.feas_max_iters + 1):
        res = np.einsum("rmd,rd->rm", As, x) - bs
        rn = np.linalg.norm(res, axis=1)
        rel = rn / bn
        live = ~(feasible | stalled)
        hit = live & (rel <= params.feas_tol)
        if hit.any():
            feasible |= hit
            iters[hit] = it
            relres[hit] = rel[hit]
        best = np.minimum(best, rn)
        if it % params.stall_window == 0:
            live = ~(feasible | stalled)
            no_progress = live & (window_best - best < params.stall_eps * window_best)
            if no_progress.any():
                stalled |= no_progress
                iters[no_progress] = it
                relres[no_progress] = rel[no_progress]
            window_best = best.copy()
        if (feasible | stalled).all():
            break
        grad = np.einsum("rmd,rm->rd", As, np.einsum("rmd,rd->rm", As, yv) - bs)
        x_new = project_many(cone, yv - steps[:, None] * grad)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        yv = x_new + ((t_mom - 1.0) / t_new) * (x_new - x)
        x, t_mom = x_new, t_new
    open_ = ~(feasible | stalled)
    iters[open_] = params.feas_max_iters
    relres[open_] = rel[open_]
    return feasible, iters, relres, stalled


def cone_feasibility(
    A: np.ndarray, b: np.ndarray, cone: ConeSpec, params: SolverParams = SolverParams()
) -> SolveResult:
    """Feasibility verdict for the random cone program constraint set."""
    if not np.any(b):
        raise ValueError("b must be nonzero")
    feasible, iters, relres, stalled = cone_feasibility_batch(A[None], b[None], cone, params)
    if feasible[0]:
        status = "converged"
    elif stalled[0]:
        status = "infeasible_certificate"
    else:
        status = "max_iters"
    return SolveResult(
        solution=np.zeros(A.shape[1]),
        iterations=int(iters[0]),
        primal_residual=float(relres[0]),
        dual_residual=0.0,
        status=status,
        success=bool(feasible[0]),
    )


def cone_unbounded_certificate(
    A: np.ndarray, u: np.ndarray, cone: ConeSpec, params: SolverParams = SolverParams()
) -> bool:
    """Feasibility of the recession system {x in C, Ax = 0, <u, x> <= -1},
    which certifies unboundedness of the cone program.

    Solved by the same accelerated projected scheme on the smooth penalty
    0.5*||Ax||^2 + 0.5*pos(<u, x> + 1)^2.
    """
    d = A.shape[1]
    op_norm = np.linalg.svd(A, compute_uv=False)[0]
    L = op_norm**2 + float(u @ u)
    step = 1.0 / max(L, 1e-12)
    x = np.zeros(d)
    y = x.copy()
    t_mom = 1.0
    for _ in range(params.feas_max_iters):
        Ax = A @ x
        slack = max(0.0, float(u @ x) + 1.0)
        if np.linalg.norm(Ax) <= params.feas_tol and slack <= params.feas_tol:
            return True
        g = A.T @ (A @ y) + max(0.0, float(u @ y) + 1.0) * u
        x_new = project_many(cone, (y - step * g)[None])[0]
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = x_new + ((t_mom - 1.0) / t_new) * (x_new - x)
        x, t_mom = x_new, t_new
    return False


# ---------------------------------------------------------------------------
# Permutahedron gauge minimization (LP with lazy majorization cuts)
# ---------------------------------------------------------------------------


def permutahedron_gauge_min(
    y0: np.ndarray,
    A: np.ndarray,
    z0: np.ndarray,
    params: SolverParams = SolverParams(),
    truth: Optional[np.ndarray] = None,
) -> SolveResult:
    """min t s.t. Ax = z0 and x in t * P(y0), via majorization constraints.

    Membership x in t*P(y0) is equivalent to sum(x) = t*sum(y0) plus, for
    every k < d, (sum of the k largest entries of x) <= t * (sum of the k
    largest entries of y0).  The exponentially many top-k constraints are
    generated lazily: each round sorts the current x and adds every violated
    top-k inequality (at most d cuts), stopping when no violation exceeds
    lp_violation_tol.
    """
    y0 = np.asarray(y0, dtype=float)
    d = y0.size
    if len(np.unique(y0)) != d:
        raise ValueError("generator must have distinct entries")
    if abs(y0.sum()) < 1e-12:
        raise ValueError("generator must have nonzero sum")
    gk = np.cumsum(np.sort(y0)[::-1])  # top-k sums of the generator
    m = A.shape[0]
    c = np.zeros(d + 1)
    c[d] = 1.0
    A_eq = np.zeros((m + 1, d + 1))
    A_eq[:m, :d] = A
    A_eq[m, :d] = 1.0
    A_eq[m, d] = -gk[-1]
    b_eq = np.concatenate([z0, [0.0]])
    bounds = [(None, None)] * d + [(0.0, None)]
    cuts: list[np.ndarray] = []
    x = np.zeros(d)
    t_val = 0.0
    rounds = 0
    for rounds in range(1, params.lp_max_rounds + 1):
        if cuts:
            res = linprog(
                c,
                A_ub=np.asarray(cuts),
                b_ub=np.zeros(len(cuts)),
                A_eq=A_eq,
                b_eq=b_eq,
                bounds=bounds,
                method="highs",
            )
        else:
            res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if res.status != 0:
            return SolveResult(
                solution=np.zeros(d),
                iterations=rounds,
                primal_residual=math.inf,
                dual_residual=math.inf,
                status="infeasible_certificate",
                success=False,
            )
        x, t_val = res.x[:d], res.x[d]
        order = np.argsort(x)[::-1]
        topk = np.cumsum(x[order])
        violation = topk[: d - 1] - t_val * gk[: d - 1]
        bad = np.where(violation > params.lp_violation_tol)[0]
        if bad.size == 0:
            break
        for k in bad:  # one cut per violated prefix, <= d per round
            row = np.zeros(d + 1)
            row[order[: k + 1]] = 1.0
            row[d] = -gk[k]
            cuts.append(row)
    else:
        return SolveResult(
            solution=x,
            iterations=params.lp_max_rounds,
            primal_residual=float(np.max(violation)),
            dual_residual=0.0,
            status="max_iters",
            success=False,
        )
    success = truth is not None and success_check(x, truth)
    return SolveResult(
        solution=x,
        iterations=rounds,
        primal_residual=float(np.linalg.norm(A @ x - z0)),
        dual_residual=0.0,
        status="converged",
        success=bool(success),
        aux=np.array([t_val]),
    )


# ---------------------------------------------------------------------------
# Success verdict
# ---------------------------------------------------------------------------


def success_check(candidate: np.ndarray, truth: np.ndarray, tol: float = SUCCESS_TOL) -> bool:
    """Euclidean (Frobenius) recovery test at the success tolerance."""
    candidate = np.asarray(candidate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if candidate.shape != truth.shape:
        raise ValueError(
            f"shape mismatch: candidate {candidate.shape} vs truth {truth.shape}"
        )
    return bool(np.linalg.norm(candidate - truth) <= tol)
