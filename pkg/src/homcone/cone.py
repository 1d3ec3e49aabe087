"""Generic numeric evaluation of cone maps on an invariant space.

The primal cone is the intersection of the space with the positive definite
matrices; the dual cone is the set of points with positive pairing against
the closed primal cone.  The central object is the map sending a dual point
y to the unique primal maximizer of exp(-tr(xy)) det(x), computed here by a
damped Newton iteration on the convex objective tr(xy) - log det x.  From
that map everything else follows: the determinant functional, its Hessian
in basis coordinates, and the square-root-determinant factor.

All determinant work is done in log space; the plain-value wrappers are
thin conveniences that may overflow at statistical sample sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, DualMembershipError, ShapeError
from .invariant import InvariantSpace, trace_inner

GRAD_TOL = 1e-11
MAX_ITER = 100
MEMBERSHIP_TOL = 1e-10
ARMIJO_C = 1e-4

# Optional sink for per-iteration Newton records, set by the CLI when verbose.
_trace_sink = None


def set_newton_trace(sink) -> None:
    """Install a callable receiving one dict per Newton iteration (or None)."""
    global _trace_sink
    _trace_sink = sink


@dataclass
class PsiResult:
    """Converged solution of the inverse-projection map at a dual point."""

    x_star: np.ndarray
    coords: np.ndarray
    iterations: int
    residual: float


def _cholesky_or_none(x: np.ndarray):
    try:
        return np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return None


def _logdet_from_chol(chol: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def _check_matrix(space: InvariantSpace, m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (space.p, space.p):
        raise ShapeError(f"{what} must be {space.p}x{space.p}, got {m.shape}")
    if not space.contains(m, MEMBERSHIP_TOL):
        raise DomainError(
            f"{what} is not in the invariant space "
            f"(projection residual {space.residual_from(m):.3e})"
        )
    return m


def metric_matrix(space: InvariantSpace, w: np.ndarray) -> np.ndarray:
    """Matrix of u -> projection of (w u w) in the orthonormal basis.

    With w the inverse of a primal point x this is the Hessian of
    -log det at x restricted to the space.
    """
    t = np.einsum("aij,jk->aik", space.basis, w)
    m = np.einsum("aij,bji->ab", t, t)
    return 0.5 * (m + m.T)


def psi(
    space: InvariantSpace,
    y: np.ndarray,
    *,
    grad_tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> PsiResult:
    """Solve projection(x^{-1}) = y for positive definite x in the space.

    The problem is solved on the Frobenius-normalized copy of y (the map is
    homogeneous of degree -1), with Newton steps on tr(xy) - log det x and a
    backtracking line search that enforces positive definiteness plus Armijo
    decrease.  A collapsed line search or stalled iteration certifies that y
    is outside the open dual cone.
    """
    y = _check_matrix(space, y, "dual argument")
    scale = float(np.linalg.norm(y))
    if scale == 0.0 or np.trace(y) <= 0.0:
        raise DualMembershipError("trace must be positive on the dual cone")
    p = space.p
    yn = y / scale
    x = (p / float(np.trace(yn))) * np.eye(p)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        chol = _cholesky_or_none(x)
        if chol is None:  # pragma: no cover - iterates stay definite by construction
            raise ConvergenceError("iterate lost positive definiteness")
        w = scipy.linalg.cho_solve((chol, True), np.eye(p))
        w = 0.5 * (w + w.T)
        grad = yn - space.project(w)
        grad_norm = float(np.linalg.norm(grad))
        if _trace_sink is not None:
            _trace_sink({"iteration": iterations, "gradient_norm": grad_norm})
        if grad_norm <= grad_tol:
            break
        m = metric_matrix(space, w)
        g = space.coords(grad)
        try:
            step_coords = -scipy.linalg.cho_solve(scipy.linalg.cho_factor(m), g)
        except np.linalg.LinAlgError:
            # the metric only degenerates when the iterate runs to the cone
            # boundary or to infinity, i.e. the objective has no minimizer
            raise DualMembershipError(
                "iteration diverged; point is not in the open dual cone"
            ) from None
        step = space.from_coords(step_coords)
        slope = float(g @ step_coords)
        f0 = trace_inner(x, yn) - _logdet_from_chol(chol)
        # near the optimum the predicted decrease drops below the resolution
        # of f itself; the noise floor keeps the line search from stalling
        noise = 16.0 * np.finfo(float).eps * max(1.0, abs(f0))
        t = 1.0
        while True:
            cand = x + t * step
            cand_chol = _cholesky_or_none(cand)
            if cand_chol is not None:
                f_cand = trace_inner(cand, yn) - _logdet_from_chol(cand_chol)
                if f_cand <= f0 + ARMIJO_C * t * slope + noise:
                    break
            t *= 0.5
            if t < 1e-14:
                raise DualMembershipError(
                    "line search collapsed; point is not in the open dual cone"
                )
        x = cand
    else:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations "
            f"(gradient norm {grad_norm:.3e})",
            iterations=max_iter,
            residual=grad_norm * scale,
        )
    x_star = x / scale
    x_inv = np.linalg.inv(x_star)
    residual = float(np.linalg.norm(space.project(0.5 * (x_inv + x_inv.T)) - y))
    return PsiResult(
        x_star=x_star,
        coords=space.coords(x_star),
        iterations=iterations,
        residual=residual,
    )


def log_delta(space: InvariantSpace, y: np.ndarray, psi_result: PsiResult | None = None) -> float:
    """log of the reciprocal determinant of the primal solution at y."""
    res = psi_result if psi_result is not None else psi(space, y)
    chol = _cholesky_or_none(res.x_star)
    if chol is None:  # pragma: no cover - converged solutions are definite
        raise ConvergenceError("solution is not positive definite")
    return -_logdet_from_chol(chol)


def delta(space: InvariantSpace, y: np.ndarray) -> float:
    return math.exp(log_delta(space, y))


def hessian_matrix(
    space: InvariantSpace, y: np.ndarray, psi_result: PsiResult | None = None
) -> np.ndarray:
    """Hessian of -log(delta) at y in the orthonormal basis (symmetric PD).

    Computed as the inverse of the metric matrix at the primal solution,
    which is the derivative identity obtained by differentiating
    projection(x^{-1}) = y along the map.
    """
    res = psi_result if psi_result is not None else psi(space, y)
    w = np.linalg.inv(res.x_star)
    m = metric_matrix(space, 0.5 * (w + w.T))
    s = np.linalg.inv(m)
    return 0.5 * (s + s.T)


def log_phi(space: InvariantSpace, y: np.ndarray, psi_result: PsiResult | None = None) -> float:
    """log of the square root determinant of the Hessian of -log(delta)."""
    res = psi_result if psi_result is not None else psi(space, y)
    w = np.linalg.inv(res.x_star)
    m = metric_matrix(space, 0.5 * (w + w.T))
    chol = np.linalg.cholesky(m)
    return -0.5 * _logdet_from_chol(chol)


def phi(space: InvariantSpace, y: np.ndarray) -> float:
    return math.exp(log_phi(space, y))


def in_primal_cone(space: InvariantSpace, x: np.ndarray) -> bool:
    """Membership in the open primal cone, via symmetric factorization."""
    x = _check_matrix(space, x, "primal candidate")
    return _cholesky_or_none(x) is not None


def in_dual_cone(space: InvariantSpace, y: np.ndarray) -> bool:
    """Membership in the open dual cone, certified by a converged interior solve."""
    _check_matrix(space, y, "dual candidate")
    try:
        psi(space, y)
    except (DualMembershipError, ConvergenceError):
        return False
    return True
