"""Block matrix realizations of homogeneous cones.

A realization is a partition of the matrix size into blocks n_1..n_r plus a
family of subspaces V[l,k] of n_l x n_k matrices (1 <= k < l <= r) subject
to three closure axioms.  The realized space consists of symmetric matrices
with scalar diagonal blocks and off-diagonal blocks in the subspaces.  The
lower triangular matrices of the same shape with positive diagonal scalars
act simply transitively on the realized cone by congruence, which gives:

* a generalized Cholesky factorization of dual points (factor_T),
* closed forms for the determinant functional and its Hessian determinant
  (delta_phi_fast), and
* the gamma-type integral of the cone in closed form (log_gamma_v).

An invariant space is hooked up to a realization by an orthogonal
conjugation (conjugate_space), which is an isometry for the trace inner
product, so all functionals computed in realized coordinates agree with
their definitions on the original space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .errors import (
    ConjugationError,
    DomainError,
    DualMembershipError,
    ShapeError,
)
from .invariant import InvariantSpace

AXIOM_TOL = 1e-12
CONJUGATION_TOL = 1e-10
BASIS_GRAM_TOL = 1e-10


class VStructure:
    """Block sizes plus orthonormal bases of the off-diagonal subspaces.

    ``subspaces`` maps a pair (l, k) with 1 <= k < l <= r to a stack of
    n_l x n_k matrices that is orthonormal under (A|B) = tr(A B^T).  Pairs
    that are absent (or mapped to an empty stack) denote the zero subspace.
    """

    def __init__(self, block_sizes, subspaces=None):
        self.block_sizes = tuple(int(n) for n in block_sizes)
        if not self.block_sizes or any(n <= 0 for n in self.block_sizes):
            raise ValueError(f"block sizes must be positive: {self.block_sizes}")
        self.r = len(self.block_sizes)
        self.p = sum(self.block_sizes)
        offsets = np.concatenate([[0], np.cumsum(self.block_sizes)])
        self._start = {k: int(offsets[k - 1]) for k in range(1, self.r + 1)}
        subs: dict[tuple[int, int], np.ndarray] = {}
        for (l, k), mats in (subspaces or {}).items():
            l, k = int(l), int(k)
            if not 1 <= k < l <= self.r:
                raise ValueError(f"subspace index ({l},{k}) out of range for r={self.r}")
            arr = np.asarray(mats, dtype=float)
            if arr.ndim == 2:
                arr = arr[None, :, :]
            if arr.size == 0:
                continue
            nl, nk = self.block_sizes[l - 1], self.block_sizes[k - 1]
            if arr.shape[1:] != (nl, nk):
                raise ShapeError(
                    f"subspace ({l},{k}) basis must be {nl}x{nk}, got {arr.shape[1:]}"
                )
            gram = np.einsum("aij,bij->ab", arr, arr)
            if np.max(np.abs(gram - np.eye(arr.shape[0]))) > BASIS_GRAM_TOL:
                raise ValueError(f"subspace ({l},{k}) basis is not orthonormal")
            subs[(l, k)] = arr
        self.subspaces = subs
        self.dim = self.r + sum(a.shape[0] for a in subs.values())

    # -- layout ------------------------------------------------------------

    def block_slice(self, k: int) -> slice:
        s = self._start[k]
        return slice(s, s + self.block_sizes[k - 1])

    def block(self, x: np.ndarray, l: int, k: int) -> np.ndarray:
        return x[self.block_slice(l), self.block_slice(k)]

    def dim_of(self, l: int, k: int) -> int:
        arr = self.subspaces.get((l, k))
        return 0 if arr is None else arr.shape[0]

    def q(self, k: int) -> int:
        """Total dimension of the subspaces below diagonal block k."""
        return sum(self.dim_of(l, k) for l in range(k + 1, self.r + 1))

    def offdiag_slots(self) -> list[tuple[int, int]]:
        return sorted(self.subspaces.keys(), key=lambda lk: (lk[1], lk[0]))

    # -- orthonormal basis of the realized space ---------------------------

    @cached_property
    def basis(self) -> np.ndarray:
        mats = []
        for k in range(1, self.r + 1):
            b = np.zeros((self.p, self.p))
            sl = self.block_slice(k)
            b[sl, sl] = np.eye(self.block_sizes[k - 1]) / math.sqrt(self.block_sizes[k - 1])
            mats.append(b)
        for l, k in self.offdiag_slots():
            for a in self.subspaces[(l, k)]:
                b = np.zeros((self.p, self.p))
                b[self.block_slice(l), self.block_slice(k)] = a / math.sqrt(2.0)
                b[self.block_slice(k), self.block_slice(l)] = a.T / math.sqrt(2.0)
                mats.append(b)
        out = np.array(mats)
        out.setflags(write=False)
        return out

    def coords(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("aij,ij->a", self.basis, x)

    def from_coords(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", np.asarray(v, dtype=float), self.basis)

    def project(self, m: np.ndarray) -> np.ndarray:
        return self.from_coords(self.coords(m))

    def residual_from(self, m: np.ndarray) -> float:
        return float(np.linalg.norm(m - self.project(m)))

    def diag_coeff(self, x: np.ndarray, k: int) -> float:
        nk = self.block_sizes[k - 1]
        return float(np.trace(self.block(x, k, k))) / nk

    # -- congruence action -------------------------------------------------

    def rho_matrix(self, t_mat: np.ndarray) -> np.ndarray:
        """Matrix of x -> t x t^T on the realized space, in the orthonormal basis."""
        acted = np.einsum("ij,ajk,lk->ail", t_mat, self.basis, t_mat)
        return np.einsum("bij,aij->ba", self.basis, acted)

    @cached_property
    def multidegree(self) -> tuple[int, ...]:
        """Integer exponents of the diagonal scalars in det of the congruence action.

        Derived numerically once per structure by evaluating the action
        determinant on one-parameter diagonal elements.
        """
        sigma = []
        for k in range(1, self.r + 1):
            t = np.eye(self.p)
            sl = self.block_slice(k)
            t[sl, sl] *= 2.0
            sign, ld = np.linalg.slogdet(self.rho_matrix(t))
            value = ld / math.log(2.0)
            nearest = round(value)
            if sign <= 0 or abs(value - nearest) > 1e-9:
                raise ValueError(
                    f"action determinant is not a clean power at block {k}: {value}"
                )
            sigma.append(int(nearest))
        return tuple(sigma)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "block_sizes": list(self.block_sizes),
            "subspaces": {
                f"{l},{k}": [a.tolist() for a in arr]
                for (l, k), arr in sorted(self.subspaces.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VStructure":
        subs = {}
        for key, mats in data.get("subspaces", {}).items():
            l, k = (int(tok) for tok in key.split(","))
            subs[(l, k)] = np.asarray(mats, dtype=float)
        return cls(data["block_sizes"], subs)


def full_sym_structure(p: int) -> VStructure:
    """Canonical realization of the full symmetric cone: p scalar blocks."""
    subs = {(l, k): np.ones((1, 1, 1)) for k in range(1, p + 1) for l in range(k + 1, p + 1)}
    return VStructure([1] * p, subs)


def ray_structure(p: int) -> VStructure:
    """The ray of multiples of the identity: one block of size p."""
    return VStructure([p], {})


# ---------------------------------------------------------------------------
# axiom validation


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    where: tuple
    residual: float
    detail: str


@dataclass
class VStructureReport:
    violations: dict[str, list[AxiomViolation]]

    @property
    def passed(self) -> bool:
        return all(not v for v in self.violations.values())

    def axiom_passed(self, axiom: str) -> bool:
        return not self.violations.get(axiom)


def _span_residual(structure: VStructure, l: int, k: int, c: np.ndarray) -> float:
    arr = structure.subspaces.get((l, k))
    if arr is None:
        return float(np.linalg.norm(c))
    coeffs = np.einsum("aij,ij->a", arr, c)
    return float(np.linalg.norm(c - np.einsum("a,aij->ij", coeffs, arr)))


def validate_vstructure(structure: VStructure) -> VStructureReport:
    """Check the three closure axioms, reporting every witnessed failure."""
    report: dict[str, list[AxiomViolation]] = {"V1": [], "V2": [], "V3": []}
    r = structure.r
    for (l, k), arr in sorted(structure.subspaces.items()):
        nl = structure.block_sizes[l - 1]
        for i in range(arr.shape[0]):
            for j in range(i, arr.shape[0]):
                prod = arr[i] @ arr[j].T + arr[j] @ arr[i].T
                resid = float(
                    np.linalg.norm(prod - (np.trace(prod) / nl) * np.eye(nl))
                )
                if resid > AXIOM_TOL:
                    report["V1"].append(
                        AxiomViolation(
                            "V1",
                            (l, k, i, j),
                            resid,
                            f"symmetrized product of basis elements {i},{j} of "
                            f"V[{l},{k}] is not a multiple of the identity",
                        )
                    )
    for j in range(1, r + 1):
        for k in range(j + 1, r + 1):
            for l in range(k + 1, r + 1):
                a_lj = structure.subspaces.get((l, j))
                b_kj = structure.subspaces.get((k, j))
                if a_lj is not None and b_kj is not None:
                    for ia, a in enumerate(a_lj):
                        for ib, b in enumerate(b_kj):
                            resid = _span_residual(structure, l, k, a @ b.T)
                            if resid > AXIOM_TOL:
                                report["V2"].append(
                                    AxiomViolation(
                                        "V2",
                                        (l, k, j, ia, ib),
                                        resid,
                                        f"V[{l},{j}]#{ia} times V[{k},{j}]#{ib}^T "
                                        f"leaves V[{l},{k}]",
                                    )
                                )
                a_lk = structure.subspaces.get((l, k))
                b_kj = structure.subspaces.get((k, j))
                if a_lk is not None and b_kj is not None:
                    for ia, a in enumerate(a_lk):
                        for ib, b in enumerate(b_kj):
                            resid = _span_residual(structure, l, j, a @ b)
                            if resid > AXIOM_TOL:
                                report["V3"].append(
                                    AxiomViolation(
                                        "V3",
                                        (l, j, k, ia, ib),
                                        resid,
                                        f"V[{l},{k}]#{ia} times V[{k},{j}]#{ib} "
                                        f"leaves V[{l},{j}]",
                                    )
                                )
    return VStructureReport(violations=report)


# ---------------------------------------------------------------------------
# triangular group


@dataclass(frozen=True, eq=False)
class TriangularElement:
    """Lower triangular group element: positive diagonal scalars plus blocks."""

    structure: VStructure
    diag: tuple[float, ...]
    blocks: tuple[tuple[tuple[int, int], np.ndarray], ...]

    def matrix(self) -> np.ndarray:
        v = self.structure
        t = np.zeros((v.p, v.p))
        for k in range(1, v.r + 1):
            sl = v.block_slice(k)
            t[sl, sl] = self.diag[k - 1] * np.eye(v.block_sizes[k - 1])
        for (l, k), b in self.blocks:
            t[v.block_slice(l), v.block_slice(k)] = b
        return t

    def log_det(self) -> float:
        return float(
            sum(n * math.log(t) for n, t in zip(self.structure.block_sizes, self.diag))
        )

    def det(self) -> float:
        return math.exp(self.log_det())


def rho_star_identity(t_elem: TriangularElement) -> np.ndarray:
    """Image of the identity under the adjoint action: projection of T^T T."""
    t = t_elem.matrix()
    return t_elem.structure.project(t.T @ t)


def factor_T(structure: VStructure, y: np.ndarray) -> TriangularElement:
    """Unique triangular element with projection(T^T T) equal to the dual point y.

    Block back-substitution from the last block row upward: peel the diagonal
    scalar, divide out the off-diagonal blocks, then subtract the projected
    outer-product contributions from the remaining leading part.  A
    nonpositive pivot certifies that y is outside the open dual cone.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (structure.p, structure.p):
        raise ShapeError(f"expected {structure.p}x{structure.p}, got {y.shape}")
    if structure.residual_from(y) > CONJUGATION_TOL * max(1.0, float(np.linalg.norm(y))):
        raise DomainError("point is not in the realized space")
    r = structure.r
    d = {k: structure.diag_coeff(y, k) for k in range(1, r + 1)}
    b = {
        (l, k): structure.block(y, l, k).copy()
        for (l, k) in structure.offdiag_slots()
    }
    diag = [0.0] * r
    tblocks: dict[tuple[int, int], np.ndarray] = {}
    for k in range(r, 0, -1):
        if not d[k] > 0.0:
            raise DualMembershipError(
                f"factorization breakdown at block {k}: pivot {d[k]:.6g} <= 0"
            )
        tk = math.sqrt(d[k])
        diag[k - 1] = tk
        for j in range(1, k):
            if (k, j) in b:
                tblocks[(k, j)] = b[(k, j)] / tk
        for i in range(1, k):
            tki = tblocks.get((k, i))
            if tki is None:
                continue
            d[i] -= float(np.sum(tki * tki)) / structure.block_sizes[i - 1]
            for j in range(1, i):
                tkj = tblocks.get((k, j))
                if tkj is None or (i, j) not in b:
                    continue
                contrib = tki.T @ tkj
                arr = structure.subspaces[(i, j)]
                coeffs = np.einsum("aij,ij->a", arr, contrib)
                b[(i, j)] -= np.einsum("a,aij->ij", coeffs, arr)
    ordered = tuple(sorted(tblocks.items(), key=lambda item: (item[0][1], item[0][0])))
    return TriangularElement(structure=structure, diag=tuple(diag), blocks=ordered)


def delta_phi_fast(structure: VStructure, y: np.ndarray) -> tuple[float, float]:
    """(log delta, log phi) at a dual point of the realized cone.

    log delta is twice the log determinant of the triangular factor; log phi
    is minus the log determinant of its congruence action, a pure power of
    the diagonal scalars with the structure's multidegree.
    """
    t_elem = factor_T(structure, y)
    log_delta_value = 2.0 * t_elem.log_det()
    log_det_rho = float(
        sum(s * math.log(t) for s, t in zip(structure.multidegree, t_elem.diag))
    )
    return log_delta_value, -log_det_rho


def log_gamma_v(structure: VStructure, alpha: float) -> float:
    """Log of the gamma-type integral of the realized cone at exponent alpha."""
    if alpha < 0:
        raise DomainError(f"gamma integral needs alpha >= 0, got {alpha}")
    n_total = structure.dim
    r = structure.r
    total = 0.5 * (n_total - r) * math.log(2.0 * math.pi)
    for k in range(1, r + 1):
        nk = structure.block_sizes[k - 1]
        qk = structure.q(k)
        total += (-nk * alpha - (qk + 1) / 2.0) * math.log(nk)
        total += float(gammaln(nk * alpha + qk / 2.0 + 1.0))
    return total


# ---------------------------------------------------------------------------
# conjugation between an invariant space and a realized space


@dataclass(frozen=True, eq=False)
class Realization:
    """Orthogonal change of coordinates carrying a space onto a block form."""

    space: InvariantSpace
    u: np.ndarray
    structure: VStructure
    basis_map: np.ndarray  # (dim, dim): realized coordinates of each basis element

    def realize_point(self, y: np.ndarray) -> np.ndarray:
        return self.u.T @ y @ self.u

    def log_gamma(self, alpha: float) -> float:
        return log_gamma_v(self.structure, alpha)

    def log_delta_phi(self, y: np.ndarray) -> tuple[float, float]:
        return delta_phi_fast(self.structure, self.realize_point(y))


def conjugate_space(
    space: InvariantSpace, u: np.ndarray, structure: VStructure
) -> Realization:
    """Verify that conjugation by u maps the space onto the realized space.

    Checks orthogonality of u, membership of every conjugated basis element
    in the block form, and equality of dimensions, then returns the
    coordinate isometry.
    """
    u = np.asarray(u, dtype=float)
    p = space.p
    if u.shape != (p, p) or structure.p != p:
        raise ShapeError(
            f"conjugation size mismatch: space p={p}, u {u.shape}, "
            f"structure p={structure.p}"
        )
    ortho_resid = float(np.linalg.norm(u.T @ u - np.eye(p)))
    if ortho_resid > 1e-12:
        raise ConjugationError(f"u is not orthogonal (residual {ortho_resid:.3e})")
    rows = []
    for a, bmat in enumerate(space.basis):
        w = u.T @ bmat @ u
        resid = structure.residual_from(w)
        if resid > CONJUGATION_TOL:
            raise ConjugationError(
                f"conjugated basis element {a} leaves the block form "
                f"(residual {resid:.3e})",
                basis_index=a,
            )
        rows.append(structure.coords(w))
    if structure.dim != space.dim:
        raise ConjugationError(
            f"dimension mismatch: space has {space.dim}, block form has {structure.dim}"
        )
    basis_map = np.array(rows)
    iso_resid = float(np.linalg.norm(basis_map.T @ basis_map - np.eye(space.dim)))
    if iso_resid > CONJUGATION_TOL:  # pragma: no cover - implied by the checks above
        raise ConjugationError(f"coordinate map is not an isometry ({iso_resid:.3e})")
    return Realization(space=space, u=u, structure=structure, basis_map=basis_map)
