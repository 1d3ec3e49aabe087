"""Group-invariant symmetric matrix spaces attached to a graph.

For a graph and a subgroup of its automorphisms, the space collects the
symmetric matrices that are invariant under simultaneous row/column
permutation by every group element and vanish on non-adjacent off-diagonal
cells.  An orthonormal basis under the trace inner product tr(xy) is built
from the group orbits of diagonal cells and edge cells, which makes
projections and coordinates cheap and exactly reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvarianceError, ShapeError, UsageError
from .graphs import Graph, PermutationGroup

SPAN_TOL = 1e-10


def trace_inner(a: np.ndarray, b: np.ndarray) -> float:
    """tr(ab) for symmetric a, b."""
    return float(np.sum(a * b))


@dataclass(frozen=True, eq=False)
class InvariantSpace:
    """Invariant subspace with an orthonormal basis under the trace inner product."""

    graph: Graph
    group: PermutationGroup
    basis: np.ndarray  # (N, p, p)
    orbits: tuple[tuple[tuple[int, int], ...], ...]  # 1-based cells per basis element

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def p(self) -> int:
        return self.basis.shape[1]

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of the projection of x onto the space."""
        return np.einsum("aij,ij->a", self.basis, x)

    def from_coords(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", np.asarray(v, dtype=float), self.basis)

    def project(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.p, self.p):
            raise ShapeError(f"expected a {self.p}x{self.p} matrix, got {y.shape}")
        return self.from_coords(self.coords(y))

    def residual_from(self, y: np.ndarray) -> float:
        """Frobenius distance from y to the space."""
        return float(np.linalg.norm(y - self.project(y)))

    def contains(self, y: np.ndarray, tol: float = SPAN_TOL) -> bool:
        return self.residual_from(y) <= tol * max(1.0, float(np.linalg.norm(y)))

    def to_dict(self) -> dict:
        return {
            "basis": [b.tolist() for b in self.basis],
            "orbits": [[list(c) for c in orbit] for orbit in self.orbits],
        }


def _cell_orbits(g: Graph, group: PermutationGroup):
    cells = [(i, i) for i in range(1, g.vertex_count + 1)]
    cells += g.edge_list()
    seen: set[tuple[int, int]] = set()
    orbits = []
    for cell in cells:
        if cell in seen:
            continue
        orbit = set()
        for sigma in group.elements:
            i, j = sigma(cell[0]), sigma(cell[1])
            orbit.add((min(i, j), max(i, j)))
        seen.update(orbit)
        orbits.append(tuple(sorted(orbit)))
    orbits.sort(key=lambda orb: orb[0])
    return orbits


def build_invariant_space(g: Graph, group: PermutationGroup) -> InvariantSpace:
    """Construct the invariant space for a subgroup of the graph automorphisms."""
    p = g.vertex_count
    if group.degree != p:
        raise ShapeError(f"group degree {group.degree} != vertex count {p}")
    for sigma in group.elements:
        for i, j in g.edge_list():
            if not g.has_edge(sigma(i), sigma(j)):
                raise InvarianceError(
                    f"permutation {sigma.cycle_string()} maps edge ({i},{j}) to "
                    f"non-edge ({sigma(i)},{sigma(j)}); not an automorphism",
                    permutation=sigma,
                    edge=(i, j),
                )
    orbits = _cell_orbits(g, group)
    mats = []
    for orbit in orbits:
        b = np.zeros((p, p))
        if orbit[0][0] == orbit[0][1]:
            w = 1.0 / np.sqrt(len(orbit))
            for i, _ in orbit:
                b[i - 1, i - 1] = w
        else:
            w = 1.0 / np.sqrt(2.0 * len(orbit))
            for i, j in orbit:
                b[i - 1, j - 1] = w
                b[j - 1, i - 1] = w
        mats.append(b)
    basis = np.array(mats)
    basis.setflags(write=False)
    return InvariantSpace(graph=g, group=group, basis=basis, orbits=tuple(orbits))


def project(space: InvariantSpace, y: np.ndarray) -> np.ndarray:
    """Orthogonal projection of y onto the space under the trace inner product."""
    return space.project(y)


def same_space(z1: InvariantSpace, z2: InvariantSpace, tol: float = SPAN_TOL) -> bool:
    """True iff the two spans coincide (mutual projection residuals below tol)."""
    if z1.graph != z2.graph:
        raise UsageError("spaces live on different graphs")
    for a, b in ((z1, z2), (z2, z1)):
        for mat in a.basis:
            if b.residual_from(mat) > tol:
                return False
    return True
