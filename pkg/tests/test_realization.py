import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

import homcone as hc
from homcone import cone
from homcone.butterfly import butterfly_registry
from homcone.errors import (
    ConjugationError,
    DomainError,
    DualMembershipError,
    ShapeError,
)
from homcone.realization import (
    TriangularElement,
    VStructure,
    conjugate_space,
    delta_phi_fast,
    factor_T,
    full_sym_structure,
    log_gamma_v,
    ray_structure,
    rho_star_identity,
    validate_vstructure,
)


def registry_by_id():
    return {e.model_id: e for e in butterfly_registry()}


def random_triangular(structure, rng, block_scale=0.7):
    diag = tuple(np.exp(0.4 * rng.standard_normal(structure.r)))
    blocks = []
    for (l, k), arr in sorted(structure.subspaces.items()):
        coeffs = block_scale * rng.standard_normal(arr.shape[0])
        blocks.append(((l, k), np.einsum("a,aij->ij", coeffs, arr)))
    return TriangularElement(structure=structure, diag=diag, blocks=tuple(blocks))


# ---------------------------------------------------------------------------
# structure validation

def test_full_sym2_structure_valid():
    report = validate_vstructure(full_sym_structure(2))
    assert report.passed


def test_rank_one_product_violates_first_axiom():
    # all of the 2x1 matrices: e1 e1^T is rank one, not a multiple of I2
    subs = {(2, 1): np.array([[[1.0], [0.0]], [[0.0], [1.0]]])}
    report = validate_vstructure(VStructure([1, 2], subs))
    assert not report.passed
    assert report.violations["V1"]
    v = report.violations["V1"][0]
    assert v.where[:2] == (2, 1)
    assert v.residual > 0.5


def test_registry_structures_valid():
    for entry in butterfly_registry():
        report = validate_vstructure(entry.structure)
        assert report.passed, entry.model_id


def test_structure_rejects_non_orthonormal_basis():
    with pytest.raises(ValueError):
        VStructure([1, 1], {(2, 1): np.array([[[2.0]]])})


def test_structure_json_round_trip():
    s = registry_by_id()["G3"].structure
    clone = VStructure.from_dict(s.to_dict())
    assert clone.block_sizes == s.block_sizes
    assert clone.dim == s.dim
    for key, arr in s.subspaces.items():
        assert np.allclose(clone.subspaces[key], arr)


# ---------------------------------------------------------------------------
# gamma integral

def test_ray_gamma_matches_quadrature():
    for p in (2, 3):
        structure = ray_structure(p)
        for alpha in (0.0, 0.7, 2.0):
            value, err = quad(
                lambda t: math.sqrt(p) * math.exp(-p * t) * t ** (p * alpha),
                0.0,
                np.inf,
            )
            assert err < 1e-6 * value
            assert np.isclose(log_gamma_v(structure, alpha), math.log(value), atol=1e-7)


def test_ray_gamma_closed_form():
    for p in (2, 3, 5):
        for alpha in (0.5, 1.0):
            expected = -(p * alpha + 0.5) * math.log(p) + gammaln(p * alpha + 1.0)
            assert np.isclose(log_gamma_v(ray_structure(p), alpha), expected, atol=1e-12)


def test_gamma_rejects_negative_exponent():
    with pytest.raises(DomainError):
        log_gamma_v(full_sym_structure(2), -0.5)


# ---------------------------------------------------------------------------
# triangular factorization

def test_factor_identity():
    s = registry_by_id()["G7"].structure
    t = factor_T(s, np.eye(5))
    assert np.allclose(t.matrix(), np.eye(5), atol=1e-14)


def test_factor_full_sym2_by_hand():
    s = full_sym_structure(2)
    y = np.array([[5.0, 2.0], [2.0, 1.0]])
    t = factor_T(s, y)
    assert np.allclose(t.diag, (1.0, 1.0))
    tm = t.matrix()
    assert np.allclose(tm, np.array([[1.0, 0.0], [2.0, 1.0]]))
    assert np.allclose(tm.T @ tm, y, atol=1e-14)


def test_factor_reproduces_dual_point(dual_point):
    rng = np.random.default_rng(21)
    for entry in butterfly_registry():
        s = entry.structure
        for _ in range(5):
            a = rng.standard_normal((5, 5))
            y = s.project(a @ a.T + 0.1 * np.eye(5))
            t = factor_T(s, y)
            assert all(v > 0 for v in t.diag)
            assert np.linalg.norm(rho_star_identity(t) - y) < 1e-10


def test_factor_exam_scatter_in_realized_coordinates(models_by_id, exam_data):
    m3 = models_by_id["G3"]
    y = m3.space.project(exam_data.scatter / exam_data.n_effective)
    y_realized = m3.realization.realize_point(y)
    t = factor_T(m3.realization.structure, y_realized)
    assert np.linalg.norm(rho_star_identity(t) - y_realized) < 1e-10


def test_factor_breakdown_outside_dual():
    s = full_sym_structure(2)
    y = np.array([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DualMembershipError):
        factor_T(s, y)


def test_factor_rejects_point_outside_block_form():
    s = registry_by_id()["G7"].structure  # blocks (2,2,1), slot (2,1) is zero
    y = np.eye(5)
    y[0, 2] = y[2, 0] = 0.5  # lands in the zero slot
    with pytest.raises(DomainError):
        factor_T(s, y)


# ---------------------------------------------------------------------------
# action identities

def test_action_is_multiplicative():
    rng = np.random.default_rng(22)
    for key in ("G1", "G3", "G7"):
        s = registry_by_id()[key].structure
        t1 = random_triangular(s, rng).matrix()
        t2 = random_triangular(s, rng).matrix()
        lhs = s.rho_matrix(t1 @ t2)
        rhs = s.rho_matrix(t1) @ s.rho_matrix(t2)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_triangular_group_closed_under_product():
    rng = np.random.default_rng(23)
    for key in ("G1", "G3", "G5", "G7"):
        s = registry_by_id()[key].structure
        prod = random_triangular(s, rng).matrix() @ random_triangular(s, rng).matrix()
        for l in range(1, s.r + 1):
            for k in range(1, s.r + 1):
                block = s.block(prod, l, k)
                if l == k:
                    n = s.block_sizes[k - 1]
                    assert np.allclose(block, (np.trace(block) / n) * np.eye(n), atol=1e-12)
                elif l < k:
                    assert np.allclose(block, 0.0, atol=1e-13)
                else:
                    arr = s.subspaces.get((l, k))
                    if arr is None:
                        assert np.allclose(block, 0.0, atol=1e-13)
                    else:
                        coeffs = np.einsum("aij,ij->a", arr, block)
                        recon = np.einsum("a,aij->ij", coeffs, arr)
                        assert np.allclose(block, recon, atol=1e-12)


def test_adjoint_identity():
    rng = np.random.default_rng(24)
    for key in ("G2", "G7"):
        s = registry_by_id()[key].structure
        for _ in range(5):
            t = random_triangular(s, rng).matrix()
            x = s.from_coords(rng.standard_normal(s.dim))
            y = s.from_coords(rng.standard_normal(s.dim))
            lhs = float(np.sum((t @ x @ t.T) * y))
            rhs = float(np.sum(x * s.project(t.T @ y @ t)))
            assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# multidegree of the action determinant

EXPECTED_MULTIDEGREE = {
    "G1": (4, 4, 4, 4, 6),
    "G2": (2, 3, 4, 4, 5),
    "G3": (4, 4, 4),
    "G4": (4, 4, 2, 3, 5),
    "G5": (4, 4, 4),
    "G6": (2, 3, 2, 3, 4),
    "G7": (2, 3, 3),
}


def test_multidegree_regression_values():
    for entry in butterfly_registry():
        assert entry.structure.multidegree == EXPECTED_MULTIDEGREE[entry.model_id]


def test_multidegree_against_direct_determinant():
    rng = np.random.default_rng(25)
    for entry in butterfly_registry():
        s = entry.structure
        t_elem = random_triangular(s, rng)
        sign, logdet = np.linalg.slogdet(s.rho_matrix(t_elem.matrix()))
        assert sign > 0
        via_powers = sum(
            sig * math.log(t) for sig, t in zip(s.multidegree, t_elem.diag)
        )
        assert abs(logdet - via_powers) < 1e-10


def test_multidegree_sums_to_twice_dimension():
    for entry in butterfly_registry():
        s = entry.structure
        assert sum(s.multidegree) == 2 * s.dim


# ---------------------------------------------------------------------------
# fast functionals against the generic path

def test_delta_phi_fast_vs_numeric(models, dual_point):
    rng = np.random.default_rng(26)
    for m in models:
        for _ in range(5):
            y = dual_point(m.space, rng)
            res = cone.psi(m.space, y)
            ld = cone.log_delta(m.space, y, res)
            lp = cone.log_phi(m.space, y, res)
            ld_fast, lp_fast = m.realization.log_delta_phi(y)
            assert abs(ld - ld_fast) < 1e-8 * max(1.0, abs(ld))
            assert abs(lp - lp_fast) < 1e-8 * max(1.0, abs(lp))


def test_factor_log_det_matches_inverse_determinant(models, dual_point):
    # squared determinant of the factor equals the reciprocal determinant
    # of the primal solution
    rng = np.random.default_rng(27)
    for m in models:
        y = dual_point(m.space, rng)
        t = factor_T(m.realization.structure, m.realization.realize_point(y))
        x_star = cone.psi(m.space, y).x_star
        assert np.isclose(
            2.0 * t.log_det(), -np.linalg.slogdet(x_star)[1], rtol=0, atol=1e-8
        )


# ---------------------------------------------------------------------------
# conjugation

def test_conjugation_full_sym_identity():
    import itertools

    from homcone.graphs import Graph, PermutationGroup
    from homcone.invariant import build_invariant_space

    g = Graph.build(["a", "b", "c"], list(itertools.combinations(range(1, 4), 2)))
    space = build_invariant_space(g, PermutationGroup.trivial(3))
    real = conjugate_space(space, np.eye(3), full_sym_structure(3))
    assert np.allclose(real.basis_map @ real.basis_map.T, np.eye(space.dim), atol=1e-12)


def test_conjugation_rejects_non_orthogonal(models_by_id):
    m = models_by_id["G1"]
    with pytest.raises(ConjugationError):
        conjugate_space(m.space, 2.0 * np.eye(5), m.realization.structure)


def test_conjugation_rejects_wrong_u(models_by_id):
    m3 = models_by_id["G3"]
    u_wrong = registry_by_id()["G1"].u
    with pytest.raises(ConjugationError) as info:
        conjugate_space(m3.space, u_wrong, m3.realization.structure)
    assert info.value.basis_index is not None


def test_conjugation_shape_mismatch(models_by_id):
    m = models_by_id["G1"]
    with pytest.raises(ShapeError):
        conjugate_space(m.space, np.eye(4), m.realization.structure)


def test_trivial_group_u_is_vertex_reordering(models_by_id):
    # the first registry conjugation is a pure permutation of vertices
    rng = np.random.default_rng(28)
    m1 = models_by_id["G1"]
    u = registry_by_id()["G1"].u
    y = m1.space.project(rng.standard_normal((5, 5)) + np.eye(5) * 2)
    y = 0.5 * (y + y.T)
    order = [0, 1, 3, 4, 2]
    assert np.allclose(u.T @ y @ u, y[np.ix_(order, order)], atol=1e-14)


def test_vertex_swap_conjugation_layout(models_by_id):
    # generic element of the swap-invariant space lands in the documented
    # block layout: split eigencoordinates up front, coupled 3x3 tail block
    rng = np.random.default_rng(29)
    m2 = models_by_id["G2"]
    y = m2.space.project(rng.standard_normal((5, 5)) * 2 + np.eye(5))
    y = 0.5 * (y + y.T)
    a, b, c = y[0, 0], y[0, 1], y[0, 2]
    d, e, f = y[2, 2], y[2, 3], y[2, 4]
    g, h, i = y[3, 3], y[3, 4], y[4, 4]
    r2 = math.sqrt(2.0)
    expected = np.array(
        [
            [a - b, 0, 0, 0, 0],
            [0, a + b, 0, 0, r2 * c],
            [0, 0, g, h, e],
            [0, 0, h, i, f],
            [0, r2 * c, e, f, d],
        ]
    )
    u = registry_by_id()["G2"].u
    assert np.allclose(u.T @ y @ u, expected, atol=1e-12)


def test_hub_symmetric_conjugation_layout(models_by_id):
    rng = np.random.default_rng(30)
    m7 = models_by_id["G7"]
    y = m7.space.project(rng.standard_normal((5, 5)) * 2 + np.eye(5))
    y = 0.5 * (y + y.T)
    a, c, d = y[0, 0], y[0, 1], y[0, 2]
    b = y[2, 2]
    r2 = math.sqrt(2.0)
    expected = np.array(
        [
            [a - c, 0, 0, 0, 0],
            [0, a - c, 0, 0, 0],
            [0, 0, a + c, 0, r2 * d],
            [0, 0, 0, a + c, r2 * d],
            [0, 0, r2 * d, r2 * d, b],
        ]
    )
    u = registry_by_id()["G7"].u
    assert np.allclose(u.T @ y @ u, expected, atol=1e-12)
