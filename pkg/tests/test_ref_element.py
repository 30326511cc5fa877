"""Element-construction tests against the explicit reference-tet data."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nnelast import symtensor as st
from nnelast.errors import DegenerateTet
from nnelast.harness_cli import random_shape_regular_tet
from nnelast.ref_element import (
    MONO_PAIR_VOLUME,
    Tet,
    build_nn_tensors,
    divergence_coeffs,
    dof_matrix,
    dof_values,
    evaluate,
    geometry,
    nodal_basis,
    reduced_matrix_12,
    reference_tet,
    spanning_basis,
)

# explicit reference-element data: the four face tensors ...
T1 = np.array([[0, 0, 0], [0, 0, 1.5], [0, 1.5, 0]])
T2 = np.array([[1, 0, -0.5], [0, 0, 0], [-0.5, 0, 0]])
T3 = np.array([[0, -0.5, 0], [-0.5, 1, 0], [0, 0, 0]])
T4 = np.array([[0, 0.5, -0.5], [0.5, 0, -0.5], [-0.5, -0.5, 1]])

# ... the vectors t_ij = T_i grad(lambda_j) and t~_ij = t_ij - t_ii ...
T_VECS = {
    (1, 1): (0, -1.5, -1.5), (1, 2): (0, 0, 0), (1, 3): (0, 0, 1.5), (1, 4): (0, 1.5, 0),
    (2, 1): (-0.5, 0, 0.5), (2, 2): (1, 0, -0.5), (2, 3): (0, 0, 0), (2, 4): (-0.5, 0, 0),
    (3, 1): (0.5, -0.5, 0), (3, 2): (0, -0.5, 0), (3, 3): (-0.5, 1, 0), (3, 4): (0, 0, 0),
    (4, 1): (0, 0, 0), (4, 2): (0, 0.5, -0.5), (4, 3): (0.5, 0, -0.5), (4, 4): (-0.5, -0.5, 1),
}
TTILDE_VECS = {
    (1, 2): (0, 1.5, 1.5), (1, 3): (0, 1.5, 3), (1, 4): (0, 3, 1.5),
    (2, 1): (-1.5, 0, 1), (2, 3): (-1, 0, 0.5), (2, 4): (-1.5, 0, 0.5),
    (3, 1): (1, -1.5, 0), (3, 2): (0.5, -1.5, 0), (3, 4): (0.5, -1, 0),
    (4, 1): (0.5, 0.5, -1), (4, 2): (0.5, 1, -1.5), (4, 3): (1, 0.5, -1.5),
}

# ... and the reduced 12x12 matrix with determinant 2^-8 3^4 5^2.
REDUCED_12 = np.array([
    [0, 0, 0, 1, 0, 0, -0.5, 0, 0, -0.5, 0, 0],
    [1.5, 1.5, 3, 0, 0, 0, 1, 0, 0, -0.5, 0, 0],
    [1.5, 3, 1.5, -0.5, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, -1.5, -1, -1.5, 0, -0.5, 0, 0, -0.5, 0],
    [-1.5, 0, 0, 0, 0, 0, 0, 1, 0, 0, -0.5, 0],
    [-1.5, 0, 0, 1, 0.5, 0.5, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 1, 0, 1, 0.5, 0.5, 0, 0, -0.5],
    [0, -1.5, 0, 0, 0, 0, -1.5, -1.5, -1, 0, 0, -0.5],
    [0, -1.5, 0, 0, -0.5, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 0, 0, -0.5, 0.5, 0.5, 1],
    [0, 0, -1.5, 0, 0, 0, 0, 0, 1, 0.5, 1, 0.5],
    [0, 0, -1.5, 0, 0, -0.5, 0, 0, 0, -1, -1.5, -1.5],
])
REFERENCE_DET = 2025.0 / 256.0


@pytest.fixture(scope="module")
def ref_geom():
    return geometry(reference_tet())


@pytest.fixture(scope="module")
def random_geoms():
    rng = np.random.default_rng(42)
    return [random_shape_regular_tet(rng)[1] for _ in range(25)]


def test_reference_gradients(ref_geom):
    assert_allclose(ref_geom.grad, [[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], atol=0)


def test_reference_volume_and_edges(ref_geom):
    assert_allclose(ref_geom.volume, 1 / 6, rtol=1e-15)
    assert_allclose(ref_geom.edge_unit[1, 2], [0, 0, 1], atol=0)
    assert_allclose(ref_geom.edge_unit[2, 3], [1, 0, 0], atol=0)


def test_geometry_invariants(random_geoms):
    for g in random_geoms:
        assert_allclose(g.grad.sum(axis=0), np.zeros(3), atol=1e-12 * np.abs(g.grad).max())
        norms = np.linalg.norm(g.grad, axis=1)
        assert_allclose(g.normals, -g.grad / norms[:, None], atol=1e-14)
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(np.linalg.norm(g.edge_unit[i, j]) - 1.0) < 1e-14
                assert_allclose(g.edge_unit[i, j], g.edge_unit[j, i], atol=0)


def test_degenerate_tet_raises():
    flat = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0]])
    with pytest.raises(DegenerateTet):
        geometry(Tet(flat))


def test_nn_tensors_match_printed_values(ref_geom):
    nn = build_nn_tensors(ref_geom)
    for i, target in enumerate((T1, T2, T3, T4)):
        assert_allclose(st.to_matrix(nn[i]), target, atol=1e-12)


def test_nn_delta_property(ref_geom, random_geoms):
    for g in [ref_geom] + random_geoms:
        nn = build_nn_tensors(g)
        for i in range(4):
            for j in range(4):
                val = g.normals[j] @ st.to_matrix(nn[i]) @ g.normals[j]
                assert abs(val - (1.0 if i == j else 0.0)) < 1e-12
        for i in (4, 5):
            for j in range(4):
                assert abs(g.normals[j] @ st.to_matrix(nn[i]) @ g.normals[j]) < 1e-12


def test_t5_t6_independence(random_geoms):
    # With the symmetrized product, n3 . T_i n2 (i = 5, 6) picks up one
    # nonzero cross term each: n3.T5 n2 = (n3.e12)(e34.n2)/2 and
    # n3.T6 n2 = (n3.e24)(e13.n2)/2; the unsymmetrized expansions
    # (n3.e12)(e34.n2) vs (n3.e13)(e24.n2) separate T5 from T6, and the
    # pair is linearly independent.
    for g in random_geoms:
        nn = build_nn_tensors(g)
        n2, n3 = g.normals[1], g.normals[2]
        t5 = n3 @ st.to_matrix(nn[4]) @ n2
        expected5 = 0.5 * (n3 @ g.edge_unit[0, 1]) * (g.edge_unit[2, 3] @ n2)
        assert abs(t5 - expected5) < 1e-12
        assert abs((n3 @ g.edge_unit[0, 2]) * (g.edge_unit[1, 3] @ n2)) < 1e-12
        assert np.linalg.matrix_rank(nn[4:], tol=1e-10) == 2


def test_t5_trace_free_on_reference(ref_geom):
    nn = build_nn_tensors(ref_geom)
    assert abs(st.trace(nn[4])) < 1e-14


def test_nn_tensors_span(random_geoms):
    for g in random_geoms:
        nn = build_nn_tensors(g)
        assert np.linalg.matrix_rank(nn, tol=1e-10) == 6
        # splitting: coordinates of any constant tensor exist and are unique
        rng = np.random.default_rng(11)
        c = rng.standard_normal(6)
        coords = np.linalg.solve(nn.T, c)
        assert np.abs(nn.T @ coords - c).max() < 1e-12


def test_spanning_basis_count_and_rank(ref_geom, random_geoms):
    for g in [ref_geom] + random_geoms[:5]:
        span = spanning_basis(g)
        assert span.shape == (30, 10, 6)
        # L2 Gram matrix with exact integration has full rank
        w = st.FROBENIUS_WEIGHT
        gram = np.einsum("kmc,c,mn,lnc->kl", span, w, MONO_PAIR_VOLUME, span)
        assert np.linalg.matrix_rank(gram, tol=1e-12) == 30


def test_bubble_members_have_zero_nn_trace(ref_geom):
    # T_i l_i l_j lies in the zero normal-normal trace part
    span = spanning_basis(ref_geom)
    tri = np.array([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8],
                    [0.4, 0.4, 0.2], [0.3, 0.6, 0.1], [0.25, 0.25, 0.5]])
    for i in range(4):
        others = [j for j in range(4) if j != i]
        for k in (4, 5, 6):
            poly = span[7 * i + k]
            for face in range(4):
                fv = [j for j in range(4) if j != face]
                lam = np.zeros((6, 4))
                lam[:, fv] = tri
                pts = lam @ ref_geom.verts
                vals = evaluate(poly, ref_geom, pts)
                n = ref_geom.normals[face]
                nn_trace = st.frobenius(vals, st.sym_outer(n, n))
                assert np.abs(nn_trace).max() < 1e-12


def test_dof_matrix_invertible_reference(ref_geom):
    vmat = dof_matrix(ref_geom)
    sign, logdet = np.linalg.slogdet(vmat)
    assert sign != 0 and np.isfinite(logdet)
    assert np.isfinite(np.linalg.cond(vmat))


def test_dof_matrix_invertible_random(random_geoms):
    for g in random_geoms:
        sign, logdet = np.linalg.slogdet(dof_matrix(g))
        assert sign != 0 and np.isfinite(logdet)


def test_face_moments_of_t5_vanish(ref_geom):
    span = spanning_basis(ref_geom)
    dofs = dof_values(ref_geom, span[28])
    assert np.abs(dofs[:12]).max() < 1e-13


def test_nodal_biorthogonality(ref_geom, random_geoms):
    for g in [ref_geom] + random_geoms[:5]:
        shapes = nodal_basis(g)
        mat = np.column_stack([dof_values(g, shapes.coeffs[k]) for k in range(30)])
        assert np.abs(mat - np.eye(30)).max() < 1e-10


def test_constant_tensors_reproduced(random_geoms):
    # P0(T; S) is contained in the element space
    rng = np.random.default_rng(5)
    for g in random_geoms[:5]:
        shapes = nodal_basis(g)
        c = rng.standard_normal(6)
        poly = np.zeros((10, 6))
        poly[:4] = c
        coeffs = dof_values(g, poly)
        recon = np.einsum("k,kmc->mc", coeffs, shapes.coeffs)
        pts = np.array([[0.1, 0.2, 0.3], [0.25, 0.25, 0.25], [0.05, 0.15, 0.35]]) @ (
            g.verts[1:] - g.verts[0]
        ) + g.verts[0]
        assert np.abs(evaluate(recon, g, pts) - evaluate(poly, g, pts)).max() < 1e-10


def test_nn_trace_affine_on_faces(ref_geom, random_geoms):
    # every nodal shape has n.tau n affine on each face: values at interior
    # points match the vertex-interpolated plane
    tri = np.array([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8],
                    [0.4, 0.4, 0.2], [0.3, 0.6, 0.1], [0.25, 0.25, 0.5]])
    for g in [ref_geom] + random_geoms[:3]:
        shapes = nodal_basis(g)
        for face in range(4):
            fv = [j for j in range(4) if j != face]
            n = g.normals[face]
            nn6 = st.sym_outer(n, n)
            lam_pts = np.zeros((6, 4))
            lam_pts[:, fv] = tri
            pts = lam_pts @ g.verts
            lam_v = np.zeros((3, 4))
            lam_v[np.arange(3), fv] = 1.0
            vpts = lam_v @ g.verts
            for k in range(30):
                vals = st.frobenius(evaluate(shapes.coeffs[k], g, pts), nn6)
                vvals = st.frobenius(evaluate(shapes.coeffs[k], g, vpts), nn6)
                interp = tri @ vvals
                assert np.abs(vals - interp).max() < 1e-9


def test_t_vectors_match_printed_values(ref_geom):
    nn = build_nn_tensors(ref_geom)
    for (i, j), target in T_VECS.items():
        t = st.matvec(nn[i - 1], ref_geom.grad[j - 1])
        assert_allclose(t, target, atol=1e-12)
    for (i, j), target in TTILDE_VECS.items():
        t = st.matvec(nn[i - 1], ref_geom.grad[j - 1]) - st.matvec(nn[i - 1], ref_geom.grad[i - 1])
        assert_allclose(t, target, atol=1e-12)


def test_t_next_vanishes(ref_geom):
    nn = build_nn_tensors(ref_geom)
    for i in range(4):
        t = st.matvec(nn[i], ref_geom.grad[(i + 1) % 4])
        assert np.abs(t).max() < 1e-13


def test_reduced_matrix_matches_print(ref_geom):
    mat, det = reduced_matrix_12(ref_geom)
    assert_allclose(mat, REDUCED_12, atol=1e-12)
    assert abs(det - REFERENCE_DET) < 1e-10 * REFERENCE_DET


def test_divergence_of_constant_shape(ref_geom):
    poly = np.zeros((10, 6))
    poly[:4] = np.array([1.0, 2.0, 3.0, 0.5, -0.5, 0.25])
    assert np.abs(divergence_coeffs(poly, ref_geom)).max() < 1e-14


def test_divergence_of_linear_shape(ref_geom):
    # T1 * lambda_1 has constant divergence T1 grad(lambda_1)
    nn = build_nn_tensors(ref_geom)
    poly = np.zeros((10, 6))
    poly[0] = nn[0]
    div = divergence_coeffs(poly, ref_geom)
    expected = st.matvec(nn[0], ref_geom.grad[0])
    assert_allclose(div, np.broadcast_to(expected, (4, 3)), atol=1e-14)


def test_divergence_matches_finite_differences(random_geoms):
    rng = np.random.default_rng(9)
    from nnelast.ref_element import divergence

    for g in random_geoms[:3]:
        poly = rng.standard_normal((10, 6))
        x0 = g.verts.mean(axis=0)
        step = 1e-6 * g.h
        fd = np.zeros(3)
        for c in range(3):
            dx = np.zeros(3)
            dx[c] = step
            sp = st.to_matrix(evaluate(poly, g, x0 + dx))
            sm = st.to_matrix(evaluate(poly, g, x0 - dx))
            fd += (sp[:, c] - sm[:, c]) / (2 * step)
        assert np.abs(divergence(poly, g, x0) - fd).max() < 1e-6


def test_unisolvence_random_sweep():
    rng = np.random.default_rng(123)
    for _ in range(100):
        _, g = random_shape_regular_tet(rng)
        sign, logdet = np.linalg.slogdet(dof_matrix(g))
        assert sign != 0 and np.isfinite(logdet)
