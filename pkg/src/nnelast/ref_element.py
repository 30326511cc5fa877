"""The 30-DOF symmetric-stress element on a tetrahedron.

The local space is spanned by quadratic polynomials multiplying four rank-one
"normal-normal" tensors T1..T4 (one per face, with n_j . T_i n_j = delta_ij)
plus two constant tensors T5, T6 whose normal-normal face traces vanish.
Degrees of freedom are 12 face moments of n.tau n against the face-vertex
Lagrange functions, 6 volume moments against the canonical symmetric-tensor
basis, and 12 moments of div tau against P1 vector fields.

Polynomials are stored as coefficient arrays of shape (10, 6): 10 barycentric
monomials (l1..l4 and the six pairwise products) times 6 symmetric-tensor
components.  All moments reduce to closed-form barycentric integrals, so the
element is built without quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import symtensor as st
from .errors import DegenerateTet, SingularDofMatrix

#: Pairwise monomial index pairs; monomial m is l_m for m < 4 and
#: l_a * l_b with (a, b) = MONO_PAIRS[m - 4] for m >= 4.
MONO_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

_PAIR_INDEX = {p: 4 + k for k, p in enumerate(MONO_PAIRS)}
_PAIR_INDEX.update({(b, a): 4 + k for k, (a, b) in enumerate(MONO_PAIRS)})


def monomial_exponents(m):
    """Exponent 4-tuple of monomial m."""
    e = [0, 0, 0, 0]
    if m < 4:
        e[m] = 1
    else:
        a, b = MONO_PAIRS[m - 4]
        e[a] += 1
        e[b] += 1
    return tuple(e)


def _simplex_int(exps, dim):
    num = 1
    for a in exps:
        num *= factorial(a)
    return num * factorial(dim) / factorial(sum(exps) + dim)


def _build_tables():
    # volume integrals of monomials and of monomial pairs (unit |T|)
    vol = np.array([_simplex_int(monomial_exponents(m), 3) for m in range(10)])
    pair = np.empty((10, 10))
    for m in range(10):
        em = monomial_exponents(m)
        for n in range(10):
            en = monomial_exponents(n)
            pair[m, n] = _simplex_int(tuple(a + b for a, b in zip(em, en)), 3)
    # FACE[i][m, p]: int_{F_i} mono_m * l_j dF (unit |F|), j the p-th vertex
    # of face i in ascending local order; zero whenever mono_m contains l_i.
    face = np.zeros((4, 10, 3))
    for i in range(4):
        others = [j for j in range(4) if j != i]
        for m in range(10):
            em = monomial_exponents(m)
            if em[i] > 0:
                continue
            for p, j in enumerate(others):
                e3 = [em[k] for k in others]
                e3[p] += 1
                face[i, m, p] = _simplex_int(tuple(e3), 2)
    # int l_j l_v over T (unit |T|), the P1 mass matrix
    p1_mass = np.array([[_simplex_int(tuple(int(a == j) + int(a == v) for a in range(4)), 3) for v in range(4)] for j in range(4)])
    return vol, pair, face, p1_mass


MONO_VOLUME, MONO_PAIR_VOLUME, FACE_MOMENT_TABLE, P1_MASS = _build_tables()
for _t in (MONO_VOLUME, MONO_PAIR_VOLUME, FACE_MOMENT_TABLE, P1_MASS):
    _t.setflags(write=False)

#: Reference tetrahedron (0,0,0), (1,0,0), (0,1,0), (0,0,1).
REFERENCE_VERTS = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)
REFERENCE_VERTS.setflags(write=False)


@dataclass(frozen=True)
class Tet:
    """Four vertex positions; face i is opposite vertex i."""

    verts: np.ndarray  # (4, 3)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.verts, dtype=float))
        if v.shape != (4, 3):
            raise ValueError(f"expected (4, 3) vertex array, got {v.shape}")
        object.__setattr__(self, "verts", v)


def reference_tet():
    return Tet(REFERENCE_VERTS.copy())


@dataclass(frozen=True)
class TetGeometry:
    """Per-element geometric data.

    grad[i] is the (constant) gradient of the barycentric coordinate l_i,
    the paper-style inward scaled normal; the unit exterior normal is
    normals[i] = -grad[i]/|grad[i]|.  edge_unit[i, j] is the unit vector of
    the edge shared by faces i and j, oriented from the lower- to the
    higher-indexed of its two endpoints.
    """

    verts: np.ndarray  # (4, 3)
    grad: np.ndarray  # (4, 3)
    normals: np.ndarray  # (4, 3)
    face_area: np.ndarray  # (4,)
    edge_unit: np.ndarray  # (4, 4, 3), zeros on the diagonal
    volume: float
    h: float
    inradius: float

    def barycentric(self, x):
        """Barycentric coordinates of points x with shape (..., 3)."""
        x = np.asarray(x, dtype=float)
        d = x - self.verts[0]
        # l_j(x) = l_j(x0) + grad_j . (x - x0) with l_j(x0) = delta_{j0}
        lam = np.einsum("...k,jk->...j", d, self.grad)
        lam[..., 0] += 1.0
        return lam

    @property
    def shape_ratio(self):
        """h / (2 * inradius), >= 1 with equality never attained."""
        return self.h / (2.0 * self.inradius)


def geometry(tet: Tet) -> TetGeometry:
    """Barycentric gradients, normals, areas, edges of a non-degenerate tet."""
    v = tet.verts
    edges = v[1:] - v[0]
    vol6 = float(np.linalg.det(edges))
    dists = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
    h = float(dists.max())
    if abs(vol6) / 6.0 < 1e-14 * h**3:
        raise DegenerateTet(f"tetrahedron volume {vol6 / 6.0:g} below tolerance for h={h:g}")
    grad = np.empty((4, 3))
    grad[1:] = np.linalg.inv(edges).T
    grad[0] = -grad[1:].sum(axis=0)
    volume = abs(vol6) / 6.0
    norms = np.linalg.norm(grad, axis=1)
    normals = -grad / norms[:, None]
    face_area = 3.0 * volume * norms
    edge_unit = np.zeros((4, 4, 3))
    for i in range(4):
        for j in range(i + 1, 4):
            k, l = (m for m in range(4) if m not in (i, j))
            e = v[l] - v[k]
            e = e / np.linalg.norm(e)
            edge_unit[i, j] = e
            edge_unit[j, i] = e
    inradius = 3.0 * volume / face_area.sum()
    return TetGeometry(
        verts=v,
        grad=grad,
        normals=normals,
        face_area=face_area,
        edge_unit=edge_unit,
        volume=volume,
        h=h,
        inradius=inradius,
    )


def build_nn_tensors(geom: TetGeometry) -> np.ndarray:
    """The six constant tensors T1..T6 as rows of a (6, 6) array.

    T1..T4 satisfy n_j . T_i n_j = delta_ij; T5, T6 have vanishing
    normal-normal components on all four faces.  T_i is invariant under
    rescaling or flipping its two edge vectors, so the edge orientation
    convention only fixes the (irrelevant) signs of T5 and T6.
    """
    nn = np.empty((6, 6))
    for i in range(4):
        a = geom.edge_unit[(i + 1) % 4, (i + 2) % 4]
        b = geom.edge_unit[(i + 1) % 4, (i + 3) % 4]
        denom = float(geom.normals[i] @ a) * float(geom.normals[i] @ b)
        nn[i] = st.sym_outer(a, b) / denom
    nn[4] = st.sym_outer(geom.edge_unit[0, 1], geom.edge_unit[2, 3])
    nn[5] = st.sym_outer(geom.edge_unit[0, 2], geom.edge_unit[1, 3])
    return nn


#: DOF labels in local order: 12 face moments, 6 volume moments, 12
#: divergence moments.
def dof_labels():
    labels = []
    for i in range(4):
        for j in range(4):
            if j != i:
                labels.append(("face", i, j))
    for c in st.COMPONENTS:
        labels.append(("vol", c))
    for v in range(4):
        for d in "xyz":
            labels.append(("div", v, d))
    return labels


DOF_LABELS = tuple(dof_labels())


def spanning_basis(geom: TetGeometry, nn=None):
    """30 spanning polynomials of the element space as a (30, 10, 6) array.

    For each i: T_i times {l1, l2, l3, l4, l_i l_{i+1}, l_i l_{i+2},
    l_i l_{i+3}} (indices mod 4), followed by the constants T5 and T6.
    """
    if nn is None:
        nn = build_nn_tensors(geom)
    span = np.zeros((30, 10, 6))
    for i in range(4):
        base = 7 * i
        for j in range(4):
            span[base + j, j] = nn[i]
        for k in range(1, 4):
            span[base + 3 + k, _PAIR_INDEX[(i, (i + k) % 4)]] = nn[i]
    # constants are resolved in the linear monomials via sum(l_j) = 1
    for j in range(4):
        span[28, j] = nn[4]
        span[29, j] = nn[5]
    return span


def divergence_coeffs(poly, geom: TetGeometry):
    """Row-wise divergence of a (10, 6) polynomial as a P1 field (4, 3).

    The divergence of a quadratic tensor polynomial is affine; it is
    returned as coefficients over l1..l4 (vertex values).
    """
    poly = np.asarray(poly, dtype=float)
    out = np.zeros(poly.shape[:-2] + (4, 3))
    for a in range(4):
        out += st.matvec(poly[..., a, :], geom.grad[a])[..., None, :]
    for k, (a, b) in enumerate(MONO_PAIRS):
        out[..., b, :] += st.matvec(poly[..., 4 + k, :], geom.grad[a])
        out[..., a, :] += st.matvec(poly[..., 4 + k, :], geom.grad[b])
    return out


def evaluate_monomials(lam):
    """Values of the 10 monomials at barycentric points (..., 4) -> (..., 10)."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty(lam.shape[:-1] + (10,))
    out[..., :4] = lam
    for k, (a, b) in enumerate(MONO_PAIRS):
        out[..., 4 + k] = lam[..., a] * lam[..., b]
    return out


def evaluate(poly, geom: TetGeometry, x):
    """Evaluate a (10, 6) polynomial at physical points (..., 3) -> (..., 6)."""
    mono = evaluate_monomials(geom.barycentric(x))
    return np.einsum("...m,mc->...c", mono, np.asarray(poly, dtype=float))


def evaluate_bary(poly, lam):
    """Evaluate a (..., 10, 6) polynomial at barycentric points (..., 4)."""
    mono = evaluate_monomials(lam)
    return np.einsum("...m,...mc->...c", mono, np.asarray(poly, dtype=float))


def divergence(poly, geom: TetGeometry, x):
    """div of a (10, 6) polynomial at physical points (..., 3) -> (..., 3)."""
    coeff = divergence_coeffs(poly, geom)
    lam = geom.barycentric(x)
    return np.einsum("...j,jk->...k", lam, coeff)


def dof_values(geom: TetGeometry, poly):
    """Apply all 30 degrees of freedom to a (10, 6) polynomial."""
    poly = np.asarray(poly, dtype=float)
    out = np.empty(30)
    for i in range(4):
        n = geom.normals[i]
        s = st.frobenius(poly, st.sym_outer(n, n))  # n . C_m n per monomial
        out[3 * i : 3 * i + 3] = geom.face_area[i] ** 2 * (s @ FACE_MOMENT_TABLE[i])
    mean = geom.volume * (MONO_VOLUME @ poly)  # int_T tau, 6 components
    out[12:18] = mean * st.FROBENIUS_WEIGHT
    div = divergence_coeffs(poly, geom)  # (4, 3)
    out[18:30] = (geom.volume * (P1_MASS @ div.reshape(4, 3))).reshape(12)
    return out


def dof_matrix(geom: TetGeometry, span=None):
    """30x30 matrix with entry (k, l) = dof_k(span_l), exactly integrated."""
    if span is None:
        span = spanning_basis(geom)
    return np.column_stack([dof_values(geom, span[l]) for l in range(30)])


@dataclass(frozen=True)
class StressShapeSet:
    """Nodal (dual) basis: coeffs[k] is the shape with dof_l(shape_k) = delta_kl."""

    coeffs: np.ndarray  # (30, 10, 6)
    geom: TetGeometry
    labels: tuple = DOF_LABELS


def nodal_basis(geom: TetGeometry) -> StressShapeSet:
    """Dual basis by a dense solve of the 30x30 DOF system."""
    span = spanning_basis(geom)
    vmat = dof_matrix(geom, span)
    try:
        combo = np.linalg.solve(vmat, np.eye(30))
    except np.linalg.LinAlgError as exc:
        raise SingularDofMatrix(str(exc)) from exc
    coeffs = np.einsum("ml,mab->lab", combo, span)
    return StressShapeSet(coeffs=coeffs, geom=geom)


def reduced_matrix_12(geom: TetGeometry):
    """The 12x12 matrix of the unisolvence proof and its determinant.

    Entries are built from t_ij = T_i grad(l_j) and t~_ij = t_ij - t_ii
    after eliminating the scaled unknowns via
    2 phi_i(x_i) + phi_i(x_{i+1}) + phi_i(x_{i+2}) + phi_i(x_{i+3}) = 0.
    Row blocks follow the equation point x_k; column blocks follow i with
    inner index j != i ascending.
    """
    nn = build_nn_tensors(geom)
    t = np.empty((4, 4, 3))
    for i in range(4):
        for j in range(4):
            t[i, j] = st.matvec(nn[i], geom.grad[j])
    mat = np.zeros((12, 12))
    for k in range(4):
        rows = slice(3 * k, 3 * k + 3)
        for i in range(4):
            cols = [j for j in range(4) if j != i]
            for p, j in enumerate(cols):
                col = 3 * i + p
                if i == k:
                    mat[rows, col] = t[k, j] - t[k, k]
                elif j == k:
                    mat[rows, col] = t[i, i]
    return mat, float(np.linalg.det(mat))
