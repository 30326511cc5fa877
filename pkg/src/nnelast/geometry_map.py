"""Affine reference-to-physical maps and the stress/dual transformations.

Tensor fields are pushed forward by the re-scaled Piola-Kirchhoff map
J^2 tau o G = B tau_hat B^T, which preserves face moments of n.tau n;
constant tensor and P1 vector test objects use the dual Piola maps
J B^{-T} (.) B^{-1} and J B^{-T} (.), preserving volume and divergence
moments.  Because G matches vertices in order, barycentric coordinates are
invariant and polynomial pushforwards act monomial-wise on the tensor
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .errors import DegenerateTet
from .ref_element import Tet


@dataclass(frozen=True)
class AffineMap:
    """x = a + B x_hat with J = det(B) != 0."""

    a: np.ndarray  # (3,)
    b_mat: np.ndarray  # (3, 3)
    j_det: float

    @property
    def b_inv(self):
        return np.linalg.inv(self.b_mat)

    def apply(self, xhat):
        return np.asarray(xhat, dtype=float) @ self.b_mat.T + self.a

    def inverse_apply(self, x):
        return (np.asarray(x, dtype=float) - self.a) @ self.b_inv.T


def map_from_tets(ref: Tet, phys: Tet) -> AffineMap:
    """Affine map sending the vertices of ref onto those of phys in order."""
    er = (ref.verts[1:] - ref.verts[0]).T
    ep = (phys.verts[1:] - phys.verts[0]).T
    if abs(np.linalg.det(er)) < 1e-14 or abs(np.linalg.det(ep)) < 1e-14:
        raise DegenerateTet("cannot build an affine map from a degenerate tetrahedron")
    b_mat = ep @ np.linalg.inv(er)
    a = phys.verts[0] - b_mat @ ref.verts[0]
    return AffineMap(a=a, b_mat=b_mat, j_det=float(np.linalg.det(b_mat)))


def push_stress_value(m: AffineMap, tau_hat):
    """Single tensor value: tau = B tau_hat B^T / J^2."""
    full = st.to_matrix(tau_hat)
    return st.from_matrix(np.einsum("ij,...jk,lk->...il", m.b_mat, full, m.b_mat) / m.j_det**2)


def push_stress(m: AffineMap, coeffs):
    """Push a (.., 10, 6) barycentric polynomial through the stress map.

    Barycentric monomials are invariant under the vertex-matching affine
    map, so only the tensor coefficients transform.
    """
    return push_stress_value(m, coeffs)


def push_constant_dual(m: AffineMap, c_hat):
    """Constant symmetric test tensor: c = J B^{-T} c_hat B^{-1}."""
    binv = m.b_inv
    full = st.to_matrix(c_hat)
    return st.from_matrix(m.j_det * np.einsum("ji,...jk,kl->...il", binv, full, binv))


def push_vector_dual(m: AffineMap, v_hat):
    """P1 vector test field by vertex values (.., 4, 3): v = J B^{-T} v_hat."""
    return m.j_det * np.asarray(v_hat, dtype=float) @ m.b_inv
