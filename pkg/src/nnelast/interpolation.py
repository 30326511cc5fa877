"""The canonical interpolation operator and the piecewise-P1 projection.

interpolate_nn evaluates the 30 element DOFs of a smooth tensor field (face
moments once per global face, so the result is conforming by construction)
and expands in the nodal basis.  It commutes with the piecewise divergence:
the divergence moments of the interpolant match those of the field, hence
div of the interpolant equals the element-wise L2 projection of div onto P1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .dof_system import GlobalDofMap
from .kernels import ElementShapeData, build_element_data
from .mesh import TetMesh
from .quadrature import TET_DEG5_14PT, triangle_rule
from .ref_element import P1_MASS, evaluate_monomials

_P1_MASS_INV = np.linalg.inv(P1_MASS)


@dataclass
class DiscreteStressField:
    """Stress field in the conforming space, as global DOF coefficients."""

    mesh: TetMesh
    dofmap: GlobalDofMap
    data: ElementShapeData
    coeffs: np.ndarray  # (n_sigma,)

    def element_coeffs(self):
        """(ne, 30) local coefficient vectors."""
        return self.coeffs[self.dofmap.sigma_gather]

    def element_polys(self):
        """(ne, 10, 6) per-element polynomial coefficients."""
        return np.einsum("ek,ekmc->emc", self.element_coeffs(), self.data.coeffs)

    def values_bary(self, lam):
        """(ne, npts, 6) values at shared barycentric points (npts, 4)."""
        mono = evaluate_monomials(np.asarray(lam, dtype=float))
        return np.einsum("pm,emc->epc", mono, self.element_polys())

    def divergence_p1(self):
        """(ne, 4, 3) barycentric P1 coefficients of the divergence."""
        return np.einsum("ek,ekjd->ejd", self.element_coeffs(), self.data.div_coeffs)


def project_p1(values_fn, mesh: TetMesh, data: ElementShapeData | None = None,
               rule=TET_DEG5_14PT):
    """Element-wise L2 projection onto P1 vector fields.

    values_fn maps physical points (..., 3) to vectors (..., 3).  Returns
    (ne, 4, 3) barycentric coefficients (vertex values of the projection).
    """
    if data is None:
        data = build_element_data(mesh.tet_verts())
    pts = rule.physical_points(mesh.tet_verts())  # (ne, npts, 3)
    vals = np.asarray(values_fn(pts), dtype=float)
    rhs = np.einsum("p,pv,epd->evd", rule.weights, rule.points, vals)
    return np.einsum("vw,ewd->evd", _P1_MASS_INV, rhs)


def _field_values(field, elems, pts, data):
    """Tensor values of a generic or discrete field at per-element points."""
    if isinstance(field, DiscreteStressField):
        polys = field.element_polys()[elems]
        verts = field.mesh.tet_verts()[elems]
        grad = field.data.grad[elems]
        d = pts - verts[:, 0][:, None, :]
        lam = np.einsum("epk,ejk->epj", d, grad)
        lam[..., 0] += 1.0
        mono = evaluate_monomials(lam)
        return np.einsum("epm,emc->epc", mono, polys)
    return np.asarray(field.value(pts), dtype=float)


def _field_divergence(field, elems, pts):
    if isinstance(field, DiscreteStressField):
        divc = field.divergence_p1()[elems]
        verts = field.mesh.tet_verts()[elems]
        grad = field.data.grad[elems]
        d = pts - verts[:, 0][:, None, :]
        lam = np.einsum("epk,ejk->epj", d, grad)
        lam[..., 0] += 1.0
        return np.einsum("epj,ejd->epd", lam, divc)
    return np.asarray(field.divergence(pts), dtype=float)


def interpolate_nn(field, mesh: TetMesh, dofmap: GlobalDofMap,
                   data: ElementShapeData | None = None,
                   volume_rule=TET_DEG5_14PT, face_degree=5) -> DiscreteStressField:
    """Interpolate a tensor field with continuous normal-normal face traces.

    field provides value(x) -> (..., 6) and divergence(x) -> (..., 3) for
    point arrays (..., 3); a DiscreteStressField is evaluated through its
    owning elements instead.  Face moments are computed once per global
    face from its first owner, which is well defined for conforming inputs.
    """
    if data is None:
        data = build_element_data(mesh.tet_verts())
    coeffs = np.empty(dofmap.n_sigma)
    nf = mesh.n_faces

    # face moments |F| <n.tau n, q>_F, once per global face
    tri = triangle_rule(face_degree)
    owners = mesh.face_tets[:, 0]
    local = mesh.face_local[:, 0].astype(np.int64)
    fverts = mesh.vertices[mesh.faces]  # (nf, 3, 3), sorted-triple order
    fpts = np.einsum("pj,fjk->fpk", tri.points, fverts)
    tau = _field_values(field, owners, fpts, data)
    normals = data.normals[owners, local]  # (nf, 3)
    nn = st.frobenius(tau, st.sym_outer(normals, normals)[:, None, :])
    area = data.face_area[owners, local]
    mom = np.einsum("p,fp,ps->fs", tri.weights, nn, tri.points)
    coeffs[: 3 * nf] = (area[:, None] ** 2 * mom).ravel()

    # volume and divergence moments per element
    elems = np.arange(mesh.n_tets)
    vpts = volume_rule.physical_points(mesh.tet_verts())
    tau = _field_values(field, elems, vpts, data)
    vol_mom = np.einsum("p,epc->ec", volume_rule.weights, tau)
    vol_mom *= data.volume[:, None] * st.FROBENIUS_WEIGHT
    dv = _field_divergence(field, elems, vpts)
    div_mom = np.einsum("p,pv,epd->evd", volume_rule.weights, volume_rule.points, dv)
    div_mom *= data.volume[:, None, None]
    interior = np.concatenate([vol_mom, div_mom.reshape(-1, 12)], axis=1)
    coeffs[3 * nf :] = interior.ravel()
    return DiscreteStressField(mesh=mesh, dofmap=dofmap, data=data, coeffs=coeffs)


def check_commuting(field, mesh: TetMesh, dofmap: GlobalDofMap,
                    data: ElementShapeData | None = None,
                    volume_rule=TET_DEG5_14PT, face_degree=5):
    """max_T || div(I_nn tau) - P1-projection(div tau) ||_T."""
    if data is None:
        data = build_element_data(mesh.tet_verts())
    interp = interpolate_nn(field, mesh, dofmap, data, volume_rule, face_degree)
    lhs = interp.divergence_p1()
    rhs = project_p1(field.divergence, mesh, data, rule=volume_rule)
    diff = lhs - rhs
    sq = np.einsum("evd,vw,ewd->e", diff, P1_MASS, diff) * data.volume
    return float(np.sqrt(max(sq.max(), 0.0)))
