"""Element integration, global saddle-point assembly, and the linear solve.

Polynomial element integrals use the closed-form barycentric formulas; only
the body-force load is evaluated by the 4-point degree-2 rule.  The global
matrix has the symmetric block form

    [ A   B   C ] [sigma]   [ g ]
    [ B^T 0   0 ] [  u  ] = [-f ]
    [ C^T 0   0 ] [ eta ]   [ 0 ]

where g collects prescribed boundary-vertex trace values moved to the
right-hand side (g = 0 for homogeneous Dirichlet data).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .dof_system import GlobalDofMap
from .errors import SolverBreakdown, ToleranceNotReached
from .mesh import TetMesh
from .quadrature import (  # noqa: F401  (re-exported contract surface)
    QuadratureRule,
    TET_DEG2_4PT,
    TET_DEG5_14PT,
    exact_simplex_integral,
    quad_rule,
)
from .ref_element import StressShapeSet, TetGeometry


@dataclass(frozen=True)
class ElementMatrices:
    """Local blocks of one element in the saddle-point system."""

    a_e: np.ndarray  # (30, 30) compliance
    b_e: np.ndarray  # (30, 12) divergence/u coupling
    c_e: np.ndarray  # (30, 12) trace coupling
    f_e: np.ndarray  # (12,) load


def _single_element_data(geom: TetGeometry, shapes: StressShapeSet):
    return kernels.ElementShapeData(
        volume=np.array([geom.volume]),
        h=np.array([geom.h]),
        grad=geom.grad[None],
        coeffs=shapes.coeffs[None],
        div_coeffs=kernels.divergence_coeffs_batch(shapes.coeffs[None], geom.grad[None]),
    )


def element_matrices(geom: TetGeometry, shapes: StressShapeSet, material, f=None,
                     load_rule: QuadratureRule = TET_DEG2_4PT) -> ElementMatrices:
    """All local blocks of a single element (exact polynomial integration)."""
    data = _single_element_data(geom, shapes)
    a_e = kernels.compliance_matrices(data, material)[0]
    b_e = kernels.divergence_coupling(data)[0]
    c_e = kernels.trace_coupling(data)[0]
    if f is None:
        f_e = np.zeros(12)
    else:
        f_e = kernels.load_vector(data, geom.verts[None], f, load_rule)[0]
    return ElementMatrices(a_e=a_e, b_e=b_e, c_e=c_e, f_e=f_e)


@dataclass(frozen=True)
class ElementBlocks:
    """Dense per-element blocks of the assembled operator.

    c_e carries only the free (non-Dirichlet) trace columns; fixed columns
    are zero, their action having been moved to the right-hand side.
    """

    a_e: np.ndarray  # (nt, 30, 30)
    b_e: np.ndarray  # (nt, 30, 12)
    c_e: np.ndarray  # (nt, 30, 12)


@dataclass
class SaddleSystem:
    """Assembled sparse symmetric indefinite system.

    k_mat is None when assembled with materialize=False; the operator is
    then applied through the per-element blocks (entry-wise identical, only
    the summation order differs), which large studies use to stay within
    desk-scale memory.
    """

    k_mat: sp.csc_matrix | None
    rhs: np.ndarray
    n_sigma: int
    n_u: int
    n_eta: int
    dofmap: GlobalDofMap | None = None
    blocks: ElementBlocks | None = None

    @property
    def n_total(self):
        return self.n_sigma + self.n_u + self.n_eta

    def matvec(self, x):
        """K @ x, from the sparse matrix or streamed over element blocks."""
        if self.k_mat is not None:
            return self.k_mat @ x
        dofmap, blk = self.dofmap, self.blocks
        free = dofmap.eta_gather >= 0
        sig = x[dofmap.sigma_gather]
        u = x[dofmap.u_gather]
        eta = np.where(free, x[np.clip(dofmap.eta_gather, 0, None)], 0.0)
        y = np.zeros_like(x)
        y_sig = (
            np.einsum("ekl,el->ek", blk.a_e, sig)
            + np.einsum("ekj,ej->ek", blk.b_e, u)
            + np.einsum("ekj,ej->ek", blk.c_e, eta)
        )
        np.add.at(y, dofmap.sigma_gather.ravel(), y_sig.ravel())
        y[dofmap.u_gather.ravel()] = np.einsum("ekj,ek->ej", blk.b_e, sig).ravel()
        y_eta = np.einsum("ekj,ek->ej", blk.c_e, sig)
        np.add.at(y, np.clip(dofmap.eta_gather, 0, None).ravel(),
                  np.where(free, y_eta, 0.0).ravel())
        return y


def _coo_block(values, rows, cols, shape):
    m = sp.coo_matrix((values.ravel(), (rows.ravel(), cols.ravel())), shape=shape)
    m.sum_duplicates()
    return m.tocsr()


def assemble(mesh: TetMesh, dofmap: GlobalDofMap, material, f=None,
             boundary_values=None, data: kernels.ElementShapeData | None = None,
             load_rule: QuadratureRule = TET_DEG2_4PT, materialize=True) -> SaddleSystem:
    """Assemble the global system for body force f and Dirichlet vertex data.

    boundary_values is an (nv, 3) array that must vanish at interior
    vertices (see dof_system.apply_dirichlet); None means homogeneous data.
    With materialize=False the sparse matrix is not formed (the operator
    stays available through SaddleSystem.matvec).
    """
    if data is None:
        data = kernels.build_element_data(mesh.tet_verts())
    nt = mesh.n_tets
    ns, nu, ne = dofmap.n_sigma, dofmap.n_u, dofmap.n_eta

    a_e = kernels.compliance_matrices(data, material)
    b_e = kernels.divergence_coupling(data)
    c_e = kernels.trace_coupling(data)

    rhs = np.zeros(ns + nu + ne)
    if f is not None:
        f_e = kernels.load_vector(data, mesh.tet_verts(), f, load_rule)
        np.add.at(rhs, dofmap.u_gather.ravel(), -f_e.ravel())
    if boundary_values is not None:
        w_loc = boundary_values[mesh.tets].reshape(nt, 12)  # zero at free vertices
        if np.abs(w_loc).max() > 0.0:
            g_e = -np.einsum("ekj,ej->ek", c_e, w_loc)
            np.add.at(rhs, dofmap.sigma_gather.ravel(), g_e.ravel())
    free = dofmap.eta_gather >= 0
    c_e[np.broadcast_to(~free[:, None, :], c_e.shape)] = 0.0  # fixed columns now in rhs

    k_mat = None
    if materialize:
        # 32-bit triplet indices keep the COO stage affordable at desk scale
        sg = dofmap.sigma_gather.astype(np.int32)
        a_blk = _coo_block(a_e, np.repeat(sg, 30, axis=1), np.tile(sg, (1, 30)), (ns, ns))
        ug = (dofmap.u_gather - dofmap.u_offset).astype(np.int32)
        b_blk = _coo_block(b_e, np.repeat(sg, 12, axis=1), np.tile(ug, (1, 30)), (ns, nu))
        eg = (dofmap.eta_gather - dofmap.eta_offset).astype(np.int32)  # negative when fixed
        rows = np.repeat(sg, 12, axis=1).reshape(nt, 30, 12)
        cols = np.broadcast_to(eg[:, None, :], (nt, 30, 12))
        mask = np.broadcast_to(free[:, None, :], (nt, 30, 12))
        c_blk = sp.coo_matrix((c_e[mask], (rows[mask], cols[mask])), shape=(ns, ne))
        c_blk.sum_duplicates()
        c_blk = c_blk.tocsr()
        del rows, cols, mask
        k_mat = sp.bmat(
            [
                [a_blk, b_blk, c_blk],
                [b_blk.T, None, None],
                [c_blk.T, None, None],
            ],
            format="csc",
        )
        del a_blk, b_blk, c_blk

    return SaddleSystem(
        k_mat=k_mat,
        rhs=rhs,
        n_sigma=ns,
        n_u=nu,
        n_eta=ne,
        dofmap=dofmap,
        blocks=ElementBlocks(a_e=a_e, b_e=b_e, c_e=c_e),
    )


@dataclass(frozen=True)
class SolveReport:
    residual: float
    method: str
    n_total: int
    nnz: int
    factor_nnz: int
    wall_time: float


class _CondensedFactor:
    """Exact element-wise elimination of the 30 element-local unknowns.

    The 18 interior stress moments and 12 displacement values of each
    element appear in no other element, so the global matrix restricted to
    them is block diagonal with invertible 30x30 saddle blocks
    [[A_ii, B_i], [B_i^T, 0]] (B_i contains an identity sub-block because
    the divergence-moment duals are among the interior shapes).  Their
    Schur complement couples only face-stress and trace unknowns, shrinking
    the sparse factorization from O(30 nt) to the skeleton size.
    """

    def __init__(self, system: SaddleSystem):
        blk = system.blocks
        dofmap = system.dofmap
        self.system = system
        nt = len(blk.a_e)
        ns, nu = system.n_sigma, system.n_u
        self.nf3 = ns - 18 * nt
        self.n_red = self.nf3 + system.n_eta

        a, b, c = blk.a_e, blk.b_e, blk.c_e  # c already has fixed columns zeroed
        free = dofmap.eta_gather >= 0

        m_loc = np.empty((nt, 30, 30))
        m_loc[:, :18, :18] = a[:, 12:, 12:]
        m_loc[:, :18, 18:] = b[:, 12:, :]
        m_loc[:, 18:, :18] = b[:, 12:, :].transpose(0, 2, 1)
        m_loc[:, 18:, 18:] = 0.0

        e_cpl = np.zeros((nt, 30, 24))
        e_cpl[:, :18, :12] = a[:, 12:, :12]
        e_cpl[:, :18, 12:] = c[:, 12:, :]
        e_cpl[:, 18:, :12] = b[:, :12, :].transpose(0, 2, 1)

        r_ret = np.zeros((nt, 24, 24))
        r_ret[:, :12, :12] = a[:, :12, :12]
        r_ret[:, :12, 12:] = c[:, :12, :]
        r_ret[:, 12:, :12] = c[:, :12, :].transpose(0, 2, 1)

        self.loc_idx = np.concatenate([dofmap.sigma_gather[:, 12:], dofmap.u_gather], axis=1)
        ret_idx = np.empty((nt, 24), dtype=np.int32)
        ret_idx[:, :12] = dofmap.sigma_gather[:, :12]
        ret_idx[:, 12:] = np.where(free, self.nf3 + dofmap.eta_gather - (ns + nu), -1)
        self.ret_idx = ret_idx
        self.ret_mask = ret_idx >= 0

        try:
            self.minv_e = np.linalg.solve(m_loc, e_cpl)  # M^-1 E, (nt, 30, 24)
        except np.linalg.LinAlgError as exc:
            raise SolverBreakdown(f"singular element-local block: {exc}") from exc
        self.m_loc = m_loc
        self.e_cpl = e_cpl

        s_e = r_ret - np.einsum("ekr,eks->ers", e_cpl, self.minv_e)
        del r_ret
        rows = np.repeat(ret_idx, 24, axis=1).reshape(nt, 24, 24)
        cols = np.broadcast_to(ret_idx[:, None, :], (nt, 24, 24))
        keep = (rows >= 0) & (cols >= 0)
        s_mat = sp.coo_matrix((s_e[keep], (rows[keep], cols[keep])), shape=(self.n_red, self.n_red))
        del s_e, rows, cols, keep
        s_mat.sum_duplicates()
        try:
            self.lu = spla.splu(s_mat.tocsc())
        except (RuntimeError, ValueError) as exc:
            raise SolverBreakdown(f"sparse LU of the condensed system failed: {exc}") from exc
        self.factor_nnz = int(self.lu.L.nnz + self.lu.U.nnz)

    def solve(self, rhs):
        ns, nu = self.system.n_sigma, self.system.n_u
        b_loc = rhs[self.loc_idx]  # (nt, 30)
        minv_b = np.linalg.solve(self.m_loc, b_loc[:, :, None])[:, :, 0]
        g_e = np.einsum("ekr,ek->er", self.e_cpl, minv_b, optimize=True)
        b_red = np.empty(self.n_red)
        b_red[: self.nf3] = rhs[: self.nf3]
        b_red[self.nf3 :] = rhs[ns + nu :]
        np.subtract.at(b_red, self.ret_idx[self.ret_mask], g_e[self.ret_mask])
        x_red = self.lu.solve(b_red)
        if not np.isfinite(x_red).all():
            raise SolverBreakdown("condensed LU produced non-finite entries")
        x = np.zeros(self.system.n_total)
        x[: self.nf3] = x_red[: self.nf3]
        x[ns + nu :] = x_red[self.nf3 :]
        x_ret = np.where(self.ret_mask, x_red[np.clip(self.ret_idx, 0, None)], 0.0)
        x_loc = minv_b - np.einsum("ekr,er->ek", self.minv_e, x_ret, optimize=True)
        x[self.loc_idx.ravel()] = x_loc.ravel()
        return x


def solve(system: SaddleSystem, tol=1e-9, method="auto"):
    """Solve the saddle system; always reports the full-matrix residual.

    method 'condensed' (default when element blocks are available)
    eliminates the element-local unknowns exactly and factors only the
    face/trace skeleton; 'direct' runs SuperLU on the full matrix.  Raises
    SolverBreakdown on factorization failure and ToleranceNotReached when
    the residual (after one refinement step) still exceeds tol.
    """
    t0 = time.perf_counter()
    b = system.rhs
    nnz = system.k_mat.nnz if system.k_mat is not None else 0
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        x = np.zeros_like(b)
        return x, SolveReport(
            residual=0.0,
            method="trivial",
            n_total=system.n_total,
            nnz=nnz,
            factor_nnz=0,
            wall_time=time.perf_counter() - t0,
        )
    if method == "auto":
        method = "condensed" if system.blocks is not None and system.dofmap is not None else "direct"
    if method == "condensed":
        factor = _CondensedFactor(system)
        x = factor.solve(b)
        factor_nnz = factor.factor_nnz
        refine = factor.solve
    elif method == "direct":
        if system.k_mat is None:
            raise ValueError("direct solve requires a materialized matrix")
        try:
            lu = spla.splu(system.k_mat)
            x = lu.solve(b)
        except (RuntimeError, ValueError) as exc:
            raise SolverBreakdown(f"sparse LU factorization failed: {exc}") from exc
        factor_nnz = int(lu.L.nnz + lu.U.nnz)
        refine = lu.solve
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.isfinite(x).all():
        raise SolverBreakdown("linear solve produced non-finite entries")
    residual = float(np.linalg.norm(system.matvec(x) - b)) / bnorm
    if residual > tol:
        x = x + refine(b - system.matvec(x))  # one refinement step
        residual = float(np.linalg.norm(system.matvec(x) - b)) / bnorm
    report = SolveReport(
        residual=residual,
        method=method,
        n_total=system.n_total,
        nnz=nnz,
        factor_nnz=factor_nnz,
        wall_time=time.perf_counter() - t0,
    )
    if residual > tol:
        raise ToleranceNotReached(f"relative residual {residual:g} exceeds tol {tol:g}")
    return x, report


def export_coo(system: SaddleSystem, path):
    """Write the matrix as 'row col value' text lines, 0-based indices."""
    if system.k_mat is None:
        raise ValueError("matrix export requires assemble(..., materialize=True)")
    coo = system.k_mat.tocoo()
    with open(path, "w", encoding="ascii") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
