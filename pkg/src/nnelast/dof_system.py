"""Global numbering of the three discrete fields and Dirichlet handling.

Stress unknowns: 3 per global face (shared by both owners of an interior
face, which enforces continuity of the linear normal-normal trace) plus 18
element-interior moments per tet.  Displacement unknowns: 12 per tet
(discontinuous P1 by vertex values).  Trace unknowns: 3 per non-Dirichlet
vertex, realized as vertex values of the continuous P1 lift; prescribed
boundary vertex values enter the right-hand side during assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .mesh import TetMesh

#: Local vertices of face i, ascending (matches the element's face-DOF order).
FACE_VERTS = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
FACE_VERTS.setflags(write=False)


@dataclass(frozen=True)
class GlobalDofMap:
    """Block layout [sigma | u | eta] with per-element gather lists."""

    n_sigma: int
    n_u: int
    n_eta: int
    sigma_gather: np.ndarray  # (nt, 30) global indices
    u_gather: np.ndarray  # (nt, 12) global indices
    eta_gather: np.ndarray  # (nt, 12) global indices, -1 for Dirichlet slots
    vertex_eta: np.ndarray  # (nv,) free-vertex number or -1

    @property
    def n_total(self):
        return self.n_sigma + self.n_u + self.n_eta

    @property
    def u_offset(self):
        return self.n_sigma

    @property
    def eta_offset(self):
        return self.n_sigma + self.n_u


def build_dof_map(mesh: TetMesh) -> GlobalDofMap:
    """Number all unknowns; Dirichlet vertices are every boundary vertex."""
    nt, nf, nv = mesh.n_tets, mesh.n_faces, mesh.n_vertices
    n_sigma = 3 * nf + 18 * nt
    n_u = 12 * nt

    sigma_gather = np.empty((nt, 30), dtype=np.int64)
    for i in range(4):
        f = mesh.tet_faces[:, i]
        for p in range(3):
            gv = mesh.tets[:, FACE_VERTS[i, p]]
            slot = (mesh.faces[f] == gv[:, None]).argmax(axis=1)
            sigma_gather[:, 3 * i + p] = 3 * f + slot
    sigma_gather[:, 12:] = 3 * nf + 18 * np.arange(nt)[:, None] + np.arange(18)

    u_gather = n_sigma + 12 * np.arange(nt)[:, None] + np.arange(12)

    free = ~mesh.boundary_vertex
    vertex_eta = np.full(nv, -1, dtype=np.int64)
    vertex_eta[free] = np.arange(int(free.sum()))
    n_eta = 3 * int(free.sum())
    eta_offset = n_sigma + n_u
    vnum = vertex_eta[mesh.tets]  # (nt, 4)
    eta_gather = np.where(
        vnum[:, :, None] >= 0,
        eta_offset + 3 * vnum[:, :, None] + np.arange(3),
        -1,
    ).reshape(nt, 12)

    return GlobalDofMap(
        n_sigma=n_sigma,
        n_u=n_u,
        n_eta=n_eta,
        sigma_gather=sigma_gather,
        u_gather=u_gather,
        eta_gather=eta_gather,
        vertex_eta=vertex_eta,
    )


@dataclass(frozen=True)
class TraceLift:
    """Element-local P1 vector field interpolating four vertex values."""

    vertex_values: np.ndarray  # (4, 3)

    def value(self, lam):
        """Evaluate at barycentric points (..., 4)."""
        return np.asarray(lam, dtype=float) @ self.vertex_values

    def strain(self, grad):
        """Constant symmetric gradient given the barycentric gradients (4, 3)."""
        return st.sym_outer(self.vertex_values, np.asarray(grad, dtype=float)).sum(axis=-2)


def trace_lift(vertex_values) -> TraceLift:
    """Wrap four vertex values (4, 3) as the element trace lift."""
    w = np.asarray(vertex_values, dtype=float)
    if w.shape != (4, 3):
        raise ValueError(f"expected (4, 3) vertex values, got {w.shape}")
    return TraceLift(vertex_values=w)


@dataclass(frozen=True)
class TraceField:
    """Solved interior vertex values plus prescribed boundary values."""

    free_values: np.ndarray  # (n_eta,)
    boundary_values: np.ndarray  # (nv, 3), zero at interior vertices

    def vertex_values(self, dofmap: GlobalDofMap):
        """Full (nv, 3) array combining solved and prescribed values."""
        out = self.boundary_values.copy()
        free = dofmap.vertex_eta >= 0
        out[free] = self.free_values.reshape(-1, 3)[dofmap.vertex_eta[free]]
        return out


def apply_dirichlet(g_d, mesh: TetMesh):
    """Prescribed boundary vertex values as an (nv, 3) array, zero inside.

    g_d maps point arrays (..., 3) to value arrays (..., 3); it is evaluated
    at boundary vertices only.
    """
    values = np.zeros((mesh.n_vertices, 3))
    bnd = mesh.boundary_vertex
    if bnd.any():
        values[bnd] = np.asarray(g_d(mesh.vertices[bnd]), dtype=float)
    return values
