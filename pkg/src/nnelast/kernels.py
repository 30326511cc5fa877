"""Batched element kernels with a compiled core and a pure-Python fallback.

The per-element hot path (geometry, tensor basis, 30x30 DOF solve) runs in
the Cython extension nnelast._core when it is importable; otherwise the
NumPy fallback nnelast._core_py is used.  Set NNELAST_PURE_PYTHON=1 to force
the fallback.  The dense Gram/coupling contractions below are plain batched
BLAS and are shared by both backends.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .ref_element import MONO_PAIRS, MONO_PAIR_VOLUME, MONO_VOLUME, P1_MASS, evaluate_monomials

if os.environ.get("NNELAST_PURE_PYTHON"):
    from . import _core_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _core_py as _impl

        BACKEND = "python"


@dataclass(frozen=True)
class ElementShapeData:
    """Per-element geometry and nodal shape data for a whole mesh."""

    volume: np.ndarray  # (ne,)
    h: np.ndarray  # (ne,)
    grad: np.ndarray  # (ne, 4, 3) barycentric gradients
    coeffs: np.ndarray  # (ne, 30, 10, 6) nodal shape coefficients
    div_coeffs: np.ndarray  # (ne, 30, 4, 3) divergence P1 coefficients

    @property
    def n_elements(self):
        return len(self.volume)

    @property
    def normals(self):
        """(ne, 4, 3) unit exterior face normals."""
        norm = np.linalg.norm(self.grad, axis=2, keepdims=True)
        return -self.grad / norm

    @property
    def face_area(self):
        """(ne, 4) face areas."""
        return 3.0 * self.volume[:, None] * np.linalg.norm(self.grad, axis=2)


def divergence_coeffs_batch(coeffs, grad):
    """Batched row-wise divergence: (.., 30, 10, 6) -> (.., 30, 4, 3)."""
    out = np.zeros(coeffs.shape[:-2] + (4, 3))
    for a in range(4):
        out += st.matvec(coeffs[..., a, :], grad[..., None, a, :])[..., None, :]
    for k, (a, b) in enumerate(MONO_PAIRS):
        out[..., b, :] += st.matvec(coeffs[..., 4 + k, :], grad[..., None, a, :])
        out[..., a, :] += st.matvec(coeffs[..., 4 + k, :], grad[..., None, b, :])
    return out


def build_element_data(verts) -> ElementShapeData:
    """Run the selected backend on a (ne, 4, 3) vertex batch."""
    verts = np.ascontiguousarray(np.asarray(verts, dtype=float))
    volume, h, grad, coeffs = _impl.build_shapes(verts)
    div_coeffs = divergence_coeffs_batch(coeffs, grad)
    return ElementShapeData(volume=volume, h=h, grad=grad, coeffs=coeffs, div_coeffs=div_coeffs)


def frobenius_gram(data: ElementShapeData):
    """(ne, 30, 30) matrices int_T phi_k : phi_l, exactly integrated."""
    w = st.FROBENIUS_WEIGHT
    tmp = np.einsum("mn,elnc->elmc", MONO_PAIR_VOLUME, data.coeffs)
    g = np.einsum("ekmc,c,elmc->ekl", data.coeffs, w, tmp, optimize=True)
    return g * data.volume[:, None, None]


def trace_gram(data: ElementShapeData):
    """(ne, 30, 30) matrices int_T tr(phi_k) tr(phi_l), exactly integrated."""
    tr = data.coeffs[..., :3].sum(axis=-1)  # (ne, 30, 10)
    g = np.einsum("ekm,mn,eln->ekl", tr, MONO_PAIR_VOLUME, tr, optimize=True)
    return g * data.volume[:, None, None]


def compliance_matrices(data: ElementShapeData, material, chunk=4096):
    """(ne, 30, 30) compliance blocks int_T A phi_k : phi_l.

    Uses the split A tau = dev(tau)/(2 mu) + tr(tau) Id / (3 (3 lam + 2 mu)),
    so that <A phi_k, phi_l> = (F_kl - T_kl/3)/(2 mu) + T_kl/(3(3lam+2mu))
    with F the Frobenius and T the trace Gram matrices.  Processed in
    element chunks to bound transient memory.
    """
    ne = data.n_elements
    out = np.empty((ne, 30, 30))
    c_dev = 0.5 / material.mu
    c_tr = 1.0 / (3.0 * material.bulk3) - c_dev / 3.0
    w = st.FROBENIUS_WEIGHT
    for lo in range(0, ne, chunk):
        sl = slice(lo, min(lo + chunk, ne))
        coeffs = data.coeffs[sl]
        tmp = np.einsum("mn,elnc->elmc", MONO_PAIR_VOLUME, coeffs)
        frob = np.einsum("ekmc,c,elmc->ekl", coeffs, w, tmp, optimize=True)
        tr = coeffs[..., :3].sum(axis=-1)
        trg = np.einsum("ekm,mn,eln->ekl", tr, MONO_PAIR_VOLUME, tr, optimize=True)
        np.multiply(frob, c_dev, out=frob)
        frob += c_tr * trg
        out[sl] = frob * data.volume[sl, None, None]
    return out


def divergence_coupling(data: ElementShapeData):
    """(ne, 30, 12) blocks int_T div(phi_k) . (l_v e_d); columns j = 3v + d."""
    b = np.einsum("ekjd,jv->ekvd", data.div_coeffs, P1_MASS)
    return b.reshape(data.n_elements, 30, 12) * data.volume[:, None, None]


def trace_coupling(data: ElementShapeData):
    """(ne, 30, 12) blocks -(eps(w_j), phi_k) - (w_j, div phi_k).

    w_j = l_v e_d is the trace-lift basis; eps(w_j) = e_d (.) grad(l_v) is
    constant, and the (w_j, div phi_k) term equals the divergence coupling.
    """
    mean = np.einsum("m,ekmc->ekc", MONO_VOLUME, data.coeffs) * data.volume[:, None, None]
    eps = np.empty((data.n_elements, 4, 3, 6))
    eye = np.eye(3)
    for d in range(3):
        eps[:, :, d, :] = st.sym_outer(eye[d], data.grad)
    s = np.einsum("ekc,c,evdc->ekvd", mean, st.FROBENIUS_WEIGHT, eps, optimize=True)
    return -(s.reshape(data.n_elements, 30, 12) + divergence_coupling(data))


def load_vector(data: ElementShapeData, verts, f, rule):
    """(ne, 12) vectors int_T f . (l_v e_d) by quadrature; columns j = 3v + d."""
    pts = rule.physical_points(verts)  # (ne, npts, 3)
    fv = np.asarray(f(pts), dtype=float)
    out = np.einsum("p,pv,epd->evd", rule.weights, rule.points, fv)
    return out.reshape(data.n_elements, 12) * data.volume[:, None]


def shape_values(data: ElementShapeData, coeff_vec, lam):
    """Evaluate per-element polynomials at barycentric points.

    coeff_vec: (ne, 30) local stress coefficients; lam: (npts, 4).
    Returns (ne, npts, 6).
    """
    poly = np.einsum("ek,ekmc->emc", coeff_vec, data.coeffs)
    mono = evaluate_monomials(lam)  # (npts, 10)
    return np.einsum("pm,emc->epc", mono, poly)
