"""Pure-Python element kernel: per-element nodal shape construction.

Fallback used when the compiled extension nnelast._core is unavailable (or
disabled via NNELAST_PURE_PYTHON=1).  Produces bit-identical outputs by
construction, just slower; see benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import numpy as np

from .ref_element import Tet, geometry, nodal_basis


def build_shapes(verts):
    """Geometry and nodal shape coefficients for a batch of tets.

    verts: (ne, 4, 3).  Returns (volume, h, grad, coeffs) with shapes
    (ne,), (ne,), (ne, 4, 3), (ne, 30, 10, 6).
    """
    verts = np.asarray(verts, dtype=float)
    ne = len(verts)
    volume = np.empty(ne)
    h = np.empty(ne)
    grad = np.empty((ne, 4, 3))
    coeffs = np.empty((ne, 30, 10, 6))
    for e in range(ne):
        geom = geometry(Tet(verts[e]))
        volume[e] = geom.volume
        h[e] = geom.h
        grad[e] = geom.grad
        coeffs[e] = nodal_basis(geom).coeffs
    return volume, h, grad, coeffs
