"""Exact barycentric monomial integrals and simplex quadrature rules.

Integrals of barycentric monomials over a d-simplex have the classical
closed form

    int_T  l1^a l2^b ... = a! b! ... d! / (a + b + ... + d)!  * |T|

which serves both as the exact integration backend for polynomial element
matrices and as the oracle the quadrature rules are verified against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np


def exact_simplex_integral(a, b, c, d):
    """int_T l1^a l2^b l3^c l4^d over a tetrahedron, as a multiple of |T|."""
    s = a + b + c + d
    if min(a, b, c, d) < 0 or s > 32:
        raise ValueError("exponents must be nonnegative and small")
    return factorial(a) * factorial(b) * factorial(c) * factorial(d) * 6 / factorial(s + 3)


def exact_triangle_integral(a, b, c):
    """int_F l1^a l2^b l3^c over a triangle, as a multiple of |F|."""
    s = a + b + c
    if min(a, b, c) < 0 or s > 32:
        raise ValueError("exponents must be nonnegative and small")
    return factorial(a) * factorial(b) * factorial(c) * 2 / factorial(s + 2)


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points and weights; weights sum to 1 (scale by |T| at use)."""

    points: np.ndarray  # (npts, nbary)
    weights: np.ndarray  # (npts,)
    degree: int

    @property
    def npoints(self):
        return len(self.weights)

    def physical_points(self, verts):
        """Map barycentric points onto simplices given by vertex arrays.

        verts has shape (..., nbary, 3); the result is (..., npts, 3).
        """
        return np.einsum("pj,...jk->...pk", self.points, np.asarray(verts, dtype=float))


def _orbits(base):
    seen = []
    for p in itertools.permutations(base):
        if p not in seen:
            seen.append(p)
    return seen


def _rule(orbit_data, degree):
    pts, wts = [], []
    for base, w in orbit_data:
        for p in _orbits(base):
            pts.append(p)
            wts.append(w)
    points = np.array(pts)
    weights = np.array(wts)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points=points, weights=weights, degree=degree)


def _tet_4pt():
    a = (5.0 + 3.0 * np.sqrt(5.0)) / 20.0
    b = (5.0 - np.sqrt(5.0)) / 20.0
    return _rule([((a, b, b, b), 0.25)], degree=2)


def _tet_14pt():
    # 14-point degree-5 rule with two S31 orbits and one S22 orbit.
    g1 = 0.09273525031089122640232391373703060
    g2 = 0.31088591926330060979734573376345783
    g3 = 0.04550370412564964949188052627933943
    w1 = 0.07349304311636194954371020548632750
    w2 = 0.11268792571801585079918565233328633
    w3 = 0.04254602077708146643806942812025744
    return _rule(
        [
            ((g1, g1, g1, 1.0 - 3.0 * g1), w1),
            ((g2, g2, g2, 1.0 - 3.0 * g2), w2),
            ((g3, g3, 0.5 - g3, 0.5 - g3), w3),
        ],
        degree=5,
    )


def _tri_3pt():
    return _rule([((2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0), 1.0 / 3.0)], degree=2)


def _tri_7pt():
    s15 = np.sqrt(15.0)
    a1 = (6.0 - s15) / 21.0
    a2 = (6.0 + s15) / 21.0
    return _rule(
        [
            ((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 9.0 / 40.0),
            ((a1, a1, 1.0 - 2.0 * a1), (155.0 - s15) / 1200.0),
            ((a2, a2, 1.0 - 2.0 * a2), (155.0 + s15) / 1200.0),
        ],
        degree=5,
    )


TET_DEG2_4PT = _tet_4pt()
TET_DEG5_14PT = _tet_14pt()
TRI_DEG2_3PT = _tri_3pt()
TRI_DEG5_7PT = _tri_7pt()

_TET_RULES = {"deg2_4pt": TET_DEG2_4PT, "deg5_14pt": TET_DEG5_14PT}


def quad_rule(kind):
    """Tetrahedron rule by name: 'deg2_4pt' or 'deg5_14pt'."""
    try:
        return _TET_RULES[kind]
    except KeyError:
        raise ValueError(f"unknown quadrature kind {kind!r}; choose from {sorted(_TET_RULES)}") from None


def triangle_rule(degree):
    """Smallest shipped triangle rule exact to at least the given degree."""
    if degree <= 2:
        return TRI_DEG2_3PT
    if degree <= 5:
        return TRI_DEG5_7PT
    raise ValueError(f"no triangle rule of degree {degree} available")
