"""Algebra of symmetric 3x3 tensors and the isotropic material laws.

Symmetric tensors are stored as arrays with a trailing axis of length 6 in
the component order (xx, yy, zz, xy, xz, yz).  Off-diagonal components are
kept unscaled; the Frobenius inner product doubles them explicitly, which
avoids the factor-of-2 pitfalls of engineering Voigt notation.  All
functions broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Component order of the trailing tensor axis.
COMPONENTS = ("xx", "yy", "zz", "xy", "xz", "yz")

#: Weights turning the 6-component dot product into the full 9-entry
#: Frobenius sum.
FROBENIUS_WEIGHT = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

#: Identity tensor.
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

#: Canonical basis E_xx ... E_yz of the symmetric tensors (rows); the
#: off-diagonal members carry a 1 in both matrix slots.
CANONICAL_BASIS = np.eye(6)

# index pairs (row, col) of the 6 stored components in the 3x3 matrix
_IJ = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def sym_outer(a, b):
    """Symmetrized outer product (a b^T + b a^T)/2 as 6 components."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape)[:-1] + (6,))
    for k, (i, j) in enumerate(_IJ):
        out[..., k] = 0.5 * (a[..., i] * b[..., j] + a[..., j] * b[..., i])
    return out


def to_matrix(t):
    """Expand 6 components into the full symmetric 3x3 matrix."""
    t = np.asarray(t, dtype=float)
    m = np.empty(t.shape[:-1] + (3, 3))
    for k, (i, j) in enumerate(_IJ):
        m[..., i, j] = t[..., k]
        m[..., j, i] = t[..., k]
    return m


def from_matrix(m):
    """Compress a symmetric 3x3 matrix into 6 components."""
    m = np.asarray(m, dtype=float)
    out = np.empty(m.shape[:-2] + (6,))
    for k, (i, j) in enumerate(_IJ):
        out[..., k] = 0.5 * (m[..., i, j] + m[..., j, i])
    return out


def matvec(t, v):
    """Apply the symmetric tensor to a vector."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(np.broadcast_shapes(t.shape[:-1] + (3,), v.shape))
    out[..., 0] = t[..., 0] * x + t[..., 3] * y + t[..., 4] * z
    out[..., 1] = t[..., 3] * x + t[..., 1] * y + t[..., 5] * z
    out[..., 2] = t[..., 4] * x + t[..., 5] * y + t[..., 2] * z
    return out


def trace(t):
    """tr(t) = xx + yy + zz."""
    t = np.asarray(t, dtype=float)
    return t[..., 0] + t[..., 1] + t[..., 2]


def deviator(t):
    """Trace-free part t - tr(t)/3 * Id."""
    t = np.asarray(t, dtype=float)
    return t - np.multiply.outer(trace(t) / 3.0, IDENTITY)


def frobenius(s, t):
    """Frobenius inner product s : t (off-diagonals counted twice)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.einsum("...c,...c,c->...", s, t, FROBENIUS_WEIGHT)


@dataclass(frozen=True)
class Material:
    """Isotropic material described by the Lame parameters."""

    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0.0 and self.lam > 0.0):
            raise ValueError(f"Lame parameters must be positive, got mu={self.mu}, lam={self.lam}")

    @classmethod
    def from_young_poisson(cls, e_young, nu):
        """Convert (E, nu) to mu = E/(2(1+nu)), lam = E nu/((1+nu)(1-2nu))."""
        mu = e_young / (2.0 * (1.0 + nu))
        lam = e_young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return cls(mu=mu, lam=lam)

    @property
    def bulk3(self):
        """3*lambda + 2*mu, the modulus coupling to the trace part."""
        return 3.0 * self.lam + 2.0 * self.mu


def stiffness_apply(e, m: Material):
    """Stress from strain: C e = 2 mu e + lam tr(e) Id."""
    e = np.asarray(e, dtype=float)
    return 2.0 * m.mu * e + m.lam * np.multiply.outer(trace(e), IDENTITY)


def compliance_apply(t, m: Material):
    """Strain from stress: A t = dev(t)/(2 mu) + tr(t) Id/(3(3 lam + 2 mu))."""
    t = np.asarray(t, dtype=float)
    return deviator(t) / (2.0 * m.mu) + np.multiply.outer(trace(t) / (3.0 * m.bulk3), IDENTITY)
