"""Tensor algebra and material-law unit tests."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nnelast import symtensor as st
from nnelast.symtensor import Material

NUS = (0.3, 0.45, 0.49, 0.4999)


def test_sym_outer_unit_vectors():
    t = st.sym_outer(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    assert_allclose(t, [0, 0, 0, 0.5, 0, 0], atol=0)


def test_sym_outer_same_vector():
    t = st.sym_outer(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]))
    assert_allclose(t, [1, 0, 0, 0, 0, 0], atol=0)


def test_sym_outer_reference_edge_pair():
    # e_{2,3} = (0,0,1), e_{2,4} = (0,1,0); the normal scaling of the first
    # face tensor turns the 1/2 into 3/2
    t = st.sym_outer(np.array([0.0, 0, 1]), np.array([0.0, 1, 0]))
    assert_allclose(t, [0, 0, 0, 0, 0, 0.5], atol=0)
    n1 = -np.array([-1.0, -1.0, -1.0]) / np.sqrt(3.0)
    scale = (n1 @ [0, 0, 1]) * (n1 @ [0, 1, 0])
    assert_allclose(st.to_matrix(t / scale)[1, 2], 1.5, rtol=1e-14)


def test_matrix_round_trip():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((5, 6))
    m = st.to_matrix(t)
    assert_allclose(m, np.swapaxes(m, -1, -2), atol=0)
    assert_allclose(st.from_matrix(m), t, atol=0)


def test_trace_identity():
    assert st.trace(st.IDENTITY) == 3.0


def test_trace_of_deviator_vanishes():
    rng = np.random.default_rng(1)
    t = rng.standard_normal((100, 6))
    assert np.abs(st.trace(st.deviator(t))).max() < 1e-15 * np.abs(t).max()


def test_deviator_examples():
    assert_allclose(st.deviator(st.IDENTITY), np.zeros(6), atol=0)
    d = st.deviator(np.array([1.0, 0, 0, 0, 0, 0]))
    assert_allclose(d, [2 / 3, -1 / 3, -1 / 3, 0, 0, 0], rtol=1e-15)


def test_deviator_is_projection():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((20, 6))
    assert_allclose(st.deviator(st.deviator(t)), st.deviator(t), atol=1e-15)


def test_dev_trace_split():
    rng = np.random.default_rng(3)
    t = rng.standard_normal((100, 6))
    recomposed = st.deviator(t) + np.multiply.outer(st.trace(t) / 3.0, st.IDENTITY)
    assert np.abs(recomposed - t).max() < 1e-15


def test_frobenius_counts_off_diagonals_twice():
    t = np.array([0.0, 0, 0, 1, 0, 0])
    assert st.frobenius(t, t) == 2.0
    full = st.to_matrix(t)
    assert st.frobenius(t, t) == (full * full).sum()


def test_material_from_young_poisson():
    m = Material.from_young_poisson(1.0, 0.3)
    assert_allclose(m.mu, 1.0 / 2.6, rtol=1e-15)
    assert_allclose(m.lam, 0.3 / (1.3 * 0.4), rtol=1e-15)


def test_material_rejects_nonpositive():
    with pytest.raises(ValueError):
        Material(mu=1.0, lam=-0.5)
    with pytest.raises(ValueError):
        Material(mu=0.0, lam=1.0)


def test_stiffness_examples():
    m = Material.from_young_poisson(1.0, 0.3)
    assert_allclose(st.stiffness_apply(st.IDENTITY, m), (2 * m.mu + 3 * m.lam) * st.IDENTITY, rtol=1e-15)
    assert_allclose(st.stiffness_apply(np.zeros(6), m), np.zeros(6), atol=0)


def test_stiffness_trace_linearity():
    m = Material.from_young_poisson(1.0, 0.3)
    rng = np.random.default_rng(4)
    e = rng.standard_normal((50, 6))
    assert_allclose(st.trace(st.stiffness_apply(e, m)), (2 * m.mu + 3 * m.lam) * st.trace(e), rtol=1e-13)


def test_compliance_examples():
    m = Material.from_young_poisson(1.0, 0.3)
    assert_allclose(st.compliance_apply(st.IDENTITY, m), st.IDENTITY / (3 * m.lam + 2 * m.mu), rtol=1e-15)
    t = np.array([1.0, -1.0, 0.0, 0.7, -0.2, 0.9])  # trace free
    assert_allclose(st.compliance_apply(t, m), t / (2 * m.mu), rtol=1e-15)


@pytest.mark.parametrize("nu", NUS)
def test_compliance_stiffness_inverse_pair(nu):
    m = Material.from_young_poisson(1.0, nu)
    rng = np.random.default_rng(int(nu * 1e4))
    eps = rng.standard_normal((100, 6))
    back = st.compliance_apply(st.stiffness_apply(eps, m), m)
    assert np.abs(back - eps).max() / np.abs(eps).max() < 1e-12
    sig = rng.standard_normal((100, 6))
    forth = st.stiffness_apply(st.compliance_apply(sig, m), m)
    assert np.abs(forth - sig).max() / np.abs(sig).max() < 1e-12


@pytest.mark.parametrize("nu", NUS)
def test_compliance_positive(nu):
    m = Material.from_young_poisson(1.0, nu)
    rng = np.random.default_rng(100 + int(nu * 1e4))
    tau = rng.standard_normal((100, 6))
    vals = st.frobenius(st.compliance_apply(tau, m), tau)
    assert (vals > 0.0).all()
