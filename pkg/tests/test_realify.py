import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from unitaryband.realify import Real4, frobenius, rho, rho_inverse, tau, tau_matrix, untau, verify_algebra

finite = st.floats(-10, 10, allow_nan=False)
mat = arrays(np.float64, (2, 2, 2), elements=finite).map(lambda a: a[0] + 1j * a[1])
vec = arrays(np.float64, (2, 2), elements=finite).map(lambda a: a[0] + 1j * a[1])


@settings(max_examples=60)
@given(mat, mat, vec)
def test_homomorphism_and_intertwining(a, b, u):
    assert np.allclose(tau_matrix(a @ b), tau_matrix(a) @ tau_matrix(b), atol=1e-9)
    assert np.allclose(tau_matrix(a.conj().T), tau_matrix(a).T)
    assert np.allclose(rho(a @ u), tau_matrix(a) @ rho(u), atol=1e-9)
    assert np.allclose(untau(tau_matrix(a)), a)
    assert np.allclose(rho_inverse(rho(u)), u)


@given(mat)
def test_norm_scaling(a):
    assert np.isclose(np.linalg.norm(tau_matrix(a)), np.sqrt(2) * frobenius(a), atol=1e-12)


def test_eigenvalues_double():
    a = np.array([[2.0, 1j], [0.5, -1 + 1j]])
    ev = np.sort_complex(np.linalg.eigvals(a))
    ev4 = np.sort_complex(np.linalg.eigvals(tau_matrix(a)))
    # the real image carries each eigenvalue together with its conjugate
    expected = np.sort_complex(np.concatenate([ev, ev.conj()]))
    assert np.allclose(ev4, expected)


def test_real4_wrapper():
    a = np.array([[1.0, 2j], [3.0, 4.0]])
    t = tau(a)
    assert isinstance(t, Real4)
    assert np.allclose((t @ t).matrix, tau_matrix(a @ a))
    assert np.isclose(t.det(), abs(np.linalg.det(a)) ** 2)
    assert np.allclose(t.transpose().matrix, t.matrix.T)


def test_verify_algebra_report(tmp_path):
    rep = verify_algebra(1000, seed=3, path=tmp_path / "r.json")
    assert max(rep.values()) < 1e-12
    assert rep["norm_sqrt2"] < 1e-12 and rep["intertwining"] < 1e-13
    assert (tmp_path / "r.json").exists()
