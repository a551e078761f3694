import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitaryband.core import build_windowed_unitary
from unitaryband.errors import DegenerateCouplingError, SpanTooShortError
from unitaryband.models import AlmostPeriodicPhases, RandomPhases, TProfile, TwoValuedPhases
from unitaryband.transfer import (
    EtaPair,
    eta,
    etas,
    propagate,
    reduced_matrices,
    residual,
    transfer_general,
    transfer_matrices,
    transfer_reduced,
)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.2, 0.95), st.integers(-500, 500), st.floats(0, 6.28))
def test_determinant_is_a_phase(seed, t, k, lam):
    m = RandomPhases(t=t, seed=seed)
    for form in ("general", "reduced"):
        mats, ph = transfer_matrices([k], lam, m, form)
        d = np.linalg.det(mats[0])
        assert abs(abs(d) - 1) < 1e-12
        assert abs(d - np.exp(1j * ph[0])) < 1e-12


def test_reduced_form_is_the_reduced_gauge():
    m = RandomPhases(t=0.35, seed=2).with_gauge("reduced")
    ks = np.arange(-20, 21)
    a, pa = transfer_matrices(ks, 0.7, m, "general")
    b, pb = transfer_matrices(ks, 0.7, m, "reduced")
    assert np.max(np.abs(a - b)) < 1e-13
    assert np.allclose(np.exp(1j * pa), np.exp(1j * pb))


def test_scalar_helpers_agree(random_model):
    k, lam = 3, 1.2
    e = etas([2 * k, 2 * k - 1], lam, random_model)
    assert eta(2 * k, lam, random_model) == pytest.approx(e[0])
    tr = transfer_reduced(EtaPair(e[0], e[1]), random_model.coupling)
    mats, _ = transfer_matrices([k], lam, random_model, "reduced")
    assert np.allclose(tr.entries, mats[0])
    tg = transfer_general(k, lam, random_model)
    assert np.allclose(tg.entries, transfer_matrices([k], lam, random_model)[0][0])
    assert tg.det_defect() < 1e-13
    prod = tg @ tg.inverse()
    assert np.allclose(prod.entries, np.eye(2)) and abs(prod.det - 1) < 1e-15


def test_reduced_matrix_at_pi_pi():
    t = 0.6
    r = 0.8
    m = reduced_matrices(np.pi, np.pi, t)
    ev = np.sort(np.abs(np.linalg.eigvals(m)))
    assert np.allclose(ev, sorted([(r - 1) ** 2 / t ** 2, (r + 1) ** 2 / t ** 2]))


def test_degenerate_coupling_rejected():
    with pytest.raises(DegenerateCouplingError):
        transfer_matrices([1], 0.0, RandomPhases(t=0.0, seed=1))
    with pytest.raises(DegenerateCouplingError):
        transfer_matrices([1], 0.0, RandomPhases(t=0.5, seed=1, t_profile=TProfile("power", 1, 2)))


@pytest.mark.parametrize("form", ["general", "reduced"])
def test_track_solves_window_equation(form):
    # oracle: interior rows of a dense window act like the infinite operator
    m = RandomPhases(t=0.55, seed=17)
    if form == "reduced":
        m = m.with_gauge("reduced")
    lam = 2.1
    tr = propagate(1.0, 0.3j, lam, m, (-8, 8), form=form, renorm_every=10**6)
    psi = np.concatenate([tr.pair(k) for k in tr.ks])
    w = build_windowed_unitary(m, tr.ks.size, 2 * int(tr.ks[0]))
    lhs = w.matrix @ psi
    inner = slice(4, psi.size - 4)
    scale = np.max(np.abs(psi))
    assert np.max(np.abs(lhs[inner] - np.exp(1j * lam) * psi[inner])) / scale < 1e-12
    assert residual(tr, m) < 1e-12
    assert tr.recurrence_defect(m) < 1e-13


def test_long_track_keeps_scale():
    m = RandomPhases(t=0.3, seed=5)
    tr = propagate(1.0, 0.0, 0.4, m, (-3000, 3000), form="reduced")
    ln = tr.log_norms()
    assert np.all(np.isfinite(ln))
    # positive growth in both directions from the anchor
    assert ln[-1] > 1000 and ln[0] > 1000
    assert residual(tr, m.with_gauge("reduced")) < 1e-9


def test_residual_needs_span():
    tr = propagate(1.0, 0.0, 0.4, RandomPhases(t=0.3, seed=5), (0, 1))
    with pytest.raises(SpanTooShortError):
        residual(tr, RandomPhases(t=0.3, seed=5))


def test_csv_is_deterministic(tmp_path):
    m = TwoValuedPhases(t=0.6, theta_e=0.3, theta_o=1.1, alpha_e=0.4, alpha_o=2.0)
    for name in ("a.csv", "b.csv"):
        propagate(1.0, 1j, 1.0, m, (-5, 5)).to_csv(tmp_path / name)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_quasi_periodic_track_is_finite():
    m = AlmostPeriodicPhases(t=0.5, beta=(np.sqrt(5) - 1) / 2)
    tr = propagate(0.0, 1.0, 0.2, m, (-200, 200), form="reduced")
    assert np.all(np.isfinite(tr.log_norms()))
