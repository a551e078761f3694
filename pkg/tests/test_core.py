import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitaryband.core import (
    apply_monodromy,
    build_windowed_unitary,
    classify_tridiagonal,
    gauge_phases,
    scattering_block,
    scattering_blocks,
)
from unitaryband.errors import WindowTooSmallError
from unitaryband.models import CouplingPair, PhaseTriple, RandomPhases, TProfile

angles = st.floats(0, 2 * np.pi)


@given(angles, angles, angles, st.floats(0, 1))
def test_scattering_block_is_unitary(th, al, ga, t):
    s = scattering_block(PhaseTriple(th, al, ga), CouplingPair.from_t(t))
    assert np.allclose(s.conj().T @ s, np.eye(2), atol=1e-14)
    # det = exp(-2i theta) independently of the other phases
    assert abs(np.linalg.det(s) - np.exp(-2j * th)) < 1e-14


def test_vectorised_blocks_match_scalar(rng):
    th, al, ga = rng.uniform(0, 6, (3, 5))
    b = scattering_blocks(th, al, ga, 0.3)
    for i in range(5):
        assert np.allclose(b[i], scattering_block(PhaseTriple(th[i], al[i], ga[i]),
                                                  CouplingPair.from_t(0.3)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 1), st.integers(2, 40), st.integers(-30, 30))
def test_window_is_unitary_and_pentadiagonal(seed, t, blocks, offset):
    w = build_windowed_unitary(RandomPhases(t=t, seed=seed), blocks, offset)
    assert w.size == 2 * blocks
    assert w.unitarity_defect() < 1e-13
    assert w.bandwidth(1e-15) <= 2


def test_window_with_t_profile_is_unitary():
    m = RandomPhases(t=0.7, seed=1, t_profile=TProfile("power", 1.0, 2.0))
    assert build_windowed_unitary(m, 30, -30).unitarity_defect() < 1e-13


def test_window_too_small():
    with pytest.raises(WindowTooSmallError):
        build_windowed_unitary(RandomPhases(t=0.5, seed=1), 1)


def test_t_zero_spectrum_is_block_diagonal():
    m = RandomPhases(t=0.0, seed=4)
    w = build_windowed_unitary(m, 10, 0)
    th, al, _ = m.phases(w.sites)
    # at t = 0 each site only sees its two reflections
    diag = np.diag(w.matrix)
    assert np.allclose(w.matrix, np.diag(diag), atol=0)
    # interior even site 2k: reflected by S_{2k} (alpha sign -) then S_{2k-1} (alpha sign +)
    j = 4
    want = np.exp(-1j * (th[j] + al[j])) * np.exp(-1j * (th[j - 1] - al[j - 1]))
    assert diag[j] == pytest.approx(want, abs=1e-15)


def test_stencil_matches_window(rng):
    m = RandomPhases(t=0.45, seed=21)
    w = build_windowed_unitary(m, 20, -10)
    c = rng.normal(size=w.size) + 1j * rng.normal(size=w.size)
    res = apply_monodromy(c, m, start=w.start)
    full = w.matrix @ c
    tr = res.trusted
    assert tr.sum() >= w.size - 6
    assert np.max(np.abs(res.values[tr] - full[tr])) < 1e-13


def test_gauge_conjugation_removes_gamma():
    m = RandomPhases(t=0.4, seed=8)
    w = build_windowed_unitary(m, 12, 0)
    w0 = build_windowed_unitary(m.with_gauge("zero"), 12, 0)
    _, _, ga = m.phases(w.sites)
    d = np.exp(1j * gauge_phases(ga))
    conj = (w.matrix * d[None, :]) / d[:, None]
    assert np.max(np.abs(conj - w0.matrix)) < 1e-13


def _block_unitary(rng, sizes):
    n = sum(sizes)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for s in sizes:
        q, _ = np.linalg.qr(rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s)))
        out[i:i + s, i:i + s] = q
        i += s
    return out


def test_classifier_cases(rng):
    shift = np.roll(np.eye(7), 1, axis=0) * np.exp(1j * rng.uniform(0, 6, 7))[:, None]
    c = classify_tridiagonal(shift)
    assert c.kind == "shift_like" and c.cyclic
    blocks = _block_unitary(rng, [2, 1, 2, 2])
    c = classify_tridiagonal(blocks)
    assert c.kind == "block_decomposition" and c.block_sizes == (2, 1, 2, 2)
    penta = build_windowed_unitary(RandomPhases(t=0.5, seed=3), 5).matrix
    assert classify_tridiagonal(penta).kind == "not_tridiagonal"
    assert classify_tridiagonal(2 * np.eye(3)).kind == "not_unitary"
