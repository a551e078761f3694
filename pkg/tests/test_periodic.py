import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitaryband.arcs import TWO_PI
from unitaryband.core import scattering_blocks
from unitaryband.diagnostics import multiset_distance
from unitaryband.errors import WrongVariantError
from unitaryband.models import CouplingPair, PeriodicPhases, RandomPhases, TwoValuedPhases
from unitaryband.periodic import (
    NuPhases,
    band_arcs,
    band_functions,
    limit_spectrum,
    model_band_arcs,
    nu_phases,
    symbol,
    symbol_matrix,
    t1_eigenvalues,
    two_periodic_closed_form,
    two_periodic_eigenvalues,
)


def ring_spectrum(model, sites):
    """Eigenvalue angles of the operator closed into a ring of ``sites`` sites."""
    th, al, ga = model.phases(np.arange(sites))
    s = scattering_blocks(th, al, ga, model.t)
    u = {0: np.zeros((sites, sites), complex), 1: np.zeros((sites, sites), complex)}
    for j in range(sites):
        m, n = j, (j + 1) % sites
        blk = u[j % 2]
        blk[m, m], blk[m, n], blk[n, m], blk[n, n] = s[j, 0, 0], s[j, 0, 1], s[j, 1, 0], s[j, 1, 1]
    return np.mod(np.angle(np.linalg.eigvals(u[1] @ u[0])), TWO_PI)


@pytest.mark.parametrize("theta", [(0.3, 1.1), (0.3, 1.1, 2.0), (0.1, 0.9, 1.7, 2.5)])
def test_symbol_reproduces_ring_spectrum(theta):
    # oracle: a ring of L cells of 2N sites has Bloch phases 2 pi j / L per
    # cell, and the symbol variable advances by x per transfer step
    # (alpha = 0 keeps the ring free of a net gauge flux)
    model = PeriodicPhases(t=0.45, theta=theta, pi=(0.0,) * len(theta))
    nu = nu_phases(model)
    cells = 6
    ring = ring_spectrum(model, 2 * nu.N * cells)
    x = np.pi * np.arange(cells) / (nu.N * cells)
    ev = np.linalg.eigvals(symbol(x, nu, model.coupling)).ravel()
    assert multiset_distance(ring, np.angle(ev)) < 1e-10


def test_symbol_unitary_up_to_n8(rng):
    xs = TWO_PI * np.arange(512) / 512
    for n in range(1, 9):
        nu = NuPhases(rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n))
        sm = symbol_matrix(nu, CouplingPair.from_t(rng.uniform(0, 1)))
        assert sm.size == 2 * n
        assert sm.unitarity_defect(xs) < 1e-12


def test_nu_phases_two_valued(two_valued):
    nu = nu_phases(two_valued)
    assert nu.N == 1
    assert nu.nu_plus[0] == pytest.approx(np.mod(two_valued.theta_sum - two_valued.delta, TWO_PI))
    assert nu.nu_minus[0] == pytest.approx(np.mod(two_valued.theta_sum + two_valued.delta, TWO_PI))
    with pytest.raises(WrongVariantError):
        nu_phases(RandomPhases(t=0.5, seed=1))
    with pytest.raises(ValueError):
        nu_phases(two_valued.with_defects([(0, 1.0, 1.0, 0.0)]))


# gaps close at delta = 0 and delta = pi, where band edges are only accurate to sqrt(eps)
@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, np.pi - 0.01), st.booleans(), st.floats(0, TWO_PI), st.floats(-1, 1),
       st.floats(0.05, 0.95))
def test_closed_form_matches_symbol(delta, flip, theta_sum, a, t):
    delta = -delta if flip else delta
    c = CouplingPair.from_t(t)
    model = TwoValuedPhases.from_invariants(delta, theta_sum, a, t=t)
    x = np.linspace(0, TWO_PI, 17)
    ev = np.linalg.eigvals(symbol(x, nu_phases(model), c)) * np.exp(-1j * a)
    cf = two_periodic_eigenvalues(-x, model.delta, model.theta_sum, a, c)
    for i in range(x.size):
        assert multiset_distance(np.angle(ev[i]), np.angle(cf[i])) < 1e-10
    arcs = model_band_arcs(model)
    assert arcs.endpoint_distance(two_periodic_closed_form(model.delta, model.theta_sum, a, c)) < 1e-10


def test_band_functions_are_tracks(two_valued):
    nu = nu_phases(two_valued)
    bands = band_functions(nu, two_valued.coupling, TWO_PI * np.arange(64) / 64)
    assert bands.n_tracks == 2
    assert bands.unimodularity_defect() < 1e-13
    assert np.max(np.abs(np.diff(bands.angles, axis=0))) < 0.2
    with pytest.raises(ValueError):
        band_functions(nu, two_valued.coupling, [0.0, 1.0])


def test_degenerate_band_is_a_point():
    # t = 0: every band function is constant
    nu = NuPhases([0.3, 1.0], [2.0, 4.0])
    bands = band_functions(nu, CouplingPair.from_t(0.0), TWO_PI * np.arange(32) / 32)
    arcs = band_arcs(bands)
    assert not arcs.arcs
    assert np.allclose(sorted(arcs.points), limit_spectrum(nu, "t=0"))


def test_limits(rng):
    nu = NuPhases(rng.uniform(0, TWO_PI, 3), rng.uniform(0, TWO_PI, 3))
    x = rng.uniform(0, TWO_PI, 40)
    ev0 = np.linalg.eigvals(symbol(x, nu, CouplingPair.from_t(0.0)))
    assert np.allclose(np.sort(np.mod(np.angle(ev0), TWO_PI), axis=1),
                       np.broadcast_to(limit_spectrum(nu, "t=0"), (40, 6)), atol=1e-14)
    ev1 = np.linalg.eigvals(symbol(x, nu, CouplingPair.from_t(1.0)))
    fam = t1_eigenvalues(nu, x)
    for i in range(40):
        assert multiset_distance(np.angle(ev1[i]), np.angle(fam[i])) < 1e-10
    # the unshifted families differ by an overall sign
    raw = t1_eigenvalues(nu, x, shifted=False)
    for i in range(40):
        assert multiset_distance(np.angle(ev1[i]), np.angle(-raw[i])) < 1e-10
    assert limit_spectrum(nu, "t=1").full_circle


def test_csv_round_trip(tmp_path, two_valued):
    nu = nu_phases(two_valued)
    b = band_functions(nu, two_valued.coupling, TWO_PI * np.arange(16) / 16)
    b.to_csv(tmp_path / "b.csv")
    data = np.loadtxt(tmp_path / "b.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1] + 1j * data[:, 2], b.values[:, 0])
