import math

import numpy as np
import pytest

from unitaryband.errors import DegenerateCouplingError, SpanTooShortError
from unitaryband.halfline import period_matrix
from unitaryband.lyapunov import (
    approximant_difference,
    cocycle_exponents,
    estimate_gamma,
    gamma_profile,
    gordon_ratio,
    herman_average,
    herman_bound,
    herman_circle_mean,
    irreducibility_certificate,
    noncompact_witness,
)
from unitaryband.models import AlmostPeriodicPhases, CouplingPair, RandomPhases, TwoValuedPhases
from unitaryband.transfer import CoefficientTrack, propagate

GOLDEN = (math.sqrt(5) - 1) / 2


def test_cocycle_exponents_on_diagonal_products():
    # diag(e, 1/e) has exponents +1 and -1 exactly
    steps = 400
    mats = np.broadcast_to(np.diag([math.e, 1 / math.e]), (1, steps, 2, 2)).astype(complex)
    g, s = cocycle_exponents([mats], steps, batches=20, v0=np.array([[1.0, 0.0]]))
    assert g[0] == pytest.approx(1.0, abs=1e-9)
    assert s[0] < 1e-9


@pytest.mark.parametrize("t", [0.3, 0.5, 0.8])
def test_random_exponent_is_ln_inverse_t_squared(t):
    # empirical oracle: for uniform phases the exponent equals ln(1/t**2)
    est = estimate_gamma(1.0, RandomPhases(t=t, seed=99), 40_000, seed=99)
    assert est.lower > 0
    assert est.gamma_hat == pytest.approx(-2 * math.log(t), abs=max(5 * est.stderr, 0.01))


def test_gamma_independent_of_representation_and_direction():
    m = RandomPhases(t=0.5, seed=4)
    a = estimate_gamma(0.3, m, 20_000)
    b = estimate_gamma(0.3, m, 20_000, representation="real")
    c = estimate_gamma(0.3, m, 20_000, direction="backward")
    assert a.gamma_hat == pytest.approx(b.gamma_hat, abs=1e-9)
    assert c.gamma_hat == pytest.approx(a.gamma_hat, abs=0.05)


def test_periodic_gap_exponent_matches_discriminant(two_valued):
    arcs_gap = 0.5 * (3.6607 + 6.1057)      # middle of the upper gap
    est = estimate_gamma(arcs_gap, two_valued, 5_000)
    assert est.gamma_hat == pytest.approx(math.log(period_matrix(arcs_gap, two_valued).abs_e1),
                                          rel=1e-3)


def test_gamma_profile_reproducible(tmp_path):
    m = RandomPhases(t=0.5, seed=1)
    grid = np.linspace(0, 6, 4)
    a = gamma_profile(grid, m, 2_000, seed=5)
    b = gamma_profile(grid, m, 2_000, seed=5)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.min_lower() > 0


def test_herman_bound_and_circle_mean():
    c = CouplingPair.from_t(0.5)
    assert herman_bound(c) == pytest.approx(math.log(4))
    m = AlmostPeriodicPhases(t=0.5, beta=GOLDEN)
    # subharmonicity gives the bound at every finite length
    for n in (1, 5, 40):
        assert herman_circle_mean(m, n, n_theta=64) >= math.log(4) - 1e-9
    with pytest.raises(DegenerateCouplingError):
        herman_bound(CouplingPair.from_t(1.0))


def test_herman_average_small():
    mean, vals = herman_average(AlmostPeriodicPhases(t=0.5, beta=GOLDEN), 8, steps=5_000)
    assert vals.shape == (8,)
    assert mean > math.log(4) - 0.05


def test_noncompact_witness_values():
    w = noncompact_witness(CouplingPair.from_t(0.6))
    assert w.values == pytest.approx((1 / 9, 9))
    assert np.allclose(w.tau_eigenvalues, [1 / 9, 1 / 9, 9, 9], atol=1e-10)


@pytest.mark.parametrize("t", [0.3, 0.6, 0.9])
def test_certificate_structure(t):
    cert = irreducibility_certificate(CouplingPair.from_t(t))
    assert cert.structure_ok and cert.no_invariant_span
    assert cert.algebra_dimension == 8 and cert.irreducible
    # one stated relation targets the wrong vector; its corrected form holds
    assert cert.failed_stated == ["N1u3"]
    assert cert.corrected_ok


def test_gordon_ratio_periodic_and_decaying():
    # periodic cocycle: the ratio is at least 1/4 for any start
    m = TwoValuedPhases(t=0.6, theta_e=0.3, theta_o=1.1, alpha_e=0.4, alpha_o=2.0)
    for a in np.linspace(0, np.pi, 7):
        tr = propagate(np.cos(a), np.sin(a), 1.0, m, (-6, 12), form="reduced")
        assert gordon_ratio(tr, 6) >= 0.25
    ks = np.arange(-10, 21)
    pairs = np.stack([np.exp(-0.5 * np.abs(ks)), np.zeros(ks.size)], axis=1).astype(complex)
    fake = CoefficientTrack(ks, pairs, np.zeros(ks.size), 1.0)
    assert gordon_ratio(fake, 5) == pytest.approx(math.exp(-5), rel=1e-12)
    with pytest.raises(SpanTooShortError):
        gordon_ratio(fake, 11)


def test_approximant_difference_shrinks():
    m = AlmostPeriodicPhases(t=0.5, beta=1 / 3 + 1e-9)
    assert approximant_difference(m, 1, 3, 0.5, 6) < 1e-6
