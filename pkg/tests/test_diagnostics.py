import json

import numpy as np
import pytest

from unitaryband.diagnostics import (
    edge_mask,
    empirical_independence,
    essential_spectrum_compare,
    growth_scan,
    localization_profile,
    multiset_distance,
    truncated_spectrum,
)
from unitaryband.errors import BudgetExceededError, WrongVariantError
from unitaryband.halfline import discriminant_profile, period_matrix
from unitaryband.lyapunov import estimate_gamma
from unitaryband.models import RandomPhases


def test_truncated_spectrum_unimodular(random_model):
    cloud = truncated_spectrum(random_model, 64)
    assert cloud.size == 64 and cloud.modulus_defect < 1e-12
    assert np.all(np.diff(cloud.angles) >= 0)
    with pytest.raises(ValueError):
        truncated_spectrum(random_model, 63)
    with pytest.raises(BudgetExceededError):
        truncated_spectrum(random_model, 5000)


def test_schur_vectors_orthonormal(two_valued):
    cloud = truncated_spectrum(two_valued, 80, True)
    v = cloud.vectors
    assert np.allclose(v.conj().T @ v, np.eye(80), atol=1e-12)


def test_cloud_csv(random_model, tmp_path):
    cloud = truncated_spectrum(random_model, 32)
    cloud.to_csv(tmp_path / "a.csv")
    truncated_spectrum(random_model, 32).to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_multiset_distance():
    a = np.array([0.01, 1.0, 3.0])
    b = np.array([2 * np.pi - 0.01, 1.0, 3.0])
    assert multiset_distance(a, b) == pytest.approx(0.02)
    assert multiset_distance(a, b[:2]) == np.inf
    assert multiset_distance([], []) == 0.0


def test_edge_mask_splits_fraction_over_both_ends():
    n = 100
    v = np.zeros((n, 3))
    v[0, 0] = 1.0                    # pinned at the left edge
    v[n - 1, 1] = 1.0                # pinned at the right edge
    v[:, 2] = 1.0                    # extended: 6% of its mass is in the outer 3+3 sites
    assert edge_mask(v).tolist() == [True, True, False]


def test_localization_rate_on_synthetic_vector():
    n = 200
    sites = np.arange(n)
    psi = np.exp(-0.3 * np.abs(sites - 90))[:, None]
    from unitaryband.diagnostics import SpectralCloud
    prof = localization_profile(SpectralCloud(np.zeros(1), psi / np.linalg.norm(psi), 0, n,
                                              "full", None, 0.0))
    assert prof.decay_rate[0] == pytest.approx(0.6, rel=1e-9)
    assert prof.peak[0] == 90 and prof.bulk[0]


def test_localization_matches_lyapunov():
    m = RandomPhases(t=0.5, seed=5)
    prof = localization_profile(truncated_spectrum(m, 512, True))
    assert prof.positive_fraction() > 0.9
    gamma = estimate_gamma(np.pi / 3, m, 20_000).gamma_hat
    assert 0.5 < prof.median_rate() / gamma < 2.0


def test_gauge_compare(defect_model):
    res = essential_spectrum_compare(defect_model, defect_model.with_gauge("reduced"), 120)
    assert res.distance < 1e-11 and res.kept_a == res.kept_b > 0


def test_growth_scan_gap_and_band(two_valued):
    prof = discriminant_profile(two_valued)
    lo, hi = prof.gaps[0]
    mid_gap = 0.5 * (lo + hi)
    lo, hi = prof.bands.arcs[0]
    mid_band = 0.5 * (lo + hi)
    g = growth_scan([mid_gap, mid_band], two_valued, span=400)
    assert g[0] == pytest.approx(np.log(period_matrix(mid_gap, two_valued).abs_e1), rel=1e-2)
    assert abs(g[1]) < 5e-3


def test_independence_uniform_and_biased(tmp_path):
    tab = empirical_independence(RandomPhases(t=0.5, seed=3), samples=20_000, max_harmonic=1)
    assert tab.factorizes
    assert tab.uniformity_residual < 4 * tab.bound
    doc = json.loads(tab.to_json(tmp_path / "i.json"))
    assert doc["bound"] == pytest.approx(4 / np.sqrt(20_000))
    # two-point phases: eta_{2k} and eta_{2k-1} share theta_{2k-1}
    biased = RandomPhases(t=0.5, seed=3, distribution={"kind": "atoms", "atoms": [0.0, 1.0]})
    assert not empirical_independence(biased, samples=20_000, max_harmonic=2).factorizes


def test_independence_needs_random(two_valued):
    with pytest.raises(WrongVariantError):
        empirical_independence(two_valued, samples=10)
