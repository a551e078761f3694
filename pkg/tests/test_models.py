import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitaryband.errors import ConfigError
from unitaryband.models import (
    AlmostPeriodicPhases,
    CouplingPair,
    EvenExtension,
    ExplicitPhases,
    PeriodicPhases,
    RandomPhases,
    TProfile,
    TwoValuedPhases,
    circular_distance,
    model_from_dict,
    wrap_angle,
)

TWO_PI = 2 * np.pi


def test_coupling_from_t():
    c = CouplingPair.from_t(0.6)
    assert c.r == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        CouplingPair(t=0.6, r=0.7)
    with pytest.raises(ValueError):
        CouplingPair.from_t(1.2)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_angle_range(x):
    y = wrap_angle(x)
    assert 0.0 <= y < TWO_PI
    assert circular_distance(x, y) < 1e-9


def test_random_phases_are_site_addressable():
    m = RandomPhases(t=0.5, seed=3)
    th, al, ga = m.phases(np.arange(-50, 50))
    th2, al2, ga2 = m.phases([7, -13, 7])
    assert th2[0] == th[57] and th2[1] == th[37] and th2[2] == th2[0]
    assert al2[1] == al[37] and ga2[0] == ga[57]
    # a different seed gives different phases
    assert not np.allclose(RandomPhases(t=0.5, seed=4).phases(np.arange(10))[0], th[50:60])


def test_random_phases_look_uniform():
    th, al, ga = RandomPhases(t=0.5, seed=5).phases(np.arange(200_000))
    for x in (th, al, ga):
        assert np.all((x >= 0) & (x < TWO_PI))
        assert abs(np.mean(np.exp(1j * x))) < 0.01


def test_atom_distribution():
    m = RandomPhases(t=0.5, seed=1, distribution={"kind": "atoms", "atoms": [0.0, np.pi / 2],
                                                   "weights": [1, 3]})
    th, al, _ = m.phases(np.arange(40_000))
    assert set(np.round(th, 12)) <= {0.0, round(np.pi / 2, 12)}
    assert np.mean(th > 0) == pytest.approx(0.75, abs=0.01)


def test_periodic_rule():
    m = PeriodicPhases(t=0.3, theta=(0.1, 0.2, 0.3), pi=(1.0, 2.0, 3.0), a=0.5)
    th, al, ga = m.phases([0, 1, 2, 3, -1])
    assert np.allclose(th, [0.1, 0.2, 0.3, 0.1, 0.3])
    assert np.allclose(al, wrap_angle(np.array([1.0, 2.5, 4.0, 2.5, 2.5])))
    assert np.all(ga == 0)
    assert m.pair_period == 3
    assert TwoValuedPhases(t=0.5, theta_e=0, theta_o=0, alpha_e=0, alpha_o=0).pair_period == 1


def test_defects_override():
    m = PeriodicPhases(t=0.3, theta=(0.1, 0.2), pi=(0.0, 0.0), defects=((4, 1.0, 2.0, 3.0),))
    th, al, ga = m.phases([2, 4, 6])
    assert th[1] == 1.0 and al[1] == 2.0 and ga[1] == 3.0
    assert th[0] == th[2] == pytest.approx(0.1)


def test_gauges():
    m = RandomPhases(t=0.5, seed=2)
    k = np.arange(-4, 5)
    _, al, _ = m.phases(k)
    assert np.all(m.with_gauge("zero").phases(k)[2] == 0)
    red = m.with_gauge("reduced").phases(k)[2]
    assert np.allclose(red, wrap_angle(np.where(k % 2 == 1, al, -al)))


def test_t_profile():
    p = TProfile("power", 1.0, 2.0)
    assert np.allclose(p.apply(0.6, np.array([0, 1, 2, -2, 10])), [0.6, 0.0, 0.35, 0.35, 0.59])
    s = TProfile("subsequence", 1.0, 2.0)
    out = s.apply(0.6, np.arange(0, 17))
    assert out[4] == pytest.approx(0.3) and out[9] == pytest.approx(0.2) and out[5] == 0.6


def test_even_extension_mirrors():
    base = RandomPhases(t=0.5, seed=9)
    ev = EvenExtension(base=base)
    assert np.array_equal(ev.phases([-5, -1, 0])[0], base.phases([5, 1, 0])[0])


def test_explicit_extensions():
    m = ExplicitPhases(t=0.5, theta=(1.0, 2.0), alpha=(0.0, 0.5), start=10, extension="zero")
    th, _, _ = m.phases([9, 10, 11, 12])
    assert np.allclose(th, [0.0, 1.0, 2.0, 0.0])
    assert m.period is None


def test_almost_periodic_phases():
    m = AlmostPeriodicPhases(t=0.5, beta=0.25, theta0=0.1)
    th, al, _ = m.phases([0, 1, 4])
    assert np.allclose(th, [0.1, 0.1 + np.pi / 2, 0.1])
    with pytest.raises(ValueError):
        AlmostPeriodicPhases(t=0.5, beta=1.5)


@settings(max_examples=30)
@given(st.sampled_from(["random", "periodic", "two_valued", "almost_periodic", "explicit"]),
       st.floats(0.0, 1.0))
def test_json_round_trip(kind, t):
    docs = {
        "random": {"variant": "random", "t": t, "seed": 5},
        "periodic": {"variant": "periodic", "t": t, "theta": [0.1, 0.2, 0.3], "pi": [0, 1, 2]},
        "two_valued": {"variant": "two_valued", "t": t, "theta": [0.1, 0.2], "pi": [0.3, 0.4]},
        "almost_periodic": {"variant": "almost_periodic", "t": t, "beta": 0.3},
        "explicit": {"variant": "explicit", "t": t, "theta": [1.0], "alpha": [2.0]},
    }
    m = model_from_dict(docs[kind])
    again = model_from_dict(json.loads(m.to_json()))
    k = np.arange(-6, 7)
    for a, b in zip(m.phases(k), again.phases(k)):
        assert np.array_equal(a, b)
    assert again.t == m.t


def test_model_errors_name_the_field():
    with pytest.raises(ConfigError) as err:
        model_from_dict({"variant": "periodic", "t": 0.5, "theta": [0.1, 0.2]})
    assert err.value.field == "pi"
    with pytest.raises(ConfigError) as err:
        model_from_dict({"variant": "nope"})
    assert err.value.field == "variant"
    with pytest.raises(ConfigError) as err:
        RandomPhases.from_json('{"variant": "random",\n "t": }')
    assert err.value.line == 2
