import math

import numpy as np
import pytest

from shelving import springmodel as sm
from shelving.errors import AmbiguousModes, DegenerateDressing
from shelving.liouvillian import SystemParams

CASES = [
    SystemParams.from_ratio(gamma3=1e-3, a=0.3, rabi=6.0),
    SystemParams.from_ratio(gamma3=1e-3, a=1.0, rabi=8.0, detuning=2.0),
    SystemParams.from_ratio(gamma3=1e-4, a=0.1, rabi=10.0, detuning=-5.0),
]


def test_dressed_angle_matches_direct_formula():
    p = SystemParams(rabi=3.0, detuning=1.2)
    w, d = p.rabi, p.detuning
    s = w / (math.sqrt(2) * math.sqrt(d * d + w * w - d * math.hypot(d, w)))
    ang = sm.dressed_angle(p)
    assert ang.sin_t == pytest.approx(s, rel=1e-12)
    assert ang.sin_t ** 2 + ang.cos_t ** 2 == pytest.approx(1)


def test_dressed_states_diagonalize_hamiltonian():
    p = SystemParams(rabi=3.0, detuning=-0.7)
    h = np.array([[p.detuning, -p.rabi / 2], [-p.rabi / 2, 0.0]])  # basis (|1>, |3>)
    a = sm.dressed_angle(p)
    plus = np.array([a.cos_t, a.sin_t])
    minus = np.array([-a.sin_t, a.cos_t])
    off = plus @ h @ minus
    assert abs(off) < 1e-12


def test_stable_for_large_detuning():
    ang = sm.dressed_angle(SystemParams(rabi=1e-4, detuning=-1e4))
    assert 0 < ang.sin_t < 1e-7


def test_degenerate_dressing():
    with pytest.raises(DegenerateDressing):
        sm.dressed_angle(SystemParams(gamma2=1e-3, gamma3=1e-3))


@pytest.mark.parametrize("p", CASES)
def test_column_sums_zero(p):
    assert np.max(np.abs(sm.secular_matrix(p).sum(axis=0))) < 1e-13


@pytest.mark.parametrize("p", CASES)
def test_spring_is_square_of_rate_matrix(p):
    m = sm.secular_matrix(p)
    assert np.allclose(sm.spring_system(p).f, m @ m, rtol=1e-10, atol=1e-16)


@pytest.mark.parametrize("p", CASES)
def test_eigenvalues_first_order(p):
    ms = sm.modes(p)
    gb, gc, _ = sm.mode_widths_weighted(p)
    g3 = p.gamma3
    assert abs(ms.a.eigenvalue) < 1e-12
    assert abs(-ms.b.eigenvalue.real / gb - 1) <= 5 * g3
    assert abs(-ms.c.eigenvalue.real / gc - 1) <= 5 * g3


@pytest.mark.parametrize("p", CASES)
def test_closing_identity(p):
    _, gc = sm.weighted_sums(p)
    assert gc == pytest.approx(sm.narrow_width_closed(p), abs=1e-12)
    _, gcw, _ = sm.mode_widths_weighted(p)
    assert gcw == pytest.approx(sm.narrow_width_closed(p), rel=1e-12)


def test_weighted_sum_b_second_order():
    p = CASES[0]
    gb, _ = sm.weighted_sums(p)
    gbw, _, _ = sm.mode_widths_weighted(p)
    assert abs(gb - gbw) < 10 * p.gamma3 ** 2


def test_naive_widths_differ_from_weighted():
    p = CASES[0]
    _, nb, nc = sm.mode_widths_naive(p)
    gb, gc, _ = sm.mode_widths_weighted(p)
    assert nb < gb and nc > gc


@pytest.mark.parametrize("p", CASES)
def test_mode_weights_in_unit_interval(p):
    ms = sm.modes(p)
    for m in (ms.a, ms.b, ms.c):
        assert all(0 <= w <= 1 + 1e-12 for w in m.weights)
        assert max(m.weights) == pytest.approx(1)


def test_eigenvector_weights_match_formula():
    p = SystemParams.from_ratio(gamma3=1e-4, a=0.3, rabi=8.0, detuning=2.0)
    ms = sm.modes(p)
    wc = np.array(sm.mode_weights(p)["c"])
    assert np.allclose(ms.c.weights, wc / wc.max(), atol=1e-3)
    wb = np.array(sm.mode_weights(p)["b"])
    assert np.allclose(ms.b.weights, wb / wb.max(), atol=1e-3)


def test_secular_width_at_delta_max():
    """At the optimal detuning the narrow-mode width is the secular width."""
    from shelving import analytic
    p = SystemParams.from_ratio(gamma3=1e-4, a=0.3, rabi=200.0)
    p = p.with_(detuning=analytic.delta_max(p))
    assert sm.narrow_width_closed(p) == pytest.approx(analytic.secular_width(0.3, 1e-4), rel=1e-4)


def test_ambiguous_modes():
    with pytest.raises(AmbiguousModes):
        sm.modes(SystemParams.from_ratio(gamma3=0.5, a=1.0, rabi=3.0))
