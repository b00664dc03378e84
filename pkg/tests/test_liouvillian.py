import numpy as np
import pytest
from conftest import lindblad_steady, lindblad_superop

from shelving.errors import DegenerateSystem
from shelving.liouvillian import (
    BlochVector,
    SystemParams,
    build_liouvillian,
    correlation_seed,
    inject_fault,
    population_derivative,
    sigma_operators,
    steady_state_closed,
    steady_state_numeric,
    two_level,
)

CASES = [
    SystemParams.from_ratio(gamma3=0.005, a=0.3, rabi=6.0),
    SystemParams.from_ratio(gamma3=0.05, a=1.2, rabi=2.0, detuning=-1.5),
    SystemParams.from_ratio(gamma3=0.2, a=0.1, rabi=0.7, detuning=3.0),
]


@pytest.mark.parametrize("p", CASES)
def test_closed_matches_numeric(p):
    a, b = steady_state_closed(p).as_array(), steady_state_numeric(p).as_array()
    assert np.allclose(a, b, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("p", CASES)
def test_steady_state_matches_lindblad(p):
    d = lindblad_steady(p)
    ss = steady_state_closed(p)
    assert np.allclose(ss.density_matrix(), d, atol=1e-12)


@pytest.mark.parametrize("p", CASES)
def test_b_matches_lindblad_dynamics(p):
    """Random physical state: B rho + I equals the Lindblad derivative."""
    rng = np.random.default_rng(5)
    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    d = np.outer(psi, psi.conj())
    d /= np.trace(d)
    dd = (lindblad_superop(p) @ d.ravel()).reshape(3, 3)
    rho = np.array([d[2, 2], d[0, 0], d[0, 2], d[2, 0]])
    lv = build_liouvillian(p)
    got = lv.b @ rho + lv.drive
    assert np.allclose(got, [dd[2, 2], dd[0, 0], dd[0, 2], dd[2, 0]], atol=1e-12)
    assert population_derivative(p, rho)[2] == pytest.approx(dd[1, 1], abs=1e-12)


def test_seed_brute_force(ref_params):
    """R_k = <sigma_k sigma4> - <sigma_k><sigma4> by 3x3 matrix products."""
    ss = steady_state_closed(ref_params)
    d = ss.density_matrix()
    ops = sigma_operators()

    def ev(op):
        return np.trace(d @ op)

    ref = [ev(s @ ops[3]) - ev(s) * ev(ops[3]) for s in ops]
    assert np.allclose(correlation_seed(ref_params, ss), ref, atol=1e-14)


def test_expectation_convention(ref_params):
    ss = steady_state_closed(ref_params)
    d = ss.density_matrix()
    ops = sigma_operators()
    assert np.allclose([np.trace(d @ o) for o in ops], ss.as_array())


def test_state_is_physical(ref_params):
    ss = steady_state_closed(ref_params)
    ss.check()
    # detailed balance between shelving and de-shelving: gamma3 rho33 = gamma2 rho22
    assert ref_params.gamma3 * ss.rho33.real == pytest.approx(ref_params.gamma2 * ss.rho22, rel=1e-12)


def test_two_level_limit():
    p = SystemParams(rabi=2.0, detuning=0.5)
    ss = steady_state_numeric(two_level(p))
    k = 2 * 0.25 + 2 + 4
    assert ss.rho33.real == pytest.approx(4 / (2 * k))
    assert ss.rho22 == pytest.approx(0, abs=1e-14)


def test_shelved_when_no_deshelving():
    p = SystemParams(gamma2=0.0, gamma3=0.01, rabi=3.0)
    ss = steady_state_numeric(p)
    assert ss.rho22 == pytest.approx(1, abs=1e-12)


def test_degenerate_normalization():
    with pytest.raises(DegenerateSystem):
        steady_state_closed(SystemParams(gamma2=0.0, gamma3=0.01, rabi=0.0))


@pytest.mark.parametrize("kw", [dict(gamma=0), dict(gamma2=-1), dict(rabi=float("nan"))])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SystemParams(**kw)


def test_bloch_check_rejects():
    with pytest.raises(ValueError):
        BlochVector(0.5, 0.6, 0.1j, 0.1j).check()


def test_fault_hook_is_scoped(ref_params):
    b0 = build_liouvillian(ref_params).b
    with inject_fault("b-sign-flip"):
        assert not np.allclose(build_liouvillian(ref_params).b, b0)
    assert np.allclose(build_liouvillian(ref_params).b, b0)
    with pytest.raises(ValueError):
        with inject_fault("nope"):
            pass
