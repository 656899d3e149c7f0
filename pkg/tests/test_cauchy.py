import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetlab.cauchy import (SolverConfig, closed_form_oracle, fit_decay,
                           solve_cauchy)
from hetlab.errors import (ConfigError, FitDomainError, StationaryStartError,
                           StiffnessError)
from hetlab.kernels import mixed, p_power, gamma_power, plog
from hetlab.potentials import (asymmetric_well, custom_potential,
                               p_double_well, phi_double_well)
from hetlab import profiles
from hetlab.verify import sandwich_margins


def _at(prof, t):
    return prof.q[np.argmin(np.abs(prof.t - t))]


def test_examples(p2_profile):
    assert _at(p2_profile, 1.0) == pytest.approx(0.761594155955765, abs=1e-10)
    assert _at(p2_profile, 0.0) == 0.0
    prof = solve_cauchy(p_power(3), p_double_well(3, 1))
    # tanh(2^(-1/3)) = tanh(0.7937) = 0.6605003
    assert _at(prof, 1.0) == pytest.approx(np.tanh(2 ** (-1 / 3)), abs=1e-10)
    assert _at(prof, 1.0) == pytest.approx(0.6605003, abs=1e-6)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_oracle_agreement(p):
    prof = solve_cauchy(p_power(p), p_double_well(p, 1.0))
    sel = np.abs(prof.t) <= 8
    ref = closed_form_oracle("p_tanh", p=p, alpha=1.0)(prof.t[sel])
    assert np.max(np.abs(prof.q[sel] - ref)) <= 1e-8


def test_oracle_examples():
    assert closed_form_oracle("p_tanh", p=2, alpha=1)(0.0) == 0.0
    assert closed_form_oracle("asym_logistic", p=2, a=0, b=1)(0.0) == 0.5
    assert closed_form_oracle("p_tanh", p=3, alpha=2)(1.0) == pytest.approx(
        2 * np.tanh(2 / 2 ** (1 / 3)))
    assert closed_form_oracle("quartic_classic", alpha=1)(0.3) == pytest.approx(
        np.tanh(np.sqrt(2) * 0.3))
    with pytest.raises(ConfigError):
        closed_form_oracle("sine_gordon")


@pytest.mark.parametrize("k", [p_power(2), mixed(2, 4), gamma_power(2), plog(2)],
                         ids=lambda k: k.kind)
def test_energy_and_profile_invariants(k):
    P = phi_double_well(k, 1.0)
    prof = solve_cauchy(k, P)
    assert np.max(np.abs(prof.energy_residual)) <= 1e-8
    assert np.all(np.diff(prof.q) > 0)
    assert np.all((prof.q > -1) & (prof.q < 1))
    assert np.all(prof.q_prime > 0)
    assert prof.meta["reached_tail"]


def test_odd_symmetry(p2_profile):
    i0 = np.flatnonzero(p2_profile.t == 0)[0]
    n = min(i0, len(p2_profile) - 1 - i0)
    q = p2_profile.q
    assert np.max(np.abs(q[i0 - n:i0 + 1][::-1] + q[i0:i0 + n + 1])) <= 1e-10


@settings(max_examples=8)
@given(st.floats(-0.9, 0.9))
def test_translation_covariance(y0):
    k, P = p_power(2), p_double_well(2, 1)
    ref = solve_cauchy(k, P)
    prof = solve_cauchy(k, P, anchor=y0)
    # the solution through y0 is q(t + s) with q(s) = y0
    s = np.arctanh(y0)
    sel = np.abs(prof.t) <= 8
    shifted = ref.interpolate(prof.t[sel] + s)
    assert np.max(np.abs(prof.q[sel] - shifted)) <= 1e-8


def test_sandwich_case_i():
    k = mixed(2, 4)
    prof = solve_cauchy(k, phi_double_well(k, 1.0))
    _, low, up, case = sandwich_margins(prof, 1.0, k.l, k.m)
    assert case == "i"
    assert low.min() >= -1e-9 and up.min() >= -1e-9


def test_fit_decay(p2_profile):
    fit = fit_decay(p2_profile, 0.2)
    assert fit.theta2 == pytest.approx(2.0, rel=0.05)
    assert fit.beta2 == pytest.approx(2.0, rel=0.05)
    assert fit.theta4 == pytest.approx(fit.theta2, rel=0.01)
    assert fit.beta4 == pytest.approx(fit.beta2, rel=0.01)
    assert min(fit.theta1, fit.theta3, fit.beta1, fit.beta3) > 0
    bad = p2_profile.with_arrays(q=np.where(p2_profile.t > 10, 1.0, p2_profile.q))
    with pytest.raises(FitDomainError):
        fit_decay(bad)
    with pytest.raises(ValueError):
        fit_decay(p2_profile, 0.7)


def test_asymmetric_anchor():
    prof = solve_cauchy(p_power(2), asymmetric_well(2, 0, 1))
    assert _at(prof, 0.0) == 0.5
    ref = closed_form_oracle("asym_logistic", p=2, a=0, b=1)(prof.t)
    assert np.max(np.abs(prof.q - ref)) <= 1e-8


def test_stationary_start():
    k, P = p_power(2), p_double_well(2, 1)
    with pytest.raises(StationaryStartError):
        solve_cauchy(k, P, anchor=1.0)
    with pytest.raises(StationaryStartError):
        solve_cauchy(k, P, anchor=-2.0)


def test_stiffness_diagnostic():
    cfg = SolverConfig(max_steps=10)
    with pytest.raises(StiffnessError, match="max_steps"):
        solve_cauchy(p_power(2), p_double_well(2, 1), cfg=cfg)


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(rel_tol=-1).resolved(2.0)
    with pytest.raises(ConfigError):
        SolverConfig(tail_epsilon=0.5).resolved(2.0)
    P = custom_potential(lambda t: (t * t - 1) ** 2, lambda t: 4 * t * (t * t - 1), -1, 1)
    with pytest.raises(ConfigError):
        solve_cauchy(p_power(2), P)


def test_t_max_truncates(p2):
    k, P = p2
    prof = solve_cauchy(k, P, cfg=SolverConfig(t_max=5.0))
    assert prof.t[-1] == pytest.approx(5.0) and not prof.meta["reached_tail"]


def test_grid_and_interpolation(p2_profile):
    assert np.allclose(np.diff(p2_profile.t), 0.01)
    t = np.linspace(-3, 3, 101) + 0.003
    assert np.max(np.abs(p2_profile.interpolate(t) - np.tanh(t))) < 1e-9


def test_csv_json_round_trip(tmp_path, p2_profile):
    c = tmp_path / "p.csv"
    profiles.write_csv(p2_profile, c)
    assert c.read_text().splitlines()[0] == "t,q,qprime,energy_residual"
    back = profiles.read_csv(c, p2_profile.wells)
    for name in ("t", "q", "q_prime", "energy_residual"):
        assert np.array_equal(getattr(back, name), getattr(p2_profile, name))
    j = tmp_path / "p.json"
    profiles.write_json(p2_profile, j)
    back = profiles.read_json(j)
    assert np.array_equal(back.q, p2_profile.q)
    assert back.route == "cauchy" and back.meta["kernel"]["kind"] == "p-power"


def test_bad_profile_files(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        profiles.read_csv(f, (-1, 1))
    f = tmp_path / "x.json"
    f.write_text("{not json")
    with pytest.raises(ConfigError):
        profiles.read_json(f)
