import numpy as np
import pytest

from hetlab.errors import ConstructionError
from hetlab.kernels import certify_kernel, estimate_exponents, kernel_from_spec
from hetlab import mc_truncation as mc
from hetlab.potentials import quartic_well


def test_params_closed_forms():
    tp = mc.TruncationParams.from_L(1.0)
    assert tp.x_L == pytest.approx(np.sqrt(2) / 16)
    assert tp.y_L == pytest.approx(7 * np.sqrt(2) / 16)
    assert tp.l_L == pytest.approx(11 / 8) and tp.m_L == 2.0
    assert mc.lower_exponent(4.0) == pytest.approx(23 / 20)
    assert mc.lower_exponent(0.25) == pytest.approx((1.5 + 6 - 0.0625) / 5)
    for L in (0.01, 0.5, 1, 3, 100):
        assert 0 < mc.TruncationParams.from_L(L).y_L <= 1
    with pytest.raises(ConstructionError):
        mc.TruncationParams.from_L(0.0)


def test_phi_L_examples():
    tp = mc.TruncationParams.from_L(1.0)
    assert mc.phi_L(tp, 0.0) == 1.0
    assert mc.phi_L(tp, 1.0) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert mc.phi_L(tp, np.sqrt(2)) == pytest.approx(7 * np.sqrt(2) / 16, abs=1e-15)
    assert mc.phi_L(tp, 10.0) == pytest.approx(0.6187184335, abs=1e-10)


def test_untruncated_examples():
    assert mc.mc_kernel_untruncated(0.0) == 1.0
    assert mc.mc_kernel_untruncated(1.0) == pytest.approx(0.70710678, abs=1e-8)
    assert mc.mc_kernel_untruncated(np.sqrt(3)) == pytest.approx(0.5)


@pytest.mark.parametrize("L", [0.25, 1.0, 4.0])
def test_knot_smoothness(L):
    k = mc.truncated_kernel(L)
    for knot in np.sqrt([L, L + 1]):
        lo, hi = np.nextafter(knot, 0), np.nextafter(knot, 10)
        assert abs(k.phi(hi) - k.phi(lo)) <= 1e-12
        assert abs(k.phi_prime(hi) - k.phi_prime(lo)) <= 1e-12


@pytest.mark.parametrize("L", [0.25, 1.0, 4.0])
def test_pinching_and_ratio_bound(L):
    tp = mc.TruncationParams.from_L(L)
    k = mc.truncated_kernel(L)
    t = np.concatenate([np.linspace(0, 4, 2001), np.logspace(0, 4, 200)])
    ph = k.phi(t)
    assert np.all(ph >= tp.y_L - 1e-15) and np.all(ph <= 1 + 1e-15)
    Phi = k.Phi(t)
    assert np.all(tp.y_L * t**2 / 2 <= Phi * (1 + 1e-12))
    assert np.all(Phi <= t**2 / 2 * (1 + 1e-12))
    # phi_L(a) <= phi_L(b) / y_L for all a, b
    assert ph.max() <= ph.min() / tp.y_L * (1 + 1e-12)


@pytest.mark.parametrize("L", [0.25, 1.0, 4.0])
def test_kernel_certified_with_declared_exponents(L):
    k = mc.truncated_kernel(L)
    rep = certify_kernel(k)
    assert rep["phi1"] and rep["certified"]
    assert rep["m_est"] == pytest.approx(2.0, abs=1e-6)
    # the closed-form lower exponent is a valid bound, not the sampled infimum
    assert rep["l_est"] >= k.l


def test_spec_builder():
    k = kernel_from_spec("mc-truncated:L=1")
    assert k.kind == "mc-truncated" and k.l == pytest.approx(11 / 8)


def test_solve_mc_small_alpha():
    prof, cert = mc.solve_mc(quartic_well(0.1), 1.0)
    assert cert.passed and cert.max_slope < 1.0
    assert cert.residual_sup <= 1e-6
    rep = mc.mc_sandwich_check(prof, 0.1)
    assert rep["passed"] and rep["kappa_le_1"]
    assert rep["upper_margin"] >= -1e-9 and rep["lower_margin"] >= -1e-9


def test_sandwich_at_origin_is_tight():
    prof, _ = mc.solve_mc(quartic_well(0.1), 1.0)
    i = np.flatnonzero(prof.t == 0)[0]
    assert prof.q[i] == 0.0


def test_negative_control():
    _, cert = mc.solve_mc(quartic_well(5.0), 0.01)
    assert not cert.passed and cert.max_slope > cert.threshold


def test_schedule_raises_L_until_pass():
    # untruncated G is 1 - 1/sqrt(1+t^2) < 1, so alpha^4 = V(0) must stay
    # below 1; at alpha = 0.7 the slope is about 0.855
    prof, cert, L = mc.solve_mc_schedule(quartic_well(0.7), L0=0.25, L_max=64)
    assert cert.passed and L == 1.0
    assert cert.max_slope == pytest.approx(0.855, abs=5e-3)


def test_schedule_gives_up_at_cap():
    _, cert, L = mc.solve_mc_schedule(quartic_well(1.0), L0=1.0, L_max=8)
    assert not cert.passed and L == 8.0


def test_sweep_cell_row():
    row = mc.sweep_cell(0.1, 1.0)
    assert set(row) >= {"alpha", "L", "max_slope", "passed", "kappa", "bound_margins"}
    assert row["passed"]


def test_certificate_records_sup_of_V_prime():
    alpha = 0.1
    _, cert = mc.solve_mc(quartic_well(alpha), 1.0)
    # V = (u^2 - a^2)^2 has |V'| maximal at u = a / sqrt(3) on [-a, a]
    expect = 8 * alpha ** 3 / (3 * np.sqrt(3))
    assert cert.sup_abs_V_prime == pytest.approx(expect, rel=1e-6)
    assert cert.to_dict()["sup_abs_V_prime"] == cert.sup_abs_V_prime
