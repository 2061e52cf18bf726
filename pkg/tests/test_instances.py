import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgdom.errors import CertificateError, InfeasiblePrecisionError
from pgdom.geometry import Ball, Box
from pgdom.instances import (
    choose_C,
    distance_bound,
    holder_gap_bound,
    lower_bound_smoothness,
    make_foster_instance,
    make_lower_bound_pair,
    make_nbs_instance,
    make_phi_kl_instance,
    make_power_instance,
    nbs_parameters,
    r0_bound,
    theoretical_constants,
)

alphas = st.sampled_from([1.2, 1.5, 1.8])
Cs = st.sampled_from([0.25, 0.5, 1.0])
rhos = st.sampled_from([0.05, 0.1])


# -- lower-bound pair ---------------------------------------------------------


def test_f0_values():
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    assert pair.f0.f(0.5) == pytest.approx(0.125, rel=1e-14)
    assert pair.f0.df(0.5) == pytest.approx(0.75, rel=1e-14)
    assert pair.f0.f(0.0) == 0.0 and pair.f0.df(0.0) == 0.0


def test_f1_values_at_zero():
    # 2^p C (rho^q + rho^q) with p = 2, q = 3
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    assert pair.f1.f(0.0) == pytest.approx(0.008, rel=1e-12)
    assert pair.f1.df(0.0) == pytest.approx(-0.12, rel=1e-12)
    assert pair.f1.min_value == pytest.approx(0.004, rel=1e-12)
    assert pair.f1.minimizer[0] == 0.1


def test_certificate_values():
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    c = theoretical_constants(pair)
    assert lower_bound_smoothness(1.5, 1.0, 1.0) == pytest.approx(6.0)
    assert c.tau == pytest.approx((1 / 3) ** 1.5, rel=1e-12)
    assert c.eta0 == pytest.approx(0.2 / 3, rel=1e-12)
    assert c.L >= 6.0
    assert pair.f0.constants == c and pair.f1.constants == c


@given(alpha=alphas, C=Cs, rho=rhos, x=st.floats(0.0, 1.0))
def test_pair_agree_beyond_two_rho(alpha, C, rho, x):
    pair = make_lower_bound_pair(alpha, C, 1.0, rho)
    x = 2 * rho + (1 - 2 * rho) * x
    assert pair.f1.f(x) == pytest.approx(pair.f0.f(x), rel=1e-12, abs=1e-15)
    assert pair.f1.df(x) == pytest.approx(pair.f0.df(x), rel=1e-12, abs=1e-15)


@given(alpha=alphas, C=Cs, rho=rhos, x=st.floats(-1.5, 1.5))
def test_pair_gaps_nonnegative_and_consistent(alpha, C, rho, x):
    pair = make_lower_bound_pair(alpha, C, 1.0, rho)
    for f in (pair.f0, pair.f1):
        g = f.gap([x])
        assert g >= 0
        assert g == pytest.approx(f.value([x]) - f.min_value, rel=1e-9, abs=1e-12)


@settings(max_examples=50)
@given(alpha=alphas, C=Cs, rho=rhos, x=st.floats(-1.4, 1.4))
def test_pair_derivative_matches_finite_difference(alpha, C, rho, x):
    pair = make_lower_bound_pair(alpha, C, 1.0, rho)
    h = 1e-6
    for f in (pair.f0, pair.f1):
        fd = (f.f(x + h) - f.f(x - h)) / (2 * h)
        assert f.df(x) == pytest.approx(fd, rel=1e-4, abs=1e-5)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_pair_continuous_at_branch_points(alpha):
    pair = make_lower_bound_pair(alpha, 0.5, 1.0, 0.1)
    for f in (pair.f0, pair.f1):
        for b in (0.0, 0.2, 1.0, -1.0):
            lo, hi = np.nextafter(b, -np.inf), np.nextafter(b, np.inf)
            assert f.f(lo) == pytest.approx(f.f(hi), rel=1e-9, abs=1e-12)
            assert f.df(lo) == pytest.approx(f.df(hi), rel=1e-9, abs=1e-12)


def test_pair_rejects_bad_parameters():
    for args in [(1.0, 1.0, 1.0, 0.1), (2.0, 1.0, 1.0, 0.1), (1.5, 0.0, 1.0, 0.1), (1.5, 1.5, 1.0, 0.1),
                 (1.5, 1.0, 1.0, 0.6)]:
        with pytest.raises(ValueError):
            make_lower_bound_pair(*args)


def test_choose_C_recovers_tau():
    for alpha in (1.2, 1.5, 1.8):
        C = choose_C(alpha, 0.7)
        tau = C ** (1 - alpha) * ((alpha - 1) / alpha) ** alpha
        assert tau == pytest.approx(0.7, rel=1e-12)


# -- search instances -----------------------------------------------------------


def test_nbs_example_values():
    f = make_nbs_instance(2.0, 0.2, 1.0, 1.0, 4, 2)
    assert f.f(0.0) == pytest.approx(0.05, rel=1e-12)
    mid = f.minimizer[0]
    assert mid == pytest.approx(0.375)
    assert f.df(mid) == 0.0
    assert f.f(mid) == pytest.approx(f.min_value, abs=1e-15)
    assert f.min_value == pytest.approx(-0.2 * 1 * 1 / (2 * 2 * 4))


@given(alpha=st.sampled_from([1.2, 1.5, 2.0]), N=st.integers(2, 8), data=st.data())
def test_nbs_slopes_outside_hidden_interval(alpha, N, data):
    j = data.draw(st.integers(1, N - 1))
    f = make_nbs_instance(alpha, 0.2, 1.0, 1.0, N, j)
    lo, hi = f.breakpoint(j), f.breakpoint(j + 1)
    x = data.draw(st.floats(0.0, 1.0))
    d = f.df(x)
    if x < lo:
        assert d == -0.2
    elif x >= hi:
        assert d == 0.2
    else:
        assert abs(d) <= 0.2 * (1 + 1e-12)


def test_nbs_parameters_example():
    p, N = nbs_parameters(0.01, 2.0, 1.0, 1.0, 1.0)
    assert p == pytest.approx(0.2) and N == 3
    with pytest.raises(InfeasiblePrecisionError):
        nbs_parameters(0.25, 2.0, 4.0, 1.0, 1.0)


def test_nbs_parameters_scaling():
    p1, N1 = nbs_parameters(0.01, 2.0, 1.0, 1.0, 1.0)
    p2, N2 = nbs_parameters(0.01 / 4, 2.0, 1.0, 1.0, 1.0)
    assert p2 == pytest.approx(p1 / 2, rel=1e-14)
    assert N2 > N1


def test_nbs_rejects_bad_hidden_index():
    with pytest.raises(ValueError):
        make_nbs_instance(2.0, 0.2, 1.0, 1.0, 4, 0)
    with pytest.raises(ValueError):
        make_nbs_instance(2.0, 0.6, 1.0, 1.0, 4, 1)


def test_phi_kl_reduces_to_nbs_at_q2():
    f = make_phi_kl_instance(2.0, 0.3, 1.0, 1.0, 4, 2)
    g = make_nbs_instance(2.0, 0.3, 1.0, 1.0, 4, 2)
    x = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(f.f(x), g.f(x), rtol=0, atol=1e-12)
    np.testing.assert_allclose(f.df(x), g.df(x), rtol=0, atol=1e-12)


def test_phi_kl_min_value_and_threshold():
    f = make_phi_kl_instance(2.0, 0.2, 1.0, 1.0, 4, 2, check=False)
    assert f.min_value == pytest.approx(-0.0125)
    assert f.df(f.minimizer[0]) == 0.0
    with pytest.raises(CertificateError):
        make_phi_kl_instance(2.0, 0.2, 1.0, 1.0, 4, 2)


# -- Foster quadratic -----------------------------------------------------------


def test_foster_constants():
    f = make_foster_instance(1.0, 2.0, 4, 6, basis_seed=3)
    assert f.b == pytest.approx(0.5)
    np.testing.assert_allclose(f.z_basis @ f.z_basis.T, np.eye(4), atol=1e-12)
    assert np.linalg.norm(f.minimizer) == pytest.approx(1.0, rel=1e-10)
    assert np.all(np.abs(f.gradient(f.minimizer)) < 1e-12)
    assert isinstance(f.domain, Ball)


@given(seed=st.integers(0, 2**16))
def test_foster_gradient_gap_identity(seed):
    f = make_foster_instance(1.3, 1.0, 3, 5, basis_seed=seed % 7)
    X = np.random.default_rng(seed).normal(size=(20, 5))
    lhs = np.sum(f.gradients(X) ** 2, axis=1)
    np.testing.assert_allclose(lhs, 2 * f.b * f.gaps(X), rtol=1e-10)
    np.testing.assert_allclose(f.gaps(X), f.values(X) - f.min_value, rtol=1e-9, atol=1e-12)


# -- power objective and closed-form bounds -----------------------------------


def test_power_examples():
    q = make_power_instance(2.0, 1.0, np.zeros(2))
    np.testing.assert_allclose(q.gradient([1.0, -2.0]), [2.0, -4.0])
    assert q.value(np.zeros(2)) == 0.0
    f = make_power_instance(1.5, 1.0, np.zeros(2))
    assert f.value([1.0, 1.0]) == pytest.approx(2 ** 1.5)


def test_power_certificate_on_box():
    f = make_power_instance(1.5, 1.0, np.zeros(1), Box([-1.0], [1.0]))
    assert f.constants.alpha == pytest.approx(1.5)
    assert f.constants.L == pytest.approx(6.0)


def test_closed_form_bounds():
    assert r0_bound(1.5, 1.0, 1.0) == pytest.approx(6.0)
    assert r0_bound(1.5, 2.0, 0.5) == pytest.approx(3.0)
    assert holder_gap_bound(1.5, 2.0, 1.0, 1.0) == pytest.approx(8.0)
    assert holder_gap_bound(1.0, 2.0, 1.7, 0.3) == pytest.approx(2 * 1.7 * 0.3**2)
    assert holder_gap_bound(1.5, 2.0, 1.0, 0.0) == 0.0
    assert distance_bound(2.0, 1.0, 4.0) == pytest.approx(4.0)
    assert distance_bound(1.5, 1.0, 1.0) == pytest.approx(3.0)
    assert distance_bound(1.5, 1.0, 0.0) == 0.0


@given(c=st.floats(0.1, 10.0), alpha=st.floats(1.1, 1.9))
def test_r0_homogeneity(c, alpha):
    base = r0_bound(alpha, 1.3, 0.7)
    scaled = r0_bound(alpha, 1.3, c ** (2 - alpha) * 0.7)
    assert scaled == pytest.approx(c * base, rel=1e-10)


def test_bounds_reject_bad_input():
    with pytest.raises(ValueError):
        distance_bound(1.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        holder_gap_bound(2.0, 2.0, 1.0, 1.0)
    assert math.isfinite(r0_bound(1.9, 1.0, 1.0))
