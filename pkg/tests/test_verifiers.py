import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgdom.geometry import AllSpace, Box, Interval
from pgdom.instances import (
    make_lower_bound_pair,
    make_nbs_instance,
    make_phi_kl_instance,
    make_power_instance,
    theoretical_constants,
)
from pgdom.instances import PowerObjective
from pgdom.verifiers import (
    GridSpec,
    check_delta_recursion,
    check_poly_bound,
    check_variance_bound,
    check_variance_recursion,
    delta_recursion,
    kl_per_step,
    variance_recursion,
    verify_distance_bounds,
    verify_grad_dominance,
    verify_holder,
    verify_local_grad_dominance,
    verify_phi_kl,
    verify_projected_grad_dominance,
    verify_smoothness,
)


@pytest.fixture(scope="module")
def pair():
    return make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)


def test_grid_spec():
    g = GridSpec(Interval(0.0, 1.0), 11, exclusion_radius=0.05, breakpoints=(0.5,))
    assert 0.5 not in g.points()[:, 0]
    assert GridSpec(Box([0, 0], [1, 1]), 5).points().shape == (25, 2)
    with pytest.raises(ValueError):
        GridSpec(AllSpace(1), 5).points()
    with pytest.raises(ValueError):
        GridSpec(Interval(0, 1), 1)


# -- smoothness and Hölder ---------------------------------------------------------------


def test_quadratic_smoothness_is_tight():
    f = make_power_instance(2.0, 1.5, np.zeros(1))
    grid = GridSpec(Interval(-1.0, 1.0), 1000)
    rep = verify_smoothness(f, grid, 3.0)
    assert rep.passed and rep.worst_ratio == pytest.approx(1.0, abs=1e-12)
    bad = verify_smoothness(f, grid, 1.5)
    assert not bad.passed and bad.worst_ratio == pytest.approx(2.0, rel=1e-9)


def test_f0_smoothness_with_certificate(pair):
    c = theoretical_constants(pair)
    rep = verify_smoothness(pair.f0, GridSpec(Interval(-1.0, 1.0), 10_000), c.L)
    assert rep.passed and rep.worst_ratio >= 0.99
    assert abs(abs(rep.worst_point[0]) - 1.0) < 0.05


def test_holder_reduces_to_smoothness(pair):
    grid = GridSpec(Interval(-1.0, 1.0), 2000)
    a = verify_smoothness(pair.f0, grid, 6.0)
    b = verify_holder(pair.f0, grid, 6.0, 2.0)
    assert a.worst_ratio == b.worst_ratio


def test_holder_for_three_halves_growth():
    lam = 0.7
    f = PowerObjective(1.5, lam, np.zeros(1))
    grid = GridSpec(Interval(-1.0, 1.0), 2001)
    assert verify_holder(f, grid, 1.5 * math.sqrt(2) * lam, 3.0).passed
    assert not verify_holder(f, grid, 1.5 * lam, 3.0).passed


# -- dominance ---------------------------------------------------------------------------


@pytest.mark.parametrize("which", ["f0", "f1"])
def test_dominance_with_certificate_and_negative_control(pair, which):
    f = getattr(pair, which)
    c = theoretical_constants(pair)
    grid = GridSpec(pair.domain, 10_000)
    assert verify_grad_dominance(f, grid, c.alpha, c.tau, 1e-6).passed
    assert not verify_grad_dominance(f, grid, c.alpha, c.tau / 2, 1e-6).passed
    etas = [c.eta0 / 4, c.eta0 / 2, c.eta0]
    assert verify_projected_grad_dominance(f, pair.domain, grid, c.alpha, c.tau, etas, 1e-6).passed


def test_minimizer_contributes_zero(pair):
    grid = GridSpec(Interval(0.0, 0.0 + 1e-300), 2)
    rep = verify_grad_dominance(pair.f0, grid, 1.5, 1.0)
    assert rep.passed and rep.worst_ratio == 0.0


def test_projected_dominance_on_whole_space_matches_plain():
    f = make_power_instance(1.5, 1.0, np.zeros(1))
    grid = GridSpec(Interval(-1.0, 1.0), 501)
    c = f.constants
    a = verify_grad_dominance(f, grid, c.alpha, c.tau)
    b = verify_projected_grad_dominance(f, AllSpace(1), grid, c.alpha, c.tau, [0.1, 1.0])
    assert a.worst_ratio == b.worst_ratio and a.passed == b.passed


def test_projected_dominance_rejects_large_steps(pair):
    c = theoretical_constants(pair)
    with pytest.raises(ValueError):
        verify_projected_grad_dominance(pair.f1, pair.domain, GridSpec(pair.domain, 10), c.alpha, c.tau,
                                        [2 * c.eta0])


@settings(max_examples=20, deadline=None)
@given(alpha=st.sampled_from([1.2, 1.5, 1.8]), C=st.sampled_from([0.25, 0.5, 1.0]),
       rho=st.sampled_from([0.05, 0.1]), frac=st.floats(0.01, 1.0))
def test_projected_certificate_implies_plain(alpha, C, rho, frac):
    p = make_lower_bound_pair(alpha, C, 1.0, rho)
    c = p.f1.constants
    grid = GridSpec(p.domain, 2000)
    if verify_projected_grad_dominance(p.f1, p.domain, grid, c.alpha, c.tau, [frac * c.eta0]).passed:
        assert verify_grad_dominance(p.f1, grid, c.alpha, c.tau).passed


def _hidden_grid(f, n=10_000):
    lo, hi = float(f.breakpoint(f.j_star)), float(f.breakpoint(f.j_star + 1))
    return GridSpec(Interval(lo, np.nextafter(hi, lo)), n)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0])
def test_local_dominance_on_search_instance(alpha):
    f = make_nbs_instance(alpha, 0.2, 1.0, 1.0, 4, 2)
    grid = _hidden_grid(f)
    rep = verify_local_grad_dominance(f, f.domain, grid, alpha, f.local_tau(), f.R / f.N, 1e-9)
    assert rep.passed
    assert not verify_local_grad_dominance(f, f.domain, grid, alpha, f.local_tau() / 10, f.R / f.N).passed


def test_local_with_infinite_radius_is_global(pair):
    c = theoretical_constants(pair)
    grid = GridSpec(pair.domain, 3000)
    a = verify_grad_dominance(pair.f1, grid, c.alpha, c.tau)
    b = verify_local_grad_dominance(pair.f1, pair.domain, grid, c.alpha, c.tau, math.inf)
    assert a.worst_ratio == b.worst_ratio


def test_local_empty_sublevel_is_inconclusive(pair):
    grid = GridSpec(Interval(0.5, 1.0), 100)
    rep = verify_local_grad_dominance(pair.f0, pair.domain, grid, 1.5, 1.0, 1e-6)
    assert rep.inconclusive and not rep.passed


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_phi_kl_equality_and_controls(q):
    N, R, G = 4, 1.0, 1.0
    h = R / (2 * N)
    p = q * h ** (q - 1) / G
    f = make_phi_kl_instance(q, p, G, R, N, 2)
    rep = verify_phi_kl(f, _hidden_grid(f), q)
    assert rep.passed and rep.worst_ratio == pytest.approx(1.0, abs=1e-9)
    g = make_phi_kl_instance(q, 1.5 * p, G, R, N, 2)
    assert verify_phi_kl(g, _hidden_grid(g), q).worst_ratio < 0.9
    w = make_phi_kl_instance(q, p / 2, G, R, N, 2, check=False)
    assert not verify_phi_kl(w, GridSpec(w.domain, 10_000), q).passed


def test_distance_bounds(pair):
    c = theoretical_constants(pair)
    grid = GridSpec(pair.domain, 10_000)
    assert verify_distance_bounds(pair.f0, pair.domain, grid, c.alpha, c.tau, c.L).passed
    assert not verify_distance_bounds(pair.f0, pair.domain, grid, c.alpha, c.tau / 100, c.L).passed


def test_dominance_refuses_unknown_minimum():
    class NoMin(type(make_power_instance(2.0, 1.0, np.zeros(1)))):
        pass

    f = NoMin(2.0, 1.0, np.zeros(1))
    f.min_value = None
    with pytest.raises(ValueError):
        verify_grad_dominance(f, GridSpec(Interval(0, 1), 10), 2.0, 1.0)


# -- KL integrand --------------------------------------------------------------------------


def test_kl_per_step(pair):
    assert kl_per_step(pair, 1.0, 0.0) == pytest.approx(0.0072, rel=1e-12)
    x = np.linspace(0, 1, 100_000)
    k = kl_per_step(pair, 1.0, x)
    assert np.all(k[x >= 0.2] == 0.0)
    assert x[np.argmax(k)] == 0.0
    with pytest.raises(ValueError):
        kl_per_step(pair, 1.0, 1.5)


# -- recursions ----------------------------------------------------------------------------


def test_variance_recursion_zero_case():
    V, E = variance_recursion(1.5, 1.0, 0.0, 0.0, 1.0, 0.0, 100)
    assert np.all(V == 0.0)
    assert check_variance_bound(V, E).passed


def test_variance_fault_injection():
    V, E = variance_recursion(1.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1000)
    V = V.copy()
    V[500] = 10 * E
    assert not check_variance_bound(V, E, shift=0).passed


@settings(max_examples=100, deadline=None)
@given(a0=st.floats(1.01, 1.99), logs=st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_variance_within_e_over_t(a0, logs):
    beta0, sigma, Lt, R, V0 = (10.0**v for v in logs)
    assert check_variance_recursion(a0, beta0, sigma, Lt, R, V0, 2000, shift=0).passed


def test_delta_recursion_trivial_and_noiseless():
    d, clamped = delta_recursion(0.25, 1.0, 1.0, 0.5, 1.0, 1.5, 0.0, 0.0, 100)
    assert np.all(d == 0.0) and clamped == 0
    quiet, _ = delta_recursion(0.25, 1.0, 1.0, 0.5, 1.0, 1.5, 0.0, 1.0, 10_000)
    noisy, _ = delta_recursion(0.25, 1.0, 1.0, 0.5, 1.0, 1.5, 1.0, 1.0, 10_000)
    assert np.all(np.diff(quiet) <= 0)
    assert np.all(quiet <= noisy)


def test_delta_recursion_alpha_one():
    rep = check_delta_recursion(0.25, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 100_000)
    assert rep.passed and rep.extra["slope"] == pytest.approx(-0.5, abs=0.1)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 1.9])
def test_delta_stays_below_envelope(alpha):
    rep = check_delta_recursion(0.25, 1.0, 1.0, 0.5, 1.0, alpha, 1.0, 1.0, 100_000)
    assert rep.extra["max_scaled_delta"] <= rep.extra["envelope"]


def test_poly_bound_examples():
    rep = check_poly_bound(1.0, 1.0, 0.0, 1.0)
    assert rep.passed and rep.extra["bound"] == pytest.approx(0.25) and rep.extra["max"] == pytest.approx(0.25)
    rep = check_poly_bound(2.0, 3.0, 0.5, 1.0)
    assert rep.extra["bound"] == pytest.approx(0.5 + 4 / 12)


@settings(max_examples=200, deadline=None)
@given(A0=st.floats(0.01, 100), A1=st.floats(0.01, 100), A2=st.floats(0, 100), alpha=st.floats(1.0, 1.9))
def test_poly_bound_identity(A0, A1, A2, alpha):
    # beyond alpha = 1.9 the exponent alpha/(2-alpha) amplifies rounding past 1e-12
    rep = check_poly_bound(A0, A1, A2, alpha)
    assert rep.extra["identity_error"] <= 1e-12
    assert rep.passed
