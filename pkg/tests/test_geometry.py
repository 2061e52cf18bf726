import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pgdom.errors import PreconditionError
from pgdom.geometry import (
    AllSpace,
    Ball,
    Box,
    Interval,
    as_vector,
    estimated_gradient_mapping,
    gradient_mappings,
    indicator_prox,
    l1_prox,
    project,
    projected_gradient_mapping,
    prox_indicator,
)
from pgdom.instances import make_lower_bound_pair, make_power_instance

finite = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)


def domains():
    return [
        Interval(-1.0, 2.0),
        Box([-1.0, 0.0, 0.5], [1.0, 2.0, 0.5]),
        Ball(np.array([0.5, -0.5, 1.0]), 2.0),
        AllSpace(3),
    ]


def _fit(dom, v):
    return v[:1] if dom.dim == 1 else v


@pytest.mark.parametrize("dom", domains(), ids=lambda d: type(d).__name__)
@given(v=vec3, w=vec3)
def test_projection_idempotent_and_nonexpansive(dom, v, w):
    v, w = _fit(dom, v), _fit(dom, w)
    pv, pw = dom.project(v), dom.project(w)
    assert np.all(dom.contains(pv, tol=1e-9))
    np.testing.assert_allclose(dom.project(pv), pv, rtol=0, atol=1e-12)
    assert np.linalg.norm(pv - pw) <= np.linalg.norm(v - w) * (1 + 1e-12) + 1e-12


@pytest.mark.parametrize("dom", domains()[:3], ids=lambda d: type(d).__name__)
@given(v=vec3)
def test_projection_variational_inequality(dom, v):
    # <v - P v, z - P v> <= 0 for every z in the set
    v = _fit(dom, v)
    pv = dom.project(v)
    rng = np.random.default_rng(0)
    Z = dom.project(rng.uniform(-5, 5, size=(50, dom.dim)))
    assert np.all((Z - pv) @ (v - pv) <= 1e-8 * (1 + np.linalg.norm(v)))


def test_interval_examples():
    I = Interval(0.0, 1.0)
    assert I.project([1.5])[0] == 1.0
    assert I.project([-0.2])[0] == 0.0
    assert I.diameter() == 1.0
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


def test_ball_leaves_interior_points_bitwise():
    B = Ball(np.zeros(2), 1.0)
    x = np.array([0.3, -0.1])
    assert np.array_equal(B.project(x), x)
    np.testing.assert_allclose(B.project(np.array([3.0, 4.0])), [0.6, 0.8], rtol=1e-15)
    assert np.array_equal(B.project(np.zeros(2)), np.zeros(2))


def test_batch_projection_matches_rowwise():
    B = Box([0.0, 0.0], [1.0, 2.0])
    X = np.array([[2.0, -1.0], [0.5, 0.5], [-3.0, 5.0]])
    np.testing.assert_array_equal(B.project(X), np.stack([B.project(x) for x in X]))


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([1.0, 2.0], dim=3)
    with pytest.raises(ValueError):
        Interval(0, 1).project([0.1, 0.2])


def test_prox_of_indicator_is_projection():
    B = Ball(np.zeros(2), 1.0)
    prox = indicator_prox(B)
    v = np.array([2.0, 2.0])
    assert np.array_equal(prox(0.3, v), project(B, v))
    assert np.array_equal(prox_indicator(B, 7.0, v), B.project(v))
    assert prox.domain is B


def test_l1_prox_soft_thresholds():
    prox = l1_prox(0.5)
    np.testing.assert_allclose(prox(2.0, np.array([3.0, -0.5, 1.0, -2.0])), [2.0, 0.0, 0.0, -1.0])


def test_gradient_mapping_on_whole_space_is_the_gradient():
    F = make_power_instance(2.0, 1.5, np.array([0.2, -0.3]))
    x = np.array([0.7, 0.1])
    for eta in (1e-8, 0.1, 10.0):
        assert np.array_equal(projected_gradient_mapping(F, AllSpace(2), x, eta), F.gradient(x))


def test_gradient_mapping_example_on_interval():
    # F(x) = x^2 on [0, 1], x = 0.5, eta = 1: proj(0.5 - 1) = 0, mapping 0.5
    F = make_power_instance(2.0, 1.0, np.zeros(1), Interval(0.0, 1.0))
    g = projected_gradient_mapping(F, Interval(0.0, 1.0), [0.5], 1.0)
    assert g[0] == pytest.approx(0.5)


def test_gradient_mapping_requires_feasible_point():
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    with pytest.raises(PreconditionError):
        projected_gradient_mapping(pair.f0, pair.domain, [1.5], 0.01)
    with pytest.raises(ValueError):
        estimated_gradient_mapping(np.ones(1), pair.domain, [0.5], 0.0)


@given(x=st.floats(0.0, 1.0), eta=st.floats(1e-4, 0.5))
def test_batched_mapping_matches_single(x, eta):
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    single = projected_gradient_mapping(pair.f1, pair.domain, [x], eta)
    batched = gradient_mappings(pair.f1, pair.domain, np.array([[x], [0.5]]), eta)
    assert np.array_equal(batched[0], single)


@settings(max_examples=50)
@given(x=st.floats(0.0, 1.0), e1=st.floats(1e-3, 1.0), e2=st.floats(1e-3, 1.0))
def test_mapping_norm_decreases_with_eta(x, e1, e2):
    # the norm of the projected-gradient mapping is nonincreasing in eta
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    lo, hi = sorted((e1, e2))
    a = abs(projected_gradient_mapping(pair.f1, pair.domain, [x], lo)[0])
    b = abs(projected_gradient_mapping(pair.f1, pair.domain, [x], hi)[0])
    assert b <= a * (1 + 1e-12) + 1e-15
