import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liecat import categories as cat
from liecat.categories import (
    AlgebraMonoid,
    EntropyCategory,
    HalfSpaceMonoid,
    MatrixMonoid,
    OrderCategory,
    TrivialCategory,
    upper_triangular_algebra,
)
from liecat.errors import NotHomomorphism, OutwardVector, UnsupportedFamily
from liecat.flows import (
    MonoidMap,
    SectionSpec,
    anchor_matrix,
    bracket_at_unit,
    builtin_homomorphism,
    check_homomorphism,
    exp_monoid,
    flow_left_invariant,
    is_inward,
    left_invariant_eval,
    naturality_check,
    right_invariant_eval,
    tangent_at_unit,
)
from liecat.numerics import ToleranceConfig, fd_jacobian, matrix_exp_oracle

M2 = MatrixMonoid(2)
E12 = [0.0, 1.0, 0.0, 0.0]
E21 = [0.0, 0.0, 1.0, 0.0]
COARSE = ToleranceConfig(ode_steps=200)


def mv(v):
    return SectionSpec(v, "monoid-vector")


def test_left_invariant_eval_examples():
    g = np.array([1.0, 2.0, 3.0, 4.0])
    # d(L_g) v = g v
    assert np.allclose(left_invariant_eval(M2, mv(E12), g), [0, 1, 0, 3])
    assert np.allclose(right_invariant_eval(M2, mv(E12), g), [3, 4, 0, 0])
    O = OrderCategory()
    assert np.allclose(left_invariant_eval(O, [2.0], [3.0, 1.0]), [0.0, 2.0], atol=1e-8)
    assert np.allclose(right_invariant_eval(O, [2.0], [3.0, 1.0]), [2.0, 0.0], atol=1e-8)


def test_left_invariance_against_fd(rng):
    # X(gh) = d(L_g) X(h) on a non-bilinear family
    C = TrivialCategory(1, AlgebraMonoid(upper_triangular_algebra()))
    alpha = [0.3, -0.2, 0.5, 0.1]
    for _ in range(5):
        g, h = cat.random_composable_pair(C, rng)
        lhs = left_invariant_eval(C, alpha, cat.compose(C, g, h))
        J = fd_jacobian(lambda k: C._compose(g, k), h)
        assert np.allclose(lhs, J @ left_invariant_eval(C, alpha, h), atol=1e-6)


def test_left_invariant_field_is_t_vertical(rng):
    E = EntropyCategory(2)
    for _ in range(5):
        g = E.sample_morphism(rng)
        X = left_invariant_eval(E, [0.4, -0.7], g)
        assert np.allclose(E.target_jacobian(g) @ X, 0, atol=1e-8)


def test_tangent_at_unit_roundtrip():
    O = OrderCategory()
    assert np.allclose(tangent_at_unit(O, [1.5], [0.0]).vector, [1.5])


def test_exp_examples():
    assert np.array_equal(exp_monoid(M2, np.zeros(4)), [1, 0, 0, 1])
    assert np.allclose(exp_monoid(M2, E12), [1, 1, 0, 1], atol=1e-12)
    assert np.allclose(exp_monoid(M2, [1, 0, 0, 2]), [math.e, 0, 0, math.e**2], rtol=1e-10)
    rot = exp_monoid(M2, [0, -math.pi, math.pi, 0])
    assert np.allclose(rot, [-1, 0, 0, -1], atol=1e-9)


def test_exp_half_line():
    H = HalfSpaceMonoid(1)
    assert exp_monoid(H, [2.5]) == pytest.approx([2.5])
    assert is_inward(H, [0.0]) and is_inward(H, [1.0]) and not is_inward(H, [-1.0])
    with pytest.raises(OutwardVector):
        exp_monoid(H, [-1.0])


def test_exp_needs_monoid():
    with pytest.raises(UnsupportedFamily):
        exp_monoid(OrderCategory(), [1.0])


def test_exp_matches_oracle(rng):
    for n in (2, 3):
        M = MatrixMonoid(n)
        for _ in range(5):
            v = rng.standard_normal(n * n)
            v *= rng.uniform(0, 2) / np.linalg.norm(v)
            assert np.max(np.abs(exp_monoid(M, v) - matrix_exp_oracle(v.reshape(n, n)).ravel())) <= 1e-6


def test_exp_upper_triangular():
    A = AlgebraMonoid(upper_triangular_algebra())
    a, b, c = 1.0, 2.0, 0.5
    e = exp_monoid(A, [a, b, c])
    # exp [[a, c], [0, b]] has corner c (e^b - e^a) / (b - a)
    assert np.allclose(e, [math.e, math.e**2, c * (math.e**2 - math.e)], rtol=1e-10)


@given(st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=15, deadline=None)
def test_exp_one_parameter(s, t):
    v = np.array([0.3, -0.5, 0.8, 0.1])
    lhs = cat.compose(M2, exp_monoid(M2, s * v), exp_monoid(M2, t * v))
    assert np.allclose(lhs, exp_monoid(M2, (s + t) * v), atol=1e-9)


def test_exp_rescaling(rng):
    v = rng.standard_normal(4)
    t = 0.7
    via_flow = flow_left_invariant(M2, mv(v), M2.identity, t).endpoint
    assert np.allclose(via_flow, exp_monoid(M2, t * v), atol=1e-10)


def test_exp_differential_at_zero_is_identity():
    J = fd_jacobian(lambda v: exp_monoid(M2, v, COARSE), np.zeros(4), ToleranceConfig(fd_step=1e-4, ode_steps=200))
    assert np.allclose(J, np.eye(4), atol=1e-6)


@pytest.mark.parametrize("C, alpha", [
    (M2, mv([0.2, -1.0, 0.4, 0.3])),
    (AlgebraMonoid(upper_triangular_algebra()), mv([0.2, -0.4, 1.0])),
    (OrderCategory(), [-0.8]),
    (TrivialCategory(1, MatrixMonoid(1)), [0.6, -0.3]),
])
def test_flow_identity(C, alpha, rng):
    # phi_t(g) = g . phi_t(1_{s(g)})
    for _ in range(3):
        g = C.sample_morphism(rng)
        t = rng.uniform(0, 1)
        lhs = flow_left_invariant(C, alpha, g, t, COARSE)
        rhs = flow_left_invariant(C, alpha, cat.unit(C, cat.source(C, g)), t, COARSE)
        assert not lhs.exited and not rhs.exited
        assert np.allclose(lhs.endpoint, cat.compose(C, g, rhs.endpoint), atol=1e-6)


def test_flow_stays_in_t_fibre(rng):
    E = EntropyCategory(2)
    g = E.sample_morphism(rng)
    res = flow_left_invariant(E, [0.05, -0.05], g, 0.2, COARSE)
    # an exit keeps the last valid state, which is still in the fibre
    assert np.allclose(cat.target(E, res.endpoint), cat.target(E, g), atol=1e-9)


def test_order_flow_is_s_related(rng):
    # s maps the left-invariant flow onto the flow of the anchor vector field
    O = OrderCategory()
    for _ in range(5):
        y, x = np.sort(rng.standard_normal(2))[::-1]
        c = -abs(rng.standard_normal())
        res = flow_left_invariant(O, [c], [y, x], 0.8, COARSE)
        assert cat.source(O, res.endpoint) == pytest.approx([x + 0.8 * c])


def test_half_line_flow_exit():
    H = HalfSpaceMonoid(1)
    res = flow_left_invariant(H, mv([1.0]), [0.0], 2.0)
    assert not res.exited and res.endpoint == pytest.approx([2.0])
    res = flow_left_invariant(H, mv([-1.0]), [1.0], 2.0)
    assert res.exited and 1.0 - 2e-3 <= res.t_reached <= 1.0
    res = flow_left_invariant(H, mv([-1.0]), [0.0], 1.0)
    assert res.exited and res.t_reached == 0.0


def test_det_positive_along_flows(rng):
    for _ in range(5):
        v = rng.standard_normal(4)
        g = M2.identity
        for _ in range(5):
            g = flow_left_invariant(M2, mv(v), g, 0.2, COARSE).endpoint
            assert np.linalg.det(g.reshape(2, 2)) > 0


def test_bracket_example():
    br = bracket_at_unit(M2, mv(E12), mv(E21))
    assert np.allclose(br, [1, 0, 0, -1], atol=1e-3)


def test_bracket_matches_commutator_and_antisymmetry(rng):
    # ker dt frame of a monoid is the identity, so coordinates are ambient
    for _ in range(3):
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        A, B = a.reshape(2, 2), b.reshape(2, 2)
        ab = bracket_at_unit(M2, mv(a), mv(b))
        ba = bracket_at_unit(M2, mv(b), mv(a))
        assert np.allclose(ab, -ba, atol=1e-3)
        assert np.allclose(ab, (A @ B - B @ A).ravel(), atol=1e-3)


def test_bracket_jacobi(rng):
    n = 2
    vs = [rng.standard_normal(n * n) for _ in range(3)]

    def br(a, b):
        return bracket_at_unit(M2, mv(a), mv(b))

    a, b, c = vs
    total = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    assert np.max(np.abs(total)) <= 1e-3


def test_anchor_examples():
    assert anchor_matrix(M2).shape == (0, 4)
    O = OrderCategory()
    assert np.allclose(anchor_matrix(O, [1.0]), [[1.0]])
    assert np.allclose(anchor_matrix(O, [1.0], side="right"), [[1.0]])
    E = EntropyCategory(2)
    assert np.linalg.matrix_rank(anchor_matrix(E, [0.5, 0.2])) == 2
    T = TrivialCategory(2, MatrixMonoid(1))
    assert np.linalg.matrix_rank(anchor_matrix(T, [0.0, 1.0])) == 2


def test_naturality_det(rng):
    phi = builtin_homomorphism("det", MatrixMonoid(2))
    for _ in range(2):
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        assert naturality_check(phi, v, [0.25, 0.5, 1.0]) <= 1e-6


def test_naturality_boundary_inclusion():
    phi = builtin_homomorphism("boundary_inclusion", HalfSpaceMonoid(3))
    assert naturality_check(phi, [0.4, -1.0], [0.5, 1.0]) <= 1e-9


def test_check_homomorphism_rejects():
    M = MatrixMonoid(2)
    trace = MonoidMap("trace", M, MatrixMonoid(1), lambda g: g[0] + g[3])
    with pytest.raises(NotHomomorphism):
        check_homomorphism(trace)
    check_homomorphism(builtin_homomorphism("identity", M))
    with pytest.raises(UnsupportedFamily):
        builtin_homomorphism("det", OrderCategory())
