import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confeinstein import identities as I
from confeinstein.tensor_core import DOWN, UP, Tensor, TensorError, einsum
from confeinstein.weyl_algebra import (DegenerateWeylError, WeylPoint, WeylPointError, apply_weyl, bivector_count,
                                       cayley_hamilton_residual, characteristic_coefficients, invariants,
                                       nondegeneracy, printed_coefficients, solve_weyl_linear)

seeds = st.integers(0, 2 ** 32)


def weyl(n, seed, mode="exact"):
    return I.random_weyl(I.WeylSampleConfig(n, seed=seed, mode=mode))


def zero_weyl(n):
    return WeylPoint(Tensor.zeros(n, (UP, UP, DOWN, DOWN)))


def scaled(w, lam):
    return WeylPoint(w.weyl.scale(lam), w.metric)


def rand_vector(seed, n):
    raw = np.random.default_rng(seed).integers(-4, 5, size=n)
    return Tensor.from_ints(raw.astype(object), (UP,))


def test_bivector_count():
    assert [bivector_count(n) for n in (4, 5, 6, 7, 8)] == [6, 10, 15, 21, 28]


def test_weyl_point_rejects_bad_input():
    raw = np.random.default_rng(0).integers(-3, 4, size=(4,) * 4).astype(object)
    with pytest.raises(WeylPointError):
        WeylPoint(Tensor.from_ints(raw, (UP, UP, DOWN, DOWN)))
    with pytest.raises(WeylPointError):
        WeylPoint(Tensor.zeros(4, (UP, DOWN)))


def test_chain_base_and_zero():
    w = weyl(4, 1)
    assert w.chain(1) is w.weyl
    z = zero_weyl(4)
    assert all(z.chain(p).is_zero() for p in range(1, 5))
    assert all(v == 0 for v in invariants(z, 6).invariants)


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_chain_composition(seed, p, q):
    w = weyl(4, seed)
    lhs = einsum("abij,ijcd->abcd", w.chain(p), w.chain(q))
    assert (lhs - w.chain(p + q)).is_zero()


def test_invariants_brute_force():
    w = weyl(4, 11)
    W = w.weyl.values()
    r = range(4)
    c2 = sum(W[a, b, c, d] * W[c, d, a, b] for a, b, c, d in itertools.product(r, r, r, r))
    inv = invariants(w, 3)
    assert inv.invariant(1) == 0
    assert inv.invariant(2) == c2
    c3 = sum(W[a, b, c, d] * W[c, d, e, f] * W[e, f, a, b]
             for a, b, c, d, e, f in itertools.product(*(r,) * 6))
    assert inv.invariant(3) == c3


@given(seeds)
def test_coefficients_low_orders(seed):
    w = weyl(4, seed)
    cs = characteristic_coefficients(w)
    assert cs.coefficient(0) == 1 and cs.coefficient(1) == 0
    assert cs.coefficient(2) == -cs.invariant(2) / 2


@settings(max_examples=15)
@given(seeds, st.sampled_from([4, 5]))
def test_newton_matches_closed_forms(seed, n):
    w = weyl(n, seed)
    closed = printed_coefficients(invariants(w, 6))
    cs = characteristic_coefficients(w)
    for k in range(2, 7):
        assert cs.coefficient(k) == closed[k]


def test_zero_weyl_coefficients_and_degeneracy():
    z = zero_weyl(4)
    cs = characteristic_coefficients(z)
    assert all(cs.coefficient(k) == 0 for k in range(2, 7))
    assert nondegeneracy(z)[0] is False


@given(seeds)
def test_random_weyl_nondegenerate(seed):
    ok, cN = nondegeneracy(weyl(4, seed))
    assert ok and cN != 0


def test_null_weyl_is_degenerate():
    w = I.null_weyl(0)
    assert not w.weyl.is_zero()
    assert w.chain(2).is_zero()
    ok, cN = nondegeneracy(w)
    assert cN == 0 and not ok


@given(seeds, st.sampled_from([4, 5]))
@settings(max_examples=10)
def test_cayley_hamilton_exact(seed, n):
    assert cayley_hamilton_residual(weyl(n, seed)) == 0


def test_cayley_hamilton_perturbed_coefficient_fails():
    w = weyl(4, 3)
    c = list(characteristic_coefficients(w).coefficients)
    c[2] += 1
    assert cayley_hamilton_residual(w, c) > 0


@given(seeds, st.sampled_from([4, 5]))
@settings(max_examples=15)
def test_lemma_round_trip_exact(seed, n):
    w = weyl(n, seed)
    V = rand_vector(seed + 1, n)
    H = apply_weyl(w, V)
    U = solve_weyl_linear(w, H)
    assert (U - V).is_zero()
    assert (apply_weyl(w, U) - H).is_zero()


def test_lemma_homogeneous_and_degenerate():
    w = weyl(4, 5)
    H = Tensor.zeros(4, (UP, UP, DOWN))
    assert solve_weyl_linear(w, H).is_zero()
    z = zero_weyl(4)
    H = apply_weyl(w, rand_vector(1, 4))
    with pytest.raises(DegenerateWeylError):
        solve_weyl_linear(z, H)
    bad = Tensor.from_ints(np.ones((4, 4, 4), dtype=object), (UP, UP, DOWN))
    with pytest.raises(TensorError):
        solve_weyl_linear(w, bad)


def test_lemma_float_mode():
    w = weyl(5, 9, "float")
    V = rand_vector(3, 5).to_float()
    U = solve_weyl_linear(w, apply_weyl(w, V))
    assert float((U - V).max_abs()) < 1e-9 * float(V.max_abs())


@given(seeds)
@settings(max_examples=15)
def test_scaling_by_two(seed):
    w = weyl(4, seed)
    w2 = scaled(w, 2)
    a, b = characteristic_coefficients(w), characteristic_coefficients(w2)
    for p in range(2, 7):
        assert b.invariant(p) == 2 ** p * a.invariant(p)
        assert b.coefficient(p) == 2 ** p * a.coefficient(p)
    H = apply_weyl(w, rand_vector(seed, 4))
    assert (solve_weyl_linear(w2, H.scale(2)) - solve_weyl_linear(w, H)).is_zero()


def test_cayley_hamilton_float_six_dimensions():
    w = weyl(6, 2, "float")
    r = I.cayley_hamilton_report(w)
    assert r.passed and float(r.residual) < 1e-9
