from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confeinstein import bracket
from confeinstein import formulas as F
from confeinstein import identities as I
from confeinstein.tensor_core import DOWN, UP, Tensor, antisymmetrize, einsum
from confeinstein.weyl_algebra import WeylPoint, weyl_symmetry_residuals

seeds = st.integers(0, 2 ** 32)
SIGNATURES = {"euclidean": lambda n: (1,) * n, "lorentzian": lambda n: (-1,) + (1,) * (n - 1),
              "split": lambda n: (-1, -1) + (1,) * (n - 2)}


def weyl(n, seed, mode="exact", sig=()):
    return I.random_weyl(I.WeylSampleConfig(n, signature=sig, seed=seed, mode=mode))


def scaled(w, lam):
    return WeylPoint(w.weyl.scale(lam), w.metric)


def zero_weyl(n):
    return WeylPoint(Tensor.zeros(n, (UP, UP, DOWN, DOWN)), I.WeylSampleConfig(n).metric())


def all_reports(w, oracle=False):
    n = w.n
    out = [I.four_d_trace_residual(w, p) for p in range(2, 7)]
    out += [I.antisymmetrization_residual(w, k) for k in (1, 2, 3)]
    out += [I.bianchi_square_residual(w), I.coefficient_report(w), I.lemma_report(w)]
    out += [I.five_d_cubic_report(w, allow_other_dimension=True, oracle=oracle),
            I.five_d_quartic_report(w, allow_other_dimension=True, oracle=oracle)]
    if n >= 6:
        out.append(I.six_d_cubic_report(w, allow_other_dimension=True, oracle=oracle))
    if n >= 5:
        out.append(I.lovelock_report(w, oracle=oracle))
    return out


# ---------------------------------------------------------------- generators

def test_config_validation():
    with pytest.raises(I.IdentityError):
        I.WeylSampleConfig(4, signature=(1, 1, 1))
    with pytest.raises(I.IdentityError):
        I.WeylSampleConfig(4, mode="fast")
    assert I.WeylSampleConfig(4).signature == (-1, 1, 1, 1)


@given(seeds, st.sampled_from([4, 5, 6]))
@settings(max_examples=10)
def test_random_weyl_deterministic_and_valid(seed, n):
    a, b = weyl(n, seed), weyl(n, seed)
    assert np.array_equal(a.weyl.values(), b.weyl.values())
    assert all(v == 0 for v in weyl_symmetry_residuals(a.weyl, a.metric).values())
    assert not a.weyl.is_zero()


def test_float_generator_matches_exact():
    e, f = weyl(5, 4), weyl(5, 4, "float")
    assert np.allclose(np.asarray(e.weyl.values(), dtype=float), f.weyl.values(), rtol=1e-15)


# ---------------------------------------------------------------- per-identity examples

def test_antisymmetrization_examples():
    assert I.antisymmetrization_residual(weyl(4, 1), 1).residual == 0
    assert I.antisymmetrization_residual(weyl(5, 1), 1).residual != 0
    assert I.antisymmetrization_residual(weyl(6, 1), 3).residual == 0


def test_four_d_trace_examples():
    w4 = weyl(4, 2)
    assert I.four_d_trace_residual(w4, 2).residual == 0
    assert I.four_d_trace_residual(w4, 5).residual == 0
    assert I.four_d_trace_residual(weyl(5, 2), 2).residual != 0


def test_bianchi_square_examples():
    assert I.bianchi_square_residual(weyl(4, 3)).residual == 0
    assert I.bianchi_square_residual(weyl(7, 3)).residual == 0
    bad = I.random_double_two_form(I.WeylSampleConfig(4, seed=3))
    r = I.bianchi_square_residual(bad)
    assert not r.passed and r.residual != 0


def test_five_d_reports():
    r = I.five_d_cubic_report(weyl(5, 4))
    assert r.passed and r.oracle_passed and r.residual == 0
    assert r.side_values["scalar"] == 0
    assert I.five_d_cubic_report(zero_weyl(5)).residual == 0
    r6 = I.five_d_cubic_report(weyl(6, 4), allow_other_dimension=True)
    assert not r6.passed and r6.oracle_passed
    with pytest.raises(I.IdentityError):
        I.five_d_cubic_report(weyl(6, 4))
    q = I.five_d_quartic_report(weyl(5, 4))
    assert q.passed and q.oracle_passed and q.side_values["scalar"] != 0
    assert I.five_d_quartic_report(zero_weyl(5)).residual == 0


def test_six_d_cubic_report():
    r = I.six_d_cubic_report(weyl(6, 5))
    assert r.passed and r.oracle_passed and r.side_values["scalar"] != 0
    r7 = I.six_d_cubic_report(weyl(7, 5), allow_other_dimension=True, oracle=False)
    assert not r7.passed


def test_lovelock_build_properties():
    z = I.lovelock_build(zero_weyl(6))
    assert z.A.is_zero() and z.H.is_zero()
    d = I.lovelock_build(weyl(6, 6))
    H = d.H
    assert (antisymmetrize(H, [0, 1, 2]) - H).is_zero()
    assert (antisymmetrize(H, [3, 4, 5]) - H).is_zero()
    assert einsum("abidei->abde", H).is_zero()
    for n in (5, 6):
        assert I.lovelock_build(weyl(n, 6)).H.is_zero()
    d7 = I.lovelock_build(weyl(7, 6))
    assert not d7.H.is_zero() and einsum("abidei->abde", d7.H).is_zero()


def test_lovelock_reports():
    r = I.lovelock_report(weyl(6, 7))
    assert r.passed and r.oracle_passed and r.side_values["scalar"] != 0
    assert r.side_values["printed_sign_residual"] != 0
    assert I.lovelock_report(weyl(5, 7)).passed
    assert not I.lovelock_report(weyl(7, 7)).passed


def test_lovelock_printed_coefficients_not_trace_free():
    with pytest.raises(I.IdentityError):
        I.lovelock_build(weyl(6, 8), printed=True)
    alpha, beta, gamma = F.lovelock_coefficients(6)
    assert (alpha, beta, gamma) == (Fraction(9, 2), Fraction(3), Fraction(1, 4))


def test_generic_double_three_form_square_identity():
    for seed in range(3):
        A = I.random_double_three_form(6, seed)
        assert I.lovelock_square_residual(A, True)[0] == 0
        assert I.lovelock_expanded_residual(A, True)[0][0] == 0


def test_coefficient_and_lemma_reports():
    for n in (4, 5, 6):
        assert I.coefficient_report(weyl(n, 9)).residual == 0
        assert I.lemma_report(weyl(n, 9)).passed


# ---------------------------------------------------------------- bracket oracle

def test_bracket_expansion_basics():
    from confeinstein.weyl_algebra import invariants
    w = weyl(4, 1)
    terms = bracket.expand(("cdab",), "ab", "cd", frozenset())
    assert sorted(c for _, c in terms) == [-1, -1, 1, 1]
    assert bracket.normalized(terms, w.weyl, "", 2).item() == invariants(w, 2).invariant(2)
    with pytest.raises(ValueError):
        bracket.expand(("abcd",), "abx", "cdx", frozenset())


@pytest.mark.parametrize("parent,home", [(bracket.PARENT_CUBIC_5D, 5), (bracket.PARENT_QUARTIC_5D, 5),
                                         (bracket.PARENT_CUBIC_6D, 6)])
def test_parents_vanish_at_home_dimension_only(parent, home):
    assert bracket.parent_value(parent, weyl(home, 2).weyl).is_zero()
    assert not bracket.parent_value(parent, weyl(home + 1, 2).weyl).is_zero()


# ---------------------------------------------------------------- properties

def _status(reports):
    return {r.label: r.passed for r in reports}


@settings(max_examples=8)
@given(seeds, st.sampled_from([4, 5, 6]))
def test_signature_independence(seed, n):
    got = {name: _status(all_reports(weyl(n, seed, sig=f(n)))) for name, f in SIGNATURES.items()}
    assert got["euclidean"] == got["lorentzian"] == got["split"]


@settings(max_examples=6)
@given(seeds, st.sampled_from([4, 5, 6]))
def test_scaling_by_three_keeps_zero_residuals(seed, n):
    w = weyl(n, seed)
    base = all_reports(w)
    lam = all_reports(scaled(w, Fraction(3)))
    for a, b in zip(base, lam):
        assert a.label == b.label
        if a.residual == 0:
            assert b.residual == 0, a.label


@settings(max_examples=6)
@given(seeds, st.sampled_from([4, 5, 6, 7]))
def test_every_report_behaves(seed, n):
    for r in all_reports(weyl(n, seed)):
        assert r.behaved, (r.label, n, r.residual)


@settings(max_examples=3)
@given(seeds, st.sampled_from([5, 6]))
def test_oracles_hold_above_home_dimension(seed, n):
    w = weyl(n + 1, seed)
    assert I.five_d_cubic_report(w, allow_other_dimension=True).oracle_passed
    assert I.five_d_quartic_report(w, allow_other_dimension=True).oracle_passed
    if n == 6:
        assert I.six_d_cubic_report(w, allow_other_dimension=True).oracle_passed


def test_float_mode_reports_pass_with_small_residual():
    for n in (4, 5, 6):
        w = weyl(n, 12, "float")
        for r in all_reports(w, oracle=False):
            if r.expected:
                assert r.passed, (r.label, n, r.residual)
