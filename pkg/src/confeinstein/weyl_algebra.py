"""Pointwise Weyl-chain algebra.

Chains use full-range contraction over each antisymmetric index pair:
Cp^ab_cd = C^ab_ij C(p-1)^ij_cd, and Cp = Cp^ab_ab.  The characteristic
coefficients follow from Newton's recursion k c_k = -sum_i p_i c_(k-i) with
p_1 = 0 and p_i = Ci.  With this weighting the invariants are exactly the
power sums of the bivector operator X^ab -> C^ab_cd X^cd, so the
Cayley-Hamilton relation holds with delta^a_[c delta^b_d] as identity.

The chain helpers are written against an einsum callable so the same code
runs on Tensors (one point) and on jets (a neighbourhood of a point).
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .tensor_core import (DOWN, UP, MetricAtPoint, Tensor, TensorError, einsum,
                          generalized_delta, max_abs_residual)

FLOAT_EPS = sys.float_info.epsilon
DEFAULT_DEGENERACY_TOL = 1e3 * FLOAT_EPS


class DegenerateWeylError(ArithmeticError):
    pass


class WeylPointError(ValueError):
    pass


def bivector_count(n: int) -> int:
    return n * (n - 1) // 2


# ---------------------------------------------------------------- generic helpers

def chain_list(W, upto: int, E: Callable):
    """[None, C1, C2, ..., C_upto]."""
    out = [None, W]
    for _ in range(2, upto + 1):
        out.append(E("abij,ijcd->abcd", out[-1], W))
    return out


def power_sums_from(chains, max_p: int, E: Callable):
    """[*, p_1, ..., p_max] with p_k = <chain(a), chain(k-a)>; needs chains up to ceil(max_p/2)."""
    ps = [None]
    have = len(chains) - 1
    for k in range(1, max_p + 1):
        if k <= have and k == 1:
            ps.append(E("abab->", chains[1]))
            continue
        a = min(have, k - 1)
        b = k - a
        if b > have or b < 1:
            raise ValueError(f"chains up to {have} cannot produce invariant {k}")
        ps.append(E("abcd,cdab->", chains[a], chains[b]))
    return ps


def newton_coefficients(ps, N: int, one):
    """c_0..c_N from power sums; p_1 is taken as exactly zero."""
    c = [one]
    for k in range(1, N + 1):
        acc = None
        for i in range(2, k + 1):
            t = ps[i] * c[k - i]
            acc = t if acc is None else acc + t
        if acc is None:
            c.append(one * 0)
        else:
            c.append(acc * Fraction(-1, k))
    return c


def lemma_projector(chains, c, N: int):
    """sum_{k != 1, k <= N-2} c_k C(N-1-k)."""
    acc = None
    for k in range(0, N - 1):
        if k == 1:
            continue
        t = chains[N - 1 - k] * c[k]
        acc = t if acc is None else acc + t
    return acc


# ---------------------------------------------------------------- WeylPoint

def _lower_all(W: Tensor, m: MetricAtPoint) -> Tensor:
    """C_abcd from C^ab_cd."""
    g = m.g if W.exact else m.g.to_float()
    return einsum("ae,bf,efcd->abcd", g, g, W)


def weyl_symmetry_residuals(W: Tensor, m: MetricAtPoint | None) -> dict:
    """Max-abs violations of each algebraic Weyl property (relative in float mode)."""
    if W.variance != (UP, UP, DOWN, DOWN):
        raise WeylPointError("Weyl tensor must be C^ab_cd")
    arr = W
    res = {
        "antisym_upper": max_abs_residual(arr, -arr.transpose(1, 0, 2, 3)).absolute,
        "antisym_lower": max_abs_residual(arr, -arr.transpose(0, 1, 3, 2)).absolute,
    }
    traces = einsum("abad->bd", arr)
    res["trace"] = traces.max_abs()
    if m is not None:
        L = _lower_all(W, m)
        res["pair_interchange"] = max_abs_residual(L, L.transpose(2, 3, 0, 1)).absolute
        bian = L + L.transpose(0, 2, 3, 1) + L.transpose(0, 3, 1, 2)
        res["bianchi"] = bian.max_abs()
    return res


@dataclass(eq=False)
class WeylPoint:
    weyl: Tensor
    metric: MetricAtPoint | None = None
    check: bool = True
    rel_tol: float = 1e-10
    _chains: dict = field(default_factory=dict, repr=False, compare=False)
    _coeffs: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.weyl.rank != 4:
            raise WeylPointError("Weyl tensor must have rank 4")
        if self.metric is not None and self.metric.n != self.weyl.n:
            raise WeylPointError("metric and Weyl dimensions differ")
        if self.check:
            res = weyl_symmetry_residuals(self.weyl, self.metric)
            scale = max(float(self.weyl.max_abs()), 1e-300)
            for name, v in res.items():
                bad = (v != 0) if self.weyl.exact else (float(v) > self.rel_tol * scale)
                if bad:
                    raise WeylPointError(f"Weyl property {name} violated (residual {float(v):.3e})")

    @property
    def n(self) -> int:
        return self.weyl.n

    @property
    def N(self) -> int:
        return bivector_count(self.n)

    @property
    def exact(self) -> bool:
        return self.weyl.exact

    def one(self):
        return Fraction(1) if self.exact else 1.0

    def chain(self, p: int) -> Tensor:
        if p < 1:
            raise ValueError("chain order p must be >= 1")
        if p == 1:
            return self.weyl
        hit = self._chains.get(p)
        if hit is not None:
            return hit
        prev = self.chain(p - 1)
        return self._chains.setdefault(p, einsum("abij,ijcd->abcd", prev, self.weyl))

    def chains(self, upto: int) -> list:
        return [None] + [self.chain(p) for p in range(1, upto + 1)]


def chain(w: WeylPoint, p: int) -> Tensor:
    return w.chain(p)


@dataclass(frozen=True)
class InvariantSet:
    invariants: tuple                 # (C1, C2, ..., C_max)
    coefficients: tuple | None = None  # (c_0, ..., c_N)

    def invariant(self, p: int):
        return self.invariants[p - 1]

    def coefficient(self, k: int):
        return self.coefficients[k]


def invariants(w: WeylPoint, max_p: int) -> InvariantSet:
    if max_p < 2:
        raise ValueError("max_p must be >= 2")
    half = (max_p + 1) // 2
    ps = power_sums_from(w.chains(max(half, 1)), max_p, einsum)
    return InvariantSet(tuple(p.item() for p in ps[1:]))


def characteristic_coefficients(w: WeylPoint) -> InvariantSet:
    if w._coeffs is not None:
        return w._coeffs
    N = w.N
    inv = invariants(w, N)
    ps = [None] + list(inv.invariants)
    c = newton_coefficients(ps, N, w.one())
    out = InvariantSet(inv.invariants, tuple(c))
    w._coeffs = out
    return out


def printed_coefficients(inv: InvariantSet) -> dict:
    """Closed forms of c_2..c_6 in terms of C2..C6."""
    P = {p: inv.invariant(p) for p in range(2, min(6, len(inv.invariants)) + 1)}
    out = {}
    F = Fraction
    if 2 in P:
        out[2] = -F(1, 2) * P[2]
    if 3 in P:
        out[3] = -F(1, 3) * P[3]
    if 4 in P:
        out[4] = -F(1, 4) * (P[4] - F(1, 2) * P[2] ** 2)
    if 5 in P:
        out[5] = -F(1, 5) * (P[5] - F(5, 6) * P[2] * P[3])
    if 6 in P:
        out[6] = -F(1, 6) * (P[6] - F(3, 4) * P[2] * P[4] - F(1, 3) * P[3] ** 2 + F(1, 8) * P[2] ** 3)
    return out


def scale_of(w: WeylPoint, inv: InvariantSet | None = None) -> float:
    """s = sqrt(C2/N) if C2 > 0, else the largest Weyl component magnitude."""
    inv = inv or invariants(w, 2)
    c2 = float(inv.invariant(2))
    if c2 > 0:
        return math.sqrt(c2 / w.N)
    return float(w.weyl.max_abs())


def nondegeneracy(w: WeylPoint, tol: float = DEFAULT_DEGENERACY_TOL):
    cs = characteristic_coefficients(w)
    cN = cs.coefficient(w.N)
    if w.exact:
        return cN != 0, cN
    s = scale_of(w, cs)
    if s == 0:
        return False, cN
    return abs(float(cN)) > tol * s ** w.N, cN


def cayley_hamilton_tensor(w: WeylPoint, coefficients=None) -> Tensor:
    N = w.N
    c = list(coefficients if coefficients is not None else characteristic_coefficients(w).coefficients)
    acc = w.chain(N) * c[0]
    for k in range(1, N):
        acc = acc + w.chain(N - k) * c[k]
    ident = generalized_delta(w.n, 2, w.exact).scale(Fraction(1, 2) if w.exact else 0.5)
    return acc + ident * c[N]


def cayley_hamilton_residual(w: WeylPoint, coefficients=None):
    """Max-abs of the Cayley-Hamilton combination; exact 0 or a float."""
    return cayley_hamilton_tensor(w, coefficients).max_abs()


def solve_weyl_linear(w: WeylPoint, H: Tensor, tol: float = DEFAULT_DEGENERACY_TOL) -> Tensor:
    """Unique V with C^ab_cd V^d = H^ab_c."""
    if H.variance != (UP, UP, DOWN) or H.n != w.n or H.exact != w.exact:
        raise TensorError("H must be H^ab_c in the Weyl tensor's dimension and scalar kind")
    asym = (H + H.transpose(1, 0, 2)).max_abs()
    if (asym != 0) if H.exact else (float(asym) > 1e-12 * max(float(H.max_abs()), 1e-300)):
        raise TensorError("H must be antisymmetric in its upper pair")
    ok, cN = nondegeneracy(w, tol)
    if not ok:
        raise DegenerateWeylError("Weyl tensor is degenerate (c_N vanishes)")
    N = w.N
    c = characteristic_coefficients(w).coefficients
    P = lemma_projector(w.chains(N - 1), c, N)
    factor = Fraction(2) / ((w.n - 1) * cN) if w.exact else 2.0 / ((w.n - 1) * float(cN))
    return einsum("ijb,abij->a", H, P) * factor


def apply_weyl(w: WeylPoint, V: Tensor) -> Tensor:
    """H^ab_c = C^ab_cd V^d."""
    return einsum("abcd,d->abc", w.weyl, V)
