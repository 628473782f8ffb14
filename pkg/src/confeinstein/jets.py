"""Truncated multivariate Taylor series ("jets") with tensor-valued coefficients.

A jet of order L in n variables stores the Taylor coefficients a_alpha of a
field around a base point for all multi-indices |alpha| <= L, so that
f(p + x) = sum_alpha a_alpha x^alpha + O(|x|^(L+1)).  Monomials are ordered by
total degree, so truncating to a lower order is a prefix slice.

Arithmetic is exact (integer numerators with one common denominator) or
float64.  Derivatives are exact coefficient shifts; no step sizes appear.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import symexpr as sx
from .tensor_core import Tensor, TensorError, _gcd_reduce, _INT64_SAFE


@lru_cache(maxsize=None)
def monomials(n: int, order: int) -> tuple:
    out = []
    for d in range(order + 1):
        for c in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in c:
                e[i] += 1
            out.append(tuple(e))
    # combinations_with_replacement is lexicographic within each degree
    return tuple(out)


@lru_cache(maxsize=None)
def _index(n: int, order: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, order))}


def count(n: int, order: int) -> int:
    return math.comb(n + order, order)


@lru_cache(maxsize=None)
def _pairs(n: int, order: int):
    """Pair tables (ia, ib, starts) for products truncated at ``order``."""
    monos = monomials(n, order)
    idx = _index(n, order)
    trip = []
    for ia, a in enumerate(monos):
        da = sum(a)
        for ib, b in enumerate(monos):
            if da + sum(b) > order:
                continue
            ic = idx[tuple(x + y for x, y in zip(a, b))]
            trip.append((ic, ia, ib))
    trip.sort()
    ic = np.array([t[0] for t in trip])
    ia = np.array([t[1] for t in trip])
    ib = np.array([t[2] for t in trip])
    starts = np.flatnonzero(np.r_[True, ic[1:] != ic[:-1]])
    return ia, ib, starts, int(np.max(np.bincount(ic)))


@lru_cache(maxsize=None)
def _deriv(n: int, order: int, var: int):
    """Index and multiplier tables for d/dx_var from order to order-1."""
    src = _index(n, order)
    idx, mult = [], []
    for b in monomials(n, order - 1):
        up = list(b)
        up[var] += 1
        idx.append(src[tuple(up)])
        mult.append(up[var])
    return np.array(idx), np.array(mult)


class JetError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class Jet:
    n: int
    order: int
    num: np.ndarray
    den: int = 1
    exact: bool = True

    @property
    def shape(self):
        return self.num.shape[1:]

    # ------------------------------------------------------------ building
    @staticmethod
    def constant(n: int, order: int, value, exact: bool) -> "Jet":
        """Constant jet; value is a Tensor, a numpy array or a scalar."""
        if isinstance(value, Tensor):
            if value.exact != exact:
                raise JetError("scalar kind mismatch")
            base, den = value.num, value.den
        elif exact:
            t = Tensor.from_values(value, ("d",) * np.ndim(value), True) if np.ndim(value) \
                else Tensor.scalar(value, True)
            base, den = t.num, t.den
        else:
            base, den = np.asarray(value, dtype=np.float64), 1
        M = count(n, order)
        if exact:
            num = np.zeros((M,) + base.shape, dtype=np.int64).astype(object)
        else:
            num = np.zeros((M,) + base.shape)
        num[0] = base
        return Jet(n, order, num, den, exact)

    @staticmethod
    def coordinate(n: int, order: int, var: int, base, exact: bool) -> "Jet":
        j = Jet.constant(n, order, base, exact)
        if order >= 1:
            num = j.num.copy()
            num[1 + var] = j.den
            return Jet(n, order, num, j.den, exact)
        return j

    def _make(self, num, den, order=None) -> "Jet":
        order = self.order if order is None else order
        if self.exact:
            num, den = _gcd_reduce(num, den)
        return Jet(self.n, order, num, den, self.exact)

    # ------------------------------------------------------------ access
    def value(self):
        """Constant term as a scalar or a numpy array of Fractions / floats."""
        v = self.num[0]
        if not self.exact:
            return float(v) if np.ndim(v) == 0 else np.array(v)
        if np.ndim(v) == 0:
            return Fraction(int(v), self.den)
        d = self.den
        return np.vectorize(lambda x: Fraction(int(x), d), otypes=[object])(v)

    def value_tensor(self, variance) -> Tensor:
        v = self.num[0]
        if self.exact:
            return Tensor.from_ints(np.asarray(v, dtype=object), variance, self.den)
        return Tensor(np.asarray(v, dtype=np.float64), tuple(variance), 1, False)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError("cannot raise jet order")
        return Jet(self.n, order, self.num[:count(self.n, order)], self.den, self.exact)

    def max_abs(self) -> float:
        if self.num.size == 0:
            return 0.0
        m = np.max(np.abs(self.num))
        return float(Fraction(int(m), self.den)) if self.exact else float(m)

    # ------------------------------------------------------------ algebra
    def _align(self, other: "Jet"):
        if not isinstance(other, Jet):
            raise JetError("operand is not a Jet")
        if self.exact != other.exact or self.n != other.n:
            raise JetError("jet space or scalar kind mismatch")
        L = min(self.order, other.order)
        a = self if self.order == L else self.truncate(L)
        b = other if other.order == L else other.truncate(L)
        return a, b, L

    def __add__(self, other: "Jet") -> "Jet":
        a, b, L = self._align(other)
        if a.shape != b.shape:
            raise JetError(f"shape mismatch {a.shape} vs {b.shape}")
        if not self.exact:
            return Jet(self.n, L, a.num + b.num, 1, False)
        D = a.den * b.den // math.gcd(a.den, b.den)
        return a._make(a.num * (D // a.den) + b.num * (D // b.den), D, L)

    def __neg__(self) -> "Jet":
        return Jet(self.n, self.order, -self.num, self.den, self.exact)

    def __sub__(self, other: "Jet") -> "Jet":
        return self + (-other)

    def scale(self, c) -> "Jet":
        if not self.exact:
            return Jet(self.n, self.order, self.num * float(c), 1, False)
        if isinstance(c, float):
            raise JetError("float factor on an exact jet")
        c = Fraction(c)
        num = self.num * c.numerator
        return self._make(num, self.den * c.denominator)

    def __mul__(self, c) -> "Jet":
        if isinstance(c, Jet):
            if c.shape == () or self.shape == ():
                return scalar_product(self, c)
            raise JetError("use jet_einsum for tensor jets")
        return self.scale(c)

    __rmul__ = __mul__

    def transpose(self, *perm) -> "Jet":
        if len(perm) == 1 and not isinstance(perm[0], int):
            perm = tuple(perm[0])
        full = (0,) + tuple(p + 1 for p in perm)
        return Jet(self.n, self.order, np.ascontiguousarray(self.num.transpose(full)), self.den, self.exact)

    def derivative(self, var: int) -> "Jet":
        if self.order < 1:
            raise JetError("derivative of an order-0 jet")
        idx, mult = _deriv(self.n, self.order, var)
        shape = (len(mult),) + (1,) * len(self.shape)
        if self.exact:
            num = self.num[idx] * mult.astype(object).reshape(shape)
        else:
            num = self.num[idx] * mult.reshape(shape)
        return self._make(num, self.den, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of partial derivatives; new slot first."""
        parts = [self.derivative(i) for i in range(self.n)]
        return stack(parts, axis=0)

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, shape={self.shape}, exact={self.exact})"


def stack(jets, axis: int = 0) -> Jet:
    j0 = jets[0]
    if any(j.order != j0.order or j.exact != j0.exact for j in jets):
        L = min(j.order for j in jets)
        jets = [j.truncate(L) for j in jets]
        j0 = jets[0]
    if j0.exact:
        D = 1
        for j in jets:
            D = D * j.den // math.gcd(D, j.den)
        num = np.stack([j.num * (D // j.den) for j in jets], axis=axis + 1)
        return j0._make(num, D)
    return Jet(j0.n, j0.order, np.stack([j.num for j in jets], axis=axis + 1), 1, False)


def _pair_product(spec_a: str, spec_b: str, out: str, a: Jet, b: Jet) -> Jet:
    a, b, L = a._align(b)
    ia, ib, starts, mult = _pairs(a.n, L)
    spec = f"P{spec_a},P{spec_b}->P{out}"
    if a.exact:
        bound = mult
        for ch in set(spec_a + spec_b) - set(out):
            bound *= a.n
        ma = int(np.max(np.abs(a.num))) if a.num.size else 0
        mb = int(np.max(np.abs(b.num))) if b.num.size else 0
        if bound * max(ma, 1) * max(mb, 1) < _INT64_SAFE:
            prod = np.einsum(spec, a.num.astype(np.int64)[ia], b.num.astype(np.int64)[ib])
            num = np.add.reduceat(prod, starts, axis=0).astype(object)
            num = np.vectorize(int, otypes=[object])(num) if num.size else num
        else:
            prod = np.einsum(spec, a.num[ia], b.num[ib])
            num = np.add.reduceat(prod, starts, axis=0)
        return a._make(np.asarray(num, dtype=object), a.den * b.den, L)
    prod = np.einsum(spec, a.num[ia], b.num[ib])
    return Jet(a.n, L, np.add.reduceat(prod, starts, axis=0), 1, False)


def jet_einsum(spec: str, *ops: Jet) -> Jet:
    """Einstein summation over jets (no variance bookkeeping)."""
    lhs, out = spec.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(ops):
        raise JetError("operand count mismatch")
    for t, j in zip(terms, ops):
        if len(t) != len(j.shape):
            raise JetError(f"spec {t!r} does not match jet rank {len(j.shape)}")
    terms = list(terms)
    ops = list(ops)
    if len(ops) == 1:
        a = ops[0]
        num = np.einsum(f"P{terms[0]}->P{out}", a.num)
        return a._make(num, a.den) if a.exact else Jet(a.n, a.order, num, 1, False)
    if len(ops) > 2:
        consts = [np.ones(j.shape) for j in ops]
        path = np.einsum_path(spec, *consts, optimize="greedy")[0][1:]
    else:
        path = [(0, 1)]
    for pos in path:
        i, j = sorted(pos)
        ta, tb = terms[i], terms[j]
        rest = "".join(t for k, t in enumerate(terms) if k not in (i, j)) + out
        keep = "".join(dict.fromkeys(ch for ch in ta + tb if ch in rest))
        res = _pair_product(ta, tb, keep, ops[i], ops[j])
        for k in (j, i):
            del terms[k]
            del ops[k]
        terms.append(keep)
        ops.append(res)
    final = ops[0]
    if terms[0] != out:
        num = np.einsum(f"P{terms[0]}->P{out}", final.num)
        final = final._make(num, final.den) if final.exact else Jet(final.n, final.order, num, 1, False)
    return final


def scalar_product(a: Jet, b: Jet) -> Jet:
    la = "".join("abcdefghijklm"[: len(a.shape)])
    lb = "".join("nopqrstuvwxyz"[: len(b.shape)])
    return _pair_product(la, lb, la + lb, a, b)


def _head(j: Jet):
    v = j.num[0]
    return Fraction(int(v), j.den) if j.exact else float(v)


def _tail(j: Jet) -> Jet:
    num = j.num.copy()
    num[0] = 0
    return Jet(j.n, j.order, num, j.den, j.exact)


def _const_like(j: Jet, value) -> Jet:
    return Jet.constant(j.n, j.order, value, j.exact)


def compose_series(h: Jet, coeffs) -> Jet:
    """sum_k coeffs[k] h^k for a nilpotent scalar jet h (zero constant term)."""
    L = h.order
    c = list(coeffs[: L + 1]) + [0] * max(0, L + 1 - len(coeffs))
    r = _const_like(h, c[L])
    for k in range(L - 1, -1, -1):
        r = scalar_product(h, r) + _const_like(h, c[k])
    return r


def reciprocal(a: Jet) -> Jet:
    if a.shape != ():
        raise JetError("reciprocal needs a scalar jet")
    a0 = _head(a)
    if a0 == 0:
        raise JetError("division by a jet with zero constant term")
    inv0 = 1 / a0
    u = _tail(a).scale(inv0)
    coeffs = [(-1) ** k * inv0 for k in range(a.order + 1)]
    return compose_series(u, coeffs)


def divide(a: Jet, b: Jet) -> Jet:
    return a * reciprocal(b)


def matrix_inverse(G: Jet) -> Jet:
    """Inverse of a square-matrix-valued jet by a Neumann series."""
    n0 = G.shape[0]
    if G.shape != (n0, n0):
        raise JetError("matrix_inverse needs a square matrix jet")
    if G.exact:
        from .tensor_core import _exact_inverse
        g0 = [[Fraction(int(G.num[0, i, j]), G.den) for j in range(n0)] for i in range(n0)]
        try:
            inv0 = _exact_inverse(g0)
        except TensorError as e:
            raise JetError(str(e)) from None
        Ginv0 = Jet.constant(G.n, G.order, inv0, True)
        eye = Jet.constant(G.n, G.order, np.eye(n0, dtype=np.int64).astype(object).tolist(), True)
    else:
        g0 = np.array(G.num[0], dtype=np.float64)
        if not np.all(np.isfinite(g0)) or abs(np.linalg.det(g0)) < 1e-300:
            raise JetError("singular matrix jet")
        Ginv0 = Jet.constant(G.n, G.order, np.linalg.inv(g0), False)
        eye = Jet.constant(G.n, G.order, np.eye(n0), False)
    U = jet_einsum("ab,bc->ac", Ginv0, _tail(G))
    R = eye
    for _ in range(G.order):
        R = eye - jet_einsum("ab,bc->ac", U, R)
    return jet_einsum("ab,bc->ac", R, Ginv0)


def integer_power(a: Jet, k: int) -> Jet:
    if k < 0:
        return integer_power(reciprocal(a), -k)
    result = _const_like(a, 1)
    base = a
    while k:
        if k & 1:
            result = scalar_product(result, base)
        k >>= 1
        if k:
            base = scalar_product(base, base)
    return result


def _func_coeffs(name: str, a0: float, L: int):
    f = math.factorial
    if name == "exp":
        e = math.exp(a0)
        return [e / f(k) for k in range(L + 1)]
    if name == "sin":
        return [math.sin(a0 + k * math.pi / 2) / f(k) for k in range(L + 1)]
    if name == "cos":
        return [math.cos(a0 + k * math.pi / 2) / f(k) for k in range(L + 1)]
    if name == "sinh":
        ep, em = math.exp(a0), math.exp(-a0)
        return [(ep + (-1) ** (k + 1) * em) / 2 / f(k) for k in range(L + 1)]
    if name == "cosh":
        ep, em = math.exp(a0), math.exp(-a0)
        return [(ep + (-1) ** k * em) / 2 / f(k) for k in range(L + 1)]
    if name == "ln":
        if a0 <= 0:
            raise sx.EvaluationError("ln of a non-positive value")
        return [math.log(a0)] + [(-1) ** (k - 1) / (k * a0 ** k) for k in range(1, L + 1)]
    if name == "sqrt":
        if a0 < 0 or (a0 == 0 and L > 0):
            raise sx.EvaluationError("sqrt outside its domain")
        out = []
        for k in range(L + 1):
            b = 1.0
            for i in range(k):
                b *= (0.5 - i) / (i + 1)
            out.append(b * a0 ** (0.5 - k))
        return out
    raise sx.EvaluationError(f"no series for {name}")


def apply_function(name: str, a: Jet) -> Jet:
    if a.exact:
        raise sx.EvaluationError(f"transcendental function {name!r} in exact mode")
    if name == "tan":
        return divide(apply_function("sin", a), apply_function("cos", a))
    if name == "tanh":
        return divide(apply_function("sinh", a), apply_function("cosh", a))
    a0 = _head(a)
    coeffs = _func_coeffs(name, a0, a.order)
    out = compose_series(_tail(a), coeffs)
    if not np.all(np.isfinite(out.num)):
        raise sx.EvaluationError("non-finite result")
    return out


def expr_jet(e: sx.Expr, coords, point, params, order: int, exact: bool) -> Jet:
    """Taylor expansion of an expression about ``point`` up to ``order``."""
    n = len(coords)
    cidx = {c: i for i, c in enumerate(coords)}
    memo: dict = {}

    def go(x):
        r = memo.get(id(x))
        if r is not None and r[0] is x:
            return r[1]
        v = _go(x)
        memo[id(x)] = (x, v)
        return v

    def _go(x):
        if isinstance(x, sx.Const):
            return Jet.constant(n, order, x.value if exact else float(x.value), exact)
        if isinstance(x, sx.Var):
            if x.name in cidx:
                i = cidx[x.name]
                return Jet.coordinate(n, order, i, point[i], exact)
            if x.name in params:
                return Jet.constant(n, order, params[x.name], exact)
            raise sx.EvaluationError(f"unbound variable {x.name!r}")
        if isinstance(x, sx.Add):
            acc = go(x.terms[0])
            for t in x.terms[1:]:
                acc = acc + go(t)
            return acc
        if isinstance(x, sx.Mul):
            acc = go(x.factors[0])
            for f in x.factors[1:]:
                acc = scalar_product(acc, go(f))
            return acc
        if isinstance(x, sx.Div):
            den = go(x.den)
            if _head(den) == 0:
                raise sx.EvaluationError("division by zero")
            return divide(go(x.num), den)
        if isinstance(x, sx.Pow):
            b = go(x.base)
            if x.exp < 0 and _head(b) == 0:
                raise sx.EvaluationError("division by zero")
            return integer_power(b, x.exp)
        if isinstance(x, sx.Neg):
            return -go(x.arg)
        if isinstance(x, sx.Func):
            return apply_function(x.name, go(x.arg))
        raise TypeError(f"unknown node {x!r}")

    if exact:
        point = [Fraction(p) for p in point]
        params = {k: Fraction(v) for k, v in params.items()}
    else:
        point = [float(p) for p in point]
        params = {k: float(v) for k, v in params.items()}
    return go(e)


def antisymmetrize(j: Jet, slots) -> Jet:
    """Normalized bracket over the listed tensor slots (jet slot excluded)."""
    from .tensor_core import perm_sign
    slots = list(slots)
    k = len(slots)
    acc = None
    for p in itertools.permutations(range(k)):
        axes = list(range(len(j.shape)))
        for i, s in enumerate(slots):
            axes[s] = slots[p[i]]
        t = j.num.transpose([0] + [a + 1 for a in axes])
        if perm_sign(p) < 0:
            t = -t
        acc = t if acc is None else acc + t
    f = math.factorial(k)
    if j.exact:
        return j._make(np.ascontiguousarray(acc), j.den * f)
    return Jet(j.n, j.order, np.ascontiguousarray(acc) / f, 1, False)


def rationalize(j: Jet) -> Jet:
    """Exact jet with the same (binary) values as a float jet."""
    if j.exact:
        return j
    if not np.all(np.isfinite(j.num)):
        raise JetError("cannot rationalize non-finite jet")
    fr = [Fraction(float(x)) for x in j.num.ravel()]
    den = max((f.denominator for f in fr), default=1)
    num = np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object).reshape(j.num.shape)
    num, den = _gcd_reduce(num, den)
    return Jet(j.n, j.order, num, den, True)


def to_float(j: Jet) -> Jet:
    if not j.exact:
        return j
    out = np.array([float(Fraction(int(x), j.den)) for x in j.num.ravel()]).reshape(j.num.shape)
    return Jet(j.n, j.order, out, 1, False)
