"""Dense multi-index tensors over exact rationals or binary64 floats.

Exact tensors store an integer numerator array (numpy object dtype holding
Python ints) and one positive common denominator, kept reduced.  Every
operation is exact; float tensors use ordinary float64 arrays.

Slot variance is tracked per slot ("u" upper, "d" lower).  ``einsum`` infers
result variance from the index letters and refuses to contract two slots of
the same variance, which catches most index-placement slips.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

UP, DOWN = "u", "d"
MAX_COMPONENTS = 1 << 24
_INT64_SAFE = 1 << 62


class TensorError(ValueError):
    pass


def perm_sign(p: Sequence[int]) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _gcd_reduce(num: np.ndarray, den: int):
    if den <= 0:
        raise TensorError("denominator must be positive")
    if not isinstance(num, np.ndarray):
        num = np.array(num, dtype=object)
    if num.size == 0:
        return num, 1
    g = int(np.gcd.reduce(num.ravel())) if num.size > 1 else abs(int(num.ravel()[0]))
    g = math.gcd(g, den)
    if g == 0:
        return num, 1
    if g > 1:
        num = np.asarray(num // g, dtype=num.dtype)
        den //= g
    if not num.any():
        den = 1
    return num, den


def _as_int_objects(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    return np.vectorize(int, otypes=[object])(arr) if arr.size else arr


@dataclass(frozen=True, eq=False)
class Tensor:
    num: np.ndarray
    variance: tuple
    den: int = 1
    exact: bool = True

    def __post_init__(self):
        if not isinstance(self.num, np.ndarray):
            object.__setattr__(self, "num", np.array(self.num, dtype=object if self.exact else np.float64))
        var = tuple(self.variance)
        object.__setattr__(self, "variance", var)
        if any(v not in (UP, DOWN) for v in var):
            raise TensorError(f"bad variance {var}")
        if self.num.ndim != len(var):
            raise TensorError("variance length must equal rank")
        if len(set(self.num.shape)) > 1:
            raise TensorError("all slots must share one dimension")
        if self.num.size > MAX_COMPONENTS:
            raise TensorError("component count exceeds dense storage cap")
        if self.exact and self.num.dtype != object:
            raise TensorError("exact tensors hold object-dtype integer arrays")
        if not self.exact and self.num.dtype != np.float64:
            raise TensorError("float tensors hold float64 arrays")
        self.num.flags.writeable = False

    # ------------------------------------------------------------ builders
    @staticmethod
    def from_values(values, variance, exact: bool = True) -> "Tensor":
        """Build from nested sequences / arrays of ints, Fractions or floats."""
        if not exact:
            return Tensor(np.array(values, dtype=np.float64), tuple(variance), 1, False)
        arr = np.asarray(values, dtype=object)
        flat = [Fraction(v) for v in arr.ravel()]
        den = 1
        for f in flat:
            den = den * f.denominator // math.gcd(den, f.denominator)
        nums = np.array([int(f.numerator * (den // f.denominator)) for f in flat] or [], dtype=object)
        nums = nums.reshape(arr.shape)
        nums, den = _gcd_reduce(nums, den)
        return Tensor(nums, tuple(variance), den, True)

    @staticmethod
    def from_ints(nums, variance, den: int = 1) -> "Tensor":
        arr = np.asarray(nums)
        arr = arr.astype(object) if arr.dtype != object else arr
        if arr.size and not isinstance(arr.ravel()[0], int):
            arr = _as_int_objects(arr)
        arr, den = _gcd_reduce(arr, int(den))
        return Tensor(arr, tuple(variance), den, True)

    @staticmethod
    def zeros(n: int, variance, exact: bool = True) -> "Tensor":
        shape = (n,) * len(variance)
        if exact:
            return Tensor(np.zeros(shape, dtype=np.int64).astype(object), tuple(variance), 1, True)
        return Tensor(np.zeros(shape), tuple(variance), 1, False)

    @staticmethod
    def scalar(value, exact: bool = True) -> "Tensor":
        return Tensor.from_values(value, (), exact)

    # ------------------------------------------------------------ properties
    @property
    def n(self) -> int:
        return self.num.shape[0] if self.num.ndim else 0

    @property
    def rank(self) -> int:
        return self.num.ndim

    @property
    def shape(self):
        return self.num.shape

    @property
    def kind(self) -> str:
        return "exact" if self.exact else "float"

    def values(self) -> np.ndarray:
        if not self.exact:
            return self.num
        d = self.den
        return np.vectorize(lambda v: Fraction(v, d), otypes=[object])(self.num) \
            if self.num.size else self.num.copy()

    def to_float(self) -> "Tensor":
        if not self.exact:
            return self
        if self.den == 1:
            arr = self.num.astype(np.float64)
        else:
            d = self.den
            arr = np.vectorize(lambda v: v / d, otypes=[np.float64])(self.num)
        return Tensor(np.asarray(arr, dtype=np.float64), self.variance, 1, False)

    def item(self):
        if self.rank != 0:
            raise TensorError("item() needs a rank-0 tensor")
        v = self.num[()]
        return Fraction(int(v), self.den) if self.exact else float(v)

    def entry(self, idx):
        v = self.num[tuple(idx)]
        return Fraction(int(v), self.den) if self.exact else float(v)

    def is_zero(self) -> bool:
        return not bool(np.any(self.num))

    def max_abs(self):
        if self.num.size == 0:
            return Fraction(0) if self.exact else 0.0
        m = np.max(np.abs(self.num))
        return Fraction(int(m), self.den) if self.exact else float(m)

    # ------------------------------------------------------------ arithmetic
    def _check_same(self, other: "Tensor"):
        if not isinstance(other, Tensor):
            raise TensorError("operand is not a Tensor")
        if self.exact != other.exact:
            raise TensorError("exact and float tensors never mix")
        if self.shape != other.shape:
            raise TensorError(f"shape mismatch {self.shape} vs {other.shape}")
        if self.variance != other.variance:
            raise TensorError(f"variance mismatch {self.variance} vs {other.variance}")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check_same(other)
        if not self.exact:
            return Tensor(self.num + other.num, self.variance, 1, False)
        L = self.den * other.den // math.gcd(self.den, other.den)
        num = self.num * (L // self.den) + other.num * (L // other.den)
        num, L = _gcd_reduce(num, L)
        return Tensor(num, self.variance, L, True)

    def __neg__(self) -> "Tensor":
        return Tensor(-self.num, self.variance, self.den, self.exact)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + (-other)

    def scale(self, c) -> "Tensor":
        if not self.exact:
            return Tensor(self.num * float(c), self.variance, 1, False)
        if isinstance(c, float):
            raise TensorError("float scale factor on an exact tensor")
        c = Fraction(c)
        num, den = _gcd_reduce(self.num * c.numerator, self.den * c.denominator) \
            if c >= 0 else _gcd_reduce(self.num * (-c.numerator), self.den * c.denominator)
        if c < 0:
            num = -num
        return Tensor(num, self.variance, den, True)

    def __mul__(self, c) -> "Tensor":
        if isinstance(c, Tensor):
            raise TensorError("use outer_product or einsum for tensor products")
        return self.scale(c)

    __rmul__ = __mul__

    def transpose(self, *perm) -> "Tensor":
        if len(perm) == 1 and not isinstance(perm[0], int):
            perm = tuple(perm[0])
        var = tuple(self.variance[p] for p in perm)
        return Tensor(np.ascontiguousarray(self.num.transpose(perm)), var, self.den, self.exact)

    def with_variance(self, variance) -> "Tensor":
        """Relabel variance without touching components (metric = identity use only)."""
        return Tensor(self.num, tuple(variance), self.den, self.exact)

    def __repr__(self):
        return f"Tensor(n={self.n}, variance={''.join(self.variance)}, kind={self.kind})"


# ---------------------------------------------------------------- einsum

def _parse_spec(spec: str, count: int):
    if "->" not in spec:
        raise TensorError("einsum spec needs an explicit '->' output")
    lhs, out = spec.replace(" ", "").split("->")
    ins = lhs.split(",")
    if len(ins) != count:
        raise TensorError(f"spec names {len(ins)} operands, got {count}")
    return ins, out


def einsum(spec: str, *ops: Tensor) -> Tensor:
    """Variance-checked Einstein summation over Tensors.

    A repeated letter must pair one upper with one lower slot.  Output
    letters must occur exactly once among the inputs; their variance is
    inherited.
    """
    ins, out = _parse_spec(spec, len(ops))
    if not ops:
        raise TensorError("einsum needs at least one operand")
    exact = ops[0].exact
    n = None
    seen: dict = {}
    for term, t in zip(ins, ops):
        if t.exact != exact:
            raise TensorError("exact and float tensors never mix")
        if len(term) != t.rank:
            raise TensorError(f"spec {term!r} does not match rank {t.rank}")
        if t.rank:
            if n is None:
                n = t.n
            elif t.n != n:
                raise TensorError(f"dimension mismatch {n} vs {t.n}")
        for ch, v in zip(term, t.variance):
            seen.setdefault(ch, []).append(v)
    out_var = []
    for ch in out:
        vs = seen.get(ch)
        if vs is None or len(vs) != 1:
            raise TensorError(f"output index {ch!r} must appear exactly once in the inputs")
        out_var.append(vs[0])
    if len(set(out)) != len(out):
        raise TensorError("repeated output index")
    summed = 1
    for ch, vs in seen.items():
        if ch in out:
            continue
        if len(vs) != 2 or vs[0] == vs[1]:
            raise TensorError(f"index {ch!r} must pair one upper and one lower slot, got {vs}")
        summed *= n or 1
    arrays = [t.num for t in ops]
    if not exact:
        res = np.einsum(spec, *arrays, optimize=len(ops) > 2)
        return Tensor(np.asarray(res, dtype=np.float64), tuple(out_var), 1, False)
    den = 1
    bound = summed
    for t in ops:
        den *= t.den
        m = int(np.max(np.abs(t.num))) if t.num.size else 0
        bound *= max(m, 1)
    if bound < _INT64_SAFE:
        res = np.einsum(spec, *[a.astype(np.int64) for a in arrays], optimize=len(ops) > 2)
        res = np.asarray(res).astype(object)
        res = _as_int_objects(res) if res.ndim else np.array(int(res[()]), dtype=object)
    else:
        res = np.asarray(np.einsum(spec, *arrays, optimize=len(ops) > 2), dtype=object)
    num, den = _gcd_reduce(res, den)
    return Tensor(num, tuple(out_var), den, True)


# ---------------------------------------------------------------- core ops

def outer_product(a: Tensor, b: Tensor) -> Tensor:
    if a.exact != b.exact:
        raise TensorError("scalar kind mismatch")
    if a.rank and b.rank and a.n != b.n:
        raise TensorError(f"dimension mismatch {a.n} vs {b.n}")
    if a.exact:
        num = np.multiply.outer(a.num, b.num).astype(object)
        num, den = _gcd_reduce(num, a.den * b.den)
        return Tensor(num, a.variance + b.variance, den, True)
    return Tensor(np.multiply.outer(a.num, b.num), a.variance + b.variance, 1, False)


def _letters(k: int) -> str:
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[:k]


def contract(t: Tensor, slot_a: int, slot_b: int, metric: "MetricAtPoint | None" = None) -> Tensor:
    """Trace over two slots with the full index range."""
    r = t.rank
    if not (0 <= slot_a < r and 0 <= slot_b < r):
        raise TensorError("slot out of range")
    if slot_a == slot_b:
        raise TensorError("contraction needs two distinct slots")
    if t.variance[slot_a] == t.variance[slot_b]:
        if metric is None:
            raise TensorError("same-variance contraction needs a metric")
        t = raise_lower(t, slot_b, metric)
    letters = list(_letters(r))
    letters[slot_b] = letters[slot_a]
    out = "".join(ch for i, ch in enumerate(letters) if i not in (slot_a, slot_b))
    res = np.einsum("".join(letters) + "->" + out, t.num)
    var = tuple(v for i, v in enumerate(t.variance) if i not in (slot_a, slot_b))
    if t.exact:
        num, den = _gcd_reduce(np.asarray(res, dtype=object), t.den)
        return Tensor(num, var, den, True)
    return Tensor(np.asarray(res, dtype=np.float64), var, 1, False)


def raise_lower(t: Tensor, slot: int, m: "MetricAtPoint") -> Tensor:
    if not 0 <= slot < t.rank:
        raise TensorError("slot out of range")
    if m.n != t.n:
        raise TensorError("metric dimension mismatch")
    mat = m.g if t.variance[slot] == UP else m.ginv
    if mat.exact != t.exact:
        mat = mat.to_float()
        if t.exact:
            raise TensorError("exact tensor needs an exact metric")
    letters = _letters(t.rank)
    z = "Z"
    spec_in = letters.replace(letters[slot], z)
    spec = f"{spec_in},{z}{letters[slot]}->{letters}"
    res = einsum(spec, t, mat)
    return res


def antisymmetrize(t: Tensor, slots: Sequence[int]) -> Tensor:
    """Normalized bracket (1/k!) sum_perm sign(perm) t over the listed slots."""
    return _symmetrize(t, slots, signed=True)


def symmetrize(t: Tensor, slots: Sequence[int]) -> Tensor:
    return _symmetrize(t, slots, signed=False)


def _symmetrize(t: Tensor, slots, signed: bool) -> Tensor:
    slots = list(slots)
    if len(set(slots)) != len(slots):
        raise TensorError("duplicate slot")
    if any(not 0 <= s < t.rank for s in slots):
        raise TensorError("slot out of range")
    if len({t.variance[s] for s in slots}) > 1:
        raise TensorError("mixed-variance slot list")
    k = len(slots)
    acc = None
    for p in itertools.permutations(range(k)):
        axes = list(range(t.rank))
        for i, s in enumerate(slots):
            axes[s] = slots[p[i]]
        term = t.num.transpose(axes)
        if signed and perm_sign(p) < 0:
            term = -term
        acc = term if acc is None else acc + term
    f = math.factorial(k)
    if t.exact:
        num, den = _gcd_reduce(np.ascontiguousarray(acc), t.den * f)
        return Tensor(num, t.variance, den, True)
    return Tensor(np.ascontiguousarray(acc) / f, t.variance, 1, False)


def generalized_delta(n: int, k: int, exact: bool = True) -> Tensor:
    """delta^{a1..ak}_{b1..bk} = det[delta^{ai}_{bj}] (no 1/k! factor)."""
    if k < 1:
        raise TensorError("order k must be >= 1")
    if n < 1:
        raise TensorError("dimension must be >= 1")
    if n ** (2 * k) > MAX_COMPONENTS:
        raise TensorError(f"generalized delta n={n}, k={k} exceeds dense storage cap")
    arr = np.zeros((n,) * (2 * k), dtype=np.int64)
    if k <= n:
        perms = list(itertools.permutations(range(k)))
        signs = [perm_sign(p) for p in perms]
        for combo in itertools.combinations(range(n), k):
            for p, sp in zip(perms, signs):
                up = tuple(combo[i] for i in p)
                for q, sq in zip(perms, signs):
                    lo = tuple(combo[i] for i in q)
                    arr[up + lo] = sp * sq
    var = (UP,) * k + (DOWN,) * k
    if exact:
        return Tensor(arr.astype(object), var, 1, True)
    return Tensor(arr.astype(np.float64), var, 1, False)


def identity(n: int, exact: bool = True) -> Tensor:
    """Mixed delta^a_b."""
    return generalized_delta(n, 1, exact)


@dataclass(frozen=True)
class Residual:
    absolute: object
    relative: object

    def __iter__(self):
        return iter((self.absolute, self.relative))


def max_abs_residual(a: Tensor, b: Tensor) -> Residual:
    a._check_same(b)
    d = (a - b).max_abs()
    scale = max(a.max_abs(), b.max_abs(), 1)
    return Residual(d, d / scale)


# ---------------------------------------------------------------- metrics

def _exact_inverse(rows: list) -> list:
    n = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise TensorError("metric is singular")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


@dataclass(frozen=True, eq=False)
class MetricAtPoint:
    g: Tensor
    ginv: Tensor
    signature: tuple = ()

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def exact(self) -> bool:
        return self.g.exact

    @staticmethod
    def from_components(values, exact: bool = True, rel_tol: float = 1e-12) -> "MetricAtPoint":
        arr = np.asarray(values, dtype=object if exact else np.float64)
        n = arr.shape[0]
        if arr.shape != (n, n):
            raise TensorError("metric must be square")
        if exact:
            rows = [[Fraction(arr[i, j]) for j in range(n)] for i in range(n)]
            if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
                raise TensorError("metric is not symmetric")
            inv = _exact_inverse(rows)
            g = Tensor.from_values(rows, (DOWN, DOWN), True)
            gi = Tensor.from_values(inv, (UP, UP), True)
            sig_src = np.array([[float(x) for x in r] for r in rows])
        else:
            if not np.allclose(arr, arr.T, rtol=0, atol=rel_tol * max(1.0, np.abs(arr).max())):
                raise TensorError("metric is not symmetric")
            arr = 0.5 * (arr + arr.T)
            if abs(np.linalg.det(arr)) <= 1e-300:
                raise TensorError("metric is singular")
            inv = np.linalg.inv(arr)
            g = Tensor(arr, (DOWN, DOWN), 1, False)
            gi = Tensor(0.5 * (inv + inv.T), (UP, UP), 1, False)
            sig_src = arr
        ev = np.linalg.eigvalsh(sig_src)
        if np.any(ev == 0):
            raise TensorError("metric is singular")
        sig = tuple(int(s) for s in np.sign(ev))
        return MetricAtPoint(g, gi, sig)

    @staticmethod
    def diagonal(signature: Iterable[int], exact: bool = True) -> "MetricAtPoint":
        sig = [int(s) for s in signature]
        if any(s not in (1, -1) for s in sig):
            raise TensorError("signature entries must be +1 or -1")
        return MetricAtPoint.from_components(np.diag(sig).tolist(), exact)

    def to_float(self) -> "MetricAtPoint":
        return MetricAtPoint(self.g.to_float(), self.ginv.to_float(), self.signature)

    def inverse_residual(self) -> Residual:
        prod = einsum("ab,bc->ac", self.g.to_float() if not self.exact else self.g,
                      self.ginv.to_float() if not self.exact else self.ginv)
        return max_abs_residual(prod, identity(self.n, self.exact).with_variance(prod.variance))
