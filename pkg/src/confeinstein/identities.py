"""Random Weyl tensors and checks of the dimensionally dependent identities.

Every check returns an IdentityReport.  In exact mode a check passes iff its
residual is exactly zero; in float mode the residual is relative to the
largest constituent magnitude and must fall below the tolerance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bracket
from . import formulas as F
from .tensor_core import (DOWN, UP, MetricAtPoint, Tensor, antisymmetrize, einsum,
                          identity, perm_sign)
from .weyl_algebra import WeylPoint, bivector_count

DEFAULT_FLOAT_TOL = 1e-9
MAX_ATTEMPTS = 16


class IdentityError(ValueError):
    pass


@dataclass(frozen=True)
class WeylSampleConfig:
    n: int
    signature: tuple = ()
    seed: int = 0
    mode: str = "exact"
    bound: int = 3

    def __post_init__(self):
        sig = tuple(self.signature) if self.signature else (-1,) + (1,) * (self.n - 1)
        object.__setattr__(self, "signature", sig)
        if len(sig) != self.n:
            raise IdentityError("signature length must equal the dimension")
        if any(s not in (1, -1) for s in sig):
            raise IdentityError("signature entries must be +1 or -1")
        if self.bound < 1:
            raise IdentityError("magnitude bound must be >= 1")
        if self.mode not in ("exact", "float"):
            raise IdentityError("mode must be 'exact' or 'float'")
        if self.n < 2:
            raise IdentityError("dimension must be >= 2")

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def metric(self) -> MetricAtPoint:
        return MetricAtPoint.diagonal(self.signature, self.exact)


@dataclass
class IdentityReport:
    label: str
    dimension: int
    residual: object
    passed: bool
    seed: int | None = None
    expected: bool | None = None        # True: identity should hold; False: negative control
    tolerance: float | None = None
    side_values: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict)
    oracle_passed: bool | None = None    # transcription oracle: holds in every dimension

    @property
    def behaved(self) -> bool:
        """Expected-pass identities pass, negative controls fail, oracles always agree."""
        if self.oracle_passed is False:
            return False
        if self.expected is None:
            return True
        return self.passed == self.expected


@dataclass(frozen=True)
class LovelockData:
    A: Tensor
    H: Tensor
    trace_residual: object = 0


# ---------------------------------------------------------------- generators

def _rng(seed: int):
    return np.random.default_rng(int(seed) & ((1 << 64) - 1))


def _integer_tensor(n: int, rank: int, bound: int, seed: int, variance) -> Tensor:
    raw = _rng(seed).integers(-bound, bound + 1, size=(n,) * rank)
    return Tensor.from_ints(raw.astype(object), variance)


def weyl_part(R: Tensor, m: MetricAtPoint) -> Tensor:
    """C^ab_cd of an algebraic curvature tensor R_abcd."""
    n = R.n
    R2 = einsum("ae,bf,efcd->abcd", m.ginv, m.ginv, R)
    P = einsum("abcb->ac", R2)
    s = einsum("aa->", P).item()
    d = identity(n, m.exact)
    dP = (einsum("ac,bd->abcd", d, P) - einsum("ad,bc->abcd", d, P)
          - einsum("bc,ad->abcd", d, P) + einsum("bd,ac->abcd", d, P))
    dd = einsum("ac,bd->abcd", d, d) - einsum("ad,bc->abcd", d, d)
    one = Fraction(1) if m.exact else 1.0
    return R2 - dP.scale(one / (n - 2)) + dd.scale(s * one / ((n - 1) * (n - 2)))


def _draw_weyl(cfg: WeylSampleConfig, seed: int) -> Tensor:
    T = _integer_tensor(cfg.n, 4, cfg.bound, seed, (DOWN,) * 4)
    R = antisymmetrize(antisymmetrize(T, [0, 1]), [2, 3])
    R = (R + R.transpose(2, 3, 0, 1)).scale(Fraction(1, 2))
    R = R - antisymmetrize(R, [0, 1, 2, 3])
    return weyl_part(R, MetricAtPoint.diagonal(cfg.signature, True))


def random_weyl(cfg: WeylSampleConfig) -> WeylPoint:
    for attempt in range(MAX_ATTEMPTS):
        W = _draw_weyl(cfg, cfg.seed + attempt)
        if W.is_zero():
            continue
        w = WeylPoint(W, MetricAtPoint.diagonal(cfg.signature, True), check=True)
        if cfg.exact:
            return w
        return WeylPoint(W.to_float(), cfg.metric(), check=True)
    raise IdentityError(f"no nonzero Weyl tensor after {MAX_ATTEMPTS} draws from seed {cfg.seed}")


def random_double_two_form(cfg: WeylSampleConfig) -> WeylPoint:
    """Pair-antisymmetric tensor without pair interchange or Bianchi symmetry (control input)."""
    T = _integer_tensor(cfg.n, 4, cfg.bound, cfg.seed, (DOWN,) * 4)
    R = antisymmetrize(antisymmetrize(T, [0, 1]), [2, 3])
    m = MetricAtPoint.diagonal(cfg.signature, True)
    W = einsum("ae,bf,efcd->abcd", m.ginv, m.ginv, R)
    if not cfg.exact:
        W = W.to_float()
    return WeylPoint(W, cfg.metric(), check=False)


def null_weyl(seed: int = 0, exact: bool = True) -> WeylPoint:
    """Type N Weyl tensor of a 4d pp-wave, C = a(U U - V V) + b(U V + V U) with U = k^x, V = k^y, k null."""
    rng = _rng(seed)
    a, b = (int(v) for v in rng.integers(1, 6, size=2))
    k = np.array([1, 1, 0, 0], dtype=object)
    x = np.array([0, 0, 1, 0], dtype=object)
    y = np.array([0, 0, 0, 1], dtype=object)
    U = np.multiply.outer(k, x) - np.multiply.outer(x, k)
    V = np.multiply.outer(k, y) - np.multiply.outer(y, k)
    C = (a * (np.multiply.outer(U, U) - np.multiply.outer(V, V))
         + b * (np.multiply.outer(U, V) + np.multiply.outer(V, U)))
    m = MetricAtPoint.diagonal((-1, 1, 1, 1), True)
    W = einsum("ae,bf,efcd->abcd", m.ginv, m.ginv, Tensor.from_ints(C, (DOWN,) * 4))
    if not exact:
        return WeylPoint(W.to_float(), m.to_float())
    return WeylPoint(W, m)


def random_double_three_form(n: int, seed: int, exact: bool = True, bound: int = 3) -> Tensor:
    """Generic A[i,j,k,a,b,c] = A_ijk^abc, antisymmetric in each triple."""
    T = _integer_tensor(n, 6, bound, seed, (DOWN,) * 3 + (UP,) * 3)
    A = antisymmetrize(antisymmetrize(T, [0, 1, 2]), [3, 4, 5])
    return A if exact else A.to_float()


# ---------------------------------------------------------------- residual helpers

def _mag(x):
    if isinstance(x, Tensor):
        return x.max_abs()
    return abs(x)


def _power_scale(T: Tensor, degree: int) -> float:
    """max|T|^degree, the natural float scale of a degree-`degree` polynomial in T."""
    return 0.0 if T.exact else float(T.max_abs()) ** degree


def _judge(diff, terms, exact: bool, tol: float):
    """(residual, passed): exact max-abs, or max-abs relative to the largest term."""
    d = _mag(diff)
    if exact:
        return d, d == 0
    scale = max([float(_mag(t)) for t in terms] + [1e-300])
    r = float(d) / scale
    return r, r < tol


def _combine(label, w, parts, tol, seed=None, expected=None, side=None):
    main = [v for k, v in parts.items() if not k.startswith("oracle")]
    orc = [v for k, v in parts.items() if k.startswith("oracle")]
    res = max(p[0] for p in main)
    passed = all(p[1] for p in main)
    oracle = all(p[1] for p in orc) if orc else None
    return IdentityReport(label, w.n, res, passed, seed, expected, None if w.exact else tol,
                          side or {}, {k: v[0] for k, v in parts.items()}, oracle)


def _backend(w: WeylPoint):
    return F.TensorBackend(w.n, w.exact)


def _delta(w: WeylPoint) -> Tensor:
    return identity(w.n, w.exact)


def _frac(w, a, b=1):
    return Fraction(a, b) if w.exact else a / b


def _check_dim(w: WeylPoint, n: int, allow_other: bool, what: str):
    if w.n != n and not allow_other:
        raise IdentityError(f"{what} is a {n}-dimensional identity; got n={w.n}")


# ---------------------------------------------------------------- identities

def antisymmetrization_residual(w: WeylPoint, k: int, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    """C^[ab_[cd delta^e1..ek]_f1..fk] with the generalized (determinant) delta."""
    if not 1 <= k <= 3:
        raise IdentityError("extra-index count k must be 1, 2 or 3")
    n, m = w.n, k + 2
    W = w.weyl
    vals = W.num
    pref = Fraction(4 * math.factorial(m - 2) * math.factorial(k), math.factorial(m) ** 2)
    worst = 0
    biggest = 0
    pairs = list(itertools.combinations(range(m), 2))
    for A in itertools.combinations(range(n), m):
        for B in itertools.combinations(range(n), m):
            acc = 0
            for p in pairs:
                restA = [A[i] for i in range(m) if i not in p]
                sp = perm_sign(list(p) + [i for i in range(m) if i not in p])
                for q in pairs:
                    if restA != [B[i] for i in range(m) if i not in q]:
                        continue
                    sq = perm_sign(list(q) + [i for i in range(m) if i not in q])
                    v = vals[A[p[0]], A[p[1]], B[q[0]], B[q[1]]]
                    acc = acc + sp * sq * v
                    biggest = max(biggest, abs(v))
            worst = max(worst, abs(acc))
    if w.exact:
        res = pref * Fraction(int(worst), W.den)
        passed = res == 0
    else:
        res = float(worst) / max(float(biggest) * len(pairs), 1e-300)
        passed = res < tol
    expected = n <= k + 3
    return IdentityReport(f"antisym_k{k}", n, res, passed, expected=expected,
                          tolerance=None if w.exact else tol)


def four_d_trace_residual(w: WeylPoint, p: int, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    """C(p)^cj_ck = delta^j_k C(p) / 4."""
    if p < 2:
        raise IdentityError("order p must be >= 2")
    Cp = w.chain(p)
    X = einsum("cjck->jk", Cp)
    tr = einsum("jj->", X).item()
    rhs = _delta(w).scale(tr * _frac(w, 1, 4))
    parts = {"trace": _judge(X - rhs, [X, rhs], w.exact, tol)}
    return _combine(f"trace4_p{p}", w, parts, tol, expected=w.n == 4,
                    side={"two_index": X, "scalar": tr})


def bianchi_square_residual(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    """4 C_a[ij]b C^cijd = C_abij C^cdij."""
    if w.metric is None:
        raise IdentityError("the Bianchi-square identity needs the metric to lower indices")
    g = w.metric.g if w.exact else w.metric.g.to_float()
    gi = w.metric.ginv if w.exact else w.metric.ginv.to_float()
    Cl = einsum("ae,bf,efcd->abcd", g, g, w.weyl)
    Cu = einsum("abef,ec,fd->abcd", w.weyl, gi, gi)
    lhs = (einsum("aijb,cijd->abcd", Cl, Cu) - einsum("ajib,cijd->abcd", Cl, Cu)).scale(2)
    rhs = einsum("abij,cdij->abcd", Cl, Cu)
    parts = {"bianchi_square": _judge(lhs - rhs, [lhs, rhs], w.exact, tol)}
    return _combine("bianchi_square", w, parts, tol, expected=True)


def five_d_cubic_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL, allow_other_dimension: bool = False,
                        oracle: bool = True) -> IdentityReport:
    _check_dim(w, 5, allow_other_dimension, "the cubic two-index identity")
    B, W, d = _backend(w), w.weyl, _delta(w)
    L = F.cubic_two_index(B, W)
    s1, s2 = F.cubic_scalars(B, W)
    s = s1.item() - 4 * s2.item()
    parts = {
        "two_index": _judge(L, [L, s1.item(), 4 * s2.item(), _power_scale(W, 3)], w.exact, tol),
        "scalar": _judge(s, [s1.item(), 4 * s2.item(), _power_scale(W, 3)], w.exact, tol),
    }
    if oracle:
        E = bracket.parent_value(bracket.PARENT_CUBIC_5D, W)
        claim = (L - d.scale(s * _frac(w, 1, 5))).scale(_frac(w, -40, 576))
        parts["oracle_two_index"] = _judge(E - claim, [E, claim, _power_scale(W, 3)], w.exact, tol)
        Es = bracket.parent_value(bracket.PARENT_CUBIC_5D_SCALAR, W).item()
        claim_s = s * _frac(w, 1, 18)
        parts["oracle_scalar"] = _judge(Es - claim_s, [Es, claim_s, _power_scale(W, 3)], w.exact, tol)
    return _combine("cubic5", w, parts, tol, expected=w.n <= 5,
                    side={"two_index": L, "scalar": s})


def five_d_quartic_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL, allow_other_dimension: bool = False,
                          oracle: bool = True) -> IdentityReport:
    _check_dim(w, 5, allow_other_dimension, "the quartic two-index identity")
    B, W, d = _backend(w), w.weyl, _delta(w)
    L = F.quartic_two_index(B, W)
    S = F.quartic_scalar(B, W).item()
    rhs = d.scale(S)
    parts = {"two_index": _judge(L - rhs, [L, rhs, _power_scale(W, 4)], w.exact, tol)}
    if oracle:
        E = bracket.parent_value(bracket.PARENT_QUARTIC_5D, W)
        claim = (L - rhs).scale(_frac(w, -1, 72))
        parts["oracle_two_index"] = _judge(E - claim, [E, claim, _power_scale(W, 4)], w.exact, tol)
    return _combine("quartic5", w, parts, tol, expected=w.n <= 5,
                    side={"two_index": L, "scalar": S})


def six_d_cubic_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL, allow_other_dimension: bool = False,
                       oracle: bool = True) -> IdentityReport:
    _check_dim(w, 6, allow_other_dimension, "the six-dimensional cubic identity")
    B, W, d = _backend(w), w.weyl, _delta(w)
    L = F.six_cubic_two_index(B, W)
    S = F.six_cubic_scalar(B, W).item()
    rhs = d.scale(S * _frac(w, 1, 6))
    parts = {"two_index": _judge(L - rhs, [L, rhs, _power_scale(W, 3)], w.exact, tol)}
    if oracle:
        E = bracket.parent_value(bracket.PARENT_CUBIC_6D, W)
        claim = (L - rhs).scale(_frac(w, -1, 25))
        parts["oracle_two_index"] = _judge(E - claim, [E, claim, _power_scale(W, 3)], w.exact, tol)
    return _combine("cubic6", w, parts, tol, expected=w.n <= 6,
                    side={"two_index": L, "scalar": S})


def _lovelock_parts(A: Tensor, n: int, exact: bool, tol: float, printed: bool = False):
    B = F.TensorBackend(n, exact)
    H = F.lovelock_H(B, A, F.lovelock_coefficients(n, printed))
    tr = F.lovelock_trace(B, H)
    return B, H, _judge(tr, [tr, A], exact, tol)


def lovelock_build(w: WeylPoint, printed: bool = False, tol: float = 1e-10) -> LovelockData:
    """A = 4 C_[ij^h[a C_k]h^bc] and its trace-free part H; raises if H keeps a trace."""
    if w.n < 5:
        raise IdentityError("the double three-form construction needs n >= 5")
    A = F.lovelock_A(_backend(w), w.weyl)
    _, H, (res, ok) = _lovelock_parts(A, w.n, w.exact, tol, printed)
    if not ok:
        raise IdentityError(f"double three-form H is not trace-free (residual {float(res):.3e})")
    return LovelockData(A, H, res)


def lovelock_square_residual(A: Tensor, exact: bool, tol: float = DEFAULT_FLOAT_TOL, H: Tensor | None = None):
    """Residual of H_abk^def H_def^abj = delta^j_k H.H / 6."""
    n = A.n
    B = F.TensorBackend(n, exact)
    if H is None:
        _, H, _ = _lovelock_parts(A, n, exact, tol)
    X = F.lovelock_square(B, H)
    tr = einsum("jj->", X).item()
    rhs = identity(n, exact).with_variance(X.variance).scale(tr * (Fraction(1, 6) if exact else 1 / 6))
    return _judge(X - rhs, [X, rhs, einsum("abcdef,defabc->", H, H), _power_scale(A, 2)], exact, tol)


def lovelock_expanded_residual(A: Tensor, exact: bool, tol: float = DEFAULT_FLOAT_TOL, sign: int = -1):
    """Residual of the expanded A-form, X^k_j = sign * delta S / 6 (sign=-1 verified, +1 as printed)."""
    n = A.n
    B = F.TensorBackend(n, exact)
    X = F.lovelock_two_index(B, A)
    S = F.lovelock_scalar(B, A).item()
    rhs = identity(n, exact).with_variance(X.variance).scale(sign * S * (Fraction(1, 6) if exact else 1 / 6))
    return _judge(X - rhs, [X, rhs, _power_scale(A, 2)], exact, tol), X, S


def lovelock_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL, oracle: bool = True,
                    oracle_seed: int = 0) -> IdentityReport:
    data = lovelock_build(w)
    parts = {"square": lovelock_square_residual(data.A, w.exact, tol, data.H)}
    side = {}
    if w.n == 6:
        r, X, S = lovelock_expanded_residual(data.A, w.exact, tol)
        parts["expanded"] = r
        side = {"two_index": X, "scalar": S}
        side["printed_sign_residual"] = lovelock_expanded_residual(data.A, w.exact, tol, sign=+1)[0][0]
        if oracle:
            G = random_double_three_form(6, oracle_seed, w.exact)
            parts["oracle_square"] = lovelock_square_residual(G, w.exact, tol)
            parts["oracle_expanded"] = lovelock_expanded_residual(G, w.exact, tol)[0]
    return _combine("lovelock", w, parts, tol, expected=w.n <= 6, side=side)


# ---------------------------------------------------------------- coefficient and lemma checks

def coefficient_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    """Newton-recursion c_2..c_6 against the closed forms."""
    from .weyl_algebra import invariants, newton_coefficients, printed_coefficients
    inv = invariants(w, 6)
    ps = [None] + list(inv.invariants)
    c = newton_coefficients(ps, 6, w.one())
    closed = printed_coefficients(inv)
    parts = {f"c{k}": _judge(c[k] - closed[k], [c[k], closed[k]], w.exact, tol) for k in range(2, 7)}
    return _combine("coefficients", w, parts, tol, expected=True)


def cayley_hamilton_report(w: WeylPoint, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    from .weyl_algebra import cayley_hamilton_tensor, characteristic_coefficients
    T = cayley_hamilton_tensor(w)
    cs = characteristic_coefficients(w).coefficients
    terms = [w.chain(w.N)] + [w.chain(w.N - k).scale(float(cs[k]) if not w.exact else cs[k])
                              for k in range(1, w.N)]
    parts = {"cayley_hamilton": _judge(T, terms + [abs(cs[-1])], w.exact, tol)}
    return _combine("cayley_hamilton", w, parts, tol, expected=True)


def lemma_report(w: WeylPoint, seed: int = 0, tol: float = DEFAULT_FLOAT_TOL) -> IdentityReport:
    """solve_weyl_linear(C, C.V) recovers V and reproduces C.V."""
    from .weyl_algebra import apply_weyl, solve_weyl_linear
    raw = _rng(seed + 7919).integers(-5, 6, size=w.n)
    V = Tensor.from_ints(raw.astype(object), (UP,))
    if not w.exact:
        V = V.to_float()
    H = apply_weyl(w, V)
    U = solve_weyl_linear(w, H)
    parts = {"round_trip": _judge(U - V, [V], w.exact, tol),
             "backward": _judge(apply_weyl(w, U) - H, [H], w.exact, tol)}
    return _combine("lemma", w, parts, tol, expected=True)
