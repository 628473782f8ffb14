"""Conformal vector K, the C-space and Einstein conditions, and classification.

K is carried as a Taylor jet about each sample point, built from the jets of
the Weyl tensor and its divergence, so nabla_a K_b is an exact derivative of
the same closed-form expression rather than a finite difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import formulas as F
from . import jets as J
from . import symexpr as sx
from .curvature import CurvatureBundle, CurvatureError, LocalGeometry, MetricSpec, cov_deriv_jet, local_geometry
from .jets import Jet, JetError, jet_einsum
from .tensor_core import DOWN, UP
from .weyl_algebra import (DEFAULT_DEGENERACY_TOL, bivector_count, chain_list, lemma_projector,
                           newton_coefficients, power_sums_from)

DEFAULT_TOL = 1e-7
FAIL_FACTOR = 10.0
WEYL_NEGLIGIBLE = 1e-10
DET_FLOOR = 1e-12
GEOMETRY_ORDER = 4

CE = "ConformallyEinstein"
NOT_CE = "NotConformallyEinstein"
DEGENERATE = "DegenerateWeyl"
INCONCLUSIVE = "Inconclusive"
OUTCOMES = (CE, NOT_CE, DEGENERATE, INCONCLUSIVE)

METHODS = ("general", "dim4:2", "dim4:3", "dim4:4", "dim4:5", "dim4:6", "dim5", "dim6", "lovelock")


class ConformalError(ValueError):
    pass


class DegenerateDenominator(ArithmeticError):
    pass


# ---------------------------------------------------------------- K at a point

@dataclass
class KAtPoint:
    """K^a as a jet of order >= 1 about the point, with the method's denominators."""
    K: Jet
    denominators: dict
    healthy: bool
    note: str = ""

    def value(self):
        return [float(v) for v in self.K.value()]


def _weyl_scale(W0: np.ndarray, n: int) -> float:
    """sqrt(C2/N) if C2 > 0, else the largest Weyl component."""
    c2 = float(np.einsum("abcd,cdab->", W0, W0))
    if c2 > 0:
        return math.sqrt(c2 / bivector_count(n))
    return float(np.max(np.abs(W0))) if W0.size else 0.0


def _healthy(den: Jet, degree: int, geo: LocalGeometry, tol: float) -> tuple:
    v = den.value()
    if geo.exact:
        return v != 0, v
    s = _weyl_scale(np.asarray(geo.weyl.value(), dtype=float), geo.n)
    return bool(abs(float(v)) > tol * s ** degree) and math.isfinite(float(v)), v


def _fields(geo: LocalGeometry):
    if geo.weyl_divergence is None:
        raise ConformalError("local geometry needs jet order >= 3 for the Weyl divergence")
    W = geo.weyl.truncate(1)
    D = geo.weyl_divergence.truncate(1)
    return W, D, F.JetBackend(geo.n, 1, geo.exact)


def _finish(vec: Jet, den: Jet, factor, degree: int, geo: LocalGeometry, tol: float, name: str) -> KAtPoint:
    ok, v = _healthy(den, degree, geo, tol)
    if not ok:
        zero = vec.scale(0)
        return KAtPoint(zero, {name: v}, False, f"{name} below the nondegeneracy threshold")
    K = (vec * J.reciprocal(den)).scale(factor)
    return KAtPoint(K, {name: v}, True)


def _solve_general(geo: LocalGeometry, tol: float) -> KAtPoint:
    """Lemma closed form.  Float inputs are evaluated in rationals: the degree-N
    polynomial loses too many digits in float64 for n >= 6."""
    W, D, _ = _fields(geo)
    W, D = J.rationalize(W), J.rationalize(D)
    B = F.JetBackend(geo.n, 1, True)
    n = geo.n
    N = bivector_count(n)
    chains = chain_list(W, N - 1, B.E)
    ps = power_sums_from(chains, N, B.E)
    one = J.Jet.constant(n, 1, 1, True)
    c = newton_coefficients(ps, N, one)
    P = lemma_projector(chains, c, N)
    H = D.scale(Fraction(-2, n - 3))
    vec = jet_einsum("ijb,abij->a", H, P)
    if not geo.exact:
        vec, cN = J.to_float(vec), J.to_float(c[N])
        return _finish(vec, cN, 2.0 / (n - 1), N, geo, tol, "c_N")
    return _finish(vec, c[N], Fraction(2, n - 1), N, geo, tol, "c_N")


def _solve_dim4(p: int):
    def solve(geo: LocalGeometry, tol: float) -> KAtPoint:
        W, D, B = _fields(geo)
        chains = chain_list(W, max(p - 1, 1), B.E)
        num, den = F.k_dim4_parts(B, chains, D, p)
        return _finish(num, den, 1, p, geo, tol, f"C{p}")
    return solve


def _solve_dim5(geo: LocalGeometry, tol: float) -> KAtPoint:
    W, D, B = _fields(geo)
    num, den = F.k_dim5_parts(B, W, D)
    return _finish(num, den, -1, 4, geo, tol, "quartic_scalar")


def _solve_dim6(geo: LocalGeometry, tol: float) -> KAtPoint:
    W, D, B = _fields(geo)
    num, den = F.k_dim6_parts(B, W, D)
    return _finish(num, den, -4, 3, geo, tol, "cubic_scalar")


def _solve_lovelock(printed: bool = False):
    def solve(geo: LocalGeometry, tol: float) -> KAtPoint:
        W, D, B = _fields(geo)
        vec, den, factor = F.k_lovelock_parts(B, W, D, printed)
        return _finish(vec, den, factor if geo.exact else float(factor), 8, geo, tol, "lovelock_scalar")
    return solve


@dataclass(frozen=True)
class KCandidate:
    method: str
    metric: MetricSpec
    solver: Callable = field(repr=False, compare=False)
    tol: float = DEFAULT_DEGENERACY_TOL

    @property
    def n(self) -> int:
        return self.metric.n

    def geometry(self, point: Sequence, exact: bool = False) -> LocalGeometry:
        return local_geometry(self.metric, point, GEOMETRY_ORDER, exact)

    def at(self, geo: LocalGeometry) -> KAtPoint:
        return self.solver(geo, self.tol)

    def value(self, point: Sequence, exact: bool = False):
        return self.at(self.geometry(point, exact)).K.value()

    @staticmethod
    def from_expressions(m: MetricSpec, exprs, method: str = "given") -> "KCandidate":
        """A hand-specified K^a field (expression strings or Exprs)."""
        es = [sx.parse_expression(e) if isinstance(e, str) else sx.as_expr(e) for e in exprs]
        if len(es) != m.n:
            raise ConformalError("K needs one component per coordinate")

        def solve(geo: LocalGeometry, tol: float) -> KAtPoint:
            comps = [J.expr_jet(e, m.coords, geo.point, m.params, 1, geo.exact) for e in es]
            return KAtPoint(J.stack(comps, 0), {}, True)
        return KCandidate(method, m, solve)


def _check_n(m: MetricSpec, n: int, what: str):
    if m.n != n:
        raise ConformalError(f"{what} needs n = {n}; metric has n = {m.n}")


def extract_k_general(m: MetricSpec, b: CurvatureBundle | None = None, tol: float = DEFAULT_DEGENERACY_TOL) -> KCandidate:
    if m.n < 4:
        raise ConformalError("the general formula needs n >= 4")
    return KCandidate("general", m, _solve_general, tol)


def extract_k_dim4(m: MetricSpec, b: CurvatureBundle | None = None, p: int = 2,
                   tol: float = DEFAULT_DEGENERACY_TOL) -> KCandidate:
    _check_n(m, 4, "the four-dimensional formula")
    if p not in (2, 3, 4, 5, 6):
        raise ConformalError("order p must be one of 2..6")
    return KCandidate(f"dim4:{p}", m, _solve_dim4(p), tol)


def extract_k_dim5(m: MetricSpec, b: CurvatureBundle | None = None, tol: float = DEFAULT_DEGENERACY_TOL) -> KCandidate:
    _check_n(m, 5, "the quartic formula")
    return KCandidate("dim5", m, _solve_dim5, tol)


def extract_k_dim6(m: MetricSpec, b: CurvatureBundle | None = None, tol: float = DEFAULT_DEGENERACY_TOL) -> KCandidate:
    _check_n(m, 6, "the cubic formula")
    return KCandidate("dim6", m, _solve_dim6, tol)


def extract_k_lovelock(m: MetricSpec, b: CurvatureBundle | None = None, tol: float = DEFAULT_DEGENERACY_TOL,
                       printed: bool = False) -> KCandidate:
    _check_n(m, 6, "the double three-form formula")
    return KCandidate("lovelock" + (":printed" if printed else ""), m, _solve_lovelock(printed), tol)


def candidate(m: MetricSpec, method: str = "general", tol: float = DEFAULT_DEGENERACY_TOL) -> KCandidate:
    if method == "general":
        return extract_k_general(m, tol=tol)
    if method.startswith("dim4"):
        _, _, p = method.partition(":")
        try:
            p = int(p) if p else 2
        except ValueError:
            raise ConformalError(f"bad method {method!r}") from None
        return extract_k_dim4(m, p=p, tol=tol)
    if method == "dim5":
        return extract_k_dim5(m, tol=tol)
    if method == "dim6":
        return extract_k_dim6(m, tol=tol)
    if method == "lovelock":
        return extract_k_lovelock(m, tol=tol)
    if method == "lovelock:printed":
        return extract_k_lovelock(m, tol=tol, printed=True)
    raise ConformalError(f"unknown method {method!r}")


def applicable_methods(n: int) -> list:
    out = ["general"]
    if n == 4:
        out += [f"dim4:{p}" for p in (2, 3, 4, 5, 6)]
    if n == 5:
        out.append("dim5")
    if n == 6:
        out += ["dim6", "lovelock"]
    return out


# ---------------------------------------------------------------- residuals

def _num(j: Jet, default_exact: bool):
    v = j.value()
    return np.asarray(v, dtype=object if default_exact else float)


def _absmax(a) -> float:
    a = np.asarray(a, dtype=object) if not isinstance(a, np.ndarray) else a
    return float(max((abs(x) for x in a.ravel()), default=0))


@dataclass(frozen=True)
class Residual2:
    absolute: float
    relative: float
    exact_zero: bool = False


def _rel(abs_val, scale) -> float:
    return float(abs_val) / scale if scale > 0 else (0.0 if abs_val == 0 else math.inf)


def cspace_residual(geo: LocalGeometry, k: KAtPoint) -> Residual2:
    """max |2 nabla^k C^ab_ck + (n-3) C^ab_ck K^k|; relative also to (n-3) |C| sqrt|R|."""
    n = geo.n
    W = geo.weyl.truncate(0)
    D = geo.weyl_divergence.truncate(0)
    K = k.K.truncate(0)
    t1 = D.scale(2)
    t2 = jet_einsum("abck,k->abc", W, K).scale(n - 3)
    r = t1 + t2
    a = _absmax(r.value())
    curv = (n - 3) * _absmax(W.value()) * math.sqrt(_absmax(geo.riemann_22.value()))
    return Residual2(a, _rel(a, max(_absmax(t1.value()), _absmax(t2.value()), curv)), a == 0)


def _einstein_terms(geo: LocalGeometry, k: KAtPoint, literal: bool = False):
    """Terms of the trace-free Einstein condition at the point.

    With Einstein target Omega^2 g and K = -2 dln(Omega) the condition reads
    -Rtf_ab + (n - 2)(nabla_a U_b - U_a U_b)_tf = 0 with U = K/2.  ``literal``
    uses U = K and +Rtf instead.
    """
    n = geo.n
    exact = geo.exact
    g = geo.g.truncate(1)
    K = k.K.truncate(1)
    half = Fraction(1, 2) if exact else 0.5
    U = K if literal else K.scale(half)
    Ul = jet_einsum("ab,b->a", g, U)
    nab = cov_deriv_jet(Ul, (DOWN,), geo.gamma.truncate(0)).value()       # [a,b]
    nab = np.asarray(nab, dtype=object if exact else float)
    u = np.asarray(Ul.truncate(0).value(), dtype=object if exact else float)
    uu = np.multiply.outer(u, u)
    g0 = np.asarray(geo.g.value(), dtype=object if exact else float)
    gi0 = np.asarray(geo.ginv.value(), dtype=object if exact else float)
    sym = (nab + nab.T) * half
    inner = sym - uu
    tr = sum(gi0[a, b] * inner[a, b] for a in range(n) for b in range(n))
    inner_tf = inner - g0 * (tr * (Fraction(1, n) if exact else 1.0 / n))
    rtf = np.asarray(geo.tracefree_ricci.value(), dtype=object if exact else float)
    term = inner_tf * (n - 2)
    total = (rtf + term) if literal else (term - rtf)
    return total, rtf, term, nab - nab.T


def einstein_condition_residual(geo: LocalGeometry, k: KAtPoint, literal: bool = False) -> Residual2:
    total, rtf, term, _ = _einstein_terms(geo, k, literal)
    a = _absmax(total)
    R = _absmax(geo.riemann_22.value())
    scale = max(_absmax(rtf), _absmax(term), R)
    return Residual2(a, _rel(a, scale), a == 0)


def gradient_residual(geo: LocalGeometry, k: KAtPoint) -> Residual2:
    """max |d_a K_b - d_b K_a| for the lowered K; relative to the d K, K K and curvature scales."""
    g = geo.g.truncate(1)
    Kl = jet_einsum("ab,b->a", g, k.K.truncate(1))
    d = np.asarray(Kl.gradient().value(), dtype=object if geo.exact else float)
    curl = d - d.T
    a = _absmax(curl)
    R = _absmax(geo.riemann_22.value())
    kk = _absmax(Kl.value()) ** 2
    return Residual2(a, _rel(a, max(_absmax(d), kk, R)), a == 0)


# ---------------------------------------------------------------- classification

@dataclass
class PointResult:
    label: str
    values: tuple
    status: str                      # healthy | degenerate | singular
    message: str = ""
    einstein: Residual2 | None = None
    einstein_literal: Residual2 | None = None
    cspace: Residual2 | None = None
    curl: Residual2 | None = None
    k_vector: list | None = None
    denominators: dict = field(default_factory=dict)
    weyl_max: float | None = None


@dataclass(frozen=True)
class ConditionResiduals:
    points: tuple

    @property
    def healthy(self):
        return [p for p in self.points if p.status == "healthy"]


@dataclass(frozen=True)
class Verdict:
    outcome: str
    method: str
    tolerance: float
    residuals: ConditionResiduals
    summary: dict

    @property
    def points(self):
        return self.residuals.points


def _point_geometry(m: MetricSpec, values, exact: bool) -> LocalGeometry:
    geo = local_geometry(m, values, GEOMETRY_ORDER, exact)
    g0 = np.asarray(geo.g.value(), dtype=float)
    if not np.all(np.isfinite(g0)):
        raise CurvatureError("non-finite metric at point")
    if abs(np.linalg.det(g0)) < DET_FLOOR:
        raise CurvatureError("metric determinant below 1e-12")
    for name in ("weyl", "weyl_divergence", "riemann_22", "tracefree_ricci"):
        arr = getattr(geo, name).num
        if not exact and not np.all(np.isfinite(arr)):
            raise CurvatureError(f"non-finite {name} at point")
    return geo


def evaluate_point(k: KCandidate, label: str, values, exact: bool = False) -> PointResult:
    vals = tuple(values)
    try:
        geo = _point_geometry(k.metric, vals, exact)
    except (CurvatureError, sx.EvaluationError, JetError, ZeroDivisionError, FloatingPointError, OverflowError) as err:
        return PointResult(label, vals, "singular", str(err))
    W0 = np.asarray(geo.weyl.value(), dtype=object if exact else float)
    wmax = _absmax(W0)
    rmax = _absmax(geo.riemann_22.value())
    if wmax == 0 or (not exact and wmax <= WEYL_NEGLIGIBLE * rmax):
        return PointResult(label, vals, "degenerate", "Weyl tensor negligible at point", weyl_max=wmax)
    try:
        kp = k.at(geo)
    except (JetError, ZeroDivisionError) as err:
        return PointResult(label, vals, "degenerate", str(err), weyl_max=wmax)
    dens = {key: _scalar(v) for key, v in kp.denominators.items()}
    if not kp.healthy:
        return PointResult(label, vals, "degenerate", kp.note, denominators=dens, weyl_max=wmax)
    return PointResult(
        label, vals, "healthy",
        einstein=einstein_condition_residual(geo, kp),
        einstein_literal=einstein_condition_residual(geo, kp, literal=True),
        cspace=cspace_residual(geo, kp),
        curl=gradient_residual(geo, kp),
        k_vector=[_scalar(v) for v in kp.K.value()],
        denominators=dens, weyl_max=wmax)


def _scalar(v):
    return v if isinstance(v, Fraction) else float(v)


def classify(m: MetricSpec, points=None, method: str = "general", tol: float = DEFAULT_TOL,
             exact: bool = False, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> Verdict:
    pts = list(points if points is not None else m.points)
    if not pts:
        raise ConformalError("classification needs at least one sample point")
    if exact and not m.is_rational():
        raise ConformalError("exact mode needs a metric with rational components")
    k = candidate(m, method, degeneracy_tol)
    results = []
    for i, p in enumerate(pts):
        label, vals = p if isinstance(p, tuple) and len(p) == 2 and isinstance(p[0], str) else (f"p{i}", p)
        results.append(evaluate_point(k, label, vals, exact))
    healthy = [r for r in results if r.status == "healthy"]
    nonsingular = [r for r in results if r.status != "singular"]

    def passes(r):
        return r.einstein.relative < tol and r.curl.relative < tol

    if healthy and any(r.einstein.relative > FAIL_FACTOR * tol for r in healthy):
        outcome = NOT_CE
    elif healthy and all(passes(r) for r in healthy):
        outcome = CE
    elif not healthy and nonsingular and all(r.status == "degenerate" for r in nonsingular):
        outcome = DEGENERATE
    else:
        outcome = INCONCLUSIVE
    summary = {
        "healthy_points": len(healthy),
        "degenerate_points": sum(r.status == "degenerate" for r in results),
        "singular_points": sum(r.status == "singular" for r in results),
        "max_einstein_relative": max((r.einstein.relative for r in healthy), default=None),
        "max_cspace_relative": max((r.cspace.relative for r in healthy), default=None),
        "max_curl_relative": max((r.curl.relative for r in healthy), default=None),
        "max_curl_absolute": max((r.curl.absolute for r in healthy), default=None),
    }
    return Verdict(outcome, k.method, tol, ConditionResiduals(tuple(results)), summary)


def method_agreement(m: MetricSpec, values, methods=None, exact: bool = False) -> dict:
    """Relative differences of each applicable method's K from the general one at a point."""
    methods = methods or applicable_methods(m.n)
    geo = _point_geometry(m, tuple(values), exact)
    base = candidate(m, "general").at(geo)
    K0 = np.asarray(base.K.value(), dtype=float)
    wmax = _absmax(geo.weyl.value())
    out = {}
    for meth in methods:
        if meth == "general":
            continue
        kp = candidate(m, meth).at(geo)
        if not kp.healthy or not base.healthy:
            out[meth] = None
            continue
        K1 = np.asarray(kp.K.value(), dtype=float)
        scale = max(np.max(np.abs(K0)), np.max(np.abs(K1)), math.sqrt(wmax))
        out[meth] = float(np.max(np.abs(K1 - K0)) / scale)
    return out
