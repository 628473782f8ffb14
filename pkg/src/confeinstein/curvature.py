"""Curvature of a symbolic metric.

Two routes share the same conventions:

* symbolic fields (``TensorField`` of ``Expr``) built by exact symbolic
  differentiation, evaluated numerically at points;
* ``local_geometry``: Taylor jets of the metric about one point propagated
  through the same formulas, giving exact derivatives of any order without
  expression swell.  The classifier uses this route.

Conventions: Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc);
R^c_dab = d_a Gamma^c_bd - d_b Gamma^c_ad + Gamma^c_ae Gamma^e_bd - Gamma^c_be Gamma^e_ad;
R^ab_cd = g^be R^a_ecd; Ricci R_bd = R^a_bad (so R^a_c = R^ab_cb);
Weyl is returned as W[a,b,c,d] = C^ab_cd.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import symexpr as sx
from .jets import Jet, expr_jet, jet_einsum, matrix_inverse, stack, JetError
from .tensor_core import DOWN, UP, Tensor, TensorError, MetricAtPoint


class CurvatureError(ValueError):
    pass


# ---------------------------------------------------------------- metric spec

@dataclass(frozen=True, eq=False)
class MetricSpec:
    n: int
    coords: tuple
    components: tuple          # n x n tuple of Expr, symmetric
    params: Mapping = field(default_factory=dict)
    label: str = ""
    points: tuple = ()         # ((label, (v0, ..., v_{n-1})), ...)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", {k: Fraction(v) if not isinstance(v, float) else v
                                            for k, v in dict(self.params).items()})
        comps = tuple(tuple(sx.as_expr(c) for c in row) for row in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "points", tuple((str(l), tuple(v)) for l, v in self.points))
        n = self.n
        if len(self.coords) != n or len(comps) != n or any(len(r) != n for r in comps):
            raise CurvatureError("dimension, coordinates and component table disagree")
        if len(set(self.coords)) != n:
            raise CurvatureError("duplicate coordinate names")
        for c in self.coords:
            if not sx.IDENT_RE.match(c):
                raise CurvatureError(f"bad coordinate name {c!r}")
        clash = set(self.coords) & set(self.params)
        if clash:
            raise CurvatureError(f"names used as both coordinate and parameter: {sorted(clash)}")
        for i in range(n):
            for j in range(i + 1, n):
                if comps[i][j] != comps[j][i]:
                    raise CurvatureError(f"component table not symmetric at ({i},{j})")
        allowed = set(self.coords) | set(self.params)
        for i in range(n):
            for j in range(n):
                extra = sx.free_variables(comps[i][j]) - allowed
                if extra:
                    raise CurvatureError(f"g[{i}][{j}] uses unknown names {sorted(extra)}")
        for label, vals in self.points:
            if len(vals) != n:
                raise CurvatureError(f"point {label!r} does not bind every coordinate")

    @staticmethod
    def from_strings(coords, components: Mapping, params=None, label="", points=()) -> "MetricSpec":
        """components maps (i, j) with i <= j to expression strings; omitted entries are zero."""
        n = len(coords)
        table = [[sx.ZERO] * n for _ in range(n)]
        for (i, j), text in components.items():
            e = sx.parse_expression(text) if isinstance(text, str) else sx.as_expr(text)
            table[i][j] = e
            table[j][i] = e
        return MetricSpec(n, tuple(coords), tuple(tuple(r) for r in table), params or {}, label, points)

    def binding(self, values: Sequence, mode: str = "float") -> sx.Binding:
        if len(values) != self.n:
            raise CurvatureError("point does not bind every coordinate")
        vals = dict(self.params)
        vals.update(zip(self.coords, values))
        if mode == "exact":
            vals = {k: Fraction(v) if not isinstance(v, float) else v for k, v in vals.items()}
        return sx.Binding(vals, mode)

    def is_rational(self) -> bool:
        return all(sx.is_rational(c) for row in self.components for c in row)

    def is_diagonal(self) -> bool:
        return all(sx.is_const(self.components[i][j], 0)
                   for i in range(self.n) for j in range(self.n) if i != j)

    def metric_at(self, values: Sequence, mode: str = "float") -> MetricAtPoint:
        b = self.binding(values, mode)
        arr = [[sx.evaluate(self.components[i][j], b) for j in range(self.n)] for i in range(self.n)]
        return MetricAtPoint.from_components(arr, exact=(mode == "exact"))


# ---------------------------------------------------------------- symbolic fields

@dataclass(frozen=True, eq=False)
class TensorField:
    n: int
    variance: tuple
    components: np.ndarray     # object array of Expr
    coords: tuple

    def __post_init__(self):
        if self.components.shape != (self.n,) * len(self.variance):
            raise CurvatureError("component array shape does not match rank")

    @property
    def rank(self) -> int:
        return len(self.variance)

    def component(self, *idx) -> sx.Expr:
        return self.components[tuple(idx)]


def _simplify_all(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx in itertools.product(*map(range, arr.shape)):
        out[idx] = sx.simplify(sx.as_expr(arr[idx]))
    return out


def _zeros(n: int, rank: int) -> np.ndarray:
    out = np.empty((n,) * rank, dtype=object)
    out.fill(sx.ZERO)
    return out


def _delta_array(n: int) -> np.ndarray:
    d = _zeros(n, 2)
    for i in range(n):
        d[i, i] = sx.ONE
    return d


def _det(mat, rows: tuple, cols: tuple, memo: dict) -> sx.Expr:
    key = (rows, cols)
    if key in memo:
        return memo[key]
    if len(rows) == 1:
        r = mat[rows[0]][cols[0]]
    else:
        terms = []
        r0 = rows[0]
        for k, c in enumerate(cols):
            e = mat[r0][c]
            if sx.is_const(e, 0):
                continue
            minor = _det(mat, rows[1:], cols[:k] + cols[k + 1:], memo)
            if sx.is_const(minor, 0):
                continue
            t = e * minor
            terms.append(t if k % 2 == 0 else -t)
        r = sx.simplify(sx.add(*terms)) if terms else sx.ZERO
    memo[key] = r
    return r


def symbolic_inverse(m: MetricSpec) -> np.ndarray:
    n = m.n
    g = m.components
    inv = _zeros(n, 2)
    if m.is_diagonal():
        for i in range(n):
            if sx.is_const(g[i][i], 0):
                raise CurvatureError("metric is symbolically singular")
            inv[i, i] = sx.simplify(sx.div(sx.ONE, g[i][i]))
        return inv
    memo: dict = {}
    full = tuple(range(n))
    det = _det(g, full, full, memo)
    if sx.is_const(det, 0):
        raise CurvatureError("metric is symbolically singular")
    for i in range(n):
        for j in range(n):
            rows = tuple(r for r in full if r != j)
            cols = tuple(c for c in full if c != i)
            cof = _det(g, rows, cols, memo)
            if (i + j) % 2:
                cof = -cof
            inv[i, j] = sx.simplify(sx.div(cof, det))
    return inv


def _partials(arr: np.ndarray, coords) -> np.ndarray:
    """New first slot: d_k of every component."""
    n = len(coords)
    out = np.empty((n,) + arr.shape, dtype=object)
    for k, c in enumerate(coords):
        for idx in itertools.product(*map(range, arr.shape)):
            out[(k,) + idx] = sx.differentiate(arr[idx], c)
    return out


def christoffel(m: MetricSpec) -> TensorField:
    ginv = symbolic_inverse(m)
    g = np.array([list(r) for r in m.components], dtype=object)
    dg = _partials(g, m.coords)                               # dg[k,a,b] = d_k g_ab
    t = np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - np.einsum("dbc->dbc", dg)
    gam = np.einsum("ad,dbc->abc", ginv, t)
    gam = _simplify_all(gam * sx.Const(Fraction(1, 2)))
    return TensorField(m.n, (UP, DOWN, DOWN), gam, m.coords)


def _riemann_from(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    """R[c,d,a,b] = R^c_dab; dgam[k,a,b,c] = d_k Gamma^a_bc."""
    r = (np.einsum("acbd->cdab", dgam) - np.einsum("bcad->cdab", dgam)
         + np.einsum("cae,ebd->cdab", gam, gam) - np.einsum("cbe,ead->cdab", gam, gam))
    return r


def _weyl_from(R2, ric_mixed, scalar, n, one, delta):
    """Standard decomposition on (2,2) objects; works for Expr or float arrays."""
    P = ric_mixed
    dP = (np.einsum("ac,bd->abcd", delta, P) - np.einsum("ad,bc->abcd", delta, P)
          - np.einsum("bc,ad->abcd", delta, P) + np.einsum("bd,ac->abcd", delta, P))
    dd = np.einsum("ac,bd->abcd", delta, delta) - np.einsum("ad,bc->abcd", delta, delta)
    c1 = one * Fraction(1, n - 2)
    c2 = one * Fraction(1, (n - 1) * (n - 2))
    return R2 - dP * c1 + dd * (scalar * c2)


class CurvatureBundle:
    """All curvature fields of one metric; each field is built on first use."""

    def __init__(self, m: MetricSpec):
        self.metric = m
        self.n = m.n

    @cached_property
    def metric_inverse(self) -> TensorField:
        return TensorField(self.n, (UP, UP), symbolic_inverse(self.metric), self.metric.coords)

    @cached_property
    def christoffel(self) -> TensorField:
        return christoffel(self.metric)

    @cached_property
    def riemann(self) -> TensorField:
        gam = self.christoffel.components
        r = _simplify_all(_riemann_from(gam, _partials(gam, self.metric.coords)))
        return TensorField(self.n, (UP, DOWN, DOWN, DOWN), r, self.metric.coords)

    @cached_property
    def riemann_22(self) -> TensorField:
        r = np.einsum("be,aecd->abcd", self.metric_inverse.components, self.riemann.components)
        return TensorField(self.n, (UP, UP, DOWN, DOWN), _simplify_all(r), self.metric.coords)

    @cached_property
    def ricci(self) -> TensorField:
        r = _simplify_all(np.einsum("abad->bd", self.riemann.components))
        return TensorField(self.n, (DOWN, DOWN), r, self.metric.coords)

    @cached_property
    def ricci_mixed(self) -> TensorField:
        r = _simplify_all(np.einsum("ab,bc->ac", self.metric_inverse.components, self.ricci.components))
        return TensorField(self.n, (UP, DOWN), r, self.metric.coords)

    @cached_property
    def ricci_scalar(self) -> sx.Expr:
        return sx.simplify(sx.as_expr(np.einsum("aa->", self.ricci_mixed.components)))

    @cached_property
    def tracefree_ricci(self) -> TensorField:
        g = np.array([list(r) for r in self.metric.components], dtype=object)
        r = self.ricci.components - g * (self.ricci_scalar * sx.Const(Fraction(1, self.n)))
        return TensorField(self.n, (DOWN, DOWN), _simplify_all(r), self.metric.coords)

    @cached_property
    def weyl(self) -> TensorField:
        n = self.n
        w = _weyl_from(self.riemann_22.components, self.ricci_mixed.components,
                       self.ricci_scalar, n, sx.ONE, _delta_array(n))
        return TensorField(n, (UP, UP, DOWN, DOWN), _simplify_all(w), self.metric.coords)

    @cached_property
    def weyl_divergence(self) -> TensorField:
        nab = covariant_derivative(self.weyl, self.metric, self).components   # nab[d,a,b,c,k]
        D = np.einsum("kd,dabck->abc", self.metric_inverse.components, nab)
        return TensorField(self.n, (UP, UP, DOWN), _simplify_all(D), self.metric.coords)


def curvature_bundle(m: MetricSpec) -> CurvatureBundle:
    b = CurvatureBundle(m)
    b.christoffel   # surfaces singular metrics immediately
    return b


def covariant_derivative(f: TensorField, m: MetricSpec, b: CurvatureBundle | None = None) -> TensorField:
    """nabla_a T with the new lower slot first."""
    b = b or CurvatureBundle(m)
    gam = b.christoffel.components
    out = _partials(f.components, m.coords)
    if f.variance:
        out = out + _connection_terms(f.components, f.variance, gam, np.einsum)
    return TensorField(m.n, (DOWN,) + tuple(f.variance), _simplify_all(out), m.coords)


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _connection_terms(T, variance, gam, einsum):
    """Sum of the Gamma corrections of nabla_d T; result has the derivative slot first."""
    r = len(variance)
    idx = _LETTERS[:r]
    d, e = "y", "z"
    total = None
    for s, v in enumerate(variance):
        src = idx[:s] + e + idx[s + 1:]
        if v == UP:
            term = einsum(f"{idx[s]}{d}{e},{src}->{d}{idx}", gam, T)
        else:
            term = -einsum(f"{e}{d}{idx[s]},{src}->{d}{idx}", gam, T)
        total = term if total is None else total + term
    return total


def weyl_divergence(m: MetricSpec, b: CurvatureBundle) -> TensorField:
    return b.weyl_divergence


def conformal_rescale(m: MetricSpec, omega, label: str | None = None) -> MetricSpec:
    """Metric omega^2 g with omega an Expr or expression string."""
    om = sx.parse_expression(omega) if isinstance(omega, str) else sx.as_expr(omega)
    extra = sx.free_variables(om) - set(m.coords) - set(m.params)
    if extra:
        raise CurvatureError(f"conformal factor uses unknown names {sorted(extra)}")
    for lab, vals in m.points:
        try:
            v = sx.evaluate(om, m.binding(vals, "float"))
        except sx.EvaluationError as err:
            raise CurvatureError(f"conformal factor fails at point {lab!r}: {err}") from None
        if v == 0:
            raise CurvatureError(f"conformal factor vanishes at point {lab!r}")
    om2 = sx.power(om, 2)
    comps = tuple(tuple(c if sx.is_const(c, 0) else sx.mul(om2, c) for c in row) for row in m.components)
    return MetricSpec(m.n, m.coords, comps, m.params,
                      label if label is not None else m.label, m.points)


def evaluate_field(f: TensorField, point: sx.Binding) -> Tensor:
    out = np.empty(f.components.shape, dtype=object)
    for idx in itertools.product(*map(range, f.components.shape)):
        try:
            out[idx] = sx.evaluate(f.components[idx], point)
        except sx.EvaluationError as err:
            raise sx.EvaluationError(f"component {list(idx)}: {err}") from None
    return Tensor.from_values(out, f.variance, exact=(point.mode == "exact"))


# ---------------------------------------------------------------- jet route

@dataclass(eq=False)
class LocalGeometry:
    """Jets of the curvature objects about one point.

    Orders: g, ginv at ``order``; Gamma at order-1; Riemann, Ricci, Weyl at
    order-2; Weyl divergence at order-3.
    """
    metric: MetricSpec
    point: tuple
    exact: bool
    order: int
    g: Jet
    ginv: Jet
    gamma: Jet
    riemann: Jet | None = None
    riemann_22: Jet | None = None
    ricci: Jet | None = None
    ricci_mixed: Jet | None = None
    scalar: Jet | None = None
    tracefree_ricci: Jet | None = None
    weyl: Jet | None = None
    weyl_divergence: Jet | None = None

    @property
    def n(self) -> int:
        return self.metric.n

    def metric_at_point(self) -> MetricAtPoint:
        return MetricAtPoint(self.g.value_tensor((DOWN, DOWN)), self.ginv.value_tensor((UP, UP)))

    def weyl_tensor(self) -> Tensor:
        return self.weyl.value_tensor((UP, UP, DOWN, DOWN))

    def divergence_tensor(self) -> Tensor:
        return self.weyl_divergence.value_tensor((UP, UP, DOWN))


def delta_jet(n: int, order: int, exact: bool) -> Jet:
    eye = np.eye(n, dtype=np.int64)
    return Jet.constant(n, order, eye.astype(object).tolist() if exact else eye.astype(float), exact)


def cov_deriv_jet(T: Jet, variance, gamma: Jet) -> Jet:
    """nabla_d T at one order lower; derivative slot first."""
    if not variance:
        return T.gradient()
    return T.gradient() + _connection_terms(T, variance, gamma, jet_einsum)


def local_geometry(m: MetricSpec, point: Sequence, order: int = 4, exact: bool = False) -> LocalGeometry:
    n = m.n
    if order < 1:
        raise CurvatureError("jet order must be >= 1")
    comps = np.empty((n, n), dtype=object)
    cache = {}
    for i in range(n):
        for j in range(i, n):
            e = m.components[i][j]
            if e not in cache:
                cache[e] = expr_jet(e, m.coords, point, m.params, order, exact)
            comps[i, j] = comps[j, i] = cache[e]
    g = stack([stack(list(comps[i]), axis=0) for i in range(n)], axis=0)
    if not exact and not np.all(np.isfinite(g.num)):
        raise sx.EvaluationError("non-finite metric components")
    try:
        ginv = matrix_inverse(g)
    except JetError as err:
        raise CurvatureError(f"metric singular at point: {err}") from None
    dg = g.gradient()                                           # dg[k,a,b]
    t = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg     # [d,b,c]
    half = Fraction(1, 2) if exact else 0.5
    gamma = jet_einsum("ad,dbc->abc", ginv, t).scale(half)
    geo = LocalGeometry(m, tuple(point), exact, order, g, ginv, gamma)
    if order < 2:
        return geo
    dgam = gamma.gradient()                                     # [k,a,b,c]
    riem = (dgam.transpose(1, 3, 0, 2) - dgam.transpose(1, 3, 2, 0)
            + jet_einsum("cae,ebd->cdab", gamma, gamma) - jet_einsum("cbe,ead->cdab", gamma, gamma))
    geo.riemann = riem
    geo.riemann_22 = jet_einsum("be,aecd->abcd", ginv, riem)
    geo.ricci = jet_einsum("abad->bd", riem)
    geo.ricci_mixed = jet_einsum("ab,bc->ac", ginv, geo.ricci)
    geo.scalar = jet_einsum("aa->", geo.ricci_mixed)
    geo.tracefree_ricci = geo.ricci - g * geo.scalar.scale(Fraction(1, n) if exact else 1.0 / n)
    L = riem.order
    one = Fraction(1) if exact else 1.0
    delta = delta_jet(n, L, exact)
    geo.weyl = _weyl_jet(geo.riemann_22, geo.ricci_mixed, geo.scalar, n, delta, exact)
    if order >= 3:
        nab = cov_deriv_jet(geo.weyl, (UP, UP, DOWN, DOWN), gamma)   # [d,a,b,c,k]
        geo.weyl_divergence = jet_einsum("kd,dabck->abc", ginv, nab)
    return geo


def _weyl_jet(R2: Jet, P: Jet, R: Jet, n: int, delta: Jet, exact: bool) -> Jet:
    f = (lambda a, b: Fraction(a, b)) if exact else (lambda a, b: a / b)
    dP = (jet_einsum("ac,bd->abcd", delta, P) - jet_einsum("ad,bc->abcd", delta, P)
          - jet_einsum("bc,ad->abcd", delta, P) + jet_einsum("bd,ac->abcd", delta, P))
    dd = jet_einsum("ac,bd->abcd", delta, delta) - jet_einsum("ad,bc->abcd", delta, delta)
    return R2 - dP.scale(f(1, n - 2)) + (dd * R).scale(f(1, (n - 1) * (n - 2)))
