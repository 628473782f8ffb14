"""Small symbolic scalar engine: parse, differentiate, simplify, evaluate.

Expressions are immutable trees.  The smart constructors (``add``, ``mul``,
``div``, ``power``, ``neg``, ``func``) fold constants and drop neutral
elements locally; ``simplify`` additionally collects like terms and factors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Union

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sinh", "cosh", "tanh", "sqrt")
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

Number = Union[Fraction, float]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.message = message
        self.offset = offset


class EvaluationError(ArithmeticError):
    pass


class Expr:
    """Base node.  Subclasses are frozen dataclasses."""

    kind = "expr"

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        return power(self, k)

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((type(self).__name__,) + self._fields())

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction
    kind = "constant"

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def _fields(self):
        return (self.value,)

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str
    kind = "variable"

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise ValueError(f"bad variable name {self.name!r}")

    def _fields(self):
        return (self.name,)

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Add(Expr):
    terms: tuple
    kind = "sum"

    def _fields(self):
        return self.terms

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    factors: tuple
    kind = "product"

    def _fields(self):
        return self.factors

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Div(Expr):
    num: Expr
    den: Expr
    kind = "quotient"

    def _fields(self):
        return (self.num, self.den)

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exp: int
    kind = "integer-power"

    def __post_init__(self):
        if not isinstance(self.exp, int) or isinstance(self.exp, bool):
            raise ValueError("integer-power exponent must be an int")

    def _fields(self):
        return (self.base, self.exp)

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr
    kind = "negate"

    def _fields(self):
        return (self.arg,)

    __hash__ = Expr.__hash__


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr
    kind = "unary-function"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def _fields(self):
        return (self.name, self.arg)

    __hash__ = Expr.__hash__


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Const(Fraction(x))
    if isinstance(x, str):
        return parse_expression(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------- constructors

def add(*terms: Expr) -> Expr:
    flat = []
    c = Fraction(0)
    for t in terms:
        parts = t.terms if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Const):
                c += p.value
            else:
                flat.append(p)
    if c != 0:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat = []
    c = Fraction(1)
    for f in factors:
        parts = f.factors if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Neg):
                c = -c
                p = p.arg
            if isinstance(p, Const):
                c *= p.value
            else:
                flat.append(p)
    if c == 0:
        return ZERO
    if not flat:
        return Const(c)
    body = flat[0] if len(flat) == 1 else Mul(tuple(flat))
    if c == 1:
        return body
    if c == -1:
        return Neg(body)
    return Mul((Const(c),) + tuple(flat))


def neg(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0:
            return Div(a, b)  # left for evaluate() to report
        return mul(Const(1 / b.value), a)
    if is_const(a, 0):
        return ZERO
    if isinstance(a, Div):
        return div(a.num, mul(a.den, b))
    if isinstance(b, Div):
        return div(mul(a, b.den), b.num)
    if isinstance(b, Neg):
        return neg(div(a, b.arg))
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    if a == b:
        return ONE
    return Div(a, b)


def power(b: Expr, k: int) -> Expr:
    if k == 0:
        return ONE
    if k == 1:
        return b
    if isinstance(b, Const):
        if b.value == 0 and k < 0:
            return Pow(b, k)
        return Const(b.value ** k)
    if isinstance(b, Pow):
        return power(b.base, b.exp * k)
    if isinstance(b, Neg):
        inner = power(b.arg, k)
        return inner if k % 2 == 0 else neg(inner)
    return Pow(b, k)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Const) and a.value == 0:
        if name in ("sin", "tan", "sinh", "tanh", "sqrt"):
            return ZERO
        if name in ("cos", "exp", "cosh"):
            return ONE
    if name == "ln" and is_const(a, 1):
        return ZERO
    return Func(name, a)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte(text, pos))
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), _byte(text, start)))
        pos = m.end()
    toks.append(("end", "", _byte(text, len(text))))
    return toks


def _byte(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.take()
        if t[1] != text or t[0] == "end":
            raise ExprSyntaxError(f"expected {text!r}", t[2])
        return t

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = Add((e, rhs)) if op == "+" else Add((e, Neg(rhs)))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            e = Mul((e, rhs)) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        negs = 0
        while self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            negs += 1
        e = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            e = Pow(e, self.signed_integer())
        for _ in range(negs):
            e = Neg(e)
        return e

    def signed_integer(self) -> int:
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
            t = self.peek()
        if t[0] != "num" or not t[1].isdigit():
            raise ExprSyntaxError("non-integer exponent", t[2])
        self.take()
        return sign * int(t[1])

    def base(self) -> Expr:
        t = self.take()
        kind, text, off = t
        if kind == "num":
            return Const(Fraction(text))
        if kind == "id":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function name {text!r}", off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs an argument", off)
            return Var(text)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", off)
        raise ExprSyntaxError(f"unexpected token {text!r}", off)


def parse_expression(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    t = p.peek()
    if t[0] != "end":
        raise ExprSyntaxError(f"unexpected token {t[1]!r}", t[2])
    return e


_RATIONAL_RE = re.compile(r"\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)\s*(?:/\s*(\d+))?\s*\Z")


def parse_number(text: str) -> Fraction:
    """Parse ``integer``, ``decimal`` or ``integer/integer`` (optionally signed)."""
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ValueError(f"not a rational number: {text!r}")
    sign, a, b = m.groups()
    if b is not None and "." in a:
        raise ValueError(f"not a rational number: {text!r}")
    v = Fraction(a) / (Fraction(int(b)) if b is not None else 1)
    return -v if sign == "-" else v


# ---------------------------------------------------------------- printing

def to_string(e: Expr) -> str:
    """Render in the input grammar; the output re-parses to an equal value."""
    return _str(e, 0)


def _str(e: Expr, ctx: int) -> str:
    if isinstance(e, Const):
        v = e.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        if v < 0 or v.denominator != 1:
            return f"({s})" if ctx > 0 else s
        return s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_str(e.arg, 0)})"
    if isinstance(e, Add):
        parts = [_str(e.terms[0], 1)]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append("- " + _str(t.arg, 2))
            else:
                parts.append("+ " + _str(t, 2))
        s = " ".join(parts)
        return f"({s})" if ctx > 1 else s
    if isinstance(e, Mul):
        s = "*".join(_str(f, 3) for f in e.factors)
        return f"({s})" if ctx > 2 else s
    if isinstance(e, Div):
        s = f"{_str(e.num, 2)}/{_str(e.den, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(e, Neg):
        s = "-" + _str(e.arg, 4)
        return f"({s})" if ctx > 1 else s
    if isinstance(e, Pow):
        b = e.base
        inner = _str(b, 0)
        atomic = isinstance(b, (Var, Func)) or (
            isinstance(b, Const) and b.value >= 0 and b.value.denominator == 1)
        s = f"{inner if atomic else '(' + inner + ')'}^{e.exp}"
        return f"({s})" if ctx > 4 else s
    raise TypeError(type(e))


# ---------------------------------------------------------------- structure

def free_variables(e: Expr) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Add):
            stack.extend(x.terms)
        elif isinstance(x, Mul):
            stack.extend(x.factors)
        elif isinstance(x, Div):
            stack.extend((x.num, x.den))
        elif isinstance(x, (Pow,)):
            stack.append(x.base)
        elif isinstance(x, (Neg, Func)):
            stack.append(x.arg)
    return frozenset(out)


def is_rational(e: Expr) -> bool:
    """True when e contains no unary-function nodes."""
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Func):
            return False
        if isinstance(x, Add):
            stack.extend(x.terms)
        elif isinstance(x, Mul):
            stack.extend(x.factors)
        elif isinstance(x, Div):
            stack.extend((x.num, x.den))
        elif isinstance(x, Pow):
            stack.append(x.base)
        elif isinstance(x, Neg):
            stack.append(x.arg)
    return True


def substitute(e: Expr, values: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return values.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(*(substitute(t, values) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(substitute(f, values) for f in e.factors))
    if isinstance(e, Div):
        return div(substitute(e.num, values), substitute(e.den, values))
    if isinstance(e, Pow):
        return power(substitute(e.base, values), e.exp)
    if isinstance(e, Neg):
        return neg(substitute(e.arg, values))
    if isinstance(e, Func):
        return func(e.name, substitute(e.arg, values))
    raise TypeError(type(e))


# ---------------------------------------------------------------- calculus

def _dfunc(name: str, a: Expr) -> Expr:
    if name == "sin":
        return func("cos", a)
    if name == "cos":
        return neg(func("sin", a))
    if name == "tan":
        return power(func("cos", a), -2)
    if name == "exp":
        return func("exp", a)
    if name == "ln":
        return div(ONE, a)
    if name == "sinh":
        return func("cosh", a)
    if name == "cosh":
        return func("sinh", a)
    if name == "tanh":
        return power(func("cosh", a), -2)
    if name == "sqrt":
        return div(Const(Fraction(1, 2)), func("sqrt", a))
    raise ValueError(name)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative d e / d var."""
    memo: dict = {}

    def d(x: Expr) -> Expr:
        key = id(x)
        hit = memo.get(key)
        if hit is not None and hit[0] is x:
            return hit[1]
        r = _d(x)
        memo[key] = (x, r)
        return r

    def _d(x: Expr) -> Expr:
        if isinstance(x, Const):
            return ZERO
        if isinstance(x, Var):
            return ONE if x.name == var else ZERO
        if var not in free_variables(x):
            return ZERO
        if isinstance(x, Add):
            return add(*(d(t) for t in x.terms))
        if isinstance(x, Neg):
            return neg(d(x.arg))
        if isinstance(x, Mul):
            terms = []
            fs = x.factors
            for i, f in enumerate(fs):
                df = d(f)
                if is_const(df, 0):
                    continue
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
            return add(*terms)
        if isinstance(x, Div):
            dn, dd = d(x.num), d(x.den)
            if is_const(dd, 0):
                return div(dn, x.den)
            top = add(mul(dn, x.den), neg(mul(x.num, dd)))
            return div(top, power(x.den, 2))
        if isinstance(x, Pow):
            return mul(Const(x.exp), power(x.base, x.exp - 1), d(x.base))
        if isinstance(x, Func):
            return mul(_dfunc(x.name, x.arg), d(x.arg))
        raise TypeError(type(x))

    return simplify(d(e))


# ---------------------------------------------------------------- simplify

def _split_coeff(t: Expr):
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Neg):
        c, r = _split_coeff(t.arg)
        return -c, r
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), t


def _collect_terms(terms) -> Expr:
    order = []
    coeff: dict = {}
    for t in terms:
        c, r = _split_coeff(t)
        if r not in coeff:
            order.append(r)
            coeff[r] = Fraction(0)
        coeff[r] += c
    out = []
    for r in order:
        c = coeff[r]
        if c == 0:
            continue
        out.append(Const(c) if r == ONE else mul(Const(c), r))
    return add(*out)


def _collect_factors(factors) -> Expr:
    order = []
    exps: dict = {}
    c = Fraction(1)
    for f in factors:
        if isinstance(f, Const):
            c *= f.value
            continue
        if isinstance(f, Neg):
            c = -c
            f = f.arg
        b, k = (f.base, f.exp) if isinstance(f, Pow) else (f, 1)
        if b not in exps:
            order.append(b)
            exps[b] = 0
        exps[b] += k
    out = [power(b, exps[b]) for b in order if exps[b] != 0]
    return mul(Const(c), *out)


def simplify(e: Expr) -> Expr:
    """Value-preserving cleanup; canonical form is not promised."""
    memo: dict = {}

    def s(x: Expr) -> Expr:
        key = id(x)
        hit = memo.get(key)
        if hit is not None and hit[0] is x:
            return hit[1]
        r = _s(x)
        memo[key] = (x, r)
        return r

    def _s(x: Expr) -> Expr:
        if isinstance(x, (Const, Var)):
            return x
        if isinstance(x, Add):
            a = add(*(s(t) for t in x.terms))
            return _collect_terms(a.terms) if isinstance(a, Add) else a
        if isinstance(x, Mul):
            m = mul(*(s(f) for f in x.factors))
            if isinstance(m, Mul):
                return _collect_factors(m.factors)
            if isinstance(m, Neg) and isinstance(m.arg, Mul):
                return neg(_collect_factors(m.arg.factors))
            return m
        if isinstance(x, Div):
            return div(s(x.num), s(x.den))
        if isinstance(x, Pow):
            return power(s(x.base), x.exp)
        if isinstance(x, Neg):
            return neg(s(x.arg))
        if isinstance(x, Func):
            return func(x.name, s(x.arg))
        raise TypeError(type(x))

    return s(e)


# ---------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class Binding:
    values: Mapping[str, Number]
    mode: str = "float"

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        vals = {}
        for k, v in dict(self.values).items():
            if self.mode == "exact":
                if isinstance(v, float):
                    raise TypeError(f"exact binding needs rational values, got float for {k}")
                vals[k] = Fraction(v)
            else:
                vals[k] = float(v)
        object.__setattr__(self, "values", vals)

    def with_values(self, **kw) -> "Binding":
        v = dict(self.values)
        v.update(kw)
        return Binding(v, self.mode)


_FLOAT_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp, "ln": math.log,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh, "sqrt": math.sqrt,
}


def evaluate(e: Expr, b: Binding) -> Number:
    exact = b.mode == "exact"
    vals = b.values
    memo: dict = {}

    def ev(x: Expr):
        key = id(x)
        hit = memo.get(key)
        if hit is not None and hit[0] is x:
            return hit[1]
        r = _ev(x)
        memo[key] = (x, r)
        return r

    def _ev(x: Expr):
        if isinstance(x, Const):
            return x.value if exact else float(x.value)
        if isinstance(x, Var):
            try:
                return vals[x.name]
            except KeyError:
                raise EvaluationError(f"unbound variable {x.name!r}") from None
        if isinstance(x, Add):
            acc = ev(x.terms[0])
            for t in x.terms[1:]:
                acc = acc + ev(t)
            return acc
        if isinstance(x, Mul):
            acc = ev(x.factors[0])
            for f in x.factors[1:]:
                acc = acc * ev(f)
            return acc
        if isinstance(x, Div):
            den = ev(x.den)
            if den == 0:
                raise EvaluationError("division by zero")
            return ev(x.num) / den
        if isinstance(x, Pow):
            base = ev(x.base)
            if base == 0 and x.exp < 0:
                raise EvaluationError("division by zero")
            try:
                return base ** x.exp
            except OverflowError:
                raise EvaluationError("non-finite result") from None
        if isinstance(x, Neg):
            return -ev(x.arg)
        if isinstance(x, Func):
            if exact:
                raise EvaluationError(f"transcendental function {x.name!r} in exact mode")
            try:
                return _FLOAT_FUNCS[x.name](ev(x.arg))
            except (ValueError, OverflowError) as err:
                raise EvaluationError(f"{x.name}: {err}") from None
        raise TypeError(type(x))

    r = ev(e)
    if not exact and not math.isfinite(r):
        raise EvaluationError("non-finite result")
    return r
