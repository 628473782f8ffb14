"""Direct expansion of delta-antisymmetrized Weyl expressions.

An expression  F1 F2 ... C^[U0 U1 _[L0 L1 delta^U2_L2 ... delta^Um]_Lm]
(each Fi a Weyl factor C^{..}_{..} named by four letters) is expanded over
both permutation groups.  Deltas are contracted into the remaining letters
with a union-find; a delta that joins two free letters is kept explicitly.
Identical terms are merged, so each unique einsum is evaluated once.  The
result carries the 1/(m!)^2 normalization of the bracket with single deltas.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

from .tensor_core import DOWN, UP, Tensor, einsum, identity, perm_sign


@lru_cache(maxsize=None)
def expand(factors: tuple, upper: str, lower: str, free: frozenset) -> tuple:
    """Return ((operand letter strings, kept deltas), integer coefficient) pairs."""
    m = len(upper)
    if len(lower) != m or m < 2:
        raise ValueError("bracket needs matching upper/lower letter groups of size >= 2")
    perms = list(itertools.permutations(range(m)))
    signs = [perm_sign(p) for p in perms]
    terms: dict = {}
    for s, ss in zip(perms, signs):
        for t, st in zip(perms, signs):
            parent: dict = {}

            def find(x):
                while parent.get(x, x) != x:
                    x = parent[x]
                return x

            kept = []
            for i in range(2, m):
                ru, rl = find(upper[s[i]]), find(lower[t[i]])
                if ru == rl:
                    raise ValueError("delta loop in expansion")
                if ru in free and rl in free:
                    kept.append((ru, rl))
                elif rl in free:
                    parent[ru] = rl
                else:
                    parent[rl] = ru
            ops = tuple("".join(find(c) for c in f) for f in factors)
            br = "".join(find(c) for c in (upper[s[0]], upper[s[1]], lower[t[0]], lower[t[1]]))
            kept = tuple(sorted((find(a), find(b)) for a, b in kept))
            key = (ops + (br,), kept)
            terms[key] = terms.get(key, 0) + ss * st
    return tuple((k, v) for k, v in sorted(terms.items()) if v)


def evaluate(terms, W: Tensor, out: str) -> Tensor:
    """Sum the expansion for the Weyl tensor W; the result has free letters ``out``."""
    m = None
    total = None
    delta = identity(W.n, W.exact)
    for (ops, kept), coef in terms:
        spec = ",".join(list(ops) + [a + b for a, b in kept]) + "->" + out
        val = einsum(spec, *([W] * len(ops) + [delta] * len(kept))).scale(coef)
        total = val if total is None else total + val
    if total is None:
        raise ValueError("empty expansion")
    return total


def normalized(terms, W: Tensor, out: str, m: int) -> Tensor:
    f = math.factorial(m) ** 2
    t = evaluate(terms, W, out)
    return t.scale(Fraction(1, f)) if W.exact else t.scale(1.0 / f)


# Parent delta-identities of the printed expansions, as (factors, upper, lower, free letters, output)
PARENT_CUBIC_5D = (("cdpe", "phab"), "abef", "cdhi", frozenset("fi"), "fi")
PARENT_CUBIC_5D_SCALAR = (("cdab", "kiej"), "abej", "cdki", frozenset(), "")
PARENT_QUARTIC_5D = (("qgip", "ipqe", "abcd"), "cdef", "abgh", frozenset("fh"), "fh")
PARENT_CUBIC_6D = (("cdef", "hiab"), "abefg", "cdhij", frozenset("gj"), "gj")


def parent_value(parent, W: Tensor) -> Tensor:
    factors, up, lo, free, out = parent
    return normalized(expand(factors, up, lo, free), W, out, len(up))
