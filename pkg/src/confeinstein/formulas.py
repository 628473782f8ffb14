"""Weyl polynomial expressions shared by the identity checks and the K solvers.

Every expression is written once against a small backend interface so it can
be evaluated on a Tensor at a point (variance-checked) or on jets.  W is
always C^ab_cd stored as W[a,b,c,d]; Cl2[a,b,c,d] = C_ab^cd; D[a,b,c] is the
Weyl divergence nabla^k C^ab_ck.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import jets as J
from .tensor_core import DOWN, UP, Tensor, antisymmetrize, einsum, identity


@dataclass(frozen=True)
class TensorBackend:
    n: int
    exact: bool

    def E(self, spec, *ops):
        return einsum(spec, *ops)

    def antisym(self, x, slots):
        return antisymmetrize(x, slots)

    def delta(self, variance=(UP, DOWN)):
        return identity(self.n, self.exact).with_variance(variance)

    def frac(self, a, b=1):
        return Fraction(a, b) if self.exact else a / b

    def divide(self, x, s):
        """x / s for a rank-0 tensor s."""
        v = s.item() if isinstance(s, Tensor) else s
        return x.scale(1 / v) if self.exact else x.scale(1.0 / float(v))

    def lower_first(self, W):
        return W.transpose(2, 3, 0, 1)


@dataclass(frozen=True)
class JetBackend:
    n: int
    order: int
    exact: bool

    def E(self, spec, *ops):
        return J.jet_einsum(spec, *ops)

    def antisym(self, x, slots):
        return J.antisymmetrize(x, slots)

    def delta(self, variance=(UP, DOWN)):
        eye = np.eye(self.n, dtype=np.int64)
        val = eye.astype(object).tolist() if self.exact else eye.astype(float)
        return J.Jet.constant(self.n, self.order, val, self.exact)

    def frac(self, a, b=1):
        return Fraction(a, b) if self.exact else a / b

    def divide(self, x, s):
        return x * J.reciprocal(s)

    def lower_first(self, W):
        return W.transpose(2, 3, 0, 1)


# ---------------------------------------------------------------- cubic, 5d

def cubic_scalars(B, W):
    """(C^ab_cd C^cd_ef C^ef_ab, C^ab_cd C^ce_af C^df_be)."""
    s1 = B.E("abcd,cdef,efab->", W, W, W)
    s2 = B.E("abcd,ceaf,dfbe->", W, W, W)
    return s1, s2


def cubic_two_index(B, W):
    """Left side of the 5d two-index cubic identity, as X[j,k] = X^j_k."""
    return (B.E("ajbc,bcde,deak->jk", W, W, W)
            - B.E("ajbk,bcde,deac->jk", W, W, W).scale(2)
            - B.E("ajbc,bdek,cead->jk", W, W, W).scale(4))


# ---------------------------------------------------------------- quartic, 5d

def quartic_two_index(B, W):
    return (B.E("qjip,ipqk,abcd,cdab->jk", W, W, W, W).scale(5)
            - B.E("qgip,ipqk,abcg,cjab->jk", W, W, W, W).scale(8)
            + B.E("qgip,ipqe,beag,ajbk->jk", W, W, W, W).scale(8)
            - B.E("qgip,ipqe,abgk,ejab->jk", W, W, W, W).scale(4)
            - B.E("qgip,ipqe,aebk,bjag->jk", W, W, W, W).scale(8))


def quartic_scalar(B, W):
    return (B.E("qgip,ipqg,abcd,cdab->", W, W, W, W)
            - B.E("qgip,ipqd,abcg,cdab->", W, W, W, W).scale(4))


def k_dim5_parts(B, W, D):
    """Numerator vector and denominator of the 5d quartic K formula (K = -num/den)."""
    num = (B.E("qjip,abcd,cdab,ipq->j", W, W, W, D).scale(5)
           - B.E("qgip,abcg,cjab,ipq->j", W, W, W, D).scale(8)
           + B.E("qgip,ipqe,beag,ajb->j", W, W, W, D).scale(8)
           - B.E("qgip,ipqe,ejab,abg->j", W, W, W, D).scale(4)
           - B.E("qgip,ipqe,bjag,aeb->j", W, W, W, D).scale(8))
    den = (B.E("qgip,ipqg,abcd,cdab->", W, W, W, W)
           - B.E("qgip,ipqe,abcg,ceab->", W, W, W, W).scale(4))
    return num, den


# ---------------------------------------------------------------- cubic, 6d

def six_cubic_two_index(B, W):
    L = B.lower_first(W)
    return (B.E("akbc,ajde,bcde->jk", L, W, L)
            - B.E("akbj,acde,bcde->jk", L, W, L).scale(2)
            - B.E("akbc,djbe,cdae->jk", L, W, L).scale(4))


def six_cubic_scalar(B, W):
    L = B.lower_first(W)
    return (B.E("abcd,cdef,efab->", L, L, L)
            - B.E("abcd,aecf,debf->", L, W, L).scale(4))


def k_dim6_parts(B, W, D):
    """K = -4 num / den."""
    L = B.lower_first(W)
    DL = D.transpose(2, 0, 1)          # DL[a,b,c] = nabla^k C_ak^bc
    num = (B.E("ajde,bcde,abc->j", W, L, DL)
           - B.E("acde,bcde,abj->j", W, L, DL).scale(2)
           - B.E("djbe,cdae,abc->j", W, L, DL).scale(4))
    return num, six_cubic_scalar(B, W)


# ---------------------------------------------------------------- Lovelock, 6d

def lovelock_coefficients(n: int, printed: bool = False):
    """Coefficients (alpha, beta, gamma) in H = A - alpha T1 + beta T2 - gamma A3 T3."""
    if printed:
        return Fraction(9, 8), Fraction(3), Fraction(1, 4)
    if n < 5:
        raise ValueError("the double three-form construction needs n >= 5")
    return (Fraction(9, n - 4), Fraction(18, (n - 4) * (n - 3)),
            Fraction(6, (n - 4) * (n - 3) * (n - 2)))


def lovelock_A(B, W):
    """A[i,j,k,a,b,c] = A_ijk^abc = 4 C_[ij^h[a C_k]h^bc]."""
    L = B.lower_first(W)
    X = B.E("ijha,khbc->ijkabc", L, L).scale(4)
    return B.antisym(B.antisym(X, [0, 1, 2]), [3, 4, 5])


def lovelock_H(B, A, coefficients):
    al, be, ga = coefficients
    d = B.delta((DOWN, UP))
    A1 = B.E("rjkrbc->jkbc", A)
    A2 = B.E("rskrsc->kc", A)
    A3 = B.E("rstrst->", A)
    def asym(x):
        return B.antisym(B.antisym(x, [0, 1, 2]), [3, 4, 5])
    T1 = asym(B.E("jkbc,ia->ijkabc", A1, d))
    T2 = asym(B.E("ic,ja,kb->ijkabc", A2, d, d))
    T3 = asym(B.E("ia,jb,kc->ijkabc", d, d, d))
    t3 = T3.scale(A3.item()) if isinstance(A3, Tensor) else T3 * A3
    return A - T1.scale(al) + T2.scale(be) - t3.scale(ga)


def lovelock_trace(B, H):
    """H_abi^dei."""
    return B.E("abidei->abde", H)


def lovelock_square(B, H):
    """X[k,j] = H_abk^def H_def^abj."""
    return B.E("abkdef,defabj->kj", H, H)


def lovelock_two_index(B, A):
    """Left side of the expanded A-form, X[k,j]."""
    return (B.E("abkcde,cdeabj->kj", A, A)
            + B.E("abkabc,cdedej->kj", A, A).scale(3)
            + B.E("abkacd,cdebej->kj", A, A).scale(6)
            - B.E("abcade,dekbcj->kj", A, A).scale(3)
            - B.E("abcabc,dekdej->kj", A, A)
            + B.E("abcabd,dekcej->kj", A, A).scale(6))


def lovelock_scalar(B, A):
    return (B.E("abcabc,defdef->", A, A)
            + B.E("abcade,defbcf->", A, A).scale(9)
            - B.E("abcabd,defcef->", A, A).scale(9)
            - B.E("abcdef,defabc->", A, A))


def lovelock_contracted(B, A, KA):
    """Two-index form with K^k contracted into its free lower slot; KA[a,b,c,d,e] = K^k A_kab^cde."""
    return (B.E("abcde,cdeabj->j", KA, A)
            + B.E("ababc,cdedej->j", KA, A).scale(3)
            + B.E("abacd,cdebej->j", KA, A).scale(6)
            - B.E("abcade,debcj->j", A, KA).scale(3)
            - B.E("abcabc,dedej->j", A, KA)
            + B.E("abcabd,decej->j", A, KA).scale(6))


def k_dot_A_printed(B, W, D):
    """Printed divergence substitute for K^k A_kab^cde (before the -8/9 correction)."""
    Df = -D                        # Df[p,c,a] = nabla^k C_ka^pc
    X1 = B.E("pca,debp->abcde", Df, W)
    X1 = B.antisym(B.antisym(X1, [0, 1]), [2, 3, 4])
    X2 = B.E("dep,cpab->abcde", Df, W)
    X2 = B.antisym(B.antisym(X2, [0, 1]), [2, 3, 4])
    return X1.scale(2) - X2


K_DOT_A_FACTOR = Fraction(-8, 9)


def k_lovelock_parts(B, W, D, printed: bool = False):
    """(vector, scalar, factor) with K = factor * vector / scalar."""
    A = lovelock_A(B, W)
    KA = k_dot_A_printed(B, W, D)
    vec = lovelock_contracted(B, A, KA)
    den = lovelock_scalar(B, A)
    if printed:
        return vec, den, Fraction(-4)
    # K = -6 (contracted two-index form with true K.A) / scalar, true K.A = -8/9 printed
    return vec, den, Fraction(-6) * K_DOT_A_FACTOR


# ---------------------------------------------------------------- 4d and general

def k_dim4_parts(B, chains, D, p: int):
    """K = 8 C(p-1)^ac_ij D^ij_c / Cp."""
    num = B.E("acij,ijc->a", chains[p - 1], D).scale(8)
    den = B.E("abcd,cdab->", chains[p - 1], chains[1]) if p - 1 >= 1 else None
    return num, den
