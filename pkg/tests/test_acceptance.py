"""Acceptance criteria 1-9; each test prints one PASS/FAIL line."""
import math

import numpy as np
import pytest

from confeinstein import catalog
from confeinstein import conformal as C
from confeinstein import identities as I
from confeinstein.weyl_algebra import cayley_hamilton_residual, nondegeneracy

SEEDS = range(100)
ORACLE_SEEDS = range(5)
EINSTEIN = ["schwarzschild4", "tangherlini(5)", "tangherlini(6)", "desitter(4)", "desitter(5)", "desitter(6)"]
RESCALED = [f"{b}~{t}" for b in EINSTEIN for t in ("exp", "quad")]


def weyl(n, seed, mode="exact"):
    return I.random_weyl(I.WeylSampleConfig(n, seed=seed, mode=mode))


@pytest.fixture
def verdict(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def zero(x):
    return x == 0


def test_criterion_1_identity_suite_exact(verdict):
    bad = []
    worst_ch6 = 0.0
    for s in SEEDS:
        w4, w5, w6, w7 = weyl(4, s), weyl(5, s), weyl(6, s), weyl(7, s)
        oracle = s in ORACLE_SEEDS
        for p in range(2, 7):
            if not zero(I.four_d_trace_residual(w4, p).residual):
                bad.append(("trace4", p, s))
        for lbl, r in (("cubic5", I.five_d_cubic_report(w5, oracle=oracle)),
                       ("quartic5", I.five_d_quartic_report(w5, oracle=oracle)),
                       ("cubic6", I.six_d_cubic_report(w6, oracle=False)),
                       ("lovelock6", I.lovelock_report(w6, oracle=oracle, oracle_seed=s)),
                       ("lovelock5", I.lovelock_report(w5, oracle=False))):
            if not (zero(r.residual) and r.oracle_passed is not False):
                bad.append((lbl, s, r.parts))
        d = I.lovelock_build(w6)
        if not zero(d.trace_residual):
            bad.append(("trace-free H", s))
        for w in (w4, w5, w6, w7):
            if not zero(I.bianchi_square_residual(w).residual):
                bad.append(("bianchi", w.n, s))
        for w in (w4, w5):
            if not zero(cayley_hamilton_residual(w)):
                bad.append(("cayley", w.n, s))
        r = I.cayley_hamilton_report(weyl(6, s, "float"))
        worst_ch6 = max(worst_ch6, float(r.residual))
        if not r.residual < 1e-9:
            bad.append(("cayley6 float", s, r.residual))
    # oracles where the parent identities are non-vacuous
    for s in ORACLE_SEEDS:
        for r in (I.five_d_cubic_report(weyl(6, s), allow_other_dimension=True),
                  I.five_d_quartic_report(weyl(6, s), allow_other_dimension=True),
                  I.six_d_cubic_report(weyl(7, s), allow_other_dimension=True)):
            if r.oracle_passed is not True:
                bad.append(("oracle", r.label, r.dimension, s))
    assert verdict(1, not bad, f"exact residuals 0 over {len(SEEDS)} seeds; cayley n=6 float worst "
                               f"{worst_ch6:.1e}; failures {bad[:3]}")


def test_criterion_2_negative_controls(verdict):
    checks = {
        "trace4 n=5": lambda s: I.four_d_trace_residual(weyl(5, s), 2),
        "antisym k=1 n=5": lambda s: I.antisymmetrization_residual(weyl(5, s), 1),
        "cubic6 n=7": lambda s: I.six_d_cubic_report(weyl(7, s), allow_other_dimension=True, oracle=False),
        "lovelock n=7": lambda s: I.lovelock_report(weyl(7, s), oracle=False),
    }
    counts = {k: sum(not f(s).passed for s in SEEDS) for k, f in checks.items()}
    ok = all(c >= 99 for c in counts.values())
    assert verdict(2, ok, f"failures per 100 seeds {counts}")


def test_criterion_3_coefficients(verdict):
    bad = [(n, s) for n in (4, 5, 6) for s in SEEDS if not zero(I.coefficient_report(weyl(n, s)).residual)]
    assert verdict(3, not bad, f"recursion vs closed forms, n=4,5,6 x 100 seeds; mismatches {bad[:3]}")


def test_criterion_4_lemma_round_trip(verdict):
    bad, degenerate = [], 0
    for n in (4, 5):
        for s in SEEDS:
            w = weyl(n, s)
            if not nondegeneracy(w)[0]:
                degenerate += 1
                continue
            r = I.lemma_report(w, s)
            if not zero(r.residual):
                bad.append((n, s))
    ok = not bad and degenerate == 0
    assert verdict(4, ok, f"exact round trips n=4,5 x 100; failures {bad[:3]}, degenerate samples {degenerate}")


def test_criterion_5_classifier_soundness(verdict):
    bad, worst = [], {"e2": 0.0, "curl": 0.0, "K": 0.0}
    for name in EINSTEIN + RESCALED:
        v = C.classify(catalog.get(name).metric)
        pts = v.points
        if v.outcome != C.CE or len(pts) != 3 or any(p.status != "healthy" for p in pts):
            bad.append((name, v.outcome))
            continue
        for p in pts:
            worst["e2"] = max(worst["e2"], p.einstein.relative)
            worst["curl"] = max(worst["curl"], p.curl.relative)
            if p.einstein.relative >= 1e-7 or p.curl.relative >= 1e-8:
                bad.append((name, p.label, p.einstein.relative, p.curl.relative))
            if "~" not in name:
                k = max(abs(x) for x in p.k_vector)
                worst["K"] = max(worst["K"], k)
                if k >= 1e-9:
                    bad.append((name, p.label, "K", k))
    detail = ", ".join(f"max {k} {v:.1e}" for k, v in worst.items())
    assert verdict(5, not bad, f"{len(EINSTEIN + RESCALED)} metrics x 3 points; {detail}; failures {bad[:3]}")


def test_criterion_6_method_agreement(verdict):
    worst, bad, compared = 0.0, [], 0
    for name in EINSTEIN + RESCALED:
        m = catalog.get(name).metric
        methods = [x for x in C.applicable_methods(m.n) if x not in ("dim4:5", "dim4:6")]
        for _, pt in m.points:
            for meth, d in C.method_agreement(m, pt, methods).items():
                if d is None:
                    bad.append((name, meth, "unhealthy"))
                    continue
                compared += 1
                worst = max(worst, d)
                if d >= 1e-6:
                    bad.append((name, meth, d))
    assert verdict(6, not bad, f"{compared} comparisons, worst relative {worst:.1e}; failures {bad[:3]}")


def test_criterion_7_degeneracy(verdict):
    names = [f"flat({n})" for n in (4, 5, 6)] + [f"flat({n})~{t}" for n in (4, 5, 6) for t in ("exp", "quad")]
    outcomes = {nm: C.classify(catalog.get(nm).metric).outcome for nm in names}
    w = I.null_weyl(0)
    ok_null, c6 = nondegeneracy(w)
    ok = all(o == C.DEGENERATE for o in outcomes.values()) and c6 == 0 and not ok_null
    assert verdict(7, ok, f"flat and conformally flat -> {set(outcomes.values())}; null 4d Weyl c_6 = {c6}")


def test_criterion_8_nonvanishing_scalars(verdict):
    s23 = sum(I.five_d_quartic_report(weyl(5, s), oracle=False).side_values["scalar"] != 0 for s in SEEDS)
    s31 = sum(I.lovelock_report(weyl(6, s), oracle=False).side_values["scalar"] != 0 for s in SEEDS)
    ok = s23 >= 95 and s31 >= 95
    assert verdict(8, ok, f"nonzero quartic scalar {s23}/100 at n=5, double three-form scalar {s31}/100 at n=6")


def test_criterion_9_control_metric(verdict):
    v = C.classify(catalog.get("product2sphere(4)").metric, tol=1e-7)
    populated = all(p.status == "healthy" and None not in (p.einstein, p.einstein_literal, p.cspace, p.curl,
                                                           p.k_vector) for p in v.points)
    populated = populated and all(v.summary[k] is not None for k in v.summary)
    ok = v.outcome in (C.NOT_CE, C.INCONCLUSIVE) and populated
    assert verdict(9, ok, f"product2sphere(4) -> {v.outcome}, max Eq (2) relative "
                          f"{v.summary['max_einstein_relative']:.2f}, diagnostics populated {populated}")
