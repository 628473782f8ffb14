from fractions import Fraction

import numpy as np
import pytest

from confeinstein import catalog
from confeinstein import conformal as C
from confeinstein.curvature import MetricSpec

EINSTEIN = ["schwarzschild4", "tangherlini(5)", "tangherlini(6)", "desitter(4)", "desitter(5)", "desitter(6)"]
RESCALED = [f"{b}~{t}" for b in EINSTEIN for t in ("exp", "quad")]


def euclidean4():
    return MetricSpec.from_strings(["x", "y", "z", "w"], {(i, i): "1" for i in range(4)}, {}, "euclid",
                                   (("p", (1, 2, 3, 4)),))


def k_at(method, name, idx=0):
    m = catalog.get(name).metric
    k = C.candidate(m, method)
    return k.at(k.geometry(m.points[idx][1]))


def test_method_parsing_and_applicability():
    m4 = catalog.schwarzschild4()
    assert C.candidate(m4, "dim4:3").method == "dim4:3"
    assert C.candidate(m4, "dim4").method == "dim4:2"
    for bad in ("dim4:x", "dim4:9", "dim7", "dim5"):
        with pytest.raises(C.ConformalError):
            C.candidate(m4, bad)
    assert C.applicable_methods(6) == ["general", "dim6", "lovelock"]
    assert C.applicable_methods(7) == ["general"]


@pytest.mark.parametrize("name", EINSTEIN)
def test_einstein_metrics_have_vanishing_k(name):
    n = catalog.get(name).metric.n
    for meth in C.applicable_methods(n):
        kp = k_at(meth, name)
        assert kp.healthy
        assert np.max(np.abs(np.asarray(kp.K.value(), dtype=float))) < 1e-9


def test_flat_metric_is_unhealthy():
    kp = k_at("general", "flat(4)")
    assert not kp.healthy


def test_rescaled_schwarzschild_k_nonzero_and_cspace():
    m = catalog.get("schwarzschild4~exp").metric
    k = C.extract_k_general(m)
    for _, pt in m.points:
        geo = k.geometry(pt)
        kp = k.at(geo)
        assert np.max(np.abs(np.asarray(kp.K.value(), dtype=float))) > 0
        assert C.cspace_residual(geo, kp).relative < 1e-8


def test_k_recovers_known_gradient():
    # g = omega^2 g_E with omega = 1 + r^2/10, so K_a = -2 d_a ln omega
    m = catalog.get("schwarzschild4~quad").metric
    k = C.extract_k_general(m)
    for _, pt in m.points:
        geo = k.geometry(pt)
        Ku = np.asarray(k.at(geo).K.value(), dtype=float)
        g = np.asarray(geo.g.value(), dtype=float)
        Kl = g @ Ku
        r = float(pt[1])
        want = np.array([0, -2 * (r / 5) / (1 + r * r / 10), 0, 0])
        assert np.max(np.abs(Kl - want)) < 1e-10


@pytest.mark.parametrize("name", ["schwarzschild4~exp", "schwarzschild4~quad", "desitter(4)~quad"])
@pytest.mark.parametrize("p", [3, 4])
def test_dim4_orders_agree(name, p):
    m = catalog.get(name).metric
    for _, pt in m.points:
        d = C.method_agreement(m, pt, ["dim4:2", f"dim4:{p}"])
        assert d["dim4:2"] < 1e-8 and d[f"dim4:{p}"] < 1e-8


def test_injected_curl_detected():
    E = euclidean4()
    kc = C.KCandidate.from_expressions(E, ["y", "-x", "0", "0"])
    geo = kc.geometry((1, 2, 3, 4))
    r = C.gradient_residual(geo, kc.at(geo))
    assert r.absolute == pytest.approx(2.0, abs=1e-14)
    kc = C.KCandidate.from_expressions(E, ["2*x", "2*y", "0", "0"])
    geo = kc.geometry((1, 2, 3, 4))
    assert C.gradient_residual(geo, kc.at(geo)).absolute == 0


def test_literal_and_corrected_einstein_forms_printed():
    m = catalog.get("schwarzschild4~quad").metric
    v = C.classify(m)
    for r in v.points:
        assert r.einstein_literal is not None and r.einstein is not None


def test_classify_requires_points_and_rational_exact():
    m = catalog.schwarzschild4()
    with pytest.raises(C.ConformalError):
        C.classify(m, points=[])
    with pytest.raises(C.ConformalError):
        C.classify(m, exact=True)


def test_exact_classification_of_rational_metrics():
    for name in ("perturbed4", "flat(4)~quad"):
        e = catalog.get(name)
        assert C.classify(e.metric, exact=True).outcome == e.expected


def test_singular_point_marked():
    m = catalog.schwarzschild4()
    v = C.classify(m, points=[("horizon", (0, 2, 1, 1)), ("axis", (0, 4, 0, 1))])
    assert [r.status for r in v.points] == ["singular", "singular"]
    assert v.outcome == C.INCONCLUSIVE


def test_verdict_rules():
    base = catalog.schwarzschild4()
    assert C.classify(base).outcome == C.CE
    # a tolerance so tight that roundoff fails it but not by 10x everywhere
    v = C.classify(catalog.get("tangherlini(6)~exp").metric, tol=1e-30)
    assert v.outcome in (C.NOT_CE, C.INCONCLUSIVE)
    v = C.classify(catalog.get("product2sphere(4)").metric)
    assert v.outcome == C.NOT_CE
    assert all(r.status == "healthy" for r in v.points)


def test_eq3_implied_by_eq2():
    for name in RESCALED + EINSTEIN:
        v = C.classify(catalog.get(name).metric)
        for r in v.points:
            if r.status == "healthy" and r.einstein.relative < C.DEFAULT_TOL:
                assert r.cspace.relative < C.DEFAULT_TOL, name


def test_verdict_conformally_invariant():
    for e in catalog.entries():
        if e.base is None:
            continue
        base = catalog.get(e.name.split("~")[0])
        assert C.classify(e.metric).outcome == C.classify(base.metric).outcome, e.name
