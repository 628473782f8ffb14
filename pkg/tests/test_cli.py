import json

import pytest

from confeinstein import catalog
from confeinstein import conformal as C
from confeinstein.cli import EXIT_CODES, REPORT_KEYS, main

# Schwarzschild with u = cos(theta): every component is rational
RATIONAL_SCHWARZSCHILD = """
[metric]
dimension = 4
coordinates = t, r, u, phi
[components]
g 0 0 = -(1 - 2*M/r)
g 1 1 = 1/(1 - 2*M/r)
g 2 2 = r^2/(1 - u^2)
g 3 3 = r^2*(1 - u^2)
[params]
M = 1
[points]
a = 0, 4, 1/3, 0
b = 1, 5, -1/2, 1
"""


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:        # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def test_verify_dim4_exact(capsys):
    code, rep, err = report(capsys, "verify", "--dim", "4", "--trials", "5", "--seed", "7", "--mode", "exact")
    assert code == 0
    assert list(rep) == list(REPORT_KEYS)
    assert rep["seconds"] is None and rep["mode"] == "exact"
    for p in range(2, 7):
        assert rep["residuals"][f"trace4_p{p}"]["residuals"] == ["0"] * 5
        assert rep["residuals"][f"trace4_p{p}"]["seeds"] == [7, 8, 9, 10, 11]
    assert "trace4_p2" in err


def test_verify_lovelock_dim6(capsys):
    code, rep, _ = report(capsys, "verify", "--dim", "6", "--trials", "20", "--identity", "lovelock")
    assert code == 0
    assert rep["residuals"]["lovelock"]["passed"] == 20


def test_verify_negative_controls_count_as_behaved(capsys):
    code, rep, _ = report(capsys, "verify", "--dim", "5", "--trials", "3", "--identity", "trace4,cubic5")
    assert code == 0
    assert rep["residuals"]["trace4_p2"]["passed"] == 0
    assert rep["residuals"]["cubic5"]["passed"] == 3


@pytest.mark.parametrize("argv", [
    ["verify", "--dim", "9"], ["verify", "--dim", "3"], ["verify", "--dim", "4", "--trials", "0"],
    ["verify", "--dim", "4", "--identity", "nonsense"], ["verify", "--dim", "4", "--signature=-++"], ["verify", "--trials", "2"],
    ["classify", "definitely_missing.metric"], ["classify", "not-a-catalog-name"],
    ["classify", "schwarzschild4", "--points", "zz"], ["classify", "schwarzschild4", "--method", "dim5"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and "error" in err.lower()


def test_parse_error_reports_location(capsys, tmp_path):
    p = tmp_path / "broken.metric"
    p.write_text("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 0 0 = 1 +* 2\n")
    code, _, err = run(capsys, "classify", str(p))
    assert code == 2
    assert f"{p}:5:" in err


@pytest.mark.parametrize("name,code", [("schwarzschild4", 0), ("flat(4)", 3), ("product2sphere(4)", 1)])
def test_classify_catalog(capsys, name, code):
    got, rep, err = report(capsys, "classify", name)
    assert got == code
    assert rep["verdict"] == {0: C.CE, 1: C.NOT_CE, 3: C.DEGENERATE}[code]
    assert len(rep["points"]) == 3
    assert rep["verdict"] in err


def test_classify_metric_file_and_point_selection(capsys, tmp_path):
    p = tmp_path / "s.metric"
    p.write_text(RATIONAL_SCHWARZSCHILD + "[conformal]\nomega = 1 + r^2/10\n")
    code, rep, _ = report(capsys, "classify", str(p), "--points", "b", "--mode", "exact")
    assert code == 0
    assert [q["label"] for q in rep["points"]] == ["b"]
    assert rep["seconds"] is None
    k = rep["k_vector"]["b"]
    assert all(isinstance(x, str) for x in k)


def test_exit_codes_total_over_verdicts():
    assert set(EXIT_CODES) == {C.CE, C.NOT_CE, C.DEGENERATE, C.INCONCLUSIVE}
    assert sorted(EXIT_CODES.values()) == [0, 1, 3, 4]


def test_invariants_schwarzschild(capsys, tmp_path):
    code, rep, _ = report(capsys, "invariants", "schwarzschild4")
    assert code == 0
    assert rep["invariants"]["C2"] == pytest.approx(3 / 256, rel=1e-12)
    assert rep["diagnostics"]["nondegenerate"] is True
    p = tmp_path / "s.metric"
    p.write_text(RATIONAL_SCHWARZSCHILD)
    code, rep, _ = report(capsys, "invariants", str(p), "--mode", "exact", "--point", "a")
    assert rep["invariants"]["C2"] == "3/256"
    assert rep["coefficients"]["c2"] == "-3/512"


def test_invariants_flat(capsys):
    code, rep, _ = report(capsys, "invariants", "flat(5)", "--mode", "exact")
    assert code == 0
    assert set(rep["invariants"].values()) == {"0"}
    assert len(rep["invariants"]) == 9
    assert rep["diagnostics"]["nondegenerate"] is False


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    assert "schwarzschild4" in out
    for line in out.splitlines():
        if "~" in line.split()[0]:
            assert "omega = " in line
    assert len(out.splitlines()) == len(catalog.entries())


def test_catalog_show_is_a_metric_file(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog", "--show", "desitter(4)~quad")
    assert code == 0 and "[conformal]" in out
    p = tmp_path / "d.metric"
    p.write_text(out)
    code, rep, _ = report(capsys, "classify", str(p))
    assert code == 0


def test_global_flags_either_side(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["--seed", "3", "--json", str(a), "verify", "--dim", "4", "--trials", "2"])
    main(["verify", "--dim", "4", "--trials", "2", "--seed", "3", "--json", str(b)])
    capsys.readouterr()
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra.pop("command"), rb.pop("command")
    assert ra == rb


def test_exact_reports_byte_identical(capsys, tmp_path):
    out = tmp_path / "r.json"
    argv = ["verify", "--dim", "5", "--trials", "2", "--seed", "11", "--json", str(out)]
    main(argv)
    first = out.read_bytes()
    main(argv)
    assert out.read_bytes() == first
    capsys.readouterr()


def test_signature_flag(capsys):
    code, rep, _ = report(capsys, "verify", "--dim", "4", "--trials", "2", "--signature=++++", "--identity", "bianchi")
    assert code == 0 and rep["diagnostics"]["signature"] == [1, 1, 1, 1]
    code, rep, _ = report(capsys, "verify", "--dim", "4", "--trials", "2", "--signature=-1,-1,1,1")
    assert code == 0 and rep["diagnostics"]["signature"] == [-1, -1, 1, 1]
