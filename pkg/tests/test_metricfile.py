from fractions import Fraction

import pytest

from confeinstein import catalog
from confeinstein.metricfile import MetricFileError, parse_metric_file, read_metric_file, serialize_metric_file

GOOD = """
# Schwarzschild in Schwarzschild coordinates
[metric]
dimension = 4
coordinates = t, r, theta, phi

[components]
g 0 0 = -(1 - 2*M/r)
g 1 1 = 1/(1 - 2*M/r)
g 2 2 = r^2
g 3 3 = r^2*sin(theta)^2   # trailing comment

[params]
M = 1

[points]
p0 = 0, 4, 1.0, 0
p1 = 1/2, 5, 0.5, 1
"""


def test_parse_good_file():
    mf = parse_metric_file(GOOD, "s.metric")
    assert mf.dimension == 4 and mf.coordinates == ("t", "r", "theta", "phi")
    assert mf.params == {"M": Fraction(1)}
    assert mf.points[1] == ("p1", (Fraction(1, 2), Fraction(5), Fraction(1, 2), Fraction(1)))
    m = mf.to_metric()
    assert m.components[1][1] == mf.components[(1, 1)]
    assert m.components[0][1] == m.components[1][0]


def test_conformal_section_applies_rescale():
    mf = parse_metric_file(GOOD + "\n[conformal]\nomega = exp(r)\n")
    assert mf.omega is not None
    m = mf.to_metric()
    assert m.components != mf.base_metric().components


@pytest.mark.parametrize("text,line,fragment", [
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 1 0 = 1\n", 5, "i <= j"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 0 0 = 1 +\n", 5, "bad expression"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 0 3 = 1\n", 5, "out of range"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[coords]\n", 4, "unknown section"),
    ("dimension = 2\n", 1, "before the first section"),
    ("[metric]\ndimension = two\n", 2, "integer"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[points]\np = 1\n", 5, "expected 2"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[params]\na = pi\n", 5, "rational"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 0 0 = 1\ng 0 0 = 2\n", 6, "twice"),
])
def test_parse_errors_have_locations(text, line, fragment):
    with pytest.raises(MetricFileError) as ei:
        parse_metric_file(text, "bad.metric")
    assert ei.value.line == line
    assert fragment in str(ei.value)
    assert str(ei.value).startswith(f"bad.metric:{line}:")


@pytest.mark.parametrize("text,fragment", [
    ("[metric]\ndimension = 3\ncoordinates = x, y\n", "coordinates for dimension"),
    ("[metric]\ncoordinates = x, y\n", "missing 'dimension'"),
    ("[metric]\ndimension = 2\ncoordinates = x, y\n[components]\ng 0 0 = q\n", "unknown names"),
])
def test_semantic_errors(text, fragment):
    with pytest.raises(MetricFileError, match=fragment):
        parse_metric_file(text)


def test_missing_file(tmp_path):
    with pytest.raises(MetricFileError, match="cannot read"):
        read_metric_file(str(tmp_path / "nope.metric"))


def test_every_catalog_entry_round_trips():
    for e in catalog.entries():
        mf = e.metric_file()
        text = serialize_metric_file(mf)
        again = parse_metric_file(text, e.name, label=e.name)
        assert again.model() == mf.model(), e.name
        assert serialize_metric_file(again) == text
        assert again.to_metric().components == e.metric.components, e.name


def test_read_from_disk(tmp_path):
    p = tmp_path / "s.metric"
    p.write_text(GOOD)
    assert read_metric_file(str(p)).dimension == 4
