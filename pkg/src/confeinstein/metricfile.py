"""Line-oriented metric definition files.

    [metric]      dimension = <int> ; coordinates = name(, name)*
    [components]  g <i> <j> = <expression>   (0-based, i <= j, omitted entries zero)
    [params]      name = rational
    [points]      label = v0, v1, ..., v_{n-1}
    [conformal]   omega = <expression>        (optional)

``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import symexpr as sx
from .curvature import CurvatureError, MetricSpec, conformal_rescale

SECTIONS = ("metric", "components", "params", "points", "conformal")
_SECTION_RE = re.compile(r"^\[([A-Za-z_]+)\]$")
_COMPONENT_RE = re.compile(r"^g\s+(\d+)\s+(\d+)\s*=\s*(.+)$")
_ASSIGN_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_LABEL_RE = re.compile(r"^([A-Za-z0-9_.\-]+)\s*=\s*(.*)$")


class MetricFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<metric>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class MetricFile:
    dimension: int
    coordinates: tuple
    components: dict                        # {(i, j): Expr} with i <= j, nonzero only
    params: dict = field(default_factory=dict)
    points: tuple = ()                      # ((label, (Fraction, ...)), ...)
    omega: sx.Expr | None = None
    label: str = ""

    def base_metric(self) -> MetricSpec:
        return MetricSpec.from_strings(self.coordinates, self.components, self.params, self.label, self.points)

    def to_metric(self) -> MetricSpec:
        m = self.base_metric()
        if self.omega is not None:
            m = conformal_rescale(m, self.omega, self.label)
        return m

    def model(self):
        """Comparable content (used for round-trip checks)."""
        comps = tuple(sorted((k, sx.to_string(v)) for k, v in self.components.items()))
        om = sx.to_string(self.omega) if self.omega is not None else None
        return (self.dimension, tuple(self.coordinates), comps,
                tuple(sorted(self.params.items())), tuple(self.points), om)


def _number(text: str, line: int, source: str) -> Fraction:
    t = text.strip()
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise MetricFileError(f"expected a rational or decimal number, got {t!r}", line, source) from None


def _expr(text: str, line: int, source: str) -> sx.Expr:
    try:
        return sx.parse_expression(text.strip())
    except sx.ExprSyntaxError as err:
        raise MetricFileError(f"bad expression: {err}", line, source) from None


def parse_metric_file(text: str, source: str = "<metric>", label: str | None = None) -> MetricFile:
    section = None
    dim = None
    coords = None
    comps: dict = {}
    params: dict = {}
    points: list = []
    omega = None
    seen_labels = set()
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                raise MetricFileError(f"unknown section [{section}]", no, source)
            continue
        if section is None:
            raise MetricFileError("content before the first section header", no, source)
        if section == "metric":
            m = _ASSIGN_RE.match(line)
            if not m:
                raise MetricFileError("expected 'key = value'", no, source)
            key, val = m.group(1), m.group(2).strip()
            if key == "dimension":
                try:
                    dim = int(val)
                except ValueError:
                    raise MetricFileError(f"dimension must be an integer, got {val!r}", no, source) from None
                if dim < 2:
                    raise MetricFileError("dimension must be >= 2", no, source)
            elif key == "coordinates":
                names = [c.strip() for c in val.split(",")]
                if not names or any(not sx.IDENT_RE.match(c) for c in names):
                    raise MetricFileError(f"bad coordinate list {val!r}", no, source)
                if len(set(names)) != len(names):
                    raise MetricFileError("duplicate coordinate names", no, source)
                coords = tuple(names)
            else:
                raise MetricFileError(f"unknown [metric] key {key!r}", no, source)
        elif section == "components":
            m = _COMPONENT_RE.match(line)
            if not m:
                raise MetricFileError("expected 'g <i> <j> = <expression>'", no, source)
            i, j = int(m.group(1)), int(m.group(2))
            if i > j:
                raise MetricFileError(f"component g {i} {j} must have i <= j", no, source)
            if dim is not None and j >= dim:
                raise MetricFileError(f"component index {j} out of range for dimension {dim}", no, source)
            if (i, j) in comps:
                raise MetricFileError(f"component g {i} {j} given twice", no, source)
            comps[(i, j)] = _expr(m.group(3), no, source)
        elif section == "params":
            m = _ASSIGN_RE.match(line)
            if not m:
                raise MetricFileError("expected 'name = rational'", no, source)
            if m.group(1) in params:
                raise MetricFileError(f"parameter {m.group(1)!r} given twice", no, source)
            params[m.group(1)] = _number(m.group(2), no, source)
        elif section == "points":
            m = _LABEL_RE.match(line)
            if not m:
                raise MetricFileError("expected 'label = v0, v1, ...'", no, source)
            lab = m.group(1)
            if lab in seen_labels:
                raise MetricFileError(f"point {lab!r} given twice", no, source)
            seen_labels.add(lab)
            vals = tuple(_number(v, no, source) for v in m.group(2).split(","))
            if dim is not None and len(vals) != dim:
                raise MetricFileError(f"point {lab!r} has {len(vals)} values, expected {dim}", no, source)
            points.append((lab, vals))
        elif section == "conformal":
            m = _ASSIGN_RE.match(line)
            if not m or m.group(1) != "omega":
                raise MetricFileError("expected 'omega = <expression>'", no, source)
            omega = _expr(m.group(2), no, source)
    if dim is None:
        raise MetricFileError("missing 'dimension' in [metric]", None, source)
    if coords is None:
        raise MetricFileError("missing 'coordinates' in [metric]", None, source)
    if len(coords) != dim:
        raise MetricFileError(f"{len(coords)} coordinates for dimension {dim}", None, source)
    for (i, j) in comps:
        if j >= dim:
            raise MetricFileError(f"component g {i} {j} out of range", None, source)
    for lab, vals in points:
        if len(vals) != dim:
            raise MetricFileError(f"point {lab!r} does not bind every coordinate", None, source)
    comps = {k: v for k, v in comps.items() if not sx.is_const(v, 0)}
    mf = MetricFile(dim, coords, comps, params, tuple(points), omega, label if label is not None else source)
    try:
        mf.to_metric()
    except CurvatureError as err:
        raise MetricFileError(str(err), None, source) from None
    return mf


def read_metric_file(path: str) -> MetricFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise MetricFileError(f"cannot read file: {err.strerror}", None, path) from None
    return parse_metric_file(text, path)


def _fmt_number(v) -> str:
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def serialize_metric_file(mf: MetricFile) -> str:
    out = ["[metric]", f"dimension = {mf.dimension}", "coordinates = " + ", ".join(mf.coordinates), "",
           "[components]"]
    for (i, j) in sorted(mf.components):
        out.append(f"g {i} {j} = {sx.to_string(mf.components[(i, j)])}")
    if mf.params:
        out += ["", "[params]"]
        out += [f"{k} = {_fmt_number(v)}" for k, v in sorted(mf.params.items())]
    if mf.points:
        out += ["", "[points]"]
        out += [f"{lab} = " + ", ".join(_fmt_number(v) for v in vals) for lab, vals in mf.points]
    if mf.omega is not None:
        out += ["", "[conformal]", f"omega = {sx.to_string(mf.omega)}"]
    return "\n".join(out) + "\n"


def from_metric(m: MetricSpec, omega: sx.Expr | str | None = None) -> MetricFile:
    comps = {(i, j): m.components[i][j] for i in range(m.n) for j in range(i, m.n)
             if not sx.is_const(m.components[i][j], 0)}
    om = sx.parse_expression(omega) if isinstance(omega, str) else omega
    pts = tuple((lab, tuple(Fraction(v) for v in vals)) for lab, vals in m.points)
    return MetricFile(m.n, tuple(m.coords), comps, dict(m.params), pts, om, m.label)
