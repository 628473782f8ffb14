"""Built-in metrics: Einstein examples, their conformal rescales, and controls."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .curvature import MetricSpec, conformal_rescale

FLAT_NAMES = ("t", "x", "y", "z", "u", "v", "w", "s")
OMEGAS = {"exp": "exp({x})", "quad": "1 + {x}^2/10"}

_RADII = (Fraction(4), Fraction(5), Fraction(6))
_ANGLES = ((Fraction(1), Fraction(1, 2), Fraction(3, 5), Fraction(7, 10)),
           (Fraction(11, 10), Fraction(7, 10), Fraction(4, 5), Fraction(9, 10)),
           (Fraction(6, 5), Fraction(9, 10), Fraction(1), Fraction(11, 10)))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    metric: MetricSpec
    expected: str
    omega: str | None = None
    radial: str = "x"           # coordinate the conformal factor depends on
    description: str = ""
    base: MetricSpec | None = None

    def metric_file(self):
        from .metricfile import from_metric
        if self.base is None:
            return from_metric(self.metric)
        mf = from_metric(self.base, self.omega)
        return type(mf)(mf.dimension, mf.coordinates, mf.components, mf.params, mf.points, mf.omega, self.name)


def _sphere(n_angles: int, prefix: str = "r^2", names=None):
    """Diagonal entries of prefix * dOmega^2 on S^(n_angles) with nested angles."""
    names = list(names or [f"th{i + 1}" for i in range(n_angles - 1)] + ["phi"])
    out = []
    for k in range(n_angles):
        factors = [prefix] + [f"sin({names[j]})^2" for j in range(k)]
        out.append("*".join(factors))
    return names, out


def _static(n: int, f: str, params: dict, label: str, angle_names=None) -> MetricSpec:
    angles, entries = _sphere(n - 2, names=angle_names)
    coords = ["t", "r"] + angles
    comps = {(0, 0): f"-({f})", (1, 1): f"1/({f})"}
    for k, e in enumerate(entries):
        comps[(k + 2, k + 2)] = e
    pts = tuple((f"p{i}", (Fraction(i), r) + _ANGLES[i][: n - 2]) for i, r in enumerate(_RADII))
    return MetricSpec.from_strings(coords, comps, params, label, pts)


def flat(n: int) -> MetricSpec:
    coords = list(FLAT_NAMES[:n])
    comps = {(i, i): ("-1" if i == 0 else "1") for i in range(n)}
    pts = tuple((f"p{i}", tuple(Fraction(i + k + 1, 2) for k in range(n))) for i in range(3))
    return MetricSpec.from_strings(coords, comps, {}, f"flat({n})", pts)


def schwarzschild4() -> MetricSpec:
    return _static(4, "1 - 2*M/r", {"M": 1}, "schwarzschild4", ("theta", "phi"))


def tangherlini(n: int) -> MetricSpec:
    if n < 4:
        raise ValueError("tangherlini needs n >= 4")
    return _static(n, f"1 - 2*M/r^{n - 3}", {"M": 1}, f"tangherlini({n})")


def desitter(n: int) -> MetricSpec:
    """Schwarzschild-de Sitter (Kottler) metric; pure de Sitter is conformally flat."""
    if n < 4:
        raise ValueError("desitter needs n >= 4")
    return _static(n, f"1 - 2*M/r^{n - 3} - r^2/L^2", {"M": 1, "L": 10}, f"desitter({n})")


def product2sphere(n: int) -> MetricSpec:
    """-dt^2 + dz1^2 + ... + a^2 (dtheta^2 + sin(theta)^2 dphi^2), not Einstein."""
    if n < 4:
        raise ValueError("product2sphere needs n >= 4")
    flatc = ["t", "x"] + [f"z{i}" for i in range(1, n - 3)]
    coords = flatc + ["theta", "phi"]
    comps = {(0, 0): "-1"}
    for i in range(1, n - 2):
        comps[(i, i)] = "1"
    comps[(n - 2, n - 2)] = "a^2"
    comps[(n - 1, n - 1)] = "a^2*sin(theta)^2"
    pts = []
    for i in range(3):
        flat_vals = tuple(Fraction(i + k + 1, 3) for k in range(n - 2))
        pts.append((f"p{i}", flat_vals + (_ANGLES[i][0], _ANGLES[i][1])))
    return MetricSpec.from_strings(coords, comps, {"a": 1}, f"product2sphere({n})", tuple(pts))


def perturbed4() -> MetricSpec:
    """Generic polynomial metric near Minkowski; a NotConformallyEinstein control."""
    comps = {(0, 0): "-(1 + x^2/10)", (1, 1): "1 + y^2/10", (2, 2): "1 + z^2/10",
             (3, 3): "1 + x*y/10", (0, 1): "x*z/20"}
    pts = (("p0", (Fraction(0), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))),
           ("p1", (Fraction(1, 5), Fraction(1), Fraction(-1, 2), Fraction(2, 3))),
           ("p2", (Fraction(1, 3), Fraction(-1, 4), Fraction(3, 4), Fraction(1, 2))))
    return MetricSpec.from_strings(["t", "x", "y", "z"], comps, {}, "perturbed4", pts)


def _base_entries():
    out = []
    for n in (4, 5, 6):
        out.append(CatalogEntry(f"flat({n})", flat(n), "DegenerateWeyl", radial="x",
                                description="Minkowski space"))
    out.append(CatalogEntry("schwarzschild4", schwarzschild4(), "ConformallyEinstein", radial="r",
                            description="Schwarzschild, M = 1"))
    for n in (5, 6):
        out.append(CatalogEntry(f"tangherlini({n})", tangherlini(n), "ConformallyEinstein", radial="r",
                                description="Schwarzschild-Tangherlini, M = 1"))
    for n in (4, 5, 6):
        out.append(CatalogEntry(f"desitter({n})", desitter(n), "ConformallyEinstein", radial="r",
                                description="Schwarzschild-de Sitter, M = 1, L = 10"))
    for n in (4, 5, 6):
        out.append(CatalogEntry(f"product2sphere({n})", product2sphere(n), "NotConformallyEinstein", radial="x",
                                description="flat Lorentzian factor times a round 2-sphere (non-Einstein control)"))
    out.append(CatalogEntry("perturbed4", perturbed4(), "NotConformallyEinstein", radial="x",
                            description="polynomial perturbation of Minkowski (control)"))
    return out


def _conformal(e: CatalogEntry, tag: str) -> CatalogEntry:
    om = OMEGAS[tag].format(x=e.radial)
    name = f"{e.name}~{tag}"
    m = conformal_rescale(e.metric, om, label=name)
    return CatalogEntry(name, m, e.expected, om, e.radial, f"{e.description}, times omega^2 with omega = {om}",
                        e.metric)


def entries() -> list:
    base = _base_entries()
    out = list(base)
    for e in base:
        for tag in OMEGAS:
            out.append(_conformal(e, tag))
    return out


_CACHE: dict = {}


def names() -> list:
    return [e.name for e in entries()]


def get(name: str) -> CatalogEntry:
    if not _CACHE:
        _CACHE.update({e.name: e for e in entries()})
    try:
        return _CACHE[name]
    except KeyError:
        raise KeyError(f"unknown catalog metric {name!r}") from None
