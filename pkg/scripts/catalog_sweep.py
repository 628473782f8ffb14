"""Classify every catalog metric and compare all applicable K extractions.

    python scripts/catalog_sweep.py [--tol 1e-7] [--only NAME ...] [--out sweep.json]
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from confeinstein import catalog
from confeinstein import conformal as C
from confeinstein.cli import jsonable


@dataclass
class SweepConfig:
    tol: float = C.DEFAULT_TOL
    only: list = field(default_factory=list)
    agreement: bool = True
    out: str | None = None


def sweep(cfg: SweepConfig) -> list:
    rows = []
    for e in catalog.entries():
        if cfg.only and e.name not in cfg.only:
            continue
        t0 = time.perf_counter()
        v = C.classify(e.metric, tol=cfg.tol)
        agree = {}
        if cfg.agreement:
            for lab, pt in e.metric.points:
                try:
                    agree[lab] = C.method_agreement(e.metric, pt)
                except Exception as err:      # singular or degenerate points
                    agree[lab] = str(err)
        rows.append({"name": e.name, "expected": e.expected, "outcome": v.outcome,
                     "match": v.outcome == e.expected, "summary": v.summary,
                     "agreement": agree, "seconds": time.perf_counter() - t0})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--tol", type=float, default=C.DEFAULT_TOL)
    ap.add_argument("--only", nargs="*", default=[])
    ap.add_argument("--no-agreement", dest="agreement", action="store_false")
    ap.add_argument("--out", default=None)
    cfg = SweepConfig(**vars(ap.parse_args(argv)))
    rows = sweep(cfg)
    for r in rows:
        s = r["summary"]
        e2 = s["max_einstein_relative"]
        worst = [d for a in r["agreement"].values() if isinstance(a, dict) for d in a.values() if d is not None]
        print(f"{'ok ' if r['match'] else 'BAD'} {r['name']:26s} {r['outcome']:24s} "
              f"eq2 {'-' if e2 is None else f'{e2:.1e}':>8s}  "
              f"agree {max(worst) if worst else float('nan'):.1e}  {r['seconds']:.1f}s")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(jsonable({"config": asdict(cfg), "rows": rows}), fh, indent=2)
    return 0 if all(r["match"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
