"""Run every identity check over a range of dimensions and seeds and tabulate pass counts.

    python scripts/identity_sweep.py [--dims 4 5 6 7] [--trials 20] [--mode exact|float]
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from confeinstein.cli import IDENTITIES, cmd_verify


@dataclass
class IdentitySweepConfig:
    dims: list = field(default_factory=lambda: [4, 5, 6, 7])
    trials: int = 20
    seed: int = 0
    mode: str = "exact"
    identity: str = "all"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--dims", nargs="+", type=int, default=[4, 5, 6, 7])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", choices=("exact", "float"), default="exact")
    ap.add_argument("--identity", default="all", help="comma list of " + ", ".join(IDENTITIES) + " or all")
    cfg = IdentitySweepConfig(**vars(ap.parse_args(argv)))
    table, ok = {}, True
    for n in cfg.dims:
        t0 = time.perf_counter()
        code, summary, _ = cmd_verify(n, cfg.trials, cfg.seed, cfg.mode, cfg.identity)
        ok = ok and code == 0
        for label, s in summary.items():
            mark = "" if s["behaved"] else "!"
            table.setdefault(label, {})[n] = f"{s['passed']}/{s['trials']}{mark}"
        print(f"n={n}: {time.perf_counter() - t0:.1f}s")
    cols = cfg.dims
    print(f"{'identity':18s}" + "".join(f"{'n=' + str(n):>10s}" for n in cols))
    for label, row in table.items():
        print(f"{label:18s}" + "".join(f"{row.get(n, '-'):>10s}" for n in cols))
    print("(passes/trials; ! marks an unexpected outcome)")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
