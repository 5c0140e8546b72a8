"""Accuracy and frame cost of one policy as the iteration budget T grows.

    python3 scripts/budget_sweep.py --variant dijkstra --budgets 6 8 10 12 14 16
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field, replace
from typing import List

from ablate_variants import AblationConfig, run


@dataclass
class SweepConfig:
    variant: str = "dijkstra"
    budgets: List[int] = field(default_factory=lambda: [6, 8, 10, 12, 14, 16])
    base: AblationConfig = field(default_factory=AblationConfig)


def sweep(cfg: SweepConfig):
    for T in cfg.budgets:
        res = run(replace(cfg.base, T=T, variants=[cfg.variant]))["results"][cfg.variant]
        yield T, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", default="dijkstra")
    ap.add_argument("--budgets", type=int, nargs="+", default=SweepConfig().budgets)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cfg = SweepConfig(args.variant, args.budgets, AblationConfig(count=args.count, seed=args.seed))
    print(f"{'T':>3}{'acc':>8}{'visible':>9}{'capped':>8}")
    for T, r in sweep(cfg):
        print(f"{T:>3}{r['accuracy']:>8.3f}{r['mean_visible']:>9.2f}{r['iteration_cap']:>8}")


if __name__ == "__main__":
    main()
