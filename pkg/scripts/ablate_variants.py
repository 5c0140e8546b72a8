"""Compare the four expansion policies on a synthetic corpus with the mock evaluator.

    python3 scripts/ablate_variants.py --count 200 --seed 0 --out runs/ablation.json
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List

from akeys import CostVariant, MockEvaluator, SearchConfig, run_search
from akeys.captions import CaptionStore, parse_caption_line
from akeys.synthetic import SyntheticParams, generate_synthetic


@dataclass
class AblationConfig:
    count: int = 200
    seed: int = 0
    frames: int = 180
    scenes: int = 6
    key_len: int = 5
    M: int = 4
    B: int = 2
    C: int = 8
    T: int = 10
    variants: List[str] = field(default_factory=lambda: ["bfs", "gbfs", "dijkstra", "astar"])


def corpus(cfg: AblationConfig):
    rng = random.Random(cfg.seed)
    params = SyntheticParams(n_frames=cfg.frames, n_scenes=cfg.scenes, key_len=cfg.key_len)
    for _ in range(cfg.count):
        text, task, world = generate_synthetic(params, rng.randrange(2**31))
        store = CaptionStore(parse_caption_line(l, i) for i, l in enumerate(text.splitlines(), 1))
        yield task, store, world


def run(cfg: AblationConfig) -> dict:
    tasks = list(corpus(cfg))
    rows = {}
    for name in cfg.variants:
        search = SearchConfig(M=cfg.M, B=cfg.B, C=cfg.C, T=cfg.T, variant=CostVariant.parse(name))
        start = time.perf_counter()
        results = [(w, run_search(t, s, search, MockEvaluator(w))) for t, s, w in tasks]
        visible = [r.visible_count for _, r in results]
        rows[name] = {
            "accuracy": sum(r.answer == w.gold_answer for w, r in results) / len(results),
            "mean_visible": statistics.fmean(visible),
            "min_visible": min(visible),
            "max_visible": max(visible),
            "mean_iterations": statistics.fmean(r.iterations for _, r in results),
            "mean_agent_queries": statistics.fmean(r.agent_queries for _, r in results),
            "iteration_cap": sum(r.terminated_by == "iteration_cap" for _, r in results),
            "seconds": round(time.perf_counter() - start, 3),
        }
    return {"config": asdict(cfg), "results": rows}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = AblationConfig()
    for key in ("count", "seed", "frames", "scenes", "key_len", "M", "B", "C", "T"):
        ap.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int, default=getattr(defaults, key))
    ap.add_argument("--variants", nargs="+", default=defaults.variants)
    ap.add_argument("--out", type=Path)
    args = vars(ap.parse_args(argv))
    out = args.pop("out")
    report = run(AblationConfig(**args))

    header = f"{'variant':<10}{'acc':>7}{'visible':>9}{'min':>5}{'max':>5}{'iters':>7}{'queries':>9}{'capped':>8}"
    print(header)
    for name, r in report["results"].items():
        print(f"{name:<10}{r['accuracy']:>7.3f}{r['mean_visible']:>9.2f}{r['min_visible']:>5}"
              f"{r['max_visible']:>5}{r['mean_iterations']:>7.2f}{r['mean_agent_queries']:>9.1f}"
              f"{r['iteration_cap']:>8}")
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
