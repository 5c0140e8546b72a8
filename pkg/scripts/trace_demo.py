"""Search one synthetic three-minute video and dump the trace and tree.

    python3 scripts/trace_demo.py --out runs/demo
    dot -Tpng runs/demo/tree.dot -o tree.png   # if graphviz is installed
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from akeys import MockEvaluator, SearchConfig, run_search
from akeys.dot import export_dot
from akeys.captions import CaptionStore, parse_caption_line
from akeys.synthetic import SyntheticParams, generate_synthetic


@dataclass
class DemoConfig:
    seed: int = 7
    key_start: int = 126
    key_len: int = 5
    variant: str = "astar"
    out: Path = Path("runs/demo")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = DemoConfig()
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--key-start", type=int, default=d.key_start)
    ap.add_argument("--key-len", type=int, default=d.key_len)
    ap.add_argument("--variant", default=d.variant)
    ap.add_argument("--out", type=Path, default=d.out)
    cfg = DemoConfig(**vars(ap.parse_args(argv)))

    params = SyntheticParams(key_start=cfg.key_start, key_len=cfg.key_len)
    text, task, world = generate_synthetic(params, cfg.seed, video_id="demo")
    store = CaptionStore(parse_caption_line(l, i) for i, l in enumerate(text.splitlines(), 1))
    result = run_search(task, store, SearchConfig(variant=cfg.variant), MockEvaluator(world))

    print("scenes:", ", ".join(f"{lab}[{s},{e}]" for s, e, lab in world.scenes))
    print(f"key interval: {list(world.key_interval)}  gold: {world.gold_answer}")
    for rec in result.trace:
        spans = [str(result.tree.nodes[i]) for i in rec.expanded]
        print(f"t={rec.t:<2} visible={len(rec.visible):<3} c1={rec.c1} c2={rec.c2} "
              f"answer={rec.answer.answer} expanded={' '.join(spans) or '-'}")
    print(f"answer={result.answer} visible={result.visible_count} "
          f"terminated_by={result.terminated_by}")

    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "captions.jsonl").write_text(text)
    (cfg.out / "world.json").write_text(world.dumps())
    (cfg.out / "trace.json").write_text(result.dumps())
    (cfg.out / "tree.dot").write_text(export_dot(result, world.key_interval))
    print(f"wrote {cfg.out}/{{captions.jsonl,world.json,trace.json,tree.dot}}")


if __name__ == "__main__":
    main()
