"""
QCStar Consistency Sweep
Runs the face-centred cube consistency batch over several component counts and
both pictures, and writes one CSV row per (n, picture).

Usage:
    python scripts/run_consistency_sweep.py --ns 2 3 4 --trials 20 --out out/cafcc_sweep.csv
"""
import argparse
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent.parent))

import pandas as pd

from config import CafccConfig, SolverConfig, config_hash
from consistency.cafcc import cafcc_batch
from model.multispin import Picture
from reporting import RunMetadata, write_csv


def sweep(ns, pictures, trials: int, seed: int) -> pd.DataFrame:
    """Success rate and residual statistics for every (n, picture)"""
    cfg = CafccConfig(trials=trials)
    rows = []
    for picture in pictures:
        for n in ns:
            print(f"n={n} {picture}: {trials} trials...")
            summary = cafcc_batch(n, trials, seed, cfg, Picture(picture), solver_cfg=SolverConfig(seed=seed))
            stats = summary['statistics']
            rows.append({
                'n': n,
                'picture': picture,
                'completed': summary['completed'],
                'successes': summary['successes'],
                'success_rate': summary['success_rate'],
                'max_check_mean': stats.get('mean'),
                'max_check_max': stats.get('max'),
                'budget_state': summary['budget']['state'],
            })
            print(f"  {summary['successes']}/{summary['completed']} consistent")
    return pd.DataFrame(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="CAFCC success rates over n and picture")
    parser.add_argument("--ns", type=int, nargs="+", default=[2, 3])
    parser.add_argument("--pictures", nargs="+", choices=["hyperbolic", "rational"],
                        default=["hyperbolic", "rational"])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="out/cafcc_sweep.csv")
    args = parser.parse_args(argv)

    frame = sweep(args.ns, args.pictures, args.trials, args.seed)
    metadata = RunMetadata.create("cafcc-sweep", args.seed, config_hash(CafccConfig(trials=args.trials)))
    path = write_csv(frame, metadata, args.out)
    print(f"\n=== Sweep Complete ===\n{frame.to_string(index=False)}\nWrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
