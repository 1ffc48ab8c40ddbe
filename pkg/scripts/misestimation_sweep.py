"""Effect of a mis-estimated error rate on mitigation quality.

The true channel runs at a fixed rate while the mitigator is handed
deliberately wrong rates. Underestimating shrinks the outlier threshold
and starves the redistribution, so the quality curve is asymmetric:
overestimates degrade gently, underestimates sharply.

Usage:
    python scripts/misestimation_sweep.py --out results/misestimation.csv
"""

import argparse

from qemclust import SweepCell, cell_means, sweep
from qemclust.io import write_sweep_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="misestimation_sweep.csv")
    ap.add_argument("--width", type=int, default=14)
    ap.add_argument("--shots", type=int, default=8192)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--true-rate", type=float, default=0.20)
    ap.add_argument("--dominant", type=int, nargs="+", default=[2, 16, 128])
    ap.add_argument(
        "--supplied", type=float, nargs="+",
        default=[0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35],
    )
    args = ap.parse_args()

    cells = [
        SweepCell(
            width=args.width,
            num_dominant=d,
            flip_rate=args.true_rate,
            supplied_rate=pe,
            shots=args.shots,
        )
        for d in args.dominant
        for pe in args.supplied
    ]
    records = sweep(cells, trials=args.trials, base_seed=args.seed, workers=args.workers)
    write_sweep_csv(records, args.out)
    for cell, stats in sorted(cell_means(records).items(), key=lambda kv: (kv[0].num_dominant, kv[0].mitigation_rate)):
        marker = " <= true rate" if cell.mitigation_rate == args.true_rate else ""
        print(
            f"d={cell.num_dominant:4d} supplied={cell.mitigation_rate:.2f}: "
            f"improvement {stats['improvement']:.3f}{marker}"
        )
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
