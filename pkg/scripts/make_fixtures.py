"""Write synthetic OHLCV CSVs usable with `crosscast ingest --in`."""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from crosscast import synthetic
from crosscast.ingest import to_csv

KINDS = {
    "sine": lambda n, seed: synthetic.sine_closes(n),
    "regime": lambda n, seed: synthetic.regime_closes(n, seed=seed),
    "walk": lambda n, seed: synthetic.random_walk_closes(n, seed=seed),
    "flat": lambda n, seed: np.full(n, 100.0),
}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("kind", choices=sorted(KINDS))
    p.add_argument("--days", type=int, default=1200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    args = p.parse_args()
    series = synthetic.candles_from_closes(KINDS[args.kind](args.days, args.seed), seed=args.seed)
    args.out.write_text(to_csv(series), encoding="utf-8")
    print(f"{args.kind}: {len(series)} days -> {args.out}")


if __name__ == "__main__":
    main()
