"""Run one experiment config and write its CSV.

    python3 scripts/run_experiment.py configs/sweep_k.json results/sweep_k.csv [--trials N]
"""

import argparse
import sys
import time
from pathlib import Path

from secrecy_sdp.sim import ExperimentConfig, load_config, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config")
    parser.add_argument("out")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    config = load_config(args.config)
    if args.trials is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "trials": args.trials})
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()

    def progress(done):
        elapsed = time.perf_counter() - start
        print(f"\r{done}/{config.trials} trials  {elapsed:6.1f}s", end="", file=sys.stderr, flush=True)

    result = run_experiment(config, out=args.out, workers=args.workers, progress=progress)
    print(file=sys.stderr)
    for row in result.rows:
        print(f"{row.sweep_value:8g}  {row.method:14s}  mean {row.mean_rate:8.4f}  "
              f"std {row.std_rate:7.4f}  nonneg {row.frac_nonneg:5.2f}  failed {row.failed}")


if __name__ == "__main__":
    main()
