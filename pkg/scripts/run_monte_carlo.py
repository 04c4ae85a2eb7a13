"""Monte Carlo fit study: W distributions over repeated noise realizations.

Runs the standard configuration (N=50, J=10*P, unit Gaussian noise,
order 2 known) for both benchmark models and writes per-trial CSVs plus
quartile summaries, the data behind a box plot of the fit score W.

    python scripts/run_monte_carlo.py --trials 100 --seed 2024 --outdir out_mc
"""

from __future__ import annotations

import argparse
from pathlib import Path

from ltpsid import fixtures
from ltpsid.evaluation import MonteCarloConfig, monte_carlo
from ltpsid.fileio import write_json, write_montecarlo_csv
from ltpsid.model import normalize_gain


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--outdir", type=Path, default=Path("out_mc"))
    args = parser.parse_args(argv)

    for name in fixtures.FIXTURE_NAMES:
        model = normalize_gain(fixtures.load(name))
        config = MonteCarloConfig(
            J=10 * model.P,
            N=50,
            sigma=args.sigma,
            trials=args.trials,
            q=10,
            r=10,
            n_x=2,
            seed=args.seed,
        )
        result = monte_carlo(model, config, jobs=args.jobs)
        write_montecarlo_csv(result, args.outdir / f"{name}_trials.csv")
        write_json(result.summary(), args.outdir / f"{name}_summary.json")
        s = result.summary()
        print(
            f"{name}: median W = {s.get('W_median', float('nan')):.2f} "
            f"[{s.get('W_q1', float('nan')):.2f}, {s.get('W_q3', float('nan')):.2f}], "
            f"failures {s['failures']}/{s['trials']}"
        )


if __name__ == "__main__":
    main()
