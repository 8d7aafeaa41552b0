"""Show how label noise moves a leaderboard built from synthetic runs.

Usage: python scripts/synthetic_leaderboard.py [--systems 5] [--queries 4] [--noise 0.2] [--seed 0]
"""

import argparse
import random

from critjudge.metrics import RunFile, build_leaderboard, leaderboard_correlation
from critjudge.model import QrelsSet


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--systems", type=int, default=5)
    ap.add_argument("--queries", type=int, default=4)
    ap.add_argument("--pool", type=int, default=10)
    ap.add_argument("--noise", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    manual = {(f"q{q}", f"p{q}_{j}"): rng.choice([0, 0, 1, 2, 3]) for q in range(args.queries) for j in range(args.pool)}
    runs = []
    for s in range(args.systems):
        entries = {}
        for q in range(args.queries):
            pids = rng.sample([f"p{q}_{j}" for j in range(args.pool)], args.pool)
            entries[f"q{q}"] = tuple((pid, float(args.pool - i)) for i, pid in enumerate(pids))
        runs.append(RunFile(f"sys{s}", entries))

    predicted = dict(manual)
    for key in rng.sample(sorted(manual), int(len(manual) * args.noise)):
        predicted[key] = rng.choice([v for v in range(4) if v != manual[key]])

    m, p = QrelsSet(manual), QrelsSet(predicted)
    pred_scores = build_leaderboard(runs, p).scores()
    print(f"{'system':<8} {'manual':>8} {'noisy':>8}")
    for tag, score in build_leaderboard(runs, m).rows:
        print(f"{tag:<8} {score:>8.4f} {pred_scores[tag]:>8.4f}")
    print(f"tau = {leaderboard_correlation(runs, m, p):.4f}")


if __name__ == "__main__":
    main()
