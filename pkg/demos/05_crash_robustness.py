"""Inject node crashes and watch the protocol degrade gracefully.

Crashes a growing fraction of nodes at uniform random rounds inside the
spreading window and reports completion medians and stall counts.  The
completed runs stay within a small constant factor of the crash-free
median; runs whose last active walkers all crash stall and are counted.
"""

import math

from rumorsim import (
    CrashModel,
    ExperimentConfig,
    Hybrid,
    classical_push_estimate,
    optimal_stop_budget,
    run_trials,
)

N = 4096
TRIALS = 200
SEED = 20260204
FRACTIONS = [0.0, 0.05, 0.1, 0.2]


def main() -> None:
    budget = optimal_stop_budget(N)
    window = math.ceil(classical_push_estimate(N))
    print(
        f"n={N}, stop budget R={budget}, crashes uniform in rounds "
        f"[0, {window}], {TRIALS} trials per fraction\n"
    )

    baseline = None
    print("crashed  completed  stalled  median rounds  vs crash-free")
    for fraction in FRACTIONS:
        crash = (
            CrashModel(fraction, "uniform_round", max_round=window)
            if fraction > 0
            else None
        )
        config = ExperimentConfig(
            spec=Hybrid(budget), n=N, trials=TRIALS,
            master_seed=SEED, crash=crash,
        )
        stats = run_trials(config)
        median = stats.completion_rounds.median
        if baseline is None:
            baseline = median
        print(
            f"{fraction:>7.0%}  {stats.completed_count:>9}  {stats.stalled_count:>7}"
            f"  {median:>13.1f}  {median / baseline:>12.2f}x"
        )

    print(
        "\nCompleted runs slow down by a small constant factor only; stalls"
        "\nappear once crashes can remove every still-active walker at once."
    )


if __name__ == "__main__":
    main()
