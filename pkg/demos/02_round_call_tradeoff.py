"""Trade rounds against calls by turning the stop budget.

Sweeps the hybrid stop budget at fixed n and tabulates how the mean
completion round falls while the call ceiling n*(R+1) rises.  The
closed-form optimum ceil(sqrt(ln n)) sits where the two costs balance.
"""

from rumorsim import max_total_calls, optimal_stop_budget, sweep, sweep_grid

N = 4096
BUDGETS = [1, 2, 3, 4, 6, 8]
TRIALS = 200
SEED = 20260201


def main() -> None:
    result = sweep(sweep_grid([N], BUDGETS), TRIALS, SEED)
    best = optimal_stop_budget(N)

    print(f"hybrid protocol at n={N}, {TRIALS} trials per stop budget")
    print(f"closed-form optimal stop budget: R={best}\n")

    print("   R  mean rounds  median  max calls seen  call ceiling")
    for cell, stats in zip(result.cells, result.stats):
        block = stats.completion_rounds
        seen = max(s.total_calls for s in stats.summaries)
        mark = "  <- optimal" if cell.stop_budget == best else ""
        print(
            f"{cell.stop_budget:>4}  {block.mean:>11.3f}  {block.median:>6.1f}  "
            f"{seen:>14}  {max_total_calls(N, cell.stop_budget):>12}{mark}"
        )

    print(
        "\nSmall budgets finish in more rounds but bound total calls near 2n;"
        "\nlarge budgets approach the fully-random round count at higher cost."
    )


if __name__ == "__main__":
    main()
