"""Walk through one small run call by call.

Runs the hybrid protocol on a 12-node cycle with the full call log
retained, prints every call in execution order, then re-checks the log
with the independent trace verifier.
"""

from rumorsim import Hybrid, init_simulation, run, verify_trace

N = 12
STOP_BUDGET = 2
SEED = 7


def main() -> None:
    state = init_simulation(Hybrid(STOP_BUDGET), N, seed=SEED, keep_log=True)
    summary = run(state)

    print(f"hybrid protocol, n={N}, stop budget R={STOP_BUDGET}, seed={SEED}")
    print(f"outcome: {summary.outcome} after {summary.rounds_executed} rounds\n")

    print("round  caller  target  kind               outcome            slot")
    for rec in state.log:
        print(
            f"{rec.round:>5}  {rec.caller:>6}  {rec.target:>6}  "
            f"{rec.kind.value:<17}  {rec.outcome.value:<17}  {rec.serial_position:>4}"
        )

    print()
    print(f"total calls      : {summary.total_calls}")
    print(f"informing calls  : {summary.informing_calls} (always n-1 on completion)")
    print(f"encounters       : {summary.encounter_calls}")
    print(f"informed by round: {summary.per_round_informed}")

    report = verify_trace(state.log, spec=Hybrid(STOP_BUDGET), no_crashes=True)
    status = "clean" if report.ok else f"{len(report.violations)} violations"
    print(f"\nindependent trace check over {report.records_checked} records: {status}")


if __name__ == "__main__":
    main()
