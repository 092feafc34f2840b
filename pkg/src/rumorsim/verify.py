"""Replay stored call traces and re-check the engine's invariants.

The checks only use information that is actually in a trace: caller
eligibility (informed earlier, one call per round, never after stopping),
outcome consistency against the replayed informed set, unique informers,
per-round doubling of the informed set, protocol-specific call kinds,
walk chaining, and budget accounting.  Crash knowledge is optional: with
a crash schedule the crashed-target outcomes are checked exactly; with
``no_crashes=True`` any crashed-target outcome is a violation and the
identical-lists uselessness property is checked too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import CallKind, CallOutcome, CallRecord, TraceSummary, successor
from .protocols import (
    LISTS_IDENTICAL,
    FullyRandomPush,
    Hybrid,
    ProtocolSpec,
    Quasirandom,
)


@dataclass(frozen=True)
class VerificationReport:
    records_checked: int
    n: int | None
    start: int | None
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_trace(
    records: Sequence[CallRecord],
    *,
    n: int | None = None,
    spec: ProtocolSpec | None = None,
    start: int | None = None,
    crash_schedule: dict[int, int] | None = None,
    no_crashes: bool = False,
    max_violations: int = 50,
) -> VerificationReport:
    """Check a call trace against every invariant derivable from it."""
    violations: list[str] = []

    def flag(message: str) -> None:
        if len(violations) < max_violations:
            violations.append(message)

    if not records:
        return VerificationReport(0, n, start, tuple(violations))

    if n is None:
        n = 1 + max(max(r.caller, r.target) for r in records)
    if start is None:
        first = records[0]
        if first.round == 1:
            start = first.caller
    if records[0].round != 1:
        flag(f"first recorded round is {records[0].round}, expected 1")

    hybrid = isinstance(spec, Hybrid)
    quasi_identical = isinstance(spec, Quasirandom) and spec.lists == LISTS_IDENTICAL
    quasi_independent = isinstance(spec, Quasirandom) and not quasi_identical
    push = isinstance(spec, FullyRandomPush)
    check_uselessness = quasi_identical and no_crashes

    informed_at: dict[int, int] = {}
    if start is not None:
        informed_at[start] = 0
    crashed_seen: dict[int, int] = {}  # node -> earliest round observed crashed
    encounters: dict[int, int] = {}
    stopped: set[int] = set()
    last_by_caller: dict[int, CallRecord] = {}
    useless: set[int] = set()
    informed_before_round = len(informed_at)
    informs_this_round = 0
    prev_key: tuple[int, int] | None = None
    current_round = None

    def close_round() -> None:
        nonlocal informed_before_round, informs_this_round
        if informs_this_round > informed_before_round:
            flag(
                f"round {current_round}: {informs_this_round} nodes informed by "
                f"{informed_before_round} previously informed nodes"
            )
        informed_before_round += informs_this_round
        informs_this_round = 0

    for rec in records:
        r, c, t, s = rec.round, rec.caller, rec.target, rec.serial_position
        where = f"round {r} serial {s}"

        if current_round is None:
            current_round = r
        elif r != current_round:
            close_round()
            current_round = r

        key = (r, s)
        if prev_key is not None:
            if key <= prev_key:
                flag(f"{where}: records out of (round, serial) order")
            elif r == prev_key[0] and s != prev_key[1] + 1:
                flag(f"{where}: serial positions not contiguous")
            elif r != prev_key[0] and s != 0:
                flag(f"{where}: round does not begin at serial 0")
        elif s != 0:
            flag(f"{where}: first record of a round must be serial 0")
        prev_key = key

        if not (0 <= c < n and 0 <= t < n):
            flag(f"{where}: node id out of range (caller {c}, target {t})")
            continue

        # Caller eligibility.
        caller_informed = informed_at.get(c)
        if caller_informed is None:
            flag(f"{where}: caller {c} was never informed")
        elif caller_informed >= r:
            flag(
                f"{where}: caller {c} acts in the round it was informed "
                f"(informed at {caller_informed})"
            )
        if c in stopped:
            flag(f"{where}: caller {c} calls after stopping")
        if c in crashed_seen and crashed_seen[c] <= r:
            flag(f"{where}: caller {c} calls at round {r} but was seen crashed")
        if crash_schedule is not None and crash_schedule.get(c, r + 1) <= r:
            flag(f"{where}: caller {c} calls at or after its crash round")
        prev = last_by_caller.get(c)
        if prev is not None and prev.round == r:
            flag(f"{where}: caller {c} calls twice in one round")

        # Outcome consistency against the replayed informed set.
        if rec.outcome is CallOutcome.INFORMED:
            if t in informed_at:
                flag(f"{where}: target {t} informed a second time")
            elif t in crashed_seen and crashed_seen[t] <= r:
                flag(f"{where}: crashed target {t} reported informed")
            else:
                informed_at[t] = r
                informs_this_round += 1
            if crash_schedule is not None and crash_schedule.get(t, r + 1) <= r:
                flag(f"{where}: target {t} informed at or after its crash round")
            if c in useless:
                flag(
                    f"{where}: identical-lists caller {c} informs after an "
                    f"encounter with a previously informed node"
                )
        elif rec.outcome is CallOutcome.ALREADY_INFORMED:
            target_informed = informed_at.get(t)
            if target_informed is None:
                flag(f"{where}: already-informed outcome but target {t} is not")
            if crash_schedule is not None and crash_schedule.get(t, r + 1) <= r:
                flag(f"{where}: crashed target {t} reported already-informed")
            if hybrid:
                encounters[c] = encounters.get(c, 0) + 1
                limit = (spec.stop_budget + 1) if c == start else spec.stop_budget
                if encounters[c] > limit:
                    flag(f"{where}: caller {c} exceeds its encounter budget")
                elif encounters[c] == limit:
                    stopped.add(c)
            if (
                check_uselessness
                and target_informed is not None
                and target_informed < r
                and t != start
            ):
                useless.add(c)
        else:  # crashed target
            if no_crashes:
                flag(f"{where}: crashed-target outcome in a no-crash run")
            if crash_schedule is not None and crash_schedule.get(t, r + 1) > r:
                flag(f"{where}: target {t} reported crashed before its crash round")
            crashed_seen.setdefault(t, r)

        # Protocol-specific kinds and walk chaining.
        if spec is not None:
            _check_kind_and_chaining(
                flag, where, rec, prev, c, t, n, start, spec,
                hybrid, quasi_identical, quasi_independent, push, encounters,
            )

        last_by_caller[c] = rec

    close_round()

    if quasi_independent:
        _check_independent_lists(flag, records, n)

    return VerificationReport(len(records), n, start, tuple(violations))


def _check_kind_and_chaining(
    flag, where, rec, prev, c, t, n, start, spec,
    hybrid, quasi_identical, quasi_independent, push, encounters,
) -> None:
    kind = rec.kind
    if push:
        if kind is not CallKind.RANDOM:
            flag(f"{where}: fully-random caller places a {kind.value} call")
        return
    if quasi_identical or quasi_independent:
        if kind is not CallKind.SEQUENTIAL:
            flag(f"{where}: list-walking caller places a {kind.value} call")
        if quasi_identical and prev is not None:
            expected = successor(prev.target, n)
            if t != expected:
                flag(
                    f"{where}: caller {c} walks to {t}, expected "
                    f"{expected} after {prev.target}"
                )
        return
    if not hybrid:
        return

    # Hybrid kinds: the start walks initial-successor calls until its first
    # encounter; everyone else opens with a random call; informing switches
    # the caller to a sequential walk from the target's successor; an
    # encounter forces a random restart; a crashed target is walked past.
    enc_before = encounters.get(c, 0) - (
        1 if rec.outcome is CallOutcome.ALREADY_INFORMED else 0
    )
    if prev is None:
        if c == start:
            if kind is not CallKind.INITIAL_SUCCESSOR or t != successor(start, n):
                flag(
                    f"{where}: starting node must open at its successor "
                    f"with an initial-successor call"
                )
        elif kind is not CallKind.RANDOM:
            flag(f"{where}: first call of node {c} must be random")
        return
    if c == start and enc_before == 0:
        expected_kind = CallKind.INITIAL_SUCCESSOR
    elif prev.outcome is CallOutcome.INFORMED:
        expected_kind = CallKind.SEQUENTIAL
    elif prev.outcome is CallOutcome.ALREADY_INFORMED:
        expected_kind = CallKind.RANDOM
    else:  # walked past a crashed target, or redraws after a crashed draw
        expected_kind = prev.kind
    if kind is not expected_kind:
        flag(
            f"{where}: caller {c} places a {kind.value} call, expected "
            f"{expected_kind.value}"
        )
    if kind in (CallKind.SEQUENTIAL, CallKind.INITIAL_SUCCESSOR) and prev.outcome in (
        CallOutcome.INFORMED,
        CallOutcome.CRASHED_TARGET,
    ):
        expected = successor(prev.target, n)
        if t != expected:
            flag(
                f"{where}: caller {c} walks to {t}, expected {expected} "
                f"after {prev.target}"
            )


def _check_independent_lists(flag, records: Sequence[CallRecord], n: int) -> None:
    # Each caller walks its own cyclic permutation: the first n targets are
    # distinct, and from then on the sequence repeats with period n.
    seq: dict[int, list[int]] = {}
    for rec in records:
        seq.setdefault(rec.caller, []).append(rec.target)
    for caller, targets in seq.items():
        head = targets[:n]
        if len(set(head)) != len(head):
            flag(f"caller {caller}: repeats a list target before wrapping")
        for i in range(n, len(targets)):
            if targets[i] != targets[i - n]:
                flag(f"caller {caller}: list does not repeat cyclically")
                break


def verify_summary_against_trace(
    summary: TraceSummary, records: Sequence[CallRecord]
) -> list[str]:
    """Cross-check a summary document against its call trace."""
    violations = []
    if summary.total_calls != len(records):
        violations.append(
            f"total_calls {summary.total_calls} != {len(records)} trace records"
        )
    by_outcome = {o: 0 for o in CallOutcome}
    informs_per_round: dict[int, int] = {}
    for rec in records:
        by_outcome[rec.outcome] += 1
        if rec.outcome is CallOutcome.INFORMED:
            informs_per_round[rec.round] = informs_per_round.get(rec.round, 0) + 1
    pairs = (
        ("informing_calls", summary.informing_calls, CallOutcome.INFORMED),
        ("encounter_calls", summary.encounter_calls, CallOutcome.ALREADY_INFORMED),
        ("crashed_target_calls", summary.crashed_target_calls, CallOutcome.CRASHED_TARGET),
    )
    for name, value, outcome in pairs:
        if value != by_outcome[outcome]:
            violations.append(f"{name} {value} != {by_outcome[outcome]} in trace")

    prof = summary.per_round_informed
    if len(prof) != summary.rounds_executed + 1:
        violations.append(
            f"per_round_informed has {len(prof)} entries for "
            f"{summary.rounds_executed} executed rounds"
        )
    else:
        if prof[0] != 1:
            violations.append(f"per_round_informed[0] = {prof[0]}, expected 1")
        for t in range(1, len(prof)):
            grew = prof[t] - prof[t - 1]
            if grew < 0:
                violations.append(f"informed count shrinks at round {t}")
            if grew != informs_per_round.get(t, 0):
                violations.append(
                    f"round {t}: informed count grows by {grew} but the trace "
                    f"has {informs_per_round.get(t, 0)} informing calls"
                )
            if prof[t] > min(summary.n, 2**t):
                violations.append(
                    f"round {t}: informed count {prof[t]} above the doubling cap"
                )
    if records:
        last_round = records[-1].round
        if summary.rounds_executed < last_round:
            violations.append(
                f"rounds_executed {summary.rounds_executed} below last trace "
                f"round {last_round}"
            )
        if (
            summary.completion_round is not None
            and summary.completion_round < last_round
        ):
            violations.append(
                f"completion_round {summary.completion_round} below last trace "
                f"round {last_round}"
            )
    return violations
