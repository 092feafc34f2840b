"""Round engine tests: golden traces, crafted calls, and run invariants.

The n=4 golden traces were verified by hand against the protocol rules:
every record's kind, outcome, caller transition, and budget charge was
checked line by line before freezing the seed.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rumorsim.core import (
    CallIntent,
    CallKind,
    CallOutcome,
    NodeStatus,
    PendingRandom,
    RUN_CAPPED,
    RUN_COMPLETED,
    RUN_STALLED,
    Sequential,
    apply_call,
    collect_intents,
    default_round_cap,
    execute_round,
    init_simulation,
    is_complete,
    run,
    successor,
    _execute_round_reference,
)
from rumorsim.protocols import FullyRandomPush, Hybrid, Quasirandom
from rumorsim.verify import verify_summary_against_trace, verify_trace

ALL_SPECS = [
    Hybrid(1),
    Hybrid(3),
    Quasirandom("identical"),
    Quasirandom("independent"),
    FullyRandomPush(),
]


def as_tuples(records):
    return [
        (r.round, r.caller, r.target, r.kind.value, r.outcome.value, r.serial_position)
        for r in records
    ]


# ---------------------------------------------------------------- successor


def test_successor_direct():
    assert successor(3, 10) == 4


def test_successor_wraps():
    assert successor(9, 10) == 0


def test_successor_single_node():
    assert successor(0, 1) == 0


@pytest.mark.parametrize("i, n", [(-1, 4), (4, 4), (0, 0)])
def test_successor_rejects_out_of_range(i, n):
    with pytest.raises(ValueError):
        successor(i, n)


# ----------------------------------------------------------- init_simulation


def test_init_hybrid_start_walks_own_successor():
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    node = state.node(0)
    assert node.status == NodeStatus.INFORMED
    assert node.mode == Sequential(1)
    assert node.informed_at == 0 and node.informer is None
    assert state.total_calls == 0
    assert state.informing_calls == 0
    assert all(state.node(i).status == NodeStatus.UNINFORMED for i in range(1, 4))


def test_init_single_node_already_complete():
    state = init_simulation(Hybrid(3), 1, 0, seed=7)
    assert is_complete(state)
    summary = run(state)
    assert summary.outcome == RUN_COMPLETED
    assert summary.completion_round == 0
    assert summary.total_calls == 0


def test_init_push_start_has_no_sequential_mode():
    state = init_simulation(FullyRandomPush(), 4, 2, seed=7)
    node = state.node(2)
    assert node.status == NodeStatus.INFORMED
    assert not isinstance(node.mode, Sequential)


def test_init_quasirandom_start_gets_a_list_position():
    state = init_simulation(Quasirandom("identical"), 16, 0, seed=7)
    position = state.node(0).list_position
    assert position is not None and 0 <= position < 16


def test_init_rejects_bad_arguments():
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 0, 0, seed=7)
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 4, 4, seed=7)
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 4, -1, seed=7)
    with pytest.raises(ValueError):
        Hybrid(0)
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 4, 0, seed=None)


def test_init_rejects_crashed_start_or_negative_round():
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 4, 0, seed=7, crash_schedule={0: 1})
    with pytest.raises(ValueError):
        init_simulation(Hybrid(1), 4, 0, seed=7, crash_schedule={1: -1})


def test_init_same_seed_same_state():
    a = init_simulation(Quasirandom("identical"), 32, 0, seed=123)
    b = init_simulation(Quasirandom("identical"), 32, 0, seed=123)
    assert [a.node(i) for i in range(32)] == [b.node(i) for i in range(32)]


# ------------------------------------------------------------ collect_intents


def test_first_round_has_one_initial_successor_intent():
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    intents = collect_intents(state)
    assert intents == [CallIntent(0, 1, CallKind.INITIAL_SUCCESSOR)]


def test_node_informed_this_round_makes_no_call_yet():
    # Round 1 has exactly one call: node 1 is informed during it and must
    # wait for round 2.
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    report = execute_round(state)
    assert report.calls_made == 1
    assert report.newly_informed == (1,)


def test_sequential_mode_targets_the_stored_successor():
    state = init_simulation(Hybrid(2), 8, 0, seed=7)
    apply_call(state, CallIntent(0, 4, CallKind.RANDOM), 0)
    assert state.node(0).mode == Sequential(5)


# ----------------------------------------------------------------- apply_call


def test_apply_call_informs_and_advances_walk():
    state = init_simulation(Hybrid(2), 6, 0, seed=7)
    record = apply_call(state, CallIntent(0, 3, CallKind.SEQUENTIAL), 0)
    assert record.outcome == CallOutcome.INFORMED
    assert record.round == 1
    target = state.node(3)
    assert target.status == NodeStatus.INFORMED
    assert target.informed_at == 1 and target.informer == 0
    assert state.node(0).mode == Sequential(4)
    assert (state.total_calls, state.informing_calls) == (1, 1)


def test_apply_call_final_encounter_stops_the_caller():
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    apply_call(state, CallIntent(0, 2, CallKind.SEQUENTIAL), 0)
    record = apply_call(state, CallIntent(2, 0, CallKind.RANDOM), 1)
    assert record.outcome == CallOutcome.ALREADY_INFORMED
    assert state.node(2).status == NodeStatus.STOPPED
    assert state.node(2).encounters == 1


def test_apply_call_encounter_below_budget_restarts_randomly():
    state = init_simulation(Hybrid(3), 4, 0, seed=7)
    apply_call(state, CallIntent(0, 2, CallKind.SEQUENTIAL), 0)
    apply_call(state, CallIntent(2, 0, CallKind.RANDOM), 1)
    node = state.node(2)
    assert node.status == NodeStatus.INFORMED
    assert node.encounters == 1
    assert node.mode == PendingRandom()


def test_apply_call_start_budget_is_one_higher():
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    apply_call(state, CallIntent(0, 0, CallKind.RANDOM), 0)
    assert state.node(0).status == NodeStatus.INFORMED
    assert state.node(0).encounters == 1
    apply_call(state, CallIntent(0, 0, CallKind.RANDOM), 1)
    assert state.node(0).status == NodeStatus.STOPPED
    assert state.node(0).encounters == 2


def test_apply_call_crashed_target_costs_no_budget():
    state = init_simulation(Hybrid(1), 6, 0, seed=7, crash_schedule={3: 0})
    execute_round(state)  # applies the scheduled crash, then round 1
    assert state.node(3).status == NodeStatus.CRASHED
    record = apply_call(state, CallIntent(0, 3, CallKind.SEQUENTIAL), 0)
    assert record.outcome == CallOutcome.CRASHED_TARGET
    caller = state.node(0)
    assert caller.encounters == 0
    assert caller.mode == Sequential(4)
    assert state.crashed_target_calls == 1


def test_quasirandom_encounter_changes_no_caller_state():
    state = init_simulation(Quasirandom("identical"), 8, 0, seed=7)
    apply_call(state, CallIntent(0, 3, CallKind.SEQUENTIAL), 0)
    before = state.node(0)
    apply_call(state, CallIntent(0, 3, CallKind.SEQUENTIAL), 1)
    after = state.node(0)
    assert after.status == NodeStatus.INFORMED
    assert after.encounters == before.encounters
    assert state.encounter_calls == 1


# ------------------------------------------------- golden traces (n=4, R=1)
# Each trace was replayed by hand: round 1 is the start's walk to its
# successor; the branch point is node 1's first random draw in round 2.


def golden_run(seed):
    state = init_simulation(Hybrid(1), 4, 0, seed=seed, keep_log=True)
    summary = run(state)
    return summary, as_tuples(state.log)


def test_golden_clean_completion():
    # Node 1 draws 3: both round-2 calls inform, the trace is minimal.
    summary, log = golden_run(0)
    assert log == [
        (1, 0, 1, "initial_successor", "informed", 0),
        (2, 0, 2, "initial_successor", "informed", 0),
        (2, 1, 3, "random", "informed", 1),
    ]
    assert summary.outcome == RUN_COMPLETED
    assert summary.completion_round == 2
    assert summary.per_round_informed == (1, 2, 4)
    assert (summary.total_calls, summary.informing_calls, summary.encounter_calls) == (3, 3, 0)


def test_golden_tie_walker_serialized_first():
    # Node 1 draws 2 and loses the serialization: its only budget unit is
    # spent, so it never calls again; node 2 finishes the job.
    summary, log = golden_run(4)
    assert log == [
        (1, 0, 1, "initial_successor", "informed", 0),
        (2, 0, 2, "initial_successor", "informed", 0),
        (2, 1, 2, "random", "already_informed", 1),
        (3, 2, 3, "random", "informed", 0),
        (3, 0, 3, "initial_successor", "already_informed", 1),
    ]
    assert summary.completion_round == 3
    assert summary.per_round_informed == (1, 2, 3, 4)
    assert (summary.total_calls, summary.informing_calls, summary.encounter_calls) == (5, 3, 2)


def test_golden_tie_random_caller_wins():
    # Node 1 informs 2 first, inheriting the walk (next target 3); the
    # start's blocked walk ends on its free first encounter; its later
    # self-call is the second and final one.
    summary, log = golden_run(5)
    assert log == [
        (1, 0, 1, "initial_successor", "informed", 0),
        (2, 1, 2, "random", "informed", 0),
        (2, 0, 2, "initial_successor", "already_informed", 1),
        (3, 2, 3, "random", "informed", 0),
        (3, 1, 3, "sequential", "already_informed", 1),
        (3, 0, 0, "random", "already_informed", 2),
    ]
    assert summary.completion_round == 3
    assert (summary.total_calls, summary.informing_calls, summary.encounter_calls) == (6, 3, 3)


# -------------------------------------------------------------- execute_round


def test_two_nodes_complete_in_one_forced_call():
    state = init_simulation(Hybrid(1), 2, 0, seed=7, keep_log=True)
    report = execute_round(state)
    assert report.newly_informed == (1,)
    assert is_complete(state)
    assert as_tuples(state.log) == [(1, 0, 1, "initial_successor", "informed", 0)]


def test_stalled_round_reported():
    schedule = {i: 4 for i in range(1, 26)}
    state = init_simulation(Hybrid(1), 32, 0, seed=0, crash_schedule=schedule)
    summary = run(state)
    assert summary.outcome == RUN_STALLED
    assert summary.completion_round is None


def test_crash_completing_the_run_still_counts_a_round():
    # The only uninformed node crashes at round 1; the crash is applied
    # at the start of the round and completion follows with zero calls.
    state = init_simulation(Hybrid(1), 2, 0, seed=7, crash_schedule={1: 1})
    summary = run(state)
    assert summary.outcome == RUN_COMPLETED
    assert summary.total_calls == 0
    assert summary.completion_round == 1


# ------------------------------------------------------------------ run / cap


def test_run_two_nodes_summary():
    state = init_simulation(Hybrid(1), 2, 0, seed=7)
    summary = run(state)
    assert summary.completion_round == 1
    assert summary.informing_calls == 1
    assert summary.total_calls <= 4


def test_run_cap_reported_distinctly():
    state = init_simulation(Hybrid(1), 1024, 0, seed=7)
    summary = run(state, max_rounds=2)
    assert summary.outcome == RUN_CAPPED
    assert summary.completion_round is None
    assert summary.rounds_executed == 2


def test_run_rejects_nonpositive_cap():
    state = init_simulation(Hybrid(1), 8, 0, seed=7)
    with pytest.raises(ValueError):
        run(state, max_rounds=0)


def test_default_round_cap_generous():
    assert default_round_cap(1024) == math.ceil(10 * (10 + math.log(1024) + 10))


def test_run_deterministic_trace_at_fixed_seed():
    def one():
        state = init_simulation(Hybrid(1), 8, 0, seed=99, keep_log=True)
        return run(state), as_tuples(state.log)

    (summary_a, log_a), (summary_b, log_b) = one(), one()
    assert summary_a == summary_b
    assert log_a == log_b


# ---------------------------------------------------------------- is_complete


def test_completion_excludes_crashed_nodes():
    state = init_simulation(Hybrid(2), 3, 0, seed=7, crash_schedule={2: 0})
    summary = run(state)
    assert summary.outcome == RUN_COMPLETED
    assert state.node(2).status == NodeStatus.CRASHED
    assert state.node(1).status in (NodeStatus.INFORMED, NodeStatus.STOPPED)


def test_not_complete_with_live_uninformed_node():
    state = init_simulation(Hybrid(1), 4, 0, seed=7)
    assert not is_complete(state)


# ---------------------------------------------- whole-run invariant batteries


def crash_schedule_for(n, seed):
    rng = np.random.default_rng(seed + 1000)
    count = n // 4
    nodes = rng.choice(np.arange(1, n), size=count, replace=False)
    return {int(v): int(rng.integers(0, 8)) for v in nodes}


def run_logged(spec, n, seed, schedule=None, allow_self_calls=True):
    state = init_simulation(
        spec, n, 0, seed=seed, crash_schedule=schedule,
        allow_self_calls=allow_self_calls, keep_log=True,
    )
    summary = run(state)
    return state, summary


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
@pytest.mark.parametrize("n", [2, 3, 7, 16, 33, 64])
def test_no_crash_runs_satisfy_all_trace_invariants(spec, n):
    for seed in range(3):
        state, summary = run_logged(spec, n, seed)
        assert summary.outcome == RUN_COMPLETED
        report = verify_trace(state.log, n=n, spec=spec, start=0, no_crashes=True)
        assert report.ok, report.violations[:3]
        assert verify_summary_against_trace(summary, state.log) == []
        # Push floor and doubling, asserted directly as well.
        assert summary.completion_round >= math.ceil(math.log2(n))
        assert summary.informing_calls == n - 1
        for t, count in enumerate(summary.per_round_informed):
            assert count <= min(n, 2 ** t)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
@pytest.mark.parametrize("n", [7, 16, 33])
def test_crash_runs_satisfy_all_trace_invariants(spec, n):
    for seed in range(3):
        schedule = crash_schedule_for(n, seed)
        state, summary = run_logged(spec, n, seed, schedule)
        report = verify_trace(
            state.log, n=n, spec=spec, start=0, crash_schedule=schedule
        )
        assert report.ok, report.violations[:3]
        assert verify_summary_against_trace(summary, state.log) == []


@pytest.mark.parametrize("budget", [1, 2, 5])
@pytest.mark.parametrize("n", [4, 16, 64, 256])
def test_hybrid_call_cap(budget, n):
    for seed in range(3):
        _, summary = run_logged(Hybrid(budget), n, seed)
        assert summary.total_calls <= n * (budget + 1)


def test_quasirandom_runs_never_stop_nodes():
    for lists in ("identical", "independent"):
        state, _ = run_logged(Quasirandom(lists), 32, 5)
        assert all(state.node(i).status != NodeStatus.STOPPED for i in range(32))


def test_doubling_bound_is_attained():
    # Seed 0 at n=4 doubles every round: 1, 2, 4.
    summary, _ = golden_run(0)
    assert summary.per_round_informed == (1, 2, 4)


def test_no_self_calls_switch():
    # The switch governs random draws only; a cyclic walk still passes
    # through the walker's own id.
    for spec in ALL_SPECS:
        state, summary = run_logged(spec, 16, 3, allow_self_calls=False)
        assert summary.outcome == RUN_COMPLETED
        assert all(
            r.caller != r.target for r in state.log if r.kind == CallKind.RANDOM
        )


def test_nonzero_start_node():
    state = init_simulation(Hybrid(1), 16, 5, seed=3, keep_log=True)
    summary = run(state)
    assert summary.outcome == RUN_COMPLETED
    first = state.log[0]
    assert (first.caller, first.target, first.kind) == (5, 6, CallKind.INITIAL_SUCCESSOR)
    report = verify_trace(state.log, n=16, spec=Hybrid(1), start=5, no_crashes=True)
    assert report.ok, report.violations[:3]


# ------------------------------------------------- fast engine == reference


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_vectorized_round_matches_reference_engine(spec):
    for seed in range(4):
        for schedule in (None, crash_schedule_for(48, seed)):
            fast_state = init_simulation(
                spec, 48, 0, seed=seed, crash_schedule=schedule, keep_log=True
            )
            fast = run(fast_state)
            ref_state = init_simulation(
                spec, 48, 0, seed=seed, crash_schedule=schedule, keep_log=True
            )
            ref = run(ref_state, round_engine=_execute_round_reference)
            assert fast == ref
            assert fast_state.log == ref_state.log


# ------------------------------------------------------ property-based runs


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=48),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    budget=st.integers(min_value=1, max_value=4),
)
def test_property_hybrid_no_crash_run(n, seed, budget):
    state, summary = run_logged(Hybrid(budget), n, seed)
    assert summary.outcome == RUN_COMPLETED
    assert summary.total_calls <= n * (budget + 1)
    assert summary.completion_round >= math.ceil(math.log2(n))
    report = verify_trace(state.log, n=n, spec=Hybrid(budget), start=0, no_crashes=True)
    assert report.ok, report.violations[:3]


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=4, max_value=40),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    data=st.data(),
)
def test_property_crash_runs_keep_invariants(n, seed, data):
    nodes = data.draw(
        st.lists(st.integers(min_value=1, max_value=n - 1), max_size=n // 2, unique=True)
    )
    rounds = data.draw(
        st.lists(st.integers(min_value=0, max_value=10), min_size=len(nodes), max_size=len(nodes))
    )
    schedule = dict(zip(nodes, rounds))
    spec = data.draw(st.sampled_from(ALL_SPECS))
    state, summary = run_logged(spec, n, seed, schedule)
    report = verify_trace(state.log, n=n, spec=spec, start=0, crash_schedule=schedule)
    assert report.ok, report.violations[:3]
    assert verify_summary_against_trace(summary, state.log) == []


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=40),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_property_quasirandom_identical_useless_after_encounter(n, seed):
    # After an encounter with a node informed in an earlier round by some
    # caller, a shared-list walker sits behind a fully informed stretch
    # and never informs again.
    state, _ = run_logged(Quasirandom("identical"), n, seed)
    report = verify_trace(
        state.log, n=n, spec=Quasirandom("identical"), start=0, no_crashes=True
    )
    assert report.ok, report.violations[:3]
