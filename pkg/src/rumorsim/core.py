"""Round-synchronous push-only rumor spreading on the complete graph.

A ``SimulationState`` holds one world: ``n`` nodes on a cyclic order, one
of them initially informed, and a protocol spec describing how informed
nodes pick call targets.  Rounds are executed synchronously: every node
informed in an earlier round places exactly one call, the round's calls
are serialized in a uniformly random order (two calls never land on a
node at exactly the same instant), and a node informed at serial position
``p`` is seen as already informed by every later call of the same round.

Every contact counts as one call, whatever its outcome.  Under the hybrid
protocol a call that hits an already-informed target ends the caller's
current iteration: it consumes one unit of the caller's stop budget and
sends it back to a uniformly random restart, or stops it for good once
the budget is spent.  The starting node walks its own successors first
and its first such encounter is free (it only ends the initial walk).

All randomness is drawn from one seeded generator in a fixed order
(target draws while intents are collected, in ascending caller id order,
then the round's serialization permutation), so a given configuration
always reproduces the same call sequence bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .protocols import (
    LISTS_IDENTICAL,
    FullyRandomPush,
    Hybrid,
    ProtocolSpec,
    Quasirandom,
)


class NodeStatus(str, Enum):
    UNINFORMED = "uninformed"
    INFORMED = "informed"
    STOPPED = "stopped"
    CRASHED = "crashed"


class CallKind(str, Enum):
    INITIAL_SUCCESSOR = "initial_successor"
    SEQUENTIAL = "sequential"
    RANDOM = "random"


class CallOutcome(str, Enum):
    INFORMED = "informed"
    ALREADY_INFORMED = "already_informed"
    CRASHED_TARGET = "crashed_target"


RUN_COMPLETED = "completed"
RUN_STALLED = "stalled"
RUN_CAPPED = "capped"

# Internal array codes.
_UNINFORMED, _INFORMED, _STOPPED, _CRASHED = 0, 1, 2, 3
_M_NONE, _M_SEQ, _M_PENDING = 0, 1, 2
_K_INITIAL, _K_SEQUENTIAL, _K_RANDOM = 0, 1, 2
_O_INFORMED, _O_ALREADY, _O_CRASHED = 0, 1, 2

_STATUS_ENUM = (
    NodeStatus.UNINFORMED,
    NodeStatus.INFORMED,
    NodeStatus.STOPPED,
    NodeStatus.CRASHED,
)
_KIND_ENUM = (CallKind.INITIAL_SUCCESSOR, CallKind.SEQUENTIAL, CallKind.RANDOM)
_OUTCOME_ENUM = (
    CallOutcome.INFORMED,
    CallOutcome.ALREADY_INFORMED,
    CallOutcome.CRASHED_TARGET,
)


@dataclass(frozen=True)
class Sequential:
    """Caller walks the cyclic order; the next call goes to ``next_target``."""

    next_target: int


@dataclass(frozen=True)
class PendingRandom:
    """Caller draws a fresh uniformly random target next round."""


@dataclass(frozen=True)
class NodeState:
    """Read-only snapshot of one node.

    ``mode`` is set for hybrid and fully-random callers; list-walking
    nodes expose their progress through ``list_position`` instead (the
    next target id for the shared list, the call index for independent
    lists) and, for independent lists, the lazily materialized prefix of
    their call sequence.
    """

    id: int
    status: NodeStatus
    mode: Sequential | PendingRandom | None
    encounters: int
    informed_at: int | None
    informer: int | None
    list_position: int | None = None
    call_sequence: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CallIntent:
    caller: int
    target: int
    kind: CallKind


@dataclass(frozen=True)
class CallRecord:
    round: int
    caller: int
    target: int
    kind: CallKind
    outcome: CallOutcome
    serial_position: int


@dataclass(frozen=True)
class RoundReport:
    """What one executed round did."""

    round: int
    calls_made: int
    newly_informed: tuple[int, ...]
    stalled: bool


@dataclass(frozen=True)
class TraceSummary:
    """Per-run metrics; ``per_round_informed[t]`` counts nodes ever informed
    by the end of round ``t`` (crashing later does not un-inform a node)."""

    n: int
    outcome: str
    completion_round: int | None
    rounds_executed: int
    total_calls: int
    informing_calls: int
    encounter_calls: int
    crashed_target_calls: int
    per_round_informed: tuple[int, ...]


def successor(i: int, n: int) -> int:
    """Next node along the cyclic order: (i+1) mod n."""
    if not 0 <= i < n:
        raise ValueError(f"node id {i} out of range for n={n}")
    return (i + 1) % n


def default_round_cap(n: int) -> int:
    """Generous default round cap, far above every closed-form bound."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.ceil(10 * (math.log2(n) + math.log(n) + 10))


class _NodeView(Sequence):
    """Lazy sequence of NodeState snapshots."""

    def __init__(self, state: "SimulationState"):
        self._state = state

    def __len__(self) -> int:
        return self._state.n

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._state.node(j) for j in range(*i.indices(len(self)))]
        return self._state.node(i)


class SimulationState:
    """Mutable world state; see the operations below for the round logic."""

    def __init__(
        self,
        spec: ProtocolSpec,
        n: int,
        start: int = 0,
        seed=None,
        crash_schedule: dict[int, int] | None = None,
        *,
        allow_self_calls: bool = True,
        keep_log: bool = False,
    ):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if not 0 <= start < n:
            raise ValueError(f"start {start} out of range for n={n}")
        if not isinstance(spec, (Hybrid, Quasirandom, FullyRandomPush)):
            raise TypeError(f"not a protocol spec: {spec!r}")
        if seed is None:
            raise ValueError("seed is required for reproducibility")
        self.spec = spec
        self.n = n
        self.start = start
        self.allow_self_calls = allow_self_calls
        self.rng = np.random.default_rng(seed)
        self.round = 0

        self.crash_schedule = dict(crash_schedule or {})
        for node, crash_round in self.crash_schedule.items():
            if not 0 <= node < n:
                raise ValueError(f"crash schedule node {node} out of range")
            if node == start:
                raise ValueError("the starting node cannot be crashed")
            if crash_round < 0:
                raise ValueError(f"crash round {crash_round} is negative")
        ordered = sorted(self.crash_schedule.items(), key=lambda kv: (kv[1], kv[0]))
        self._crash_nodes = [node for node, _ in ordered]
        self._crash_rounds = [rnd for _, rnd in ordered]
        self._crash_ptr = 0
        self.crashed_count = 0

        self._status = np.zeros(n, dtype=np.int8)
        self._mode = np.zeros(n, dtype=np.int8)
        self._next_target = np.full(n, -1, dtype=np.int64)
        self._encounters = np.zeros(n, dtype=np.int64)
        self._informed_at = np.full(n, -1, dtype=np.int64)
        self._informer = np.full(n, -1, dtype=np.int64)

        self._independent_lists = (
            isinstance(spec, Quasirandom) and spec.lists != LISTS_IDENTICAL
        )
        self._drawn: dict[int, list[int]] = {}
        self._drawn_seen: dict[int, set[int]] = {}
        self._list_index = (
            np.zeros(n, dtype=np.int64) if self._independent_lists else None
        )

        self.total_calls = 0
        self.informing_calls = 0
        self.encounter_calls = 0
        self.crashed_target_calls = 0

        self._status[start] = _INFORMED
        self._informed_at[start] = 0
        self.ever_informed_count = 1
        self._live_uninformed = n - 1
        self.per_round_informed: list[int] = [1]
        self.log: list[CallRecord] | None = [] if keep_log else None

        if isinstance(spec, Hybrid):
            self.stop_budget: int | None = spec.stop_budget
            self._mode[start] = _M_SEQ
            self._next_target[start] = successor(start, n)
        else:
            self.stop_budget = None
            if isinstance(spec, FullyRandomPush):
                self._mode[start] = _M_PENDING
            elif not self._independent_lists:
                # The start picks its position on the shared list up front.
                self._next_target[start] = int(self.rng.integers(0, n))

    # -- snapshots ---------------------------------------------------------

    @property
    def nodes(self) -> Sequence[NodeState]:
        return _NodeView(self)

    def node(self, i: int) -> NodeState:
        if not 0 <= i < self.n:
            raise ValueError(f"node id {i} out of range for n={self.n}")
        status = _STATUS_ENUM[self._status[i]]
        mode: Sequential | PendingRandom | None = None
        list_position: int | None = None
        call_sequence: tuple[int, ...] | None = None
        if isinstance(self.spec, Quasirandom):
            if self._independent_lists:
                if self._list_index is not None and (
                    status is NodeStatus.INFORMED or i in self._drawn
                ):
                    list_position = int(self._list_index[i])
                    call_sequence = tuple(self._drawn.get(i, ()))
            elif self._next_target[i] >= 0:
                list_position = int(self._next_target[i])
        else:
            if self._mode[i] == _M_SEQ:
                mode = Sequential(int(self._next_target[i]))
            elif self._mode[i] == _M_PENDING:
                mode = PendingRandom()
        informed_at = int(self._informed_at[i])
        informer = int(self._informer[i])
        return NodeState(
            id=i,
            status=status,
            mode=mode,
            encounters=int(self._encounters[i]),
            informed_at=None if informed_at < 0 else informed_at,
            informer=None if informer < 0 else informer,
            list_position=list_position,
            call_sequence=call_sequence,
        )

    # -- internals ---------------------------------------------------------

    def _apply_crashes(self, upto_round: int) -> None:
        while (
            self._crash_ptr < len(self._crash_rounds)
            and self._crash_rounds[self._crash_ptr] <= upto_round
        ):
            node = self._crash_nodes[self._crash_ptr]
            self._crash_ptr += 1
            if self._status[node] == _CRASHED:
                continue
            if self._status[node] == _UNINFORMED:
                self._live_uninformed -= 1
            self._status[node] = _CRASHED
            self._mode[node] = _M_NONE
            self._next_target[node] = -1
            self.crashed_count += 1

    def _draw_random_targets(self, callers: np.ndarray) -> np.ndarray:
        if len(callers) == 0:
            return np.empty(0, dtype=np.int64)
        if self.allow_self_calls:
            return self.rng.integers(0, self.n, size=len(callers))
        if self.n == 1:
            raise ValueError("cannot draw a non-self target with n=1")
        targets = self.rng.integers(0, self.n - 1, size=len(callers))
        targets[targets >= callers] += 1
        return targets

    def _next_independent_target(self, caller: int) -> int:
        drawn = self._drawn.setdefault(caller, [])
        seen = self._drawn_seen.setdefault(caller, set())
        idx = int(self._list_index[caller])
        if idx < len(drawn):
            return drawn[idx]
        if len(drawn) == self.n:
            return drawn[idx % self.n]
        while True:
            candidate = int(self.rng.integers(0, self.n))
            if candidate not in seen:
                break
        drawn.append(candidate)
        seen.add(candidate)
        return candidate

    def _collect_intent_arrays(self):
        """One (caller, target, kind) triple per eligible caller.

        Eligible means informed in a strictly earlier round and neither
        stopped nor crashed; since intents are collected before any call
        of the round is applied, that is exactly the informed set.  All
        random target draws happen here, in ascending caller id order.
        """
        callers = np.nonzero(self._status == _INFORMED)[0].astype(np.int64)
        k = len(callers)
        if k == 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, np.empty(0, dtype=np.int8)
        spec = self.spec
        if isinstance(spec, Hybrid):
            modes = self._mode[callers]
            pending = modes == _M_PENDING
            targets = np.empty(k, dtype=np.int64)
            kinds = np.full(k, _K_SEQUENTIAL, dtype=np.int8)
            seq = ~pending
            targets[seq] = self._next_target[callers[seq]]
            targets[pending] = self._draw_random_targets(callers[pending])
            kinds[pending] = _K_RANDOM
            if (
                self._status[self.start] == _INFORMED
                and self._mode[self.start] == _M_SEQ
                and self._encounters[self.start] == 0
            ):
                kinds[callers == self.start] = _K_INITIAL
            return callers, targets, kinds
        if isinstance(spec, Quasirandom):
            kinds = np.full(k, _K_SEQUENTIAL, dtype=np.int8)
            if self._independent_lists:
                targets = np.empty(k, dtype=np.int64)
                for j, caller in enumerate(callers.tolist()):
                    targets[j] = self._next_independent_target(caller)
                return callers, targets, kinds
            undrawn = self._next_target[callers] < 0
            if undrawn.any():
                fresh = callers[undrawn]
                self._next_target[fresh] = self.rng.integers(
                    0, self.n, size=len(fresh)
                )
            targets = self._next_target[callers]
            return callers, targets, kinds
        targets = self._draw_random_targets(callers)
        kinds = np.full(k, _K_RANDOM, dtype=np.int8)
        return callers, targets, kinds

    def _advance_list_caller(self, caller: int, target: int) -> None:
        if self._independent_lists:
            self._list_index[caller] += 1
        else:
            self._next_target[caller] = (target + 1) % self.n

    def _budget_limit(self, caller: int) -> int:
        # The starting node's first encounter only ends its initial walk.
        return self.stop_budget + (1 if caller == self.start else 0)

    def _finish_round(self, executed_round: int) -> None:
        self.round = executed_round
        self.per_round_informed.append(self.ever_informed_count)


def init_simulation(
    spec: ProtocolSpec,
    n: int,
    start: int = 0,
    seed=None,
    crash_schedule: dict[int, int] | None = None,
    *,
    allow_self_calls: bool = True,
    keep_log: bool = False,
) -> SimulationState:
    """Build the round-0 state: only ``start`` is informed."""
    return SimulationState(
        spec,
        n,
        start,
        seed,
        crash_schedule,
        allow_self_calls=allow_self_calls,
        keep_log=keep_log,
    )


def is_complete(state: SimulationState) -> bool:
    """True iff every non-crashed node has been informed."""
    return state._live_uninformed == 0


def collect_intents(state: SimulationState) -> list[CallIntent]:
    """The round's calls before serialization, one per eligible caller.

    Random targets are drawn here, advancing the state RNG; within a
    round this runs exactly once, as the first step of execute_round.
    """
    callers, targets, kinds = state._collect_intent_arrays()
    return [
        CallIntent(int(c), int(t), _KIND_ENUM[k])
        for c, t, k in zip(callers, targets, kinds)
    ]


def apply_call(
    state: SimulationState, intent: CallIntent, serial_position: int
) -> CallRecord:
    """Apply one serialized call and return its record.

    Draws no randomness; the outcome is determined by the live state:
    uninformed target -> informed (caller keeps walking from the target's
    successor under the hybrid protocol); informed or stopped target ->
    encounter (hybrid callers consume budget and restart or stop);
    crashed target -> counted call with no informing and no budget use
    (walkers advance past it, random callers redraw next round).
    """
    caller, target, kind = intent.caller, intent.target, intent.kind
    record_round = state.round + 1
    state.total_calls += 1
    spec = state.spec
    target_status = state._status[target]

    if target_status == _CRASHED:
        outcome = _O_CRASHED
        state.crashed_target_calls += 1
        if isinstance(spec, Hybrid):
            if state._mode[caller] == _M_SEQ:
                state._next_target[caller] = (target + 1) % state.n
            # PendingRandom callers stay pending and redraw next round.
        elif isinstance(spec, Quasirandom):
            state._advance_list_caller(caller, target)
    elif target_status == _UNINFORMED:
        outcome = _O_INFORMED
        state.informing_calls += 1
        state._status[target] = _INFORMED
        state._informed_at[target] = record_round
        state._informer[target] = caller
        state.ever_informed_count += 1
        state._live_uninformed -= 1
        if isinstance(spec, Hybrid):
            # A freshly informed node opens with a random call; only the
            # starting node begins on its own successor run.
            state._mode[target] = _M_PENDING
            state._mode[caller] = _M_SEQ
            state._next_target[caller] = (target + 1) % state.n
        elif isinstance(spec, Quasirandom):
            state._advance_list_caller(caller, target)
            # The target picks its own list position at its first call.
        else:
            state._mode[target] = _M_PENDING
    else:
        outcome = _O_ALREADY
        state.encounter_calls += 1
        if isinstance(spec, Hybrid):
            state._encounters[caller] += 1
            if state._encounters[caller] >= state._budget_limit(caller):
                state._status[caller] = _STOPPED
                state._mode[caller] = _M_NONE
                state._next_target[caller] = -1
            else:
                state._mode[caller] = _M_PENDING
                state._next_target[caller] = -1
        elif isinstance(spec, Quasirandom):
            state._advance_list_caller(caller, target)

    record = CallRecord(
        round=record_round,
        caller=int(caller),
        target=int(target),
        kind=kind,
        outcome=_OUTCOME_ENUM[outcome],
        serial_position=serial_position,
    )
    if state.log is not None:
        state.log.append(record)
    return record


def _empty_round(state: SimulationState, executed_round: int) -> RoundReport:
    stalled = state._live_uninformed > 0
    state._finish_round(executed_round)
    return RoundReport(executed_round, 0, (), stalled)


def execute_round(state: SimulationState) -> RoundReport:
    """Execute one synchronous round (vectorized fast path).

    Crashes scheduled for this round take effect first; then intents are
    collected, serialized by a fresh random permutation, and applied.
    Produces the same records, state, and RNG consumption as the
    per-call reference path (_execute_round_reference).
    """
    executed_round = state.round + 1
    state._apply_crashes(executed_round)
    if state._live_uninformed == 0:
        # Crashes just completed the run; nobody needs to call.
        return _empty_round(state, executed_round)
    callers, targets, kinds = state._collect_intent_arrays()
    k = len(callers)
    if k == 0:
        return _empty_round(state, executed_round)
    order = state.rng.permutation(k)
    s_callers = callers[order]
    s_targets = targets[order]
    s_kinds = kinds[order]

    # Outcomes: targets crashed before the round stay crashed; among calls
    # to targets uninformed at round start, the first at each target (in
    # serial order) informs it, later ones find it already informed.
    t_status = state._status[s_targets]
    outcomes = np.full(k, _O_ALREADY, dtype=np.int8)
    outcomes[t_status == _CRASHED] = _O_CRASHED
    open_positions = np.nonzero(t_status == _UNINFORMED)[0]
    if len(open_positions):
        _, first = np.unique(s_targets[open_positions], return_index=True)
        outcomes[open_positions[first]] = _O_INFORMED

    informed_mask = outcomes == _O_INFORMED
    already_mask = outcomes == _O_ALREADY
    crashed_mask = outcomes == _O_CRASHED
    new_targets = s_targets[informed_mask]
    new_informers = s_callers[informed_mask]

    state.total_calls += k
    state.informing_calls += int(informed_mask.sum())
    state.encounter_calls += int(already_mask.sum())
    state.crashed_target_calls += int(crashed_mask.sum())

    state._status[new_targets] = _INFORMED
    state._informed_at[new_targets] = executed_round
    state._informer[new_targets] = new_informers
    state.ever_informed_count += len(new_targets)
    state._live_uninformed -= len(new_targets)

    spec = state.spec
    if isinstance(spec, Hybrid):
        # Freshly informed nodes open with a random call next round.
        state._mode[new_targets] = _M_PENDING

        # Each caller calls exactly once per round, so the outcome groups
        # partition the callers and the updates below are independent.
        ic = s_callers[informed_mask]
        state._mode[ic] = _M_SEQ
        state._next_target[ic] = (new_targets + 1) % state.n

        ac = s_callers[already_mask]
        bumped = state._encounters[ac] + 1
        state._encounters[ac] = bumped
        limits = state.stop_budget + (ac == state.start)
        stop = bumped >= limits
        stopped = ac[stop]
        state._status[stopped] = _STOPPED
        state._mode[stopped] = _M_NONE
        state._next_target[stopped] = -1
        pending = ac[~stop]
        state._mode[pending] = _M_PENDING
        state._next_target[pending] = -1

        cc = s_callers[crashed_mask]
        ct = s_targets[crashed_mask]
        walker = state._mode[cc] == _M_SEQ
        state._next_target[cc[walker]] = (ct[walker] + 1) % state.n
    elif isinstance(spec, Quasirandom):
        if state._independent_lists:
            state._list_index[callers] += 1
        else:
            state._next_target[callers] = (targets + 1) % state.n
    elif isinstance(spec, FullyRandomPush):
        state._mode[new_targets] = _M_PENDING

    if state.log is not None:
        for pos in range(k):
            state.log.append(
                CallRecord(
                    round=executed_round,
                    caller=int(s_callers[pos]),
                    target=int(s_targets[pos]),
                    kind=_KIND_ENUM[s_kinds[pos]],
                    outcome=_OUTCOME_ENUM[outcomes[pos]],
                    serial_position=pos,
                )
            )

    state._finish_round(executed_round)
    newly = tuple(int(t) for t in np.sort(new_targets))
    return RoundReport(executed_round, k, newly, False)


def _execute_round_reference(state: SimulationState) -> RoundReport:
    """Per-call reference implementation of execute_round.

    Collects intents, draws the same serialization permutation, and
    applies the calls one by one through apply_call.  Kept as an
    executable statement of the round semantics; tests assert it matches
    execute_round bit for bit.
    """
    executed_round = state.round + 1
    state._apply_crashes(executed_round)
    if state._live_uninformed == 0:
        return _empty_round(state, executed_round)
    intents = collect_intents(state)
    k = len(intents)
    if k == 0:
        return _empty_round(state, executed_round)
    order = state.rng.permutation(k)
    newly = []
    for position, intent_index in enumerate(order):
        record = apply_call(state, intents[int(intent_index)], position)
        if record.outcome is CallOutcome.INFORMED:
            newly.append(record.target)
    state._finish_round(executed_round)
    return RoundReport(executed_round, k, tuple(sorted(newly)), False)


def run(
    state: SimulationState,
    max_rounds: int | None = None,
    *,
    round_engine=execute_round,
) -> TraceSummary:
    """Execute rounds until completion, stall, or the round cap.

    Completion means every non-crashed node is informed; stall means
    uninformed non-crashed nodes remain but no caller is active (possible
    only with crashes or degenerate parameters).  The summary's
    completion_round is absent on stall and cap outcomes.
    """
    cap = default_round_cap(state.n) if max_rounds is None else max_rounds
    if cap < 1:
        raise ValueError(f"max_rounds must be >= 1, got {cap}")
    outcome = RUN_CAPPED
    completion_round = None
    while True:
        if is_complete(state):
            outcome = RUN_COMPLETED
            completion_round = state.round
            break
        if state.round >= cap:
            outcome = RUN_CAPPED
            break
        report = round_engine(state)
        if report.stalled:
            outcome = RUN_STALLED
            break
    return TraceSummary(
        n=state.n,
        outcome=outcome,
        completion_round=completion_round,
        rounds_executed=state.round,
        total_calls=state.total_calls,
        informing_calls=state.informing_calls,
        encounter_calls=state.encounter_calls,
        crashed_target_calls=state.crashed_target_calls,
        per_round_informed=tuple(state.per_round_informed),
    )
