"""Two-way finite automata over {0,1,#}: deterministic, probabilistic, and
quantum-classical machines, their runners, and time-space accounting.

Tape model: the payload w sits between end markers as ¢ w $ at positions
0..len(w)+1. A machine with the circular flag set wraps from $ to ¢ on a
right move; otherwise running off either end is a structural error.

Time T of a run is its number of transitions (stationary moves count).
Space S is log2 of the declared classical state bound, plus the number of
qubits for quantum machines. The visited census counts distinct classical
states a transition was taken from, so a machine that halts immediately on
its first step has visited 1 state.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError, NonHaltingError, SpecError, UnsupportedStructureError
from .ops import IdentityOp, Measurement, Op, check_norm

LEFT_MARKER = "¢"
RIGHT_MARKER = "$"
PAYLOAD_SYMBOLS = ("0", "1", "#")
DEFAULT_CUTOFF = 10_000_000
CONFIG_NODE_CAP = 1_000_000

State = object


@dataclass(frozen=True)
class Tape:
    payload: str
    circular: bool = False

    def __post_init__(self):
        bad = set(self.payload) - set(PAYLOAD_SYMBOLS)
        if bad:
            raise InputError(f"symbols {sorted(bad)} outside the payload alphabet")

    @property
    def length(self) -> int:
        return len(self.payload) + 2

    def symbol(self, pos: int) -> str:
        if pos == 0:
            return LEFT_MARKER
        if pos == self.length - 1:
            return RIGHT_MARKER
        return self.payload[pos - 1]

    def move(self, pos: int, delta: int) -> int:
        if delta not in (-1, 0, 1):
            raise SpecError(f"illegal head move {delta}")
        new = pos + delta
        if new < 0:
            raise SpecError("head moved left of the left end marker")
        if new >= self.length:
            if self.circular and delta == 1:
                return 0
            raise SpecError("head moved right of the right end marker")
        return new


@dataclass(frozen=True)
class StateSpace:
    """Lazily generated classical state space with a declared size bound."""

    initial: State
    halting: Callable[[State], str | None]   # "accept" | "reject" | None
    declared_bound: int
    bound_formula: str

    def __post_init__(self):
        if self.declared_bound < 1:
            raise SpecError("declared state bound must be positive")


@dataclass(frozen=True)
class TwoWayDfa:
    name: str
    states: StateSpace
    step: Callable[[State, str], tuple[State, int]]
    circular: bool = False
    source: dict | None = field(default=None, compare=False)

    kind = "2dfa"
    qubits = 0.0


@dataclass(frozen=True)
class TwoWayPfa:
    """Transitions map (state, symbol) to a finite distribution of
    (probability, state, move) with exact rational probabilities summing to 1.

    one_shot marks machines that consume all randomness in one designated
    branching step (every other reachable transition is deterministic)."""

    name: str
    states: StateSpace
    step: Callable[[State, str], tuple[tuple[Fraction, State, int], ...]]
    circular: bool = False
    one_shot: bool = False
    source: dict | None = field(default=None, compare=False)

    kind = "2pfa"
    qubits = 0.0


@dataclass(frozen=True)
class TwoWayQcfa:
    """Classical control with a quantum register of dimension quantum_dim.

    theta(state, symbol) yields the quantum action of the step: a unitary Op
    or a Measurement. Unitary steps advance via step(state, symbol); a
    measurement outcome routes through step_measure(state, symbol, outcome).
    """

    name: str
    states: StateSpace
    quantum_dim: int
    theta: Callable[[State, str], Op | Measurement]
    step: Callable[[State, str], tuple[State, int]]
    step_measure: Callable[[State, str, object], tuple[State, int]]
    initial_quantum: int = 0
    circular: bool = True
    source: dict | None = field(default=None, compare=False)

    kind = "2qcfa"

    @property
    def qubits(self) -> float:
        return math.log2(self.quantum_dim)

    def initial_vector(self) -> np.ndarray:
        psi = np.zeros(self.quantum_dim, dtype=np.complex128)
        psi[self.initial_quantum] = 1.0
        return psi


# --- traces and reports -------------------------------------------------------


@dataclass
class RunTrace:
    outcome: str                       # accept | reject | cutoff
    steps: int
    visited: int                       # distinct transition-origin states
    final_state: State
    positions: list[int] | None = None
    accepted_bit: int | None = None    # 1/0 for halting runs
    origins: frozenset = frozenset()


@dataclass
class ExactRunResult:
    accept_probability: float | Fraction
    t_max: int
    t_max_accepting: int               # 0 when no branch accepts
    t_max_rejecting: int
    visited: int
    branch_count: int
    origin_states: set = field(default_factory=set)
    branch_traces: list[RunTrace] | None = None
    time_bounded: bool = True          # False: cyclic chain, no worst-case time
    crossings_max: int | None = None   # only when boundary regions were given


@dataclass
class CostReport:
    machine: str
    inputs_evaluated: int
    t_max: int
    t_max_accepting: int
    t_max_rejecting: int
    s_declared: float
    s_visited: float
    ts: float
    declared_bound: int
    visited_count: int

    @staticmethod
    def from_runs(machine, t_acc: int, t_rej: int, visited: set, inputs: int) -> "CostReport":
        t_max = max(t_acc, t_rej)
        bound = machine.states.declared_bound
        visited_count = len(visited)
        s_declared = machine.qubits + math.log2(bound)
        s_visited = machine.qubits + math.log2(max(1, visited_count))
        if s_visited > s_declared:
            raise SpecError(
                f"visited census {visited_count} exceeds the declared bound {bound}"
            )
        return CostReport(
            machine=machine.name,
            inputs_evaluated=inputs,
            t_max=t_max,
            t_max_accepting=t_acc,
            t_max_rejecting=t_rej,
            s_declared=s_declared,
            s_visited=s_visited,
            ts=t_max * s_declared,
            declared_bound=bound,
            visited_count=visited_count,
        )


def _auto_record(tape: Tape) -> bool:
    return tape.length <= 4096


# --- deterministic runner -----------------------------------------------------


def run_dfa(
    machine: TwoWayDfa,
    payload: str,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool | None = None,
) -> RunTrace:
    """Run to halt. A revisited (state, position) configuration means the
    deterministic machine loops forever and raises immediately."""
    tape = Tape(payload, machine.circular)
    record = _auto_record(tape) if record_positions is None else record_positions
    state = machine.states.initial
    pos = 0
    steps = 0
    origins: set = set()
    positions: list[int] | None = [0] if record else None
    seen: set = set()
    while True:
        halt = machine.states.halting(state)
        if halt is not None:
            return RunTrace(
                halt, steps, len(origins), state, positions,
                1 if halt == "accept" else 0, frozenset(origins),
            )
        config = (state, pos)
        if config in seen:
            raise NonHaltingError(
                f"{machine.name}: configuration repeats, machine cannot halt",
                configuration=config,
            )
        seen.add(config)
        if steps >= cutoff:
            raise NonHaltingError(
                f"{machine.name}: step cutoff {cutoff} exceeded", configuration=config
            )
        origins.add(state)
        sym = tape.symbol(pos)
        nxt = machine.step(state, sym)
        if nxt is None:
            raise SpecError(f"{machine.name}: undefined transition at {(state, sym)}")
        state, mv = nxt
        pos = tape.move(pos, mv)
        steps += 1
        if record:
            positions.append(pos)


# --- probabilistic runners ------------------------------------------------------


def _pfa_distribution(machine: TwoWayPfa, state: State, sym: str):
    dist = machine.step(state, sym)
    if dist is None:
        raise SpecError(f"{machine.name}: undefined transition at {(state, sym)}")
    total = sum((p for p, _, _ in dist), Fraction(0))
    if total != 1:
        raise SpecError(
            f"{machine.name}: probabilities at {(state, sym)} sum to {total}, not 1"
        )
    if any(p < 0 for p, _, _ in dist):
        raise SpecError(f"{machine.name}: negative probability at {(state, sym)}")
    return dist


def run_pfa_sample(
    machine: TwoWayPfa,
    payload: str,
    seed: int | random.Random = 0,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool | None = None,
) -> RunTrace:
    """One seeded trajectory."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    tape = Tape(payload, machine.circular)
    record = _auto_record(tape) if record_positions is None else record_positions
    state = machine.states.initial
    pos = 0
    steps = 0
    origins: set = set()
    positions: list[int] | None = [0] if record else None
    while True:
        halt = machine.states.halting(state)
        if halt is not None:
            return RunTrace(
                halt, steps, len(origins), state, positions,
                1 if halt == "accept" else 0, frozenset(origins),
            )
        if steps >= cutoff:
            raise NonHaltingError(
                f"{machine.name}: step cutoff {cutoff} exceeded",
                configuration=(state, pos),
            )
        origins.add(state)
        dist = _pfa_distribution(machine, state, tape.symbol(pos))
        if len(dist) == 1:
            _, state_next, mv = dist[0]
        else:
            r = rng.random()
            acc = 0.0
            state_next, mv = dist[-1][1], dist[-1][2]
            for p, s2, m2 in dist:
                acc += float(p)
                if r < acc:
                    state_next, mv = s2, m2
                    break
        state = state_next
        pos = tape.move(pos, mv)
        steps += 1
        if record:
            positions.append(pos)


def _pfa_deterministic_walk(machine, tape, state, pos, steps, origins, positions, cutoff):
    """Follow single-support transitions until halt or a branching step.
    Returns (kind, ...) where kind is 'halt' or 'branch'."""
    seen = set()
    while True:
        halt = machine.states.halting(state)
        if halt is not None:
            return ("halt", halt, state, steps)
        config = (state, pos)
        if config in seen:
            raise NonHaltingError(
                f"{machine.name}: deterministic segment repeats a configuration",
                configuration=config,
            )
        seen.add(config)
        if steps >= cutoff:
            raise NonHaltingError(
                f"{machine.name}: step cutoff {cutoff} exceeded", configuration=config
            )
        dist = _pfa_distribution(machine, state, tape.symbol(pos))
        if len(dist) > 1:
            return ("branch", dist, state, pos, steps)
        origins.add(state)
        _, state, mv = dist[0]
        pos = tape.move(pos, mv)
        steps += 1
        if positions is not None:
            positions.append(pos)


def _pfa_exact_one_shot(
    machine: TwoWayPfa, tape: Tape, cutoff: int, record: bool = False
) -> ExactRunResult:
    origins: set = set()
    traces: list[RunTrace] | None = [] if record else None
    prefix_positions: list[int] | None = [0] if record else None
    walk = _pfa_deterministic_walk(
        machine, tape, machine.states.initial, 0, 0, origins, prefix_positions, cutoff
    )
    if walk[0] == "halt":
        _, outcome, state, steps = walk
        p = Fraction(1) if outcome == "accept" else Fraction(0)
        if record:
            traces.append(
                RunTrace(outcome, steps, len(origins), state, prefix_positions,
                         1 if outcome == "accept" else 0)
            )
        return ExactRunResult(
            p, steps, steps if outcome == "accept" else 0,
            steps if outcome == "reject" else 0, len(origins), 1, origins, traces,
        )
    _, dist, state, pos, steps = walk
    origins.add(state)
    accept = Fraction(0)
    t_acc = 0
    t_rej = 0
    for p, s2, mv in dist:
        if p == 0:
            continue
        branch_pos = tape.move(pos, mv)
        branch_positions = prefix_positions + [branch_pos] if record else None
        tail = _pfa_deterministic_walk(
            machine, tape, s2, branch_pos, steps + 1, origins, branch_positions, cutoff
        )
        if tail[0] != "halt":
            raise SpecError(
                f"{machine.name}: one-shot annotation violated, second branching at {tail[3]}"
            )
        _, outcome, final_state, branch_steps = tail
        if outcome == "accept":
            accept += p
            t_acc = max(t_acc, branch_steps)
        else:
            t_rej = max(t_rej, branch_steps)
        if record:
            traces.append(
                RunTrace(outcome, branch_steps, len(origins), final_state,
                         branch_positions, 1 if outcome == "accept" else 0)
            )
    return ExactRunResult(
        accept, max(t_acc, t_rej), t_acc, t_rej, len(origins), len(dist), origins, traces
    )


def _pfa_exact_chain(machine: TwoWayPfa, tape: Tape, cutoff: int) -> ExactRunResult:
    """Absorbing-chain solve on the configuration graph.

    Acyclic graphs get an exact backward propagation; small cyclic graphs get
    rational Gaussian elimination; anything larger is refused.
    """
    start = (machine.states.initial, 0)
    configs: dict = {}
    order: list = []
    stack = [start]
    edges: dict = {}
    halting: dict = {}
    while stack:
        cfg = stack.pop()
        if cfg in configs:
            continue
        configs[cfg] = len(order)
        order.append(cfg)
        if len(order) > CONFIG_NODE_CAP:
            raise UnsupportedStructureError(
                f"{machine.name}: configuration graph exceeds {CONFIG_NODE_CAP} nodes"
            )
        state, pos = cfg
        halt = machine.states.halting(state)
        if halt is not None:
            halting[cfg] = halt
            continue
        dist = _pfa_distribution(machine, state, tape.symbol(pos))
        outs = []
        for p, s2, mv in dist:
            if p == 0:
                continue
            nxt = (s2, tape.move(pos, mv))
            outs.append((p, nxt))
            stack.append(nxt)
        edges[cfg] = outs

    # longest-path step counts only make sense without cycles; detect via DFS
    color: dict = {}
    acyclic = True
    def visit(cfg):
        nonlocal acyclic
        color[cfg] = 1
        for _, nxt in edges.get(cfg, ()):  # halting nodes have no edges
            c = color.get(nxt, 0)
            if c == 1:
                acyclic = False
            elif c == 0:
                visit(nxt)
        color[cfg] = 2

    import sys
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, len(order) * 2 + 100))
    try:
        visit(start)
    finally:
        sys.setrecursionlimit(old_limit)

    origins = {cfg[0] for cfg in order if cfg not in halting}
    if acyclic:
        accept_p: dict = {}
        t_long: dict = {}
        t_acc: dict = {}
        t_rej: dict = {}

        def solve(cfg):
            if cfg in accept_p:
                return
            halt = halting.get(cfg)
            if halt is not None:
                accept_p[cfg] = Fraction(1) if halt == "accept" else Fraction(0)
                t_long[cfg] = 0
                t_acc[cfg] = 0 if halt == "accept" else -1
                t_rej[cfg] = 0 if halt == "reject" else -1
                return
            total = Fraction(0)
            longest = 0
            la, lr = -1, -1
            for p, nxt in edges[cfg]:
                solve(nxt)
                total += p * accept_p[nxt]
                longest = max(longest, 1 + t_long[nxt])
                if t_acc[nxt] >= 0:
                    la = max(la, 1 + t_acc[nxt])
                if t_rej[nxt] >= 0:
                    lr = max(lr, 1 + t_rej[nxt])
            accept_p[cfg] = total
            t_long[cfg] = longest
            t_acc[cfg] = la
            t_rej[cfg] = lr

        sys.setrecursionlimit(max(old_limit, len(order) * 2 + 100))
        try:
            solve(start)
        finally:
            sys.setrecursionlimit(old_limit)
        return ExactRunResult(
            accept_p[start],
            t_long[start],
            max(0, t_acc[start]),
            max(0, t_rej[start]),
            len(origins),
            len(order),
            origins,
        )

    if len(order) > 2000:
        raise UnsupportedStructureError(
            f"{machine.name}: cyclic configuration graph with {len(order)} nodes "
            "is beyond the exact rational solve"
        )
    # x_cfg = sum p * x_next, absorbing accept = 1 / reject = 0
    index = {cfg: k for k, cfg in enumerate(order)}
    size = len(order)
    aug = [[Fraction(0)] * (size + 1) for _ in range(size)]
    for cfg, k in index.items():
        aug[k][k] = Fraction(1)
        halt = halting.get(cfg)
        if halt is not None:
            if halt == "accept":
                aug[k][size] = Fraction(1)
            continue
        for p, nxt in edges[cfg]:
            aug[k][index[nxt]] -= p
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise UnsupportedStructureError(
                f"{machine.name}: configuration chain is singular (machine may not halt)"
            )
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = aug[col][col]
        aug[col] = [v / inv for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    prob = aug[index[start]][size]
    # cyclic graphs have no finite worst-case run length, so the probability is
    # exact but the time fields are meaningless; mark them unbounded
    return ExactRunResult(
        prob, 0, 0, 0, len(origins), len(order), origins, None, time_bounded=False
    )


def pfa_exact_prob(
    machine: TwoWayPfa, payload: str, cutoff: int = DEFAULT_CUTOFF
) -> Fraction:
    """Exact rational acceptance probability."""
    return pfa_exact(machine, payload, cutoff).accept_probability


def pfa_exact(
    machine: TwoWayPfa,
    payload: str,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool = False,
) -> ExactRunResult:
    tape = Tape(payload, machine.circular)
    if machine.one_shot:
        return _pfa_exact_one_shot(machine, tape, cutoff, record_positions)
    if record_positions:
        raise UnsupportedStructureError(
            f"{machine.name}: per-branch trajectories need the one-shot annotation"
        )
    return _pfa_exact_chain(machine, tape, cutoff)


# --- quantum-classical runners --------------------------------------------------


def run_qcfa(
    machine: TwoWayQcfa,
    payload: str,
    mode: str = "exact",
    seed: int | random.Random = 0,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool | None = None,
) -> ExactRunResult | RunTrace:
    """Exact acceptance probability by measurement-branch enumeration, or a
    single sampled trajectory (mode="sample")."""
    if mode == "exact":
        return qcfa_exact(machine, payload, cutoff, record_positions)
    if mode == "sample":
        return qcfa_sample(machine, payload, seed, cutoff, record_positions)
    raise InputError(f"unknown mode {mode!r}")


def _qcfa_step_quantum(machine, state, sym, psi):
    action = machine.theta(state, sym)
    if action is None:
        raise SpecError(f"{machine.name}: no quantum action at {(state, sym)}")
    return action


def _region_cross(regions, owner: int, pos: int) -> tuple[int, int]:
    """Owner 0 = left party, 1 = right. Returns (new owner, crossings added)."""
    lo, hi = regions[owner]
    if lo <= pos <= hi:
        return owner, 0
    return 1 - owner, 1


def qcfa_exact(
    machine: TwoWayQcfa,
    payload: str,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool | None = None,
    regions: tuple[tuple[int, int], tuple[int, int]] | None = None,
) -> ExactRunResult:
    """Enumerate all measurement branches exactly.

    Branches with identical (classical state, head position, quantum state)
    evolve identically from that point on, so they are merged after every
    step; this keeps restart-style machines (measure, reset, retry) linear
    instead of exponential in the number of rounds. Weights below 1e-12 are
    pruned. With `regions` set, each branch also tracks transfers of control
    across the two ownership regions (for protocol-extraction accounting);
    merged branches at a common configuration always agree on the owner.

    record_positions keeps full per-branch head trajectories and disables
    merging; only use it on machines whose branching stays small.
    """
    tape = Tape(payload, machine.circular)
    record = (
        record_positions
        if record_positions is not None
        else (_auto_record(tape) and machine.quantum_dim <= 8)
    )
    origins: set = set()
    accept = 0.0
    total = 0.0
    t_acc = 0
    t_rej = 0
    branch_count = 0
    cross_max = 0 if regions is not None else None
    traces: list[RunTrace] | None = [] if record else None

    def initial_owner():
        return 0

    if record:
        # simple branching walker, full trajectories, no merging
        stack = [
            (1.0, machine.states.initial, 0, machine.initial_vector(), 0, [0],
             initial_owner(), 0)
        ]
        while stack:
            weight, state, pos, psi, steps, positions, owner, crossings = stack.pop()
            while True:
                halt = machine.states.halting(state)
                if halt is not None:
                    branch_count += 1
                    total += weight
                    if halt == "accept":
                        accept += weight
                        t_acc = max(t_acc, steps)
                    else:
                        t_rej = max(t_rej, steps)
                    if cross_max is not None:
                        cross_max = max(cross_max, crossings)
                    traces.append(
                        RunTrace(halt, steps, len(origins), state, positions,
                                 1 if halt == "accept" else 0)
                    )
                    break
                if steps >= cutoff:
                    raise NonHaltingError(
                        f"{machine.name}: step cutoff {cutoff} exceeded",
                        configuration=(state, pos),
                    )
                sym = tape.symbol(pos)
                action = _qcfa_step_quantum(machine, state, sym, psi)
                origins.add(state)
                if isinstance(action, Measurement):
                    for label, p, collapsed in action.branches(psi):
                        if weight * p < 1e-12:
                            continue
                        nxt = machine.step_measure(state, sym, label)
                        if nxt is None:
                            raise SpecError(
                                f"{machine.name}: no route for outcome {label!r} "
                                f"at {(state, sym)}"
                            )
                        s2, mv = nxt
                        p2 = tape.move(pos, mv)
                        o2, dc = (owner, 0)
                        if regions is not None:
                            o2, dc = _region_cross(regions, owner, p2)
                        stack.append(
                            (weight * p, s2, p2, collapsed, steps + 1,
                             positions + [p2], o2, crossings + dc)
                        )
                    break
                psi = action.apply(psi)
                if not isinstance(action, IdentityOp):
                    check_norm(psi, f"at {(state, sym)}")
                nxt = machine.step(state, sym)
                if nxt is None:
                    raise SpecError(
                        f"{machine.name}: undefined transition at {(state, sym)}"
                    )
                state, mv = nxt
                pos = tape.move(pos, mv)
                steps += 1
                positions.append(pos)
                if regions is not None:
                    owner, dc = _region_cross(regions, owner, pos)
                    crossings += dc
    else:
        # globally merged frontier, one step per iteration
        psi0 = machine.initial_vector()
        pending: dict = {}

        def insert(w, state, pos, psi, steps, owner, crossings):
            if w < 1e-12:
                return
            key = (state, pos, owner, psi.round(12).tobytes())
            prev = pending.get(key)
            if prev is None:
                pending[key] = (w, psi, steps, crossings)
            else:
                w0, psi_0, st0, cr0 = prev
                pending[key] = (w0 + w, psi_0, max(st0, steps), max(cr0, crossings))

        insert(1.0, machine.states.initial, 0, psi0, 0, initial_owner(), 0)
        while pending:
            key = next(iter(pending))
            state, pos, owner, _ = key
            weight, psi, steps, crossings = pending.pop(key)
            halt = machine.states.halting(state)
            if halt is not None:
                branch_count += 1
                total += weight
                if halt == "accept":
                    accept += weight
                    t_acc = max(t_acc, steps)
                else:
                    t_rej = max(t_rej, steps)
                if cross_max is not None:
                    cross_max = max(cross_max, crossings)
                continue
            if steps >= cutoff:
                raise NonHaltingError(
                    f"{machine.name}: step cutoff {cutoff} exceeded",
                    configuration=(state, pos),
                )
            sym = tape.symbol(pos)
            action = _qcfa_step_quantum(machine, state, sym, psi)
            origins.add(state)
            if isinstance(action, Measurement):
                for label, p, collapsed in action.branches(psi):
                    nxt = machine.step_measure(state, sym, label)
                    if nxt is None:
                        raise SpecError(
                            f"{machine.name}: no route for outcome {label!r} "
                            f"at {(state, sym)}"
                        )
                    s2, mv = nxt
                    p2 = tape.move(pos, mv)
                    o2, dc = (owner, 0)
                    if regions is not None:
                        o2, dc = _region_cross(regions, owner, p2)
                    insert(weight * p, s2, p2, collapsed, steps + 1, o2, crossings + dc)
            else:
                psi2 = action.apply(psi)
                if not isinstance(action, IdentityOp):
                    check_norm(psi2, f"at {(state, sym)}")
                nxt = machine.step(state, sym)
                if nxt is None:
                    raise SpecError(
                        f"{machine.name}: undefined transition at {(state, sym)}"
                    )
                s2, mv = nxt
                p2 = tape.move(pos, mv)
                o2, dc = (owner, 0)
                if regions is not None:
                    o2, dc = _region_cross(regions, owner, p2)
                insert(weight, s2, p2, psi2, steps + 1, o2, crossings + dc)

    if abs(total - 1.0) > 1e-6:
        raise SpecError(
            f"{machine.name}: terminal branch weights sum to {total}, "
            "lost probability mass exceeds the pruning budget"
        )
    return ExactRunResult(
        min(accept, 1.0), max(t_acc, t_rej), t_acc, t_rej, len(origins),
        branch_count, origins, traces, True, cross_max,
    )


def qcfa_sample(
    machine: TwoWayQcfa,
    payload: str,
    seed: int | random.Random = 0,
    cutoff: int = DEFAULT_CUTOFF,
    record_positions: bool | None = None,
) -> RunTrace:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    tape = Tape(payload, machine.circular)
    record = _auto_record(tape) if record_positions is None else record_positions
    state = machine.states.initial
    pos = 0
    steps = 0
    psi = machine.initial_vector()
    origins: set = set()
    positions: list[int] | None = [0] if record else None
    while True:
        halt = machine.states.halting(state)
        if halt is not None:
            return RunTrace(
                halt, steps, len(origins), state, positions,
                1 if halt == "accept" else 0, frozenset(origins),
            )
        if steps >= cutoff:
            raise NonHaltingError(
                f"{machine.name}: step cutoff {cutoff} exceeded", configuration=(state, pos)
            )
        sym = tape.symbol(pos)
        action = _qcfa_step_quantum(machine, state, sym, psi)
        origins.add(state)
        if isinstance(action, Measurement):
            outcomes = list(action.branches(psi))
            r = rng.random()
            acc = 0.0
            label, chosen = outcomes[-1][0], outcomes[-1][2]
            for lab, p, collapsed in outcomes:
                acc += p
                if r < acc:
                    label, chosen = lab, collapsed
                    break
            psi = chosen
            state, mv = machine.step_measure(state, sym, label)
        else:
            psi = action.apply(psi)
            if not isinstance(action, IdentityOp):
                check_norm(psi, f"at {(state, sym)}")
            state, mv = machine.step(state, sym)
        pos = tape.move(pos, mv)
        steps += 1
        if record:
            positions.append(pos)


# --- aggregate accounting --------------------------------------------------------


def cost_report(machine, payloads: Iterable[str], cutoff: int = DEFAULT_CUTOFF) -> CostReport:
    """Measure worst-case time over the given inputs (all branches of exact
    runs for stochastic machines) and the visited-state census."""
    t_acc = 0
    t_rej = 0
    visited: set = set()
    count = 0
    for payload in payloads:
        count += 1
        if machine.kind == "2dfa":
            trace = run_dfa(machine, payload, cutoff, record_positions=False)
            if trace.outcome == "accept":
                t_acc = max(t_acc, trace.steps)
            else:
                t_rej = max(t_rej, trace.steps)
            visited |= trace.origins
        elif machine.kind == "2pfa":
            res = pfa_exact(machine, payload, cutoff)
            if not res.time_bounded:
                raise UnsupportedStructureError(
                    f"{machine.name}: run time is unbounded on {payload!r}, "
                    "time-space accounting refused"
                )
            t_acc = max(t_acc, res.t_max_accepting)
            t_rej = max(t_rej, res.t_max_rejecting)
            visited |= res.origin_states
        elif machine.kind == "2qcfa":
            res = qcfa_exact(machine, payload, cutoff, record_positions=False)
            t_acc = max(t_acc, res.t_max_accepting)
            t_rej = max(t_rej, res.t_max_rejecting)
            visited |= res.origin_states
        else:
            raise InputError(f"unknown machine kind {machine.kind!r}")
    return CostReport.from_runs(machine, t_acc, t_rej, visited, count)


# --- explicit (table-backed) machines --------------------------------------------


def dfa_from_table(
    name: str,
    table: dict[tuple[State, str], tuple[State, int]],
    initial: State,
    accept: set,
    reject: set,
    circular: bool = False,
) -> TwoWayDfa:
    states = {initial} | accept | reject
    for (s, _), (s2, _) in table.items():
        states.add(s)
        states.add(s2)
    accept = frozenset(accept)
    reject = frozenset(reject)
    if accept & reject:
        raise SpecError("accepting and rejecting states overlap")

    def halting(s):
        if s in accept:
            return "accept"
        if s in reject:
            return "reject"
        return None

    space = StateSpace(initial, halting, len(states), str(len(states)))
    return TwoWayDfa(
        name,
        space,
        lambda s, sym: table.get((s, sym)),
        circular,
        source={
            "kind": "2dfa",
            "explicit": True,
            "initial": initial,
            "accept": sorted(accept, key=repr),
            "reject": sorted(reject, key=repr),
            "table": table,
            "circular": circular,
        },
    )


def pfa_from_table(
    name: str,
    table: dict[tuple[State, str], list[tuple[Fraction, State, int]]],
    initial: State,
    accept: set,
    reject: set,
    circular: bool = False,
    one_shot: bool = False,
) -> TwoWayPfa:
    states = {initial} | set(accept) | set(reject)
    for (s, _), dist in table.items():
        states.add(s)
        for _, s2, _ in dist:
            states.add(s2)
    accept = frozenset(accept)
    reject = frozenset(reject)
    if accept & reject:
        raise SpecError("accepting and rejecting states overlap")

    def halting(s):
        if s in accept:
            return "accept"
        if s in reject:
            return "reject"
        return None

    space = StateSpace(initial, halting, len(states), str(len(states)))
    return TwoWayPfa(
        name,
        space,
        lambda s, sym: tuple(table.get((s, sym), ())) or None,
        circular,
        one_shot,
        source={
            "kind": "2pfa",
            "explicit": True,
            "initial": initial,
            "accept": sorted(accept, key=repr),
            "reject": sorted(reject, key=repr),
            "table": table,
            "circular": circular,
            "one_shot": one_shot,
        },
    )
