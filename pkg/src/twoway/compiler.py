"""Compile a query algorithm plus a two-party gadget into a two-way machine.

Input words have the form x #^n y with |x| = |y| = n = p*m. The produced
machine form-checks the word classically, then replays the algorithm's
unitaries at the left end marker and simulates each oracle call by sweeping
the tape: an x-pass XORs x's bits blockwise into an m-bit cache register
(controlled on the index register), the y-pass flips the answer bit on block
i exactly when g(cache, y_i) = 1, and a second x-pass returns the cache to
zero. The final measurement happens at the left end marker and routes each
outcome to accept, reject, or a reset step that starts the next round.

The quantum register therefore has 2^m * k basis states (k = the algorithm's
register dimension) and the classical control needs O(t*n) states for t
oracle calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automata import ExactRunResult, StateSpace, TwoWayQcfa
from .boolfn import Gadget
from .errors import InputError, SpecError, UnsupportedStructureError
from .kernels import segment_pass
from .ops import (
    BRANCH_PRUNE,
    CacheFlipOp,
    CompleteMeasurement,
    GadgetFlipOp,
    IdentityOp,
    LiftedOp,
    Measurement,
    Op,
)
from .qquery import QueryAlgorithm, apply_oracle, validate_algorithm

__all__ = [
    "CompilationReport",
    "compile_query_to_qcfa",
    "run_compiled",
    "verify_segment_equivalence",
]

ACC = ("acc",)
REJ = ("rej",)


def _lift_measurement(meas: Measurement, cache_dim: int, k: int) -> Measurement:
    """Extend an algorithm measurement over the cache register: the outcome
    groups simply repeat in every cache block, so labels are unchanged."""
    if isinstance(meas, CompleteMeasurement):
        outcomes = {
            a: np.arange(cache_dim, dtype=np.int64) * k + a for a in range(k)
        }
        return Measurement(cache_dim * k, outcomes, name="complete-lifted")
    outcomes = {}
    for label, idx in meas.outcomes.items():
        outcomes[label] = np.concatenate(
            [idx + c * k for c in range(cache_dim)]
        )
    return Measurement(cache_dim * k, outcomes, name=f"{meas.name}-lifted")


def _measurement_labels(meas: Measurement, k: int):
    if isinstance(meas, CompleteMeasurement):
        return list(range(k))
    return list(meas.outcomes.keys())


@dataclass
class CompilationReport:
    """The produced machine plus the state accounting behind it.

    phase_table has one row per segment: oracle calls made in it, classical
    states per pass, and how many measurement outcomes continue to a later
    segment (each owns one reset state).
    """

    machine: TwoWayQcfa
    quantum_basis_count: int
    declared_states: int
    declared_formula: str
    phase_table: list
    n: int
    m: int
    p: int
    t: int
    time_bound: int                       # 8t(n+2) + 4(n+2)
    algorithm: QueryAlgorithm = field(repr=False, default=None)
    gadget: Gadget = field(repr=False, default=None)
    # simulation internals shared by the generic runner and the fast path
    lifted_segments: list = field(repr=False, default=None)
    gflip: np.ndarray = field(repr=False, default=None)
    k_alg: int = field(repr=False, default=0)
    cache_dim: int = field(repr=False, default=0)
    d_w: int = field(repr=False, default=0)


def compile_query_to_qcfa(alg: QueryAlgorithm, gadget: Gadget, n: int) -> CompilationReport:
    """Build a two-way machine for the lifted language of h∘g at side length n.

    alg decides h on p = alg.arity query bits; gadget g has width m; inputs
    are split as z_i = g(x-block i, y-block i) with n = p*m.
    """
    validate_algorithm(alg)
    m = gadget.width
    p = alg.arity
    if m < 1:
        raise InputError("gadget width must be >= 1")
    if n != p * m:
        raise InputError(f"side length {n} != arity {p} * gadget width {m}")

    layout = alg.layout
    k = layout.dim
    d_w = layout.work_dim
    p_pad = layout.index_dim
    cache_dim = 1 << m
    dim = cache_dim * k
    t = alg.total_calls

    gflip = np.array(gadget.table(), dtype=np.uint8)
    identity = IdentityOp(dim)

    # one cache-flip per x position, one controlled flip per (block, y value)
    xflip = [
        CacheFlipOp(cache_dim, p_pad, d_w, idx // m, 1 << (m - 1 - idx % m))
        for idx in range(n)
    ]
    flips_by_value = [
        tuple(int(c) for c in range(cache_dim) if gflip[c, v])
        for v in range(cache_dim)
    ]
    yflip = {
        (i0, v): GadgetFlipOp(cache_dim, p_pad, d_w, i0, flips_by_value[v])
        for i0 in range(p)
        for v in range(cache_dim)
    }

    lifted_segments = []
    for seg in alg.segments:
        ops = [
            identity if isinstance(u, IdentityOp) else LiftedOp(u, cache_dim)
            for u in seg.unitaries
        ]
        lifted_segments.append(
            (ops, _lift_measurement(seg.measurement, cache_dim, k), seg.decide)
        )

    nseg = len(alg.segments)
    continue_labels = []
    for si, seg in enumerate(alg.segments):
        labels = _measurement_labels(seg.measurement, k)
        continue_labels.append(
            [lb for lb in labels if seg.decide(lb).kind == "continue"]
        )

    pass_states = 5 * n + 4 + p * (cache_dim - 1)
    reset_total = sum(len(ls) for ls in continue_labels)
    declared = (3 * n + 1) + t * pass_states + sum(
        2 + len(ls) for ls in continue_labels
    ) + 2
    formula = (
        "(3n+1) + t*(5n+4+p*(2^m-1)) + sum_s(2+r_s) + 2"
        f" with n={n}, t={t}, p={p}, m={m}, segments={nseg}, resets={reset_total}"
    )
    time_bound = 8 * t * (n + 2) + 4 * (n + 2)

    phase_table = [{"phase": "form-check", "states": 3 * n + 1}]
    for si, seg in enumerate(alg.segments):
        phase_table.append({
            "segment": si,
            "calls": seg.calls,
            "pass_states": pass_states,
            "continue_labels": len(continue_labels[si]),
        })

    calls_of = [seg.calls for seg in alg.segments]
    rst_ops: dict = {}

    def lifted_reset(si, label) -> Op:
        op = rst_ops.get((si, label))
        if op is None:
            inner = alg.segments[si].decide(label).reset
            op = identity if inner is None else LiftedOp(inner, cache_dim)
            rst_ops[(si, label)] = op
        return op

    def theta(state, sym):
        tag = state[0]
        if tag == "u":
            return lifted_segments[state[1]][0][state[2]]
        if tag == "x1" or tag == "x2":
            if sym == "1":
                return xflip[state[3] - 1] if tag == "x2" else xflip[state[3]]
            return identity
        if tag == "y":
            _, si, ui, idx, pref = state
            if idx % m == m - 1 and sym in "01":
                return yflip[(idx // m, (pref << 1) | (sym == "1"))]
            return identity
        if tag == "meas":
            return lifted_segments[state[1]][1]
        if tag == "rst":
            return lifted_reset(state[1], state[2])
        return identity

    def step(state, sym):
        tag = state[0]
        if tag == "form":
            return _form_step(state, sym, n)
        if tag == "u":
            _, si, ui = state
            if ui < calls_of[si]:
                return ("x1", si, ui, 0), 1
            return ("meas", si), 0
        si, ui = state[1], state[2]
        if tag == "x1":
            if sym not in "01":
                return None
            idx = state[3]
            nxt = ("x1", si, ui, idx + 1) if idx + 1 < n else ("hash", si, ui, 0)
            return nxt, 1
        if tag == "hash":
            j = state[3]
            nxt = ("hash", si, ui, j + 1) if j + 1 < n else ("y", si, ui, 0, 0)
            return nxt, 1
        if tag == "y":
            idx, pref = state[3], state[4]
            if sym not in "01":
                return None
            bit = int(sym == "1")
            pref2 = 0 if idx % m == m - 1 else (pref << 1) | bit
            nxt = ("y", si, ui, idx + 1, pref2) if idx + 1 < n else ("wrap", si, ui)
            return nxt, 1
        if tag == "wrap":
            return ("x2", si, ui, 0), 1
        if tag == "x2":
            idx = state[3]
            nxt = ("x2", si, ui, idx + 1) if idx < n else ("ret", si, ui, 0)
            return nxt, 1
        if tag == "ret":
            j = state[3]
            nxt = ("ret", si, ui, j + 1) if j < 2 * n else ("u", si, ui + 1)
            return nxt, 1
        if tag == "rst":
            nxt_seg = alg.segments[si].decide(ui).next_segment
            return ("u", nxt_seg, 0), 0
        return None

    def step_measure(state, sym, label):
        if state[0] != "meas":
            return None
        si = state[1]
        d = alg.segments[si].decide(label)
        if d.kind == "accept":
            return ACC, 0
        if d.kind == "reject":
            return REJ, 0
        return ("rst", si, label), 0

    def halting(state):
        if state == ACC:
            return "accept"
        if state == REJ:
            return "reject"
        return None

    states = StateSpace(
        initial=("form", "x", 0),
        halting=halting,
        declared_bound=declared,
        bound_formula=formula,
    )
    machine = TwoWayQcfa(
        name=f"compiled[{alg.name}%{gadget.name}@{n}]",
        states=states,
        quantum_dim=dim,
        theta=theta,
        step=step,
        step_measure=step_measure,
        source={
            "generator": "compiled",
            "algorithm": alg.name,
            "gadget": gadget.name,
            "n": n,
        },
    )
    return CompilationReport(
        machine=machine,
        quantum_basis_count=dim,
        declared_states=declared,
        declared_formula=formula,
        phase_table=phase_table,
        n=n,
        m=m,
        p=p,
        t=t,
        time_bound=time_bound,
        algorithm=alg,
        gadget=gadget,
        lifted_segments=lifted_segments,
        gflip=gflip,
        k_alg=k,
        cache_dim=cache_dim,
        d_w=d_w,
    )


def _form_step(state, sym, n):
    """Deterministic well-formedness sweep: n bits, n hashes, n bits, $."""
    kind = state[1]
    if kind == "x":
        j = state[2]
        if sym == "¢" and j == 0:
            return ("form", "x", 0), 1
        if sym in "01":
            nxt = ("form", "x", j + 1) if j + 1 < n else ("form", "hash", 0)
            return nxt, 1
        return REJ, 0
    if kind == "hash":
        j = state[2]
        if sym == "#":
            nxt = ("form", "hash", j + 1) if j + 1 < n else ("form", "y", 0)
            return nxt, 1
        return REJ, 0
    if kind == "y":
        j = state[2]
        if sym in "01":
            nxt = ("form", "y", j + 1) if j + 1 < n else ("form", "end")
            return nxt, 1
        return REJ, 0
    if kind == "end":
        if sym == "$":
            return ("u", 0, 0), 1
        return REJ, 0
    return None


def _split_sides(report: CompilationReport, x: str, y: str):
    n = report.n
    if len(x) != n or len(y) != n:
        raise InputError(f"sides must have length {n}")
    if set(x) - {"0", "1"} or set(y) - {"0", "1"}:
        raise InputError("sides must be binary strings")
    xb = np.frombuffer(x.encode(), dtype=np.uint8) - ord("0")
    yv = np.array(
        [int(y[i0 * report.m : (i0 + 1) * report.m], 2) for i0 in range(report.p)],
        dtype=np.int64,
    )
    return xb, yv


def run_compiled(report: CompilationReport, x: str, y: str) -> ExactRunResult:
    """Exact branch evaluation of the compiled machine on x #^n y.

    Works segment-at-a-time on the quantum register alone: the classical
    walk of a well-formed input is the same for every branch, so time,
    census, and boundary crossings are reconstructed from closed forms that
    mirror the step-level runner exactly (validated against it in tests).
    branch_count tallies halting measurement outcomes, which may group finer
    or coarser than the step-level runner's merged branch count.
    """
    n, m, t = report.n, report.m, report.t
    xb, yv = _split_sides(report, x, y)
    gflip = report.gflip
    d_w = report.d_w
    seg_steps = 6 * n + 4

    psi0 = np.zeros(report.quantum_basis_count, dtype=np.complex128)
    psi0[0] = 1.0
    # per segment: psi bytes -> [weight, psi, steps, passes]
    pending: list[dict] = [dict() for _ in report.lifted_segments]

    def insert(si, w, psi, steps, passes):
        if w < BRANCH_PRUNE:
            return
        key = psi.tobytes()
        slot = pending[si].get(key)
        if slot is None:
            pending[si][key] = [w, psi, steps, passes]
        else:
            slot[0] += w
            slot[2] = max(slot[2], steps)
            slot[3] = max(slot[3], passes)

    insert(0, 1.0, psi0, 3 * n + 2, 0)

    accept_p = 0.0
    reject_p = 0.0
    t_acc = 0
    t_rej = 0
    cross_max = 0
    branch_count = 0
    visited = 3 * n + 1
    for si, (ops, meas, decide) in enumerate(report.lifted_segments):
        if not pending[si]:
            continue
        calls = len(ops) - 1
        visited += calls * seg_steps + 2          # pass states + final u + meas
        rst_hit = set()
        for w, psi, steps, passes in pending[si].values():
            psi = psi.copy()
            psi = ops[0].apply(psi)
            for ui in range(1, len(ops)):
                segment_pass(psi, xb, yv, m, d_w, gflip)
                psi = ops[ui].apply(psi)
            steps += calls * seg_steps + 2
            passes += calls
            crossings = 2 + 4 * passes
            for label, prob, collapsed in meas.branches(psi):
                wp = w * prob
                if wp < BRANCH_PRUNE:
                    continue   # below the step-level runner's pruning floor
                d = decide(label)
                if d.kind == "accept":
                    branch_count += 1
                    accept_p += wp
                    t_acc = max(t_acc, steps)
                    cross_max = max(cross_max, crossings)
                elif d.kind == "reject":
                    branch_count += 1
                    reject_p += wp
                    t_rej = max(t_rej, steps)
                    cross_max = max(cross_max, crossings)
                else:
                    rst_hit.add(label)
                    if d.reset is not None:
                        collapsed = LiftedOp(d.reset, report.cache_dim).apply(collapsed)
                    insert(d.next_segment, wp, collapsed, steps + 1, passes)
        visited += len(rst_hit)

    total = accept_p + reject_p
    if abs(total - 1.0) > 1e-6:
        raise SpecError(
            f"{report.machine.name}: terminal branch weights sum to {total}, "
            "lost probability mass exceeds the pruning budget"
        )
    return ExactRunResult(
        min(accept_p, 1.0), max(t_acc, t_rej), t_acc, t_rej, visited,
        branch_count, set(), None, True, cross_max,
    )


def verify_segment_equivalence(
    alg: QueryAlgorithm,
    report: CompilationReport,
    x: str,
    y: str,
    j: int,
) -> float:
    """Max amplitude deviation between the machine register and the
    algorithm register after j simulated oracle calls.

    Both sides are advanced along the canonical continue path: at every
    intermediate measurement the run follows a continuing outcome and its
    reset. The machine state is compared against (algorithm state) in the
    zero-cache block, zero everywhere else.
    """
    if j < 0 or j > alg.total_calls:
        raise InputError(f"segment index {j} outside [0, {alg.total_calls}]")
    n = report.n
    xb, yv = _split_sides(report, x, y)
    z = [
        report.gadget(x[i * report.m : (i + 1) * report.m],
                      y[i * report.m : (i + 1) * report.m])
        for i in range(report.p)
    ]
    k = report.k_alg

    phi = alg.initial_state()
    psi = np.zeros(report.quantum_basis_count, dtype=np.complex128)
    psi[0] = 1.0

    calls_done = 0
    si = 0
    while True:
        ops_m, meas_m, decide = report.lifted_segments[si]
        seg = alg.segments[si]
        for ui in range(len(ops_m)):
            if ui > 0:
                phi = apply_oracle(alg.layout, z, phi)
                segment_pass(psi, xb, yv, report.m, report.d_w, report.gflip)
                calls_done += 1
            phi = seg.unitaries[ui].apply(phi)
            psi = ops_m[ui].apply(psi)
            if calls_done == j:
                return _deviation(psi, phi, k)
        # j lies beyond this segment: cross its measurement canonically
        phi, psi, si = _canonical_continue(seg, meas_m, decide, phi, psi, k, report)


def _deviation(psi, phi, k) -> float:
    dev = float(np.abs(psi[:k] - phi).max())
    if psi.shape[0] > k:
        dev = max(dev, float(np.abs(psi[k:]).max()))
    return dev


def _canonical_continue(seg, meas_m, decide, phi, psi, k, report):
    """Pick the continuing outcome of largest probability and collapse both
    sides through it; fall back to the lowest continuing basis outcome when
    no continuing branch carries probability (possible for one-sided runs
    that already succeeded with certainty)."""
    best = None
    for label, prob, collapsed in seg.measurement.branches(phi):
        d = decide(label)
        if d.kind != "continue":
            continue
        if best is None or prob > best[1]:
            best = (label, prob, collapsed)
    if best is not None:
        label, _, phi2 = best
        d = decide(label)
        if d.reset is not None:
            phi2 = d.reset.apply(phi2)
        # machine side: same outcome of the lifted measurement
        for lb, _, collapsed_m in meas_m.branches(psi):
            if lb == label:
                psi2 = collapsed_m
                break
        else:
            raise SpecError("continuing outcome lost on the machine side")
        if d.reset is not None:
            psi2 = LiftedOp(d.reset, report.cache_dim).apply(psi2)
        return phi2, psi2, d.next_segment
    if not isinstance(seg.measurement, CompleteMeasurement):
        raise UnsupportedStructureError(
            "no continuing branch has probability mass and the measurement "
            "outcomes are not basis states"
        )
    for label in range(k):
        d = decide(label)
        if d.kind == "continue":
            phi2 = np.zeros(k, dtype=np.complex128)
            phi2[label] = 1.0
            if d.reset is not None:
                phi2 = d.reset.apply(phi2)
            psi2 = np.zeros(report.quantum_basis_count, dtype=np.complex128)
            psi2[label] = 1.0
            if d.reset is not None:
                psi2 = LiftedOp(d.reset, report.cache_dim).apply(psi2)
            return phi2, psi2, d.next_segment
    raise UnsupportedStructureError("no continuing outcome at this measurement")
