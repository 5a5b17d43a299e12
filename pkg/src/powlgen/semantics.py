"""Executable semantics: direct trace enumeration for workflow models,
the Petri net token game, and workflow-net soundness checking.

Both trace enumerators are deliberately independent implementations of the
same language so each can serve as an oracle for the other.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

from .powl import Activity, Loop, PartialOrder, PowlNode, Silent, Xor, transitive_closure

Trace = tuple[str, ...]
Marking = dict[str, int]

DEFAULT_TRACE_CAP = 100_000
DEFAULT_STATE_BUDGET = 200_000


class TraceCapExceeded(RuntimeError):
    """The model's trace set outgrew the cap; it is too large for oracle use."""


class StateBudgetExceeded(RuntimeError):
    pass


class NotEnabledError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    tid: str
    label: str | None  # None for silent transitions


@dataclass(frozen=True)
class PetriNet:
    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    arcs: tuple[tuple[str, str], ...]  # (source id, target id)
    initial_place: str
    final_place: str


@dataclass(frozen=True)
class SoundnessReport:
    option_to_complete: bool
    proper_completion: bool
    dead_transitions: frozenset[str]
    explored_states: int
    truncated: bool

    @property
    def sound(self) -> bool:
        return (
            self.option_to_complete
            and self.proper_completion
            and not self.dead_transitions
        )


def validate_net(net: PetriNet) -> list[str]:
    """Workflow-net shape violations; empty list means the net is well-formed."""
    problems: list[str] = []
    places = set(net.places)
    tids = {t.tid for t in net.transitions}
    if len(places) != len(net.places):
        problems.append("duplicate place ids")
    if len(tids) != len(net.transitions):
        problems.append("duplicate transition ids")
    if places & tids:
        problems.append(f"ids used for both places and transitions: {sorted(places & tids)}")
    if net.initial_place not in places:
        problems.append(f"initial place {net.initial_place!r} does not exist")
    if net.final_place not in places:
        problems.append(f"final place {net.final_place!r} does not exist")
    for src, tgt in net.arcs:
        if src in places and tgt in tids:
            continue
        if src in tids and tgt in places:
            continue
        problems.append(f"arc ({src!r}, {tgt!r}) is not place-transition bipartite")
    if problems:
        return problems
    if any(tgt == net.initial_place for _, tgt in net.arcs):
        problems.append("initial place has incoming arcs")
    if any(src == net.final_place for src, _ in net.arcs):
        problems.append("final place has outgoing arcs")
    forward = _reachable(net.initial_place, net.arcs)
    backward = _reachable(net.final_place, [(t, s) for s, t in net.arcs])
    for node in list(net.places) + [t.tid for t in net.transitions]:
        if node not in forward or node not in backward:
            problems.append(f"node {node!r} is not on a path from initial to final place")
    return problems


def _reachable(start: str, arcs) -> set[str]:
    succ: dict[str, list[str]] = {}
    for src, tgt in arcs:
        succ.setdefault(src, []).append(tgt)
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _index(net: PetriNet):
    pre: dict[str, list[str]] = {t.tid: [] for t in net.transitions}
    post: dict[str, list[str]] = {t.tid: [] for t in net.transitions}
    for src, tgt in net.arcs:
        if tgt in pre:
            pre[tgt].append(src)
        if src in post:
            post[src].append(tgt)
    labels = {t.tid: t.label for t in net.transitions}
    return pre, post, labels


def enabled(net: PetriNet, marking: Marking) -> set[str]:
    pre, _, _ = _index(net)
    out = set()
    for t in net.transitions:
        if all(marking.get(p, 0) >= 1 for p in pre[t.tid]):
            out.add(t.tid)
    return out


def fire(net: PetriNet, marking: Marking, tid: str) -> Marking:
    pre, post, _ = _index(net)
    if tid not in pre:
        raise NotEnabledError(f"unknown transition {tid!r}")
    if not all(marking.get(p, 0) >= 1 for p in pre[tid]):
        raise NotEnabledError(f"transition {tid!r} is not enabled")
    new = dict(marking)
    for p in pre[tid]:
        new[p] -= 1
        if new[p] == 0:
            del new[p]
    for p in post[tid]:
        new[p] = new.get(p, 0) + 1
    return new


def _freeze(marking: Marking) -> tuple[tuple[str, int], ...]:
    return tuple(sorted((p, c) for p, c in marking.items() if c > 0))


def powl_traces(model: PowlNode, max_len: int, cap: int = DEFAULT_TRACE_CAP) -> set[Trace]:
    """Visible-label traces of length <= max_len, by the recursive definition.

    Activities emit their label; silent steps emit nothing; choices take the
    union; a loop runs do (redo do)*; partial-order children each contribute
    one full trace, interleaved freely except that an ordered child finishes
    before its successors start.
    """
    result = _traces(model, max_len, cap)
    return result


def _guard(traces: set[Trace], cap: int) -> set[Trace]:
    if len(traces) > cap:
        raise TraceCapExceeded(f"trace set exceeds cap of {cap}")
    return traces


def _traces(model: PowlNode, max_len: int, cap: int) -> set[Trace]:
    match model:
        case Activity(label):
            return {(label,)} if max_len >= 1 else set()
        case Silent():
            return {()}
        case Xor(children):
            out: set[Trace] = set()
            for child in children:
                out |= _traces(child, max_len, cap)
                _guard(out, cap)
            return out
        case Loop(do, redo):
            do_traces = _traces(do, max_len, cap)
            redo_traces = _traces(redo, max_len, cap)
            acc = {t for t in do_traces if len(t) <= max_len}
            frontier = set(acc)
            while frontier:
                fresh: set[Trace] = set()
                for base in frontier:
                    for r in redo_traces:
                        if len(base) + len(r) > max_len:
                            continue
                        for d in do_traces:
                            ext = base + r + d
                            if len(ext) <= max_len and ext not in acc:
                                fresh.add(ext)
                acc |= fresh
                _guard(acc, cap)
                frontier = fresh
            return acc
        case PartialOrder(children, order):
            n = len(children)
            closed = transitive_closure(order, n)
            preds = [[u for u in range(n) if (u, v) in closed] for v in range(n)]
            child_sets = [sorted(_traces(c, max_len, cap)) for c in children]
            out = set()
            for combo in product(*child_sets):
                if sum(len(t) for t in combo) > max_len:
                    continue
                out |= _interleave(combo, preds)
                _guard(out, cap)
            return out
    raise TypeError(f"not a model node: {model!r}")


def _interleave(traces: tuple[Trace, ...], preds: list[list[int]]) -> set[Trace]:
    """All merges of the given traces where every symbol of a predecessor's
    trace comes before every symbol of a successor's trace."""
    n = len(traces)
    lengths = [len(t) for t in traces]
    total = sum(lengths)
    out: set[Trace] = set()
    prefix: list[str] = []

    def step(counts: list[int]) -> None:
        if len(prefix) == total:
            out.add(tuple(prefix))
            return
        for v in range(n):
            if counts[v] >= lengths[v]:
                continue
            if any(counts[u] < lengths[u] for u in preds[v]):
                continue
            prefix.append(traces[v][counts[v]])
            counts[v] += 1
            step(counts)
            counts[v] -= 1
            prefix.pop()

    step([0] * n)
    return out


def pn_traces(
    net: PetriNet, max_len: int, state_budget: int = DEFAULT_STATE_BUDGET
) -> set[Trace]:
    """Visible-label sequences of complete runs (initial token to exactly one
    token on the final place), silent transitions projected out."""
    pre, post, labels = _index(net)
    tids = [t.tid for t in net.transitions]
    final = ((net.final_place, 1),)
    start = (_freeze({net.initial_place: 1}), ())
    seen = {start}
    queue = deque([start])
    results: set[Trace] = set()
    explored = 0
    while queue:
        frozen, trace = queue.popleft()
        explored += 1
        if explored > state_budget:
            raise StateBudgetExceeded(
                f"exceeded state budget of {state_budget} while enumerating traces"
            )
        if frozen == final:
            results.add(trace)
        marking = dict(frozen)
        for tid in tids:
            if not all(marking.get(p, 0) >= 1 for p in pre[tid]):
                continue
            new = dict(marking)
            for p in pre[tid]:
                new[p] -= 1
                if new[p] == 0:
                    del new[p]
            for p in post[tid]:
                new[p] = new.get(p, 0) + 1
            label = labels[tid]
            new_trace = trace + (label,) if label is not None else trace
            if len(new_trace) > max_len:
                continue
            state = (_freeze(new), new_trace)
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return results


def check_soundness(
    net: PetriNet, state_budget: int = DEFAULT_STATE_BUDGET
) -> SoundnessReport:
    """Explore the reachability graph from the initial marking and decide the
    classic workflow-net soundness conditions."""
    pre, post, _ = _index(net)
    tids = [t.tid for t in net.transitions]
    final = ((net.final_place, 1),)
    start = _freeze({net.initial_place: 1})
    seen = {start}
    queue = deque([start])
    edges: dict[tuple, list[tuple]] = {}
    ever_enabled: set[str] = set()
    truncated = False
    while queue:
        frozen = queue.popleft()
        marking = dict(frozen)
        successors = []
        for tid in tids:
            if not all(marking.get(p, 0) >= 1 for p in pre[tid]):
                continue
            ever_enabled.add(tid)
            new = dict(marking)
            for p in pre[tid]:
                new[p] -= 1
                if new[p] == 0:
                    del new[p]
            for p in post[tid]:
                new[p] = new.get(p, 0) + 1
            successors.append(_freeze(new))
        edges[frozen] = successors
        for state in successors:
            if state not in seen:
                if len(seen) >= state_budget:
                    truncated = True
                    continue
                seen.add(state)
                queue.append(state)

    # Backward sweep: which explored markings can still reach the final one.
    reverse: dict[tuple, list[tuple]] = {m: [] for m in edges}
    for src, targets in edges.items():
        for tgt in targets:
            if tgt in reverse:
                reverse[tgt].append(src)
    can_finish: set[tuple] = set()
    if final in edges:
        can_finish.add(final)
        back = deque([final])
        while back:
            node = back.popleft()
            for prev in reverse[node]:
                if prev not in can_finish:
                    can_finish.add(prev)
                    back.append(prev)

    explored = list(edges)
    option_to_complete = all(m in can_finish for m in explored)
    proper_completion = not any(
        dict(m).get(net.final_place, 0) >= 1 and m != final for m in explored
    )
    dead = frozenset(t for t in tids if t not in ever_enabled)
    return SoundnessReport(
        option_to_complete=option_to_complete,
        proper_completion=proper_completion,
        dead_transitions=dead,
        explored_states=len(explored),
        truncated=truncated,
    )
