"""Translations out of the workflow-model algebra: Petri nets (workflow-net
shape), BPMN graphs, and flat render graphs for diagram display.

Every fragment of the Petri net translation exposes an entry and an exit
place; ids are derived from the node's tree path so identical models always
produce identical ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .powl import Activity, Loop, PartialOrder, PowlNode, Silent, Xor, validate
from .semantics import PetriNet, Transition


class InvalidModelError(ValueError):
    pass


@dataclass(frozen=True)
class BpmnNode:
    node_id: str
    kind: str  # start-event | end-event | task | exclusive-gateway | parallel-gateway
    label: str = ""


@dataclass(frozen=True)
class BpmnFlow:
    flow_id: str
    source: str
    target: str


@dataclass(frozen=True)
class BpmnGraph:
    nodes: tuple[BpmnNode, ...]
    flows: tuple[BpmnFlow, ...]


@dataclass(frozen=True)
class RenderNode:
    node_id: str
    kind: str
    label: str
    rank: int


@dataclass(frozen=True)
class RenderGraph:
    nodes: tuple[RenderNode, ...]
    edges: tuple[tuple[str, str], ...]


def _check_valid(model: PowlNode) -> None:
    violations = validate(model)
    if violations:
        detail = "; ".join(f"{v.path}: {v.message}" for v in violations)
        raise InvalidModelError(f"model fails validation: {detail}")


def powl_to_pn(model: PowlNode) -> PetriNet:
    """Recursive workflow-net construction, one entry/exit place pair per
    fragment. The net is silent-transition heavy but language-equivalent to
    the model by design (see the trace oracles in semantics)."""
    _check_valid(model)
    places: list[str] = []
    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []

    def place(pid: str) -> str:
        places.append(pid)
        return pid

    def trans(tid: str, label: str | None = None) -> str:
        transitions.append(Transition(tid, label))
        return tid

    def build(node: PowlNode, path: str) -> tuple[str, str]:
        entry = place(f"{path}_entry")
        exit_ = place(f"{path}_exit")
        match node:
            case Activity(label):
                t = trans(f"{path}_t", label)
                arcs.append((entry, t))
                arcs.append((t, exit_))
            case Silent():
                t = trans(f"{path}_t")
                arcs.append((entry, t))
                arcs.append((t, exit_))
            case Xor(children):
                for i, child in enumerate(children):
                    c_entry, c_exit = build(child, f"{path}.{i}")
                    t_in = trans(f"{path}_tin{i}")
                    t_out = trans(f"{path}_tout{i}")
                    arcs.extend([(entry, t_in), (t_in, c_entry), (c_exit, t_out), (t_out, exit_)])
            case Loop(do, redo):
                do_entry, do_exit = build(do, f"{path}.0")
                redo_entry, redo_exit = build(redo, f"{path}.1")
                mid = place(f"{path}_mid")
                t_enter = trans(f"{path}_tenter")
                t_mid = trans(f"{path}_tmid")
                t_exit = trans(f"{path}_texit")
                t_redo = trans(f"{path}_tredo")
                t_back = trans(f"{path}_tback")
                arcs.extend(
                    [
                        (entry, t_enter),
                        (t_enter, do_entry),
                        (do_exit, t_mid),
                        (t_mid, mid),
                        (mid, t_exit),
                        (t_exit, exit_),
                        (mid, t_redo),
                        (t_redo, redo_entry),
                        (redo_exit, t_back),
                        (t_back, entry),
                    ]
                )
            case PartialOrder(children, order):
                edges = sorted(order)
                t_split = trans(f"{path}_tsplit")
                t_join = trans(f"{path}_tjoin")
                arcs.append((entry, t_split))
                arcs.append((t_join, exit_))
                order_places = {
                    (u, v): place(f"{path}_ord{u}_{v}") for u, v in edges
                }
                for i, child in enumerate(children):
                    c_entry, c_exit = build(child, f"{path}.{i}")
                    go = place(f"{path}_go{i}")
                    done = place(f"{path}_done{i}")
                    t_in = trans(f"{path}_tin{i}")
                    t_out = trans(f"{path}_tout{i}")
                    arcs.extend([(t_split, go), (go, t_in), (t_in, c_entry)])
                    arcs.extend([(c_exit, t_out), (t_out, done), (done, t_join)])
                    for u, v in edges:
                        if v == i:
                            arcs.append((order_places[(u, v)], t_in))
                        if u == i:
                            arcs.append((t_out, order_places[(u, v)]))
            case _:
                raise TypeError(f"not a model node: {node!r}")
        return entry, exit_

    root_entry, root_exit = build(model, "n")
    initial = root_entry
    # A loop at the root feeds tokens back into its entry place, which a
    # workflow net's source place must not have; prepend a fresh source.
    if any(tgt == root_entry for _, tgt in arcs):
        initial = place("source")
        t_start = trans("source_t")
        arcs.insert(0, (initial, t_start))
        arcs.insert(1, (t_start, root_entry))
    return PetriNet(
        places=tuple(places),
        transitions=tuple(transitions),
        arcs=tuple(arcs),
        initial_place=initial,
        final_place=root_exit,
    )


def powl_to_bpmn(model: PowlNode) -> BpmnGraph:
    """Start event -> recursive fragment -> end event, with exclusive
    gateways for choices/loops and parallel gateways for partial orders.
    Pass-through gateways left over by silent steps or trivial orders are
    removed by the cleanup pass."""
    _check_valid(model)
    nodes: list[BpmnNode] = []
    flows: list[BpmnFlow] = []
    counter = [0]

    def add_node(node_id: str, kind: str, label: str = "") -> str:
        nodes.append(BpmnNode(node_id, kind, label))
        return node_id

    def flow(source: str, target: str) -> None:
        counter[0] += 1
        flows.append(BpmnFlow(f"flow_{counter[0]}", source, target))

    def build(node: PowlNode, path: str) -> tuple[str, str]:
        """Returns (first node id, last node id) of the fragment."""
        match node:
            case Activity(label):
                task = add_node(f"{path}_task", "task", label)
                return task, task
            case Silent():
                g_in = add_node(f"{path}_pass_in", "exclusive-gateway")
                g_out = add_node(f"{path}_pass_out", "exclusive-gateway")
                flow(g_in, g_out)
                return g_in, g_out
            case Xor(children):
                split = add_node(f"{path}_split", "exclusive-gateway")
                join = add_node(f"{path}_join", "exclusive-gateway")
                for i, child in enumerate(children):
                    first, last = build(child, f"{path}.{i}")
                    flow(split, first)
                    flow(last, join)
                return split, join
            case Loop(do, redo):
                join = add_node(f"{path}_join", "exclusive-gateway")
                split = add_node(f"{path}_split", "exclusive-gateway")
                do_first, do_last = build(do, f"{path}.0")
                redo_first, redo_last = build(redo, f"{path}.1")
                flow(join, do_first)
                flow(do_last, split)
                flow(split, redo_first)
                flow(redo_last, join)
                return join, split
            case PartialOrder(children, order):
                edges = sorted(order)
                preds = {v: [u for u, w in edges if w == v] for v in range(len(children))}
                succs = {u: [v for w, v in edges if w == u] for u in range(len(children))}
                split = add_node(f"{path}_split", "parallel-gateway")
                join = add_node(f"{path}_joinall", "parallel-gateway")
                entries: dict[int, str] = {}
                exits: dict[int, str] = {}
                for i, child in enumerate(children):
                    first, last = build(child, f"{path}.{i}")
                    if preds[i]:
                        merge = add_node(f"{path}_merge{i}", "parallel-gateway")
                        flow(merge, first)
                        entries[i] = merge
                    else:
                        entries[i] = first
                    if succs[i]:
                        fan = add_node(f"{path}_fan{i}", "parallel-gateway")
                        flow(last, fan)
                        exits[i] = fan
                    else:
                        exits[i] = last
                    flow(split, entries[i])
                    flow(exits[i], join)
                for u, v in edges:
                    flow(exits[u], entries[v])
                return split, join
            case _:
                raise TypeError(f"not a model node: {node!r}")

    start = add_node("start", "start-event")
    end = add_node("end", "end-event")
    first, last = build(model, "n")
    flow(start, first)
    flow(last, end)
    graph = BpmnGraph(tuple(nodes), tuple(flows))
    return _cleanup_gateways(graph)


def _cleanup_gateways(graph: BpmnGraph) -> BpmnGraph:
    """Remove gateways with exactly one incoming and one outgoing flow by
    fusing the two flows, until none remain."""
    nodes = {n.node_id: n for n in graph.nodes}
    flows = {f.flow_id: f for f in graph.flows}
    while True:
        removable = None
        for node_id in sorted(nodes):
            node = nodes[node_id]
            if not node.kind.endswith("-gateway"):
                continue
            incoming = [f for f in flows.values() if f.target == node_id]
            outgoing = [f for f in flows.values() if f.source == node_id]
            if len(incoming) == 1 and len(outgoing) == 1:
                removable = (node_id, incoming[0], outgoing[0])
                break
        if removable is None:
            break
        node_id, inc, out = removable
        del nodes[node_id]
        del flows[out.flow_id]
        flows[inc.flow_id] = BpmnFlow(inc.flow_id, inc.source, out.target)
    kept_nodes = tuple(n for n in graph.nodes if n.node_id in nodes)
    kept_flows = tuple(flows[f.flow_id] for f in graph.flows if f.flow_id in flows)
    return BpmnGraph(kept_nodes, kept_flows)


def validate_bpmn(graph: BpmnGraph) -> list[str]:
    """Structural sanity check for generated BPMN graphs."""
    problems: list[str] = []
    ids = [n.node_id for n in graph.nodes]
    if len(set(ids)) != len(ids):
        problems.append("duplicate node ids")
    by_id = {n.node_id: n for n in graph.nodes}
    starts = [n for n in graph.nodes if n.kind == "start-event"]
    ends = [n for n in graph.nodes if n.kind == "end-event"]
    if len(starts) != 1:
        problems.append(f"expected exactly one start event, found {len(starts)}")
    if len(ends) != 1:
        problems.append(f"expected exactly one end event, found {len(ends)}")
    indeg: dict[str, int] = {i: 0 for i in ids}
    outdeg: dict[str, int] = {i: 0 for i in ids}
    for f in graph.flows:
        if f.source not in by_id or f.target not in by_id:
            problems.append(f"flow {f.flow_id} references a missing node")
            continue
        outdeg[f.source] += 1
        indeg[f.target] += 1
    if problems:
        return problems
    for n in graph.nodes:
        i, o = indeg[n.node_id], outdeg[n.node_id]
        if n.kind == "task" and (i, o) != (1, 1):
            problems.append(f"task {n.node_id} has degree ({i} in, {o} out)")
        if n.kind == "start-event" and (i, o) != (0, 1):
            problems.append(f"start event has degree ({i} in, {o} out)")
        if n.kind == "end-event" and (i, o) != (1, 0):
            problems.append(f"end event has degree ({i} in, {o} out)")
        if n.kind.endswith("-gateway"):
            if not ((i == 1 and o >= 2) or (i >= 2 and o == 1)):
                problems.append(f"gateway {n.node_id} has degree ({i} in, {o} out)")
    if not problems and starts and ends:
        fwd = _graph_reachable(starts[0].node_id, [(f.source, f.target) for f in graph.flows])
        bwd = _graph_reachable(ends[0].node_id, [(f.target, f.source) for f in graph.flows])
        for node_id in ids:
            if node_id not in fwd or node_id not in bwd:
                problems.append(f"node {node_id} is not on a start-to-end path")
    return problems


def _graph_reachable(start: str, edges: list[tuple[str, str]]) -> set[str]:
    succ: dict[str, list[str]] = {}
    for src, tgt in edges:
        succ.setdefault(src, []).append(tgt)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def to_render_graph(model: PowlNode, view: str = "bpmn") -> RenderGraph:
    """Flatten the chosen view into node/edge lists with layer ranks
    (longest path from the start node, loopbacks excluded)."""
    if view == "bpmn":
        graph = powl_to_bpmn(model)
        raw_nodes = [(n.node_id, n.kind, n.label) for n in graph.nodes]
        edges = [(f.source, f.target) for f in graph.flows]
        start = next(n.node_id for n in graph.nodes if n.kind == "start-event")
    elif view == "pn":
        net = powl_to_pn(model)
        raw_nodes = [(p, "place", "") for p in net.places]
        raw_nodes += [
            (t.tid, "transition" if t.label else "silent-transition", t.label or "")
            for t in net.transitions
        ]
        edges = list(net.arcs)
        start = net.initial_place
    else:
        raise ValueError(f"unknown view {view!r}, expected 'pn' or 'bpmn'")
    ranks = _layer_ranks(start, [n[0] for n in raw_nodes], edges)
    nodes = tuple(RenderNode(nid, kind, label, ranks.get(nid, 0)) for nid, kind, label in raw_nodes)
    return RenderGraph(nodes, tuple(edges))


def _layer_ranks(start: str, node_ids: list[str], edges: list[tuple[str, str]]) -> dict[str, int]:
    succ: dict[str, list[str]] = {nid: [] for nid in node_ids}
    for src, tgt in edges:
        succ[src].append(tgt)
    for adjacency in succ.values():
        adjacency.sort()

    # Depth-first classification: dropping back edges leaves a DAG.
    back: set[tuple[str, str]] = set()
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack: list[tuple[str, int]] = [(start, 0)]
    state[start] = 1
    while stack:
        node, idx = stack[-1]
        if idx < len(succ[node]):
            stack[-1] = (node, idx + 1)
            nxt = succ[node][idx]
            if state.get(nxt) == 1:
                back.add((node, nxt))
            elif state.get(nxt) is None:
                state[nxt] = 1
                stack.append((nxt, 0))
        else:
            state[node] = 2
            stack.pop()

    forward: dict[str, list[str]] = {nid: [] for nid in node_ids}
    indeg: dict[str, int] = {nid: 0 for nid in node_ids}
    for src, tgt in edges:
        if (src, tgt) in back:
            continue
        forward[src].append(tgt)
        indeg[tgt] += 1
    ranks = {nid: 0 for nid in node_ids}
    queue = deque(nid for nid in sorted(node_ids) if indeg[nid] == 0)
    while queue:
        node = queue.popleft()
        for nxt in forward[node]:
            ranks[nxt] = max(ranks[nxt], ranks[node] + 1)
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    return ranks
