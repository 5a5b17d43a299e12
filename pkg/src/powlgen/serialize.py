"""File formats: PNML export/import, BPMN XML export, canonical construction
source, and a JSON form of the model tree for persistence.

All exporters are deterministic: the same value always serializes to the
same bytes, so restarting a service re-serves identical files.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET

from .convert import BpmnFlow, BpmnGraph, BpmnNode
from .powl import (
    Activity,
    Loop,
    ModelError,
    PartialOrder,
    PowlNode,
    Silent,
    Xor,
    make_activity,
    make_loop,
    make_partial_order,
    make_silent,
    make_xor,
)
from .semantics import PetriNet, Transition, validate_net

PNML_NS = "http://www.pnml.org/version-2009/grammar/pnml"
PTNET_TYPE = "http://www.pnml.org/version-2009/grammar/ptnet"
BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"


class MalformedDocumentError(ValueError):
    pass


class InvalidNetError(ValueError):
    pass


def _to_string(root: ET.Element) -> str:
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def pnml_export(net: PetriNet) -> str:
    root = ET.Element("pnml", xmlns=PNML_NS)
    net_el = ET.SubElement(root, "net", id="net1", type=PTNET_TYPE)
    page = ET.SubElement(net_el, "page", id="page1")
    for pid in net.places:
        place = ET.SubElement(page, "place", id=pid)
        if pid == net.initial_place:
            marking = ET.SubElement(place, "initialMarking")
            ET.SubElement(marking, "text").text = "1"
    for t in net.transitions:
        trans = ET.SubElement(page, "transition", id=t.tid)
        if t.label:
            name = ET.SubElement(trans, "name")
            ET.SubElement(name, "text").text = t.label
    for i, (src, tgt) in enumerate(net.arcs, start=1):
        ET.SubElement(page, "arc", id=f"arc_{i}", source=src, target=tgt)
    return _to_string(root)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def pnml_import(xml_text: str) -> PetriNet:
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedDocumentError(f"not well-formed XML: {exc}") from exc
    if _local(root.tag) != "pnml":
        raise MalformedDocumentError(f"root element is {_local(root.tag)!r}, expected 'pnml'")
    net_el = next((el for el in root.iter() if _local(el.tag) == "net"), None)
    if net_el is None:
        raise MalformedDocumentError("document has no 'net' element")

    places: list[str] = []
    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []
    initial: list[str] = []
    for el in net_el.iter():
        tag = _local(el.tag)
        if tag == "place":
            pid = el.get("id")
            if not pid:
                raise MalformedDocumentError("place without id attribute")
            places.append(pid)
            for sub in el:
                if _local(sub.tag) == "initialMarking":
                    text = "".join(t.text or "" for t in sub.iter() if _local(t.tag) == "text")
                    if text.strip() and int(text.strip()) > 0:
                        if int(text.strip()) != 1:
                            raise InvalidNetError(
                                f"place {pid!r} starts with {text.strip()} tokens, expected 1"
                            )
                        initial.append(pid)
        elif tag == "transition":
            tid = el.get("id")
            if not tid:
                raise MalformedDocumentError("transition without id attribute")
            label = None
            for sub in el:
                if _local(sub.tag) == "name":
                    text = "".join(t.text or "" for t in sub.iter() if _local(t.tag) == "text")
                    label = text if text else None
            transitions.append(Transition(tid, label))
        elif tag == "arc":
            src, tgt = el.get("source"), el.get("target")
            if not src or not tgt:
                raise MalformedDocumentError("arc without source/target attributes")
            arcs.append((src, tgt))

    if len(initial) != 1:
        raise InvalidNetError(f"expected exactly one initially marked place, found {len(initial)}")
    sources = {src for src, _ in arcs}
    sinks = [p for p in places if p not in sources]
    if len(sinks) != 1:
        raise InvalidNetError(f"expected exactly one sink place, found {len(sinks)}")
    net = PetriNet(
        places=tuple(places),
        transitions=tuple(transitions),
        arcs=tuple(arcs),
        initial_place=initial[0],
        final_place=sinks[0],
    )
    problems = validate_net(net)
    if problems:
        raise InvalidNetError("; ".join(problems))
    return net


_BPMN_TAGS = {
    "start-event": "startEvent",
    "end-event": "endEvent",
    "task": "task",
    "exclusive-gateway": "exclusiveGateway",
    "parallel-gateway": "parallelGateway",
}


def bpmn_export(graph: BpmnGraph) -> str:
    root = ET.Element(
        "definitions",
        xmlns=BPMN_NS,
        id="definitions_1",
        targetNamespace="http://powlgen/bpmn",
    )
    process = ET.SubElement(root, "process", id="process_1", isExecutable="false")
    for node in graph.nodes:
        attrs = {"id": node.node_id}
        if node.label:
            attrs["name"] = node.label
        ET.SubElement(process, _BPMN_TAGS[node.kind], attrs)
    for f in graph.flows:
        ET.SubElement(process, "sequenceFlow", id=f.flow_id, sourceRef=f.source, targetRef=f.target)
    return _to_string(root)


def bpmn_reparse(xml_text: str) -> BpmnGraph:
    """Structural re-parse of an exported document, used to verify that every
    flow reference resolves. Not a general BPMN importer."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedDocumentError(f"not well-formed XML: {exc}") from exc
    kinds = {v: k for k, v in _BPMN_TAGS.items()}
    nodes: list[BpmnNode] = []
    flows: list[BpmnFlow] = []
    for el in root.iter():
        tag = _local(el.tag)
        if tag in kinds:
            nodes.append(BpmnNode(el.get("id") or "", kinds[tag], el.get("name") or ""))
        elif tag == "sequenceFlow":
            flows.append(
                BpmnFlow(el.get("id") or "", el.get("sourceRef") or "", el.get("targetRef") or "")
            )
    ids = {n.node_id for n in nodes}
    for f in flows:
        if f.source not in ids or f.target not in ids:
            raise MalformedDocumentError(f"flow {f.flow_id!r} references an undeclared node")
    return BpmnGraph(tuple(nodes), tuple(flows))


def _escape(label: str) -> str:
    return label.replace("\\", "\\\\").replace('"', '\\"')


def emit_pcl(model: PowlNode) -> str:
    """Canonical construction source: one statement per node, identifiers in
    post-order, so any valid model round-trips through the interpreter."""
    lines: list[str] = []
    counter = [0]

    def emit(node: PowlNode) -> str:
        match node:
            case Activity(label):
                rhs = f'activity("{_escape(label)}")'
            case Silent():
                rhs = "silent()"
            case Xor(children):
                rhs = f"xor({', '.join(emit(c) for c in children)})"
            case Loop(do, redo):
                rhs = f"loop({emit(do)}, {emit(redo)})"
            case PartialOrder(children, order):
                names = ", ".join(emit(c) for c in children)
                edges = ", ".join(f"({u}, {v})" for u, v in sorted(order))
                rhs = f"partial_order([{names}], [{edges}])"
            case _:
                raise TypeError(f"not a model node: {node!r}")
        ident = f"n{counter[0]}"
        counter[0] += 1
        lines.append(f"{ident} = {rhs}")
        return ident

    final = emit(model)
    lines.append(f"final({final})")
    return "\n".join(lines) + "\n"


def powl_json_export(model: PowlNode) -> str:
    return json.dumps(_to_jsonable(model), indent=2) + "\n"


def _to_jsonable(node: PowlNode) -> dict:
    match node:
        case Activity(label):
            return {"type": "activity", "label": label}
        case Silent():
            return {"type": "silent"}
        case Xor(children):
            return {"type": "xor", "children": [_to_jsonable(c) for c in children]}
        case Loop(do, redo):
            return {"type": "loop", "do": _to_jsonable(do), "redo": _to_jsonable(redo)}
        case PartialOrder(children, order):
            return {
                "type": "partial_order",
                "children": [_to_jsonable(c) for c in children],
                "order": [[u, v] for u, v in sorted(order)],
            }
    raise TypeError(f"not a model node: {node!r}")


def powl_json_import(text: str) -> PowlNode:
    """Rebuild a model through the validating constructors; structural
    problems raise MalformedDocumentError, invariant breaches ModelError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"not valid JSON: {exc}") from exc
    return _from_jsonable(doc)


def _from_jsonable(doc) -> PowlNode:
    if not isinstance(doc, dict) or "type" not in doc:
        raise MalformedDocumentError(f"expected an object with a 'type' field, got {doc!r}")
    kind = doc["type"]
    try:
        if kind == "activity":
            return make_activity(_field(doc, "label", str))
        if kind == "silent":
            return make_silent()
        if kind == "xor":
            return make_xor([_from_jsonable(c) for c in _field(doc, "children", list)])
        if kind == "loop":
            return make_loop(_from_jsonable(doc["do"]), _from_jsonable(doc["redo"]))
        if kind == "partial_order":
            children = [_from_jsonable(c) for c in _field(doc, "children", list)]
            raw_order = _field(doc, "order", list)
            order = set()
            for pair in raw_order:
                if not isinstance(pair, list) or len(pair) != 2:
                    raise MalformedDocumentError(f"order entry {pair!r} is not a pair")
                if not all(isinstance(x, int) for x in pair):
                    raise MalformedDocumentError(f"order entry {pair!r} is not integer indices")
                order.add((pair[0], pair[1]))
            return make_partial_order(children, order)
    except KeyError as exc:
        raise MalformedDocumentError(f"missing field {exc} in {kind!r} node") from exc
    raise MalformedDocumentError(f"unknown node type {kind!r}")


def _field(doc: dict, name: str, expected: type):
    if name not in doc:
        raise MalformedDocumentError(f"missing field {name!r} in {doc.get('type')!r} node")
    value = doc[name]
    if not isinstance(value, expected):
        raise MalformedDocumentError(f"field {name!r} must be {expected.__name__}")
    return value


__all__ = [
    "MalformedDocumentError",
    "InvalidNetError",
    "ModelError",
    "pnml_export",
    "pnml_import",
    "bpmn_export",
    "bpmn_reparse",
    "emit_pcl",
    "powl_json_export",
    "powl_json_import",
]
