"""Core workflow-model algebra.

A model is a tree of immutable nodes: labeled activities, silent steps,
exclusive choices, redo-loops, and partially ordered sets of submodels.
Children of a partial order are concurrent unless an order edge constrains
them. The stored order is always the transitive reduction of an acyclic
relation, so structurally equal models compare equal.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Union

MAX_LABEL_LENGTH = 120
MAX_MODEL_NODES = 500


class ModelError(ValueError):
    """Base class for constructor violations."""


class InvalidLabelError(ModelError):
    pass


class ArityError(ModelError):
    pass


class BadEdgeError(ModelError):
    pass


class CyclicOrderError(ModelError):
    pass


@dataclass(frozen=True)
class Activity:
    label: str


@dataclass(frozen=True)
class Silent:
    pass


@dataclass(frozen=True)
class Xor:
    children: tuple["PowlNode", ...]


@dataclass(frozen=True)
class Loop:
    do: "PowlNode"
    redo: "PowlNode"


@dataclass(frozen=True)
class PartialOrder:
    children: tuple["PowlNode", ...]
    order: frozenset[tuple[int, int]]


PowlNode = Union[Activity, Silent, Xor, Loop, PartialOrder]

Edge = tuple[int, int]


@dataclass(frozen=True)
class ModelStats:
    activity_count: int
    operator_count: int
    depth: int
    silent_count: int


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


def check_label(text: str) -> str:
    """Normalize an activity label; raise InvalidLabelError if unusable."""
    if not isinstance(text, str):
        raise InvalidLabelError(f"label must be a string, got {type(text).__name__}")
    label = text.strip()
    if not label:
        raise InvalidLabelError("label is empty after trimming whitespace")
    if len(label) > MAX_LABEL_LENGTH:
        raise InvalidLabelError(
            f"label is {len(label)} characters long, limit is {MAX_LABEL_LENGTH}"
        )
    for ch in label:
        if unicodedata.category(ch) == "Cc":
            raise InvalidLabelError(f"label contains control character {ch!r}")
    return label


def make_activity(label: str) -> Activity:
    return Activity(check_label(label))


def make_silent() -> Silent:
    return Silent()


def make_xor(children: list[PowlNode] | tuple[PowlNode, ...]) -> Xor:
    if len(children) < 2:
        raise ArityError(f"xor needs at least 2 children, got {len(children)}")
    return Xor(tuple(children))


def make_loop(do: PowlNode, redo: PowlNode) -> Loop:
    return Loop(do, redo)


def make_partial_order(
    children: list[PowlNode] | tuple[PowlNode, ...],
    order: set[Edge] | frozenset[Edge] | list[Edge],
) -> PartialOrder:
    if len(children) < 1:
        raise ArityError("partial_order needs at least 1 child")
    n = len(children)
    edges = set(order)
    for i, j in edges:
        if not (0 <= i < n) or not (0 <= j < n):
            raise BadEdgeError(f"edge ({i},{j}) references a child outside 0..{n - 1}")
        if i == j:
            raise BadEdgeError(f"edge ({i},{i}) orders a child against itself")
    closed = transitive_closure(edges, n)
    if any((i, i) in closed for i in range(n)):
        for u, v in sorted(edges):
            if (v, u) in closed:
                raise CyclicOrderError(
                    f"cyclic order: edge ({u}, {v}) conflicts with an ordering path from {v} back to {u}"
                )
    return PartialOrder(tuple(children), frozenset(transitive_reduction(closed, n)))


def transitive_closure(edges: set[Edge] | frozenset[Edge], n: int) -> set[Edge]:
    """Smallest transitive superset of the edge set over nodes 0..n-1."""
    succ = {i: set() for i in range(n)}
    for i, j in edges:
        succ[i].add(j)
    closed = set()
    for start in range(n):
        seen: set[int] = set()
        stack = list(succ[start])
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ[node])
        closed.update((start, node) for node in seen)
    return closed


def transitive_reduction(edges: set[Edge] | frozenset[Edge], n: int) -> set[Edge]:
    """Unique minimal edge set with the same closure; input must be acyclic."""
    closed = transitive_closure(edges, n)
    for i in range(n):
        if (i, i) in closed:
            raise CyclicOrderError(f"cannot reduce a cyclic relation (cycle through {i})")
    return {
        (i, j)
        for i, j in closed
        if not any((i, k) in closed and (k, j) in closed for k in range(n))
    }


def count_nodes(root: PowlNode) -> int:
    match root:
        case Activity() | Silent():
            return 1
        case Xor(children) | PartialOrder(children, _):
            return 1 + sum(count_nodes(c) for c in children)
        case Loop(do, redo):
            return 1 + count_nodes(do) + count_nodes(redo)
    raise TypeError(f"not a model node: {root!r}")


def validate(root: PowlNode) -> list[Violation]:
    """Recursively check all structural invariants; empty list means ok."""
    violations: list[Violation] = []

    def walk(node: PowlNode, path: str) -> None:
        match node:
            case Activity(label):
                try:
                    if check_label(label) != label:
                        violations.append(Violation(path, "label is not trimmed"))
                except InvalidLabelError as exc:
                    violations.append(Violation(path, str(exc)))
            case Silent():
                pass
            case Xor(children):
                if len(children) < 2:
                    violations.append(
                        Violation(path, f"xor has {len(children)} children, needs >= 2")
                    )
                for i, child in enumerate(children):
                    walk(child, f"{path}.{i}")
            case Loop(do, redo):
                walk(do, f"{path}.0")
                walk(redo, f"{path}.1")
            case PartialOrder(children, order):
                n = len(children)
                if n < 1:
                    violations.append(Violation(path, "partial order has no children"))
                bad = False
                for i, j in order:
                    if not (0 <= i < n) or not (0 <= j < n):
                        violations.append(
                            Violation(path, f"order edge ({i},{j}) is out of range")
                        )
                        bad = True
                    elif i == j:
                        violations.append(Violation(path, f"reflexive order edge ({i},{i})"))
                        bad = True
                if not bad:
                    closed = transitive_closure(order, n)
                    if any((i, i) in closed for i in range(n)):
                        violations.append(Violation(path, "order relation is cyclic"))
                    elif set(order) != transitive_reduction(order, n):
                        violations.append(
                            Violation(path, "stored order is not transitively reduced")
                        )
                for i, child in enumerate(children):
                    walk(child, f"{path}.{i}")
            case _:
                violations.append(Violation(path, f"unknown node type {type(node).__name__}"))

    walk(root, "root")
    total = count_nodes(root)
    if total > MAX_MODEL_NODES:
        violations.append(
            Violation("root", f"model has {total} nodes, limit is {MAX_MODEL_NODES}")
        )
    return violations


def stats(root: PowlNode) -> ModelStats:
    match root:
        case Activity():
            return ModelStats(1, 0, 1, 0)
        case Silent():
            return ModelStats(0, 0, 1, 1)
        case Xor(children) | PartialOrder(children, _):
            parts = [stats(c) for c in children]
        case Loop(do, redo):
            parts = [stats(do), stats(redo)]
        case _:
            raise TypeError(f"not a model node: {root!r}")
    return ModelStats(
        activity_count=sum(p.activity_count for p in parts),
        operator_count=1 + sum(p.operator_count for p in parts),
        depth=1 + max(p.depth for p in parts),
        silent_count=sum(p.silent_count for p in parts),
    )
