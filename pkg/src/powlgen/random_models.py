"""Seeded random model generation for fuzzing the twin trace oracles.

The oracle comparison enumerates every trace up to a length bound on two
independent routes, which is exponential in the amount of unordered
concurrency. Candidates whose trace set would not fit the enumeration
budget are rejected and redrawn, so every returned model is cheap enough
to compare exhaustively.
"""

from __future__ import annotations

import random

from .powl import (PowlNode, make_activity, make_loop, make_partial_order,
                   make_silent, make_xor, stats)
from .semantics import TraceCapExceeded, powl_traces

_LABELS = "abcdefgh"

# trace-set ceiling accepted by the generator; keeps a single oracle
# comparison at max_len 8 in the sub-second range
ENUMERATION_CAP = 20_000


def random_model(rng: random.Random, max_depth: int = 3,
                 max_activities: int = 8) -> PowlNode:
    """One random valid model of height <= max_depth with >= 1 activity."""
    labels = list(_LABELS)
    budget = [0]
    next_label = [0]

    def leaf(allow_silent: bool) -> PowlNode:
        if allow_silent and (budget[0] <= 0 or rng.random() < 0.15):
            return make_silent()
        budget[0] -= 1
        label = labels[next_label[0] % len(labels)]
        next_label[0] += 1
        return make_activity(label)

    def build(level: int, allow_silent: bool) -> PowlNode:
        # a node at this level may span at most max_depth - level levels
        go_leaf = budget[0] <= 1 or (level > 0 and rng.random() < 0.3)
        if level >= max_depth - 1 or go_leaf:
            return leaf(allow_silent)
        kind = rng.choice(("xor", "xor", "loop", "po", "po", "po"))
        if kind == "xor":
            k = rng.randint(2, 3)
            return make_xor([build(level + 1, True) for _ in range(k)])
        if kind == "loop":
            return make_loop(build(level + 1, False), build(level + 1, True))
        k = rng.randint(1, 4)
        children = [build(level + 1, True) for _ in range(k)]
        edges = [(i, j) for i in range(k) for j in range(i + 1, k)
                 if rng.random() < 0.55]
        return make_partial_order(children, edges)

    while True:
        budget[0] = rng.randint(1, max_activities)
        next_label[0] = 0
        rng.shuffle(labels)
        model = build(0, False)
        if stats(model).activity_count < 1:
            continue
        try:
            powl_traces(model, 8, cap=ENUMERATION_CAP)
        except TraceCapExceeded:
            continue
        return model


def random_models(seed: int, count: int, max_depth: int = 3,
                  max_activities: int = 8) -> list[PowlNode]:
    rng = random.Random(seed)
    return [random_model(rng, max_depth, max_activities)
            for _ in range(count)]
