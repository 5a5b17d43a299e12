"""Shared fixtures: the order-process fixture model, a hypothesis strategy
for random valid models, and an I/O trap that fails a test if the code
under observation touches files, sockets, or subprocesses."""

from __future__ import annotations

import builtins
import io
import os
import socket
import subprocess
from contextlib import contextmanager
from importlib import resources

import pytest
from hypothesis import strategies as st

from powlgen.powl import (PowlNode, make_activity, make_loop,
                          make_partial_order, make_silent, make_xor)


@pytest.fixture(scope="session")
def fixture_source() -> str:
    return (resources.files("powlgen") / "assets"
            / "order_process.pcl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_model(fixture_source) -> PowlNode:
    from powlgen.pcl import run_pcl
    return run_pcl(fixture_source)


# ---------------------------------------------------------------------------
# hypothesis strategy for valid models

_LABELS = st.sampled_from(["a", "b", "c", "d", "e"])
_LEAVES = st.one_of(_LABELS.map(make_activity),
                    st.builds(make_silent))


def _make_po(args) -> PowlNode:
    children, bits = args
    k = len(children)
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges = [p for p, keep in zip(pairs, bits) if keep]
    return make_partial_order(children, edges)


def powl_models(max_leaves: int = 8) -> st.SearchStrategy[PowlNode]:
    return st.recursive(
        _LEAVES,
        lambda inner: st.one_of(
            st.lists(inner, min_size=2, max_size=3).map(make_xor),
            st.tuples(inner, inner).map(lambda t: make_loop(*t)),
            st.tuples(st.lists(inner, min_size=1, max_size=3),
                      st.lists(st.booleans(), min_size=3, max_size=3))
            .map(_make_po),
        ),
        max_leaves=max_leaves,
    )


# ---------------------------------------------------------------------------
# I/O trap

_IO_TARGETS = [
    (builtins, "open"),
    (io, "open"),
    (os, "open"),
    (os, "system"),
    (os, "popen"),
    (socket, "socket"),
    (socket, "create_connection"),
    (subprocess, "Popen"),
    (subprocess, "run"),
    (subprocess, "call"),
    (subprocess, "check_output"),
]


@contextmanager
def forbid_io():
    """Replace every common I/O entry point with a recorder that raises."""
    calls: list[str] = []

    def trap(name):
        def tripped(*args, **kwargs):
            calls.append(name)
            raise AssertionError(f"forbidden I/O call: {name}")
        return tripped

    saved = [(mod, attr, getattr(mod, attr)) for mod, attr in _IO_TARGETS]
    for mod, attr in _IO_TARGETS:
        setattr(mod, attr, trap(f"{mod.__name__}.{attr}"))
    try:
        yield calls
    finally:
        for mod, attr, original in saved:
            setattr(mod, attr, original)


@pytest.fixture
def io_trap():
    with forbid_io() as calls:
        yield calls
