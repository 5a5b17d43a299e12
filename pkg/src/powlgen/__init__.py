"""Process models from natural-language descriptions.

An LLM drafts a partially ordered workflow model (POWL) in a small,
sandboxed construction language; invalid drafts are bounced back with
error prompts until a valid model emerges. Valid models are sound by
construction and export to Petri nets (PNML) and BPMN.

The pieces, bottom up: ``powl`` (the model algebra), ``pcl`` (the
construction language: lexer, parser, checker, interpreter),
``semantics`` (token game, trace oracles, soundness), ``convert``
(Petri net / BPMN / render graphs), ``serialize`` (PNML, BPMN XML,
JSON, program text), ``llm`` (providers, prompts, repair loop),
``sessions``/``service``/``cli`` (the operational shell).
"""

__version__ = "0.1.0"

from .powl import (Activity, Loop, PartialOrder, PowlNode, Silent, Xor,
                   make_activity, make_loop, make_partial_order, make_silent,
                   make_xor, stats, validate)
from .pcl import PclError, run_pcl
from .semantics import check_soundness, pn_traces, powl_traces
from .convert import powl_to_bpmn, powl_to_pn, to_render_graph
from .serialize import (bpmn_export, emit_pcl, pnml_export, pnml_import,
                        powl_json_export, powl_json_import)
from .llm import (Conversation, GenerationExhausted, HttpChatProvider,
                  MockProvider, ProviderConfig, generate, refine)

__all__ = [
    "Activity", "Silent", "Xor", "Loop", "PartialOrder", "PowlNode",
    "make_activity", "make_silent", "make_xor", "make_loop",
    "make_partial_order", "stats", "validate",
    "PclError", "run_pcl",
    "check_soundness", "powl_traces", "pn_traces",
    "powl_to_pn", "powl_to_bpmn", "to_render_graph",
    "pnml_export", "pnml_import", "bpmn_export", "powl_json_export",
    "powl_json_import", "emit_pcl",
    "Conversation", "GenerationExhausted", "MockProvider",
    "HttpChatProvider", "ProviderConfig", "generate", "refine",
    "__version__",
]
