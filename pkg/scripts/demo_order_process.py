#!/usr/bin/env python3
"""End-to-end walkthrough of the generate/refine flow, fully offline.

A scripted provider stands in for the LLM. Its first reply contains a
deliberate mistake so the error-repair loop is visible; two rounds of
feedback then reshape the model: the item selection becomes a loop, and
the reward selection becomes skippable. Exports land in demo_output/.

Run from the repository root:  python3 scripts/demo_order_process.py
"""

import sys
from pathlib import Path

from powlgen import (MockProvider, check_soundness, generate, powl_to_bpmn,
                     powl_to_pn, powl_traces, refine, stats)
from powlgen.serialize import (bpmn_export, emit_pcl, pnml_export,
                               powl_json_export)

DESCRIPTION = """\
Customers of an online shop select the items they want to buy; they can
repeat the selection to add more items. They set a payment method, and
they may select a reward for their purchase. The reward depends on the
chosen payment method. Payment is made by card or by voucher. Finally the
shop confirms the order. Choosing items and choosing the payment method
are independent of each other.
"""

FEEDBACK_1 = "Model the item selection as a loop so more items can be added."
FEEDBACK_2 = "Allow skipping the reward selection entirely."


def describe(tag: str, model) -> None:
    s = stats(model)
    report = check_soundness(powl_to_pn(model))
    traces = powl_traces(model, 8)
    print(f"{tag}: {s.activity_count} activities, {s.operator_count} "
          f"operators, depth {s.depth}; sound={report.sound}; "
          f"{len(traces)} traces up to length 8")


def main() -> int:
    replies_file = Path(__file__).parent / "data" / "order_story.json"
    provider = MockProvider.from_file(str(replies_file))

    print("=== generate (first reply is broken on purpose) ===")
    result = generate(provider, DESCRIPTION)
    print(f"accepted after {result.attempts} attempts; the repair prompt "
          f"sent back to the model was:")
    print("-" * 60)
    print(result.conversation.messages[3].content.strip())
    print("-" * 60)
    describe("baseline", result.model)

    print(f"\n=== refine 1: {FEEDBACK_1!r} ===")
    result2 = refine(provider, result.conversation, FEEDBACK_1)
    describe("with loop", result2.model)

    print(f"\n=== refine 2: {FEEDBACK_2!r} ===")
    result3 = refine(provider, result2.conversation, FEEDBACK_2)
    describe("with skippable reward", result3.model)

    out = Path("demo_output")
    out.mkdir(exist_ok=True)
    model = result3.model
    (out / "order.pnml").write_text(pnml_export(powl_to_pn(model)))
    (out / "order.bpmn").write_text(bpmn_export(powl_to_bpmn(model)))
    (out / "order.powl.json").write_text(powl_json_export(model))
    (out / "order.pcl").write_text(emit_pcl(model))
    print(f"\nexports written to {out}/: order.pnml, order.bpmn, "
          f"order.powl.json, order.pcl")
    return 0


if __name__ == "__main__":
    sys.exit(main())
