#!/usr/bin/env python3
"""Randomized cross-check of the twin trace oracles plus soundness.

For each random model the trace language is computed twice, through
definitions that share no code: once recursively on the model algebra and
once by playing the token game on the translated Petri net. Any divergence
points at a bug in the translation or in one of the semantics.

Run from the repository root:  python3 scripts/oracle_sweep.py [--count N]
"""

import argparse
import sys
import time

from powlgen.convert import powl_to_pn
from powlgen.powl import stats
from powlgen.random_models import random_models
from powlgen.semantics import check_soundness, pn_traces, powl_traces


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=500)
    parser.add_argument("--seed", type=int, default=20260814)
    parser.add_argument("--max-len", type=int, default=8)
    args = parser.parse_args()

    models = random_models(seed=args.seed, count=args.count)
    mismatches = 0
    unsound = 0
    t0 = time.time()
    for i, model in enumerate(models):
        net = powl_to_pn(model)
        via_model = powl_traces(model, args.max_len)
        via_net = pn_traces(net, args.max_len, state_budget=2_000_000)
        if via_model != via_net:
            mismatches += 1
            print(f"MISMATCH on model {i}: {stats(model)}")
            print(f"  only model route: {sorted(via_model - via_net)[:5]}")
            print(f"  only net route:   {sorted(via_net - via_model)[:5]}")
        report = check_soundness(net, state_budget=200_000)
        if not report.sound or report.truncated:
            unsound += 1
            print(f"UNSOUND model {i}: {report}")
        if (i + 1) % 100 == 0:
            print(f"  {i + 1}/{args.count} checked, "
                  f"{time.time() - t0:.1f}s elapsed", file=sys.stderr)
    elapsed = time.time() - t0
    print(f"{args.count} models: {mismatches} oracle mismatches, "
          f"{unsound} soundness failures, {elapsed:.1f}s")
    return 1 if (mismatches or unsound) else 0


if __name__ == "__main__":
    sys.exit(main())
