"""Negative control: two cliques joined by a path whose conductance is eps.

The Poincare constant grows roughly like 1/eps, so the condition check fails
for the thinnest neck and the command line run succeeds only when that
failure is declared expected.

    python3 demos/dumbbell_control.py
"""

import json
import os
import tempfile

from weakharnack.cli import main, make_config, run_conditions

for eps in (1.0, 0.1, 0.01):
    rep = run_conditions(make_config({"space": {"generator": {"kind": "dumbbell", "eps": eps}}}))
    pi = rep["checks"]["PI"]
    print(f"eps = {eps:<5}: PI constant {pi['constant']:8.3f} ({pi['verdict']})")

with tempfile.TemporaryDirectory() as tmp:
    cfg = os.path.join(tmp, "dumbbell.json")
    with open(cfg, "w") as fh:
        json.dump({"space": {"generator": {"kind": "dumbbell", "eps": 0.01}}}, fh)
    plain = main(["conditions", "--config", cfg, "--out", tmp])
    marked = main(["conditions", "--config", cfg, "--out", tmp, "--expect-fail", "PI"])
    print(f"exit code {plain} without and {marked} with --expect-fail PI")
