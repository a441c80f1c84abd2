"""Certificate and exit-time constants as the cycle grows.

Writes one harnack report per size and the merged CSV tables into
``demos/out/size_sweep`` (or the directory given as the first argument).

    python3 demos/size_sweep.py [outdir]
"""

import json
import os
import sys

from weakharnack.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else os.path.join("demos", "out", "size_sweep")
reports = []
for n in (32, 64, 128):
    cfg = os.path.join(out, f"torus{n}.json")
    os.makedirs(out, exist_ok=True)
    with open(cfg, "w") as fh:
        json.dump({"space": {"generator": {"kind": "torus", "n": n}},
                   "harnack": {"delta": 0.25, "suites": ["exit_time"]}}, fh)
    rdir = os.path.join(out, f"torus{n}")
    main(["harnack", "--config", cfg, "--out", rdir])
    reports.append(os.path.join(rdir, "harnack_report.json"))
    with open(reports[-1]) as fh:
        r = json.load(fh)
    et = r["checks"]["exit_time"]
    print(f"n = {n:3d}: worst ratio {r['checks']['wEH']['certificate']['worst_ratio']:.3f}, "
          f"exit time constants [{et['C_lower']:.3f}, {et['C_upper']:.3f}]")
main(["report", *reports, "--out", out])
print(f"tables written to {out}")
