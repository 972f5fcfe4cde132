"""Run every theorem checker on the unit disk and print the verdict table."""

from speclab.mesh import disk
from speclab.verify import Study, run_suite

for r in run_suite(Study(disk(1.0), 0.2, levels=3)):
    reason = r.meta.get("reason", "")
    margin = "" if r.margin is None else f"{r.margin:+.3e}"
    print(f"{r.theorem_id:24s} p={str(r.p):7s} {r.verdict:12s} {margin:>11s} {reason}")
