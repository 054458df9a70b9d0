"""Bracket verification on the bundled scenario plus random samples (via the CLI)."""
import json
import sys

from sovlab.cli import main

if __name__ == "__main__":
    out = "poisson_report.json"
    code = main(["poisson", "--samples", sys.argv[1] if len(sys.argv) > 1 else "5", "--report", out])
    rep = json.load(open(out))
    for s in rep["samples"]:
        print(s["index"], s.get("runs", [{}])[0].get("max_dev", s.get("skipped", s.get("stencil_failure"))))
    print("exit", code)
