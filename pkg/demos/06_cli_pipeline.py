"""End-to-end command-line pipeline on a small synthetic dataset.

Writes a queries file, then drives the installed ``expofair`` CLI through
the full pipeline: front construction, decomposition, delivery, and a
method sweep, plus a click-model reduction.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(args):
    print(f"$ {' '.join(args)}")
    result = subprocess.run(args, capture_output=True, text=True)
    if result.returncode != 0:
        print(result.stderr)
        sys.exit(result.returncode)
    return result.stdout


workdir = Path(tempfile.mkdtemp(prefix="expofair-demo-"))
queries = workdir / "queries.jsonl"
with open(queries, "w") as handle:
    handle.write(json.dumps({"query_id": "q1", "relevances": [0.1, 0.5, 0.9]}) + "\n")
    handle.write(json.dumps({"query_id": "q2", "relevances": [0.3, 0.8, 0.2, 0.6]}) + "\n")
print(f"wrote {queries}\n")

out = run(["expofair", "pareto", str(queries), "--fairness", "demographic"])
fronts = json.loads(out)
print(f"pareto: q1 front has {len(fronts[0]['vertices'])} vertices, "
      f"nF starts at {fronts[0]['nF'][0]:.2g} and ends at {fronts[0]['nF'][-1]:.2g}\n")

out = run(["expofair", "decompose", str(queries), "--alpha", "0.5"])
atoms = json.loads(out)[0]["atoms"]
print(f"decompose: q1 alpha=0.5 point is a mixture of {len(atoms)} rankings:")
for atom in atoms:
    print(f"  weight {atom['weight']:.4f} on {atom['ranking']}")
print()

out = run(["expofair", "deliver", str(queries), "--alpha", "0", "--T", "12"])
sequence = json.loads(out)[0]["sequence"]
print("deliver: first 12 rankings for q1 (balanced word):")
print(" ", sequence, "\n")

table = workdir / "sweep.csv"
run([
    "expofair", "evaluate", str(queries),
    "--method", "ctrl", "--gain", "0", "--T", "100",
    "--format", "csv", "--out", str(table),
])
print(f"evaluate: wrote {table}:")
print(table.read_text())

model = workdir / "cascade.json"
model.write_text(json.dumps({"variant": "CM", "attraction": [0.5, 0.5]}))
out = run(["expofair", "reduce", str(model)])
print("reduce: cascade model in generic form ->", out.strip())
