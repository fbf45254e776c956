"""The same experiments, driven by JSON files through the command line.

Each subcommand takes one config file; outputs land in its ``output_dir``.
The exit status is 0 when every requested bound holds, 1 when one fails and
2 for a configuration problem.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp(prefix="nlcl-demo-"))
config = {
    "model": "burgers_indicator",
    "initial": {"atoms": [{"x": 0.0, "mass": 1.0}]},
    "N": 64,
    "T": 1.0,
    "snapshot_times": [k / 64 for k in range(1, 65)],
    "bumps": [{"x0": 0.5, "t0": 0.5, "a": 0.3, "s": 0.3}],
    "output_dir": "out",
}
(work / "fan.json").write_text(json.dumps(config, indent=2))
mixed = dict(config, model="exponential", snapshot_times=[0.5, 1.0],
             initial={"atoms": [{"x": 0.0, "mass": 0.5}],
                      "pieces": [{"left": 1.0, "right": 2.0, "density": 0.5}]},
             initial_b={"pieces": [{"left": 0.0, "right": 2.0, "density": 0.5}]}, p=2)
(work / "mixed.json").write_text(json.dumps(mixed, indent=2))


def nlcl(*args):
    done = subprocess.run([sys.executable, "-m", "nlcl", *args], capture_output=True, text=True, cwd=work)
    print(f"$ nlcl {' '.join(args)}   -> exit {done.returncode}")
    lines = (done.stdout + done.stderr).rstrip().splitlines()
    if len(lines) > 10:
        lines = lines[:4] + [f"... ({len(lines) - 8} more lines)"] + lines[-4:]
    print("\n".join(lines))
    print()


nlcl("simulate", "fan.json")
nlcl("verify", "fan.json", "--bounds", "gap,smoothing,support,weak_residual")
nlcl("oracle-compare", "fan.json")
nlcl("verify", "mixed.json", "--bounds", "gap,smoothing,max_principle,support,stability")
nlcl("converge", "mixed.json", "--Ns", "32,64,128", "--p", "1")

(work / "broken.json").write_text(json.dumps({k: v for k, v in config.items() if k != "T"}))
nlcl("simulate", "broken.json")

print("files written:", sorted(p.name for p in (work / "out").iterdir()))
