# The same experiments from the command line, driven here through main().
import sys
import tempfile
from pathlib import Path

from dsksim.cli.main import main

print("validate ->", main(["validate"]))

out = Path(tempfile.mkdtemp())
code = main(["preset", "coherence-curves", "--seed", "7", "--out", str(out)])
print("preset coherence-curves ->", code)
lines = (out / "coherence-curves.csv").read_text().splitlines()
print("\n".join(lines[:4]), "\n...", len(lines) - 1, "rows in", out)
sys.exit(code)
