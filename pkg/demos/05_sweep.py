import sys
import tempfile

from reflexcycle import defaults
from reflexcycle.sweep import SweepPlan, run_sweep, stderr_progress

# Small (delta, c0) phase diagram.  Results do not depend on the worker count,
# and the output directory can be reused to resume an interrupted sweep.
plan = SweepPlan(
    base=defaults(),
    axis1=("delta", (0.001, 0.005, 0.02)),
    axis2=("c0", (0.001, 0.01, 0.017)),
    seeds_per_cell=2,
    horizon=30_000,
    burn_in=2_000,
)
out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="sweep_")
result = run_sweep(plan, workers=2, out_dir=out, progress=stderr_progress)
print(result.to_csv())
print("phase grid (rows: delta, cols: c0):")
for row in result.cells:
    print("  " + "  ".join(cell.phase for cell in row))
print("written to", out)
