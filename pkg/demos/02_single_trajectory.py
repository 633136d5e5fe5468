import numpy as np

from reflexcycle import crisis_report, defaults, run, with_overrides
from reflexcycle.dynamics import accounting_residuals

# One run at the benchmark point (delta = 0.005, c0 = 0.017), 50k periods.
p = with_overrides(defaults(), {"engine.horizon": 50_000})
traj = run(p)
c, k, n, S = traj["c"], traj["k"], traj["n"], traj["S"]

print("periods recorded:", len(traj))
print("consumption  mean %.4f  min %.4f  max %.4f" % (c.mean(), c.min(), c.max()))
print("capital      mean %.3f   labour mean %.3f" % (k.mean(), n.mean()))
print("share of time below c0:", np.mean(c < p.c0))

rep = crisis_report(traj)
for key, val in rep.summary().items():
    print(f"  {key:12s} {val}")

# A crisis as seen in the record: the first period with c < c0, and its surroundings
first = int(np.argmax(c < p.c0))
window = slice(max(first - 3, 0), first + 8)
print("\n   t        c        G        F        S")
for row in zip(traj["t"][window], c[window], traj["G"][window], traj["F"][window], S[window]):
    print("%6d  %.5f  %.4f  %.4f  %+.3f" % row)

print("\naccounting residuals:", accounting_residuals(traj))
