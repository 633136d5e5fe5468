import numpy as np

from reflexcycle import defaults, solve_ces, solve_leontief, with_overrides
from reflexcycle.equilibrium import leontief_regime

# Rescaled consumption as a function of capital, at full confidence (G = 0.95).
# Below the matching point k = sqrt(G/2) capital is scarce and caps output;
# above it labour supply does.
p = defaults()
G = 0.95
print("matching point k* =", np.sqrt(G / 2))

ks = np.linspace(0.1, 1.5, 15)
print(f"{'k':>6} {'regime':>9} {'c (rho=7)':>10} {'c (rho=1e3)':>12} {'c (limit)':>10} {'q* (limit)':>10}")
stiff = with_overrides(p, {"rho": 1000})
for k in ks:
    reg = leontief_regime(k, G, p).regime.value
    lim = solve_leontief(k, G, p)
    print(f"{k:6.2f} {reg:>9} {solve_ces(k, G, p).c_tilde:10.4f} {solve_ces(k, G, stiff).c_tilde:12.4f} "
          f"{lim.c_tilde:10.4f} {lim.q_star_tilde:10.4f}")

# At rho = 7 the kink is smoothed out, and with plenty of capital the wage
# settles at (1-alpha)**(-1/rho), slightly above 1.
print("w_tilde at k=50, rho=7:", solve_ces(50.0, G, p).w_tilde, "vs", (1 - p.alpha) ** (-1 / p.rho))
