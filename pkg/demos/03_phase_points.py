from reflexcycle import crisis_report, defaults, run, with_overrides

# The four phases: capital scarcity (k) and consumption crises (c), each Low or High.
points = {
    "LkLc": {"delta": 0.001, "c0": 0.001},
    "LkHc": {"delta": 0.001, "c0": 0.019},
    "HkLc": {"delta": 0.02, "c0": 0.001},
    "HkHc": {"delta": 0.005, "c0": 0.017},
}
seeds = range(3)  # the acceptance tests use 10 seeds and 2e5 periods

print(f"{'point':6} {'seed':>4} {'xi_c':>9} {'xi_k':>9} {'phase':>6} {'<S>':>7} {'bimodal c':>10}")
for name, ov in points.items():
    for s in seeds:
        p = with_overrides(defaults(), {**ov, "engine.seed": s, "engine.horizon": 100_000})
        r = crisis_report(run(p))
        print(f"{name:6} {s:4d} {r.xi_c:9.2e} {r.xi_k:9.2e} {r.phase.value:>6} {r.mean_sharpe:7.3f} "
              f"{str(r.hist_c.bimodal):>10}")
