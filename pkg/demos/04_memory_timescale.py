import statistics

from reflexcycle import crisis_report, defaults, run, with_overrides
from reflexcycle.params import derived_timescales, lambda_for_timescale

# Longer Sharpe memory, with confidence feeding into the investment decision
# (nu = 0.75), makes crises last longer and splits the Sharpe distribution in two.
for t_lambda in (2, 20, 50):
    for nu in (1.0, 0.75):
        lam = lambda_for_timescale(t_lambda)
        reps = []
        for seed in range(3):
            p = with_overrides(defaults(), {"lambda": lam, "nu": nu, "engine.seed": seed,
                                            "engine.horizon": 100_000})
            reps.append(crisis_report(run(p)))
        t_low = statistics.median(r.t_low_mean for r in reps if r.t_low_mean is not None)
        print(f"T_lambda={derived_timescales(p)[0]:5.1f} nu={nu:4.2f}  median T_< {t_low:7.2f}  "
              f"<S> {statistics.mean(r.mean_sharpe for r in reps):+.3f}  "
              f"Sharpe bimodal {sum(r.hist_S.bimodal for r in reps)}/3")
