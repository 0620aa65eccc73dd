"""Ratio confidence intervals and a 2x2 allocation of variation."""
import numpy as np

from tamperlog.analytics import factorial_fit, fieller_ci, runtime_overhead

rng = np.random.default_rng(5)
bench = rng.normal(100.0, 4.0, 30)            # seconds without logging
total = bench * 1.12 + rng.normal(0, 1.5, 30)  # same runs with logging on
ci = fieller_ci(total, bench, 0.90)
print(f"overhead ratio {ci.rho:.4f}, 90% CI [{ci.lo:.4f}, {ci.hi:.4f}]")
print(f"mean overhead {100 * runtime_overhead(total.mean(), bench.mean()):.2f}%")

# signing strategy (single line / per core) x buffering (frequent / occasional)
cells = [[rng.normal(m, 0.3, 5).tolist() for m in row] for row in ((14.0, 11.0), (9.0, 7.5))]
fit = factorial_fit(cells)
print(f"effects: q0={fit.q0:.3f} qs={fit.qs:.3f} qb={fit.qb:.3f} qi={fit.qi:.3f}")
print(f"variation explained: strategy {fit.f_s:.1%}, buffering {fit.f_b:.1%}, "
      f"interaction {fit.f_i:.1%}, error {fit.f_e:.1%}")
