"""
Bootstrap and permutation tests
===============================

Per-sentence hit counts are the resampling units. A set-up the size of one
task in the experiment (about 240 sentences) has a standard deviation of
roughly half a point.
"""

import numpy as np

from depqa import bootstrap_stddev, permutation_test, setup_stats

baseline = setup_stats(seed=0, score=0.965, prefix="b")
small = setup_stats(seed=1, score=0.968, prefix="s")
large = setup_stats(seed=2, score=0.985, prefix="l")
print(sum(u.tokens for u in baseline), "tokens in", len(baseline), "sentences")

boot = bootstrap_stddev(baseline, samples=100_000, seed=0, workers=4)
print(f"baseline {100 * boot.statistic:.1f} ±{100 * boot.stddev:.2f}")

for name, group in (("+0.3 points", small), ("+2.0 points", large)):
    test = permutation_test(group, baseline, samples=100_000, seed=0, workers=4)
    print(f"{name}: observed {100 * test.observed_diff:+.2f}, p = {test.p_value:.2g}")

# results depend on the seed only, not on the worker count
reps = [bootstrap_stddev(baseline, 20_000, seed=5, workers=w).stddev for w in (1, 8)]
print("identical across workers:", np.equal(*reps))
