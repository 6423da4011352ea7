"""
Recovering from a bad first split: hard vs soft structure learning
==================================================================

Data comes from an equal mixture of two independent bivariate Gaussians

    0.5 * N_X(-0.5, 1) x N_Y(-2, 0.2)  +  0.5 * N_X(0.5, 1) x N_Y(2, 0.2)

whose X marginals overlap heavily.  We force both learners to start from a
deliberately bad first split along the vertical line X = 0 and let them
continue on their own.  The hard learner commits every point to one side and
ends up fitting truncated half-Gaussians over X; the soft learner keeps
partial membership on both sides and recovers X means near +-0.5.

Run:  python3 demos/toy_bad_split.py
"""

import numpy as np

from softpc import toy

for method in ("learnspn", "softlearn"):
    result = toy.run_toy(
        n_per_component=1000, adversarial=True, method=method, seed=0
    )
    print(f"\n== {method} after the adversarial X=0 first split ==")
    for mu, sigma in result.x_leaves:
        print(f"  X leaf: mu = {mu:+.3f}   sigma = {sigma:.3f}")
    for mu, sigma in result.y_leaves:
        print(f"  Y leaf: mu = {mu:+.3f}   sigma = {sigma:.3f}")
    dev = toy.x_mean_deviation(result)
    print(f"  mean |X-leaf mean| deviation from +-0.5: {dev:.3f}")

# the generating circuit itself, for reference
truth = toy.true_circuit()
print("\ntrue mixture density at (x=-0.5, y=-2):",
      np.exp(truth.log_density([-0.5, -2.0])))
