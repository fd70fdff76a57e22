"""Likelihood-ratio reweighting on exponential input traces.

Runs simulated at one parameter can stand in for runs at another: multiply
each run's output by the density ratio of its consumed inputs.  This script
checks the two identities everything downstream relies on, entirely by
Monte Carlo:

    E[W] = 1           (weights average to one under the sampling measure)
    E[g(Z) W] = E'[g]  (reweighted outputs match the target measure)
"""

import numpy as np

from iuq import IndependentExponentials, InputTrace

rng = np.random.default_rng(7)
model = IndependentExponentials(1)

theta = np.array([1.0])   # rates used to generate the runs
target = np.array([1.4])  # rates we want answers for

# one "run" consumes three draws; its trace is just those values
trace = InputTrace((model.sample(theta, rng, size=3)[:, 0],))
print("single trace:", np.round(trace.blocks[0], 3))
print("log LR to target:", model.log_lr(trace, theta, target))
print("antisymmetry check:", model.log_lr(trace, target, theta))

# identity 1: weights average to one
n, s = 500_000, 3
draws = rng.exponential(1.0 / theta[0], size=(n, s))
counts = np.full((n, 1), float(s))
sums = draws.sum(axis=1, keepdims=True)
w = np.exp(model.log_weights(counts, sums, theta, target))
print(f"\nmean weight over {n:,} runs: {w.mean():.4f}  (should be 1)")

# identity 2: reweighted output mean equals the target-measure mean
y = draws.sum(axis=1)
print(f"mean(Y W) = {np.mean(y * w):.4f}   analytic E[Y|target] = {s / target[0]:.4f}")
print(f"plain mean(Y) = {y.mean():.4f}     analytic E[Y|theta]  = {s / theta[0]:.4f}")
