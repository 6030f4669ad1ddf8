"""Delivering ranking sequences: balanced words vs a controller vs sampling.

A Pareto-optimal *expected* exposure still has to be realized by an actual
sequence of rankings.  This script compares three ways to do that over a
horizon of 1000 rankings on synthetic queries and reports how close each
gets to the fairness target, and how fast.
"""

import numpy as np

from expofair import (
    DbnParams,
    MethodSpec,
    QueryInstance,
    run_experiment,
)

params = DbnParams(gamma=0.5, kappa=0.7)
rng = np.random.default_rng(3)
queries = [QueryInstance(f"q{i}", rng.uniform(0, 1, 10)) for i in range(10)]
horizon = 1000

print("=== pure-fairness delivery, meritocratic target, T = 1000 ===")
rows = [
    ("balanced words over the decomposed target", MethodSpec.expo(0.0)),
    ("feedback controller, gain 1.0", MethodSpec.ctrl(1.0)),
    ("softmax sampler, temperature 0.37", MethodSpec.pl(0.37)),
]
for label, method in rows:
    report = run_experiment(queries, method, horizon, params, seed=0)
    print(f"{label:45s} nU = {report.mean_n_utility:.4f}  nF = {report.mean_n_unfairness:.5f}")

print()
print("Balanced words realize the target almost exactly (error decays like")
print("1/T by the quota property); the controller gets close without any")
print("precomputation; independent sampling plateaus at its mixing noise and")
print("its model mismatch, and never reaches zero unfairness.")

print()
print("=== convergence of the running unfairness ===")
report = run_experiment(queries, MethodSpec.expo(0.0), horizon, params, trace=True)
trace = np.vstack([q.trace for q in report.per_query]).mean(axis=0)
for t in (1, 10, 100, 1000):
    print(f"after {t:5d} rankings: mean nF = {trace[t - 1]:.5f}")
steps = np.arange(1, horizon + 1)
window = steps >= 100
slope = np.polyfit(np.log(steps[window]), np.log(trace[window]), 1)[0]
print(f"log-log slope over t in [100, 1000]: {slope:.3f}  (rate ~ 1/T)")

print()
print("=== trade-off sweep: one line of the benchmark table ===")
for alpha in (0.0, 0.5, 1.0):
    report = run_experiment(queries, MethodSpec.expo(alpha), horizon, params, seed=0)
    print(f"alpha = {alpha:3.1f}: nU = {report.mean_n_utility:.4f}  nF = {report.mean_n_unfairness:.5f}")
