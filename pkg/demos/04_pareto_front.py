"""The whole utility-fairness Pareto front, in one geometric walk.

Starting from the fairness target (the unfairness minimizer), the walk
repeatedly moves in the direction of steepest utility ascent that stays on
the current face, until the utility of the by-relevance ranking is reached.
The result is a piecewise-linear curve with at most n segments containing
*every* Pareto-optimal expected exposure.
"""

import numpy as np

from expofair import DbnParams, Expohedron, build_front, select_tradeoff

params = DbnParams(gamma=0.5, kappa=0.7)
rho = np.array([0.1, 0.5, 0.9])
eh = Expohedron(params, rho)
target, _ = eh.target_exposure(np.ones(3))
front = build_front(eh, target)

print("=== front vertices (demographic fairness, n = 3) ===")
for j, vertex in enumerate(front.vertices):
    print(
        f"v{j}: {np.round(vertex, 6)}  nU = {front.n_utility[j]:.5f}  "
        f"nF = {front.n_unfairness[j]:.5f}"
    )
print("v0 is the equal-exposure point, the last vertex the by-relevance one;")
print("every point between consecutive vertices is also Pareto-optimal.")

print()
print("=== scalarized selection: alpha * utility vs (1-alpha) * unfairness^2 ===")
u_max = float(eh.rho @ eh.prp_exposure)
denom = float(np.linalg.norm(eh.prp_exposure - target))
for alpha in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0):
    point = select_tradeoff(front, alpha, eh, target)
    n_util = float(eh.rho @ point) / u_max
    n_fair = float(np.linalg.norm(point - target)) / denom
    print(f"alpha = {alpha:4.2f}: point {np.round(point, 5)}  (nU {n_util:.4f}, nF {n_fair:.4f})")

print()
print("=== larger instance ===")
rng = np.random.default_rng(7)
rho20 = rng.uniform(0, 1, 20)
eh20 = Expohedron(params, rho20)
target20, shift = eh20.target_exposure(rho20)
front20 = build_front(eh20, target20)
print(
    f"n = 20 meritocratic: {len(front20)} vertices, "
    f"nU spans [{front20.n_utility[0]:.4f}, {front20.n_utility[-1]:.4f}]"
)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(front20.n_utility, front20.n_unfairness, "o-", ms=3, label="Pareto front")
    ax.set_xlabel("normalized utility")
    ax.set_ylabel("normalized unfairness")
    ax.set_title("Utility-fairness front, n = 20")
    ax.legend()
    fig.tight_layout()
    out = __file__.replace("04_pareto_front.py", "pareto_front.png")
    fig.savefig(out, dpi=120)
    print(f"saved a plot of the n = 20 front to {out}")
except ImportError:
    print("matplotlib not installed; skipping the plot")
