"""Geometry of the feasible-exposure polytope (the "expohedron").

The exposure vectors of all n! rankings span a polytope whose points are
exactly the expected exposures of distributions over rankings.  This script
checks the hyperplane the polytope lives in, tests membership, identifies
minimal faces, and computes fairness targets for two merit notions.
"""

from itertools import permutations

import numpy as np

from expofair import DbnParams, Expohedron, Ranking

params = DbnParams(gamma=0.5, kappa=0.7)
rho = np.array([0.1, 0.5, 0.9])
eh = Expohedron(params, rho)

print("=== the polytope lives in a hyperplane ===")
print(f"normal = 1 + gamma*kappa/(1-gamma) * rho = {np.round(eh.normal, 4)}")
values = [float(eh.normal @ eh.vertex(Ranking(p))) for p in permutations(range(3))]
print(f"normal @ vertex over all 3! rankings: {np.round(values, 10)}")
print(f"all equal to the level {eh.level:.6f} -- one linear invariant shared by")
print("every ranking, which pins the polytope's dimension to n-1.")

print()
print("=== membership ===")
vertex = eh.vertex(Ranking.from_one_indexed([3, 2, 1]))
other = eh.vertex(Ranking.from_one_indexed([2, 3, 1]))
midpoint = 0.5 * (vertex + other)
print(f"vertex {np.round(vertex, 5)}: inside = {eh.is_inside(vertex)}")
print(f"edge midpoint {np.round(midpoint, 5)}: inside = {eh.is_inside(midpoint)}")
print(f"all-ones point: inside = {eh.is_inside([1.0, 1.0, 1.0])}  (off the hyperplane)")

print()
print("=== minimal faces ===")
for name, point in [("vertex", vertex), ("edge midpoint", midpoint)]:
    face = eh.face_id(point)
    print(
        f"{name}: zone permutation {face.pi.to_one_indexed()}, "
        f"binding splits {face.splits}, dimension {face.dim}"
    )
interior = np.mean([eh.vertex(Ranking(p)) for p in permutations(range(3))], axis=0)
face = eh.face_id(interior)
print(f"centroid: binding splits {face.splits}, dimension {face.dim} (interior)")

print()
print("=== fairness targets ===")
demographic, shift = eh.target_exposure(np.ones(3))
print(f"demographic (equal merit) target: {np.round(demographic, 5)}, shift K = {shift}")
meritocratic, shift = eh.target_exposure(rho)
print(f"meritocratic (merit = relevance) target: {np.round(meritocratic, 5)}, shift K = {shift}")

print()
print("When the merit ray misses the polytope the merits are relaxed to")
print("mu + K*ones for the smallest feasible K.  A skewed two-item example:")
eh2 = Expohedron(params, [0.9, 0.1])
target, shift = eh2.target_exposure([0.9, 0.1])
print(f"rho = (0.9, 0.1), mu = rho -> target {np.round(target, 5)} with K = {shift:.6f}")
print("which is the by-relevance vertex itself: the instance is trivially fair.")
