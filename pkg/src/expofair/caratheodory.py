"""Decomposition of feasible exposure vectors into distributions over rankings.

Any point of an (n-1)-dimensional polytope is a convex combination of at
most n vertices.  The scheme implemented here walks greedily: take the
vertex of the current point's zone, shoot a ray from that vertex through
the point until it exits the polytope, split the point's mass between the
vertex and the exit point (which lies on a face of strictly smaller
dimension), and recurse on the exit point until it reaches a vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .click_models import WEIGHT_SUM_TOL, DbnParams, Ranking, exposure_of_distribution
from .errors import ConvergenceError, InfeasibleError, ValidationError
from .expohedron import Expohedron

__all__ = ["RankingDistribution", "boundary_intersection", "decompose"]

#: atoms lighter than this are dropped after the walk
PRUNE_TOL = 1e-12


@dataclass(frozen=True)
class RankingDistribution:
    """A finitely supported distribution over rankings.

    ``atoms`` are ``(weight, Ranking)`` pairs with non-negative weights
    summing to one; rankings are pairwise distinct.
    """

    atoms: tuple[tuple[float, Ranking], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("distribution has no atoms")
        weights = np.array([w for w, _ in self.atoms], dtype=float)
        if weights.min() < 0.0:
            raise ValidationError("distribution weights must be non-negative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(
                f"distribution weights sum to {weights.sum()!r}, expected 1 within {WEIGHT_SUM_TOL}"
            )
        if len({r for _, r in self.atoms}) != len(self.atoms):
            raise ValidationError("distribution has duplicate rankings")

    @classmethod
    def single(cls, ranking: Ranking) -> "RankingDistribution":
        return cls(((1.0, ranking),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms], dtype=float)

    @property
    def rankings(self) -> tuple[Ranking, ...]:
        return tuple(r for _, r in self.atoms)

    def expected_exposure(self, params: DbnParams, rho) -> np.ndarray:
        return exposure_of_distribution(self, params, rho)

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)


def boundary_intersection(x, v, eh: Expohedron) -> np.ndarray:
    """Farthest feasible point on the ray from ``x`` away from ``v``.

    Returns ``x + lam*(x - v)`` for the largest feasible ``lam >= 0``; if
    ``x`` already sits on the boundary with the ray pointing outward this is
    ``x`` itself.  Raises if the direction ``x - v`` is numerically zero.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    point, _ = eh.ray_exit(x, x - v)
    return point


def decompose(x, eh: Expohedron) -> RankingDistribution:
    """Express a feasible point as a mixture of at most n ranking-vertices.

    The reconstruction ``sum_i w_i * vertex(pi_i)`` matches ``x`` to within
    the accumulated bisection error (well under 1e-6 in the max norm).
    Raises ``InfeasibleError`` for points outside the polytope and
    ``ConvergenceError`` if the walk fails to reach a vertex in n steps.
    """
    if not eh.is_inside(x):
        raise InfeasibleError("point is outside the feasible exposure polytope")
    p = np.asarray(x, dtype=float).copy()
    weights: dict[Ranking, float] = {}
    remaining = 1.0
    done = False
    for _ in range(eh.n):
        face = eh.face_id(p)
        p = eh.snap_to_face(p, face)
        pi = face.pi
        v = eh.vertex(pi)
        # a residual with every prefix constraint binding *is* the zone
        # vertex (up to the membership tolerance); park the leftover mass
        if face.dim == 0 or float(np.linalg.norm(p - v)) <= eh.eps:
            weights[pi] = weights.get(pi, 0.0) + remaining
            done = True
            break
        q, _ = eh.ray_exit(p, p - v)
        # p sits between v and q, so p = share*v + (1-share)*q with
        # share = |q - p| / |q - v| (collinear points)
        denom = float(np.linalg.norm(q - v))
        share = min(max(float(np.linalg.norm(q - p)) / denom, 0.0), 1.0)
        weights[pi] = weights.get(pi, 0.0) + share * remaining
        remaining *= 1.0 - share
        p = q
    if not done:
        face = eh.face_id(p)
        v = eh.vertex(face.pi)
        residual = float(np.linalg.norm(p - v))
        if face.dim > 0 and residual > eh.eps:
            raise ConvergenceError(
                f"decomposition did not reach a vertex after {eh.n} steps; "
                f"residual distance {residual:.3e}"
            )
        weights[face.pi] = weights.get(face.pi, 0.0) + remaining
    kept = {pi: w for pi, w in weights.items() if w >= PRUNE_TOL}
    if len(kept) > eh.n:
        raise ConvergenceError(f"decomposition produced {len(kept)} atoms for n = {eh.n}")
    total = sum(kept.values())
    return RankingDistribution(tuple((w / total, pi) for pi, w in kept.items()))
