"""Construction of the fairness-utility Pareto front in exposure space.

The two objectives are the (normalized) utility ``rho @ x`` and the
(normalized) Euclidean distance of ``x`` to the fairness target.  Starting
from the target -- the unique unfairness minimizer -- the front is traced
by repeatedly projecting ``rho`` onto the linear subspace of the current
minimal face and walking to the polytope boundary, until the utility of the
by-relevance ranking is reached.  Each walk lands on a face of strictly
smaller dimension, so the front is a piecewise-linear curve with at most n
segments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleError, ValidationError
from .expohedron import Expohedron

__all__ = ["ParetoFront", "build_front", "select_tradeoff", "dominance_check"]

#: slack used by dominance tests in normalized-metric space
DOMINANCE_TOL = 1e-6


@dataclass(frozen=True)
class ParetoFront:
    """Piecewise-linear Pareto curve, stored as its vertex sequence.

    ``vertices[0]`` is the fairness target; utility increases strictly and
    target distance weakly along the sequence; the last vertex attains the
    utility of the by-relevance ranking.  ``n_utility`` and ``n_unfairness``
    hold the per-vertex normalized metrics.  Intermediate front points are
    linear interpolations of consecutive vertices.
    """

    vertices: np.ndarray
    n_utility: np.ndarray
    n_unfairness: np.ndarray
    target: np.ndarray

    def __len__(self) -> int:
        return self.vertices.shape[0]


def _metric_scales(eh: Expohedron, target: np.ndarray) -> tuple[float, float]:
    # (max utility, unfairness normalizer); the normalizer is 0 for trivial
    # instances where the by-relevance exposure already equals the target.
    u_max = float(eh.rho @ eh.prp_exposure)
    denom = float(np.linalg.norm(eh.prp_exposure - target))
    return u_max, denom


def build_front(eh: Expohedron, target) -> ParetoFront:
    """Trace the whole Pareto front from the fairness target.

    Raises ``InfeasibleError`` for an infeasible target and
    ``ConvergenceError`` if a walk direction degenerates before the utility
    of the by-relevance ranking is reached.
    """
    target = np.asarray(target, dtype=float)
    if not eh.is_inside(target):
        raise InfeasibleError("target exposure is outside the feasible polytope")
    u_max, denom = _metric_scales(eh, target)
    v = target.copy()
    points = [v.copy()]
    while float(eh.rho @ v) < u_max - eh.eps:
        face = eh.face_id(v)
        v = eh.snap_to_face(v, face)
        if len(points) > 1:
            points[-1] = v.copy()
        direction = eh.project_onto_face_subspace(eh.rho, face)
        if float(np.linalg.norm(direction)) <= 1e-12:
            raise ConvergenceError(
                "front walk stalled: no utility-increasing direction on the "
                "current face although utility is not maximal"
            )
        v, _ = eh.ray_exit(v, direction)
        points.append(v.copy())
        if len(points) > eh.n + 1:
            raise ConvergenceError("front walk exceeded the n-segment bound")
    if len(points) > 1:
        # boundary points land at the top of the membership tolerance band;
        # re-center the final vertex too (earlier ones were snapped in-loop)
        points[-1] = eh.snap_to_face(v, eh.face_id(v))
    vertices = np.vstack(points)
    n_utility = (vertices @ eh.rho) / u_max
    if denom > eh.eps:
        n_unfairness = np.linalg.norm(vertices - target, axis=1) / denom
    else:
        n_unfairness = np.zeros(len(points))
    return ParetoFront(vertices, n_utility, n_unfairness, target.copy())


def select_tradeoff(front: ParetoFront, alpha: float, eh: Expohedron, target) -> np.ndarray:
    """Front point minimizing ``alpha*(-nU) + (1-alpha)*nF**2``.

    Along each segment the objective is a convex quadratic in the segment
    parameter (utility is linear, squared distance quadratic), so the
    minimizer is found in closed form and clipped to the segment;
    ``alpha = 0`` returns the fairness target, ``alpha = 1`` the utility
    endpoint.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValidationError(f"alpha must lie in [0, 1] (got {alpha!r})")
    target = np.asarray(target, dtype=float)
    if len(front) == 0:
        raise ValidationError("front has no vertices")
    if len(front) == 1:
        return front.vertices[0].copy()
    u_max, denom = _metric_scales(eh, target)
    inv_d2 = 1.0 / denom**2 if denom > eh.eps else 0.0

    def objective(x: np.ndarray) -> float:
        n_util = float(eh.rho @ x) / u_max
        nf2 = float((x - target) @ (x - target)) * inv_d2
        return -alpha * n_util + (1.0 - alpha) * nf2

    best_value = np.inf
    best_point = front.vertices[0]
    for j in range(len(front) - 1):
        a = front.vertices[j]
        b = front.vertices[j + 1]
        d = b - a
        quad = (1.0 - alpha) * float(d @ d) * inv_d2
        slope = (
            2.0 * (1.0 - alpha) * float((a - target) @ d) * inv_d2
            - alpha * float(eh.rho @ d) / u_max
        )
        if quad > 0.0:
            t_star = min(max(-slope / (2.0 * quad), 0.0), 1.0)
        else:
            t_star = 1.0 if slope < 0.0 else 0.0
        for t in (0.0, t_star, 1.0):
            x = a + t * d
            value = objective(x)
            if value < best_value:
                best_value = value
                best_point = x
    return best_point.copy()


def _front_unfairness_at_utility(
    front: ParetoFront, n_util: float, target: np.ndarray, denom: float
) -> float:
    # nF of the front curve at a given normalized utility, by linear
    # interpolation of the vertex sequence (utility is monotone along it).
    utils = front.n_utility
    if n_util <= utils[0]:
        return float(front.n_unfairness[0])
    if n_util >= utils[-1]:
        return float(front.n_unfairness[-1])
    j = int(np.searchsorted(utils, n_util, side="right")) - 1
    j = min(j, len(front) - 2)
    span = utils[j + 1] - utils[j]
    t = (n_util - utils[j]) / span if span > 0.0 else 1.0
    x = front.vertices[j] + t * (front.vertices[j + 1] - front.vertices[j])
    return float(np.linalg.norm(x - target)) / denom


def dominance_check(front: ParetoFront, candidate, eh: Expohedron, target) -> bool:
    """True iff no front point is strictly dominated by ``candidate``.

    Strict dominance beyond ``DOMINANCE_TOL`` means the candidate improves
    both normalized utility and normalized unfairness by more than the
    tolerance.  The candidate must be feasible; infeasible candidates (for
    example points off the polytope's hyperplane) raise ``InfeasibleError``.
    """
    candidate = np.asarray(candidate, dtype=float)
    if not eh.is_inside(candidate):
        raise InfeasibleError("dominance candidate is outside the feasible polytope")
    u_max, denom = _metric_scales(eh, target)
    if denom <= eh.eps:
        # trivial instance: the single front point is optimal in both metrics
        return True
    cand_u = float(eh.rho @ candidate) / u_max
    cand_f = float(np.linalg.norm(candidate - target)) / denom
    probe_u = cand_u - DOMINANCE_TOL
    if probe_u < front.n_utility[0]:
        # no front point has utility below the candidate's by more than tol
        return True
    front_f = _front_unfairness_at_utility(front, probe_u, np.asarray(target, float), denom)
    return not (front_f > cand_f + DOMINANCE_TOL)
