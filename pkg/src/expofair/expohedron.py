"""Geometry of the feasible-exposure polytope.

For fixed ``(gamma, kappa, rho)`` the exposure vectors of all n! rankings
are the vertices of a convex polytope whose points are exactly the expected
exposures achievable by distributions over rankings.  Two facts make the
polytope tractable without enumerating vertices:

- it lies in the hyperplane ``{x : normal @ x == level}`` with
  ``normal = 1 + gamma*kappa/(1-gamma) * rho``, and
- inside the *zone* of a permutation ``pi`` (vectors whose components are
  descending in pi's order) it is cut out by the prefix constraints
  ``nu_s @ (x - vertex(pi)) <= 0`` for ``s = 1..n-1``, where ``nu_s`` keeps
  the components of ``normal`` on pi's top ``s`` items and zeroes the rest.

Every zone contains exactly one vertex (the exposure of its permutation),
so membership, minimal-face identification and boundary line searches all
reduce to one sort plus prefix sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .click_models import (
    DbnParams,
    Ranking,
    as_probability_vector,
    exposure,
    ranking_from_scores,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InfeasibleError,
    ValidationError,
)

__all__ = ["Face", "Expohedron"]

#: relative bisection tolerance for boundary and shift searches
BISECTION_RTOL = 1e-12
#: Gram-Schmidt drop tolerance for near-dependent face normals
GS_DROP_TOL = 1e-10
#: cap on the affine merit shift searched by target_exposure
SHIFT_CAP = 1e6


@dataclass(frozen=True)
class Face:
    """A face of the polytope: a zone permutation plus its binding splits.

    ``splits`` holds 1-based prefix sizes ``s`` whose constraint
    ``nu_s @ (x - vertex(pi)) == 0`` binds; the face has dimension
    ``n - len(splits)``.  Faces returned by :meth:`Expohedron.face_id`
    always contain ``n`` (the ambient hyperplane constraint).
    """

    pi: Ranking
    splits: tuple[int, ...]

    def __post_init__(self):
        n = len(self.pi)
        if any(not (1 <= s <= n) for s in self.splits):
            raise ValidationError(f"splits must lie in 1..{n}")
        if tuple(sorted(set(self.splits))) != self.splits:
            raise ValidationError("splits must be sorted and unique")

    @property
    def dim(self) -> int:
        return len(self.pi) - len(self.splits)


class Expohedron:
    """The feasible-exposure polytope of one ``(gamma, kappa, rho)`` instance.

    Immutable after construction: the hyperplane normal, its level, the
    by-relevance ranking and its exposure are computed eagerly, so instances
    are safe to share across threads.
    """

    def __init__(self, params: DbnParams, rho):
        if not isinstance(params, DbnParams):
            params = DbnParams(*params)
        self.params = params
        self.rho = as_probability_vector(rho, "rho")
        self.n = self.rho.size
        g, k = params.gamma, params.kappa
        self.normal = 1.0 + (g * k / (1.0 - g)) * self.rho
        self.normal.setflags(write=False)
        self.level = float(self.normal @ self.vertex(Ranking.identity(self.n)))
        #: equality tolerance for all hyperplane tests, scale-relative
        self.eps = 1e-9 * max(1.0, abs(self.level))
        self.prp = ranking_from_scores(self.rho)
        self.prp_exposure = self.vertex(self.prp)
        self.prp_exposure.setflags(write=False)

    # ------------------------------------------------------------------
    # vertices and zones

    def vertex(self, ranking: Ranking) -> np.ndarray:
        """Exposure vector of a single ranking (a polytope vertex)."""
        return exposure(ranking, self.params, self.rho)

    def zone_of(self, x) -> Ranking:
        """Permutation sorting ``x`` descending, ties by ascending item index."""
        x = self._check_vector(x)
        return ranking_from_scores(x)

    def _check_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatchError(f"expected a vector of length {self.n}, got shape {x.shape}")
        return x

    # ------------------------------------------------------------------
    # face normals and membership

    def face_normal(self, s: int, pi: Ranking) -> np.ndarray:
        """Normal of the prefix-``s`` constraint of zone ``pi``, ambient basis.

        Component ``j`` is ``normal[j]`` if item ``j`` sits in pi's top ``s``
        ranks and 0 otherwise; ``s = n`` gives the global hyperplane normal.
        """
        if not (1 <= s <= self.n):
            raise ValidationError(f"split must lie in 1..{self.n} (got {s})")
        return np.where(pi.ranks < s, self.normal, 0.0)

    def _prefix_gaps(self, x: np.ndarray, pi: Ranking) -> np.ndarray:
        # entry s-1 equals nu_s @ (x - vertex(pi)); entry n-1 is the
        # hyperplane gap.  One O(n log n) sort upstream, O(n) here.
        w = self.normal * (x - self.vertex(pi))
        return np.cumsum(w[pi.items])

    def is_inside(self, x) -> bool:
        """Membership test: hyperplane equality plus zone prefix constraints."""
        x = self._check_vector(x)
        gaps = self._prefix_gaps(x, self.zone_of(x))
        return bool(abs(gaps[-1]) <= self.eps and np.all(gaps[:-1] <= self.eps))

    def face_id(self, x) -> Face:
        """Smallest face containing ``x``; raises if ``x`` is outside."""
        x = self._check_vector(x)
        pi = self.zone_of(x)
        gaps = self._prefix_gaps(x, pi)
        if abs(gaps[-1]) > self.eps or np.any(gaps[:-1] > self.eps):
            raise InfeasibleError("point is outside the feasible exposure polytope")
        splits = tuple(int(s) for s in np.flatnonzero(np.abs(gaps) <= self.eps) + 1)
        return Face(pi, splits)

    def snap_to_face(self, x, face: Face) -> np.ndarray:
        """Minimal O(n) perturbation of ``x`` making the face's binding
        prefix constraints hold exactly instead of merely within tolerance.

        Iterative walks (decomposition, front tracing) land their points at
        the very top of the membership tolerance band; re-centering them on
        the face keeps subsequent ray searches from exiting immediately
        through float noise along the binding normals.
        """
        x = self._check_vector(x)
        v = self.vertex(face.pi)
        weighted = (self.normal * (x - v))[face.pi.items]
        start = 0
        for s in face.splits:
            block = slice(start, s)
            width = s - start
            weighted[block] -= weighted[block].sum() / width
            start = s
        out = v.copy()
        out[face.pi.items] += weighted / self.normal[face.pi.items]
        return out

    # ------------------------------------------------------------------
    # projections

    def _face_basis(self, face: Face) -> np.ndarray:
        # Orthonormal basis of span{nu_s : s in splits}: Gram-Schmidt with a
        # re-orthogonalization sweep ("twice is enough"), dropping
        # near-dependent vectors.  Kept in matrix form so each new vector
        # costs two matrix-vector products instead of a Python loop.
        basis = np.empty((len(face.splits), self.n))
        count = 0
        for s in face.splits:
            w = self.face_normal(s, face.pi)
            scale = float(np.linalg.norm(w))
            if count:
                held = basis[:count]
                w = w - held.T @ (held @ w)
                w = w - held.T @ (held @ w)
            norm_w = float(np.linalg.norm(w))
            if norm_w > GS_DROP_TOL * max(1.0, scale):
                basis[count] = w / norm_w
                count += 1
        return basis[:count]

    def project_onto_face_subspace(self, v, face: Face) -> np.ndarray:
        """Component of ``v`` orthogonal to every binding face normal.

        Walking from a point of the face along the result stays inside the
        face's affine hull; the residual dot product with each normal is at
        machine-noise level (contractually below 1e-9).
        """
        v = self._check_vector(v)
        basis = self._face_basis(face)
        if basis.size == 0:
            return v.copy()
        return v - basis.T @ (basis @ v)

    # ------------------------------------------------------------------
    # line searches

    def ray_exit(self, origin: np.ndarray, direction: np.ndarray) -> tuple[np.ndarray, float]:
        """Last feasible point of ``{origin + lam*direction : lam >= 0}``.

        Requires ``origin`` inside and a numerically nonzero direction.  The
        bracket is grown by doubling, then bisected to relative tolerance
        ``BISECTION_RTOL`` on ``lam``; the returned point is the inner
        bracket end, so it still tests inside.
        """
        if float(np.linalg.norm(direction)) <= 1e-12:
            raise ValidationError("ray direction is numerically zero")
        lo, hi = 0.0, 1.0
        for _ in range(200):
            if not self.is_inside(origin + hi * direction):
                break
            lo = hi
            hi *= 2.0
        else:  # the polytope is bounded, so this signals a broken direction
            raise ConvergenceError("ray never left the polytope while growing the bracket")
        while hi - lo > BISECTION_RTOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if self.is_inside(origin + mid * direction):
                lo = mid
            else:
                hi = mid
        return origin + lo * direction, lo

    # ------------------------------------------------------------------
    # fairness targets

    def target_exposure(self, mu) -> tuple[np.ndarray, float]:
        """Feasible exposure proportional to the merit vector ``mu``.

        The ray ``{k*mu : k > 0}`` crosses the polytope's hyperplane at one
        point; if that point is feasible it is returned with shift ``K = 0``.
        Otherwise the merits are relaxed to ``mu + K*ones`` for the smallest
        ``K >= 0`` making the crossing feasible, found by doubling from
        ``K = 1`` and bisecting to relative tolerance ``BISECTION_RTOL``
        (at most 200 halvings); the feasible bracket end is returned.
        """
        mu = self._check_vector(mu)
        if mu.min() < 0.0:
            raise ValidationError("merits must be non-negative")
        if not mu.any():
            raise ValidationError("merits must not be all zero")

        def point(shift: float) -> np.ndarray:
            w = mu + shift
            return (self.level / float(self.normal @ w)) * w

        if self.is_inside(point(0.0)):
            return point(0.0), 0.0
        lo, hi = 0.0, 1.0
        while not self.is_inside(point(hi)):
            lo = hi
            hi *= 2.0
            if hi > SHIFT_CAP:
                raise InfeasibleError(
                    f"no affine merit shift below {SHIFT_CAP:g} yields a feasible target"
                )
        for _ in range(200):
            if hi - lo <= BISECTION_RTOL * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if self.is_inside(point(mid)):
                hi = mid
            else:
                lo = mid
        return point(hi), hi
