"""DBN exposure model and reductions of cascade-style click models to it.

A user scans a ranked list top to bottom.  After examining the item at
rank ``l`` they continue to rank ``l+1`` with probability
``gamma * (1 - kappa * rho[item at l])``, so the probability that the item
at rank ``r`` is examined at all (its *exposure*) is

    gamma**(r-1) * prod_{l < r} (1 - kappa * rho[item at l]).

Unlike position-based models, exposure here depends on *which* items sit
above, not just on the rank.  The classical cascade family (CM, SDBN, DCM,
CCM) can be rewritten in this two-parameter form, which lets the rest of
the library drive them all through the same ``(gamma, kappa, rho)``
interface; see :func:`reduce_to_dbn`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = [
    "DbnParams",
    "Ranking",
    "ClickModelSpec",
    "as_probability_vector",
    "ranking_from_scores",
    "exposure",
    "exposure_batch",
    "exposure_of_distribution",
    "reduce_to_dbn",
]

#: weights of a distribution over rankings must sum to one within this
WEIGHT_SUM_TOL = 1e-9


def as_probability_vector(values, name: str = "values") -> np.ndarray:
    """Validate and copy a sequence of probabilities into a float array."""
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    if arr.min() < 0.0 or arr.max() > 1.0:
        bad = np.flatnonzero((arr < 0.0) | (arr > 1.0))
        raise ValidationError(
            f"{name} must lie in [0, 1]; offending indices {bad.tolist()}"
        )
    return arr


@dataclass(frozen=True)
class DbnParams:
    """Browsing parameters: continuation ``gamma`` and satisfaction scale ``kappa``.

    ``gamma == 1`` is rejected everywhere because the polytope geometry
    divides by ``1 - gamma``.
    """

    gamma: float
    kappa: float

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValidationError(
                f"gamma must lie in [0, 1) (got {self.gamma!r}); gamma = 1 is not supported"
            )
        if not (0.0 <= self.kappa <= 1.0):
            raise ValidationError(f"kappa must lie in [0, 1] (got {self.kappa!r})")


class Ranking:
    """A permutation of ``n`` items.

    ``items[r]`` is the item placed at rank ``r`` and ``ranks[i]`` is the rank
    of item ``i``, both 0-based, so ``ranks[items[r]] == r``.  Instances are
    immutable, hashable and comparable by value.
    """

    __slots__ = ("items", "ranks", "_key")

    def __init__(self, items):
        arr = np.array(items, dtype=np.intp)  # copy: the array is frozen below
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("a ranking must be a non-empty 1-d sequence of items")
        n = arr.size
        ranks = np.full(n, -1, dtype=np.intp)
        inside = (arr >= 0) & (arr < n)
        if not inside.all():
            raise ValidationError(f"items must lie in 0..{n - 1}")
        ranks[arr] = np.arange(n)
        if (ranks < 0).any():
            raise ValidationError("items do not form a permutation (duplicates present)")
        arr.setflags(write=False)
        ranks.setflags(write=False)
        self.items = arr
        self.ranks = ranks
        self._key = tuple(arr.tolist())

    @classmethod
    def identity(cls, n: int) -> "Ranking":
        return cls(np.arange(n))

    @classmethod
    def from_one_indexed(cls, items) -> "Ranking":
        """Build from a 1-based item-at-rank sequence (the wire format)."""
        return cls(np.asarray(items, dtype=np.intp) - 1)

    def to_one_indexed(self) -> list[int]:
        """Serialize as a 1-based item-at-rank list (the wire format)."""
        return [int(i) + 1 for i in self.items]

    def __len__(self) -> int:
        return self.items.size

    def __iter__(self):
        return iter(self.items.tolist())

    def __eq__(self, other) -> bool:
        return isinstance(other, Ranking) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Ranking({list(self._key)})"


def ranking_from_scores(scores) -> Ranking:
    """Ranking by descending score; ties broken by ascending item index.

    Applied to relevances this yields the by-relevance (PRP) ranking; the
    stable tie-break makes runs reproducible.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or scores.size == 0:
        raise ValidationError("scores must be a non-empty 1-d sequence")
    return Ranking(np.argsort(-scores, kind="stable"))


def exposure(ranking: Ranking, params: DbnParams, rho) -> np.ndarray:
    """Exposure of every item under one ranking.

    Component ``i`` equals ``gamma**(r-1) * prod_{l<r}(1 - kappa*rho[pi(l)])``
    where ``r`` is the rank of item ``i``.  Computed with a single running
    product over ranks, O(n).
    """
    rho = as_probability_vector(rho, "rho")
    if rho.size != len(ranking):
        raise DimensionMismatchError(
            f"rho has length {rho.size} but the ranking has {len(ranking)} items"
        )
    return exposure_batch(ranking.items[None, :], params, rho)[0]


def exposure_batch(items, params: DbnParams, rho) -> np.ndarray:
    """Exposure rows for a batch of 0-based item-at-rank arrays.

    ``items`` has shape (B, n); row b holds the items of one ranking in rank
    order.  Returns a (B, n) array indexed by item, like :func:`exposure`.
    Rows are not validated as permutations; use :class:`Ranking` for that.
    """
    items = np.asarray(items, dtype=np.intp)
    rho = np.asarray(rho, dtype=float)
    if items.ndim != 2 or items.shape[1] != rho.size:
        raise DimensionMismatchError(
            f"items must have shape (B, {rho.size}), got {items.shape}"
        )
    stop = params.gamma * (1.0 - params.kappa * rho[items])
    acc = np.empty_like(stop)
    acc[:, 0] = 1.0
    np.cumprod(stop[:, :-1], axis=1, out=acc[:, 1:])
    out = np.empty_like(acc)
    np.put_along_axis(out, items, acc, axis=1)
    return out


def exposure_of_distribution(dist, params: DbnParams, rho) -> np.ndarray:
    """Expected exposure of a distribution over rankings.

    ``dist`` is any iterable of ``(weight, Ranking)`` pairs (in particular a
    ``RankingDistribution``); weights must be non-negative and sum to one
    within ``WEIGHT_SUM_TOL``.
    """
    atoms = list(dist)
    if not atoms:
        raise ValidationError("distribution has no atoms")
    weights = np.array([float(w) for w, _ in atoms])
    if weights.min() < 0.0:
        raise ValidationError("distribution weights must be non-negative")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(
            f"distribution weights sum to {weights.sum()!r}, expected 1 within {WEIGHT_SUM_TOL}"
        )
    rows = np.vstack([r.items for _, r in atoms])
    return weights @ exposure_batch(rows, params, rho)


@dataclass(frozen=True)
class ClickModelSpec:
    """Parameters of one cascade-family click model.

    Exactly the fields of the tagged ``variant`` are meaningful:

    - ``CM``:   ``attraction``
    - ``SDBN``: ``attraction``, ``satisfaction``
    - ``DCM``:  ``attraction``, ``lam`` (probability of continuing after a click)
    - ``CCM``:  ``attraction``, ``tau1``, ``tau2``, ``tau3``

    Use the per-variant constructors, which validate the fields.
    """

    variant: str
    attraction: np.ndarray
    satisfaction: np.ndarray | None = None
    lam: float | None = None
    tau1: float | None = None
    tau2: float | None = None
    tau3: float | None = None

    @classmethod
    def cascade(cls, attraction) -> "ClickModelSpec":
        return cls("CM", as_probability_vector(attraction, "attraction"))

    @classmethod
    def sdbn(cls, attraction, satisfaction) -> "ClickModelSpec":
        alpha = as_probability_vector(attraction, "attraction")
        sigma = as_probability_vector(satisfaction, "satisfaction")
        if sigma.size != alpha.size:
            raise DimensionMismatchError("attraction and satisfaction lengths differ")
        return cls("SDBN", alpha, satisfaction=sigma)

    @classmethod
    def dcm(cls, attraction, lam: float) -> "ClickModelSpec":
        if not (0.0 <= lam <= 1.0):
            raise ValidationError(f"lambda must lie in [0, 1] (got {lam!r})")
        return cls("DCM", as_probability_vector(attraction, "attraction"), lam=float(lam))

    @classmethod
    def ccm(cls, attraction, tau1: float, tau2: float, tau3: float) -> "ClickModelSpec":
        for name, tau in (("tau1", tau1), ("tau2", tau2), ("tau3", tau3)):
            if not (0.0 <= tau <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1] (got {tau!r})")
        return cls(
            "CCM",
            as_probability_vector(attraction, "attraction"),
            tau1=float(tau1),
            tau2=float(tau2),
            tau3=float(tau3),
        )


def _reduce_stop_probabilities(stop: np.ndarray) -> tuple[DbnParams, np.ndarray]:
    # Shared by CM / SDBN / DCM, whose recursion multiplies the running
    # exposure by (1 - stop_i) with no rank discount.  Splitting off
    # omega = min(stop)/2 as a fake continuation probability reproduces the
    # same products exactly: (1-omega)**(r-1) * prod (1-stop)/(1-omega).
    if np.any(stop <= 0.0) or np.any(stop >= 1.0):
        bad = np.flatnonzero((stop <= 0.0) | (stop >= 1.0))
        raise ValidationError(
            "effective stop probabilities (attraction * satisfaction) must lie "
            f"strictly in (0, 1); offending items {bad.tolist()}"
        )
    omega = 0.5 * float(stop.min())
    gamma = 1.0 - omega
    rho = 1.0 - (1.0 - stop) / gamma
    return DbnParams(gamma=gamma, kappa=1.0), rho


def reduce_to_dbn(spec: ClickModelSpec) -> tuple[DbnParams, np.ndarray]:
    """Rewrite a cascade-family model as generic ``(gamma, kappa=1, rho)``.

    The returned parameters give exactly the same exposure at every rank of
    every ranking as the source model's own recursion.
    """
    alpha = spec.attraction
    if spec.variant == "CM":
        return _reduce_stop_probabilities(alpha.copy())
    if spec.variant == "SDBN":
        return _reduce_stop_probabilities(alpha * spec.satisfaction)
    if spec.variant == "DCM":
        return _reduce_stop_probabilities(alpha * (1.0 - spec.lam))
    if spec.variant == "CCM":
        if spec.tau1 == 0.0:
            raise ValidationError("CCM reduction requires tau1 > 0")
        tau1, tau2, tau3 = spec.tau1, spec.tau2, spec.tau3
        rho = alpha * ((tau1 - tau2) / tau1 + alpha * (tau2 - tau3) / tau1)
        if rho.min() < 0.0 or rho.max() > 1.0:
            bad = np.flatnonzero((rho < 0.0) | (rho > 1.0))
            raise ValidationError(
                f"CCM reduction produced relevances outside [0, 1] at items {bad.tolist()}"
            )
        return DbnParams(gamma=tau1, kappa=1.0), rho
    raise ValidationError(f"unknown click model variant {spec.variant!r}")
