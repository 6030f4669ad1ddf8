"""Delivery policies turning optimization outputs into ranking sequences.

Three ways to deliver a sequence of rankings for one query:

- :class:`DeliverySchedule` plays out a ranking distribution as a balanced
  word, keeping every atom's count within one of its proportional quota at
  every prefix, so the time-averaged exposure converges to the
  distribution's expected exposure at rate O(1/T);
- :class:`ExposureController` re-scores items each step by how far their
  mean exposure lags a target and sorts by the corrected scores;
- :class:`PlackettLucePolicy` samples rankings from a softmax-over-scores
  distribution with a temperature knob.
"""

from __future__ import annotations

import numpy as np

from .caratheodory import RankingDistribution
from .click_models import DbnParams, Ranking, exposure, ranking_from_scores
from .errors import ValidationError

__all__ = ["DeliverySchedule", "ExposureController", "PlackettLucePolicy"]


class DeliverySchedule:
    """Balanced-word scheduler over the atoms of a ranking distribution.

    At step t (1-based) it delivers, among the atoms still below their
    pro-rata quota ``w_i*t``, the one with the largest divisor quotient
    ``w_i/(c_i+1)``, breaking ties by atom index (the quota method of
    apportionment).  The eligibility cut enforces the upper quota and the
    divisor rule the lower one, so ``|c_i(t) - w_i*t| < 1`` holds for every
    atom i at every prefix length t.  A plain greedy on the deficits
    ``w_i*t - c_i`` does *not* have this guarantee: with two equal-weight
    atoms only one can be served per step and the other's deficit can pass
    one.  Single-writer: one consumer per schedule instance.
    """

    def __init__(self, dist: RankingDistribution):
        self.source = dist
        self._weights = dist.weights
        self._rankings = dist.rankings
        self.counts = np.zeros(len(dist), dtype=np.int64)
        self.step = 0

    def next_index(self) -> int:
        """Advance one step and return the delivered atom's index."""
        self.step += 1
        eligible = self.counts < self._weights * self.step
        if not eligible.any():
            # sum(counts) = t-1 < t = sum(quotas) guarantees an eligible
            # atom in exact arithmetic; guard against float fuzz anyway
            eligible = np.ones_like(eligible)
        quotient = np.where(eligible, self._weights / (self.counts + 1.0), -1.0)
        idx = int(np.argmax(quotient))
        self.counts[idx] += 1
        return idx

    def next_ranking(self) -> Ranking:
        return self._rankings[self.next_index()]

    def take_indices(self, horizon: int) -> np.ndarray:
        """Atom indices of the next ``horizon`` deliveries."""
        if horizon < 1:
            raise ValidationError(f"horizon must be positive (got {horizon})")
        out = np.empty(horizon, dtype=np.intp)
        for k in range(horizon):
            out[k] = self.next_index()
        return out


class ExposureController:
    """Feedback controller steering delivered exposure toward a target.

    Items are scored by the relevance plus the gain times each item's
    cumulated exposure deficit against its pro-rata target,

        scores = rho + gain * (t*target - cumulated)
               = rho + gain * t * (target - mean_exposure),

    and sorted descending with stable ties.  The deficit is zero before the
    first delivery, so the first ranking is the by-relevance one; with
    ``gain = 0`` the controller reproduces it forever.  The growing ``t``
    factor gives integral action: lagging items eventually overtake, and the
    mean exposure is driven toward the target (an experimental observation,
    not a guarantee).
    """

    def __init__(self, rho, params: DbnParams, target, gain: float):
        if gain < 0.0:
            raise ValidationError(f"gain must be non-negative (got {gain!r})")
        self.rho = np.asarray(rho, dtype=float)
        self.params = params
        self.target = np.asarray(target, dtype=float)
        if self.target.shape != self.rho.shape:
            raise ValidationError("target and rho lengths differ")
        self.gain = float(gain)
        self.step = 0
        self.mean_exposure = np.zeros_like(self.rho)

    def next_ranking(self) -> Ranking:
        deficit = self.step * (self.target - self.mean_exposure)
        delivered = ranking_from_scores(self.rho + self.gain * deficit)
        seen = exposure(delivered, self.params, self.rho)
        self.mean_exposure = (self.mean_exposure * self.step + seen) / (self.step + 1)
        self.step += 1
        return delivered


class PlackettLucePolicy:
    """Sampler over rankings: items drawn sequentially without replacement,
    each with probability proportional to ``exp(score/temperature)`` over
    the remaining items.

    Implemented by perturbing the scaled scores with Gumbel noise and
    sorting, which draws from exactly that distribution while staying
    vectorizable and overflow-free at small temperatures.  Reproducible for
    a fixed seed; each policy owns its generator.
    """

    def __init__(self, scores, temperature: float, seed=None):
        if temperature <= 0.0:
            raise ValidationError(f"temperature must be positive (got {temperature!r})")
        self.scores = np.asarray(scores, dtype=float)
        self.temperature = float(temperature)
        self._logits = self.scores / self.temperature
        self._rng = np.random.default_rng(seed)

    def sample_items(self, count: int) -> np.ndarray:
        """(count, n) array of 0-based item-at-rank rows."""
        if count < 1:
            raise ValidationError(f"count must be positive (got {count})")
        noise = self._rng.gumbel(size=(count, self._logits.size))
        return np.argsort(-(self._logits + noise), axis=1, kind="stable")

    def next_ranking(self) -> Ranking:
        return Ranking(self.sample_items(1)[0])
