"""Metrics and delivery experiments.

Utility is the scalar product of exposure with relevance; normalized
utility divides by the value at the by-relevance ranking.  Unfairness is
the Euclidean distance of an exposure vector to the fairness target;
normalized unfairness divides by the distance of the by-relevance exposure
(so by-relevance delivery scores 1 and the target scores 0).

:func:`run_experiment` delivers ``T`` rankings per query with a chosen
policy, time-averages the exposures, computes per-query metrics and
aggregates them by unweighted mean; queries whose target already equals the
by-relevance exposure are excluded and reported separately.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .caratheodory import decompose
from .click_models import DbnParams, as_probability_vector, exposure, exposure_batch
from .errors import DimensionMismatchError, TrivialInstanceError, ValidationError
from .expohedron import Expohedron
from .pareto import build_front, select_tradeoff
from .policies import DeliverySchedule, ExposureController, PlackettLucePolicy

__all__ = [
    "QueryInstance",
    "MethodSpec",
    "QueryMetrics",
    "MetricReport",
    "utility",
    "normalized_utility",
    "normalized_unfairness",
    "resolve_merits",
    "run_experiment",
]

FAIRNESS_MODES = ("meritocratic", "demographic", "custom")

#: instances whose target sits this close to the by-relevance exposure are
#: treated as trivial and excluded from aggregation (exposures are O(1), and
#: shifted targets computed by bisection can land within ~1e-9 of a vertex)
TRIVIAL_TOL = 1e-6


@dataclass(frozen=True)
class QueryInstance:
    """One query: an id, per-item relevances and optional explicit merits."""

    query_id: str
    relevances: np.ndarray
    merits: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "relevances", as_probability_vector(self.relevances, "relevances")
        )
        if self.merits is not None:
            merits = np.asarray(self.merits, dtype=float)
            if merits.shape != self.relevances.shape:
                raise DimensionMismatchError(
                    f"query {self.query_id!r}: merits and relevances lengths differ"
                )
            if merits.min() < 0.0:
                raise ValidationError(f"query {self.query_id!r}: merits must be non-negative")
            object.__setattr__(self, "merits", merits)

    @property
    def n(self) -> int:
        return self.relevances.size


@dataclass(frozen=True)
class MethodSpec:
    """A delivery method with its single trade-off parameter."""

    kind: str  # "expo" | "ctrl" | "pl"
    param: float  # alpha, gain, or temperature

    def __post_init__(self):
        if self.kind not in ("expo", "ctrl", "pl"):
            raise ValidationError(f"unknown method {self.kind!r}")

    @classmethod
    def expo(cls, alpha: float) -> "MethodSpec":
        return cls("expo", float(alpha))

    @classmethod
    def ctrl(cls, gain: float) -> "MethodSpec":
        return cls("ctrl", float(gain))

    @classmethod
    def pl(cls, temperature: float) -> "MethodSpec":
        return cls("pl", float(temperature))


def utility(e, rho) -> float:
    """Scalar product of exposure with relevance."""
    e = np.asarray(e, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if e.shape != rho.shape:
        raise DimensionMismatchError("exposure and relevance lengths differ")
    return float(rho @ e)


def normalized_utility(e, rho, eh: Expohedron) -> float:
    """Utility divided by the utility of the by-relevance ranking."""
    reference = utility(eh.prp_exposure, rho)
    if reference <= 0.0:
        raise ValidationError("by-relevance utility is zero (all-zero relevances)")
    return utility(e, rho) / reference


def normalized_unfairness(e, target, eh: Expohedron) -> float:
    """Distance to the target divided by the by-relevance ranking's distance."""
    e = np.asarray(e, dtype=float)
    target = np.asarray(target, dtype=float)
    denom = float(np.linalg.norm(eh.prp_exposure - target))
    if denom <= eh.eps:
        raise TrivialInstanceError(
            "the by-relevance exposure already equals the target; the instance "
            "is trivial and the normalization degenerates"
        )
    return float(np.linalg.norm(e - target)) / denom


def resolve_merits(query: QueryInstance, fairness: str) -> np.ndarray:
    """Merit vector for a query under a fairness mode."""
    if fairness == "meritocratic":
        return query.relevances
    if fairness == "demographic":
        return np.ones_like(query.relevances)
    if fairness == "custom":
        if query.merits is None:
            raise ValidationError(
                f"query {query.query_id!r} has no merits but fairness mode is 'custom'"
            )
        return query.merits
    raise ValidationError(f"unknown fairness mode {fairness!r}; expected one of {FAIRNESS_MODES}")


@dataclass(frozen=True)
class QueryMetrics:
    query_id: str
    n_utility: float
    n_unfairness: float
    shift: float  # affine merit shift K used for the target
    trace: np.ndarray | None = None  # nF of the running mean after each step


@dataclass(frozen=True)
class MetricReport:
    """Per-query and aggregate metrics of one (method, param, T) run."""

    method: MethodSpec
    horizon: int
    per_query: tuple[QueryMetrics, ...]
    excluded: tuple[str, ...] = field(default_factory=tuple)

    @property
    def mean_n_utility(self) -> float:
        return float(np.mean([q.n_utility for q in self.per_query])) if self.per_query else float("nan")

    @property
    def mean_n_unfairness(self) -> float:
        return float(np.mean([q.n_unfairness for q in self.per_query])) if self.per_query else float("nan")

    def to_dict(self) -> dict:
        return {
            "method": self.method.kind,
            "param": self.method.param,
            "T": self.horizon,
            "aggregate": {
                "nU": self.mean_n_utility,
                "nF": self.mean_n_unfairness,
                "queries": len(self.per_query),
            },
            "excluded": list(self.excluded),
            "per_query": [
                {
                    "query_id": q.query_id,
                    "nU": q.n_utility,
                    "nF": q.n_unfairness,
                    "shift": q.shift,
                    **({"nF_trace": q.trace.tolist()} if q.trace is not None else {}),
                }
                for q in self.per_query
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as handle:
            json.dump(self.to_dict(), handle, indent=2)
            handle.write("\n")

    def csv_rows(self) -> list[list]:
        """Flat rows: query_id, method, param, nU, nF[, t, nF_t]."""
        with_trace = any(q.trace is not None for q in self.per_query)
        rows = []
        for q in self.per_query:
            base = [q.query_id, self.method.kind, self.method.param, q.n_utility, q.n_unfairness]
            if not with_trace:
                rows.append(base)
            elif q.trace is None:
                rows.append(base + ["", ""])
            else:
                rows.extend(base + [t + 1, float(v)] for t, v in enumerate(q.trace))
        return rows

    @staticmethod
    def csv_header(with_trace: bool) -> list[str]:
        head = ["query_id", "method", "param", "nU", "nF"]
        return head + ["t", "nF_t"] if with_trace else head

    def write_csv(self, path) -> None:
        rows = self.csv_rows()
        with_trace = any(q.trace is not None for q in self.per_query)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.csv_header(with_trace))
            writer.writerows(rows)


def _delivered_exposures(
    eh: Expohedron, target: np.ndarray, method: MethodSpec, horizon: int, seed
) -> np.ndarray:
    """(T, n) exposures of the rankings a method delivers for one query."""
    if method.kind == "expo":
        front = build_front(eh, target)
        point = select_tradeoff(front, method.param, eh, target)
        dist = decompose(point, eh)
        schedule = DeliverySchedule(dist)
        indices = schedule.take_indices(horizon)
        table = exposure_batch(
            np.vstack([r.items for r in dist.rankings]), eh.params, eh.rho
        )
        return table[indices]
    if method.kind == "ctrl":
        controller = ExposureController(eh.rho, eh.params, target, gain=method.param)
        rows = np.empty((horizon, eh.n))
        for t in range(horizon):
            delivered = controller.next_ranking()
            rows[t] = exposure(delivered, eh.params, eh.rho)
        return rows
    if method.kind == "pl":
        policy = PlackettLucePolicy(eh.rho, temperature=method.param, seed=seed)
        return exposure_batch(policy.sample_items(horizon), eh.params, eh.rho)
    raise ValidationError(f"unknown method {method.kind!r}")


def _run_single(args) -> tuple[str, QueryMetrics | None]:
    query, method, horizon, params, fairness, seed, want_trace = args
    eh = Expohedron(params, query.relevances)
    mu = resolve_merits(query, fairness)
    target, shift = eh.target_exposure(mu)
    denom = float(np.linalg.norm(eh.prp_exposure - target))
    if denom <= TRIVIAL_TOL:
        return query.query_id, None  # trivial instance, excluded from aggregation
    delivered = _delivered_exposures(eh, target, method, horizon, seed)
    if want_trace:
        steps = np.arange(1, horizon + 1)[:, None]
        means = np.cumsum(delivered, axis=0) / steps
        final = means[-1]
        trace = np.linalg.norm(means - target, axis=1) / denom
    else:
        final = delivered.mean(axis=0)
        trace = None
    metrics = QueryMetrics(
        query_id=query.query_id,
        n_utility=normalized_utility(final, eh.rho, eh),
        n_unfairness=normalized_unfairness(final, target, eh),
        shift=shift,
        trace=trace,
    )
    return query.query_id, metrics


def run_experiment(
    queries,
    method: MethodSpec,
    horizon: int,
    params: DbnParams,
    *,
    fairness: str = "meritocratic",
    seed=None,
    trace: bool = False,
    jobs: int = 1,
) -> MetricReport:
    """Deliver ``horizon`` rankings per query and report (nU, nF) metrics.

    Sampling-based methods draw from per-query generators spawned from
    ``seed``, so results are reproducible and independent of ``jobs``;
    report order follows input order regardless of completion order.
    """
    queries = list(queries)
    if not queries:
        raise ValidationError("no queries to evaluate")
    if horizon < 1:
        raise ValidationError(f"horizon must be positive (got {horizon})")
    children = np.random.SeedSequence(seed).spawn(len(queries))
    tasks = [
        (query, method, horizon, params, fairness, child, trace)
        for query, child in zip(queries, children)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_single, tasks))
    else:
        outcomes = [_run_single(task) for task in tasks]
    kept = tuple(m for _, m in outcomes if m is not None)
    excluded = tuple(qid for qid, m in outcomes if m is None)
    return MetricReport(method=method, horizon=horizon, per_query=kept, excluded=excluded)
