"""Fairness of exposure in rankings under cascade-style browsing models.

The library computes, for one query, the whole Pareto front between user
utility and fairness of item exposure; decomposes any feasible exposure
vector into a distribution over at most n rankings; and delivers ranking
sequences realizing a chosen trade-off, with baselines and evaluation
utilities to compare them.
"""

from .caratheodory import RankingDistribution, boundary_intersection, decompose
from .click_models import (
    ClickModelSpec,
    DbnParams,
    Ranking,
    exposure,
    exposure_batch,
    exposure_of_distribution,
    ranking_from_scores,
    reduce_to_dbn,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    ExpofairError,
    InfeasibleError,
    TrivialInstanceError,
    ValidationError,
)
from .evaluation import (
    MethodSpec,
    MetricReport,
    QueryInstance,
    QueryMetrics,
    normalized_unfairness,
    normalized_utility,
    resolve_merits,
    run_experiment,
    utility,
)
from .expohedron import Expohedron, Face
from .pareto import ParetoFront, build_front, dominance_check, select_tradeoff
from .policies import DeliverySchedule, ExposureController, PlackettLucePolicy

__version__ = "0.1.0"

__all__ = [
    "ClickModelSpec",
    "ConvergenceError",
    "DbnParams",
    "DeliverySchedule",
    "DimensionMismatchError",
    "ExpofairError",
    "Expohedron",
    "ExposureController",
    "Face",
    "InfeasibleError",
    "MethodSpec",
    "MetricReport",
    "ParetoFront",
    "PlackettLucePolicy",
    "QueryInstance",
    "QueryMetrics",
    "Ranking",
    "RankingDistribution",
    "TrivialInstanceError",
    "ValidationError",
    "boundary_intersection",
    "build_front",
    "decompose",
    "dominance_check",
    "exposure",
    "exposure_batch",
    "exposure_of_distribution",
    "normalized_unfairness",
    "normalized_utility",
    "ranking_from_scores",
    "reduce_to_dbn",
    "resolve_merits",
    "run_experiment",
    "select_tradeoff",
    "utility",
]
