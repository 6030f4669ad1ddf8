import csv
import json

import numpy as np
import pytest

from expofair import (
    DbnParams,
    Expohedron,
    MethodSpec,
    QueryInstance,
    Ranking,
    TrivialInstanceError,
    ValidationError,
    normalized_unfairness,
    normalized_utility,
    run_experiment,
    utility,
)
from expofair.errors import DimensionMismatchError
from expofair.evaluation import resolve_merits

PARAMS = DbnParams(gamma=0.5, kappa=0.7)


@pytest.fixture
def eh2():
    return Expohedron(PARAMS, [0.9, 0.1])


class TestUtility:
    def test_by_relevance_value(self, eh2):
        assert utility(eh2.prp_exposure, [0.9, 0.1]) == pytest.approx(0.9185)

    def test_zero_exposure(self):
        assert utility([0.0, 0.0], [0.9, 0.1]) == 0.0

    def test_linearity_under_mixture(self, eh2):
        a = eh2.vertex(Ranking([0, 1]))
        b = eh2.vertex(Ranking([1, 0]))
        mix = 0.3 * a + 0.7 * b
        rho = [0.9, 0.1]
        assert utility(mix, rho) == pytest.approx(0.3 * utility(a, rho) + 0.7 * utility(b, rho))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            utility([1.0, 0.5], [0.9, 0.1, 0.3])


class TestNormalizedUtility:
    def test_by_relevance_is_one(self, eh2):
        assert normalized_utility(eh2.prp_exposure, [0.9, 0.1], eh2) == pytest.approx(1.0)

    def test_half_mixture_with_reversed(self, eh2):
        reversed_exposure = eh2.vertex(Ranking([1, 0]))
        mix = 0.5 * eh2.prp_exposure + 0.5 * reversed_exposure
        # (0.9185*0.5 + 0.5185*0.5) / 0.9185
        assert normalized_utility(mix, [0.9, 0.1], eh2) == pytest.approx(0.78226, abs=1e-5)

    def test_all_zero_relevances_rejected(self):
        eh = Expohedron(PARAMS, [0.0, 0.0])
        with pytest.raises(ValidationError):
            normalized_utility([1.0, 0.2], [0.0, 0.0], eh)


class TestNormalizedUnfairness:
    def test_target_scores_zero(self, eh2):
        target, _ = eh2.target_exposure([1.0, 1.0])
        assert normalized_unfairness(target, target, eh2) == 0.0

    def test_by_relevance_scores_one(self, eh2):
        target, _ = eh2.target_exposure([1.0, 1.0])
        assert normalized_unfairness(eh2.prp_exposure, target, eh2) == pytest.approx(1.0)

    def test_midpoint_scores_half(self, eh2):
        target, _ = eh2.target_exposure([1.0, 1.0])
        mid = 0.5 * (target + eh2.prp_exposure)
        assert normalized_unfairness(mid, target, eh2) == pytest.approx(0.5)

    def test_trivial_instance_raises(self, eh2):
        with pytest.raises(TrivialInstanceError):
            normalized_unfairness(eh2.prp_exposure, eh2.prp_exposure, eh2)


class TestResolveMerits:
    def test_modes(self):
        query = QueryInstance("q", [0.3, 0.8], merits=[2.0, 1.0])
        np.testing.assert_array_equal(resolve_merits(query, "meritocratic"), [0.3, 0.8])
        np.testing.assert_array_equal(resolve_merits(query, "demographic"), [1.0, 1.0])
        np.testing.assert_array_equal(resolve_merits(query, "custom"), [2.0, 1.0])

    def test_custom_requires_merits(self):
        with pytest.raises(ValidationError):
            resolve_merits(QueryInstance("q", [0.3, 0.8]), "custom")

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            resolve_merits(QueryInstance("q", [0.3]), "sideways")


class TestQueryInstance:
    def test_relevance_validation(self):
        with pytest.raises(ValidationError):
            QueryInstance("q", [0.5, 1.2])
        with pytest.raises(ValidationError):
            QueryInstance("q", [])

    def test_merit_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            QueryInstance("q", [0.5, 0.2], merits=[1.0])


def make_queries(count, n, seed):
    rng = np.random.default_rng(seed)
    return [QueryInstance(f"q{i}", rng.uniform(0, 1, n)) for i in range(count)]


class TestRunExperiment:
    def test_expo_alpha_one_is_by_relevance(self):
        queries = make_queries(4, 6, 40)
        report = run_experiment(queries, MethodSpec.expo(1.0), 50, PARAMS)
        assert report.mean_n_utility == pytest.approx(1.0, abs=1e-9)
        assert report.mean_n_unfairness == pytest.approx(1.0, abs=1e-6)

    def test_ctrl_zero_gain_is_by_relevance(self):
        queries = make_queries(4, 6, 41)
        report = run_experiment(queries, MethodSpec.ctrl(0.0), 50, PARAMS)
        assert report.mean_n_utility == pytest.approx(1.0, abs=1e-12)
        assert report.mean_n_unfairness == pytest.approx(1.0, abs=1e-9)

    def test_expo_pure_fairness_converges(self):
        queries = make_queries(6, 10, 42)
        report = run_experiment(queries, MethodSpec.expo(0.0), 1000, PARAMS)
        assert report.mean_n_unfairness <= 0.02

    def test_trace_decreases_and_matches_final(self):
        queries = make_queries(2, 6, 43)
        report = run_experiment(queries, MethodSpec.expo(0.0), 400, PARAMS, trace=True)
        for q in report.per_query:
            assert len(q.trace) == 400
            assert q.trace[-1] == pytest.approx(q.n_unfairness)
            assert q.trace[-1] <= q.trace[0]

    def test_aggregation_permutation_invariant(self):
        queries = make_queries(5, 5, 44)
        forward = run_experiment(queries, MethodSpec.expo(0.3), 100, PARAMS, seed=1)
        backward = run_experiment(queries[::-1], MethodSpec.expo(0.3), 100, PARAMS, seed=1)
        assert forward.mean_n_utility == pytest.approx(backward.mean_n_utility)
        assert forward.mean_n_unfairness == pytest.approx(backward.mean_n_unfairness)

    def test_pl_seeded_reproducible(self):
        queries = make_queries(3, 5, 45)
        a = run_experiment(queries, MethodSpec.pl(0.5), 100, PARAMS, seed=7)
        b = run_experiment(queries, MethodSpec.pl(0.5), 100, PARAMS, seed=7)
        assert a.mean_n_unfairness == b.mean_n_unfairness

    def test_trivial_queries_excluded(self):
        # single dominant item: meritocratic target collapses onto the
        # by-relevance vertex, so the query is excluded and reported
        trivial = QueryInstance("deg", [0.9, 0.1])
        normal = QueryInstance("ok", [0.3, 0.5, 0.8])
        report = run_experiment([trivial, normal], MethodSpec.expo(0.5), 50, PARAMS)
        assert report.excluded == ("deg",)
        assert [q.query_id for q in report.per_query] == ["ok"]

    def test_no_queries_rejected(self):
        with pytest.raises(ValidationError):
            run_experiment([], MethodSpec.expo(0.5), 10, PARAMS)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            MethodSpec("magic", 1.0)

    def test_parallel_jobs_match_serial(self):
        queries = make_queries(4, 5, 46)
        serial = run_experiment(queries, MethodSpec.pl(1.0), 60, PARAMS, seed=3, jobs=1)
        parallel = run_experiment(queries, MethodSpec.pl(1.0), 60, PARAMS, seed=3, jobs=2)
        assert serial.mean_n_unfairness == parallel.mean_n_unfairness
        assert [q.query_id for q in serial.per_query] == [q.query_id for q in parallel.per_query]


class TestReportSerialization:
    def test_json_round_trip(self, tmp_path):
        queries = make_queries(3, 4, 47)
        report = run_experiment(queries, MethodSpec.expo(0.2), 40, PARAMS)
        path = tmp_path / "report.json"
        report.write_json(path)
        payload = json.loads(path.read_text())
        assert payload["method"] == "expo"
        assert payload["param"] == 0.2
        assert len(payload["per_query"]) == len(report.per_query)
        assert payload["aggregate"]["nU"] == pytest.approx(report.mean_n_utility)

    def test_csv_flat_columns(self, tmp_path):
        queries = make_queries(3, 4, 48)
        report = run_experiment(queries, MethodSpec.ctrl(0.1), 40, PARAMS)
        path = tmp_path / "report.csv"
        report.write_csv(path)
        with open(path) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["query_id", "method", "param", "nU", "nF"]
        assert len(rows) == 1 + len(report.per_query)

    def test_csv_trace_columns(self, tmp_path):
        queries = make_queries(2, 4, 49)
        report = run_experiment(queries, MethodSpec.expo(0.0), 10, PARAMS, trace=True)
        path = tmp_path / "trace.csv"
        report.write_csv(path)
        with open(path) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["query_id", "method", "param", "nU", "nF", "t", "nF_t"]
        assert len(rows) == 1 + 10 * len(report.per_query)
        assert rows[1][5] == "1"
