import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expofair import (
    ClickModelSpec,
    DbnParams,
    Ranking,
    ValidationError,
    exposure,
    exposure_of_distribution,
    ranking_from_scores,
    reduce_to_dbn,
)
from expofair.errors import DimensionMismatchError

from helpers import (
    all_rankings,
    ccm_exposure_direct,
    cm_exposure_direct,
    dbn_exposure_direct,
    dcm_exposure_direct,
    sdbn_exposure_direct,
)

PARAMS = DbnParams(gamma=0.5, kappa=0.7)


class TestDbnParams:
    def test_gamma_one_rejected(self):
        with pytest.raises(ValidationError):
            DbnParams(gamma=1.0, kappa=0.5)

    @pytest.mark.parametrize("gamma,kappa", [(-0.1, 0.5), (0.5, 1.2), (0.5, -0.01), (1.5, 0.5)])
    def test_bad_domains(self, gamma, kappa):
        with pytest.raises(ValidationError):
            DbnParams(gamma=gamma, kappa=kappa)

    def test_edge_values_allowed(self):
        DbnParams(gamma=0.0, kappa=0.0)
        DbnParams(gamma=0.999, kappa=1.0)


class TestRanking:
    def test_inverse_consistency(self):
        r = Ranking([2, 0, 1])
        assert [r.ranks[i] for i in r.items] == [0, 1, 2]

    def test_rejects_non_permutation(self):
        with pytest.raises(ValidationError):
            Ranking([0, 0, 1])
        with pytest.raises(ValidationError):
            Ranking([0, 3, 1])

    def test_one_indexed_round_trip(self):
        r = Ranking.from_one_indexed([3, 2, 1])
        assert list(r.items) == [2, 1, 0]
        assert r.to_one_indexed() == [3, 2, 1]

    def test_equality_and_hash(self):
        assert Ranking([1, 0]) == Ranking([1, 0])
        assert Ranking([1, 0]) != Ranking([0, 1])
        assert len({Ranking([1, 0]), Ranking([1, 0]), Ranking([0, 1])}) == 2

    @given(st.permutations(list(range(6))))
    def test_inverse_property(self, perm):
        r = Ranking(perm)
        assert all(r.ranks[r.items[k]] == k for k in range(len(perm)))

    def test_stable_tie_break(self):
        assert list(ranking_from_scores([0.5, 0.5]).items) == [0, 1]
        assert list(ranking_from_scores([0.2, 0.9, 0.5]).items) == [1, 2, 0]


class TestExposure:
    def test_figure_vertex_n3(self):
        r = Ranking.from_one_indexed([3, 2, 1])
        result = exposure(r, PARAMS, [0.1, 0.5, 0.9])
        np.testing.assert_allclose(result, [0.060125, 0.185, 1.0], atol=1e-12)

    def test_figure_vertex_n2(self):
        result = exposure(Ranking.from_one_indexed([1, 2]), PARAMS, [0.9, 0.1])
        np.testing.assert_allclose(result, [1.0, 0.185], atol=1e-12)

    def test_reversed_n2(self):
        # 0.5 * (1 - 0.7*0.1) = 0.465 for the second-ranked item
        result = exposure(Ranking.from_one_indexed([2, 1]), PARAMS, [0.9, 0.1])
        np.testing.assert_allclose(result, [0.465, 1.0], atol=1e-12)

    def test_gamma_zero_kills_lower_ranks(self):
        params = DbnParams(gamma=0.0, kappa=0.7)
        rng = np.random.default_rng(1)
        for _ in range(5):
            items = rng.permutation(4)
            e = exposure(Ranking(items), params, rng.uniform(0, 1, 4))
            assert e[items[0]] == 1.0
            assert np.all(e[items[1:]] == 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            exposure(Ranking([0, 1]), PARAMS, [0.1, 0.2, 0.3])

    def test_matches_direct_recursion(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            rho = rng.uniform(0, 1, n)
            gamma = rng.uniform(0, 0.95)
            kappa = rng.uniform(0, 1)
            items = tuple(rng.permutation(n).tolist())
            got = exposure(Ranking(items), DbnParams(gamma, kappa), rho)
            np.testing.assert_allclose(got, dbn_exposure_direct(items, gamma, kappa, rho), rtol=1e-14)

    def test_rank_one_exposure_is_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(1, 8))
            items = rng.permutation(n)
            e = exposure(Ranking(items), DbnParams(rng.uniform(0, 0.99), rng.uniform(0, 1)), rng.uniform(0, 1, n))
            assert e[items[0]] == 1.0

    def test_strictly_decreasing_in_rank(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            items = rng.permutation(n)
            e = exposure(Ranking(items), DbnParams(rng.uniform(0.05, 0.95), rng.uniform(0, 1)), rng.uniform(0, 1, n))
            ordered = e[items]
            assert np.all(np.diff(ordered) < 0.0)

    def test_swap_only_affects_suffix(self):
        # swapping ranks r < s leaves exposures at ranks < r untouched
        rng = np.random.default_rng(5)
        n = 6
        rho = rng.uniform(0, 1, n)
        items = list(rng.permutation(n))
        r, s = 2, 4
        swapped = items.copy()
        swapped[r], swapped[s] = swapped[s], swapped[r]
        before = exposure(Ranking(items), PARAMS, rho)
        after = exposure(Ranking(swapped), PARAMS, rho)
        for rank in range(r):
            assert before[items[rank]] == after[items[rank]]
        # the item moved down now sits behind a different prefix
        assert before[items[r]] != after[items[r]]


class TestExposureOfDistribution:
    def test_degenerate_single_atom(self):
        r = Ranking.from_one_indexed([2, 1])
        result = exposure_of_distribution([(1.0, r)], PARAMS, [0.9, 0.1])
        np.testing.assert_allclose(result, exposure(r, PARAMS, [0.9, 0.1]))

    def test_even_mixture(self):
        dist = [
            (0.5, Ranking.from_one_indexed([1, 2])),
            (0.5, Ranking.from_one_indexed([2, 1])),
        ]
        result = exposure_of_distribution(dist, PARAMS, [0.9, 0.1])
        np.testing.assert_allclose(result, [0.7325, 0.5925], atol=1e-12)

    def test_against_monte_carlo(self):
        rho = [0.3, 0.8, 0.6]
        a = Ranking([1, 2, 0])
        b = Ranking([2, 0, 1])
        expected = exposure_of_distribution([(0.25, a), (0.75, b)], PARAMS, rho)
        rng = np.random.default_rng(6)
        draws = rng.random(10**6) < 0.25
        ea, eb = exposure(a, PARAMS, rho), exposure(b, PARAMS, rho)
        simulated = draws.mean() * ea + (1.0 - draws.mean()) * eb
        np.testing.assert_allclose(simulated, expected, atol=1e-2)

    def test_empty_distribution_rejected(self):
        with pytest.raises(ValidationError):
            exposure_of_distribution([], PARAMS, [0.5])

    def test_bad_weights_rejected(self):
        r = Ranking([0])
        with pytest.raises(ValidationError):
            exposure_of_distribution([(0.7, r), (0.2, r)], PARAMS, [0.5])
        with pytest.raises(ValidationError):
            exposure_of_distribution([(-0.1, r), (1.1, r)], PARAMS, [0.5])


class TestReductions:
    def test_cascade_example(self):
        params, rho = reduce_to_dbn(ClickModelSpec.cascade([0.5, 0.5]))
        assert params.gamma == pytest.approx(0.75)
        assert params.kappa == 1.0
        np.testing.assert_allclose(rho, [1 / 3, 1 / 3])
        # rank-2 exposure: 0.75 * (1 - 1/3) = 0.5 equals the direct value 1 - 0.5
        e = exposure(Ranking([0, 1]), params, rho)
        assert e[1] == pytest.approx(0.5)

    def test_ccm_example(self):
        params, rho = reduce_to_dbn(ClickModelSpec.ccm([0.5, 0.5], 0.8, 0.6, 0.4))
        assert params.gamma == pytest.approx(0.8)
        np.testing.assert_allclose(rho, [0.1875, 0.1875])

    def test_dcm_full_continuation_is_pure_abandonment(self):
        # lambda = 1 means clicks never stop the user; stop probabilities
        # vanish, which violates the strict (0, 1) precondition
        with pytest.raises(ValidationError):
            reduce_to_dbn(ClickModelSpec.dcm([0.4, 0.6], lam=1.0))

    def test_dcm_near_full_continuation(self):
        alpha, lam = np.array([0.4, 0.8, 0.6]), 0.9
        params, rho = reduce_to_dbn(ClickModelSpec.dcm(alpha, lam))
        for items in all_rankings(3):
            got = dbn_exposure_direct(items, params.gamma, params.kappa, rho)
            want = dcm_exposure_direct(items, alpha, lam)
            np.testing.assert_allclose(got, want, atol=1e-13)

    def test_boundary_stop_probability_rejected(self):
        with pytest.raises(ValidationError):
            reduce_to_dbn(ClickModelSpec.cascade([0.5, 1.0]))
        with pytest.raises(ValidationError):
            reduce_to_dbn(ClickModelSpec.sdbn([0.5, 0.4], [0.5, 0.0]))

    def test_ccm_tau1_zero_rejected(self):
        with pytest.raises(ValidationError):
            reduce_to_dbn(ClickModelSpec.ccm([0.5], 0.0, 0.0, 0.0))

    def test_ccm_invalid_reduced_relevance_reported(self):
        # tau3 >> tau1 drives the reduced relevance negative
        with pytest.raises(ValidationError, match="outside"):
            reduce_to_dbn(ClickModelSpec.ccm([0.9, 0.9], 0.1, 0.9, 1.0))

    @pytest.mark.parametrize("variant", ["CM", "SDBN", "DCM", "CCM"])
    def test_reduction_matches_direct_model(self, variant):
        rng = np.random.default_rng(hash(variant) % 2**32)
        for _ in range(25):
            n = int(rng.integers(2, 6))
            alpha = rng.uniform(0.05, 0.95, n)
            if variant == "CM":
                spec = ClickModelSpec.cascade(alpha)
                direct = lambda items: cm_exposure_direct(items, alpha)
            elif variant == "SDBN":
                sigma = rng.uniform(0.05, 0.95, n)
                spec = ClickModelSpec.sdbn(alpha, sigma)
                direct = lambda items: sdbn_exposure_direct(items, alpha, sigma)
            elif variant == "DCM":
                lam = rng.uniform(0.0, 0.9)
                spec = ClickModelSpec.dcm(alpha, lam)
                direct = lambda items: dcm_exposure_direct(items, alpha, lam)
            else:
                tau1 = rng.uniform(0.2, 0.95)
                tau2 = tau1 * rng.uniform(0.1, 1.0)
                tau3 = tau2 * rng.uniform(0.1, 1.0)
                spec = ClickModelSpec.ccm(alpha, tau1, tau2, tau3)
                direct = lambda items: ccm_exposure_direct(items, alpha, tau1, tau2, tau3)
            params, rho = reduce_to_dbn(spec)
            assert 0.0 <= rho.min() and rho.max() <= 1.0
            for items in all_rankings(n):
                got = dbn_exposure_direct(items, params.gamma, params.kappa, rho)
                np.testing.assert_allclose(got, direct(items), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=2, max_value=7),
    st.floats(min_value=0.0, max_value=0.98),
    st.floats(min_value=0.0, max_value=1.0),
    st.randoms(use_true_random=False),
)
def test_exposure_monotone_in_rank(n, gamma, kappa, rnd):
    rho = np.array([rnd.random() for _ in range(n)])
    items = list(range(n))
    rnd.shuffle(items)
    e = exposure(Ranking(items), DbnParams(gamma, kappa), rho)
    ordered = e[np.array(items)]
    assert np.all(np.diff(ordered) <= 1e-15)
