import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circmanova.errors import (
    DataError,
    DegenerateScatterError,
    InsufficientSampleError,
    InvalidDimensionError,
)
from circmanova.statistic import (
    GroupedSample,
    between_scatter,
    build_u_matrix,
    lrt_statistic,
    pair_average,
    within_scatter,
)

TOY = GroupedSample([np.array([[0.0], [2.0]]), np.array([[1.0], [3.0]])])


def _random_sample(rng, sizes, p):
    return GroupedSample([rng.standard_normal((k, p)) + rng.standard_normal(p) for k in sizes])


class TestUMatrix:
    def test_p1(self):
        assert build_u_matrix(1).tolist() == [[1.0]]

    def test_p2(self):
        expected = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        np.testing.assert_allclose(build_u_matrix(2), expected, atol=1e-15)

    def test_p6_orthogonal(self):
        u = build_u_matrix(6)
        assert np.abs(u @ u.T - np.eye(6)).max() < 1e-12

    @pytest.mark.parametrize("p", range(1, 65))
    def test_orthogonal_up_to_64(self, p):
        u = build_u_matrix(p)
        assert np.abs(u @ u.T - np.eye(p)).max() < 1e-10

    def test_symmetric(self):
        u = build_u_matrix(9)
        np.testing.assert_array_equal(u, u.T)

    @pytest.mark.parametrize("p", [0, -3, 2.5])
    def test_bad_dimension(self, p):
        with pytest.raises(InvalidDimensionError):
            build_u_matrix(p)


class TestScatter:
    def test_toy_within(self):
        assert within_scatter(TOY)[0, 0] == pytest.approx(4.0)

    def test_toy_between(self):
        assert between_scatter(TOY)[0, 0] == pytest.approx(1.0)

    def test_identical_rows_give_zero_within(self):
        s = GroupedSample([np.tile([1.0, 2.0, 3.0], (3, 1)), np.tile([0.0, 5.0, 1.0], (2, 1))])
        np.testing.assert_array_equal(within_scatter(s), np.zeros((3, 3)))

    def test_equal_means_give_zero_between(self):
        s = GroupedSample([[[1.0, 2.0], [3.0, 4.0]], [[2.0, 3.0]], [[0.0, 1.0], [4.0, 5.0]]])
        np.testing.assert_allclose(between_scatter(s), 0.0, atol=1e-14)

    def test_within_matches_double_loop(self, rng):
        s = _random_sample(rng, (4, 6, 3), 5)
        expected = np.zeros((5, 5))
        for g in s.groups:
            mean = g.mean(axis=0)
            for row in g:
                for a in range(5):
                    for b in range(5):
                        expected[a, b] += (row[a] - mean[a]) * (row[b] - mean[b])
        np.testing.assert_allclose(within_scatter(s), expected, atol=1e-12)

    def test_between_trace_identity(self, rng):
        s = _random_sample(rng, (5, 2, 7), 4)
        grand = s.stacked().mean(axis=0)
        expected = sum(len(g) * np.sum((g.mean(axis=0) - grand) ** 2) for g in s.groups)
        assert np.trace(between_scatter(s)) == pytest.approx(expected, rel=1e-12)

    def test_between_rank(self, rng):
        s = _random_sample(rng, (5, 6, 7), 8)
        assert np.linalg.matrix_rank(between_scatter(s), tol=1e-9) <= 2

    def test_singleton_groups_contribute_nothing_to_within(self, rng):
        big = rng.standard_normal((4, 3))
        s = GroupedSample([big, rng.standard_normal((1, 3)), rng.standard_normal((1, 3))])
        c = big - big.mean(axis=0)
        np.testing.assert_allclose(within_scatter(s), c.T @ c, atol=1e-13)


def _straight_line_lambda(groups):
    # independent transcription: explicit loops, 1-based pairing j <-> p-j+2
    x = np.vstack(groups)
    n, p = x.shape
    grand = x.mean(axis=0)
    a = np.zeros((p, p))
    b = np.zeros((p, p))
    for g in groups:
        mk = g.mean(axis=0)
        for row in g:
            a += np.outer(row - mk, row - mk)
        b += len(g) * np.outer(mk - grand, mk - grand)
    u = np.empty((p, p))
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            ang = 2 * np.pi * (i - 1) * (j - 1) / p
            u[i - 1, j - 1] = (np.cos(ang) + np.sin(ang)) / np.sqrt(p)
    astar = u @ a @ u.T
    cstar = u @ (a + b) @ u.T
    lam = 1.0
    for j in range(1, p + 1):
        partner = 1 if j == 1 else p - j + 2
        vs = 0.5 * (astar[j - 1, j - 1] + astar[partner - 1, partner - 1])
        vd = 0.5 * (cstar[j - 1, j - 1] + cstar[partner - 1, partner - 1])
        lam *= vs / vd
    return lam


class TestLrt:
    def test_toy_lambda(self):
        res = lrt_statistic(TOY)
        assert res.lam == pytest.approx(0.8, rel=1e-14)
        assert res.w == pytest.approx(-np.log(0.8), rel=1e-14)

    def test_equal_means_give_one(self):
        s = GroupedSample([[[1.0, 2.0], [3.0, 5.0]], [[2.0, 3.5]], [[0.0, 1.0], [4.0, 6.0]]])
        res = lrt_statistic(s)
        assert res.lam == pytest.approx(1.0, abs=1e-14)
        assert res.w == pytest.approx(0.0, abs=1e-14)

    def test_duplicate_implementation(self, rng):
        groups = [rng.standard_normal((5, 4)), rng.standard_normal((6, 4))]
        assert lrt_statistic(GroupedSample(groups)).lam == pytest.approx(
            _straight_line_lambda(groups), rel=1e-12
        )

    @pytest.mark.parametrize("p", [1, 2, 5, 8])
    def test_duplicate_implementation_other_shapes(self, rng, p):
        groups = [rng.standard_normal((k, p)) for k in (3, 2, 4)]
        assert lrt_statistic(GroupedSample(groups)).lam == pytest.approx(
            _straight_line_lambda(groups), rel=1e-12
        )

    def test_product_identity_and_ordering(self, rng):
        res = lrt_statistic(_random_sample(rng, (4, 5, 3), 7))
        assert res.lam == pytest.approx(np.prod(res.vstar / res.vdstar), rel=1e-10)
        assert np.all(res.vstar > 0)
        assert np.all(res.vstar <= res.vdstar * (1 + 1e-12))

    def test_pairing_symmetry(self, rng):
        for p in (6, 7):
            res = lrt_statistic(_random_sample(rng, (4, 5), p))
            for j in range(2, p + 1):  # 1-based
                assert res.vstar[j - 1] == res.vstar[p - j + 1]
                assert res.vdstar[j - 1] == res.vdstar[p - j + 1]

    def test_pair_average_singletons(self):
        d = np.arange(1.0, 7.0)
        out = pair_average(d)
        assert out[0] == 1.0 and out[3] == 4.0
        assert out[1] == out[5] == 4.0

    def test_minimal_sample_runs(self, rng):
        s = GroupedSample([rng.standard_normal((2, 10)), rng.standard_normal((1, 10)), rng.standard_normal((1, 10))])
        res = lrt_statistic(s)
        assert 0 < res.lam <= 1

    def test_insufficient_sample(self):
        with pytest.raises(InsufficientSampleError):
            lrt_statistic(GroupedSample([[[1.0]], [[2.0]]]))

    def test_degenerate_scatter(self):
        s = GroupedSample([np.ones((3, 2)), np.zeros((3, 2))])
        with pytest.raises(DegenerateScatterError):
            lrt_statistic(s)

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        p=st.integers(1, 9),
        shift=st.lists(st.floats(-1e3, 1e3), min_size=9, max_size=9),
    )
    def test_range_and_shift_invariance(self, seed, p, shift):
        r = np.random.default_rng(seed)
        groups = [r.standard_normal((k, p)) for k in (3, 4, 2)]
        res = lrt_statistic(GroupedSample(groups))
        assert 0 < res.lam <= 1
        moved = lrt_statistic(GroupedSample([g + np.array(shift[:p]) for g in groups]))
        assert moved.lam == pytest.approx(res.lam, rel=1e-8, abs=1e-10)


class TestGroupedSample:
    def test_one_group_rejected(self):
        with pytest.raises(DataError):
            GroupedSample([np.ones((3, 2))])

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            GroupedSample([np.ones((3, 2)), np.ones((3, 3))])

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError):
            GroupedSample([[[1.0, np.nan]], [[1.0, 2.0]]])

    def test_properties(self):
        s = GroupedSample([np.ones((3, 2)), np.zeros((2, 2))])
        assert (s.n, s.q, s.p, s.sizes) == (5, 2, 2, (3, 2))
        assert s.stacked().shape == (5, 2)
