import numpy as np
import pytest
from scipy import stats

from circmanova import simgen as sg
from circmanova.errors import ConfigurationError, DataError


def _cyclic_perm(p):
    return np.roll(np.eye(p), 1, axis=0)


class TestCovariance:
    def test_circular_identity(self):
        np.testing.assert_array_equal(sg.build_covariance(sg.Circular((1.0, 0.0, 0.0)), 4), np.eye(4))

    def test_circular_p6_pattern(self):
        s0, s1, s2, s3 = 4.0, 0.9, 0.5, 0.3
        expected = np.array(
            [
                [s0, s1, s2, s3, s2, s1],
                [s1, s0, s1, s2, s3, s2],
                [s2, s1, s0, s1, s2, s3],
                [s3, s2, s1, s0, s1, s2],
                [s2, s3, s2, s1, s0, s1],
                [s1, s2, s3, s2, s1, s0],
            ]
        )
        np.testing.assert_array_equal(sg.build_covariance(sg.Circular((s0, s1, s2, s3)), 6), expected)

    def test_circular_p7_pattern(self):
        s = (5.0, 1.0, 0.6, 0.2)
        got = sg.build_covariance(sg.Circular(s), 7)
        first = [s[0], s[1], s[2], s[3], s[3], s[2], s[1]]
        np.testing.assert_array_equal(got[0], first)
        for k in range(1, 7):
            np.testing.assert_array_equal(got[k], np.roll(first, k))

    @pytest.mark.parametrize("p", [2, 5, 8, 13])
    def test_circulant_commutes_with_shift(self, p):
        sig = sg.build_covariance(sg.circular_from_correlations(p, 0.1, 0.4), p)
        perm = _cyclic_perm(p)
        np.testing.assert_allclose(perm @ sig @ perm.T, sig, atol=0)

    def test_compound_symmetric_eigenvalues(self):
        ev = np.linalg.eigvalsh(sg.build_covariance(sg.CompoundSymmetric(1.0, 0.3), 5))
        np.testing.assert_allclose(ev, [0.7, 0.7, 0.7, 0.7, 2.2], atol=1e-12)

    def test_other_structures(self):
        np.testing.assert_array_equal(sg.build_covariance(sg.Spherical(2.0), 3), 2 * np.eye(3))
        np.testing.assert_array_equal(sg.build_covariance(sg.Diagonal((1.0, 2.0)), 2), np.diag([1.0, 2.0]))
        t = sg.build_covariance(sg.Toeplitz(1.0, 0.5), 4)
        assert t[0, 3] == pytest.approx(0.125)
        m = np.array([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_array_equal(sg.build_covariance(sg.FullPD(m), 2), m)

    def test_not_positive_definite(self):
        with pytest.raises(DataError, match="min eigenvalue"):
            sg.build_covariance(sg.Circular((1.0, 0.9, 0.0)), 4)

    @pytest.mark.parametrize(
        "spec, p",
        [
            (sg.Circular((1.0, 0.2)), 6),
            (sg.CompoundSymmetric(1.0, -0.5), 4),
            (sg.Diagonal((1.0,)), 2),
            (sg.FullPD(np.array([[1.0, 2.0], [0.0, 1.0]])), 2),
        ],
    )
    def test_invalid(self, spec, p):
        with pytest.raises(DataError):
            sg.build_covariance(spec, p)

    def test_correlation_profile(self):
        c = sg.circular_from_correlations(20, 0.108, 0.216)
        assert c.sigmas[0] == 1.0 and c.sigmas[1] == pytest.approx(0.216) and c.sigmas[-1] == pytest.approx(0.108)
        assert len(c.sigmas) == 11


class TestSampling:
    def test_normal_covariance(self):
        x = sg.sample(sg.DistributionSpec("normal", sg.Spherical(1.0)), 200_000, 4, 1)
        assert np.abs(np.cov(x.T) - np.eye(4)).max() < 0.02

    def test_normal_circular_covariance(self):
        spec = sg.circular_from_correlations(6, 0.2, 0.6)
        x = sg.sample(sg.DistributionSpec("normal", spec), 200_000, 6, 2)
        assert np.abs(np.cov(x.T) - sg.build_covariance(spec, 6)).max() < 0.02

    def test_cauchy_median(self):
        mu = (1.0, -2.0, 0.5)
        x = sg.sample(sg.DistributionSpec("cauchy", sg.Spherical(1.0), location=mu), 200_000, 3, 3)
        assert np.abs(np.median(x, axis=0) - mu).max() < 0.02

    def test_zero_slant_is_normal(self):
        x = sg.sample(sg.DistributionSpec("skewnormal", sg.Spherical(1.0), slant=0.0), 100_000, 3, 4)
        assert stats.kstest(x[:, 0], "norm").statistic < 0.01

    def test_deterministic(self):
        d = sg.DistributionSpec("skewt", sg.CompoundSymmetric(2.0, 0.4), nu=5, slant=(1.0, -2.0, 0.5))
        np.testing.assert_array_equal(sg.sample(d, 50, 3, 9), sg.sample(d, 50, 3, 9))

    def test_bad_nu(self):
        with pytest.raises(DataError):
            sg.DistributionSpec("t", sg.Spherical(1.0), nu=0)

    def test_unknown_family(self):
        with pytest.raises(DataError):
            sg.DistributionSpec("laplace", sg.Spherical(1.0))


def _reference_marginal(family, nu, slant, size, rng):
    # univariate samplers coded independently of the multivariate path;
    # the first coordinate of the skew families is a univariate skew law with
    # slant a1 = (alpha'Rbar)_1 / sqrt(1 + alpha'Rbar alpha - (alpha'Rbar)_1^2 ... ) for Rbar = I: a1 = alpha_1/sqrt(1+sum(alpha_{-1}^2))
    z = rng.standard_normal(size)
    if slant is not None:
        a = np.asarray(slant)
        a1 = a[0] / np.sqrt(1 + np.sum(a[1:] ** 2))
        z = stats.skewnorm.rvs(a1, size=size, random_state=rng)
    if nu is not None:
        z = z / np.sqrt(rng.chisquare(nu, size) / nu)
    return z


@pytest.mark.parametrize(
    "family, nu, slant",
    [
        ("normal", None, None),
        ("t", 4.0, None),
        ("cauchy", 1.0, None),
        ("skewnormal", None, (3.0, 1.0, -1.0)),
        ("skewt", 6.0, (-2.0, 0.5, 0.5)),
        ("skewcauchy", 1.0, (1.5, 0.0, 2.0)),
    ],
)
def test_marginal_matches_reference(family, nu, slant):
    spec = sg.DistributionSpec(family, sg.Spherical(1.0), nu=nu if family in ("t", "skewt") else None, slant=slant or 0.0)
    x = sg.sample(spec, 100_000, 3, 31)[:, 0]
    ref = _reference_marginal(family, nu, slant, 100_000, np.random.default_rng(32))
    assert stats.ks_2samp(x, ref).statistic < 0.01


class TestShift:
    def test_zero_shift(self, rng):
        g = [rng.standard_normal((3, 4)), rng.standard_normal((2, 4))]
        out = sg.apply_shift(g, (0.0, 0.0))
        for a, b in zip(g, out):
            np.testing.assert_array_equal(a, b)

    def test_inverse(self, rng):
        g = [rng.standard_normal((3, 6)) for _ in range(3)]
        back = sg.apply_shift(sg.apply_shift(g, (0.5, -0.5)), (-0.5, 0.5))
        for a, b in zip(g, back):
            np.testing.assert_allclose(a, b, atol=1e-15)

    def test_block_pattern(self):
        g = [np.zeros((1, 5)), np.zeros((2, 5))]
        out = sg.apply_shift(g, (1.0, -1.0))
        np.testing.assert_array_equal(out[0], np.zeros((1, 5)))
        np.testing.assert_array_equal(out[1], [[1, 1, 1, -1, -1]] * 2)

    def test_mean_moves_by_shift(self):
        d = sg.DistributionSpec("normal", sg.Spherical(1.0))
        base = [sg.sample(d, 100_000, 4, 1), sg.sample(d, 100_000, 4, 2)]
        out = sg.apply_shift(base, (0.75, -0.25))
        diff = out[1].mean(axis=0) - base[1].mean(axis=0)
        np.testing.assert_allclose(diff, [0.75, 0.75, -0.25, -0.25], atol=1e-12)
        assert np.abs(out[1].mean(axis=0) - [0.75, 0.75, -0.25, -0.25]).max() < 4 / np.sqrt(100_000) * 3

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            sg.apply_shift([np.zeros((2, 2)), np.zeros((2, 2))], (1.0, 2.0, 3.0))
