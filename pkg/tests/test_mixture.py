import numpy as np
import pytest
from scipy import integrate, stats

from mbvge import (
    BVGEPair,
    BVGEParams,
    MixtureParams,
    Region,
    bvge_logdensity,
    marginal_cdf,
    marginal_quantile,
    mix_cdf,
    mix_density,
    mix_logdensity,
    mix_loglik,
    mix_sample,
    mix_sample_arrays,
    mix_singular_mass,
    params_to_vector,
    vector_to_params,
)
from mbvge.mixture import diag_interval_prob, planar_rect_prob

LN2, LN4 = np.log(2), np.log(4)


class TestParams:
    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1, np.nan])
    def test_degenerate_weight_rejected(self, p):
        comp = BVGEParams(1, 1, 1, 1)
        with pytest.raises(ValueError):
            MixtureParams(p, comp, comp)

    def test_vector_round_trip(self, set1):
        assert params_to_vector(vector_to_params(params_to_vector(set1))) == pytest.approx(
            params_to_vector(set1)
        )


class TestSampling:
    def test_degenerate_weight_limit(self):
        comp0 = BVGEParams(1, 1, 1, 1)
        comp1 = BVGEParams(2, 2, 2, 2)
        params = MixtureParams(1 - 1e-12, comp0, comp1)
        _, _, _, labels = mix_sample_arrays(params, 10_000, np.random.default_rng(1))
        assert np.all(labels == 0)

    def test_diagonal_fraction(self, set1, rng):
        n = 100_000
        _, _, codes, _ = mix_sample_arrays(set1, n, rng)
        expected = mix_singular_mass(set1)
        se = np.sqrt(expected * (1 - expected) / n)
        assert abs((codes == 0).mean() - expected) < 3 * se

    def test_seeded_reproducibility(self, set1):
        a = mix_sample_arrays(set1, 500, np.random.default_rng(3))
        b = mix_sample_arrays(set1, 500, np.random.default_rng(3))
        for left, right in zip(a, b):
            assert np.array_equal(left, right)

    def test_labelled_pair_interface(self, set1, rng):
        pairs = mix_sample(set1, 50, rng)
        assert len(pairs) == 50
        for item in pairs:
            assert item.label in (0, 1)
            assert item.pair.region is Region.DIAGONAL or item.pair.x1 != item.pair.x2


class TestDensity:
    def test_degenerate_weight(self, set1):
        params = MixtureParams(1 - 1e-13, set1.comp0, set1.comp1)
        pair = BVGEPair(0.5, 1.0, Region.LOWER)
        expected = np.exp(bvge_logdensity(set1.comp0, 0.5, 1.0, 1))
        assert mix_density(params, pair) == pytest.approx(expected, rel=1e-10)

    def test_identical_components_any_weight(self):
        comp = BVGEParams(1.2, 0.8, 1.5, 0.9)
        single = np.exp(bvge_logdensity(comp, 0.7, 0.4, 2))
        for p in (0.2, 0.5, 0.77):
            params = MixtureParams(p, comp, comp)
            assert mix_density(params, BVGEPair(0.7, 0.4, Region.UPPER)) == pytest.approx(
                single, rel=1e-14
            )

    def test_compositional_against_components(self, set1):
        pair = BVGEPair(0.5, 1.0, Region.LOWER)
        expected = 0.3 * np.exp(bvge_logdensity(set1.comp0, 0.5, 1.0, 1)) + 0.7 * np.exp(
            bvge_logdensity(set1.comp1, 0.5, 1.0, 1)
        )
        assert mix_density(set1, pair) == pytest.approx(expected, rel=1e-14)

    def test_label_marginalization_identity(self, set1, rng):
        # p*f0 + (1-p)*f1 computed directly equals the log-sum-exp route
        x1, x2, codes, _ = mix_sample_arrays(set1, 200, rng)
        direct = set1.p * np.exp(bvge_logdensity(set1.comp0, x1, x2, codes)) + (
            1 - set1.p
        ) * np.exp(bvge_logdensity(set1.comp1, x1, x2, codes))
        via_lse = np.exp(mix_logdensity(set1, x1, x2, codes))
        np.testing.assert_allclose(via_lse, direct, rtol=1e-14)

    @pytest.mark.parametrize("which", ["set1", "set2"])
    def test_total_mass(self, which, set1, set2):
        params = set1 if which == "set1" else set2
        lower, _ = integrate.dblquad(
            lambda x2, x1: np.exp(mix_logdensity(params, x1, x2, 1)),
            0, np.inf, lambda x1: x1, np.inf, epsabs=1e-6,
        )
        upper, _ = integrate.dblquad(
            lambda x2, x1: np.exp(mix_logdensity(params, x1, x2, 2)),
            0, np.inf, 0, lambda x1: x1, epsabs=1e-6,
        )
        diag, _ = integrate.quad(
            lambda x: np.exp(mix_logdensity(params, x, x, 0)), 0, np.inf
        )
        assert lower + upper + diag == pytest.approx(1.0, abs=1e-3)

    def test_histogram_matches_closed_form_rectangles(self, set2, rng):
        n = 100_000
        x1, x2, codes, _ = mix_sample_arrays(set2, n, rng)
        off = codes != 0
        edges = [0.0, 0.2, 0.45, 0.8, 1.4, np.inf]
        planar_total = 1.0 - mix_singular_mass(set2)
        observed, expected = [], []
        for i in range(len(edges) - 1):
            for j in range(len(edges) - 1):
                hi_i = min(edges[i + 1], 60.0)
                hi_j = min(edges[j + 1], 60.0)
                mass = planar_rect_prob(set2, edges[i], hi_i, edges[j], hi_j)
                count = np.sum(
                    off
                    & (x1 > edges[i]) & (x1 <= edges[i + 1])
                    & (x2 > edges[j]) & (x2 <= edges[j + 1])
                )
                observed.append(count)
                expected.append(mass / planar_total * off.sum())
        observed, expected = np.array(observed), np.array(expected)
        keep = expected > 5
        chi2 = np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep])
        assert chi2 < stats.chi2.ppf(0.99, keep.sum() - 1)


class TestMarginals:
    def test_limit_at_infinity(self, set1):
        assert marginal_cdf(set1, 1, 1e9) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_weight_reduces_to_component(self, set1):
        params = MixtureParams(np.nextafter(1.0, 0.0), set1.comp0, set1.comp1)
        from mbvge import ge_cdf

        x = 0.9
        assert marginal_cdf(params, 1, x) == pytest.approx(
            ge_cdf(set1.comp0.marginal1(), x), abs=1e-12
        )

    @pytest.mark.parametrize("which", ["set1", "set2"])
    @pytest.mark.parametrize("coord", [1, 2])
    def test_ks_against_samples(self, which, coord, set1, set2, rng):
        params = set1 if which == "set1" else set2
        x1, x2, _, _ = mix_sample_arrays(params, 100_000, rng)
        sample = x1 if coord == 1 else x2
        result = stats.kstest(sample, lambda v: np.asarray(marginal_cdf(params, coord, v)))
        assert result.pvalue > 0.01

    def test_quantile_inverts_cdf(self, set2):
        for q in (0.05, 0.3, 0.7, 0.95):
            x = marginal_quantile(set2, 2, q)
            assert marginal_cdf(set2, 2, x) == pytest.approx(q, abs=1e-10)


class TestLoglik:
    def test_single_point_identical_components(self):
        comp = BVGEParams(1, 1, 1, 1)
        params = MixtureParams(0.37, comp, comp)
        value = mix_loglik(params, [LN2], [LN4], [1])
        assert value == pytest.approx(np.log(0.125), rel=1e-12)

    def test_lower_point_hand_value(self):
        comp = BVGEParams(1, 1, 1, 1)
        params = MixtureParams(0.5, comp, comp)
        assert mix_loglik(params, [LN2], [LN4], [1]) == pytest.approx(np.log(1 / 8))

    def test_against_high_precision_oracle(self, set1, rng):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        x1, x2, codes, _ = mix_sample_arrays(set1, 50, rng)

        def mp_ge_logpdf(a, lam, x):
            a, lam, x = mpmath.mpf(a), mpmath.mpf(lam), mpmath.mpf(x)
            return mpmath.log(a) + mpmath.log(lam) - lam * x + (a - 1) * mpmath.log(
                1 - mpmath.e ** (-lam * x)
            )

        def mp_logf(a, b, code):
            terms = []
            for w, c in ((set1.p, set1.comp0), (1 - set1.p, set1.comp1)):
                s = c.alpha1 + c.alpha2 + c.alpha3
                if code == 0:
                    lf = mpmath.log(mpmath.mpf(c.alpha3) / s) + mp_ge_logpdf(s, c.lam, a)
                elif code == 1:
                    lf = mp_ge_logpdf(c.alpha1 + c.alpha3, c.lam, a) + mp_ge_logpdf(
                        c.alpha2, c.lam, b
                    )
                else:
                    lf = mp_ge_logpdf(c.alpha1, c.lam, a) + mp_ge_logpdf(
                        c.alpha2 + c.alpha3, c.lam, b
                    )
                terms.append(mpmath.mpf(w) * mpmath.e**lf)
            return mpmath.log(terms[0] + terms[1])

        oracle = float(mpmath.fsum(mp_logf(a, b, int(c)) for a, b, c in zip(x1, x2, codes)))
        assert mix_loglik(set1, x1, x2, codes) == pytest.approx(oracle, abs=1e-10)

    def test_permutation_invariance(self, set1, rng):
        x1, x2, codes, _ = mix_sample_arrays(set1, 300, rng)
        base = mix_loglik(set1, x1, x2, codes)
        perm = rng.permutation(len(x1))
        assert mix_loglik(set1, x1[perm], x2[perm], codes[perm]) == pytest.approx(
            base, abs=1e-9
        )

    def test_dead_point_reports_minus_inf(self, set1):
        # x1 = 0 with both first-coordinate shapes above one: density 0 under
        # both components
        with pytest.warns(RuntimeWarning, match="zero density"):
            value = mix_loglik(set1, [0.0], [1.0], [1])
        assert value == -np.inf

    def test_empty_data_rejected(self, set1):
        with pytest.raises(ValueError):
            mix_loglik(set1, [], [], [])


class TestSingularMass:
    def test_symmetric_hand_value(self):
        comp = BVGEParams(1, 1, 1, 1)
        assert mix_singular_mass(MixtureParams(0.5, comp, comp)) == pytest.approx(1 / 3)

    def test_reference_set_value(self, set1):
        assert mix_singular_mass(set1) == pytest.approx(0.3 / 3.2 + 0.7 * 2 / 4.4)

    def test_diag_interval_total(self, set1):
        assert diag_interval_prob(set1, 0.0, 1e9) == pytest.approx(
            mix_singular_mass(set1), rel=1e-12
        )
