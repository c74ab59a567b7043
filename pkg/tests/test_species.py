"""Tests unitaires pour les lois a posteriori de fréquence (src.species).

Test coverage:
    - DP: valeurs de référence, normalisation, cas limites
    - PYP exact: équivalence avec l'oracle d'énumération, limite α → 0
    - PYP Monte Carlo: accord avec l'exact (erreurs standard), déterminisme
    - Estimateur asymptotique
    - Évaluateur Poisson-Kingman numérique (réductions DP et PYP)
    - Résumés (moyenne, médiane, mode, intervalle) et baseline count-min
"""

import math
from itertools import product

import numpy as np
import pytest

from src.models import CrmSpec, DpParams, MethodTag, PkTilt, PosteriorPmf, PypParams, Sketch
from src.simulate import partition_oracle
from src.species import (
    bucket_log_weights,
    cms_baseline,
    dp_freq_posterior,
    dp_posterior_mean,
    pk_freq_posterior_numeric,
    pyp_exact_all_buckets,
    pyp_freq_posterior_exact,
    pyp_freq_posterior_mc,
    pyp_mean_asymptotic,
    summarize,
)
from src.validation import InvalidConfigurationError, TractabilityError


def _two_bucket_sketches(n: int):
    for c0 in range(n + 1):
        yield (c0, n - c0)


class TestDpFreqPosterior:
    """Tests pour dp_freq_posterior()."""

    def test_reference_values(self) -> None:
        """Test c_j = 5, θ = 1, J = 10: P(0) = 0.1/5.1, P(5) ≈ 0.80141."""
        pmf = dp_freq_posterior(5, DpParams(theta=1.0), J=10)
        assert pmf.method is MethodTag.DP_EXACT
        assert pmf.support_max == 5
        assert pmf.probs[0] == pytest.approx(0.1 / 5.1, rel=1e-12)
        assert pmf.probs[5] == pytest.approx(0.80141, abs=1e-5)

    def test_mean(self) -> None:
        """Test moyenne Bêta-binomiale c_j/(1 + θ/J)."""
        pmf = dp_freq_posterior(5, DpParams(theta=1.0), J=10)
        expected = 5 / 1.1
        assert dp_posterior_mean(5, DpParams(1.0), 10) == pytest.approx(expected)
        assert summarize(pmf).mean == pytest.approx(expected, rel=1e-12)

    def test_empty_bucket(self) -> None:
        """Test c_j = 0 → P(0) = 1."""
        pmf = dp_freq_posterior(0, DpParams(2.0), J=4)
        np.testing.assert_allclose(pmf.probs, [1.0])

    @pytest.mark.parametrize("c_j", [1, 10, 1000, 100_000])
    @pytest.mark.parametrize("vartheta", [1e-3, 0.1, 1.0, 10.0, 1e3])
    def test_normalization_grid(self, c_j: int, vartheta: float) -> None:
        """Test Σ P(l) = 1 et P(0) = ϑ/(ϑ + c_j) jusqu'à c_j = 10^5."""
        pmf = dp_freq_posterior(c_j, DpParams(theta=vartheta * 8), J=8)
        probs = pmf.probs
        assert np.all(probs >= 0)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert probs[0] == pytest.approx(vartheta / (vartheta + c_j), rel=1e-9)

    def test_negative_count(self) -> None:
        """Test c_j < 0 rejeté."""
        with pytest.raises(InvalidConfigurationError):
            dp_freq_posterior(-1, DpParams(1.0), J=2)

    @pytest.mark.parametrize("theta", [0.5, 2.0, 10.0])
    def test_matches_partition_oracle(self, theta: float) -> None:
        """Test égalité avec l'énumération des partitions (n ≤ 6, J = 2)."""
        for n in range(1, 7):
            oracle = partition_oracle(n, 2, DpParams(theta))
            for counts, j in product(_two_bucket_sketches(n), range(2)):
                expected = oracle.conditional(counts, j)
                pmf = dp_freq_posterior(counts[j], DpParams(theta), J=2)
                np.testing.assert_allclose(pmf.probs, expected, rtol=0, atol=1e-10)


class TestPypExact:
    """Tests pour pyp_freq_posterior_exact() et pyp_exact_all_buckets()."""

    def test_normalized_single_item(self) -> None:
        """Test J = 2, c = (1, 0): P(0) + P(1) = 1."""
        pmf = pyp_freq_posterior_exact(Sketch.from_counts([1, 0]), 0, PypParams(0.3, 2.0))
        assert pmf.method is MethodTag.PYP_EXACT
        assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("gamma", [0.5, 1.0])
    def test_matches_partition_oracle(self, alpha: float, gamma: float) -> None:
        """Test égalité avec l'énumération des partitions (n ≤ 6, J = 2)."""
        params = PypParams(alpha, gamma)
        for n in range(1, 7):
            oracle = partition_oracle(n, 2, params)
            for counts, j in product(_two_bucket_sketches(n), range(2)):
                pmf = pyp_freq_posterior_exact(Sketch.from_counts(list(counts)), j, params)
                np.testing.assert_allclose(
                    pmf.probs, oracle.conditional(counts, j), rtol=0, atol=1e-8
                )

    def test_bucket_weights_match_oracle(self) -> None:
        """Test Pr[h(X_{n+1}) = j | C] exact contre l'oracle (J = 3)."""
        params = PypParams(0.5, 1.0)
        oracle = partition_oracle(4, 3, params)
        counts = (2, 1, 1)
        marginal = oracle.sketch_marginal(counts)
        expected = [
            sum(p for (c, j, _), p in oracle.joint_table.items() if c == counts and j == bucket)
            / marginal
            for bucket in range(3)
        ]
        weights = np.exp(bucket_log_weights(Sketch.from_counts(list(counts)), params))
        np.testing.assert_allclose(weights, expected, atol=1e-8)

    def test_all_buckets_consistent(self) -> None:
        """Test calcul groupé ≡ calcul bucket par bucket."""
        sketch = Sketch.from_counts([4, 0, 2, 3])
        params = PypParams(0.4, 1.5)
        log_pmfs, log_weights = pyp_exact_all_buckets(sketch, params)
        assert np.exp(log_weights).sum() == pytest.approx(1.0)
        for j in range(4):
            single = pyp_freq_posterior_exact(sketch, j, params)
            np.testing.assert_allclose(np.exp(log_pmfs[j]), single.probs, atol=1e-12)

    @pytest.mark.parametrize("alpha,tolerance", [(1e-2, 1e-1), (1e-6, 1e-3)])
    def test_alpha_to_zero_continuity(self, alpha: float, tolerance: float) -> None:
        """Test PYP(α → 0, γ) → DP(θ = γ) sur J = 2, c = (2, 1)."""
        sketch = Sketch.from_counts([2, 1])
        pyp = pyp_freq_posterior_exact(sketch, 0, PypParams(alpha, 1.0))
        dp = dp_freq_posterior(2, DpParams(1.0), J=2)
        assert np.max(np.abs(pyp.probs - dp.probs)) < tolerance

    def test_tractability_gate(self) -> None:
        """Test garde-fou Π(c_k + 2) > max_terms avec renvoi vers le mode MC."""
        sketch = Sketch.from_counts([5] * 10)
        with pytest.raises(TractabilityError) as exc_info:
            pyp_freq_posterior_exact(sketch, 0, PypParams(0.5, 1.0))
        assert "--mode mc" in str(exc_info.value)

    def test_gate_can_be_lifted(self) -> None:
        """Test max_terms=None lève le garde-fou."""
        pmf = pyp_freq_posterior_exact(Sketch.from_counts([5] * 10), 0, PypParams(0.5, 1.0), None)
        assert pmf.probs.sum() == pytest.approx(1.0)

    def test_invalid_bucket(self) -> None:
        """Test bucket hors [0, J−1]."""
        with pytest.raises(InvalidConfigurationError):
            pyp_freq_posterior_exact(Sketch.from_counts([1, 1]), 2, PypParams(0.5, 1.0))


class TestPypMonteCarlo:
    """Tests pour pyp_freq_posterior_mc()."""

    def test_deterministic_and_stderr(self) -> None:
        """Test même graine → même résultat; erreurs standard fournies."""
        sketch = Sketch.from_counts([3, 2, 2])
        params = PypParams(0.5, 1.0)
        first = pyp_freq_posterior_mc(sketch, 0, params, iters=5000, seed=11)
        second = pyp_freq_posterior_mc(sketch, 0, params, iters=5000, seed=11)
        other = pyp_freq_posterior_mc(sketch, 0, params, iters=5000, seed=12)
        assert first.method is MethodTag.PYP_MC
        np.testing.assert_array_equal(first.log_probs, second.log_probs)
        assert not np.array_equal(first.log_probs, other.log_probs)
        assert first.stderr is not None and first.stderr.shape == (4,)
        assert first.probs.sum() == pytest.approx(1.0)

    def test_invalid_iterations(self) -> None:
        """Test iters < 1 rejeté."""
        with pytest.raises(InvalidConfigurationError):
            pyp_freq_posterior_mc(Sketch.from_counts([1]), 0, PypParams(0.5, 1.0), 0, 1)

    @pytest.mark.slow
    def test_agrees_with_exact(self) -> None:
        """Test J = 3, c = (3, 2, 2): chaque entrée à 3 erreurs standard (≥ 4 graines sur 5)."""
        sketch = Sketch.from_counts([3, 2, 2])
        params = PypParams(0.5, 1.0)
        exact = pyp_freq_posterior_exact(sketch, 0, params).probs
        passes = np.zeros(exact.shape[0], dtype=int)
        for seed in range(5):
            mc = pyp_freq_posterior_mc(sketch, 0, params, iters=200_000, seed=seed)
            passes += np.abs(mc.probs - exact) <= 3 * mc.stderr + 1e-12
        assert np.all(passes >= 4)


class TestPypAsymptotic:
    """Tests pour pyp_mean_asymptotic()."""

    def test_reference_value(self) -> None:
        """Test c_j = 100, α = 0.5, γ = 1, J = 10 → 100/6.5."""
        value = pyp_mean_asymptotic(100, PypParams(0.5, 1.0), J=10)
        assert value == pytest.approx(100 / 6.5)

    def test_closed_form_small_width(self) -> None:
        """Test c_j = 100, α = 0.5, γ = 1, J = 2 → 40."""
        assert pyp_mean_asymptotic(100, PypParams(0.5, 1.0), J=2) == pytest.approx(40.0)

    @pytest.mark.slow
    def test_joint_growth_departs_from_constant(self) -> None:
        """Test tous les compteurs égaux à c: E[f]/c se stabilise vers 0.33, loin de 1/6.5."""
        params = PypParams(0.5, 1.0)
        constant = pyp_mean_asymptotic(1, params, J=10)
        ratios = []
        for c in (50, 200, 400):
            pmf = pyp_freq_posterior_exact(Sketch.from_counts([c] * 10), 0, params, None)
            ratios.append(summarize(pmf).mean / c)
        assert all(abs(r - 0.333) < 0.01 for r in ratios)
        assert abs(ratios[2] - ratios[1]) < 0.005
        assert min(ratios) > 1.5 * constant


class TestPkNumeric:
    """Tests pour pk_freq_posterior_numeric()."""

    def test_gamma_reduces_to_dp(self) -> None:
        """Test CRM Gamma sans inclinaison → DP(θ)."""
        sketch = Sketch.from_counts([3, 2])
        pmf = pk_freq_posterior_numeric(CrmSpec.gamma(1.5), PkTilt(), sketch, 0)
        dp = dp_freq_posterior(3, DpParams(1.5), J=2)
        assert pmf.method is MethodTag.PK_NUMERIC
        np.testing.assert_allclose(pmf.probs, dp.probs, atol=1e-8)

    @pytest.mark.slow
    def test_tilted_stable_reduces_to_pyp(self) -> None:
        """Test CRM quasi stable (τ = 1e-8) inclinée par t^{−γ} → PYP(α, γ)."""
        sketch = Sketch.from_counts([2, 1])
        spec = CrmSpec.generalized_gamma(0.5, 1e-8)
        pmf = pk_freq_posterior_numeric(spec, PkTilt(gamma_tilt=1.0), sketch, 0)
        pyp = pyp_freq_posterior_exact(sketch, 0, PypParams(0.5, 1.0))
        np.testing.assert_allclose(pmf.probs, pyp.probs, atol=1e-4)

    def test_size_gate(self) -> None:
        """Test n > 64 refusé."""
        with pytest.raises(TractabilityError):
            pk_freq_posterior_numeric(CrmSpec.gamma(), PkTilt(), Sketch.from_counts([40, 30]), 0)

    def test_non_normalizable_tilts(self) -> None:
        """Test inclinaisons sans moment fini rejetées."""
        sketch = Sketch.from_counts([2, 1])
        with pytest.raises(InvalidConfigurationError):
            pk_freq_posterior_numeric(CrmSpec.gamma(1.0), PkTilt(gamma_tilt=2.0), sketch, 0)
        with pytest.raises(InvalidConfigurationError):
            pk_freq_posterior_numeric(
                CrmSpec.generalized_gamma(0.5, 0.0), PkTilt(gamma_tilt=-0.6), sketch, 0
            )


class TestSummaries:
    """Tests pour summarize() et cms_baseline()."""

    def test_uniform(self) -> None:
        """Test loi uniforme: médiane basse, mode le plus petit."""
        summary = summarize(PosteriorPmf(4, np.log(np.full(5, 0.2)), MethodTag.DP_EXACT))
        assert (summary.median, summary.mode) == (2, 0)
        assert summary.mean == pytest.approx(2.0)

    def test_shortest_interval(self) -> None:
        """Test plus court intervalle de masse ≥ niveau."""
        pmf = PosteriorPmf(2, np.log([0.1, 0.6, 0.3]), MethodTag.DP_EXACT)
        assert summarize(pmf, 0.9).credible_interval == (1, 2)
        assert summarize(pmf, 0.5).credible_interval == (1, 1)
        assert summarize(pmf, 0.95).credible_interval == (0, 2)
        assert summarize(pmf).median == 1

    def test_ties_broken_left(self) -> None:
        """Test égalités départagées par le plus petit l."""
        summary = summarize(PosteriorPmf(1, np.log([0.5, 0.5]), MethodTag.DP_EXACT), 0.5)
        assert summary.mode == 0
        assert summary.credible_interval == (0, 0)
        assert summary.ci_level == 0.5

    def test_point_mass(self) -> None:
        """Test masse ponctuelle."""
        summary = summarize(dp_freq_posterior(0, DpParams(1.0), J=1))
        assert summary.credible_interval == (0, 0)
        assert summary.mean == 0.0

    def test_invalid_level(self) -> None:
        """Test niveau hors (0, 1)."""
        with pytest.raises(InvalidConfigurationError):
            summarize(dp_freq_posterior(2, DpParams(1.0), J=1), 1.0)

    def test_cms_baseline(self) -> None:
        """Test count-min à une ligne = compteur du bucket."""
        sketch = Sketch.from_counts([7, 0, 3])
        assert cms_baseline(sketch, 2) == 3
        with pytest.raises(InvalidConfigurationError):
            cms_baseline(sketch, 3)

    def test_dp_bucket_weights(self) -> None:
        """Test poids des buckets DP: (θ/J + c_j)/(θ + n), somme 1."""
        sketch = Sketch.from_counts([4, 0, 1, 5])
        weights = np.exp(bucket_log_weights(sketch, DpParams(2.0)))
        assert weights.sum() == pytest.approx(1.0)
        assert weights[1] == pytest.approx(0.5 / 12.0)
        assert math.isclose(weights[3], 5.5 / 12.0)
