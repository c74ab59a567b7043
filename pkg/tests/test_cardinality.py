"""Tests unitaires pour l'estimation des cardinalités (src.cardinality).

Test coverage:
    - DP: valeurs de référence, forme digamma, mélange par bucket, masse totale
    - PYP: équivalence avec l'oracle d'énumération, limite α → 0, mode MC
    - Courbe k̂ sur les préfixes d'un flux
    - Récupération de K_n sur données simulées (slow)
"""

import logging

import numpy as np
import pytest

from src.cardinality import (
    cardinality_curve,
    dp_cardinality,
    dp_digamma_cardinality,
    dp_unconditional_freq,
    dp_unconditional_freq_mixture,
    pyp_cardinality,
    pyp_unconditional_freq,
)
from src.hashing import new_hash, sketch_stream
from src.models import CardinalityMethod, DpParams, PypParams, Sketch
from src.simulate import partition_oracle, sample_pyp_sequence
from src.validation import InvalidConfigurationError


class TestDpCardinality:
    """Tests pour dp_cardinality() et dp_unconditional_freq()."""

    def test_two_singletons(self) -> None:
        """Test DP(2), c = (1, 1): k̂ = 2 et Pr[f = 1] = 0.5."""
        sketch = Sketch.from_counts([1, 1])
        estimate = dp_cardinality(sketch, DpParams(2.0))
        assert estimate.k_hat == pytest.approx(2.0, rel=1e-12)
        assert estimate.method is CardinalityMethod.DP
        assert estimate.L_max == 1
        assert dp_unconditional_freq(sketch, DpParams(2.0), 1) == pytest.approx(0.5)

    def test_sum_of_m_hat(self) -> None:
        """Test k̂ = Σ_l m̂_l et m̂_l ≥ 0."""
        estimate = dp_cardinality(Sketch.from_counts([9, 0, 4, 17]), DpParams(3.0))
        assert np.all(estimate.m_hat >= 0)
        assert estimate.m_hat.shape == (17,)
        assert estimate.k_hat == pytest.approx(float(estimate.m_hat.sum()), rel=1e-12)

    def test_digamma_closed_form_random_sketches(self) -> None:
        """Test forme digamma ≡ somme directe sur 100 sketchs aléatoires."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            J = int(rng.integers(1, 40))
            counts = rng.integers(0, 60, size=J)
            if counts.sum() == 0:
                counts[0] = 1
            theta = float(10 ** rng.uniform(-2, 3))
            estimate = dp_cardinality(Sketch.from_counts(counts), DpParams(theta))
            assert estimate.k_hat_closed_form == pytest.approx(estimate.k_hat, rel=1e-8)

    def test_mixture_path_agrees(self) -> None:
        """Test forme regroupée ≡ mélange des lois par bucket."""
        sketch = Sketch.from_counts([6, 2, 0, 3, 6])
        params = DpParams(1.7)
        for l in range(1, 7):
            assert dp_unconditional_freq(sketch, params, l) == pytest.approx(
                dp_unconditional_freq_mixture(sketch, params, l), rel=1e-10
            )

    def test_mass_accounting(self) -> None:
        """Test Σ_l Pr[f = l | C] = n/(θ + n)."""
        sketch = Sketch.from_counts([5, 1, 8, 2])
        params = DpParams(4.0)
        total = sum(dp_unconditional_freq(sketch, params, l) for l in range(1, 17))
        assert total == pytest.approx(16 / 20, abs=1e-10)

    def test_level_out_of_range(self) -> None:
        """Test l ∉ [1, n] rejeté, l > max c_j → 0."""
        sketch = Sketch.from_counts([2, 2])
        with pytest.raises(InvalidConfigurationError):
            dp_unconditional_freq(sketch, DpParams(1.0), 0)
        assert dp_unconditional_freq(sketch, DpParams(1.0), 3) == 0.0

    def test_empty_sketch(self) -> None:
        """Test n = 0 → k̂ = 0."""
        estimate = dp_cardinality(Sketch.from_counts([0, 0, 0]), DpParams(1.0))
        assert estimate.k_hat == 0.0
        assert dp_digamma_cardinality(Sketch.from_counts([0, 0]), DpParams(1.0)) == 0.0

    @pytest.mark.parametrize("theta", [0.5, 3.0])
    def test_matches_partition_oracle(self, theta: float) -> None:
        """Test m̂_l = E[M_{l,n} | C] de l'oracle (n ≤ 6, J = 2)."""
        for n in range(1, 7):
            oracle = partition_oracle(n, 2, DpParams(theta))
            for c0 in range(n + 1):
                counts = (c0, n - c0)
                expected = oracle.expected_m(counts)
                estimate = dp_cardinality(Sketch.from_counts(list(counts)), DpParams(theta))
                np.testing.assert_allclose(estimate.m_hat, expected[: estimate.L_max], atol=1e-9)
                assert np.all(np.abs(expected[estimate.L_max :]) < 1e-12)


class TestPypCardinality:
    """Tests pour pyp_cardinality()."""

    @pytest.mark.parametrize("alpha,gamma", [(0.25, 0.5), (0.5, 1.0), (0.75, 1.0)])
    def test_matches_partition_oracle(self, alpha: float, gamma: float) -> None:
        """Test mode exact ≡ E[M_{l,n} | C] de l'oracle (n ≤ 6, J = 2)."""
        params = PypParams(alpha, gamma)
        for n in range(1, 7):
            oracle = partition_oracle(n, 2, params)
            for c0 in range(n + 1):
                counts = (c0, n - c0)
                expected = oracle.expected_m(counts)
                estimate = pyp_cardinality(Sketch.from_counts(list(counts)), params)
                assert estimate.method is CardinalityMethod.PYP_EXACT
                np.testing.assert_allclose(estimate.m_hat, expected[: estimate.L_max], atol=1e-6)

    def test_new_symbol_probability(self) -> None:
        """Test Pr[nouveau] + Σ_l Pr[f = l] = 1 (mélange normalisé)."""
        law, _ = pyp_unconditional_freq(Sketch.from_counts([3, 1, 2]), PypParams(0.5, 1.0))
        assert law.sum() == pytest.approx(1.0, abs=1e-10)
        assert law[0] > 0

    def test_alpha_to_zero_matches_dp(self) -> None:
        """Test PYP(α = 1e-6, γ = θ) ≈ DP(θ) sur J = 2, c = (2, 1)."""
        sketch = Sketch.from_counts([2, 1])
        pyp = pyp_cardinality(sketch, PypParams(1e-6, 1.5))
        dp = dp_cardinality(sketch, DpParams(1.5))
        assert pyp.k_hat == pytest.approx(dp.k_hat, rel=1e-3)

    def test_mc_mode(self) -> None:
        """Test mode MC proche de l'exact et déterministe."""
        sketch = Sketch.from_counts([3, 2, 2])
        params = PypParams(0.5, 1.0)
        exact = pyp_cardinality(sketch, params)
        mc = pyp_cardinality(sketch, params, mode="mc", iters=50_000, seed=3)
        again = pyp_cardinality(sketch, params, mode="mc", iters=50_000, seed=3)
        assert mc.method is CardinalityMethod.PYP_MC
        assert mc.k_hat == again.k_hat
        assert mc.k_hat == pytest.approx(exact.k_hat, rel=0.05)

    def test_unknown_mode(self) -> None:
        """Test mode inconnu rejeté."""
        with pytest.raises(InvalidConfigurationError):
            pyp_cardinality(Sketch.from_counts([1, 1]), PypParams(0.5, 1.0), mode="quadrature")

    def test_empty_sketch(self) -> None:
        """Test n = 0 → k̂ = 0."""
        estimate = pyp_cardinality(Sketch.from_counts([0, 0]), PypParams(0.5, 1.0))
        assert estimate.k_hat == 0.0
        assert estimate.L_max == 0


class TestCardinalityCurve:
    """Tests pour cardinality_curve()."""

    def test_matches_prefix_sketches(self) -> None:
        """Test chaque point ≡ dp_cardinality du sketch du préfixe."""
        tokens = [f"t{i % 13}" for i in range(60)]
        h = new_hash(4, 8)
        params = DpParams(2.0)
        curve = cardinality_curve(tokens, h, params, [10, 30, 60])
        assert [length for length, _ in curve] == [10, 30, 60]
        for length, k_hat in curve:
            expected = dp_cardinality(sketch_stream(tokens[:length], h), params).k_hat
            assert k_hat == pytest.approx(expected)

    def test_checkpoints_beyond_stream(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test points de contrôle au-delà du flux ignorés avec avertissement."""
        with caplog.at_level(logging.WARNING):
            curve = cardinality_curve(["a", "b", "c"], new_hash(0, 4), DpParams(1.0), [2, 5])
        assert [length for length, _ in curve] == [2]
        assert "ignoré" in caplog.text


@pytest.mark.slow
class TestCardinalityRecovery:
    """Récupération de K_n sur des flux DP simulés."""

    def test_dp_data(self) -> None:
        """Test DP(θ = 100), n = 10^4, J = 128: erreur relative moyenne ≤ 10 % (20 graines)."""
        errors = []
        for seed in range(20):
            labels = sample_pyp_sequence(DpParams(100.0), 10_000, seed=seed)
            sketch = sketch_stream((f"sym{label}" for label in labels), new_hash(seed, 128))
            k_hat = dp_cardinality(sketch, DpParams(100.0)).k_hat
            true_k = len(np.unique(labels))
            errors.append(abs(k_hat - true_k) / true_k)
        assert float(np.mean(errors)) <= 0.10

