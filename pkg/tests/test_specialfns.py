"""Tests unitaires pour les primitives numériques (src.specialfns).

Test coverage:
    - Factorielles montantes (pôles, bases négatives)
    - Coefficients factoriels généralisés contre la somme alternée exacte
    - Identité de normalisation des lignes (EPPF)
    - Digamma contre scipy et relation de récurrence
    - ψ, κ, φ^{(m)}: formes fermées, quadratures StableBeta, récurrence
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import special

from src.models import CrmSpec
from src.specialfns import (
    crm_kappa,
    crm_psi,
    digamma,
    gfc_table,
    log_binom,
    log_phi_closed_form,
    log_rising,
    phi_derivatives,
)
from src.validation import (
    DivergenceError,
    DomainError,
    InvalidConfigurationError,
    PoleError,
    TractabilityError,
)


def _rising_exact(x: Fraction, n: int) -> Fraction:
    result = Fraction(1)
    for i in range(n):
        result *= x + i
    return result


def _gfc_exact(n: int, k: int, alpha: Fraction) -> Fraction:
    """𝒞(n, k; α) = (1/k!) Σ_j (−1)^j C(k, j) (−jα)_(n), en arithmétique exacte."""
    total = sum(
        (-1) ** j * math.comb(k, j) * _rising_exact(-j * alpha, n) for j in range(k + 1)
    )
    return Fraction(total) / math.factorial(k)


class TestLogRising:
    """Tests pour log_rising() et log_binom()."""

    def test_positive_base(self) -> None:
        """Test (1)_(5) = 5! et (a)_(0) = 1."""
        assert log_rising(1.0, 5) == pytest.approx(math.log(120), rel=1e-14)
        assert log_rising(2.5, 0) == 0.0

    def test_vectorized(self) -> None:
        """Test n tableau → tableau."""
        values = log_rising(0.5, np.arange(4))
        np.testing.assert_allclose(np.exp(values), [1.0, 0.5, 0.75, 1.875])

    def test_large_base_short_product(self) -> None:
        """Test a ≫ 1: écart à n log a précis malgré l'échelle de log Γ(a)."""
        a = 1e8 + 0.5
        assert log_rising(a, 2) == pytest.approx(math.log(a) + math.log(a + 1.0), abs=1e-12)
        excess = log_rising(a, 2) - 2.0 * math.log(a)
        assert excess == pytest.approx(math.log1p(1.0 / a), rel=1e-5)

    def test_gamma_path_continuity(self) -> None:
        """Test raccord somme directe / différence de log Γ sur les longs produits."""
        step = log_rising(3.7, 65) - log_rising(3.7, 64)
        assert step == pytest.approx(math.log(3.7 + 64), rel=1e-12)
        assert log_rising(3.7, 200) == pytest.approx(
            special.gammaln(203.7) - special.gammaln(3.7), rel=1e-13
        )

    def test_negative_integer_base(self) -> None:
        """Test (−2)_(2) = 2 (valeur absolue), pôle si le produit atteint 0."""
        assert log_rising(-2.0, 2) == pytest.approx(math.log(2.0))
        with pytest.raises(PoleError):
            log_rising(-2.0, 4)

    def test_negative_length(self) -> None:
        """Test n < 0 rejeté."""
        with pytest.raises(DomainError):
            log_rising(1.0, -1)

    def test_log_binom(self) -> None:
        """Test C(5, 2) = 10 et −inf hors support."""
        assert math.exp(log_binom(5, 2)) == pytest.approx(10.0)
        assert log_binom(3, 4) == -np.inf


class TestGfcTable:
    """Tests pour gfc_table()."""

    @pytest.mark.parametrize(
        "alpha", [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(3, 4)]
    )
    def test_matches_alternating_sum(self, alpha: Fraction) -> None:
        """Test égalité avec la définition exacte pour n ≤ 12."""
        table = gfc_table(12, float(alpha))
        for n in range(1, 13):
            for k in range(1, n + 1):
                exact = float(_gfc_exact(n, k, alpha))
                assert math.exp(table.log_coef(n, k)) == pytest.approx(exact, rel=1e-11)

    def test_boundary_entries(self) -> None:
        """Test 𝒞(0, 0) = 1, 𝒞(n, 0) = 0 pour n ≥ 1, 𝒞(n, n) = α^n."""
        table = gfc_table(6, 0.3)
        assert table.log_coef(0, 0) == 0.0
        assert table.log_coef(4, 0) == -np.inf
        assert table.log_coef(5, 5) == pytest.approx(5 * math.log(0.3))

    @pytest.mark.parametrize("alpha,gamma", [(0.25, 0.5), (0.5, 1.0), (0.75, 3.0), (0.1, 10.0)])
    def test_row_sum_identity(self, alpha: float, gamma: float) -> None:
        """Test Σ_k 𝒞(n, k; α) (γ/α)_(k) = (γ)_(n) pour 1 ≤ n ≤ 12."""
        table = gfc_table(12, alpha)
        for n in range(1, 13):
            k = np.arange(1, n + 1)
            lhs = special.logsumexp(table.log_row(n)[1:] + log_rising(gamma / alpha, k))
            assert lhs == pytest.approx(log_rising(gamma, n), rel=1e-9)

    def test_read_only(self) -> None:
        """Test table partagée non modifiable."""
        table = gfc_table(3, 0.5)
        with pytest.raises(ValueError):
            table.log_values[1, 1] = 0.0

    def test_invalid_alpha(self) -> None:
        """Test α ∉ (0, 1) rejeté."""
        with pytest.raises(DomainError):
            gfc_table(5, 0.0)
        with pytest.raises(DomainError):
            gfc_table(5, 1.0)

    def test_size_gate(self) -> None:
        """Test n_max > 10^4 refusé."""
        with pytest.raises(TractabilityError):
            gfc_table(10_001, 0.5)

    def test_out_of_table(self) -> None:
        """Test n au-delà de la table rejeté."""
        with pytest.raises(InvalidConfigurationError):
            gfc_table(3, 0.5).log_coef(4, 1)


class TestDigamma:
    """Tests pour digamma()."""

    def test_reference_values(self) -> None:
        """Test ψ(1) = −γ_E et ψ(1/2) = −γ_E − 2 log 2."""
        assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-12)
        assert digamma(0.5) == pytest.approx(-1.9635100260214235, abs=1e-12)

    @pytest.mark.parametrize("x", [1e-6, 0.01, 0.3, 2.5, 7.9, 8.0, 40.0, 1e5, -0.5, -3.7])
    def test_matches_scipy(self, x: float) -> None:
        """Test accord avec scipy.special.digamma."""
        assert digamma(x) == pytest.approx(float(special.digamma(x)), rel=1e-12, abs=1e-12)

    def test_recurrence(self) -> None:
        """Test ψ(x+1) − ψ(x) = 1/x sur [0.1, 100]."""
        for x in np.linspace(0.1, 100.0, 200):
            assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
    def test_poles(self, x: float) -> None:
        """Test entiers ≤ 0 rejetés."""
        with pytest.raises(PoleError):
            digamma(x)


class TestCrmPsi:
    """Tests pour crm_psi()."""

    def test_gamma(self) -> None:
        """Test ψ(u) = log(1 + u)."""
        assert crm_psi(CrmSpec.gamma(), 1.0) == pytest.approx(math.log(2.0))
        assert crm_psi(CrmSpec.gamma(), 0.0) == 0.0

    def test_generalized_gamma(self) -> None:
        """Test ψ(u) = (τ+u)^α − τ^α, cas τ = 0 et α = 0."""
        assert crm_psi(CrmSpec.generalized_gamma(0.5, 1.0), 1.0) == pytest.approx(
            math.sqrt(2.0) - 1.0
        )
        assert crm_psi(CrmSpec.generalized_gamma(0.5, 0.0), 4.0) == pytest.approx(2.0)
        assert crm_psi(CrmSpec.generalized_gamma(0.0, 2.0), 2.0) == pytest.approx(math.log(2.0))

    @pytest.mark.parametrize("u", [0.1, 1.0, 3.0, 50.0, 1e4])
    def test_stable_beta_unit(self, u: float) -> None:
        """Test β = 1: ψ(u) = γ_E + log u + E_1(u)."""
        expected = float(np.euler_gamma + math.log(u) + special.exp1(u))
        assert crm_psi(CrmSpec.stable_beta(1.0), u) == pytest.approx(expected, rel=1e-8, abs=1e-9)

    def test_negative_argument(self) -> None:
        """Test u < 0 rejeté."""
        with pytest.raises(DomainError):
            crm_psi(CrmSpec.gamma(), -1.0)


class TestCrmKappa:
    """Tests pour crm_kappa()."""

    def test_gamma(self) -> None:
        """Test κ(u, m) = Γ(m)/(1+u)^m."""
        assert math.exp(crm_kappa(CrmSpec.gamma(), 1.0, 1)) == pytest.approx(0.5)
        assert math.exp(crm_kappa(CrmSpec.gamma(), 2.0, 3)) == pytest.approx(2.0 / 27.0)

    def test_generalized_gamma(self) -> None:
        """Test κ(u, m) = α (1−α)_(m−1) (τ+u)^{α−m}."""
        spec = CrmSpec.generalized_gamma(0.5, 1.0)
        assert math.exp(crm_kappa(spec, 3.0, 2)) == pytest.approx(0.5 * 0.5 * 4.0**-1.5)

    @pytest.mark.parametrize("u", [0.5, 5.0, 50.0])
    @pytest.mark.parametrize("m", [1, 3, 7])
    def test_stable_beta_unit(self, u: float, m: int) -> None:
        """Test β = 1: κ(u, m) = Γ(m) P(m, u) / u^m."""
        expected = float(special.gammaln(m) + math.log(special.gammainc(m, u)) - m * math.log(u))
        assert crm_kappa(CrmSpec.stable_beta(1.0), u, m) == pytest.approx(expected, abs=1e-8)

    def test_stable_beta_two(self) -> None:
        """Test β = 2: κ(u, 1) = ∫ e^{−us}(1−s) ds (singularité traitée par poids)."""
        u = 2.0
        expected = (1 - math.exp(-u)) / u - (1 - (1 + u) * math.exp(-u)) / u**2
        assert math.exp(crm_kappa(CrmSpec.stable_beta(2.0), u, 1)) == pytest.approx(
            expected, rel=1e-9
        )

    def test_order_zero_diverges(self) -> None:
        """Test κ(u, 0) divergent."""
        with pytest.raises(DivergenceError):
            crm_kappa(CrmSpec.gamma(), 1.0, 0)

    def test_stable_at_zero(self) -> None:
        """Test κ(0, m) infini pour la CRM stable pure."""
        with pytest.raises(DomainError):
            crm_kappa(CrmSpec.generalized_gamma(0.5, 0.0), 0.0, 1)


class TestPhiDerivatives:
    """Tests pour phi_derivatives() et log_phi_closed_form()."""

    @pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 10.0])
    @pytest.mark.parametrize(
        "spec",
        [
            CrmSpec.gamma(),
            CrmSpec.generalized_gamma(0.5, 1.0),
            CrmSpec.generalized_gamma(0.25, 2.0),
            CrmSpec.generalized_gamma(0.0, 3.0),
        ],
        ids=["gamma", "gg-0.5", "gg-0.25", "gg-0"],
    )
    def test_recurrence_matches_closed_form(self, spec: CrmSpec, u: float) -> None:
        """Test récurrence ≡ forme fermée pour m ≤ 50."""
        recurrence = phi_derivatives(spec, 0.7, u, 50)
        closed = log_phi_closed_form(spec, 0.7, u, 50)
        np.testing.assert_allclose(recurrence, closed, rtol=1e-10, atol=1e-10)

    def test_order_zero(self) -> None:
        """Test φ^{(0)}(u) = exp(−ϑ ψ(u))."""
        log_phi = phi_derivatives(CrmSpec.gamma(), 2.0, 1.0, 0)
        assert log_phi.shape == (1,)
        assert log_phi[0] == pytest.approx(-2.0 * math.log(2.0))

    def test_stable_beta_first_derivative(self) -> None:
        """Test φ^{(1)} = ϑ κ(u, 1) φ^{(0)} pour StableBeta."""
        spec = CrmSpec.stable_beta(1.0)
        log_phi = phi_derivatives(spec, 0.5, 2.0, 1)
        expected = math.log(0.5) + crm_kappa(spec, 2.0, 1) + log_phi[0]
        assert log_phi[1] == pytest.approx(expected)

    def test_invalid_arguments(self) -> None:
        """Test m_max < 0 et ϑ ≤ 0 rejetés."""
        with pytest.raises(DomainError):
            phi_derivatives(CrmSpec.gamma(), 1.0, 1.0, -1)
        with pytest.raises(DomainError):
            phi_derivatives(CrmSpec.gamma(), 0.0, 1.0, 2)

    def test_no_closed_form_for_stable_beta(self) -> None:
        """Test forme fermée indisponible pour StableBeta."""
        with pytest.raises(InvalidConfigurationError):
            log_phi_closed_form(CrmSpec.stable_beta(), 1.0, 1.0, 3)
