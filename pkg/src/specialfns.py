"""Primitives numériques stables en échelle logarithmique.

Factorielles montantes, coefficients factoriels généralisés 𝒞(n, k; α),
digamma, et noyaux des CRM: exposant de Laplace ψ, moments amortis κ et
dérivées signées φ^{(m)} de exp(−ϑ ψ).

Toutes les probabilités sont manipulées en log; les conversions vers
l'échelle linéaire se font aux frontières de l'API.

Functions:
    log_rising: log (a)_(n) = log Γ(a+n) − log Γ(a)
    log_binom: log du coefficient binomial
    gfc_table: Table log 𝒞(n, k; α) par récurrence triangulaire (mémoïsée)
    digamma: Fonction digamma (décalage + série asymptotique)
    crm_psi: Exposant de Laplace ψ(u)
    crm_kappa: log κ(u, m) = log ∫ e^{-us} s^m ρ(s) ds
    phi_derivatives: log φ^{(0..m_max)}(u) par récurrence de Leibniz
    log_phi_closed_form: Formes fermées de φ^{(m)} (Gamma, GeneralizedGamma)
"""

import functools
import logging
import math
from typing import Callable, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from src.models import CrmFamily, CrmSpec, GfcTable
from src.validation import (
    DivergenceError,
    DomainError,
    InvalidConfigurationError,
    PoleError,
    TractabilityError,
)

logger = logging.getLogger(__name__)

GFC_N_MAX_CAP = 10_000

# Au-delà, log (a)_(n) passe par Γ; en deçà, somme directe des log(a+i)
LOG_RISING_DIRECT_MAX = 64

# Tolérances des quadratures sur (0, 1) (CRM StableBeta)
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-9

# Coefficients B_{2k} / (2k) de la série asymptotique de digamma, k = 1..8
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)
_DIGAMMA_SHIFT = 8.0

ArrayLike = Union[int, float, np.ndarray]


def log_rising(a: float, n: ArrayLike) -> Union[float, np.ndarray]:
    """Logarithme de la factorielle montante (a)_(n) = a (a+1) … (a+n−1).

    Pour a < 0 non entier, retourne log |(a)_(n)|.

    Args:
        a: Base réelle
        n: Entier ≥ 0 ou tableau d'entiers ≥ 0

    Returns:
        log (a)_(n), scalaire ou tableau selon n

    Raises:
        PoleError: Si a + i = 0 pour un 0 ≤ i < n
        DomainError: Si n < 0

    Example:
        >>> round(log_rising(1.0, 5), 12) == round(math.log(120), 12)
        True
        >>> log_rising(2.0, 0)
        0.0
    """
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError(f"Longueur de factorielle montante négative : n = {n}")

    if a <= 0 and float(a).is_integer():
        if np.any(n_arr > -a):
            raise PoleError(f"Pôle de la factorielle montante : a = {a}, n = {n}")
        # produit fini d'entiers non nuls
        values = np.array(
            [float(np.sum(np.log(np.abs(a + np.arange(int(k)))))) for k in n_arr.reshape(-1)]
        ).reshape(n_arr.shape)
    else:
        values = _log_rising_values(a, n_arr)

    if np.ndim(values) == 0:
        return float(values)
    return values


def _log_rising_values(a: float, n_arr: np.ndarray) -> np.ndarray:
    if n_arr.size and int(n_arr.max()) <= LOG_RISING_DIRECT_MAX:
        # pas d'annulation entre deux log Γ de grande taille quand a ≫ 1
        partial = np.concatenate(
            ([0.0], np.cumsum(np.log(np.abs(a + np.arange(int(n_arr.max()))))))
        )
        return partial[n_arr.astype(np.int64)]
    values = gammaln(a + n_arr) - gammaln(a)
    return np.where(n_arr == 0, 0.0, values)

def log_binom(n: ArrayLike, k: ArrayLike) -> Union[float, np.ndarray]:
    """log du coefficient binomial C(n, k) (−inf hors de 0 ≤ k ≤ n)."""
    n_arr = np.asarray(n, dtype=float)
    k_arr = np.asarray(k, dtype=float)
    valid = (k_arr >= 0) & (k_arr <= n_arr)
    with np.errstate(invalid="ignore"):
        values = gammaln(n_arr + 1) - gammaln(k_arr + 1) - gammaln(n_arr - k_arr + 1)
    values = np.where(valid, values, -np.inf)
    if np.ndim(values) == 0:
        return float(values)
    return values


@functools.lru_cache(maxsize=16)
def gfc_table(n_max: int, alpha: float) -> GfcTable:
    """Tabule log 𝒞(n, k; α) pour 0 ≤ k ≤ n ≤ n_max.

    Récurrence 𝒞(n+1, k) = (n − kα) 𝒞(n, k) + α 𝒞(n, k−1), évaluée en
    log-sum-exp. Les deux termes sont positifs pour α ∈ (0, 1) et k ≤ n.

    Args:
        n_max: Plus grand n tabulé (≤ 10^4)
        alpha: Paramètre α ∈ (0, 1)

    Returns:
        GfcTable immuable (partageable entre threads)

    Raises:
        DomainError: Si α ∉ (0, 1) ou n_max < 0
        TractabilityError: Si n_max > 10^4

    Example:
        >>> table = gfc_table(2, 0.5)
        >>> round(math.exp(table.log_coef(2, 1)), 12)
        0.25

    Complexity:
        Time: O(n_max²), Space: O(n_max²)
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"Paramètre des coefficients factoriels invalide : α = {alpha}")
    if n_max < 0:
        raise DomainError(f"n_max négatif : {n_max}")
    if n_max > GFC_N_MAX_CAP:
        raise TractabilityError(
            f"Table des coefficients factoriels trop grande : n_max = {n_max} "
            f"(maximum : {GFC_N_MAX_CAP})"
        )

    log_values = np.full((n_max + 1, n_max + 1), -np.inf)
    log_values[0, 0] = 0.0
    log_alpha = math.log(alpha)

    for n in range(n_max):
        row = np.full(n + 2, -np.inf)
        row[1:] = log_alpha + log_values[n, : n + 1]
        if n >= 1:
            ks = np.arange(1, n + 1)
            stay = np.log(n - ks * alpha) + log_values[n, 1 : n + 1]
            row[1 : n + 1] = np.logaddexp(row[1 : n + 1], stay)
        log_values[n + 1, : n + 2] = row

    log_values.setflags(write=False)
    logger.debug(f"Table 𝒞(n, k; α={alpha}) construite jusqu'à n = {n_max}")
    return GfcTable(n_max=n_max, alpha=alpha, log_values=log_values)


def digamma(x: float) -> float:
    """Fonction digamma ψ(x) = d/dx log Γ(x).

    Décalage par récurrence ψ(x) = ψ(x+1) − 1/x jusqu'à x ≥ 8, puis série
    asymptotique à 8 termes. Réflexion pour x < 0.

    Raises:
        PoleError: Si x est un entier ≤ 0

    Example:
        >>> round(digamma(1.0), 10)
        -0.5772156649
    """
    if x <= 0 and float(x).is_integer():
        raise PoleError(f"Pôle de digamma : x = {x}")
    if x < 0:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)

    shift = 0.0
    while x < _DIGAMMA_SHIFT:
        shift -= 1.0 / x
        x += 1.0

    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_SERIES:
        series += coef * power
        power *= inv2
    return shift + math.log(x) - 0.5 / x - series


def _stable_beta_quad(
    func: Callable[[float], float],
    beta_param: float,
    split: float = 0.0,
    epsabs: float = QUAD_EPSABS,
) -> Tuple[float, float]:
    """∫_0^1 func(s) (1−s)^{β−1} ds par Gauss–Kronrod adaptatif (QUADPACK).

    La singularité algébrique en s = 1 est absorbée par le poids 'alg' sur
    [split, 1]; le morceau [0, split] (loin de s = 1) est intégré directement.
    """
    total, total_err = 0.0, 0.0
    start = 0.0
    if 0.0 < split < 1.0:
        exponent = beta_param - 1.0

        def near_zero(s: float) -> float:
            return func(s) * (1.0 - s) ** exponent

        value, abserr = integrate.quad(
            near_zero, 0.0, split, epsabs=epsabs, epsrel=QUAD_EPSREL, limit=200
        )
        total, total_err, start = float(value), float(abserr), split

    if beta_param == 1.0:
        value, abserr = integrate.quad(
            func, start, 1.0, epsabs=epsabs, epsrel=QUAD_EPSREL, limit=200
        )
    else:
        value, abserr = integrate.quad(
            func,
            start,
            1.0,
            weight="alg",
            wvar=(0.0, beta_param - 1.0),
            epsabs=epsabs,
            epsrel=QUAD_EPSREL,
            limit=200,
        )
    return total + float(value), total_err + float(abserr)


def crm_psi(spec: CrmSpec, u: float) -> float:
    """Exposant de Laplace ψ(u) = ∫ (1 − e^{−us}) ρ(s) ds.

    Args:
        spec: CRM
        u: Argument ≥ 0

    Returns:
        ψ(u) (échelle linéaire)

    Raises:
        DomainError: Si u < 0

    Example:
        >>> round(crm_psi(CrmSpec.gamma(), 1.0), 12) == round(math.log(2.0), 12)
        True
    """
    if u < 0:
        raise DomainError(f"Argument de ψ négatif : u = {u}")
    if u == 0:
        return 0.0

    if spec.family is CrmFamily.GAMMA:
        return math.log1p(u)

    if spec.family is CrmFamily.GENERALIZED_GAMMA:
        if spec.alpha == 0.0:
            return math.log1p(u / spec.tau)
        if spec.tau == 0.0:
            return u**spec.alpha
        return spec.tau**spec.alpha * math.expm1(spec.alpha * math.log1p(u / spec.tau))

    def integrand(s: float) -> float:
        return -math.expm1(-u * s) / s if s > 0 else u

    value, abserr = _stable_beta_quad(integrand, spec.beta_param, split=min(1.0, 1.0 / u))
    logger.debug(f"ψ({u}) StableBeta = {value} (erreur estimée {abserr:.1e})")
    return value


def crm_kappa(spec: CrmSpec, u: float, m: int) -> float:
    """Logarithme de κ(u, m) = ∫ e^{−us} s^m ρ(s) ds.

    Args:
        spec: CRM
        u: Argument ≥ 0
        m: Ordre du moment, ≥ 1

    Returns:
        log κ(u, m)

    Raises:
        DivergenceError: Si m = 0 (intégrale divergente en 0)
        DomainError: Si u < 0 ou κ infini (GeneralizedGamma avec τ + u = 0)

    Example:
        >>> round(math.exp(crm_kappa(CrmSpec.gamma(), 1.0, 1)), 12)
        0.5
    """
    if m < 1:
        raise DivergenceError(f"κ(u, {m}) diverge : la mesure de Lévy n'est pas intégrable en 0")
    if u < 0:
        raise DomainError(f"Argument de κ négatif : u = {u}")

    if spec.family is CrmFamily.GAMMA:
        return float(gammaln(m)) - m * math.log1p(u)

    if spec.family is CrmFamily.GENERALIZED_GAMMA:
        shifted = spec.tau + u
        if shifted == 0:
            raise DomainError("κ(0, m) infini pour la CRM stable (τ = 0)")
        if spec.alpha == 0.0:
            return float(gammaln(m)) - m * math.log(shifted)
        return (
            math.log(spec.alpha)
            + float(log_rising(1.0 - spec.alpha, m - 1))
            + (spec.alpha - m) * math.log(shifted)
        )

    # StableBeta: ∫_0^1 e^{-us} s^{m-1} (1-s)^{β-1} ds, intégrande recentré sur son maximum
    if m == 1:
        log_peak = 0.0
    else:
        s_star = min(1.0, (m - 1) / u) if u > 0 else 1.0
        log_peak = -u * s_star + (m - 1) * math.log(s_star)

    def integrand(s: float) -> float:
        if s <= 0:
            return math.exp(-log_peak) if m == 1 else 0.0
        return math.exp(-u * s + (m - 1) * math.log(s) - log_peak)

    split = min(1.0, (m + 40.0) / u) if u > 0 else 0.0
    # intégrande de largeur ~ 1/u: tolérance purement relative
    value, abserr = _stable_beta_quad(integrand, spec.beta_param, split=split, epsabs=0.0)
    if value <= 0:
        raise DivergenceError(f"κ({u}, {m}) StableBeta non positif (quadrature : {value})")
    return log_peak + math.log(value)


def phi_derivatives(spec: CrmSpec, theta_over_J: float, u: float, m_max: int) -> np.ndarray:
    """Calcule log φ^{(m)}(u) pour m = 0..m_max.

    φ^{(m)}(u) = (−1)^m d^m/du^m exp(−ϑ ψ(u)), obtenu par la récurrence
    φ^{(m+1)} = ϑ Σ_{i≤m} C(m, i) κ(u, m+1−i) φ^{(i)}.

    Args:
        spec: CRM
        theta_over_J: ϑ = θ/J > 0
        u: Argument ≥ 0
        m_max: Ordre maximal ≥ 0

    Returns:
        Tableau de longueur m_max+1 des log φ^{(m)}(u)

    Raises:
        DomainError: Si m_max < 0 ou ϑ ≤ 0

    Complexity:
        Time: O(m_max²) + m_max évaluations de κ
    """
    if m_max < 0:
        raise DomainError(f"Ordre maximal négatif : m_max = {m_max}")
    if theta_over_J <= 0:
        raise DomainError(f"ϑ = θ/J invalide : {theta_over_J}")

    log_phi = np.empty(m_max + 1)
    log_phi[0] = -theta_over_J * crm_psi(spec, u)
    if m_max == 0:
        return log_phi

    log_kappa = np.array([crm_kappa(spec, u, m) for m in range(1, m_max + 1)])
    log_theta = math.log(theta_over_J)
    for m in range(m_max):
        i = np.arange(m + 1)
        terms = log_binom(m, i) + log_kappa[m - i] + log_phi[: m + 1]
        log_phi[m + 1] = log_theta + float(logsumexp(terms))
    return log_phi


def log_phi_closed_form(
    spec: CrmSpec, theta_over_J: float, u: float, m_max: int
) -> np.ndarray:
    """Formes fermées de log φ^{(m)}(u), m = 0..m_max.

    - Gamma: φ^{(m)}(u) = (ϑ)_(m) (1+u)^{−ϑ−m}
    - GeneralizedGamma: e^{−ϑψ(u)} Σ_i ϑ^i 𝒞(m, i; α) (τ+u)^{αi−m}

    Raises:
        InvalidConfigurationError: Pour StableBeta (pas de forme fermée)
    """
    m = np.arange(m_max + 1)
    base = -theta_over_J * crm_psi(spec, u)

    if spec.family is CrmFamily.GAMMA:
        return np.asarray(log_rising(theta_over_J, m)) + base - m * math.log1p(u)

    if spec.family is CrmFamily.GENERALIZED_GAMMA:
        log_shift = math.log(spec.tau + u)
        if spec.alpha == 0.0:
            return np.asarray(log_rising(theta_over_J, m)) + base - m * log_shift
        table = gfc_table(max(m_max, 1), spec.alpha).log_values[: m_max + 1, : m_max + 1]
        i = np.arange(m_max + 1)
        exponents = (
            table
            + i[None, :] * math.log(theta_over_J)
            + (spec.alpha * i[None, :] - m[:, None]) * log_shift
        )
        return base + logsumexp(exponents, axis=1)

    raise InvalidConfigurationError("Pas de forme fermée de φ pour la CRM StableBeta")
