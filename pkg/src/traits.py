"""Récupération du niveau cumulé d'un trait dans le cadre IBP généralisé.

Chaque point porte des traits avec un niveau entier; le sketch agrège, par
bucket, les niveaux de tous les traits qui y sont hachés. Pour un trait
affiché au niveau a par le nouveau point (incrément de bucket b), on
calcule la loi a posteriori de son niveau cumulé l parmi les n points
résumés, sachant le total de bucket c.

Functions:
    poisson_joint_log_weights: Log-poids non normalisés (moteur général φ/κ)
    poisson_general_posterior: Loi a posteriori, niveaux de Poisson, CRM quelconque
    poisson_gamma_posterior: Forme fermée pour la CRM Gamma
    poisson_gg_posterior: Forme fermée pour la CRM GeneralizedGamma
    bernoulli_approx_posterior: Approximation poissonisée, niveaux de Bernoulli
    bernoulli_tv_bound: Borne en variation totale de cette approximation
    ibp_log_likelihood: Vraisemblance marginale Poisson-Gamma du sketch
    fit_ibp_poisson_gamma: Maximum de vraisemblance de (θ, λ)
"""

import logging
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from src.models import (
    BernoulliKernel,
    CrmFamily,
    CrmSpec,
    FitReport,
    IbpPoissonParams,
    MethodTag,
    PosteriorPmf,
    Sketch,
    TraitQuery,
)
from src.specialfns import (
    QUAD_EPSREL,
    crm_kappa,
    crm_psi,
    log_binom,
    log_phi_closed_form,
    log_rising,
    phi_derivatives,
)
from src.telemetry import log_metric, track_performance
from src.validation import (
    AccuracyError,
    DegenerateEstimateError,
    DomainError,
    InvalidConfigurationError,
    validate_dp_theta,
    validate_width,
)

logger = logging.getLogger(__name__)

THETA_BOUNDS = (1e-3, 1e8)
LAMBDA_BOUNDS = (1e-8, 1e8)


def _pmf_from_log_weights(log_weights: np.ndarray, method: MethodTag) -> PosteriorPmf:
    finite = log_weights[np.isfinite(log_weights)]
    if finite.size == 0:
        raise AccuracyError("Poids a posteriori tous nuls (sous-dépassement)")
    shifted = log_weights - finite.max()
    log_total = math.log(float(np.sum(np.exp(shifted))))
    return PosteriorPmf(
        support_max=log_weights.shape[0] - 1, log_probs=shifted - log_total, method=method
    )


def _check_mass(theta: float, J: int) -> float:
    validate_dp_theta(theta)
    validate_width(J)
    return theta / J


# ============================================================================
# NIVEAUX DE POISSON
# ============================================================================


def _poisson_log_weights(
    q: TraitQuery, vartheta: float, log_phi: np.ndarray, log_kappa: np.ndarray
) -> np.ndarray:
    """log ϑ C(c,l) C(b,a) κ(u, l+a) φ^{(c−l+b−a)}(u) / φ^{(c+b)}(u), l = 0..c.

    log_kappa[m] = log κ(u, m) pour m ≥ 1; log_phi indexé par l'ordre.
    """
    l = np.arange(q.c + 1)
    return (
        math.log(vartheta)
        + np.asarray(log_binom(q.c, l))
        + float(log_binom(q.b, q.a))
        + log_kappa[l + q.a]
        + log_phi[q.c - l + q.b - q.a]
        - log_phi[q.c + q.b]
    )


def poisson_joint_log_weights(
    q: TraitQuery, theta: float, J: int, lambda_rate: float, spec: CrmSpec
) -> np.ndarray:
    """Log-poids joints de (l, a) au niveau a interrogé, l = 0..c.

    Moteur général: φ^{(m)} par récurrence de Leibniz et κ par forme fermée
    ou quadrature, évalués en u = (n+1)λ.

    Args:
        q: Requête (c, b, a, n)
        theta: Masse θ de la CRM
        J: Largeur du sketch
        lambda_rate: Taux λ des niveaux de Poisson
        spec: CRM (la masse de spec est ignorée au profit de theta)

    Returns:
        Tableau de longueur c+1 (non normalisé)
    """
    vartheta = _check_mass(theta, J)
    if lambda_rate <= 0:
        raise InvalidConfigurationError(f"Taux λ invalide : {lambda_rate} (doit être > 0)")
    u = (q.n + 1) * lambda_rate
    log_phi = phi_derivatives(spec, vartheta, u, q.c + q.b)
    log_kappa = np.full(q.c + q.a + 1, -np.inf)
    for m in range(1, q.c + q.a + 1):
        log_kappa[m] = crm_kappa(spec, u, m)
    return _poisson_log_weights(q, vartheta, log_phi, log_kappa)


def poisson_general_posterior(
    q: TraitQuery, theta: float, J: int, lambda_rate: float, spec: CrmSpec
) -> PosteriorPmf:
    """Loi a posteriori de l sachant (c, b, a), niveaux de Poisson, CRM quelconque.

    Example:
        >>> q = TraitQuery(c=0, b=1, a=1, n=5)
        >>> poisson_general_posterior(q, 1.0, 2, 1.0, CrmSpec.gamma()).probs.tolist()
        [1.0]
    """
    log_weights = poisson_joint_log_weights(q, theta, J, lambda_rate, spec)
    return _pmf_from_log_weights(log_weights, MethodTag.TRAITS_POISSON_GENERAL)


def poisson_gamma_posterior(q: TraitQuery, theta: float, J: int) -> PosteriorPmf:
    """Loi a posteriori sous la CRM Gamma (indépendante de λ et de n).

    P(l) ∝ ϑ C(c,l) C(b,a) (l+a−1)! Γ(ϑ+c+b−l−a) / Γ(ϑ+c+b), ϑ = θ/J.
    Pour a = b = 1, coïncide avec la loi a posteriori du DP.

    Example:
        >>> pmf = poisson_gamma_posterior(TraitQuery(c=2, b=1, a=1, n=10), 1.0, 10)
        >>> [round(p, 6) for p in pmf.probs]
        [0.047619, 0.08658, 0.865801]
    """
    vartheta = _check_mass(theta, J)
    l = np.arange(q.c + 1)
    rest = vartheta + q.c + q.b
    log_weights = (
        math.log(vartheta)
        + np.asarray(log_binom(q.c, l))
        + float(log_binom(q.b, q.a))
        + gammaln(l + q.a)
        + gammaln(rest - l - q.a)
        - gammaln(rest)
    )
    return _pmf_from_log_weights(log_weights, MethodTag.TRAITS_POISSON_GAMMA)


def poisson_gg_posterior(q: TraitQuery, params: IbpPoissonParams, J: int) -> PosteriorPmf:
    """Loi a posteriori sous la CRM GeneralizedGamma(α, τ), formes fermées.

    κ(u, m) = α (1−α)_(m−1) (τ+u)^{α−m} et φ^{(m)} par la somme des
    coefficients factoriels généralisés, toutes deux en log.

    Args:
        q: Requête (c, b, a, n)
        params: θ, λ et CRM GeneralizedGamma
        J: Largeur du sketch

    Raises:
        InvalidConfigurationError: Si la CRM n'est pas GeneralizedGamma
        TractabilityError: Si c + b > 10^4
    """
    spec = params.crm
    if spec.family is not CrmFamily.GENERALIZED_GAMMA:
        raise InvalidConfigurationError(
            f"CRM {spec.family.value} : poisson_gg_posterior requiert GeneralizedGamma"
        )
    vartheta = _check_mass(params.theta, J)
    u = (q.n + 1) * params.lambda_rate
    log_phi = log_phi_closed_form(spec, vartheta, u, q.c + q.b)

    m = np.arange(q.c + q.a + 1)
    log_shift = math.log(spec.tau + u)
    with np.errstate(divide="ignore"):
        if spec.alpha == 0.0:
            log_kappa = gammaln(np.maximum(m, 1)) - m * log_shift
        else:
            log_kappa = (
                math.log(spec.alpha)
                + np.asarray(log_rising(1.0 - spec.alpha, np.maximum(m - 1, 0)))
                + (spec.alpha - m) * log_shift
            )
    log_kappa[0] = -np.inf
    log_weights = _poisson_log_weights(q, vartheta, log_phi, log_kappa)
    return _pmf_from_log_weights(log_weights, MethodTag.TRAITS_POISSON_GG)


# ============================================================================
# NIVEAUX DE BERNOULLI
# ============================================================================


def _require_unit_support(spec: CrmSpec) -> None:
    if not spec.jumps_in_unit_interval:
        raise DomainError(
            f"CRM {spec.family.value} : les niveaux de Bernoulli requièrent des sauts dans (0, 1)"
        )


def _unit_integral(spec: CrmSpec, log_integrand: Callable[[float], float]) -> float:
    """∫_0^1 exp(log_integrand(s)) (1−s)^{β−1} ds (poids algébrique absorbé)."""

    def integrand(s: float) -> float:
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return math.exp(log_integrand(s))

    if spec.beta_param == 1.0:
        value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    else:
        value, _ = integrate.quad(
            integrand,
            0.0,
            1.0,
            weight="alg",
            wvar=(0.0, spec.beta_param - 1.0),
            epsabs=0.0,
            epsrel=QUAD_EPSREL,
            limit=200,
        )
    return float(value)


def bernoulli_gap_integral(spec: CrmSpec, l: int, n: int) -> float:
    """∫ (s^{l+1} − s^{n+1}) ρ(s) ds pour ρ(s) = s^{−1}(1−s)^{β−1}; nul si l = n.

    Raises:
        DomainError: Si ρ n'est pas supportée par (0, 1)
    """
    _require_unit_support(spec)
    if l >= n:
        return 0.0

    def log_gap(s: float) -> float:
        log_s = math.log(s)
        return l * log_s + math.log(-math.expm1((n - l) * log_s))

    return _unit_integral(spec, log_gap)


def _poissonized_integral(spec: CrmSpec, l: int, n: int) -> float:
    """∫ s^{l+1} (1−s)^{n−l} ρ(s) ds."""
    return _unit_integral(spec, lambda s: l * math.log(s) + (n - l) * math.log1p(-s))


@track_performance("bernoulli_approx_posterior")
def bernoulli_approx_posterior(
    c: int,
    b: int,
    n: int,
    spec: CrmSpec = CrmSpec.stable_beta(1.0),
    theta: float = 1.0,
    J: int = 1,
    kernel: BernoulliKernel = BernoulliKernel.PRINTED,
) -> PosteriorPmf:
    """Approximation poissonisée de la loi a posteriori, niveaux de Bernoulli (a = 1).

    PRINTED: P(l) ∝ (c−l+1)_(l) C(n,l) φ^{(c+b−l−1)}(n+1) ∫ (s^{l+1} − s^{n+1}) ρ(s) ds.
    POISSONIZED: P(l) ∝ n^{c−l}/(c−l)! C(n,l) φ^{(c+b−l−1)}(n+1) ∫ s^{l+1}(1−s)^{n−l} ρ(s) ds.
    Support l = 0..min(c, n); les intégrales sont calculées par quadrature.

    Args:
        c: Total du bucket
        b: Incrément du nouveau point (b ≥ 1, a = 1)
        n: Nombre de points résumés
        spec: CRM à sauts dans (0, 1) (StableBeta)
        theta: Masse θ
        J: Largeur du sketch
        kernel: Variante du poids

    Raises:
        DomainError: Si ρ n'est pas supportée par (0, 1)
    """
    _require_unit_support(spec)
    vartheta = _check_mass(theta, J)
    if c < 0 or b < 1 or n < 1:
        raise InvalidConfigurationError(f"Requête de Bernoulli invalide : c={c}, b={b}, n={n}")
    top = min(c, n)
    log_phi = phi_derivatives(spec, vartheta, float(n + 1), c + b - 1)

    log_weights = np.full(top + 1, -np.inf)
    for l in range(top + 1):
        if kernel is BernoulliKernel.PRINTED:
            integral = bernoulli_gap_integral(spec, l, n)
            prefix = float(gammaln(c + 1) - gammaln(c - l + 1))
        else:
            integral = _poissonized_integral(spec, l, n)
            prefix = (c - l) * math.log(n) - float(gammaln(c - l + 1))
        if integral <= 0.0:
            continue
        log_weights[l] = (
            prefix + float(log_binom(n, l)) + log_phi[c + b - l - 1] + math.log(integral)
        )
    return _pmf_from_log_weights(log_weights, MethodTag.TRAITS_BERNOULLI_APPROX)


def bernoulli_tv_bound(spec: CrmSpec, theta: float, J: int) -> float:
    """Borne (2θ/J) ∫_0^∞ e^{−ψ(u)} κ(u, 2) du de l'erreur en variation totale.

    Quadrature sur t ∈ (0, 1) avec u = t/(1−t), tolérance absolue 1e-8.

    Raises:
        DomainError: Si ρ n'est pas supportée par (0, 1)
        AccuracyError: Si la quadrature n'atteint pas la tolérance
    """
    _require_unit_support(spec)
    vartheta = _check_mass(theta, J)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return math.exp(crm_kappa(spec, 0.0, 2))
        if t >= 1.0:
            return 0.0
        u = t / (1.0 - t)
        return math.exp(-crm_psi(spec, u) + crm_kappa(spec, u, 2) - 2.0 * math.log1p(-t))

    value, abserr = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-9, epsrel=QUAD_EPSREL, limit=400)
    if abserr > 1e-8:
        raise AccuracyError(f"Borne TV imprécise : erreur {abserr:.2e}", achieved=abserr)
    bound = 2.0 * vartheta * float(value)
    logger.debug(f"Borne TV de Bernoulli : {bound:.6g} (erreur {abserr:.1e})")
    return bound


# ============================================================================
# AJUSTEMENT (θ, λ) SOUS POISSON-GAMMA
# ============================================================================


def ibp_log_likelihood(sketch: Sketch, n: int, theta: float, lambda_rate: float) -> float:
    """Log-vraisemblance binomiale négative du sketch.

    Σ_j [c_j log(nλ) − (ϑ + c_j) log(1 + nλ) + log (ϑ)_(c_j) − log c_j!], ϑ = θ/J.
    """
    vartheta = theta / sketch.width_J
    rate = n * lambda_rate
    counts = sketch.counts.astype(float)
    return float(
        np.sum(
            counts * math.log(rate)
            - (vartheta + counts) * math.log1p(rate)
            + gammaln(vartheta + counts)
            - gammaln(vartheta)
            - gammaln(counts + 1)
        )
    )


def _profile_lambda(sketch: Sketch, n: int, theta: float) -> float:
    """λ maximisant la vraisemblance à θ fixé: Σc / (nθ), ramené dans les bornes."""
    rate = sketch.total_n / (n * theta)
    return float(np.clip(rate, *LAMBDA_BOUNDS))


@track_performance("fit_ibp_poisson_gamma")
def fit_ibp_poisson_gamma(sketch: Sketch, n: int) -> FitReport:
    """Maximum de vraisemblance marginale de (θ, λ) sous l'IBP Poisson-Gamma.

    Recherche de Brent bornée sur log θ; à θ fixé, l'optimum en λ est
    explicite (Σ_j c_j = θ n λ), ce qui rend la descente par coordonnées
    exacte en un seul passage.

    Args:
        sketch: Sketch des niveaux de traits
        n: Nombre de points résumés

    Returns:
        FitReport avec params_hat: IbpPoissonParams

    Raises:
        DegenerateEstimateError: Si le sketch est vide
    """
    if n < 1:
        raise InvalidConfigurationError(f"Nombre de points invalide : n = {n}")
    if sketch.total_n == 0:
        raise DegenerateEstimateError("Sketch vide : (θ, λ) non identifiables")

    trace: List[Tuple[Tuple[float, ...], float]] = []

    def objective(log_theta: float) -> float:
        theta = math.exp(log_theta)
        lam = _profile_lambda(sketch, n, theta)
        value = -ibp_log_likelihood(sketch, n, theta, lam)
        trace.append(((theta, lam), value))
        return value

    low, high = math.log(THETA_BOUNDS[0]), math.log(THETA_BOUNDS[1])
    result = optimize.minimize_scalar(
        objective, bounds=(low, high), method="bounded", options={"xatol": 1e-8}
    )
    theta_hat = math.exp(float(result.x))
    lambda_hat = _profile_lambda(sketch, n, theta_hat)
    at_boundary = min(abs(result.x - low), abs(result.x - high)) < 1e-3
    if at_boundary:
        logger.warning(
            f"θ̂ = {theta_hat:.4g} sur une borne de recherche : surdispersion insuffisante"
        )
    log_metric("ibp_theta_hat", theta_hat)
    log_metric("ibp_lambda_hat", lambda_hat)
    logger.info(f"✓ Ajustement IBP : θ̂ = {theta_hat:.4g}, λ̂ = {lambda_hat:.4g}")
    return FitReport(
        params_hat=IbpPoissonParams(theta=theta_hat, lambda_rate=lambda_hat),
        objective_trace=trace,
        converged=bool(result.success),
        at_boundary=at_boundary,
    )
