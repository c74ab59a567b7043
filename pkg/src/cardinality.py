"""Estimation du nombre de symboles distincts K_n et des l-cardinalités.

Sous DP et PYP, E[M_{l,n} | C_J] se déduit de la loi non conditionnelle
Pr[f_{X_{n+1}} = l | C_J] par m̂_l = (θ + n)/(l − α) · Pr[f = l | C_J]
(α = 0 pour le DP), puis k̂ = Σ_l m̂_l.

Functions:
    dp_unconditional_freq: Pr[f = l | C_J] sous DP (forme fermée)
    dp_unconditional_freq_mixture: Même quantité par mélange sur les buckets
    dp_cardinality: m̂ et k̂ sous DP, avec contrôle par la forme digamma
    pyp_unconditional_freq: Pr[f = l | C_J] sous PYP (exact ou MC)
    pyp_cardinality: m̂ et k̂ sous PYP
    cardinality_curve: k̂ (DP) le long d'un flux, à des points de contrôle
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from src.hashing import Token, hash_key
from src.models import (
    CardinalityEstimate,
    CardinalityMethod,
    DpParams,
    HashFunction,
    PypParams,
    Sketch,
)
from src.species import (
    DEFAULT_MAX_TERMS,
    DEFAULT_MC_CHUNK,
    dp_bucket_log_weights,
    dp_freq_posterior,
    pyp_exact_all_buckets,
    pyp_mc_all_buckets,
)
from src.specialfns import digamma
from src.telemetry import log_metric, track_performance
from src.validation import AccuracyError, InvalidConfigurationError

logger = logging.getLogger(__name__)

CLOSED_FORM_RTOL = 1e-8


def _dp_bucket_terms(c: int, vartheta: float) -> np.ndarray:
    """(c−l+1)_(l) / (ϑ+c−l)_(l) pour l = 1..c."""
    l = np.arange(1, c + 1)
    log_terms = (
        gammaln(c + 1) - gammaln(c - l + 1) - gammaln(vartheta + c) + gammaln(vartheta + c - l)
    )
    return np.exp(log_terms)


def _dp_mass_by_level(sketch: Sketch, params: DpParams) -> np.ndarray:
    """Pr[f = l | C] pour l = 1..max c_j (indice l−1), regroupé par compteur distinct."""
    vartheta = params.theta / sketch.width_J
    mass = np.zeros(sketch.max_count)
    values, multiplicity = np.unique(sketch.counts[sketch.counts > 0], return_counts=True)
    for c, times in zip(values, multiplicity):
        mass[: int(c)] += times * _dp_bucket_terms(int(c), vartheta)
    return mass * vartheta / (params.theta + sketch.total_n)


def dp_unconditional_freq(sketch: Sketch, params: DpParams, l: int) -> float:
    """Pr[f_{X_{n+1}} = l | C_J = c] sous DP(θ).

    (θ/J)/(θ+n) · Σ_j (c_j−l+1)_(l) / (θ/J + c_j − l)_(l); les buckets avec
    c_j < l ne contribuent pas.

    Args:
        sketch: Sketch observé
        params: Paramètres du DP
        l: Fréquence, 1 ≤ l ≤ n

    Raises:
        InvalidConfigurationError: Si l ∉ [1, n]

    Example:
        >>> dp_unconditional_freq(Sketch.from_counts([1, 1]), DpParams(2.0), 1)
        0.5
    """
    if not (1 <= l <= sketch.total_n):
        raise InvalidConfigurationError(
            f"Fréquence hors bornes : l = {l} (attendu dans [1, {sketch.total_n}])"
        )
    if l > sketch.max_count:
        return 0.0
    return float(_dp_mass_by_level(sketch, params)[l - 1])


def dp_unconditional_freq_mixture(sketch: Sketch, params: DpParams, l: int) -> float:
    """Pr[f = l | C] = Σ_j Pr[f = l | C, h(X_{n+1}) = j] · Pr[h(X_{n+1}) = j | C]."""
    if not (1 <= l <= sketch.total_n):
        raise InvalidConfigurationError(
            f"Fréquence hors bornes : l = {l} (attendu dans [1, {sketch.total_n}])"
        )
    weights = np.exp(dp_bucket_log_weights(sketch, params))
    total = 0.0
    for j, c_j in enumerate(sketch.counts):
        if c_j >= l:
            pmf = dp_freq_posterior(int(c_j), params, sketch.width_J)
            total += weights[j] * float(pmf.probs[l])
    return total


def dp_digamma_cardinality(sketch: Sketch, params: DpParams) -> float:
    """k̂ = (θ/J) Σ_j [ψ(θ/J + c_j) − ψ(θ/J)]."""
    vartheta = params.theta / sketch.width_J
    base = digamma(vartheta)
    return vartheta * sum(digamma(vartheta + int(c)) - base for c in sketch.counts if c > 0)


def dp_cardinality(sketch: Sketch, params: DpParams) -> CardinalityEstimate:
    """Estimations a posteriori de M_{l,n} et K_n sous DP(θ).

    m̂_l = (θ/J)/l · Σ_j (c_j−l+1)_(l)/(θ/J+c_j−l)_(l) et k̂ = Σ_l m̂_l. La
    forme fermée digamma est calculée en parallèle; un écart relatif
    supérieur à 1e-8 lève AccuracyError.

    Args:
        sketch: Sketch observé
        params: Paramètres du DP

    Returns:
        CardinalityEstimate (méthode DP, k_hat_closed_form renseigné)

    Example:
        >>> est = dp_cardinality(Sketch.from_counts([1, 1]), DpParams(2.0))
        >>> round(est.k_hat, 12)
        2.0
    """
    L_max = sketch.max_count
    levels = np.arange(1, L_max + 1)
    m_hat = (params.theta + sketch.total_n) / levels * _dp_mass_by_level(sketch, params)
    k_hat = float(m_hat.sum())
    closed = dp_digamma_cardinality(sketch, params)

    scale = max(abs(k_hat), abs(closed), 1e-300)
    if abs(k_hat - closed) / scale > CLOSED_FORM_RTOL:
        raise AccuracyError(
            f"Forme digamma incohérente : somme {k_hat:.12g} vs digamma {closed:.12g}",
            achieved=abs(k_hat - closed) / scale,
        )
    log_metric("k_hat", k_hat, tags={"method": "DP"})
    return CardinalityEstimate(
        k_hat=k_hat,
        m_hat=m_hat,
        L_max=L_max,
        method=CardinalityMethod.DP,
        params={"theta": params.theta},
        k_hat_closed_form=closed,
    )


def _mixture(log_pmfs: Sequence[np.ndarray], log_weights: np.ndarray, L_max: int) -> np.ndarray:
    """Σ_j w_j P_j(l) pour l = 0..L_max."""
    law = np.zeros(L_max + 1)
    for log_pmf, log_w in zip(log_pmfs, log_weights):
        law[: log_pmf.shape[0]] += np.exp(log_pmf + log_w)
    return law


def pyp_unconditional_freq(
    sketch: Sketch,
    params: PypParams,
    mode: str = "exact",
    iters: int = 10_000,
    seed: int = 0,
    max_terms: Optional[float] = DEFAULT_MAX_TERMS,
    chunk_size: int = DEFAULT_MC_CHUNK,
) -> Tuple[np.ndarray, CardinalityMethod]:
    """Pr[f_{X_{n+1}} = l | C_J] pour l = 0..max c_j sous PYP.

    Le terme l = 0 est la probabilité d'un nouveau symbole.

    Args:
        mode: "exact" (garde-fou max_terms) ou "mc" (iters, seed)

    Raises:
        InvalidConfigurationError: Si le mode est inconnu
        TractabilityError: Si le garde-fou exact est dépassé
    """
    if mode == "exact":
        log_pmfs, log_weights = pyp_exact_all_buckets(sketch, params, max_terms)
        method = CardinalityMethod.PYP_EXACT
    elif mode == "mc":
        log_pmfs, log_weights = pyp_mc_all_buckets(sketch, params, iters, seed, chunk_size)
        method = CardinalityMethod.PYP_MC
    else:
        raise InvalidConfigurationError(f"Mode de cardinalité PYP inconnu : {mode} (exact|mc)")
    return _mixture(log_pmfs, log_weights, sketch.max_count), method


@track_performance("pyp_cardinality")
def pyp_cardinality(
    sketch: Sketch,
    params: PypParams,
    mode: str = "exact",
    iters: int = 10_000,
    seed: int = 0,
    max_terms: Optional[float] = DEFAULT_MAX_TERMS,
    chunk_size: int = DEFAULT_MC_CHUNK,
) -> CardinalityEstimate:
    """Estimations a posteriori de M_{l,n} et K_n sous PYP(α, γ).

    m̂_l = (γ + n)/(l − α) · Pr[f = l | C], la loi non conditionnelle étant le
    mélange des lois par bucket pondérées par Pr[h(X_{n+1}) = j | C].

    Args:
        sketch: Sketch observé
        params: Paramètres du PYP
        mode: "exact" ou "mc"
        iters: Itérations MC
        seed: Graine MC
        max_terms: Garde-fou du mode exact (None pour le lever)
        chunk_size: Taille des blocs MC

    Returns:
        CardinalityEstimate (PYP-exact ou PYP-MC)
    """
    L_max = sketch.max_count
    if sketch.total_n == 0:
        return CardinalityEstimate(
            k_hat=0.0,
            m_hat=np.zeros(0),
            L_max=0,
            method=CardinalityMethod.PYP_EXACT if mode == "exact" else CardinalityMethod.PYP_MC,
            params={"alpha": params.alpha, "gamma": params.gamma},
        )
    law, method = pyp_unconditional_freq(sketch, params, mode, iters, seed, max_terms, chunk_size)
    levels = np.arange(1, L_max + 1)
    m_hat = (params.gamma + sketch.total_n) / (levels - params.alpha) * law[1:]
    k_hat = float(m_hat.sum())
    logger.debug(f"Probabilité d'un nouveau symbole : {law[0]:.6f}")
    log_metric("k_hat", k_hat, tags={"method": method.value})
    return CardinalityEstimate(
        k_hat=k_hat,
        m_hat=m_hat,
        L_max=L_max,
        method=method,
        params={"alpha": params.alpha, "gamma": params.gamma},
    )


def cardinality_curve(
    tokens: Iterable[Token], h: HashFunction, params: DpParams, checkpoints: Sequence[int]
) -> List[Tuple[int, float]]:
    """k̂ sous DP après chaque préfixe de longueur donnée dans checkpoints.

    Le sketch est mis à jour en une passe; les points de contrôle au-delà de
    la longueur du flux sont ignorés.

    Returns:
        Liste de (longueur du préfixe, k̂)
    """
    targets = sorted(set(int(c) for c in checkpoints if c > 0))
    counts = np.zeros(h.width_J, dtype=np.int64)
    curve: List[Tuple[int, float]] = []
    seen = 0
    position = 0
    for token in tokens:
        if position >= len(targets):
            break
        counts[hash_key(h, token)] += 1
        seen += 1
        if seen == targets[position]:
            prefix = Sketch(counts.copy(), total_n=seen, width_J=h.width_J, hash_seed=h.seed)
            curve.append((seen, dp_cardinality(prefix, params).k_hat))
            position += 1
    if position < len(targets):
        logger.warning(
            f"Flux de {seen} jetons : {len(targets) - position} point(s) de contrôle ignoré(s)"
        )
    return curve

