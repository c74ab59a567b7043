"""Lois a posteriori de la fréquence empirique d'un symbole requête.

Étant donné un sketch C_J = c et le bucket j = h(X_{n+1}) de la requête,
ce module calcule Pr[f_{X_{n+1}} = l | C_J = c, h(X_{n+1}) = j] sous:

    - un processus de Dirichlet (forme fermée, ne dépend que de c_j),
    - un processus de Pitman-Yor (évaluation exacte groupée ou Monte Carlo),
    - un prior Poisson-Kingman incliné quelconque (quadrature, petites instances).

Functions:
    dp_freq_posterior: Loi a posteriori exacte sous DP
    dp_posterior_mean: Moyenne a posteriori sous DP, c_j / (1 + θ/J)
    dp_bucket_log_weights: log Pr[h(X_{n+1}) = j | C] sous DP
    pyp_freq_posterior_exact: Loi a posteriori exacte sous PYP
    pyp_bucket_log_weights: log Pr[h(X_{n+1}) = j | C] sous PYP (exact)
    bucket_log_weights: Aiguillage DP / PYP des deux précédentes
    pyp_freq_posterior_mc: Estimateur Monte Carlo sous PYP
    pyp_mean_asymptotic: Estimateur asymptotique de la moyenne sous PYP
    pk_freq_posterior_numeric: Évaluateur numérique pour prior PK incliné
    summarize: Moyenne, médiane, mode et intervalle de crédibilité
    cms_baseline: Estimation count-min à une ligne (c_j)
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from src.models import (
    CrmFamily,
    CrmSpec,
    DpParams,
    MethodTag,
    PkTilt,
    PmfSummary,
    PosteriorPmf,
    PypParams,
    Sketch,
)
from src.specialfns import crm_kappa, crm_psi, gfc_table, log_binom, log_rising, phi_derivatives
from src.telemetry import track_performance
from src.validation import (
    AccuracyError,
    DegenerateEstimateError,
    InvalidConfigurationError,
    TractabilityError,
    validate_bucket,
    validate_probability_level,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_TERMS = 1e7
PK_MAX_TOTAL = 64
PK_MAX_WIDTH = 8
DEFAULT_MC_CHUNK = 50_000

# Écart toléré sur la normalisation avant renormalisation explicite
NORMALIZATION_WARN = 1e-8


def _normalize(log_weights: np.ndarray) -> Tuple[np.ndarray, float]:
    """Renormalise des log-poids; retourne (log_probs, log de la masse initiale)."""
    log_total = float(logsumexp(log_weights))
    return log_weights - log_total, log_total


# ============================================================================
# PROCESSUS DE DIRICHLET
# ============================================================================


def dp_freq_posterior(c_j: int, params: DpParams, J: int) -> PosteriorPmf:
    """Loi a posteriori de f sous DP(θ): Bêta-binomiale(c_j; 1, θ/J).

    P(l) = (θ/J) (c_j−l+1)_(l) / (θ/J + c_j − l)_(l+1), évaluée par le
    rapport P(l+1)/P(l) = (c_j − l)/(θ/J + c_j − l − 1) cumulé en log1p,
    stable jusqu'à c_j ~ 10^5 et plus.

    Args:
        c_j: Compteur du bucket de la requête
        params: Paramètres du DP
        J: Largeur du sketch

    Returns:
        PosteriorPmf sur l = 0..c_j (méthode DP-exact)

    Example:
        >>> pmf = dp_freq_posterior(5, DpParams(theta=1.0), J=10)
        >>> round(float(pmf.probs[0]), 6)
        0.019608
    """
    if c_j < 0:
        raise InvalidConfigurationError(f"Compteur négatif : c_j = {c_j}")
    vartheta = params.theta / J

    remaining = c_j - np.arange(c_j)
    steps = -np.log1p((vartheta - 1.0) / remaining)
    log_probs = np.empty(c_j + 1)
    log_probs[0] = 0.0
    log_probs[1:] = np.cumsum(steps)
    log_probs += math.log(vartheta) - math.log(vartheta + c_j)

    log_probs, log_total = _normalize(log_probs)
    if abs(log_total) > NORMALIZATION_WARN:
        logger.warning(f"Défaut de normalisation DP : {log_total:.2e} (c_j = {c_j})")
    return PosteriorPmf(support_max=c_j, log_probs=log_probs, method=MethodTag.DP_EXACT)


def dp_posterior_mean(c_j: int, params: DpParams, J: int) -> float:
    """Moyenne de la Bêta-binomiale(c_j; 1, θ/J): c_j / (1 + θ/J)."""
    return c_j / (1.0 + params.theta / J)


def dp_bucket_log_weights(sketch: Sketch, params: DpParams) -> np.ndarray:
    """log Pr[h(X_{n+1}) = j | C] = log((θ/J + c_j)/(θ + n))."""
    vartheta = params.theta / sketch.width_J
    return np.log(vartheta + sketch.counts) - math.log(params.theta + sketch.total_n)


# ============================================================================
# PROCESSUS DE PITMAN-YOR: ÉVALUATION EXACTE
# ============================================================================


def _log_convolve(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Produit de deux polynômes à coefficients donnés en log."""
    out_len = first.shape[0] + second.shape[0] - 1
    grid = np.full((first.shape[0], out_len), -np.inf)
    for i, value in enumerate(first):
        grid[i, i : i + second.shape[0]] = value + second
    with np.errstate(divide="ignore"):
        return logsumexp(grid, axis=0)


def _log_poly_products_excluding(polys: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Pour chaque k, produit des polynômes d'indices ≠ k (préfixes × suffixes)."""
    one = np.zeros(1)
    prefix = [one]
    for poly in polys[:-1]:
        prefix.append(_log_convolve(prefix[-1], poly))
    suffix = [one]
    for poly in reversed(polys[1:]):
        suffix.append(_log_convolve(suffix[-1], poly))
    suffix.reverse()
    return [_log_convolve(prefix[k], suffix[k]) for k in range(len(polys))]


def _check_exact_gate(counts: np.ndarray, max_terms: Optional[float]) -> None:
    if max_terms is None:
        return
    log_size = float(np.sum(np.log(counts + 2.0)))
    logger.debug(f"Taille de l'ensemble d'indices : ~10^{log_size / math.log(10):.1f}")
    if log_size > math.log(max_terms):
        raise TractabilityError(
            f"Évaluation exacte PYP trop coûteuse : Π(c_k + 2) ≈ 10^{log_size / math.log(10):.1f} "
            f"> {max_terms:.0e}. Utilisez l'estimateur Monte Carlo (--mode mc)."
        )


def _group_sums(
    off_poly: np.ndarray, shift: float, log_J: float, max_a: int
) -> np.ndarray:
    """G(a) = log Σ_r Γ(shift + a + r) J^{−(a+r)} Q_r pour a = 0..max_a."""
    a = np.arange(max_a + 1)[:, None]
    r = np.arange(off_poly.shape[0])[None, :]
    total = a + r
    grid = gammaln(shift + total) - total * log_J + off_poly[None, :]
    with np.errstate(divide="ignore"):
        return logsumexp(grid, axis=1)


def _pyp_exact_terms(
    counts: np.ndarray, j: int, params: PypParams, off_poly: np.ndarray
) -> Tuple[np.ndarray, float]:
    """Log-numérateurs (l = 0..c_j) et log-dénominateur de la loi exacte PYP.

    Numérateur: (α/J) C(c_j, l) (1−α)_(l) Σ_i Γ(γ/α + 1 + |i|) J^{−|i|} Π_k 𝒞(c'_k, i_k; α)
    avec c' = c − l e_j; dénominateur: Σ_i Γ(γ/α + |i|) J^{−|i|} Π_k 𝒞(c''_k, i_k; α)
    avec c'' = c + e_j. Les sommes sont regroupées par |i|.
    """
    alpha, gamma = params.alpha, params.gamma
    J = counts.shape[0]
    log_J = math.log(J)
    c_j = int(counts[j])
    table = gfc_table(int(counts.max()) + 1, alpha).log_values

    shift_num = gamma / alpha + 1.0
    shift_den = gamma / alpha

    grouped_num = _group_sums(off_poly, shift_num, log_J, c_j)
    inner = table[: c_j + 1, : c_j + 1] + grouped_num[None, :]
    with np.errstate(divide="ignore"):
        by_remaining = logsumexp(inner, axis=1)  # indexé par m = c_j − l

    l = np.arange(c_j + 1)
    log_num = (
        math.log(alpha / J)
        + np.asarray(log_binom(c_j, l))
        + np.asarray(log_rising(1.0 - alpha, l))
        + by_remaining[c_j - l]
    )

    grouped_den = _group_sums(off_poly, shift_den, log_J, c_j + 1)
    log_den = float(logsumexp(table[c_j + 1, : c_j + 2] + grouped_den))
    return log_num, log_den


def _off_bucket_polys(counts: np.ndarray, alpha: float) -> List[np.ndarray]:
    table = gfc_table(int(counts.max()) + 1, alpha)
    polys = [np.array(table.log_row(int(c))) for c in counts]
    return _log_poly_products_excluding(polys)


@track_performance("pyp_freq_posterior_exact")
def pyp_freq_posterior_exact(
    sketch: Sketch, j: int, params: PypParams, max_terms: Optional[float] = DEFAULT_MAX_TERMS
) -> PosteriorPmf:
    """Loi a posteriori exacte de f sous PYP(α, γ).

    La somme sur les multi-indices est regroupée par nombre total de blocs,
    ce qui la ramène à des convolutions de polynômes en log. Le garde-fou
    Π_k (c_k + 2) ≤ max_terms est conservé (max_terms=None le lève).

    Args:
        sketch: Sketch observé
        j: Bucket de la requête
        params: Paramètres du PYP
        max_terms: Garde-fou de taille (None pour le désactiver)

    Returns:
        PosteriorPmf sur l = 0..c_j (méthode PYP-exact)

    Raises:
        TractabilityError: Si le garde-fou est dépassé
    """
    validate_bucket(j, sketch.width_J)
    counts = sketch.counts
    _check_exact_gate(counts, max_terms)

    table = gfc_table(int(counts.max()) + 1, params.alpha)
    polys = [np.array(table.log_row(int(c))) for i, c in enumerate(counts) if i != j]
    off_poly = np.zeros(1)
    for poly in polys:
        off_poly = _log_convolve(off_poly, poly)

    log_num, log_den = _pyp_exact_terms(counts, j, params, off_poly)
    log_probs, log_total = _normalize(log_num - log_den)
    if abs(log_total) > NORMALIZATION_WARN:
        logger.warning(f"Défaut de normalisation PYP exact : {log_total:.2e}")
    else:
        logger.debug(f"Normalisation PYP exacte vérifiée (écart {log_total:.1e})")
    return PosteriorPmf(
        support_max=int(counts[j]), log_probs=log_probs, method=MethodTag.PYP_EXACT
    )


def pyp_exact_all_buckets(
    sketch: Sketch, params: PypParams, max_terms: Optional[float] = DEFAULT_MAX_TERMS
) -> Tuple[List[np.ndarray], np.ndarray]:
    """Lois exactes par bucket et log-poids log Pr[h(X_{n+1}) = j | C].

    Returns:
        (liste des log_probs normalisées par bucket, log-poids normalisés des buckets)
    """
    counts = sketch.counts
    _check_exact_gate(counts, max_terms)
    off_polys = _off_bucket_polys(counts, params.alpha)

    log_pmfs: List[np.ndarray] = []
    log_dens = np.empty(sketch.width_J)
    for j in range(sketch.width_J):
        log_num, log_den = _pyp_exact_terms(counts, j, params, off_polys[j])
        log_pmfs.append(_normalize(log_num - log_den)[0])
        log_dens[j] = log_den
    return log_pmfs, log_dens - logsumexp(log_dens)


def pyp_bucket_log_weights(
    sketch: Sketch, params: PypParams, max_terms: Optional[float] = DEFAULT_MAX_TERMS
) -> np.ndarray:
    """log Pr[h(X_{n+1}) = j | C] sous PYP, proportionnel au dénominateur exact."""
    return pyp_exact_all_buckets(sketch, params, max_terms)[1]


def bucket_log_weights(sketch: Sketch, params: Union[DpParams, PypParams]) -> np.ndarray:
    """log Pr[h(X_{n+1}) = j | C] pour j = 0..J−1 (DP en forme fermée, PYP exact)."""
    if isinstance(params, DpParams):
        return dp_bucket_log_weights(sketch, params)
    return pyp_bucket_log_weights(sketch, params)


# ============================================================================
# PROCESSUS DE PITMAN-YOR: MONTE CARLO
# ============================================================================


def _chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Flux Philox du bloc `chunk`: les blocs parallèles reproduisent le flux série."""
    return np.random.Generator(np.random.Philox(seed & ((1 << 64) - 1)).jumped(chunk))


def _sample_table_paths(
    rng: np.random.Generator, params: PypParams, length: int, iters: int
) -> np.ndarray:
    """Trajectoires du nombre de tables K_0..K_length du restaurant à deux paramètres.

    Nouvelle table au client i+1 avec probabilité (γ + kα)/(γ + i).
    """
    paths = np.zeros((iters, length + 1), dtype=np.int32)
    tables = np.zeros(iters, dtype=np.int32)
    for i in range(length):
        prob_new = (params.gamma + tables * params.alpha) / (params.gamma + i)
        tables = tables + (rng.random(iters) < prob_new)
        paths[:, i + 1] = tables
    return paths


def sample_bucket_paths(
    counts: np.ndarray, params: PypParams, iters: int, seed: int, chunk_size: int = DEFAULT_MC_CHUNK
) -> List[np.ndarray]:
    """Trajectoires K par bucket, de longueur c_k + 1, partagées entre l et j.

    Returns:
        Liste de J tableaux (iters × (c_k + 2))
    """
    per_bucket: List[List[np.ndarray]] = [[] for _ in counts]
    n_chunks = (iters + chunk_size - 1) // chunk_size
    for chunk in range(n_chunks):
        size = min(chunk_size, iters - chunk * chunk_size)
        rng = _chunk_generator(seed, chunk)
        for k, c_k in enumerate(counts):
            per_bucket[k].append(_sample_table_paths(rng, params, int(c_k) + 1, size))
    return [np.concatenate(parts, axis=0) for parts in per_bucket]


def _mc_bucket_ratios(
    paths: List[np.ndarray], counts: np.ndarray, j: int, params: PypParams
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Rapports MC non normalisés pour le bucket j.

    Returns:
        (log R_l, écart-type de R_l, log de l'estimation du dénominateur à
        une constante commune aux buckets près)
    """
    alpha, gamma = params.alpha, params.gamma
    J = counts.shape[0]
    log_J = math.log(J)
    c_j = int(counts[j])
    shift_den = gamma / alpha
    shift_num = shift_den + 1.0
    iters = paths[0].shape[0]

    others = [k for k in range(J) if k != j]
    off_tables = np.zeros(iters, dtype=np.int64)
    off_log = np.zeros(iters)
    for k in others:
        k_tables = paths[k][:, int(counts[k])].astype(np.int64)
        off_tables += k_tables
        off_log += log_rising(shift_den, k_tables)

    own = paths[j].astype(np.int64)
    l = np.arange(c_j + 1)
    own_num = own[:, c_j - l]  # iters × (c_j + 1)
    total_num = own_num + off_tables[:, None]
    log_w = (
        gammaln(shift_num + total_num)
        - gammaln(shift_num)
        - total_num * log_J
        - (gammaln(shift_den + own_num) - gammaln(shift_den))
        - off_log[:, None]
    )
    own_den = own[:, c_j + 1]
    total_den = own_den + off_tables
    log_w_den = (
        np.asarray(log_rising(shift_den, total_den))
        - total_den * log_J
        - np.asarray(log_rising(shift_den, own_den))
        - off_log
    )

    peak_num = log_w.max(axis=0)
    peak_den = float(log_w_den.max())
    scaled_num = np.exp(log_w - peak_num[None, :])
    scaled_den = np.exp(log_w_den - peak_den)
    mean_num = scaled_num.mean(axis=0)
    mean_den = float(scaled_den.mean())
    if not (mean_den > 0 and math.isfinite(mean_den)):
        raise DegenerateEstimateError(
            "Dénominateur Monte Carlo nul : augmentez le nombre d'itérations (--iters)"
        )

    ratio = mean_num / mean_den
    residual = scaled_num - ratio[None, :] * scaled_den[:, None]
    ddof = 1 if iters > 1 else 0
    se_scaled = np.sqrt(residual.var(axis=0, ddof=ddof) / iters) / mean_den

    log_const = (
        math.log(gamma / J)
        + np.asarray(log_binom(c_j, l))
        + np.asarray(log_rising(1.0 - alpha, l))
        + np.asarray(log_rising(gamma, c_j - l))
        - float(log_rising(gamma, c_j + 1))
        + peak_num
        - peak_den
    )
    with np.errstate(divide="ignore"):
        log_ratio = log_const + np.log(ratio)
    stderr = np.exp(log_const) * se_scaled
    log_den_estimate = math.log(gamma + c_j) + peak_den + math.log(mean_den)
    return log_ratio, stderr, log_den_estimate


def _finalize_mc(log_ratio: np.ndarray, stderr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if not np.any(np.isfinite(log_ratio)):
        raise DegenerateEstimateError(
            "Tous les rapports Monte Carlo sont nuls : augmentez le nombre d'itérations (--iters)"
        )
    log_probs, log_total = _normalize(log_ratio)
    logger.debug(f"Masse MC avant renormalisation : {math.exp(log_total):.6f}")
    return log_probs, stderr / math.exp(log_total)


@track_performance("pyp_freq_posterior_mc")
def pyp_freq_posterior_mc(
    sketch: Sketch,
    j: int,
    params: PypParams,
    iters: int,
    seed: int,
    chunk_size: int = DEFAULT_MC_CHUNK,
) -> PosteriorPmf:
    """Estimateur Monte Carlo de la loi a posteriori sous PYP.

    Chaque probabilité est un rapport de deux espérances sur les nombres de
    tables (K_{c_1}, …, K_{c_J}) tirés par la règle séquentielle du
    restaurant à deux paramètres. Mêmes tirages pour tous les l (nombres
    aléatoires communs), erreurs standard par méthode delta, PMF
    renormalisée à la fin.

    Args:
        sketch: Sketch observé
        j: Bucket de la requête
        params: Paramètres du PYP
        iters: Nombre d'itérations ≥ 1
        seed: Graine (flux Philox découpé en blocs reproductibles)
        chunk_size: Taille des blocs de tirage

    Returns:
        PosteriorPmf avec stderr (méthode PYP-MC)

    Raises:
        DegenerateEstimateError: Si le dénominateur estimé est nul
    """
    validate_bucket(j, sketch.width_J)
    if iters < 1:
        raise InvalidConfigurationError(f"Nombre d'itérations invalide : {iters}")

    paths = sample_bucket_paths(sketch.counts, params, iters, seed, chunk_size)
    log_ratio, stderr, _ = _mc_bucket_ratios(paths, sketch.counts, j, params)
    log_probs, stderr = _finalize_mc(log_ratio, stderr)
    return PosteriorPmf(
        support_max=int(sketch.counts[j]),
        log_probs=log_probs,
        method=MethodTag.PYP_MC,
        stderr=stderr,
    )


def pyp_mc_all_buckets(
    sketch: Sketch, params: PypParams, iters: int, seed: int, chunk_size: int = DEFAULT_MC_CHUNK
) -> Tuple[List[np.ndarray], np.ndarray]:
    """Lois MC de tous les buckets (tirages K partagés) et log-poids des buckets."""
    paths = sample_bucket_paths(sketch.counts, params, iters, seed, chunk_size)
    log_pmfs: List[np.ndarray] = []
    log_dens = np.empty(sketch.width_J)
    for j in range(sketch.width_J):
        log_ratio, stderr, log_den = _mc_bucket_ratios(paths, sketch.counts, j, params)
        log_pmfs.append(_finalize_mc(log_ratio, stderr)[0])
        log_dens[j] = log_den
    return log_pmfs, log_dens - logsumexp(log_dens)


def pyp_mean_asymptotic(c_j: int, params: PypParams, J: int) -> float:
    """Estimateur asymptotique de la moyenne a posteriori sous PYP.

    Retourne c_j · (γ/α)(1−α)/(γ + Jα − α + 1), limite itérée où les autres
    buckets croissent d'abord. Quand tous les compteurs croissent ensemble,
    la moyenne exacte divisée par c_j se stabilise ailleurs (≈ 0.33 pour
    J = 10, α = 0.5, γ = 1, contre 1/6.5): l'estimateur n'est alors qu'une
    heuristique.

    Example:
        >>> pyp_mean_asymptotic(100, PypParams(alpha=0.5, gamma=1.0), J=2)
        40.0
    """
    alpha, gamma = params.alpha, params.gamma
    return c_j * (gamma / alpha) * (1.0 - alpha) / (gamma + J * alpha - alpha + 1.0)


# ============================================================================
# PRIOR POISSON-KINGMAN INCLINÉ (ÉVALUATEUR NUMÉRIQUE)
# ============================================================================


def _check_tilt_normalizable(spec: CrmSpec, tilt: PkTilt) -> None:
    """Vérifie numériquement que E[T^{−γ} e^{−βT}] < ∞ pour la CRM choisie."""
    theta = spec.total_mass_theta
    if tilt.gamma_tilt > 0:
        # E[T^{-γ} e^{-βT}] ∝ ∫ u^{γ−1} e^{−θψ(u+β)} du: décroissance plus rapide que 1/u
        grid = (1e6, 1e8)
        logs = [
            (tilt.gamma_tilt - 1.0) * math.log(u) - theta * crm_psi(spec, u + tilt.beta_tilt)
            for u in grid
        ]
        slope = (logs[1] - logs[0]) / (math.log(grid[1]) - math.log(grid[0]))
        if slope >= -1.0 - 1e-3:
            raise InvalidConfigurationError(
                f"Inclinaison non normalisable : γ = {tilt.gamma_tilt} pour cette CRM "
                f"(pente log-log {slope:.3f} ≥ −1)"
            )
    elif tilt.gamma_tilt < 0 and tilt.beta_tilt == 0:
        stable = spec.family is CrmFamily.GENERALIZED_GAMMA and spec.tau == 0 and spec.alpha > 0
        if stable and -tilt.gamma_tilt >= spec.alpha:
            raise InvalidConfigurationError(
                f"Inclinaison non normalisable : moment d'ordre {-tilt.gamma_tilt} "
                f"infini pour la CRM stable d'indice {spec.alpha}"
            )


@track_performance("pk_freq_posterior_numeric")
def pk_freq_posterior_numeric(
    spec: CrmSpec, tilt: PkTilt, sketch: Sketch, j: int
) -> PosteriorPmf:
    """Loi a posteriori sous un prior Poisson-Kingman incliné, par quadrature.

    Numérateur (l = 0..c_j) et dénominateur sont des intégrales sur
    u ∈ (0, ∞), ramenées à (0, 1) par u = t/(1−t) et intégrées ensemble
    (quadrature adaptative vectorielle). Chaque intégrande est assemblée en
    log depuis phi_derivatives et crm_kappa puis recentrée sur son maximum.

    Args:
        spec: CRM (θ = spec.total_mass_theta)
        tilt: Inclinaison g(t) ∝ t^{−γ} e^{−βt}
        sketch: Sketch (n ≤ 64, J ≤ 8)
        j: Bucket de la requête

    Returns:
        PosteriorPmf sur l = 0..c_j (méthode PK-numeric)

    Raises:
        TractabilityError: Si n > 64 ou J > 8
        AccuracyError: Si la quadrature n'atteint pas la tolérance
    """
    validate_bucket(j, sketch.width_J)
    if sketch.total_n > PK_MAX_TOTAL or sketch.width_J > PK_MAX_WIDTH:
        raise TractabilityError(
            f"Évaluateur PK limité à n ≤ {PK_MAX_TOTAL} et J ≤ {PK_MAX_WIDTH} "
            f"(reçu n = {sketch.total_n}, J = {sketch.width_J})"
        )
    power = sketch.total_n + tilt.gamma_tilt
    if power <= -1:
        raise InvalidConfigurationError(f"Intégrande non intégrable en 0 : n + γ = {power}")
    _check_tilt_normalizable(spec, tilt)

    counts = sketch.counts
    c_j = int(counts[j])
    vartheta = spec.total_mass_theta / sketch.width_J
    m_max = int(counts.max()) + 1
    l = np.arange(c_j + 1)

    def log_integrand(t: float) -> np.ndarray:
        u = t / (1.0 - t)
        v = u + tilt.beta_tilt
        log_phi = phi_derivatives(spec, vartheta, v, m_max)
        off = float(np.sum(log_phi[counts])) - float(log_phi[c_j])
        log_u = power * math.log(u) if power != 0 else 0.0
        common = log_u + off - 2.0 * math.log1p(-t)
        log_kappa = np.array([crm_kappa(spec, v, k + 1) for k in l])
        numerators = common + log_phi[c_j - l] + log_kappa
        denominator = common + log_phi[c_j + 1]
        return np.append(numerators, denominator)

    scan = np.linspace(1e-4, 1.0 - 1e-4, 97)
    peaks = np.max(np.array([log_integrand(t) for t in scan]), axis=0)

    def scaled(t: float) -> np.ndarray:
        if t <= 0.0 or t >= 1.0:
            return np.zeros(c_j + 2)
        return np.exp(log_integrand(t) - peaks)

    points = None
    if spec.family is CrmFamily.GENERALIZED_GAMMA and 0 < spec.tau < 1e-2:
        points = [spec.tau / (1.0 + spec.tau), 0.5]
    values, abserr = integrate.quad_vec(
        scaled, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, norm="max", limit=2000, points=points
    )
    values = np.asarray(values)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise AccuracyError(
            "Quadrature PK dégénérée (intégrale nulle ou non finie)", achieved=abserr
        )
    relative = float(abserr) / float(np.min(values))
    if relative > 1e-6:
        raise AccuracyError(
            f"Quadrature PK imprécise : erreur relative {relative:.2e}", achieved=relative
        )

    log_values = np.log(values) + peaks
    log_num = math.log(vartheta) + np.asarray(log_binom(c_j, l)) + log_values[:-1]
    log_probs, log_total = _normalize(log_num - log_values[-1])
    logger.debug(f"PK numérique : masse avant renormalisation {math.exp(log_total):.10f}")
    if abs(log_total) > 1e-6:
        logger.warning(f"Défaut de normalisation PK : {log_total:.2e}")
    return PosteriorPmf(support_max=c_j, log_probs=log_probs, method=MethodTag.PK_NUMERIC)


# ============================================================================
# RÉSUMÉS
# ============================================================================


def summarize(pmf: PosteriorPmf, ci_level: float = 0.95) -> PmfSummary:
    """Résume une PMF: moyenne, médiane basse, mode, intervalle de crédibilité.

    - médiane: plus petit l tel que CDF(l) ≥ 0.5
    - mode: argmax, égalités départagées par le plus petit l
    - intervalle: plus court intervalle de points consécutifs de masse
      ≥ ci_level, égalités départagées par le plus à gauche

    Example:
        >>> uniform = PosteriorPmf(4, np.log(np.full(5, 0.2)), MethodTag.DP_EXACT)
        >>> s = summarize(uniform)
        >>> (s.median, s.mode, round(s.mean, 12))
        (2, 0, 2.0)
    """
    validate_probability_level(ci_level, "Niveau de crédibilité")
    probs = pmf.probs
    support = np.arange(pmf.support_max + 1)
    tol = 1e-12

    mean = float(np.dot(support, probs))
    cdf = np.cumsum(probs)
    median = int(np.argmax(cdf >= 0.5 - tol))
    mode = int(np.argmax(probs >= probs.max() * (1.0 - tol)))

    padded = np.concatenate(([0.0], cdf))
    best: Tuple[int, int] = (0, pmf.support_max)
    best_width = pmf.support_max
    for low in range(pmf.support_max + 1):
        # plus petit high tel que la masse de [low, high] atteigne ci_level
        target = padded[low] + ci_level - tol
        high = int(np.searchsorted(cdf, target, side="left"))
        if high > pmf.support_max:
            break
        if high - low < best_width:
            best, best_width = (low, high), high - low
    return PmfSummary(
        mean=mean, median=median, mode=mode, credible_interval=best, ci_level=ci_level
    )


def cms_baseline(sketch: Sketch, j: int) -> int:
    """Estimation count-min à une ligne: le compteur c_j (majorant de la fréquence vraie)."""
    validate_bucket(j, sketch.width_J)
    return int(sketch.counts[j])
