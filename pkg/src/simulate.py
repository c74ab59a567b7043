"""Générateurs de données et oracles exacts ou simulés.

- Restaurant chinois à deux paramètres (PYP, DP pour α = 0)
- Loi de Zipf (support infini exact, ou borné par inversion de la CDF)
- IBP généralisé par troncature de Ferguson–Klass de la CRM
- Oracle conditionnel du cadre à traits (simulation d'un seul bucket)
- Oracle exact par énumération des partitions de [n+1] (petites instances)

Toutes les fonctions aléatoires prennent une graine explicite et utilisent
un générateur Philox (compteur), dont les blocs sont reproductibles.

Functions:
    sample_pyp_sequence: Suite d'étiquettes du restaurant à deux paramètres
    sample_zipf: Échantillon de Zipf(c)
    sample_ibp_poisson_gamma: Tirage tronqué d'un IBP généralisé
    sketch_trait_draw: Sketch d'un tirage IBP par hachage idéalisé des atomes
    trait_conditional_oracle: Loi conditionnelle simulée de f dans une cellule (c, b, a)
    partition_oracle: Loi jointe exacte de (C_J, h(X_{n+1}), f_{X_{n+1}})
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import exp1, gammainc, gammaincc, gammaln, psi

from src.models import (
    CountsKey,
    CrmFamily,
    CrmSpec,
    DpParams,
    IbpDraw,
    PartitionOracleResult,
    PypParams,
    Sketch,
)
from src.telemetry import track_performance
from src.validation import (
    DivergenceError,
    InvalidConfigurationError,
    TractabilityError,
    validate_trait_query,
    validate_width,
)

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1
_UNIFORM_BATCH = 8192

MIN_TRUNCATION = 100
TRUNCATION_WARN = 1e-3
ORACLE_MAX_N = 7
ORACLE_MAX_J = 3

SeatingParams = Union[PypParams, DpParams]


def make_rng(seed: int, chunk: int = 0) -> np.random.Generator:
    """Générateur Philox de la graine, avancé de `chunk` blocs de 2^128 tirages."""
    bit_generator = np.random.Philox(seed & _SEED_MASK)
    if chunk:
        bit_generator = bit_generator.jumped(chunk)
    return np.random.Generator(bit_generator)


class _UniformStream:
    """Uniformes tirées par lots depuis un générateur."""

    def __init__(self, rng: np.random.Generator) -> None:
        self._rng = rng
        self._buffer = rng.random(_UNIFORM_BATCH)
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._buffer.shape[0]:
            self._buffer = self._rng.random(_UNIFORM_BATCH)
            self._pos = 0
        value = float(self._buffer[self._pos])
        self._pos += 1
        return value


def _seating_parameters(params: SeatingParams) -> Tuple[float, float]:
    if isinstance(params, DpParams):
        return 0.0, params.theta
    return params.alpha, params.gamma


# ============================================================================
# RESTAURANT CHINOIS À DEUX PARAMÈTRES
# ============================================================================


@track_performance("sample_pyp_sequence")
def sample_pyp_sequence(params: SeatingParams, n: int, seed: int) -> np.ndarray:
    """Tire n étiquettes par la règle séquentielle du restaurant à deux paramètres.

    Le client i+1 ouvre une nouvelle table avec probabilité (γ + kα)/(γ + i)
    et rejoint la table t avec probabilité (n_t − α)/(γ + i). Le choix d'une
    table existante se fait par rejet: un client précédent uniforme (table t
    avec probabilité n_t/i) est accepté avec probabilité (n_t − α)/n_t.

    Args:
        params: PypParams, ou DpParams (cas α = 0, γ = θ)
        n: Nombre d'observations ≥ 1
        seed: Graine

    Returns:
        Tableau int64 d'étiquettes 0, 1, 2, … dans l'ordre d'apparition

    Example:
        >>> sample_pyp_sequence(DpParams(1.0), 1, seed=3).tolist()
        [0]
    """
    if n < 1:
        raise InvalidConfigurationError(f"Taille d'échantillon invalide : n = {n}")
    alpha, gamma = _seating_parameters(params)
    uniforms = _UniformStream(make_rng(seed))

    labels = np.empty(n, dtype=np.int64)
    sizes: List[int] = []
    for i in range(n):
        k = len(sizes)
        if i == 0 or uniforms.next() < (gamma + k * alpha) / (gamma + i):
            labels[i] = k
            sizes.append(1)
            continue
        while True:
            table = int(labels[min(int(uniforms.next() * i), i - 1)])
            if alpha == 0.0 or uniforms.next() * sizes[table] < sizes[table] - alpha:
                break
        labels[i] = table
        sizes[table] += 1
    logger.debug(f"Restaurant : {n} clients, {len(sizes)} tables")
    return labels


# ============================================================================
# ZIPF
# ============================================================================


def sample_zipf(
    c_param: float, n: int, n_items: Optional[int] = None, seed: int = 0
) -> np.ndarray:
    """Tire n rangs (≥ 1) d'une loi de Zipf Pr[k] ∝ k^{−c}.

    Support infini (n_items=None): `Generator.zipf` de numpy (rejet exact),
    sans troncature du support ni CDF inversée plafonnée: les rangs ne sont
    pas bornés. Support borné: inversion de la CDF normalisée sur 1..n_items.

    Args:
        c_param: Exposant c > 1
        n: Taille de l'échantillon
        n_items: Taille du support (None pour infini)
        seed: Graine

    Raises:
        DivergenceError: Si c ≤ 1 (mesure non normalisable)
    """
    if not c_param > 1.0:
        raise DivergenceError(f"Zipf divergente : c = {c_param} (c > 1 requis)")
    if n < 0:
        raise InvalidConfigurationError(f"Taille d'échantillon invalide : n = {n}")
    rng = make_rng(seed)
    if n_items is None:
        return rng.zipf(c_param, size=n).astype(np.int64)
    if n_items < 1:
        raise InvalidConfigurationError(f"Support de Zipf vide : n_items = {n_items}")
    weights = np.arange(1, n_items + 1, dtype=float) ** (-c_param)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    ranks = np.searchsorted(cdf, rng.random(n), side="right") + 1
    return np.minimum(ranks, n_items).astype(np.int64)


# ============================================================================
# CRM TRONQUÉE (FERGUSON–KLASS)
# ============================================================================


def _tail_mass(spec: CrmSpec, mass: float, log_x: np.ndarray) -> np.ndarray:
    """N(x) = mass ∫_x^∞ ρ(s) ds, évalué en log x (x pouvant sous-déborder)."""
    x = np.exp(log_x)
    tiny = x < 1e-280

    if spec.family is CrmFamily.STABLE_BETA:
        beta = spec.beta_param
        if beta == 1.0:
            return -mass * log_x
        # ∫_x^1 s^{-1}(1−s)^{β−1} ds ≈ −log x − γ_E − ψ(β) pour x → 0
        values = np.empty_like(log_x)
        for i, (lx, xi) in enumerate(zip(log_x, x)):
            if xi < 1e-10:
                values[i] = -lx + float(psi(1.0) - psi(beta))
            elif xi >= 1.0:
                values[i] = 0.0
            else:
                part, _ = integrate.quad(
                    lambda s: 1.0 / s, xi, 1.0, weight="alg", wvar=(0.0, beta - 1.0)
                )
                values[i] = part
        return mass * values

    if spec.family is CrmFamily.GAMMA or spec.alpha == 0.0:
        tau = 1.0 if spec.family is CrmFamily.GAMMA else spec.tau
        scaled = tau * np.where(tiny, 1.0, x)
        exact = exp1(scaled)
        asymptotic = -np.euler_gamma - log_x - math.log(tau)
        return mass * np.where(tiny, asymptotic, exact)

    alpha, tau = spec.alpha, spec.tau
    log_gamma_1ma = float(gammaln(1.0 - alpha))
    leading = np.exp(-alpha * log_x - tau * np.where(tiny, 0.0, x) - log_gamma_1ma)
    if tau == 0.0:
        return mass * leading
    correction = tau**alpha * gammaincc(1.0 - alpha, tau * np.where(tiny, 0.0, x))
    return mass * (leading - correction)


def _truncated_mass(spec: CrmSpec, mass: float, x: float) -> float:
    """Masse espérée des sauts < x: mass ∫_0^x s ρ(s) ds."""
    if x <= 0.0:
        return 0.0
    if spec.family is CrmFamily.STABLE_BETA:
        return mass * (1.0 - (1.0 - min(x, 1.0)) ** spec.beta_param) / spec.beta_param
    if spec.family is CrmFamily.GAMMA:
        return mass * -math.expm1(-x)
    alpha, tau = spec.alpha, spec.tau
    if alpha == 0.0:
        return mass * -math.expm1(-tau * x) / tau
    if tau == 0.0:
        return mass * alpha * x ** (1.0 - alpha) / math.exp(float(gammaln(2.0 - alpha)))
    return mass * alpha * tau ** (alpha - 1.0) * float(gammainc(1.0 - alpha, tau * x))


@dataclass(frozen=True)
class _TailInverse:
    """Table (log N, log x) pour inverser la queue de la mesure de Lévy."""

    log_tail: np.ndarray
    log_x: np.ndarray

    def jumps(self, arrivals: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_arrivals = np.log(arrivals)
        log_jumps = np.interp(log_arrivals, self.log_tail, self.log_x)
        return np.exp(log_jumps)


def _build_tail_inverse(spec: CrmSpec, mass: float, max_arrival: float) -> _TailInverse:
    """Grille en log x couvrant N(x) ∈ [~0, max_arrival]."""
    log_hi = -1e-9 if spec.family is CrmFamily.STABLE_BETA else 1.0
    if spec.family is not CrmFamily.STABLE_BETA:
        while _tail_mass(spec, mass, np.array([log_hi]))[0] > 1e-12 and log_hi < 700.0:
            log_hi = min(log_hi * 2.0, 700.0) if log_hi > 1.0 else log_hi + 2.0
    log_lo = -10.0
    while _tail_mass(spec, mass, np.array([log_lo]))[0] < max_arrival and log_lo > -1e7:
        log_lo *= 2.0

    # grille fine près des grands sauts, géométrique dans la queue
    log_x = np.linspace(log_hi, max(log_lo, -50.0), 3000)
    if log_lo < -50.0:
        log_x = np.concatenate([log_x, -np.geomspace(50.0, -log_lo, 2000)[1:]])
    tail = _tail_mass(spec, mass, log_x)
    keep = tail > 0
    log_tail = np.log(tail[keep])
    order = np.argsort(log_tail)
    return _TailInverse(log_tail=log_tail[order], log_x=log_x[keep][order])


def _ferguson_klass(
    spec: CrmSpec, mass: float, rng: np.random.Generator, truncation: int, rows: int = 1
) -> np.ndarray:
    """Les `truncation` plus grands sauts de la CRM (décroissants), `rows` tirages."""
    arrivals = np.cumsum(rng.exponential(1.0, size=(rows, truncation)), axis=1)
    inverse = _build_tail_inverse(spec, mass, float(arrivals.max()))
    return inverse.jumps(arrivals)


@track_performance("sample_ibp_poisson_gamma")
def sample_ibp_poisson_gamma(
    theta: float,
    lambda_rate: float,
    spec: CrmSpec,
    n: int,
    truncation: int = 10_000,
    seed: int = 0,
) -> IbpDraw:
    """Tire un IBP généralisé tronqué à ses `truncation` plus grands sauts.

    Niveaux de Poisson(λ J_k) par point et par atome (CRM Gamma ou
    GeneralizedGamma), ou de Bernoulli(J_k) pour une CRM à sauts dans (0, 1).
    Le niveau total d'un atome est tiré puis réparti uniformément entre les
    n points, ce qui reproduit exactement la loi des marques indépendantes.

    Args:
        theta: Masse θ
        lambda_rate: Taux λ (ignoré pour les niveaux de Bernoulli)
        spec: CRM
        n: Nombre de points ≥ 1
        truncation: Nombre de sauts conservés (≥ 100)
        seed: Graine

    Returns:
        IbpDraw (niveaux par point, sauts, masse tronquée espérée)
    """
    if truncation < MIN_TRUNCATION:
        raise InvalidConfigurationError(
            f"Troncature trop faible : {truncation} (minimum : {MIN_TRUNCATION})"
        )
    if n < 1 or theta <= 0 or lambda_rate < 0:
        raise InvalidConfigurationError(
            f"Paramètres IBP invalides : n={n}, θ={theta}, λ={lambda_rate}"
        )
    rng = make_rng(seed)
    jumps = _ferguson_klass(spec, theta, rng, truncation)[0]

    truncated = _truncated_mass(spec, theta, float(jumps[-1]))
    if truncated > TRUNCATION_WARN:
        logger.warning(
            f"Troncature insuffisante : masse écartée {truncated:.2e} > {TRUNCATION_WARN:.0e} "
            f"(augmentez la troncature au-delà de {truncation})"
        )

    levels: List[Dict[int, int]] = [{} for _ in range(n)]
    if spec.jumps_in_unit_interval:
        totals = rng.binomial(n, np.clip(jumps, 0.0, 1.0))
        for atom in np.flatnonzero(totals):
            for point in rng.choice(n, size=int(totals[atom]), replace=False):
                levels[int(point)][int(atom)] = 1
    else:
        totals = rng.poisson(n * lambda_rate * jumps)
        for atom in np.flatnonzero(totals):
            owners = np.bincount(rng.integers(0, n, size=int(totals[atom])), minlength=n)
            for point in np.flatnonzero(owners):
                levels[int(point)][int(atom)] = int(owners[point])

    logger.debug(f"IBP : {int(np.count_nonzero(totals))} atomes affichés sur {truncation}")
    return IbpDraw(levels=levels, jumps=jumps, truncated_mass=truncated)


def sketch_trait_draw(draw: IbpDraw, J: int, seed: int) -> Tuple[Sketch, np.ndarray]:
    """Sketch d'un tirage IBP: chaque atome est placé dans un bucket uniforme.

    Returns:
        (Sketch des niveaux cumulés par bucket, bucket de chaque atome)
    """
    validate_width(J)
    buckets = make_rng(seed).integers(0, J, size=draw.jumps.shape[0])
    counts = np.bincount(buckets, weights=draw.atom_totals(), minlength=J).astype(np.int64)
    return Sketch.from_counts(counts, hash_seed=seed), buckets


@track_performance("trait_conditional_oracle")
def trait_conditional_oracle(
    c: int,
    b: int,
    a: int,
    n: int,
    theta: float,
    J: int,
    spec: CrmSpec,
    lambda_rate: float = 1.0,
    draws: int = 200_000,
    seed: int = 0,
    truncation: int = 60,
    chunk_size: int = 20_000,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Loi conditionnelle simulée du niveau cumulé f d'un trait dans la cellule (c, b, a).

    Un seul bucket est simulé: sa CRM a la masse θ/J. Pour chaque tirage,
    les marques des n points et du nouveau point sont tirées par atome; dans
    les tirages où (C, B) = (c, b), chaque atome de niveau a chez le nouveau
    point contribue son niveau cumulé S_k à l'histogramme.

    Returns:
        (probabilités l = 0..c, erreurs standard, nombre d'observations retenues)

    Raises:
        InvalidConfigurationError: Si aucune observation ne tombe dans la cellule
    """
    validate_trait_query(c, b, a, n)
    validate_width(J)
    vartheta = theta / J
    bernoulli = spec.jumps_in_unit_interval
    histogram = np.zeros(c + 1, dtype=np.int64)

    n_chunks = (draws + chunk_size - 1) // chunk_size
    for chunk in range(n_chunks):
        rows = min(chunk_size, draws - chunk * chunk_size)
        rng = make_rng(seed, chunk)
        jumps = _ferguson_klass(spec, vartheta, rng, truncation, rows)
        # colonnes de sauts négligeables
        active = np.flatnonzero(jumps.max(axis=0) > 1e-15)
        jumps = jumps[:, : (int(active[-1]) + 1 if active.size else 1)]
        if bernoulli:
            probs = np.clip(jumps, 0.0, 1.0)
            cumulative = rng.binomial(n, probs)
            query = rng.binomial(1, probs)
        else:
            cumulative = rng.poisson(n * lambda_rate * jumps)
            query = rng.poisson(lambda_rate * jumps)
        in_cell = (cumulative.sum(axis=1) == c) & (query.sum(axis=1) == b)
        selected = cumulative[in_cell][query[in_cell] == a]
        histogram += np.bincount(selected, minlength=c + 1)[: c + 1]

    total = int(histogram.sum())
    if total == 0:
        raise InvalidConfigurationError(
            f"Cellule (c={c}, b={b}, a={a}) jamais observée en {draws} tirages"
        )
    probs = histogram / total
    stderr = np.sqrt(probs * (1.0 - probs) / total)
    logger.debug(f"Oracle de traits : {total} observations dans la cellule")
    return probs, stderr, total


# ============================================================================
# ORACLE PAR ÉNUMÉRATION DES PARTITIONS
# ============================================================================


def _restricted_growth_strings(size: int) -> Iterator[List[int]]:
    """Partitions de [size] codées par chaînes à croissance restreinte (itératif)."""
    stack: List[List[int]] = [[0]]
    while stack:
        prefix = stack.pop()
        if len(prefix) == size:
            yield prefix
            continue
        for label in range(max(prefix) + 1, -1, -1):
            stack.append(prefix + [label])


def _log_eppf(block_sizes: List[int], params: SeatingParams) -> float:
    """log de la probabilité d'une partition (EPPF du DP ou du PYP)."""
    total = sum(block_sizes)
    blocks = len(block_sizes)
    alpha, gamma = _seating_parameters(params)
    if alpha == 0.0:
        return (
            blocks * math.log(gamma)
            + sum(float(gammaln(size)) for size in block_sizes)
            - float(gammaln(gamma + total) - gammaln(gamma))
        )
    value = sum(math.log(gamma + i * alpha) for i in range(1, blocks))
    value += sum(float(gammaln(size - alpha) - gammaln(1.0 - alpha)) for size in block_sizes)
    value -= float(gammaln(gamma + total) - gammaln(gamma + 1.0))
    return value


@track_performance("partition_oracle")
def partition_oracle(n: int, J: int, params: SeatingParams) -> PartitionOracleResult:
    """Loi jointe exacte de (C_J, h(X_{n+1}), f_{X_{n+1}}) par énumération.

    Chaque partition de [n+1] est pondérée par l'EPPF du prior; chaque bloc
    est placé indépendamment et uniformément dans un des J buckets (hachage
    idéalisé). f est la taille du bloc du dernier élément moins un.

    Args:
        n: Taille de l'échantillon résumé (≤ 7)
        J: Nombre de buckets (≤ 3)
        params: DpParams ou PypParams

    Returns:
        PartitionOracleResult (table jointe et E[M_{l,n} 1{C = c}])

    Raises:
        TractabilityError: Si n > 7 ou J > 3
    """
    if n < 1 or n > ORACLE_MAX_N or J > ORACLE_MAX_J:
        raise TractabilityError(
            f"Oracle d'énumération limité à 1 ≤ n ≤ {ORACLE_MAX_N} et J ≤ {ORACLE_MAX_J} "
            f"(reçu n = {n}, J = {J}) : utilisez les échantillonneurs"
        )
    validate_width(J)
    size = n + 1
    joint: Dict[Tuple[CountsKey, int, int], float] = {}
    m_table: Dict[CountsKey, np.ndarray] = {}
    log_J = math.log(J)

    for labels in _restricted_growth_strings(size):
        blocks = max(labels) + 1
        block_sizes = [0] * blocks
        for label in labels:
            block_sizes[label] += 1
        weight = math.exp(_log_eppf(block_sizes, params) - blocks * log_J)

        query_block = labels[-1]
        f = block_sizes[query_block] - 1
        observed = list(block_sizes)
        observed[query_block] -= 1
        m_counts = np.bincount([s for s in observed if s > 0], minlength=n + 1)[1 : n + 1]

        for assignment in itertools.product(range(J), repeat=blocks):
            counts = [0] * J
            for block, bucket in enumerate(assignment):
                counts[bucket] += observed[block]
            key = tuple(counts)
            cell = (key, assignment[query_block], f)
            joint[cell] = joint.get(cell, 0.0) + weight
            if key not in m_table:
                m_table[key] = np.zeros(n)
            m_table[key] += weight * m_counts

    total = sum(joint.values())
    logger.debug(f"Oracle (n={n}, J={J}) : masse totale {total:.15f}")
    return PartitionOracleResult(joint_table=joint, n=n, J=J, params=params, m_table=m_table)
