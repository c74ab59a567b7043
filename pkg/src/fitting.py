"""Estimation des hyperparamètres du prior.

- DP: maximum de vraisemblance marginale (Dirichlet-multinomiale) du sketch
  seul, recherche de Brent sur log θ.
- PYP: minimisation de l'erreur absolue moyenne de l'estimateur asymptotique
  sur un préfixe du flux dont les fréquences vraies sont connues (grille
  grossière puis Nelder–Mead).

Functions:
    dp_log_marginal: log Pr[C_J = c] sous DP(θ)
    fit_dp_theta: θ̂ par maximum de vraisemblance marginale
    prefix_mae: Erreur absolue moyenne entre fréquences vraies et estimées
    fit_pyp_prefix: (α̂, γ̂) par minimisation de l'erreur sur un préfixe
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize
from scipy.special import gammaln

from src.hashing import Token, hash_key, sketch_stream
from src.models import DpParams, FitReport, HashFunction, PypParams, Sketch
from src.specialfns import log_rising
from src.species import pyp_mean_asymptotic
from src.telemetry import log_metric, track_performance
from src.validation import (
    DegenerateEstimateError,
    InsufficientDataError,
    InvalidConfigurationError,
)

logger = logging.getLogger(__name__)

DP_LOG_THETA_BOUNDS = (math.log(1e-3), math.log(1e8))
DP_GRID_POINTS = 45
# Écart de log-vraisemblance en deçà duquel deux valeurs sont confondues
DP_FLAT_TOL = 1e-9

MIN_PREFIX = 100
DEFAULT_ALPHA_GRID: Tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 20))
DEFAULT_LOG_GAMMA_GRID: Tuple[float, ...] = tuple(-2.0 + 0.5 * k for k in range(17))
ALPHA_BOUNDS = (1e-3, 0.999)
LOG_GAMMA_BOUNDS = (-5.0, 10.0)

Trace = List[Tuple[Tuple[float, ...], float]]


# ============================================================================
# DP: VRAISEMBLANCE MARGINALE
# ============================================================================


def dp_log_marginal(sketch: Sketch, theta: float) -> float:
    """log Pr[C_J = c] = log n! − log (θ)_(n) + Σ_j [log (θ/J)_(c_j) − log c_j!].

    Example:
        >>> round(math.exp(dp_log_marginal(Sketch.from_counts([2, 0]), 2.0)), 12)
        0.333333333333
    """
    vartheta = theta / sketch.width_J
    counts = sketch.counts.astype(np.int64)
    return float(
        gammaln(sketch.total_n + 1)
        - log_rising(theta, sketch.total_n)
        + np.sum(np.asarray(log_rising(vartheta, counts)) - gammaln(counts + 1))
    )


def _count_local_maxima(values: np.ndarray, tol: float = DP_FLAT_TOL) -> int:
    steps = np.diff(values)
    rises = np.where(np.abs(steps) > tol, np.sign(steps), 0.0)
    rises = rises[rises != 0]
    return int(np.sum((rises[:-1] > 0) & (rises[1:] < 0)))


@track_performance("fit_dp_theta")
def fit_dp_theta(sketch: Sketch) -> FitReport:
    """Maximum de vraisemblance marginale de θ sous DP.

    Balayage grossier de log θ ∈ [log 1e−3, log 1e8] (contrôle d'unimodalité
    et encadrement), puis recherche de Brent bornée autour du meilleur point.
    Un optimum sur une borne est signalé (at_boundary) et journalisé.

    Args:
        sketch: Sketch observé (n ≥ 1)

    Returns:
        FitReport avec params_hat: DpParams

    Raises:
        DegenerateEstimateError: Si le sketch est vide

    Example:
        >>> report = fit_dp_theta(Sketch.from_counts([1, 1]))
        >>> report.at_boundary
        True
    """
    if sketch.total_n < 1:
        raise DegenerateEstimateError("Sketch vide : θ non identifiable")

    trace: Trace = []
    low, high = DP_LOG_THETA_BOUNDS

    if sketch.width_J == 1:
        # vraisemblance constante en θ
        theta = math.exp(low)
        trace.append(((theta,), -dp_log_marginal(sketch, theta)))
        logger.warning("J = 1 : vraisemblance indépendante de θ, borne inférieure retournée")
        return FitReport(
            params_hat=DpParams(theta), objective_trace=trace, converged=True, at_boundary=True
        )

    grid = np.linspace(low, high, DP_GRID_POINTS)
    values = np.array([dp_log_marginal(sketch, math.exp(x)) for x in grid])
    trace.extend(((math.exp(x),), -v) for x, v in zip(grid, values))

    # plateau atteint sur une borne: le bruit d'arrondi ne doit pas déplacer θ̂
    plateau = values >= values.max() - DP_FLAT_TOL
    edges = [i for i in (grid.shape[0] - 1, 0) if plateau[i]]
    if edges:
        edge = max(edges, key=lambda i: values[i])
        theta_hat = math.exp(grid[edge])
        logger.warning(
            f"θ̂ = {theta_hat:.4g} sur une borne de recherche : sketch peu informatif"
        )
        log_metric("dp_theta_hat", theta_hat)
        return FitReport(
            params_hat=DpParams(theta_hat),
            objective_trace=trace,
            converged=True,
            at_boundary=True,
        )

    if _count_local_maxima(values) > 1:
        logger.warning("Vraisemblance DP multimodale sur la grille : maximum global retenu")

    best = int(np.argmax(values))
    bracket = (grid[max(best - 1, 0)], grid[min(best + 1, grid.shape[0] - 1)])

    def objective(log_theta: float) -> float:
        value = -dp_log_marginal(sketch, math.exp(log_theta))
        trace.append(((math.exp(log_theta),), value))
        return value

    result = optimize.minimize_scalar(
        objective, bounds=bracket, method="bounded", options={"xatol": 1e-9}
    )
    log_theta = float(result.x)
    if -result.fun < values[best]:
        log_theta = float(grid[best])
    theta_hat = math.exp(log_theta)

    at_boundary = min(log_theta - low, high - log_theta) < 1e-3 * (high - low)
    if at_boundary:
        logger.warning(
            f"θ̂ = {theta_hat:.4g} sur une borne de recherche : sketch peu informatif"
        )
    log_metric("dp_theta_hat", theta_hat)
    logger.info(f"✓ Ajustement DP : θ̂ = {theta_hat:.6g}")
    return FitReport(
        params_hat=DpParams(theta_hat),
        objective_trace=trace,
        converged=bool(result.success),
        at_boundary=at_boundary,
    )


# ============================================================================
# PYP: ERREUR SUR UN PRÉFIXE
# ============================================================================


def prefix_mae(true_freqs: Sequence[float], estimates: Sequence[float]) -> float:
    """Erreur absolue moyenne; 0 si les deux suites sont identiques.

    Raises:
        InvalidConfigurationError: Si les longueurs diffèrent ou sont nulles
    """
    truth = np.asarray(true_freqs, dtype=float)
    est = np.asarray(estimates, dtype=float)
    if truth.shape != est.shape or truth.size == 0:
        raise InvalidConfigurationError(
            f"Suites incompatibles : {truth.size} fréquences vraies, {est.size} estimations"
        )
    return float(np.mean(np.abs(truth - est)))


def _prefix_table(tokens: List[Token], h: HashFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Fréquences vraies du préfixe et compteur du bucket de chaque symbole distinct."""
    sketch = sketch_stream(tokens, h)
    freqs = pd.Series(tokens, dtype=object).value_counts(sort=False)
    buckets = np.array([hash_key(h, key) for key in freqs.index], dtype=np.int64)
    return freqs.to_numpy(dtype=float), sketch.counts[buckets].astype(float)


@track_performance("fit_pyp_prefix")
def fit_pyp_prefix(
    tokens_prefix: Iterable[Token],
    h: HashFunction,
    J: Optional[int] = None,
    grid: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
) -> FitReport:
    """Ajuste (α, γ) en minimisant l'erreur de l'estimateur asymptotique sur un préfixe.

    L'objectif est la moyenne sur les symboles distincts du préfixe de
    |f_s − c_{h(s)} · (γ/α)(1−α)/(γ + Jα − α + 1)|. Grille (α, log γ)
    d'abord, égalités départagées par le plus petit point dans l'ordre
    lexicographique, puis Nelder–Mead borné; le raffinement n'est retenu
    que s'il améliore l'objectif.

    Args:
        tokens_prefix: Les n′ premiers jetons du flux (n′ ≥ 100)
        h: Fonction de hachage du sketch
        J: Largeur (doit valoir h.width_J si fournie)
        grid: (valeurs de α, valeurs de log γ); grille par défaut sinon

    Returns:
        FitReport avec params_hat: PypParams et n_prefix

    Raises:
        InsufficientDataError: Si n′ < 100 ou moins de 2 symboles distincts
    """
    if J is not None and J != h.width_J:
        raise InvalidConfigurationError(
            f"J = {J} incohérent avec la fonction de hachage (J = {h.width_J})"
        )
    tokens = list(tokens_prefix)
    if len(tokens) < MIN_PREFIX:
        raise InsufficientDataError(
            f"Préfixe trop court : n′ = {len(tokens)} (minimum : {MIN_PREFIX})"
        )
    truth, bucket_counts = _prefix_table(tokens, h)
    if truth.shape[0] < 2:
        raise InsufficientDataError("Préfixe dégénéré : moins de 2 symboles distincts")
    width = h.width_J

    trace: Trace = []

    def objective(alpha: float, log_gamma: float) -> float:
        params = PypParams(alpha, math.exp(log_gamma))
        scale = pyp_mean_asymptotic(1, params, width)
        value = prefix_mae(truth, bucket_counts * scale)
        trace.append(((alpha, math.exp(log_gamma)), value))
        return value

    alphas, log_gammas = grid if grid is not None else (DEFAULT_ALPHA_GRID, DEFAULT_LOG_GAMMA_GRID)
    best_point: Optional[Tuple[float, float]] = None
    best_value = math.inf
    for alpha, log_gamma in sorted((float(a), float(g)) for a in alphas for g in log_gammas):
        value = objective(alpha, log_gamma)
        if value < best_value:
            best_point, best_value = (alpha, log_gamma), value
    if best_point is None:
        raise InvalidConfigurationError("Grille d'ajustement vide")
    logger.debug(f"Meilleur point de grille : α = {best_point[0]}, log γ = {best_point[1]}")

    def refine_objective(x: np.ndarray) -> float:
        alpha = float(np.clip(x[0], *ALPHA_BOUNDS))
        log_gamma = float(np.clip(x[1], *LOG_GAMMA_BOUNDS))
        return objective(alpha, log_gamma)

    result = optimize.minimize(
        refine_objective,
        x0=np.array(best_point),
        method="Nelder-Mead",
        bounds=[ALPHA_BOUNDS, LOG_GAMMA_BOUNDS],
        options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 2000},
    )
    alpha_hat, log_gamma_hat = best_point
    if float(result.fun) < best_value:
        alpha_hat = float(np.clip(result.x[0], *ALPHA_BOUNDS))
        log_gamma_hat = float(np.clip(result.x[1], *LOG_GAMMA_BOUNDS))
        best_value = float(result.fun)

    params_hat = PypParams(alpha_hat, math.exp(log_gamma_hat))
    log_metric("pyp_prefix_mae", best_value)
    logger.info(
        f"✓ Ajustement PYP sur {len(tokens)} jetons : α̂ = {params_hat.alpha:.4f}, "
        f"γ̂ = {params_hat.gamma:.4g} (MAE {best_value:.4f})"
    )
    return FitReport(
        params_hat=params_hat,
        objective_trace=trace,
        converged=bool(result.success),
        n_prefix=len(tokens),
    )
