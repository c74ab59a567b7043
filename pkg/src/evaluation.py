"""Pipeline d'évaluation: MAE stratifiée de la récupération de fréquence.

Pour chaque cellule (J, graine): hachage du corpus, sketch, ajustement
éventuel du prior, estimation de la fréquence de chaque symbole distinct via
son bucket, puis réduction sur les graines (metrics.reduce_cells).

Classes:
    EvaluationSettings: Paramètres d'une évaluation

Functions:
    truth_table: Fréquences vraies d'un corpus
    evaluate_cell: Estimations par symbole pour une cellule (J, graine)
    evaluate_corpus: Évaluation complète → (rapports, export par symbole)
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.fitting import fit_dp_theta, fit_pyp_prefix
from src.hashing import Token, hash_key, new_hash, sketch_stream
from src.metrics import DUMP_COLUMNS, Bins, dyadic_bins, reduce_cells
from src.models import DpParams, EvalReport, PypParams
from src.species import dp_posterior_mean, pyp_mean_asymptotic
from src.telemetry import log_metric, track_performance
from src.validation import InvalidConfigurationError, TractabilityError, validate_width

logger = logging.getLogger(__name__)

ESTIMATORS = ("dp", "pyp-asymptotic", "cms")
DEFAULT_MAX_TOKENS = 10_000_000
DEFAULT_PREFIX = 10_000


@dataclass(frozen=True)
class EvaluationSettings:
    """Paramètres d'une évaluation.

    Attributes:
        widths: Largeurs J évaluées
        seeds: Graines de hachage
        methods: Estimateurs parmi "dp", "pyp-asymptotic", "cms"
        dp_params: θ fixé (None → ajusté sur chaque sketch)
        pyp_params: (α, γ) fixés (None → ajustés sur un préfixe)
        prefix_length: Longueur du préfixe pour l'ajustement PYP
        bins: Intervalles de fréquence (None → dyadiques)
        max_tokens: Garde-fou sur la taille du corpus
    """

    widths: Sequence[int]
    seeds: Sequence[int]
    methods: Sequence[str] = ("dp",)
    dp_params: Optional[DpParams] = None
    pyp_params: Optional[PypParams] = None
    prefix_length: int = DEFAULT_PREFIX
    bins: Optional[Bins] = None
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not self.widths or not self.seeds:
            raise InvalidConfigurationError("Au moins une largeur et une graine requises")
        for width in self.widths:
            validate_width(width)
        unknown = [m for m in self.methods if m not in ESTIMATORS]
        if unknown or not self.methods:
            raise InvalidConfigurationError(
                f"Estimateur(s) inconnu(s) : {unknown} (choix : {', '.join(ESTIMATORS)})"
            )


def _display(symbol: Token) -> str:
    return symbol.decode("utf-8", "replace") if isinstance(symbol, bytes) else symbol


def truth_table(tokens: Sequence[Token]) -> pd.Series:
    """Fréquences vraies, indexées par symbole (ordre de première apparition)."""
    return pd.Series(list(tokens), dtype=object).value_counts(sort=False)


@track_performance("evaluate_cell")
def evaluate_cell(
    tokens: Sequence[Token], truth: pd.Series, J: int, seed: int, settings: EvaluationSettings
) -> pd.DataFrame:
    """Estimations par symbole distinct pour une cellule (J, graine).

    Returns:
        DataFrame aux colonnes symbol, method, J, seed, true, estimate
    """
    h = new_hash(seed, J)
    sketch = sketch_stream(tokens, h)
    buckets = np.array([hash_key(h, symbol) for symbol in truth.index], dtype=np.int64)
    bucket_counts = sketch.counts[buckets].astype(float)

    frames = []
    for method in settings.methods:
        if method == "cms":
            estimates = bucket_counts
        elif method == "dp":
            params = settings.dp_params or fit_dp_theta(sketch).params_hat
            assert isinstance(params, DpParams)
            estimates = np.array([dp_posterior_mean(int(c), params, J) for c in bucket_counts])
        else:
            pyp = settings.pyp_params
            if pyp is None:
                prefix = tokens[: settings.prefix_length]
                fitted = fit_pyp_prefix(prefix, h).params_hat
                assert isinstance(fitted, PypParams)
                pyp = fitted
            estimates = bucket_counts * pyp_mean_asymptotic(1, pyp, J)
        frames.append(
            pd.DataFrame(
                {
                    "symbol": [_display(symbol) for symbol in truth.index],
                    "method": method,
                    "J": J,
                    "seed": seed,
                    "true": truth.to_numpy(dtype=float),
                    "estimate": estimates,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)[DUMP_COLUMNS]


@track_performance("evaluate_corpus")
def evaluate_corpus(
    tokens: Sequence[Token], settings: EvaluationSettings
) -> Tuple[List[EvalReport], pd.DataFrame]:
    """Évalue tous les estimateurs sur toutes les cellules (J, graine).

    Args:
        tokens: Corpus complet (tenu en mémoire pour le comptage exact)
        settings: Paramètres de l'évaluation

    Returns:
        (rapports ordonnés par (méthode, J), export par symbole)

    Raises:
        TractabilityError: Si le corpus dépasse max_tokens
        InvalidConfigurationError: Si le corpus est vide
    """
    if len(tokens) > settings.max_tokens:
        raise TractabilityError(
            f"Corpus de {len(tokens)} jetons > {settings.max_tokens} : "
            "comptage exact trop coûteux, "
            "sous-échantillonnez le corpus ou relevez --max-tokens"
        )
    if not tokens:
        raise InvalidConfigurationError("Corpus vide : rien à évaluer")

    truth = truth_table(tokens)
    bins = settings.bins or dyadic_bins(float(truth.max()))
    logger.info(
        f"Évaluation : {len(tokens)} jetons, {truth.shape[0]} symboles distincts, "
        f"{len(settings.widths)} largeur(s) × {len(settings.seeds)} graine(s)"
    )

    cells = [
        evaluate_cell(tokens, truth, int(J), int(seed), settings)
        for J in sorted(settings.widths)
        for seed in sorted(settings.seeds)
    ]
    dump = pd.concat(cells, ignore_index=True)
    reports = reduce_cells(dump, bins)
    for report in reports:
        for (low, high), mae in zip(report.bins, report.mae_per_bin):
            log_metric(
                "mae",
                mae,
                tags={"method": report.method, "J": str(report.J), "bin": f"({low:g},{high:g}]"},
            )
    logger.info(f"✓ Évaluation terminée : {len(reports)} rapport(s)")
    return reports, dump
