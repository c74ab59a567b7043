"""Erreur absolue moyenne stratifiée par fréquence vraie.

Les symboles distincts sont répartis en intervalles (l, u] de fréquence vraie
(dyadiques par défaut: (0,1], (1,2], (2,4], …) et la MAE est calculée dans
chaque intervalle, puis moyennée sur les graines de hachage.

Functions:
    dyadic_bins: Intervalles dyadiques couvrant [1, max_freq]
    stratified_mae: MAE et effectifs par intervalle pour une cellule (J, graine)
    reduce_cells: Moyenne sur les graines → EvalReport par (méthode, J)
    recompute_report: Recalcul indépendant depuis l'export par symbole
"""

import logging
import warnings
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.models import EvalReport
from src.validation import InvalidConfigurationError

logger = logging.getLogger(__name__)

Bins = List[Tuple[float, float]]

DUMP_COLUMNS = ["symbol", "method", "J", "seed", "true", "estimate"]


def dyadic_bins(max_freq: float) -> Bins:
    """Intervalles (0,1], (1,2], (2,4], … jusqu'à couvrir max_freq.

    Example:
        >>> dyadic_bins(5)
        [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0), (4.0, 8.0)]
    """
    if max_freq < 1:
        raise InvalidConfigurationError(f"Fréquence maximale invalide : {max_freq}")
    bins: Bins = [(0.0, 1.0)]
    while bins[-1][1] < max_freq:
        upper = bins[-1][1]
        bins.append((upper, 2.0 * upper))
    return bins


def _interval_index(bins: Bins) -> pd.IntervalIndex:
    if not bins:
        raise InvalidConfigurationError("Liste d'intervalles vide")
    for (low, high), (next_low, _) in zip(bins, bins[1:]):
        if not (low < high <= next_low):
            raise InvalidConfigurationError(f"Intervalles non ordonnés : ({low}, {high}]")
    return pd.IntervalIndex.from_tuples(bins, closed="right")


def stratified_mae(
    true_freqs: Sequence[float], estimates: Sequence[float], bins: Bins
) -> Tuple[List[float], List[int]]:
    """MAE par intervalle de fréquence vraie.

    Les symboles hors de tous les intervalles sont ignorés; un intervalle
    vide a une MAE NaN.

    Returns:
        (MAE par intervalle, nombre de symboles par intervalle)

    Example:
        >>> stratified_mae([1, 2, 3], [1.5, 2.0, 1.0], [(0, 1), (1, 2), (2, 4)])
        ([0.5, 0.0, 2.0], [1, 1, 1])
    """
    frame = pd.DataFrame(
        {
            "true": np.asarray(true_freqs, dtype=float),
            "estimate": np.asarray(estimates, dtype=float),
        }
    )
    if frame.empty:
        raise InvalidConfigurationError("Aucun symbole à évaluer")
    intervals = _interval_index(bins)
    frame["bin"] = pd.cut(frame["true"], intervals)
    frame["error"] = (frame["true"] - frame["estimate"]).abs()
    grouped = frame.groupby("bin", observed=False)["error"]
    # catégories observed=False: un groupe par intervalle, dans l'ordre
    mae = grouped.mean()
    counts = grouped.size()
    return [float(v) for v in mae.to_numpy()], [int(v) for v in counts.to_numpy()]


def reduce_cells(dump: pd.DataFrame, bins: Bins) -> List[EvalReport]:
    """Un EvalReport par (méthode, J): MAE par intervalle moyennée sur les graines.

    L'ordre de sortie est fixé par (méthode, J) et ne dépend pas de l'ordre
    des cellules dans l'export.
    """
    missing = set(DUMP_COLUMNS) - set(dump.columns)
    if missing:
        raise InvalidConfigurationError(f"Colonnes manquantes dans l'export : {sorted(missing)}")

    reports: List[EvalReport] = []
    for (method, width), group in dump.groupby(["method", "J"], sort=True):
        per_seed: List[List[float]] = []
        counts: List[int] = []
        seeds = sorted(int(s) for s in group["seed"].unique())
        for seed in seeds:
            cell = group[group["seed"] == seed]
            mae, counts = stratified_mae(cell["true"], cell["estimate"], bins)
            per_seed.append(mae)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=RuntimeWarning)
            averaged = np.nanmean(np.array(per_seed), axis=0)
        reports.append(
            EvalReport(
                bins=list(bins),
                mae_per_bin=[float(v) for v in averaged],
                counts_per_bin=counts,
                method=str(method),
                J=int(width),
                seeds=seeds,
            )
        )
    return reports


def recompute_report(dump: pd.DataFrame, bins: Bins) -> List[EvalReport]:
    """Recalcul de référence des rapports à partir de l'export par symbole.

    Boucle explicite sur les symboles, sans pandas.cut, pour servir de
    contrôle indépendant de reduce_cells.
    """
    reports: List[EvalReport] = []
    keys = sorted({(str(m), int(j)) for m, j in zip(dump["method"], dump["J"])})
    for method, width in keys:
        rows = dump[(dump["method"] == method) & (dump["J"] == width)]
        seeds = sorted({int(s) for s in rows["seed"]})
        sums = np.zeros((len(seeds), len(bins)))
        sizes = np.zeros((len(seeds), len(bins)), dtype=np.int64)
        for true, estimate, seed in zip(rows["true"], rows["estimate"], rows["seed"]):
            for b, (low, high) in enumerate(bins):
                if low < true <= high:
                    s = seeds.index(int(seed))
                    sums[s, b] += abs(float(true) - float(estimate))
                    sizes[s, b] += 1
                    break
        with np.errstate(invalid="ignore", divide="ignore"):
            per_seed = sums / sizes
        averaged = [
            float(np.mean(column[~np.isnan(column)])) if np.any(~np.isnan(column)) else float("nan")
            for column in per_seed.T
        ]
        reports.append(
            EvalReport(
                bins=list(bins),
                mae_per_bin=averaged,
                counts_per_bin=[int(v) for v in sizes[0]],
                method=method,
                J=width,
                seeds=seeds,
            )
        )
    logger.debug(f"Recalcul de référence : {len(reports)} rapport(s)")
    return reports
