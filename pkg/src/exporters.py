"""Export et chargement des artefacts vers fichiers JSON et CSV.

Ce module sérialise les sketches, les lois a posteriori, les estimations de
cardinalité, les ajustements et les rapports d'évaluation dans des formats
standard exploitables par des outils externes (tracés, tableurs).

Functions:
    write_sketch / load_sketch: Sketch ↔ JSON
    pmf_to_dict: PosteriorPmf (+ résumés) → dictionnaire JSON
    cardinality_to_dict: CardinalityEstimate → dictionnaire JSON
    fit_to_dict: FitReport → dictionnaire JSON
    write_json: Écriture d'un document JSON quelconque
    export_eval_reports: Rapports d'évaluation → CSV et JSON
    write_token_file: Jetons → fichier texte (un par ligne)
    write_truth_csv: Table de fréquences vraies → CSV
    write_dump_csv: Export par symbole de l'évaluation → CSV
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd

from src.models import (
    CardinalityEstimate,
    DpParams,
    EvalReport,
    FitReport,
    IbpPoissonParams,
    PmfSummary,
    PosteriorPmf,
    PypParams,
    Sketch,
)
from src.validation import InvalidConfigurationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SKETCH_FORMAT = "sketch-posterior/sketch-v1"


def _prepare_output(filepath: PathLike) -> Path:
    output_path = Path(filepath)
    if output_path.exists():
        logger.warning(f"Fichier existant écrasé : {filepath}")
    return output_path


def _finite_or_none(value: float) -> Optional[float]:
    """NaN et infinis → null (JSON strict)."""
    return float(value) if math.isfinite(value) else None


def write_json(data: Dict[str, Any], filepath: PathLike) -> None:
    """Écrit un document JSON indenté (UTF-8, clés dans l'ordre d'insertion).

    Raises:
        IOError: Si impossible d'écrire le fichier
    """
    output_path = _prepare_output(filepath)
    try:
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, ensure_ascii=False, allow_nan=False)
            f.write("\n")
        logger.info(f"Export JSON réussi : {filepath}")
    except IOError as e:
        logger.error(f"Erreur export JSON : {e}")
        raise


# ============================================================================
# SKETCH
# ============================================================================


def sketch_to_dict(sketch: Sketch) -> Dict[str, Any]:
    return {
        "format": SKETCH_FORMAT,
        "width_J": sketch.width_J,
        "total_n": sketch.total_n,
        "hash_seed": sketch.hash_seed,
        "counts": [int(c) for c in sketch.counts],
    }


def write_sketch(sketch: Sketch, filepath: PathLike) -> None:
    """Sauvegarde un sketch en JSON.

    Format:
        {"format": "sketch-posterior/sketch-v1", "width_J": J, "total_n": n,
         "hash_seed": graine, "counts": [c_1, …, c_J]}

    Le fichier ne dépend que du sketch: deux exécutions identiques
    produisent des fichiers identiques octet par octet.
    """
    write_json(sketch_to_dict(sketch), filepath)


def load_sketch(filepath: PathLike) -> Sketch:
    """Charge un sketch écrit par write_sketch.

    Raises:
        IOError: Si le fichier est illisible
        InvalidConfigurationError: Si le contenu est incohérent
    """
    try:
        with open(Path(filepath), encoding="utf-8") as f:
            data = json.load(f)
    except IOError as e:
        logger.error(f"Erreur lecture sketch : {e}")
        raise
    except json.JSONDecodeError as e:
        raise InvalidConfigurationError(f"Sketch illisible ({filepath}) : {e}") from e

    if data.get("format") != SKETCH_FORMAT:
        raise InvalidConfigurationError(f"Format de sketch inconnu : {data.get('format')!r}")
    try:
        return Sketch(
            counts=data["counts"],
            total_n=int(data["total_n"]),
            width_J=int(data["width_J"]),
            hash_seed=int(data["hash_seed"]),
        )
    except KeyError as e:
        raise InvalidConfigurationError(f"Champ manquant dans le sketch : {e}") from e


# ============================================================================
# RÉSULTATS D'ESTIMATION
# ============================================================================


def _params_to_dict(params: Union[DpParams, PypParams, IbpPoissonParams]) -> Dict[str, Any]:
    if isinstance(params, DpParams):
        return {"prior": "dp", "theta": params.theta}
    if isinstance(params, PypParams):
        return {"prior": "pyp", "alpha": params.alpha, "gamma": params.gamma}
    return {
        "prior": "ibp",
        "theta": params.theta,
        "lambda_rate": params.lambda_rate,
        "crm": params.crm.family.value,
    }


def pmf_to_dict(pmf: PosteriorPmf, summary: Optional[PmfSummary] = None) -> Dict[str, Any]:
    """Sérialise une loi a posteriori.

    Format:
        {"support_max": c, "probs": [...], "stderr": [...] | null,
         "method": "DP-exact", "summaries": {"mean", "median", "mode",
         "credible_interval", "ci_level"} | null}

    Example:
        >>> pmf_to_dict(dp_freq_posterior(1, DpParams(1.0), 1))["probs"]
        [0.5, 0.5]
    """
    data: Dict[str, Any] = {
        "support_max": pmf.support_max,
        "probs": [float(p) for p in pmf.probs],
        "stderr": None if pmf.stderr is None else [float(s) for s in pmf.stderr],
        "method": pmf.method.value,
        "summaries": None,
    }
    if summary is not None:
        data["summaries"] = {
            "mean": summary.mean,
            "median": summary.median,
            "mode": summary.mode,
            "credible_interval": list(summary.credible_interval),
            "ci_level": summary.ci_level,
        }
    return data


def cardinality_to_dict(estimate: CardinalityEstimate) -> Dict[str, Any]:
    """Sérialise une estimation de cardinalité; m_hat est indexé par "l"."""
    return {
        "k_hat": estimate.k_hat,
        "m_hat": {str(l): float(m) for l, m in enumerate(estimate.m_hat, start=1)},
        "L_max": estimate.L_max,
        "method": estimate.method.value,
        "params": dict(estimate.params),
        "k_hat_closed_form": estimate.k_hat_closed_form,
    }


def fit_to_dict(report: FitReport) -> Dict[str, Any]:
    """Sérialise un ajustement, trace d'objectif comprise."""
    return {
        "params_hat": _params_to_dict(report.params_hat),
        "converged": report.converged,
        "at_boundary": report.at_boundary,
        "n_prefix": report.n_prefix,
        "objective_trace": [
            {"params": [float(p) for p in point], "objective": _finite_or_none(value)}
            for point, value in report.objective_trace
        ],
    }


# ============================================================================
# RAPPORTS D'ÉVALUATION
# ============================================================================


def eval_reports_frame(reports: List[EvalReport]) -> pd.DataFrame:
    """Une ligne par (méthode, J, intervalle)."""
    rows = [
        {
            "method": report.method,
            "J": report.J,
            "bin_lower": low,
            "bin_upper": high,
            "mae": mae,
            "count": count,
            "n_seeds": len(report.seeds),
        }
        for report in reports
        for (low, high), mae, count in zip(report.bins, report.mae_per_bin, report.counts_per_bin)
    ]
    return pd.DataFrame(
        rows, columns=["method", "J", "bin_lower", "bin_upper", "mae", "count", "n_seeds"]
    )


def export_eval_reports(
    reports: List[EvalReport], csv_path: Optional[PathLike], json_path: Optional[PathLike]
) -> None:
    """Écrit les rapports en CSV (tableau long) et/ou JSON (un objet par rapport).

    Raises:
        IOError: Si impossible d'écrire un fichier
    """
    if csv_path is not None:
        output_path = _prepare_output(csv_path)
        try:
            eval_reports_frame(reports).to_csv(output_path, index=False)
            logger.info(f"Export CSV réussi : {csv_path} ({len(reports)} rapport(s))")
        except IOError as e:
            logger.error(f"Erreur export CSV : {e}")
            raise
    if json_path is not None:
        write_json(
            {
                "reports": [
                    {
                        "method": report.method,
                        "J": report.J,
                        "seeds": report.seeds,
                        "bins": [list(b) for b in report.bins],
                        "mae_per_bin": [_finite_or_none(v) for v in report.mae_per_bin],
                        "counts_per_bin": report.counts_per_bin,
                    }
                    for report in reports
                ]
            },
            json_path,
        )


# ============================================================================
# CORPUS ET VÉRITÉ TERRAIN
# ============================================================================


def write_token_file(tokens: Iterable[Union[str, int]], filepath: PathLike) -> int:
    """Écrit un jeton par ligne (UTF-8).

    Returns:
        Nombre de jetons écrits
    """
    output_path = _prepare_output(filepath)
    written = 0
    try:
        with open(output_path, "w", encoding="utf-8") as f:
            for token in tokens:
                f.write(f"{token}\n")
                written += 1
        logger.info(f"Corpus écrit : {filepath} ({written} jetons)")
    except IOError as e:
        logger.error(f"Erreur écriture corpus : {e}")
        raise
    return written


def write_truth_csv(truth: pd.Series, filepath: PathLike) -> None:
    """Écrit la table symbol,frequency triée par fréquence décroissante puis symbole."""
    output_path = _prepare_output(filepath)
    frame = pd.DataFrame({"symbol": truth.index.astype(str), "frequency": truth.to_numpy()})
    frame = frame.sort_values(["frequency", "symbol"], ascending=[False, True], kind="mergesort")
    try:
        frame.to_csv(output_path, index=False)
        logger.info(f"Vérité terrain écrite : {filepath} ({len(frame)} symboles)")
    except IOError as e:
        logger.error(f"Erreur export CSV : {e}")
        raise


def write_dump_csv(dump: pd.DataFrame, filepath: PathLike) -> None:
    """Écrit l'export par symbole d'une évaluation."""
    output_path = _prepare_output(filepath)
    try:
        dump.to_csv(output_path, index=False)
        logger.info(f"Export par symbole écrit : {filepath} ({len(dump)} lignes)")
    except IOError as e:
        logger.error(f"Erreur export CSV : {e}")
        raise
