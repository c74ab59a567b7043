"""Module de télémétrie: durée des calculs coûteux et métriques numériques.

Usage:
    from src.telemetry import track_performance

    @track_performance("pyp_freq_posterior_mc")
    def pyp_freq_posterior_mc(sketch, j, params, iters, seed):
        ...

Functions:
    track_performance: Décorateur mesurant durée et statut d'un calcul (J, n du sketch)
    log_metric: Log une métrique (défaut de normalisation, erreur MC, MAE…)
    configure_json_logging: Active le format JSON (python-json-logger)
"""

import functools
import logging
import time
from typing import Any, Callable, Dict, Optional, Tuple, TypeVar, cast

from src.models import Sketch

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


def _sketch_context(args: Tuple[Any, ...], kwargs: Dict[str, Any]) -> Dict[str, int]:
    """Dimensions (J, n) du premier sketch passé au calcul, vide sinon."""
    for value in (*args, *kwargs.values()):
        if isinstance(value, Sketch):
            return {"sketch_J": value.width_J, "sketch_n": value.total_n}
    return {}


def track_performance(operation_name: str) -> Callable[[F], F]:
    """Décorateur de suivi d'un calcul a posteriori, d'ajustement ou de simulation.

    Mesure la durée et journalise le statut au niveau DEBUG en cas de succès,
    ERROR en cas d'échec (l'exception est relancée). Si un argument est un
    Sketch, ses dimensions J et n sont ajoutées au contexte et au message.

    Args:
        operation_name: Nom du calcul (ex: "pyp_freq_posterior_exact")

    Returns:
        Décorateur préservant la signature de la fonction

    Example:
        >>> @track_performance("fit_dp_theta")
        ... def fit(sketch):
        ...     return 1.0
    """

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            start_time = time.perf_counter()
            context: Dict[str, Any] = {
                "operation": operation_name,
                "function": func.__name__,
            }
            sizes = _sketch_context(args, kwargs)
            context.update(sizes)
            scope = f" (J={sizes['sketch_J']}, n={sizes['sketch_n']})" if sizes else ""

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                elapsed = time.perf_counter() - start_time
                context["duration_seconds"] = round(elapsed, 4)
                context["status"] = "error"
                context["error_type"] = type(e).__name__
                logger.error(
                    f"Calcul {operation_name}{scope} interrompu après {elapsed:.3f}s : "
                    f"{type(e).__name__}: {e}",
                    extra=context,
                )
                raise

            elapsed = time.perf_counter() - start_time
            context["duration_seconds"] = round(elapsed, 4)
            context["status"] = "success"
            logger.debug(f"Calcul {operation_name}{scope} : {elapsed:.3f}s", extra=context)
            return result

        return cast(F, wrapper)

    return decorator


def log_metric(
    metric_name: str, value: float, unit: str = "", tags: Optional[Dict[str, str]] = None
) -> None:
    """Log une métrique numérique.

    Example:
        >>> log_metric("mc_max_stderr", 0.004, tags={"bucket": "3"})
    """
    context = {
        "metric_name": metric_name,
        "value": value,
        "unit": unit,
        "tags": tags or {},
    }
    logger.info(f"Metric: {metric_name}={value}{unit}", extra=context)


def configure_json_logging(level: int = logging.INFO) -> bool:
    """Configure le logger racine au format JSON.

    Args:
        level: Niveau du logger racine

    Returns:
        True si python-json-logger est disponible, False sinon (format texte conservé)
    """
    try:
        from pythonjsonlogger import jsonlogger
    except ImportError:
        logger.warning(
            "python-json-logger non installé : pip install python-json-logger "
            "(format texte conservé)"
        )
        return False

    handler = logging.StreamHandler()
    handler.setFormatter(jsonlogger.JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    root_logger = logging.getLogger()
    root_logger.handlers = [handler]
    root_logger.setLevel(level)
    logger.debug("Logging JSON configuré")
    return True
