"""Fichier de configuration et résolution des valeurs par défaut de la CLI.

Priorité: options de la ligne de commande > fichier --config >
variable d'environnement SKETCHPOST_SEED (graine uniquement) > défauts.

Format du fichier (une clé par ligne, clés = destinations argparse):

    # commun à toutes les sous-commandes
    seed = 7

    [evaluate]
    widths = 128, 512, 2048
    methods = dp, cms

Functions:
    load_config: Lit un fichier de configuration → {section: {clé: valeur}}
    env_seed: Graine issue de SKETCHPOST_SEED
    apply_defaults: Injecte environnement et fichier dans un sous-parser
"""

import argparse
import configparser
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from src.validation import InvalidConfigurationError

logger = logging.getLogger(__name__)

ENV_SEED = "SKETCHPOST_SEED"
GLOBAL_SECTION = "*"

_TRUE = {"1", "true", "yes", "on", "oui"}
_FALSE = {"0", "false", "no", "off", "non"}

ConfigValues = Dict[str, Dict[str, str]]


def load_config(path: Union[str, Path]) -> ConfigValues:
    """Lit un fichier key = value avec sections [sous-commande] optionnelles.

    Les clés placées avant toute section s'appliquent à toutes les
    sous-commandes.

    Raises:
        IOError: Si le fichier est illisible
        InvalidConfigurationError: Si le fichier est mal formé
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except IOError as e:
        logger.error(f"Erreur lecture configuration : {e}")
        raise

    parser = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        default_section="\x00",
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(f"[{GLOBAL_SECTION}]\n{text}", source=str(path))
    except configparser.Error as e:
        raise InvalidConfigurationError(f"Fichier de configuration invalide ({path}) : {e}") from e

    values = {section: dict(parser.items(section)) for section in parser.sections()}
    logger.debug(f"Configuration chargée : {path} ({sorted(values)})")
    return values


def env_seed() -> Optional[int]:
    """Graine de SKETCHPOST_SEED, ou None si la variable est absente.

    Raises:
        InvalidConfigurationError: Si la valeur n'est pas un entier
    """
    raw = os.environ.get(ENV_SEED)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise InvalidConfigurationError(f"{ENV_SEED} invalide : {raw!r} (entier attendu)") from e


def _convert(action: argparse.Action, key: str, raw: str) -> Any:
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        lowered = raw.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise InvalidConfigurationError(f"Booléen invalide pour {key} : {raw!r}")

    convert = action.type if callable(action.type) else str
    try:
        if action.nargs in ("+", "*"):
            items = [item.strip() for item in raw.split(",") if item.strip()]
            values = [convert(item) for item in items]
        else:
            values = convert(raw.strip())
    except (TypeError, ValueError) as e:
        raise InvalidConfigurationError(f"Valeur invalide pour {key} : {raw!r} ({e})") from e

    allowed = action.choices
    if allowed is not None:
        for value in values if isinstance(values, list) else [values]:
            if value not in allowed:
                choices = ", ".join(map(str, allowed))
                raise InvalidConfigurationError(
                    f"Valeur invalide pour {key} : {value!r} (choix : {choices})"
                )
    return values


def apply_defaults(
    subparser: argparse.ArgumentParser, command: str, config: Optional[ConfigValues]
) -> None:
    """Remplace les défauts du sous-parser par l'environnement puis le fichier.

    Les clés inconnues de la sous-commande sont ignorées avec un warning.
    """
    actions = {action.dest: action for action in subparser._actions}
    defaults: Dict[str, Any] = {}

    seed = env_seed()
    if seed is not None and "seed" in actions:
        defaults["seed"] = seed

    if config:
        for section in (GLOBAL_SECTION, command):
            for key, raw in config.get(section, {}).items():
                dest = key.replace("-", "_")
                if dest not in actions or dest == "help":
                    if section == command:
                        logger.warning(f"Clé de configuration inconnue pour {command} : {key}")
                    continue
                defaults[dest] = _convert(actions[dest], key, raw)

    if defaults:
        logger.debug(f"Défauts résolus pour {command} : {defaults}")
        subparser.set_defaults(**defaults)
