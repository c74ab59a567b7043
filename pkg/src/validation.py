"""Validation des paramètres et hiérarchie d'erreurs typées.

Ce module regroupe les exceptions métier (toutes dérivées de ValueError,
messages en français) et les fonctions de validation des paramètres de
prior, de sketch et de requêtes.

Classes:
    SketchPosteriorError: Base commune de toutes les erreurs du package
    InvalidConfigurationError: Paramètre hors de son domaine
    InvalidWidthError: Largeur de sketch J invalide
    InvalidKeyError: Clé de hachage vide ou non encodable
    DomainError: Argument hors du domaine d'une fonction spéciale
    PoleError: Évaluation sur un pôle (Γ, digamma, factorielle montante)
    DivergenceError: Intégrale de noyau CRM divergente
    TractabilityError: Garde-fou de taille dépassé (calcul exact trop coûteux)
    DegenerateEstimateError: Estimation dégénérée (MC, ajustement)
    AccuracyError: Précision numérique requise non atteinte
    InsufficientDataError: Pas assez de données pour ajuster

Functions:
    validate_width: Valide une largeur de sketch J
    validate_dp_theta: Valide la masse θ d'un DP
    validate_pyp: Valide le couple (α, γ) d'un PYP
    validate_bucket: Valide un indice de bucket
    validate_trait_query: Valide un triplet (c, b, a) et n
    validate_probability_level: Valide un niveau dans (0, 1)
"""

import logging
import math
from typing import Optional

logger = logging.getLogger(__name__)


class SketchPosteriorError(ValueError):
    """Base commune des erreurs métier du package.

    Dérive de ValueError: un appelant qui ne connaît pas la hiérarchie
    peut se contenter d'attraper ValueError.
    """

    pass


class InvalidConfigurationError(SketchPosteriorError):
    """Exception levée lorsqu'un paramètre est hors de son domaine.

    Example:
        >>> try:
        ...     validate_dp_theta(-1.0)
        ... except InvalidConfigurationError as e:
        ...     print(e)
        Masse du DP invalide : θ = -1.0 (doit être > 0)
    """

    pass


class InvalidWidthError(InvalidConfigurationError):
    """Largeur de sketch J invalide (J ≥ 1 requis)."""

    pass


class InvalidKeyError(InvalidConfigurationError):
    """Clé vide (ou non encodable) passée à la fonction de hachage."""

    pass


class DomainError(InvalidConfigurationError):
    """Argument hors du domaine d'une fonction spéciale."""

    pass


class PoleError(DomainError):
    """Évaluation sur un pôle (entier négatif ou nul)."""

    pass


class DivergenceError(DomainError):
    """Intégrale de noyau divergente pour la mesure de Lévy choisie."""

    pass


class TractabilityError(SketchPosteriorError):
    """Garde-fou de taille dépassé pour un calcul exact.

    Le message indique toujours l'alternative (estimateur MC, échantillonnage).
    """

    pass


class DegenerateEstimateError(SketchPosteriorError):
    """Estimation dégénérée: dénominateur MC nul, sketch vide pour un ajustement."""

    pass


class AccuracyError(SketchPosteriorError):
    """Tolérance numérique non atteinte.

    Attributes:
        achieved: Erreur effectivement atteinte (si connue)
    """

    def __init__(self, message: str, achieved: Optional[float] = None) -> None:
        super().__init__(message)
        self.achieved = achieved


class InsufficientDataError(SketchPosteriorError):
    """Pas assez de données (préfixe trop court, un seul symbole distinct)."""

    pass


def validate_width(J: int) -> None:
    """Valide une largeur de sketch.

    Args:
        J: Nombre de buckets

    Raises:
        InvalidWidthError: Si J n'est pas un entier ≥ 1
    """
    if isinstance(J, bool) or not isinstance(J, int) or J < 1:
        raise InvalidWidthError(f"Largeur de sketch invalide : J = {J} (minimum : 1)")


def validate_dp_theta(theta: float) -> None:
    """Valide la masse totale θ d'un processus de Dirichlet.

    Args:
        theta: Masse totale

    Raises:
        InvalidConfigurationError: Si θ n'est pas un réel fini > 0
    """
    if not math.isfinite(theta) or theta <= 0:
        raise InvalidConfigurationError(f"Masse du DP invalide : θ = {theta} (doit être > 0)")


def validate_pyp(alpha: float, gamma: float) -> None:
    """Valide les paramètres (α, γ) d'un processus de Pitman-Yor.

    Le package se restreint à γ > 0 (les formules de cardinalité et
    d'ajustement le supposent).

    Args:
        alpha: Discount, dans (0, 1)
        gamma: Masse, > 0

    Raises:
        InvalidConfigurationError: Si un paramètre est hors domaine

    Example:
        >>> validate_pyp(0.5, 1.0)  # OK
        >>> validate_pyp(1.0, 1.0)
        Traceback (most recent call last):
        ...
        InvalidConfigurationError: Discount du PYP invalide : α = 1.0 (doit être dans (0, 1))
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidConfigurationError(
            f"Discount du PYP invalide : α = {alpha} (doit être dans (0, 1))"
        )
    if not math.isfinite(gamma) or gamma <= 0:
        raise InvalidConfigurationError(f"Masse du PYP invalide : γ = {gamma} (doit être > 0)")


def validate_bucket(j: int, J: int) -> None:
    """Valide un indice de bucket 0-indexé.

    Raises:
        InvalidConfigurationError: Si j ∉ [0, J−1]
    """
    if not isinstance(j, (int,)) or not (0 <= j < J):
        raise InvalidConfigurationError(f"Bucket invalide : j = {j} (attendu dans [0, {J - 1}])")


def validate_trait_query(c: int, b: int, a: int, n: int) -> None:
    """Valide une requête de trait (c, b, a) et la taille d'échantillon n.

    Raises:
        DivergenceError: Si a = 0 (κ(u, 0) diverge pour les ρ implémentés)
        InvalidConfigurationError: Si c < 0, a > b ou n < 1
    """
    if a == 0:
        raise DivergenceError(
            "Niveau a = 0 : la cellule (l, a) = (0, 0) fait intervenir κ(u, 0), "
            "divergent pour les mesures de Lévy implémentées"
        )
    if c < 0:
        raise InvalidConfigurationError(f"Compte de bucket négatif : c = {c}")
    if not (1 <= a <= b):
        raise InvalidConfigurationError(f"Niveau incohérent : a = {a}, b = {b} (1 ≤ a ≤ b requis)")
    if n < 1:
        raise InvalidConfigurationError(f"Nombre de points invalide : n = {n} (minimum : 1)")


def validate_probability_level(level: float, name: str = "niveau") -> None:
    """Valide un niveau de probabilité dans (0, 1).

    Raises:
        InvalidConfigurationError: Si level ∉ (0, 1)
    """
    if not (0.0 < level < 1.0):
        raise InvalidConfigurationError(f"{name} invalide : {level} (doit être dans (0, 1))")
