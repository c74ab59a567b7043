"""Structures de données pour la reconstruction bayésienne depuis un count sketch.

Ce module définit les dataclasses représentant le hachage, le sketch, les
priors (DP, PYP, Poisson-Kingman), les mesures aléatoires complètement
aléatoires (CRM), les distributions a posteriori et les rapports produits
par les modules de calcul.

Classes:
    HashFunction: Fonction de hachage fortement universelle vers [J]
    Sketch: Compteurs de buckets d'un count sketch à une seule ligne
    CrmFamily: Famille de CRM (Enum)
    CrmSpec: Spécification d'une CRM (ρ et masse θ)
    GfcTable: Table log des coefficients factoriels généralisés
    DpParams: Paramètres d'un processus de Dirichlet
    PypParams: Paramètres d'un processus de Pitman-Yor
    PkTilt: Inclinaison g(t) ∝ t^{-γ} e^{-βt} d'un prior Poisson-Kingman
    MethodTag: Méthode ayant produit une distribution (Enum)
    PosteriorPmf: Distribution a posteriori discrète sur {0, …, c}
    PmfSummary: Résumés ponctuels d'une distribution a posteriori
    CardinalityMethod: Méthode d'estimation de cardinalité (Enum)
    CardinalityEstimate: Estimation de K_n et des l-cardinalités
    TraitQuery: Requête (c, b, a, n) du cadre à traits
    IbpPoissonParams: Paramètres d'un IBP généralisé à niveaux de Poisson
    BernoulliKernel: Variante du poids approché en cadre de Bernoulli (Enum)
    IbpDraw: Tirage tronqué d'un IBP généralisé
    FitReport: Résultat d'un ajustement d'hyperparamètres
    PartitionOracleResult: Loi jointe exacte par énumération des partitions
    EvalReport: MAE stratifiée par fréquence vraie
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from src.validation import (
    InvalidConfigurationError,
    validate_dp_theta,
    validate_pyp,
    validate_trait_query,
    validate_width,
)

MERSENNE_PRIME_61 = (1 << 61) - 1


@dataclass(frozen=True)
class HashFunction:
    """Fonction ((a·enc(key) + b) mod p) mod J d'une famille fortement universelle.

    Attributes:
        prime_modulus: Nombre premier p (2^61 − 1)
        coeff_a: Coefficient multiplicatif, 1 ≤ a < p
        coeff_b: Coefficient additif, 0 ≤ b < p
        width_J: Nombre de buckets J ≥ 1
        seed: Graine 64 bits ayant produit (a, b)

    Example:
        >>> h = HashFunction(MERSENNE_PRIME_61, 3, 5, width_J=10, seed=7)
        >>> h.width_J
        10
    """

    prime_modulus: int
    coeff_a: int
    coeff_b: int
    width_J: int
    seed: int

    def __post_init__(self) -> None:
        validate_width(self.width_J)
        if not (1 <= self.coeff_a < self.prime_modulus):
            raise InvalidConfigurationError(f"Coefficient a hors bornes : {self.coeff_a}")
        if not (0 <= self.coeff_b < self.prime_modulus):
            raise InvalidConfigurationError(f"Coefficient b hors bornes : {self.coeff_b}")


@dataclass(frozen=True, eq=False)
class Sketch:
    """Count sketch à une ligne: J compteurs et la taille n du flux.

    Les compteurs sont copiés dans un tableau int64 en lecture seule.

    Attributes:
        counts: Vecteur des J compteurs C_1 … C_J
        total_n: Nombre total de jetons n (= somme des compteurs)
        width_J: Nombre de buckets J
        hash_seed: Graine de la fonction de hachage utilisée

    Invariants:
        - sum(counts) == total_n
        - len(counts) == width_J
        - compteurs ≥ 0

    Example:
        >>> s = Sketch(np.array([5, 3]), total_n=8, width_J=2, hash_seed=0)
        >>> int(s.counts[0])
        5
    """

    counts: np.ndarray
    total_n: int
    width_J: int
    hash_seed: int = 0

    def __post_init__(self) -> None:
        validate_width(self.width_J)
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape[0] != self.width_J:
            raise InvalidConfigurationError(
                f"Sketch incohérent : {counts.shape[0]} compteurs pour J = {self.width_J}"
            )
        if np.any(counts < 0):
            raise InvalidConfigurationError("Sketch incohérent : compteur négatif")
        if int(counts.sum()) != self.total_n:
            raise InvalidConfigurationError(
                f"Sketch incohérent : somme des compteurs {int(counts.sum())} ≠ n = {self.total_n}"
            )

    @classmethod
    def from_counts(cls, counts: "np.ndarray | List[int]", hash_seed: int = 0) -> "Sketch":
        """Construit un sketch à partir des seuls compteurs (n et J déduits)."""
        arr = np.asarray(counts, dtype=np.int64)
        return cls(arr, total_n=int(arr.sum()), width_J=int(arr.shape[0]), hash_seed=hash_seed)

    @property
    def fill_ratio(self) -> float:
        """Fraction de buckets non vides."""
        return float(np.count_nonzero(self.counts)) / self.width_J

    @property
    def max_count(self) -> int:
        """Plus grand compteur (0 pour un sketch vide)."""
        return int(self.counts.max()) if self.width_J else 0

    def same_as(self, other: "Sketch") -> bool:
        """Égalité bit à bit (compteurs, n, J, graine)."""
        return (
            self.width_J == other.width_J
            and self.total_n == other.total_n
            and self.hash_seed == other.hash_seed
            and bool(np.array_equal(self.counts, other.counts))
        )


class CrmFamily(Enum):
    """Familles de CRM supportées."""

    GAMMA = "gamma"
    GENERALIZED_GAMMA = "generalized-gamma"
    STABLE_BETA = "stable-beta"


@dataclass(frozen=True)
class CrmSpec:
    """Spécification d'une CRM homogène d'intensité θ ρ(s) ds.

    - Gamma: ρ(s) = s^{-1} e^{-s}
    - GeneralizedGamma(α, τ): ρ(s) = α/Γ(1−α) s^{-1-α} e^{-τs} pour α ∈ (0, 1);
      α = 0 désigne la CRM de type Gamma ρ(s) = s^{-1} e^{-τs}
    - StableBeta(β): ρ(s) = s^{-1} (1−s)^{β−1} sur (0, 1)

    Attributes:
        family: Famille de la CRM
        alpha: Indice de stabilité (GeneralizedGamma)
        tau: Paramètre d'inclinaison exponentielle (GeneralizedGamma)
        beta_param: Paramètre β (StableBeta)
        total_mass_theta: Masse totale θ

    Example:
        >>> CrmSpec.generalized_gamma(0.5, 1.0).alpha
        0.5
    """

    family: CrmFamily
    alpha: float = 0.0
    tau: float = 1.0
    beta_param: float = 1.0
    total_mass_theta: float = 1.0

    def __post_init__(self) -> None:
        if self.total_mass_theta <= 0:
            raise InvalidConfigurationError(
                f"Masse de la CRM invalide : θ = {self.total_mass_theta} (doit être > 0)"
            )
        if self.family is CrmFamily.GENERALIZED_GAMMA:
            if not (0.0 <= self.alpha < 1.0):
                raise InvalidConfigurationError(
                    f"Indice GeneralizedGamma invalide : α = {self.alpha} (attendu dans [0, 1))"
                )
            if self.tau < 0 or (self.tau == 0 and self.alpha == 0):
                raise InvalidConfigurationError(
                    f"Paramètre τ invalide : τ = {self.tau} "
                    "(τ > 0 requis, τ = 0 seulement si α > 0)"
                )
        if self.family is CrmFamily.STABLE_BETA and self.beta_param <= 0:
            raise InvalidConfigurationError(
                f"Paramètre StableBeta invalide : β = {self.beta_param} (doit être > 0)"
            )

    @classmethod
    def gamma(cls, theta: float = 1.0) -> "CrmSpec":
        return cls(CrmFamily.GAMMA, total_mass_theta=theta)

    @classmethod
    def generalized_gamma(cls, alpha: float, tau: float, theta: float = 1.0) -> "CrmSpec":
        return cls(CrmFamily.GENERALIZED_GAMMA, alpha=alpha, tau=tau, total_mass_theta=theta)

    @classmethod
    def stable_beta(cls, beta_param: float = 1.0, theta: float = 1.0) -> "CrmSpec":
        return cls(CrmFamily.STABLE_BETA, beta_param=beta_param, total_mass_theta=theta)

    @property
    def jumps_in_unit_interval(self) -> bool:
        """True si ρ est supportée par (0, 1) (sauts utilisables comme probabilités)."""
        return self.family is CrmFamily.STABLE_BETA


@dataclass(frozen=True, eq=False)
class GfcTable:
    """Table des log 𝒞(n, k; α) pour 0 ≤ k ≤ n ≤ n_max.

    Convention: 𝒞(0, 0; α) = 1, 𝒞(n, 0; α) = 0 pour n ≥ 1 (stocké −inf).

    Attributes:
        n_max: Plus grand n tabulé
        alpha: Paramètre α ∈ (0, 1)
        log_values: Tableau (n_max+1) × (n_max+1), −inf hors triangle
    """

    n_max: int
    alpha: float
    log_values: np.ndarray

    def log_coef(self, n: int, k: int) -> float:
        """log 𝒞(n, k; α) (−inf si k > n ou k = 0 < n)."""
        if n > self.n_max:
            raise InvalidConfigurationError(f"n = {n} au-delà de la table (n_max = {self.n_max})")
        if k < 0 or k > n:
            return float("-inf")
        return float(self.log_values[n, k])

    def log_row(self, n: int) -> np.ndarray:
        """Ligne log 𝒞(n, 0..n; α), de longueur n+1."""
        if n > self.n_max:
            raise InvalidConfigurationError(f"n = {n} au-delà de la table (n_max = {self.n_max})")
        return self.log_values[n, : n + 1]


@dataclass(frozen=True)
class DpParams:
    """Processus de Dirichlet de masse θ > 0."""

    theta: float

    def __post_init__(self) -> None:
        validate_dp_theta(self.theta)


@dataclass(frozen=True)
class PypParams:
    """Processus de Pitman-Yor de discount α ∈ (0, 1) et de masse γ > 0."""

    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        validate_pyp(self.alpha, self.gamma)


@dataclass(frozen=True)
class PkTilt:
    """Inclinaison g(t) ∝ t^{-γ} e^{-βt} de la masse totale.

    Attributes:
        gamma_tilt: Exposant γ
        beta_tilt: Taux β ≥ 0
    """

    gamma_tilt: float = 0.0
    beta_tilt: float = 0.0

    def __post_init__(self) -> None:
        if self.beta_tilt < 0:
            raise InvalidConfigurationError(f"Inclinaison invalide : β = {self.beta_tilt} (≥ 0)")


class MethodTag(Enum):
    """Méthode ayant produit une PosteriorPmf."""

    DP_EXACT = "DP-exact"
    PYP_EXACT = "PYP-exact"
    PYP_MC = "PYP-MC"
    PK_NUMERIC = "PK-numeric"
    TRAITS_POISSON_GAMMA = "Traits-PoissonGamma"
    TRAITS_POISSON_GG = "Traits-PoissonGG"
    TRAITS_POISSON_GENERAL = "Traits-PoissonGeneral"
    TRAITS_BERNOULLI_APPROX = "Traits-BernoulliApprox"


@dataclass(frozen=True, eq=False)
class PosteriorPmf:
    """Distribution a posteriori sur {0, …, support_max}, stockée en log.

    Attributes:
        support_max: Borne supérieure du support (c_j en général)
        log_probs: log P(l) pour l = 0..support_max
        method: Méthode de calcul
        stderr: Écarts-types MC par l (estimateurs MC uniquement)
    """

    support_max: int
    log_probs: np.ndarray
    method: MethodTag
    stderr: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        log_probs = np.asarray(self.log_probs, dtype=float)
        object.__setattr__(self, "log_probs", log_probs)
        if log_probs.shape != (self.support_max + 1,):
            raise InvalidConfigurationError(
                f"PMF incohérente : {log_probs.shape[0]} valeurs "
                f"pour support_max = {self.support_max}"
            )
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))

    @property
    def probs(self) -> np.ndarray:
        """Probabilités en échelle linéaire."""
        return np.exp(self.log_probs)


@dataclass(frozen=True)
class PmfSummary:
    """Résumés d'une PMF: moyenne, médiane basse, mode, intervalle de crédibilité."""

    mean: float
    median: int
    mode: int
    credible_interval: Tuple[int, int]
    ci_level: float


class CardinalityMethod(Enum):
    DP = "DP"
    PYP_EXACT = "PYP-exact"
    PYP_MC = "PYP-MC"


@dataclass(frozen=True, eq=False)
class CardinalityEstimate:
    """Estimation de K_n et des l-cardinalités M_{l,n}.

    Attributes:
        k_hat: Estimation du nombre de symboles distincts
        m_hat: m̂_l pour l = 1..L_max (indice l−1)
        L_max: Troncature (max_j c_j)
        method: Méthode de calcul
        params: Paramètres du prior utilisés
        k_hat_closed_form: Forme fermée digamma (DP uniquement)
    """

    k_hat: float
    m_hat: np.ndarray
    L_max: int
    method: CardinalityMethod
    params: Dict[str, float] = field(default_factory=dict)
    k_hat_closed_form: Optional[float] = None


@dataclass(frozen=True)
class TraitQuery:
    """Requête du cadre à traits.

    Attributes:
        c: Total du bucket C_j
        b: Incrément B_j apporté par le nouveau point
        a: Niveau du nouveau point sur le trait interrogé (1 ≤ a ≤ b)
        n: Nombre de points résumés par le sketch

    Example:
        >>> TraitQuery(c=2, b=1, a=1, n=10).a
        1
    """

    c: int
    b: int
    a: int
    n: int

    def __post_init__(self) -> None:
        validate_trait_query(self.c, self.b, self.a, self.n)


@dataclass(frozen=True)
class IbpPoissonParams:
    """IBP généralisé à niveaux A | J ~ Poisson(λJ).

    Attributes:
        theta: Masse θ > 0
        lambda_rate: Taux λ > 0
        crm: CRM Gamma ou GeneralizedGamma
    """

    theta: float
    lambda_rate: float
    crm: CrmSpec = field(default_factory=CrmSpec.gamma)

    def __post_init__(self) -> None:
        validate_dp_theta(self.theta)
        if self.lambda_rate <= 0:
            raise InvalidConfigurationError(f"Taux λ invalide : {self.lambda_rate} (doit être > 0)")
        if self.crm.family is CrmFamily.STABLE_BETA:
            raise InvalidConfigurationError(
                "Les niveaux de Poisson requièrent une CRM Gamma ou GeneralizedGamma"
            )


class BernoulliKernel(Enum):
    """Poids de l'approximation poissonisée en cadre de Bernoulli."""

    PRINTED = "printed"
    POISSONIZED = "poissonized"


@dataclass(frozen=True, eq=False)
class IbpDraw:
    """Tirage tronqué d'un IBP généralisé.

    Attributes:
        levels: Pour chaque point, dictionnaire {indice d'atome: niveau > 0}
        jumps: Sauts conservés, décroissants
        truncated_mass: Masse espérée des sauts écartés par la troncature
    """

    levels: List[Dict[int, int]]
    jumps: np.ndarray
    truncated_mass: float

    def atom_totals(self) -> np.ndarray:
        """Niveau cumulé de chaque atome sur tous les points."""
        totals = np.zeros(self.jumps.shape[0], dtype=np.int64)
        for point in self.levels:
            for atom, level in point.items():
                totals[atom] += level
        return totals


ParamsHat = Union[DpParams, PypParams, IbpPoissonParams]


@dataclass(frozen=True)
class FitReport:
    """Résultat d'un ajustement d'hyperparamètres.

    Attributes:
        params_hat: Paramètres estimés
        objective_trace: Suite des (paramètres, objectif) évalués
        converged: Convergence de l'optimiseur
        n_prefix: Longueur du préfixe (ajustement PYP uniquement)
        at_boundary: True si l'optimum touche une borne de recherche
    """

    params_hat: ParamsHat
    objective_trace: List[Tuple[Tuple[float, ...], float]]
    converged: bool
    n_prefix: Optional[int] = None
    at_boundary: bool = False

    def __post_init__(self) -> None:
        if self.converged and not self.objective_trace:
            raise InvalidConfigurationError("Trace d'objectif vide pour un ajustement convergé")


CountsKey = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PartitionOracleResult:
    """Loi jointe exacte de (C_J, h(X_{n+1}), f_{X_{n+1}}) par énumération.

    Attributes:
        joint_table: {(compteurs, bucket requête, f): probabilité}
        n: Taille de l'échantillon résumé
        J: Nombre de buckets
        params: Prior utilisé
        m_table: {compteurs: E[M_{l,n} · 1{C = compteurs}] pour l = 1..n}
    """

    joint_table: Dict[Tuple[CountsKey, int, int], float]
    n: int
    J: int
    params: Union[DpParams, PypParams]
    m_table: Dict[CountsKey, np.ndarray] = field(default_factory=dict)

    @property
    def total_mass(self) -> float:
        return float(sum(self.joint_table.values()))

    def sketch_marginal(self, counts: CountsKey) -> float:
        """Pr[C_J = counts]."""
        counts = tuple(counts)
        return float(sum(p for (c, _, _), p in self.joint_table.items() if c == counts))

    def conditional(self, counts: CountsKey, j: int) -> np.ndarray:
        """Pr[f = l | C_J = counts, h(X_{n+1}) = j] pour l = 0..counts[j]."""
        counts = tuple(counts)
        law = np.zeros(counts[j] + 1)
        for (c, bucket, f), p in self.joint_table.items():
            if c == counts and bucket == j:
                law[f] += p
        total = law.sum()
        if total <= 0:
            raise InvalidConfigurationError(f"Cellule de probabilité nulle : {counts}, j = {j}")
        return law / total

    def unconditional(self, counts: CountsKey) -> np.ndarray:
        """Pr[f = l | C_J = counts] pour l = 0..n (bucket requête marginalisé)."""
        counts = tuple(counts)
        law = np.zeros(self.n + 1)
        for (c, _, f), p in self.joint_table.items():
            if c == counts:
                law[f] += p
        return law / law.sum()

    def expected_m(self, counts: CountsKey) -> np.ndarray:
        """E[M_{l,n} | C_J = counts] pour l = 1..n."""
        counts = tuple(counts)
        return self.m_table[counts] / self.sketch_marginal(counts)


@dataclass(frozen=True)
class EvalReport:
    """MAE stratifiée par fréquence vraie pour une méthode et une largeur J.

    Attributes:
        bins: Intervalles (l, u] ordonnés et disjoints
        mae_per_bin: MAE moyenne (sur les graines) par intervalle
        counts_per_bin: Nombre de symboles distincts par intervalle
        method: Estimateur évalué
        J: Largeur du sketch
        seeds: Graines de hachage utilisées
    """

    bins: List[Tuple[float, float]]
    mae_per_bin: List[float]
    counts_per_bin: List[int]
    method: str
    J: int
    seeds: List[int]

    def __post_init__(self) -> None:
        if not (len(self.bins) == len(self.mae_per_bin) == len(self.counts_per_bin)):
            raise InvalidConfigurationError("Rapport incohérent : longueurs différentes")
        for (low, high), (next_low, _) in zip(self.bins, self.bins[1:]):
            if not (low < high <= next_low):
                raise InvalidConfigurationError(f"Intervalles non ordonnés : ({low}, {high}]")
