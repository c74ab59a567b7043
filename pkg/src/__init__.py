"""Sketch Posterior - Récupération bayésienne de fréquences et de cardinalités à partir d'un sketch.

Ce package estime, à partir d'un count sketch à une seule fonction de
hachage, la fréquence d'un symbole interrogé (loi a posteriori complète), le
nombre de symboles distincts et les niveaux cumulés de traits, sous des
priors non paramétriques (DP, PYP, Poisson–Kingman, IBP généralisé).

Modules:
    models: Structures de données (Sketch, CrmSpec, PosteriorPmf, …)
    validation: Hiérarchie d'erreurs et validation des paramètres
    hashing: Famille de hachage universelle et construction de sketchs
    specialfns: Factorielles montantes, coefficients factoriels généralisés, ψ/κ/φ
    species: Lois a posteriori de fréquence (DP, PYP exact/MC, PK numérique)
    cardinality: Estimation de K_n et des l-cardinalités
    traits: Cadre à traits (IBP Poisson et Bernoulli)
    fitting: Estimation des hyperparamètres
    simulate: Générateurs de données et oracles
    metrics: MAE stratifiée
    evaluation: Pipeline d'évaluation
    exporters: Export JSON/CSV
    config: Fichier de configuration de la CLI
    telemetry: Durées et métriques dans les logs
    cli: Interface ligne de commande

Usage:
    >>> from src.models import DpParams
    >>> from src.species import dp_freq_posterior, summarize
    >>> pmf = dp_freq_posterior(5, DpParams(theta=1.0), J=10)
    >>> round(summarize(pmf).mean, 2)
    4.55
"""

__version__ = "0.1.0"
