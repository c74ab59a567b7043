"""Tests unitaires et d'intégration pour Sketch Posterior.

Organisation:
    test_models.py: Tests structures de données
    test_validation.py: Tests hiérarchie d'erreurs et validations
    test_hashing.py: Tests hachage et construction de sketchs
    test_specialfns.py: Tests fonctions spéciales et noyaux de CRM
    test_species.py: Tests lois a posteriori de fréquence
    test_cardinality.py: Tests estimation de cardinalité
    test_traits.py: Tests modèles à traits
    test_fitting.py: Tests ajustement des hyperparamètres
    test_simulate.py: Tests générateurs et oracles
    test_metrics.py: Tests MAE stratifiée
    test_evaluation.py: Tests pipeline d'évaluation
    test_exporters.py: Tests export JSON/CSV
    test_config.py: Tests fichier de configuration
    test_telemetry.py: Tests durées et métriques
    test_cli.py: Tests interface CLI
    test_integration.py: Tests end-to-end

Markers:
    @pytest.mark.slow: Tests statistiques coûteux (>1s)
    @pytest.mark.integration: Tests d'intégration end-to-end

Usage:
    pytest                     # Tous tests
    pytest -m "not slow"       # Exclure tests lents
    pytest --cov=src           # Avec couverture
"""
