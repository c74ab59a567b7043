"""Interface CLI: sketchs, estimation bayésienne, ajustement et évaluation.

Ce module orchestre les composants du système sans contenir de logique
métier: chaque sous-commande lit ses entrées, délègue le calcul au module
spécialisé et écrit un résultat JSON/CSV (ou l'affiche sur la sortie
standard).

Exit codes:
    0: Succès
    1: Erreur inattendue
    2: Usage ou configuration invalide
    3: Garde-fou numérique (taille, dégénérescence, précision)
    4: Erreur I/O (fichier non accessible)

Usage:
    python -m src.cli sketch -i corpus.txt -J 512 --seed 1 -o corpus.sketch.json
    python -m src.cli estimate -s corpus.sketch.json --query q.txt --prior dp --theta 10

Functions:
    build_parser: Construit le parser et ses sous-commandes
    run: Exécute une ligne de commande et retourne le code de sortie
    main: Point d'entrée principal
"""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

import numpy as np

from src.cardinality import dp_cardinality, pyp_cardinality
from src.config import apply_defaults, load_config
from src.evaluation import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_PREFIX,
    ESTIMATORS,
    EvaluationSettings,
    evaluate_corpus,
    truth_table,
)
from src.exporters import (
    cardinality_to_dict,
    export_eval_reports,
    fit_to_dict,
    load_sketch,
    pmf_to_dict,
    write_dump_csv,
    write_json,
    write_sketch,
    write_token_file,
    write_truth_csv,
)
from src.fitting import fit_dp_theta, fit_pyp_prefix
from src.hashing import hash_key, iter_token_file, new_hash, sketch_file
from src.models import (
    BernoulliKernel,
    CrmSpec,
    DpParams,
    IbpPoissonParams,
    PkTilt,
    PosteriorPmf,
    PypParams,
    Sketch,
    TraitQuery,
)
from src.simulate import sample_ibp_poisson_gamma, sample_pyp_sequence, sample_zipf
from src.species import (
    DEFAULT_MAX_TERMS,
    dp_freq_posterior,
    pk_freq_posterior_numeric,
    pyp_freq_posterior_exact,
    pyp_freq_posterior_mc,
    pyp_mean_asymptotic,
    summarize,
)
from src.telemetry import configure_json_logging
from src.traits import (
    bernoulli_approx_posterior,
    bernoulli_tv_bound,
    fit_ibp_poisson_gamma,
    poisson_gamma_posterior,
    poisson_general_posterior,
    poisson_gg_posterior,
)
from src.validation import (
    AccuracyError,
    DegenerateEstimateError,
    InsufficientDataError,
    InvalidConfigurationError,
    SketchPosteriorError,
    TractabilityError,
    validate_bucket,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

Handler = Callable[[argparse.Namespace], None]


# ============================================================================
# UTILITAIRES
# ============================================================================


def _emit(data: Dict[str, Any], output: Optional[str]) -> None:
    """Écrit le résultat dans un fichier JSON, ou sur la sortie standard."""
    if output:
        write_json(data, output)
    else:
        print(json.dumps(data, indent=2, ensure_ascii=False))


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        raise InvalidConfigurationError(f"Option(s) requise(s) : {', '.join(missing)}")


def _max_terms(raw: str) -> Optional[float]:
    return None if raw.lower() == "none" else float(raw)


def _species_prior(args: argparse.Namespace) -> Any:
    if args.prior == "dp":
        _require(args, "theta")
        return DpParams(args.theta)
    if args.prior == "pyp":
        _require(args, "alpha", "gamma")
        return PypParams(args.alpha, args.gamma)
    return _crm_spec(args, default="gamma")


def _crm_spec(args: argparse.Namespace, default: str) -> CrmSpec:
    theta = args.theta if args.theta is not None else 1.0
    family = args.crm or default
    if family == "gamma":
        return CrmSpec.gamma(theta)
    if family == "gg":
        return CrmSpec.generalized_gamma(args.crm_alpha, args.crm_tau, theta)
    return CrmSpec.stable_beta(args.beta_param, theta)


def _add_prior_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("prior")
    group.add_argument("--theta", type=float, help="θ du DP (ou masse de la CRM)")
    group.add_argument("--alpha", type=float, help="α du PYP, dans (0, 1)")
    group.add_argument("--gamma", type=float, help="γ du PYP, > −α")


def _add_crm_options(parser: argparse.ArgumentParser, families: Sequence[str]) -> None:
    group = parser.add_argument_group("CRM")
    group.add_argument("--crm", choices=list(families), help="Famille de la CRM")
    group.add_argument("--crm-alpha", type=float, default=0.5, help="α de GeneralizedGamma")
    group.add_argument("--crm-tau", type=float, default=1.0, help="τ de GeneralizedGamma")
    group.add_argument("--beta-param", type=float, default=1.0, help="β de StableBeta")


def _add_mc_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("évaluation")
    group.add_argument("--iters", type=int, default=10_000, help="Itérations MC (défaut: 10000)")
    group.add_argument("--chunk-size", type=int, default=50_000, help="Taille des blocs MC")
    group.add_argument(
        "--max-terms",
        type=_max_terms,
        default=DEFAULT_MAX_TERMS,
        metavar="N|none",
        help="Garde-fou du mode exact (défaut: 1e7, 'none' pour le lever)",
    )


# ============================================================================
# SOUS-COMMANDES
# ============================================================================


def cmd_sketch(args: argparse.Namespace) -> None:
    """Sketch d'un fichier de jetons (un par ligne)."""
    _require(args, "input", "width")
    sketch = sketch_file(args.input, new_hash(args.seed, args.width))
    if args.output:
        write_sketch(sketch, args.output)
    print(
        f"n={sketch.total_n} J={sketch.width_J} non_vides={np.count_nonzero(sketch.counts)} "
        f"remplissage={sketch.fill_ratio:.4f} max={sketch.max_count}"
    )


def _posterior_for_bucket(
    args: argparse.Namespace, sketch: Sketch, prior: Any, j: int
) -> Tuple[Optional[PosteriorPmf], Optional[float]]:
    """(loi a posteriori, moyenne asymptotique) pour un bucket."""
    c_j = int(sketch.counts[j])
    if isinstance(prior, DpParams):
        return dp_freq_posterior(c_j, prior, sketch.width_J), None
    if isinstance(prior, PypParams):
        if args.mode == "asymptotic":
            return None, pyp_mean_asymptotic(c_j, prior, sketch.width_J)
        if args.mode == "mc":
            pmf = pyp_freq_posterior_mc(sketch, j, prior, args.iters, args.seed, args.chunk_size)
            return pmf, None
        return pyp_freq_posterior_exact(sketch, j, prior, args.max_terms), None
    tilt = PkTilt(args.tilt_gamma, args.tilt_beta)
    return pk_freq_posterior_numeric(prior, tilt, sketch, j), None


def cmd_estimate(args: argparse.Namespace) -> None:
    """Loi a posteriori de la fréquence de requêtes (jetons ou buckets)."""
    _require(args, "sketch")
    if (args.query is None) == (args.bucket is None):
        raise InvalidConfigurationError("Indiquer exactement une source : --query ou --bucket")
    sketch = load_sketch(args.sketch)
    prior = _species_prior(args)

    queries: List[Tuple[Optional[str], int]]
    if args.query is not None:
        h = new_hash(sketch.hash_seed, sketch.width_J)
        queries = [
            (token.decode("utf-8", "replace"), hash_key(h, token))
            for token in iter_token_file(args.query)
        ]
    else:
        for j in args.bucket:
            validate_bucket(j, sketch.width_J)
        queries = [(None, j) for j in args.bucket]

    cache: Dict[int, Dict[str, Any]] = {}
    rows = []
    for token, j in queries:
        if j not in cache:
            pmf, asymptotic = _posterior_for_bucket(args, sketch, prior, j)
            row: Dict[str, Any] = {"bucket": j, "c_j": int(sketch.counts[j])}
            if pmf is None:
                row.update({"method": "PYP-asymptotic", "mean": asymptotic})
            else:
                summary = summarize(pmf, args.ci_level)
                row.update(
                    {
                        "method": pmf.method.value,
                        "mean": summary.mean,
                        "median": summary.median,
                        "mode": summary.mode,
                        "credible_interval": list(summary.credible_interval),
                        "ci_level": summary.ci_level,
                    }
                )
                if args.full:
                    row["pmf"] = pmf_to_dict(pmf)
            cache[j] = row
        rows.append({"query": token, **cache[j]})
    logger.info(f"✓ {len(rows)} requête(s) estimée(s) ({len(cache)} bucket(s) distinct(s))")
    _emit({"n": sketch.total_n, "J": sketch.width_J, "rows": rows}, args.output)


def cmd_cardinality(args: argparse.Namespace) -> None:
    """Estimation de K_n et des l-cardinalités."""
    _require(args, "sketch")
    sketch = load_sketch(args.sketch)
    if args.prior == "dp":
        _require(args, "theta")
        estimate = dp_cardinality(sketch, DpParams(args.theta))
    else:
        _require(args, "alpha", "gamma")
        estimate = pyp_cardinality(
            sketch,
            PypParams(args.alpha, args.gamma),
            mode=args.mode,
            iters=args.iters,
            seed=args.seed,
            max_terms=args.max_terms,
            chunk_size=args.chunk_size,
        )
    logger.info(f"✓ k̂ = {estimate.k_hat:.6g} ({estimate.method.value})")
    _emit(cardinality_to_dict(estimate), args.output)


def cmd_traits(args: argparse.Namespace) -> None:
    """Loi a posteriori du niveau cumulé d'un trait."""
    _require(args, "c", "b", "n", "theta")
    data: Dict[str, Any] = {}
    if args.model == "bernoulli":
        spec = _crm_spec(args, default="stable-beta")
        kernel = BernoulliKernel(args.kernel)
        pmf = bernoulli_approx_posterior(
            args.c, args.b, args.n, spec, args.theta, args.width, kernel
        )
        if args.tv_bound:
            data["tv_bound"] = bernoulli_tv_bound(spec, args.theta, args.width)
    else:
        query = TraitQuery(args.c, args.b, args.a, args.n)
        if args.model == "poisson-gamma":
            pmf = poisson_gamma_posterior(query, args.theta, args.width)
        elif args.model == "poisson-gg":
            spec = _crm_spec(args, default="gg")
            params = IbpPoissonParams(args.theta, args.lambda_rate, spec)
            pmf = poisson_gg_posterior(query, params, args.width)
        else:
            spec = _crm_spec(args, default="gamma")
            pmf = poisson_general_posterior(query, args.theta, args.width, args.lambda_rate, spec)
    data["pmf"] = pmf_to_dict(pmf, summarize(pmf, args.ci_level))
    _emit(data, args.output)


def cmd_fit(args: argparse.Namespace) -> None:
    """Ajustement des hyperparamètres (DP, PYP sur préfixe, IBP Poisson-Gamma)."""
    if args.model == "dp":
        _require(args, "sketch")
        report = fit_dp_theta(load_sketch(args.sketch))
    elif args.model == "ibp":
        _require(args, "sketch", "n")
        report = fit_ibp_poisson_gamma(load_sketch(args.sketch), args.n)
    else:
        _require(args, "input", "width")
        prefix: List[bytes] = []
        for token in iter_token_file(args.input):
            if len(prefix) >= args.prefix_length:
                break
            prefix.append(token)
        report = fit_pyp_prefix(prefix, new_hash(args.seed, args.width))
    _emit(fit_to_dict(report), args.output)


def cmd_simulate(args: argparse.Namespace) -> None:
    """Génération d'un corpus synthétique (fichier de jetons + vérité terrain)."""
    _require(args, "n", "output")
    if args.model in ("dp", "pyp"):
        if args.model == "dp":
            _require(args, "theta")
            params: Any = DpParams(args.theta)
        else:
            _require(args, "alpha", "gamma")
            params = PypParams(args.alpha, args.gamma)
        tokens = [f"sym{label}" for label in sample_pyp_sequence(params, args.n, args.seed)]
    elif args.model == "zipf":
        ranks = sample_zipf(args.zipf_c, args.n, args.n_items, args.seed)
        tokens = [f"sym{rank}" for rank in ranks]
    else:
        _require(args, "theta")
        spec = _crm_spec(args, default="gamma")
        draw = sample_ibp_poisson_gamma(
            args.theta, args.lambda_rate, spec, args.n, args.truncation, args.seed
        )
        tokens = [
            f"trait{atom}"
            for point in draw.levels
            for atom, level in sorted(point.items())
            for _ in range(level)
        ]
    write_token_file(tokens, args.output)
    if args.truth:
        write_truth_csv(truth_table(tokens), args.truth)
    logger.info(f"✓ Corpus simulé : {len(tokens)} jetons ({args.model})")


def _bins_from_edges(edges: Optional[List[float]]) -> Optional[List[Tuple[float, float]]]:
    if edges is None:
        return None
    if len(edges) < 2:
        raise InvalidConfigurationError("--bin-edges : au moins deux bornes requises")
    return list(zip(edges[:-1], edges[1:]))


def cmd_evaluate(args: argparse.Namespace) -> None:
    """MAE stratifiée sur un corpus, pour plusieurs largeurs et graines."""
    _require(args, "input")
    tokens: List[bytes] = []
    for token in iter_token_file(args.input):
        tokens.append(token)
        if len(tokens) > args.max_tokens:
            break
    settings = EvaluationSettings(
        widths=args.widths,
        seeds=args.seeds,
        methods=args.methods,
        dp_params=DpParams(args.theta) if args.theta is not None else None,
        pyp_params=(
            PypParams(args.alpha, args.gamma)
            if args.alpha is not None and args.gamma is not None
            else None
        ),
        prefix_length=args.prefix_length,
        bins=_bins_from_edges(args.bin_edges),
        max_tokens=args.max_tokens,
    )
    reports, dump = evaluate_corpus(tokens, settings)
    export_eval_reports(reports, args.output_csv, args.output_json)
    if args.dump:
        write_dump_csv(dump, args.dump)
    for report in reports:
        cells = " ".join(
            f"({low:g},{high:g}]={mae:.4f}"
            for (low, high), mae in zip(report.bins, report.mae_per_bin)
        )
        print(f"{report.method} J={report.J} {cells}")


# ============================================================================
# PARSER
# ============================================================================


def _global_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    parser.add_argument("--config", metavar="PATH", help="Fichier de configuration key = value")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Logs DEBUG")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Logs WARNING uniquement")
    parser.add_argument("--log-json", action="store_true", help="Logs au format JSON")
    return parser


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """Construit le parser principal et retourne aussi les sous-parsers par nom."""
    parser = argparse.ArgumentParser(
        prog="sketchpost",
        allow_abbrev=False,
        parents=[_global_options()],
        description="Récupération bayésienne non paramétrique de fréquences et de cardinalités "
        "à partir d'un count sketch",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples:
  # Sketch d'un corpus avec J = 512 buckets
  python -m src.cli sketch -i corpus.txt -J 512 --seed 1 -o corpus.sketch.json

  # Fréquence a posteriori sous DP(θ = 10) pour une liste de requêtes
  python -m src.cli estimate -s corpus.sketch.json --query q.txt --prior dp --theta 10

  # MAE stratifiée, θ ajusté sur chaque sketch
  python -m src.cli evaluate -i corpus.txt --widths 128 512 --seeds 0 1 2 --output-csv mae.csv

Exit codes:
  0: Succès
  1: Erreur inattendue
  2: Usage ou configuration invalide
  3: Garde-fou numérique
  4: Erreur I/O
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMANDE")
    commands: Dict[str, argparse.ArgumentParser] = {}

    def add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        sub.add_argument("--seed", type=int, default=0, help="Graine (défaut: 0)")
        commands[name] = sub
        return sub

    sketch = add("sketch", cmd_sketch, "Construit le sketch d'un fichier de jetons")
    sketch.add_argument("-i", "--input", metavar="PATH", help="Fichier de jetons")
    sketch.add_argument("-J", "--width", type=int, help="Nombre de buckets J")
    sketch.add_argument("-o", "--output", metavar="PATH", help="Sketch JSON en sortie")

    estimate = add("estimate", cmd_estimate, "Loi a posteriori de la fréquence de requêtes")
    estimate.add_argument("-s", "--sketch", metavar="PATH", help="Sketch JSON")
    estimate.add_argument("--query", metavar="PATH", help="Fichier de jetons à interroger")
    estimate.add_argument("--bucket", type=int, nargs="+", help="Indice(s) de bucket")
    estimate.add_argument("--prior", choices=["dp", "pyp", "pk"], default="dp")
    estimate.add_argument("--mode", choices=["exact", "mc", "asymptotic"], default="exact")
    estimate.add_argument("--ci-level", type=float, default=0.95, help="Niveau de crédibilité")
    estimate.add_argument("--full", action="store_true", help="Inclut la loi complète")
    estimate.add_argument("--tilt-gamma", type=float, default=0.0, help="γ de l'inclinaison PK")
    estimate.add_argument("--tilt-beta", type=float, default=0.0, help="β de l'inclinaison PK")
    estimate.add_argument("-o", "--output", metavar="PATH", help="Résultat JSON")
    _add_prior_options(estimate)
    _add_crm_options(estimate, ["gamma", "gg"])
    _add_mc_options(estimate)

    cardinality = add("cardinality", cmd_cardinality, "Estimation de K_n et des l-cardinalités")
    cardinality.add_argument("-s", "--sketch", metavar="PATH", help="Sketch JSON")
    cardinality.add_argument("--prior", choices=["dp", "pyp"], default="dp")
    cardinality.add_argument("--mode", choices=["exact", "mc"], default="exact")
    cardinality.add_argument("-o", "--output", metavar="PATH", help="Résultat JSON")
    _add_prior_options(cardinality)
    _add_mc_options(cardinality)

    traits = add("traits", cmd_traits, "Loi a posteriori du niveau cumulé d'un trait")
    traits.add_argument(
        "--model",
        choices=["poisson-gamma", "poisson-gg", "poisson-general", "bernoulli"],
        default="poisson-gamma",
    )
    traits.add_argument("--c", type=int, help="Total du bucket")
    traits.add_argument("--b", type=int, help="Incrément du nouveau point")
    traits.add_argument("--a", type=int, default=1, help="Niveau du trait interrogé")
    traits.add_argument("--n", type=int, help="Nombre de points résumés")
    traits.add_argument("--theta", type=float, help="Masse θ de la CRM")
    traits.add_argument("-J", "--width", type=int, default=1, help="Nombre de buckets J")
    traits.add_argument("--lambda-rate", type=float, default=1.0, help="Taux λ des niveaux")
    traits.add_argument("--kernel", choices=[k.value for k in BernoulliKernel], default="printed")
    traits.add_argument("--tv-bound", action="store_true", help="Borne de variation totale")
    traits.add_argument("--ci-level", type=float, default=0.95, help="Niveau de crédibilité")
    traits.add_argument("-o", "--output", metavar="PATH", help="Résultat JSON")
    _add_crm_options(traits, ["gamma", "gg", "stable-beta"])

    fit = add("fit", cmd_fit, "Ajustement des hyperparamètres du prior")
    fit.add_argument("--model", choices=["dp", "pyp", "ibp"], default="dp")
    fit.add_argument("-s", "--sketch", metavar="PATH", help="Sketch JSON (dp, ibp)")
    fit.add_argument("-i", "--input", metavar="PATH", help="Fichier de jetons (pyp)")
    fit.add_argument("-J", "--width", type=int, help="Nombre de buckets (pyp)")
    fit.add_argument("--prefix-length", type=int, default=DEFAULT_PREFIX, help="Longueur n′")
    fit.add_argument("--n", type=int, help="Nombre de points (ibp)")
    fit.add_argument("-o", "--output", metavar="PATH", help="Résultat JSON")

    simulate = add("simulate", cmd_simulate, "Génère un corpus synthétique")
    simulate.add_argument("--model", choices=["dp", "pyp", "zipf", "ibp"], default="dp")
    simulate.add_argument("--n", type=int, help="Nombre de jetons (ou de points pour ibp)")
    simulate.add_argument("--zipf-c", type=float, default=1.3, help="Exposant de Zipf (> 1)")
    simulate.add_argument("--n-items", type=int, help="Support de Zipf (infini par défaut)")
    simulate.add_argument("--lambda-rate", type=float, default=1.0, help="Taux λ (ibp)")
    simulate.add_argument("--truncation", type=int, default=10_000, help="Troncature (ibp)")
    simulate.add_argument("-o", "--output", metavar="PATH", help="Fichier de jetons en sortie")
    simulate.add_argument("--truth", metavar="PATH", help="CSV des fréquences vraies")
    _add_prior_options(simulate)
    _add_crm_options(simulate, ["gamma", "gg", "stable-beta"])

    evaluate = add("evaluate", cmd_evaluate, "MAE stratifiée par fréquence vraie")
    evaluate.add_argument("-i", "--input", metavar="PATH", help="Corpus (un jeton par ligne)")
    evaluate.add_argument("--widths", type=int, nargs="+", default=[128], help="Largeurs J")
    evaluate.add_argument("--seeds", type=int, nargs="+", default=[0], help="Graines de hachage")
    evaluate.add_argument(
        "--methods", nargs="+", choices=list(ESTIMATORS), default=["dp"], help="Estimateurs"
    )
    evaluate.add_argument("--prefix-length", type=int, default=DEFAULT_PREFIX, help="Longueur n′")
    evaluate.add_argument("--bin-edges", type=float, nargs="+", help="Bornes des intervalles")
    evaluate.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS)
    evaluate.add_argument("--output-csv", metavar="PATH", help="Rapport CSV")
    evaluate.add_argument("--output-json", metavar="PATH", help="Rapport JSON")
    evaluate.add_argument("--dump", metavar="PATH", help="Export CSV par symbole")
    _add_prior_options(evaluate)

    return parser, commands


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", force=True)
    if args.log_json:
        configure_json_logging(level)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Exécute une ligne de commande et retourne le code de sortie.

    Workflow:
        1. Options globales (--config, verbosité) lues en premier
        2. Défauts de la sous-commande: environnement puis fichier
        3. Parsing complet (les options explicites priment)
        4. Délégation au gestionnaire de la sous-commande
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    early, rest = _global_options().parse_known_args(argv)
    _configure_logging(early)

    try:
        config = load_config(early.config) if early.config else None
        command = next((token for token in rest if token in commands), None)
        if command is not None:
            apply_defaults(commands[command], command, config)
    except InvalidConfigurationError as e:
        logger.error(f"Configuration invalide : {e}")
        return EXIT_USAGE
    except (IOError, OSError) as e:
        logger.error(f"Erreur I/O : {e}")
        return EXIT_IO

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    try:
        args.handler(args)
        return EXIT_OK

    except InvalidConfigurationError as e:
        logger.error(f"Configuration invalide : {e}")
        return EXIT_USAGE

    except (TractabilityError, DegenerateEstimateError, AccuracyError, InsufficientDataError) as e:
        logger.error(f"{type(e).__name__} : {e}")
        return EXIT_NUMERIC

    except SketchPosteriorError as e:
        logger.error(f"Erreur : {e}")
        return EXIT_USAGE

    except (IOError, OSError) as e:
        logger.error(f"Erreur I/O : {e}")
        return EXIT_IO

    except Exception as e:
        logger.exception(f"Erreur inattendue : {e}")
        return EXIT_UNEXPECTED


def main() -> NoReturn:
    """Point d'entrée principal (script sketchpost)."""
    sys.exit(run())


if __name__ == "__main__":
    main()
