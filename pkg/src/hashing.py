"""Hachage fortement universel et construction du count sketch.

La famille utilisée est ((a·enc(key) + b) mod p) mod J avec p = 2^61 − 1,
où enc est un mélange BLAKE2b à clé (la graine) ramené sur 61 bits. Les
coefficients (a, b) sont tirés d'un générateur Philox initialisé par la
graine: (seed, J) détermine entièrement la fonction.

Functions:
    new_hash: Crée une fonction de hachage déterministe pour (seed, J)
    hash_key: Bucket d'une clé
    sketch_stream: Construit un sketch en une passe sur un flux de jetons
    sketch_file: Construit un sketch depuis un fichier de jetons (une ligne = un jeton)
    merge_sketches: Somme exacte de deux sketchs partageant (J, graine)
    stream_for_counts: Flux synthétique reproduisant un vecteur de compteurs imposé
"""

import functools
import hashlib
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from src.models import MERSENNE_PRIME_61, HashFunction, Sketch
from src.validation import InvalidConfigurationError, InvalidKeyError, validate_width

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1

Token = Union[bytes, str]

# Vecteurs de compteurs des quatre scénarios de référence (J = 10, n = 50)
REFERENCE_SCENARIOS: Dict[str, List[int]] = {
    "C1": [5] * 10,
    "C2": [14, 10, 7, 5, 4, 3, 2, 2, 2, 1],
    "C3": [10, 9, 8, 7, 5, 4, 3, 2, 1, 1],
    "C4": [9, 9, 9, 5, 5, 5, 5, 1, 1, 1],
}


def new_hash(seed: int, J: int) -> HashFunction:
    """Crée la fonction de hachage associée à (seed, J).

    Args:
        seed: Graine 64 bits (réduite modulo 2^64)
        J: Nombre de buckets ≥ 1

    Returns:
        HashFunction avec 1 ≤ a < p et 0 ≤ b < p

    Raises:
        InvalidWidthError: Si J < 1

    Example:
        >>> new_hash(7, 10) == new_hash(7, 10)
        True
    """
    validate_width(J)
    seed64 = seed & _SEED_MASK
    rng = np.random.Generator(np.random.Philox(seed64))
    p = MERSENNE_PRIME_61
    coeff_a = int(rng.integers(1, p, dtype=np.int64))
    coeff_b = int(rng.integers(0, p, dtype=np.int64))
    return HashFunction(prime_modulus=p, coeff_a=coeff_a, coeff_b=coeff_b, width_J=J, seed=seed64)


def _as_bytes(key: Token) -> bytes:
    if isinstance(key, str):
        return key.encode("utf-8")
    return bytes(key)


@functools.lru_cache(maxsize=65536)
def _encode_key(key: bytes, seed: int, prime: int) -> int:
    """Mélange BLAKE2b 64 bits à clé, réduit dans [0, p)."""
    digest = hashlib.blake2b(key, digest_size=8, key=seed.to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little") % prime


def hash_key(h: HashFunction, key: Token) -> int:
    """Bucket d'une clé: ((a·enc(key) + b) mod p) mod J.

    Args:
        h: Fonction de hachage
        key: Clé non vide (bytes, ou str encodée en UTF-8)

    Returns:
        Indice de bucket dans [0, J−1]

    Raises:
        InvalidKeyError: Si la clé est vide

    Example:
        >>> hash_key(new_hash(7, 1), b"chat")
        0
    """
    raw = _as_bytes(key)
    if not raw:
        raise InvalidKeyError("Clé vide : impossible de hacher une chaîne d'octets vide")
    encoded = _encode_key(raw, h.seed, h.prime_modulus)
    return ((h.coeff_a * encoded + h.coeff_b) % h.prime_modulus) % h.width_J


def sketch_stream(tokens: Iterable[Token], h: HashFunction) -> Sketch:
    """Construit le sketch d'un flux en une seule passe.

    Mémoire: les J compteurs (plus un cache borné d'encodages).

    Args:
        tokens: Flux de jetons non vides
        h: Fonction de hachage

    Returns:
        Sketch avec total_n = nombre de jetons

    Example:
        >>> s = sketch_stream([b"x", b"x", b"y"], new_hash(7, 1))
        >>> int(s.counts[0]), s.total_n
        (3, 3)
    """
    counts = np.zeros(h.width_J, dtype=np.int64)
    total = 0
    for token in tokens:
        counts[hash_key(h, token)] += 1
        total += 1
    return Sketch(counts, total_n=total, width_J=h.width_J, hash_seed=h.seed)


def iter_token_file(path: Union[str, Path]) -> Iterable[bytes]:
    """Itère les jetons d'un fichier texte (une ligne = un jeton, lignes vides ignorées)."""
    with open(path, "rb") as handle:
        for line in handle:
            token = line.rstrip(b"\r\n")
            if token:
                yield token


def sketch_file(path: Union[str, Path], h: HashFunction) -> Sketch:
    """Construit le sketch d'un fichier de jetons.

    Raises:
        IOError: Si le fichier est illisible
    """
    sketch = sketch_stream(iter_token_file(path), h)
    logger.info(
        f"✓ Sketch construit : n = {sketch.total_n}, J = {sketch.width_J}, "
        f"remplissage = {sketch.fill_ratio:.1%}"
    )
    return sketch


def merge_sketches(first: Sketch, second: Sketch) -> Sketch:
    """Somme deux sketchs construits avec la même fonction de hachage.

    Raises:
        InvalidConfigurationError: Si J ou la graine diffèrent
    """
    if first.width_J != second.width_J or first.hash_seed != second.hash_seed:
        raise InvalidConfigurationError(
            f"Sketchs incompatibles : (J={first.width_J}, seed={first.hash_seed}) vs "
            f"(J={second.width_J}, seed={second.hash_seed})"
        )
    return Sketch(
        first.counts + second.counts,
        total_n=first.total_n + second.total_n,
        width_J=first.width_J,
        hash_seed=first.hash_seed,
    )


def stream_for_counts(
    counts: Sequence[int], h: HashFunction, prefix: str = "sym", max_tries: int = 1_000_000
) -> List[bytes]:
    """Construit un flux de jetons distincts dont le sketch vaut `counts`.

    Les clés f"{prefix}-{i}" sont essayées dans l'ordre et retenues tant que
    leur bucket a encore besoin de jetons.

    Raises:
        InvalidConfigurationError: Si len(counts) ≠ J ou si la recherche échoue
    """
    if len(counts) != h.width_J:
        raise InvalidConfigurationError(
            f"{len(counts)} compteurs demandés pour J = {h.width_J}"
        )
    missing = list(counts)
    remaining = sum(missing)
    tokens: List[bytes] = []
    for i in range(max_tries):
        if remaining == 0:
            break
        key = f"{prefix}-{i}".encode("utf-8")
        bucket = hash_key(h, key)
        if missing[bucket] > 0:
            missing[bucket] -= 1
            remaining -= 1
            tokens.append(key)
    if remaining:
        raise InvalidConfigurationError(f"Flux introuvable en {max_tries} essais")
    return tokens
