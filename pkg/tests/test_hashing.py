"""Tests unitaires pour le hachage et la construction de sketchs (src.hashing).

Test coverage:
    - Déterminisme de (seed, J) → fonction, y compris entre processus
    - Uniformité des buckets et probabilité de collision ≈ 1/J
    - Construction de sketch (flux, fichier, fusion)
    - Flux de référence reproduisant un vecteur de compteurs imposé
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from src.hashing import (
    REFERENCE_SCENARIOS,
    hash_key,
    iter_token_file,
    merge_sketches,
    new_hash,
    sketch_file,
    sketch_stream,
    stream_for_counts,
)
from src.models import MERSENNE_PRIME_61
from src.validation import InvalidConfigurationError, InvalidKeyError, InvalidWidthError


class TestNewHash:
    """Tests pour new_hash()."""

    def test_deterministic(self) -> None:
        """Test même (seed, J) → même fonction."""
        assert new_hash(7, 10) == new_hash(7, 10)
        assert new_hash(7, 10) != new_hash(8, 10)

    def test_coefficient_ranges(self) -> None:
        """Test 1 ≤ a < p et 0 ≤ b < p."""
        for seed in range(20):
            h = new_hash(seed, 16)
            assert 1 <= h.coeff_a < MERSENNE_PRIME_61
            assert 0 <= h.coeff_b < MERSENNE_PRIME_61

    def test_seed_reduced_modulo_2_64(self) -> None:
        """Test graines négatives ou > 2^64 réduites modulo 2^64."""
        assert new_hash(-1, 4) == new_hash(2**64 - 1, 4)
        assert new_hash(2**64 + 5, 4) == new_hash(5, 4)

    def test_invalid_width(self) -> None:
        """Test J = 0 rejeté."""
        with pytest.raises(InvalidWidthError):
            new_hash(1, 0)


class TestHashKey:
    """Tests pour hash_key()."""

    def test_range(self) -> None:
        """Test bucket dans [0, J−1]."""
        h = new_hash(3, 7)
        for i in range(500):
            assert 0 <= hash_key(h, f"k{i}") < 7

    def test_str_and_bytes_agree(self) -> None:
        """Test une chaîne est hachée comme son encodage UTF-8."""
        h = new_hash(11, 101)
        assert hash_key(h, "café") == hash_key(h, "café".encode("utf-8"))

    def test_single_bucket(self) -> None:
        """Test J = 1 → toujours 0."""
        assert hash_key(new_hash(7, 1), b"chat") == 0

    def test_empty_key_rejected(self) -> None:
        """Test clé vide rejetée."""
        with pytest.raises(InvalidKeyError):
            hash_key(new_hash(1, 4), b"")

    def test_stable_across_processes(self) -> None:
        """Test même bucket dans un interpréteur neuf."""
        h = new_hash(42, 1000)
        expected = [hash_key(h, f"mot{i}") for i in range(20)]
        code = (
            "from src.hashing import hash_key, new_hash; "
            "h = new_hash(42, 1000); "
            "print(','.join(str(hash_key(h, f'mot{i}')) for i in range(20)))"
        )
        result = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, check=True
        )
        assert [int(v) for v in result.stdout.strip().split(",")] == expected

    def test_uniform_buckets(self) -> None:
        """Test uniformité des buckets (χ², 10^5 clés, J = 10)."""
        h = new_hash(2024, 10)
        counts = np.bincount([hash_key(h, f"tok{i}") for i in range(100_000)], minlength=10)
        assert stats.chisquare(counts).pvalue > 1e-4

    def test_collision_probability(self) -> None:
        """Test Pr[h(x) = h(y)] ≈ 1/J sur la famille (2000 graines)."""
        J, seeds = 10, 2000
        collisions = sum(
            hash_key(new_hash(seed, J), b"alpha") == hash_key(new_hash(seed, J), b"beta")
            for seed in range(seeds)
        )
        expected = seeds / J
        assert abs(collisions - expected) < 5 * np.sqrt(expected * (1 - 1 / J))


class TestSketchConstruction:
    """Tests pour sketch_stream(), sketch_file(), merge_sketches()."""

    def test_stream(self) -> None:
        """Test compteurs et taille du flux."""
        sketch = sketch_stream([b"x", b"x", b"y"], new_hash(7, 1))
        assert int(sketch.counts[0]) == 3
        assert sketch.total_n == 3

    def test_empty_stream(self) -> None:
        """Test flux vide → sketch nul."""
        sketch = sketch_stream([], new_hash(0, 8))
        assert sketch.total_n == 0
        assert not np.any(sketch.counts)

    def test_sum_invariant(self) -> None:
        """Test Σ c_j = n et graine conservée."""
        h = new_hash(5, 32)
        tokens = [f"w{i % 97}" for i in range(1000)]
        sketch = sketch_stream(tokens, h)
        assert int(sketch.counts.sum()) == 1000
        assert sketch.hash_seed == h.seed

    def test_file_skips_blank_lines(self) -> None:
        """Test fichier: lignes vides ignorées, fin de ligne retirée."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "tokens.txt"
            path.write_bytes(b"a\n\nb\r\na\n")
            assert list(iter_token_file(path)) == [b"a", b"b", b"a"]
            h = new_hash(3, 4)
            assert sketch_file(path, h).same_as(sketch_stream([b"a", b"b", b"a"], h))

    def test_missing_file(self) -> None:
        """Test fichier absent → erreur I/O."""
        with pytest.raises(OSError):
            sketch_file("/nonexistent/tokens.txt", new_hash(0, 4))

    def test_merge(self) -> None:
        """Test fusion = sketch de la concaténation."""
        h = new_hash(9, 16)
        first, second = [f"a{i}" for i in range(50)], [f"b{i % 7}" for i in range(30)]
        merged = merge_sketches(sketch_stream(first, h), sketch_stream(second, h))
        assert merged.same_as(sketch_stream(first + second, h))

    def test_merge_incompatible(self) -> None:
        """Test fusion refusée si J ou graine diffèrent."""
        a = sketch_stream(["x"], new_hash(1, 4))
        with pytest.raises(InvalidConfigurationError):
            merge_sketches(a, sketch_stream(["x"], new_hash(2, 4)))
        with pytest.raises(InvalidConfigurationError):
            merge_sketches(a, sketch_stream(["x"], new_hash(1, 8)))


class TestStreamForCounts:
    """Tests pour stream_for_counts()."""

    @pytest.mark.parametrize("name", sorted(REFERENCE_SCENARIOS))
    def test_counts_match_construction(self, name: str) -> None:
        """Test le sketch du flux reproduit le scénario (J = 10, n = 50)."""
        counts = REFERENCE_SCENARIOS[name]
        h = new_hash(1, 10)
        tokens = stream_for_counts(counts, h)
        assert len(tokens) == 50
        assert len(set(tokens)) == 50
        assert sketch_stream(tokens, h).counts.tolist() == counts

    def test_wrong_length(self) -> None:
        """Test nombre de compteurs ≠ J rejeté."""
        with pytest.raises(InvalidConfigurationError):
            stream_for_counts([1, 2], new_hash(1, 10))
