"""Tests unitaires pour la télémétrie (src.telemetry).

Test coverage:
    - track_performance: succès (DEBUG), échec (ERROR + exception relancée), dimensions du sketch
    - log_metric: contexte structuré
"""

import logging

import pytest

from src.models import Sketch
from src.telemetry import log_metric, track_performance


@track_performance("carré")
def _square(x: float) -> float:
    return x * x


@track_performance("masse_totale")
def _total_mass(scale: float, sketch: Sketch) -> float:
    return scale * sketch.total_n


@track_performance("échec")
def _fail() -> None:
    raise ValueError("boom")


class TestTrackPerformance:
    """Tests pour track_performance()."""

    def test_success(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test résultat inchangé et durée journalisée."""
        with caplog.at_level(logging.DEBUG, logger="src.telemetry"):
            assert _square(3.0) == 9.0
        record = caplog.records[-1]
        assert record.levelno == logging.DEBUG
        assert record.status == "success"
        assert record.duration_seconds >= 0
        assert not hasattr(record, "sketch_J")
        assert record.getMessage().startswith("Calcul carré : ")

    def test_sketch_dimensions(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test J et n du sketch passé en argument dans le contexte et le message."""
        with caplog.at_level(logging.DEBUG, logger="src.telemetry"):
            assert _total_mass(0.5, sketch=Sketch.from_counts([3, 0, 5])) == 4.0
        record = caplog.records[-1]
        assert (record.sketch_J, record.sketch_n) == (3, 8)
        assert "(J=3, n=8)" in record.getMessage()

    def test_failure(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test exception relancée et journalisée."""
        with caplog.at_level(logging.ERROR, logger="src.telemetry"):
            with pytest.raises(ValueError, match="boom"):
                _fail()
        record = caplog.records[-1]
        assert record.status == "error"
        assert record.error_type == "ValueError"
        assert "Calcul échec interrompu" in record.getMessage()

    def test_preserves_name(self) -> None:
        """Test métadonnées de la fonction conservées."""
        assert _square.__name__ == "_square"


class TestLogMetric:
    """Tests pour log_metric()."""

    def test_context(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test nom, valeur et tags dans le contexte."""
        with caplog.at_level(logging.INFO, logger="src.telemetry"):
            log_metric("mae", 0.25, tags={"J": "128"})
        record = caplog.records[-1]
        assert record.metric_name == "mae"
        assert record.value == 0.25
        assert record.tags == {"J": "128"}
        assert "mae=0.25" in record.getMessage()
