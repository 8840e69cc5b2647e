"""Learning harness over the bowtienet feature table."""

from .data import DesignMatrix, FeatureTable, Filter, build_design, load_features
from .models import ClassificationMetrics, RegressionMetrics, classify_expansion, regress_delta
from .report import FeatureReport, correlation_table, feature_report, mutual_information
from .sffs import sffs

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
