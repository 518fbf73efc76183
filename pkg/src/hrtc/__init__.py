"""Type checking for higher-rank, impredicative and second-order types."""

__version__ = "0.1.0"
