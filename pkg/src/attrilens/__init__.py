"""attrilens: explainable employee-attrition prediction pipeline."""

__version__ = "0.1.0"
