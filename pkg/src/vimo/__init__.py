"""Variational inequalities with multivalued operators in R^n."""

__version__ = "0.1.0"
