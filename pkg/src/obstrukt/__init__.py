"""Brauer-Manin obstruction certificates for 2-coverings of genus-2 Jacobians."""

__version__ = "0.1.0"
