"""Generalized Lyapunov exponents of random SL(d) products from renewing flows."""

__version__ = "0.1.0"
