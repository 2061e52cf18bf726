"""Stochastic first-order methods under gradient dominance, with hard instances and checkers."""

__version__ = "0.1.0"
