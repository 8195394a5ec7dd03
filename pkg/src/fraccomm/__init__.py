"""Fractional derivatives, commutator forms and square functions on grids."""

__version__ = "0.1.0"
