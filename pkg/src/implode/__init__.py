"""Numerical toolkit for hyperkahler implosion quivers of SU(n)."""

__version__ = "0.1.0"
