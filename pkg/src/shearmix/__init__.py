"""Annealed negative-regularity mixing by random alternating-shear maps of the 2-torus."""

__version__ = "0.1.0"
