"""Pseudospectral simulator and Besov-space analysis toolkit for a
non-isospectral two-component cubic Camassa-Holm system on the unit torus."""

__version__ = "0.1.0"
