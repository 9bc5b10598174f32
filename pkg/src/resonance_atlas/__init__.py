"""Complex-energy resonances of a two-level system coupled to a continuum."""

__version__ = "0.1.0"
