"""Journal prestige ranking over citation networks."""

__version__ = "0.1.0"
