"""Learn zone preferences from historical routes, predict stop sequences."""

__version__ = "0.1.0"
