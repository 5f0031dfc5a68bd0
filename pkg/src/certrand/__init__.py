"""Certified randomness from random-circuit sampling: simulation, scoring,
entropy certification, extraction, and cost analysis at desk scale."""

__version__ = "0.1.0"
