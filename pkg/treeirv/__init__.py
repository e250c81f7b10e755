"""Instant-runoff voting on trees: exclusion zones, the Kill test and distortion"""

__version__ = "1.0.0"
