"""
Majority Lab - majority dynamics on redrawn Erdős–Rényi graphs.
"""

__version__ = "1.0.0"
