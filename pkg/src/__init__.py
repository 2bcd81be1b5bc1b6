"""
Nested concentric resonators.

Computes the subwavelength resonant frequencies and eigenmodes of N-layer
high-contrast concentric balls, compares them with closed-form asymptotic
formulas, and writes tables and figures as data files and plots.
"""

__version__ = "1.0.0"
