"""Multi-objective binary linear programming toolkit.

Computes exact nondominated frontiers of binary programs with several
linear objectives via a criterion-space search, extracts instance features,
and trains a multiclass SVM that picks the projection objective expected to
minimize solution effort.
"""

__version__ = "0.1.0"
