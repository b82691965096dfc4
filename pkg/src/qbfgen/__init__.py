"""Random k-CNF, 2QBF and disjunctive-program generators with brute-force oracles."""

__version__ = "0.1.0"
