"""Sparse recovery by l1/l2 ratio minimization, with baselines, certificates
and an experiment harness."""

__version__ = "0.1.0"
