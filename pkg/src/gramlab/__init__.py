"""Robust Gram/covariance estimation and heavy-tailed least squares.

The package provides bounded-influence directional estimators of the
energy quadratic form E<theta, X>^2, matrix estimators built on top of
them, robust least squares via an extended-variable Gram matrix,
closed-form non-asymptotic certificate quantities, seeded scenario
generators, and a Monte Carlo harness that checks the certificates and
convergence rates empirically.
"""

__version__ = "0.1.0"
