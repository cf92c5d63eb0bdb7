"""Polynomial-coded distributed matrix multiplication over a prime field.

Four coding schemes (one univariate, two bivariate, one tri-variate) trade
extra worker computation against upload/download volume when a matrix
product is split across unreliable workers.  The package provides exact
encode/compute/decode, the closed-form overhead model, a Monte Carlo
straggler latency simulator, a constrained partition-scheme optimizer, a
local concurrent master/worker runtime, and a CLI front end.
"""

__version__ = "0.1.0"
