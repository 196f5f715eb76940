"""Exact and Monte Carlo verification of constructions from ergodic theory.

Markov intertwiners between Bernoulli factors, sequence entropy along
subsequence schemes, rank-one cutting and stacking, and Poisson suspensions.
"""

__version__ = "0.1.0"
