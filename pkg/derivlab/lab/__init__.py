"""
Numerical modules: ensembles, derivative roots, closed-form expansions,
conditioned sampling, zeta zeros, and the histogram and CSV layer.
"""
