"""
derivlab - Derivative Zeros Laboratory

Desk-scale numerical laboratory for the radial distribution of zeros of the
derivative of characteristic polynomials of random unitary matrices, and the
horizontal distribution of zeros of zeta'. Every closed-form expansion is
checked against Monte Carlo sampling and brute-force oracles.
"""

__version__ = "1.0.0"
__author__ = "derivlab Team"
__description__ = "Zeros of derivatives of unitary characteristic polynomials and of zeta"
