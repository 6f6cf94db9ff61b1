"""Numerical toolkit for parity-pseudo-Hermitian oscillators.

Builds truncated Fock-space matrices for a two-mode oscillator with
imaginary linear couplings and its first-order noncommutative extension,
constructs the positive metric ``eta_plus = parity @ V``, and checks the
ladder algebra, real spectra and metric-unitary evolution.
"""

__version__ = "0.1.0"
