"""Semiclassical spectra of Toeplitz operators with discrete wells.

Submodules
----------
fockspace    Bargmann-Fock model: monomial basis, ladder and anti-Wick operators.
modelwell    Quadratic model wells and their exact or truncated spectra.
torus        Magnetic field on the flat 2-torus and its discretised Laplacians.
toeplitz     Toeplitz compressions, algebra defects and localisation diagnostics.
asymptotics  Parameter sweeps, power-law fits and verdicts.
cli          Command-line entry point.
"""
__version__ = "0.1.0"
