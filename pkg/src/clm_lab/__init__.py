"""Finite-module measures, Cohen-Lenstra-Martinet style averages and the
arithmetic used to test them: L-series identities, Bernoulli numbers,
class numbers of quadratic fields and cyclic quartic field counts."""

__version__ = "0.1.0"
