"""Rauzy-Veech and Zorich induction for interval exchanges: classes,
cocycle matrices, symplectic structure, Lyapunov exponents and
monoid witnesses."""
from .errors import InvalidInput, NotFound, ZorichError
from .perm import Alphabet, Permutation

__all__ = ["Alphabet", "InvalidInput", "NotFound", "Permutation", "ZorichError"]
__version__ = "0.1.0"
