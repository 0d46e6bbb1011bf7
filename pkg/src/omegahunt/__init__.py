"""omegahunt: exact lattice-point error terms and resonance experiments.

Subpackages by task:

- :mod:`omegahunt.sieve` - exact d(n), r(n) tables and O(sqrt x) summatory sums
- :mod:`omegahunt.error_terms` - exact and series forms of the two error terms
- :mod:`omegahunt.kernel` - one-sided Gamma kernel, Fourier transform, sector checks
- :mod:`omegahunt.resonator` - product resonator and its coefficient expansion
- :mod:`omegahunt.verifier` - resonance inequality certification
- :mod:`omegahunt.extremal` - order statistics of d(n) n^(-3/4) and r(n) n^(-3/4)
- :mod:`omegahunt.hunter` - guided search for large-value witnesses
- :mod:`omegahunt.cli` - command-line interface
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    DomainError,
    HypothesisError,
    OmegaHuntError,
    RangeError,
    SizeError,
    StoreError,
    ValidationError,
)

__all__ = [
    "__version__",
    "OmegaHuntError",
    "DomainError",
    "SizeError",
    "RangeError",
    "AccuracyError",
    "HypothesisError",
    "ValidationError",
    "StoreError",
]
