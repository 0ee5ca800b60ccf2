"""Quantum versus noncontextual bounds for non-demolition measurement tasks.

Modules
-------
core      2x2 Hermitian algebra, tolerances, low-dimensional maximization
ontic     finite noncontextual ontological models and the USD construction
bounds    closed-form task bounds and the regime classifier
maxconf   maximal-confidence discrimination with dual certificates
optics    Jones-calculus model of the displaced-Sagnac setup
oracle    brute-force validators
cli       command-line front end
"""

__version__ = "0.1.0"

from .core import DEFAULT_TOL, Tolerances  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = ["BACKEND", "DEFAULT_TOL", "Tolerances", "__version__"]
