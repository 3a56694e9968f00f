"""Perturbed Yamabe Laplacians on the conformally flat 4-torus, characteristic
elements of intersection forms, and Yamabe-invariant bounds for
``k CP2 # m (S1 x S3)``."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
