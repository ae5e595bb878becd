"""Derived F-zips over finite fields: filtered complexes, spectral
sequences, Frobenius-twisted graded equivalences and their classification."""
from .gf import FieldError, FieldSpec, make_field

__all__ = ["FieldError", "FieldSpec", "make_field"]
__version__ = "0.1.0"
