"""Singular moduli, exact norms of j - j0, S-unit surveys and effective
height bounds for imaginary quadratic orders."""

from .grosslattice import gross_form, gross_form_j0, represents, verify_witness
from .heights import compute_F, find_threshold, majorants
from .modfun import (hilbert_class_polynomial, norm_difference,
                     resultant_norm, weil_height_singular)
from .quadclass import class_number, decompose, is_discriminant, reduced_forms
from .survey import check_nice_pair, scan, table

__version__ = "0.1.0"

__all__ = [
    "check_nice_pair", "class_number", "compute_F", "decompose",
    "find_threshold", "gross_form", "gross_form_j0",
    "hilbert_class_polynomial", "is_discriminant", "majorants",
    "norm_difference", "reduced_forms", "represents", "resultant_norm",
    "scan", "table", "verify_witness", "weil_height_singular",
]
