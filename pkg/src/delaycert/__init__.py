"""Frequency-domain certificates for Lur'e delay systems.

Root counting, frequency sweeps for the circle and Smith conditions, a
method-of-steps integrator, and the Goodwin delay chain case study.
"""

from .core import (GOODWIN_SLOPE, DelayMeasure, DelaySystem, Nonlinearity, QuadForm,
                   lipschitz_form, sector_form, total_variation)
from .errors import DelayCertError
from .freqcheck import Certificate, certify, circle_check, smith_check, verify_frequency_condition
from .spectrum import count_roots_right_of
from .transfer import eval_transfer

__all__ = [
    "GOODWIN_SLOPE", "DelayMeasure", "DelaySystem", "Nonlinearity", "QuadForm",
    "lipschitz_form", "sector_form", "total_variation", "DelayCertError", "Certificate",
    "certify", "circle_check", "smith_check", "verify_frequency_condition",
    "count_roots_right_of", "eval_transfer",
]

__version__ = "0.1.0"
