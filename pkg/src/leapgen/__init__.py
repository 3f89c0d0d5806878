"""Leap generators: exact-size, asymptotically uniform samplers for
composition schemes, with exact total-variation analysis."""

__version__ = "0.1.0"

from .leap import (  # noqa: E402
    CLASSES,
    SchemeSpec,
    get_scheme,
    leap_sample,
    rejection_leap_sample,
    single_pass_sample,
)
from .objects import LatticeWalk, RootedTree  # noqa: E402

__all__ = [
    "CLASSES",
    "LatticeWalk",
    "RootedTree",
    "SchemeSpec",
    "get_scheme",
    "leap_sample",
    "rejection_leap_sample",
    "single_pass_sample",
]
