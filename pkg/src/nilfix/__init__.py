"""Fixed-point indices of planar vector fields and local flows, exact
nilpotent Lie-algebra computations, and common-zero searches for
Lie-algebra actions on surfaces."""

__version__ = "0.1.0"
