"""Exact quadratic-form tools over Q, Q_p and imaginary quadratic fields, and
rational lines on cubic hypersurfaces built from them."""

__version__ = "0.1.0"
