"""Numerical verification of zeta-factorization formulas and meta-functional equations."""

from .errors import ZetaMetaError
from .zeta_core import DEFAULT_CONFIG, EvalConfig, hardy_z, z_tilde_sq, zeta

__all__ = ["DEFAULT_CONFIG", "EvalConfig", "ZetaMetaError", "hardy_z", "z_tilde_sq", "zeta"]
__version__ = "0.1.0"
