"""Gamma-family special functions with explicit domain checks.

Thin, validated wrappers: the real log-gamma comes from :func:`math.lgamma`,
the complex log-gamma and the polygammas from :mod:`scipy.special`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "ln_gamma_real",
    "ln_gamma_complex",
    "ln_gamma_complex_any",
    "digamma",
    "trigamma",
]


def _check_positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} requires finite x > 0, got {x!r}")
    return arr


def _scalar_or_array(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def ln_gamma_real(x):
    """Natural log of Gamma(x) for x > 0 (scalar or array)."""
    arr = _check_positive(x, "ln_gamma_real")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return special.gammaln(arr)


def ln_gamma_complex(z):
    """Principal-branch log Gamma(z) on the right half plane Re(z) > 0."""
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)) or np.any(arr.real <= 0):
        raise DomainError(f"ln_gamma_complex requires Re(z) > 0, got {z!r}")
    out = special.loggamma(arr)
    return complex(out) if arr.ndim == 0 else out


def ln_gamma_complex_any(z):
    """log Gamma(z) on the whole plane minus the poles (reflection included).

    Contour-deformation inversion samples the transform far into the left
    half plane, so the Laplace transform of W needs this wider version.
    """
    arr = np.asarray(z, dtype=complex)
    bad = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(bad):
        raise DomainError("ln_gamma_complex_any evaluated at a pole of Gamma")
    out = special.loggamma(arr)
    return complex(out) if arr.ndim == 0 else out


def digamma(x):
    """Psi(x) = d/dx log Gamma(x), x > 0."""
    arr = _check_positive(x, "digamma")
    return _scalar_or_array(special.psi(arr), x)


def trigamma(x):
    """Psi'(x), x > 0."""
    arr = _check_positive(x, "trigamma")
    return _scalar_or_array(special.polygamma(1, arr), x)
