"""Batched polynomial roots: companion-matrix eigenvalues plus one Newton step."""

from __future__ import annotations

import numpy as np


def companion_roots(coeffs) -> np.ndarray:
    """Roots of polynomials with coefficients ``coeffs[..., :]`` (highest degree first).

    Works on a stack of polynomials of equal degree; returns shape
    ``(..., degree)``.  The leading coefficient must be nonzero.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape[-1] < 2:
        raise ValueError("need a polynomial of degree >= 1")
    lead = c[..., :1]
    if np.any(lead == 0):
        raise ValueError("leading coefficient vanishes")
    monic = c[..., 1:] / lead
    d = monic.shape[-1]
    batch = monic.shape[:-1]
    comp = np.zeros(batch + (d, d), dtype=complex)
    comp[..., 0, :] = -monic
    if d > 1:
        idx = np.arange(d - 1)
        comp[..., idx + 1, idx] = 1.0
    r = np.linalg.eigvals(comp)
    return newton_polish(c, r)


def polyval(coeffs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value and derivative by Horner, broadcasting ``coeffs[..., None, :]`` over roots."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for k in range(coeffs.shape[-1]):
        dp = dp * z + p
        p = p * z + coeffs[..., k:k + 1]
    return p, dp


def newton_polish(coeffs: np.ndarray, r: np.ndarray) -> np.ndarray:
    p, dp = polyval(coeffs, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(dp != 0, p / dp, 0)
    new = r - step
    # keep the polished root only where it actually reduced the residual
    p_new, _ = polyval(coeffs, new)
    ok = np.isfinite(new) & (np.abs(p_new) <= np.abs(p))
    return np.where(ok, new, r)
