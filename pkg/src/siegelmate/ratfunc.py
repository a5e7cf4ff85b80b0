"""Rational maps N(z)/D(z) on the Riemann sphere, stored as coefficient arrays.

Infinity is never represented by a float; a point near infinity is handled
in the chart ``w = 1/z`` via :meth:`RatFunc.inf_chart`.
"""

from __future__ import annotations

import numpy as np

from .roots import companion_roots

POLE_TOL = 1e-15


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.flatnonzero(c != 0)
    return c[nz[0]:] if nz.size else np.zeros(1, dtype=complex)


def _reverse(c: np.ndarray, deg: int) -> np.ndarray:
    """Coefficients of ``w**deg * p(1/w)``."""
    pad = np.concatenate([np.zeros(deg + 1 - len(c), dtype=complex), c])
    return pad[::-1]


class RatFunc:
    """``z -> N(z) / D(z)`` with coefficients highest degree first."""

    def __init__(self, num, den):
        self.num = _trim(num)
        self.den = _trim(den)
        self.degree = max(len(self.num), len(self.den)) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        n = np.polyval(self.num, z)
        d = np.polyval(self.den, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = n / d
        pole = np.abs(d) <= POLE_TOL * np.maximum(1.0, np.abs(n))
        if np.any(pole):
            out = np.where(pole, complex(np.inf, 0), out)
        return out if out.ndim else complex(out)

    def _num_den_derivs(self):
        return np.polyder(self.num) if len(self.num) > 1 else np.zeros(1, complex), \
            np.polyder(self.den) if len(self.den) > 1 else np.zeros(1, complex)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        dn, dd = self._num_den_derivs()
        n, d = np.polyval(self.num, z), np.polyval(self.den, z)
        out = (np.polyval(dn, z) * d - n * np.polyval(dd, z)) / (d * d)
        return out if out.ndim else complex(out)

    def derivative_numerator(self) -> np.ndarray:
        dn, dd = self._num_den_derivs()
        return _trim(np.polysub(np.polymul(dn, self.den), np.polymul(self.num, dd)))

    def critical_points(self) -> np.ndarray:
        """Finite critical points (with multiplicity)."""
        p = self.derivative_numerator()
        return companion_roots(p) if len(p) > 1 else np.zeros(0, complex)

    def fixed_point_polynomial(self) -> np.ndarray:
        return _trim(np.polysub(self.num, np.polymul([1, 0], self.den)))

    def finite_fixed_points(self) -> np.ndarray:
        p = self.fixed_point_polynomial()
        return companion_roots(p) if len(p) > 1 else np.zeros(0, complex)

    def preimages(self, w) -> np.ndarray:
        """All finite solutions of ``f(z) = w``; shape ``w.shape + (degree,)``.

        Requires ``deg N >= deg D`` so that the equation has full degree.
        """
        w = np.asarray(w, dtype=complex)
        L = max(len(self.num), len(self.den))
        num = np.concatenate([np.zeros(L - len(self.num), complex), self.num])
        den = np.concatenate([np.zeros(L - len(self.den), complex), self.den])
        coeffs = num[None, :] - w.reshape(-1, 1) * den[None, :]
        r = companion_roots(coeffs)
        return r.reshape(w.shape + (r.shape[-1],))

    def inf_chart(self) -> "RatFunc":
        """The map ``w -> 1/f(1/w)``."""
        d = self.degree
        return RatFunc(_reverse(self.den, d), _reverse(self.num, d))

    def multiplier_at(self, z0) -> complex:
        return complex(self.deriv(z0))
