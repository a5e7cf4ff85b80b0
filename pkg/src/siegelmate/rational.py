"""Quadratic rational maps with two Siegel fixed points, the Siegel quadratic,
the Chebyshev quotient G, and fixed-point data of the Blaschke models."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blaschke import BlaschkeCubic, PetersenModel, _cjson
from .errors import DegenerateModelError, NumericError
from .ratfunc import RatFunc
from .roots import companion_roots

TAU = 2.0 * math.pi


def _e(x: float) -> complex:
    return complex(np.exp(1j * TAU * float(x)))


# ---------------------------------------------------------------------------
# Siegel quadratic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SiegelQuadratic:
    """``z -> z^2 + c`` with an indifferent fixed point ``alpha`` of multiplier ``e^{2 pi i theta}``."""

    theta: float
    c: complex
    alpha: complex
    beta: complex
    siegel: bool = True

    def __call__(self, z):
        return np.asarray(z) ** 2 + self.c if np.ndim(z) else z * z + self.c

    def deriv(self, z):
        return 2 * z

    @property
    def critical_value(self) -> complex:
        return self.c


def f_theta(theta: float) -> SiegelQuadratic:
    theta = float(theta)
    lam = _e(theta)
    c = lam / 2 * (1 - lam / 2)
    alpha = lam / 2
    siegel = True
    if abs(theta * 2 - round(theta * 2)) < 1e-15 or theta <= 0 or theta >= 1:
        warnings.warn(f"theta={theta} is not irrational in (0,1); Siegel machinery disabled", stacklevel=2)
        siegel = False
    return SiegelQuadratic(theta, c, alpha, 1 - alpha, siegel)


# ---------------------------------------------------------------------------
# Multiplier coordinates
# ---------------------------------------------------------------------------

def sigma_coords(mu1: complex, mu2: complex) -> tuple[complex, complex, complex, complex]:
    """``(sigma1, sigma2, sigma3, mu3)`` for a quadratic rational map with fixed-point multipliers mu1, mu2."""
    denom = 1 - mu1 * mu2
    if abs(denom) < 1e-12:
        raise DegenerateModelError("mu1*mu2 = 1: the third multiplier is undefined")
    mu3 = (2 - mu1 - mu2) / denom
    s1 = mu1 + mu2 + mu3
    s2 = mu1 * mu2 + mu1 * mu3 + mu2 * mu3
    s3 = mu1 * mu2 * mu3
    return s1, s2, s3, mu3


@dataclass(frozen=True)
class QuadRational:
    """``F(z) = z (A z + B) / (C z + D)`` fixing 0, 1 and infinity."""

    theta: float
    nu: float
    A: complex
    B: complex
    C: complex
    D: complex

    @property
    def ratfunc(self) -> RatFunc:
        return RatFunc([self.A, self.B, 0], [self.C, self.D])

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = z * (self.A * z + self.B) / (self.C * z + self.D)
        return out if out.ndim else complex(out)

    __call__ = eval

    def eval_inf_chart(self, w):
        """``1/F(1/w) = w (C + D w) / (A + B w)``."""
        w = np.asarray(w, dtype=complex)
        out = w * (self.C + self.D * w) / (self.A + self.B * w)
        return out if out.ndim else complex(out)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        A, B, C, D = self.A, self.B, self.C, self.D
        out = (A * C * z * z + 2 * A * D * z + B * D) / (C * z + D) ** 2
        return out if out.ndim else complex(out)

    def deriv_inf_chart(self, w):
        w = np.asarray(w, dtype=complex)
        A, B, C, D = self.A, self.B, self.C, self.D
        out = (B * D * w * w + 2 * A * D * w + A * C) / (A + B * w) ** 2
        return out if out.ndim else complex(out)

    @property
    def mu1(self) -> complex:
        return complex(self.deriv(0.0))

    @property
    def mu2(self) -> complex:
        return complex(self.deriv_inf_chart(0.0))

    @property
    def mu3(self) -> complex:
        return complex(self.deriv(1.0))

    def critical_points(self) -> np.ndarray:
        A, B, C, D = self.A, self.B, self.C, self.D
        return companion_roots([A * C, 2 * A * D, B * D])

    def sigmas(self) -> tuple[complex, complex, complex]:
        m = (self.mu1, self.mu2, self.mu3)
        return (m[0] + m[1] + m[2], m[0] * m[1] + m[0] * m[2] + m[1] * m[2], m[0] * m[1] * m[2])

    def to_json(self, model: Optional[BlaschkeCubic] = None) -> dict:
        s1, s2, s3 = self.sigmas()
        out = {"theta": self.theta, "nu": self.nu, "mu1": _cjson(self.mu1), "mu2": _cjson(self.mu2),
               "mu3": _cjson(self.mu3), "sigma1": _cjson(s1), "sigma2": _cjson(s2), "sigma3": _cjson(s3)}
        if model is not None:
            fp = fixed_points_beta(model)
            out["beta"] = _cjson(fp.beta)
            out["beta_prime"] = _cjson(fp.beta_prime)
        return out


def F_normal(theta: float, nu: float) -> QuadRational:
    lt, mn = _e(theta), _e(nu)
    if abs(1 - lt * mn) < 1e-12:
        raise DegenerateModelError("theta + nu = 1 mod 1: the normal form degenerates")
    return QuadRational(float(theta), float(nu), 1 - lt, lt * (1 - mn), (1 - lt) * mn, 1 - mn)


# ---------------------------------------------------------------------------
# Chebyshev quotient
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChebyshevQuotient:
    """``G(z) = 4 z / ((1 - e) z + (1 + e))^2`` with ``e = e^{2 pi i theta}``."""

    theta: float
    e: complex

    @property
    def c1(self) -> complex:
        return (self.e + 1) / (self.e - 1)

    @property
    def c2(self) -> complex:
        return -self.c1

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = 4 * z / ((1 - self.e) * z + (1 + self.e)) ** 2
        return out if out.ndim else complex(out)

    __call__ = eval

    def reciprocal(self, z):
        """``1/G(z)``, finite at the double pole."""
        z = np.asarray(z, dtype=complex)
        out = ((1 - self.e) * z + (1 + self.e)) ** 2 / (4 * z)
        return out if out.ndim else complex(out)

    def eval_from_inf(self, w):
        """``G(1/w) = 4 w / ((1 - e) + (1 + e) w)^2``."""
        w = np.asarray(w, dtype=complex)
        out = 4 * w / ((1 - self.e) + (1 + self.e) * w) ** 2
        return out if out.ndim else complex(out)

    def eval_inf_chart(self, w):
        """``1/G(1/w)``."""
        w = np.asarray(w, dtype=complex)
        out = ((1 - self.e) + (1 + self.e) * w) ** 2 / (4 * w)
        return out if out.ndim else complex(out)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        L, M = 1 - self.e, 1 + self.e
        out = 4 * (M - L * z) / (L * z + M) ** 3
        return out if out.ndim else complex(out)

    @property
    def ratfunc(self) -> RatFunc:
        L, M = 1 - self.e, 1 + self.e
        return RatFunc([4, 0], [L * L, 2 * L * M, M * M])


def chebyshev_G(theta) -> ChebyshevQuotient:
    from .cf_arith import rotation_value
    th = rotation_value(theta)
    return ChebyshevQuotient(th, _e(th))


# ---------------------------------------------------------------------------
# Fixed points of the Blaschke models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointData:
    beta: complex
    beta_prime: complex
    mirror: complex          # reflection 1/conj(beta), the fourth fixed point
    multiplier: complex      # derivative at beta
    roots: tuple

    def to_json(self) -> dict:
        return {"beta": _cjson(self.beta), "beta_prime": _cjson(self.beta_prime), "mirror": _cjson(self.mirror),
                "multiplier": _cjson(self.multiplier)}


def _fixed_quadratic(model) -> list[complex]:
    if isinstance(model, PetersenModel):
        e = model.kappa
        return [e, 3 - 3 * e, -1]
    lam, k, z = model.lam, model.kappa, model.zeta
    return [lam - k.conjugate(), z.conjugate() - lam * z, lam * k - 1]


def fixed_points_beta(model, sep: float = 1e-9) -> FixedPointData:
    """Repelling fixed point beta outside the closed disk, and its other preimage beta'."""
    roots = companion_roots(_fixed_quadratic(model))
    table = tuple(complex(r) for r in roots)
    outside = [r for r in table if abs(r) > 1 + sep]
    inside = [r for r in table if abs(r) < 1 - sep]
    if len(outside) != 1 or len(inside) != 1:
        raise NumericError(f"cannot separate the nonzero fixed points {table}")
    beta = outside[0]
    mult = complex(model.deriv(beta))
    if abs(mult) <= 1:
        raise NumericError(f"fixed point {beta} has multiplier {mult}, expected repelling")
    pre = [complex(p) for p in model.preimages(beta)]
    pre.sort(key=lambda p: abs(p - beta))
    others = [p for p in pre[1:] if abs(p) > 1 + sep]
    if len(others) != 1 or abs(pre[0] - beta) > 1e-8:
        raise NumericError(f"cannot single out the second preimage of beta among {pre}")
    return FixedPointData(beta, others[0], 1 / beta.conjugate(), mult, table)
