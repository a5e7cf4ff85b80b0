"""The two cubic Blaschke families and their rotation-number solvers.

Petersen family:   Q^t(z) = e^{2 pi i t} z^2 (z - 3) / (1 - 3 z)
Mating family:     B^t(z) = lam z (z - a)(z - b) / ((1 - conj(a) z)(1 - conj(b) z))
                   with ab = kappa = e^{2 pi i t}, a + b = 3 - conj(kappa),
                   lam = e^{-2 pi i nu} / (ab).

Both have a cubic-type critical point at z = 1 and preserve the unit
circle.  On the circle they are evaluated through closed-form lifts: for
|z| = 1 the argument of a factor (z - a)/(1 - conj(a) z) is
``2 pi x + 2 Arg(1 - a conj(z))``, so no phase unwrapping is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .cf_arith import ContinuedFraction, as_rotation, rotation_value
from .circle_dyn import CircleLift, RotationEstimate, rotation_number
from .errors import DegenerateModelError, SolverError
from .ratfunc import RatFunc

TAU = 2.0 * math.pi


def _cjson(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


# ---------------------------------------------------------------------------
# numba lift kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _petersen_advance(t, x0, n):
    x = x0
    for _ in range(n):
        z = complex(math.cos(TAU * x), math.sin(TAU * x))
        w = 1.0 - z / 3.0
        x = x + t + math.atan2(w.imag, w.real) / math.pi
    return x


@njit(cache=True)
def _blaschke_advance(shift, a, binv, const, x0, n):
    x = x0
    for _ in range(n):
        c = math.cos(TAU * x)
        s = math.sin(TAU * x)
        u = 1.0 - a * complex(c, -s)
        v = 1.0 - binv * complex(c, s)
        x = x + shift + (math.atan2(u.imag, u.real) + math.atan2(v.imag, v.real) + const) / math.pi
    return x


# ---------------------------------------------------------------------------
# Petersen family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PetersenModel:
    t: float

    @property
    def kappa(self) -> complex:
        return complex(np.exp(1j * TAU * self.t))

    @property
    def ratfunc(self) -> RatFunc:
        e = self.kappa
        return RatFunc([e, -3 * e, 0, 0], [-3, 1])

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.kappa * z * z * (z - 3) / (1 - 3 * z)
        return out if out.ndim else complex(out)

    __call__ = eval

    def log_deriv(self, z):
        return 2 / z + 1 / (z - 3) + 3 / (1 - 3 * z)

    def deriv(self, z):
        return self.eval(z) * self.log_deriv(z)

    def deriv2(self, z):
        L = self.log_deriv(z)
        dL = -2 / z**2 - 1 / (z - 3) ** 2 + 9 / (1 - 3 * z) ** 2
        return self.eval(z) * (L * L + dL)

    def preimages(self, w) -> np.ndarray:
        return self.ratfunc.preimages(w)

    def lift(self) -> CircleLift:
        t = float(self.t)

        def f(x):
            z = np.exp(1j * TAU * np.asarray(x, dtype=float))
            return x + t + np.angle(1 - z / 3) / math.pi

        return CircleLift(f, 0.0, lambda x0, n: _petersen_advance(t, x0, n), name=f"Q^{t}")

    def critical_value(self) -> complex:
        return self.kappa

    def to_json(self) -> dict:
        return {"family": "petersen", "t": self.t}


# ---------------------------------------------------------------------------
# Mating family
# ---------------------------------------------------------------------------

def solve_ab(t: float) -> tuple[complex, complex]:
    """Roots of ``z^2 + (conj(kappa) - 3) z + kappa`` with ``|a| <= |b|``."""
    kappa = complex(np.exp(1j * TAU * t))
    if abs(t - round(t)) < 1e-15:
        return 1 + 0j, 1 + 0j
    p = kappa.conjugate() - 3
    disc = np.sqrt(complex(p * p - 4 * kappa))
    r1 = (-p + disc) / 2
    r2 = (-p - disc) / 2
    # recover the small root from the product to avoid cancellation
    big = r1 if abs(r1) >= abs(r2) else r2
    small = kappa / big
    return complex(small), complex(big)


@dataclass(frozen=True)
class BlaschkeCubic:
    t: float
    nu: float
    kappa: complex
    a: complex
    b: complex
    lam: complex
    theta: Optional[float] = None

    @property
    def zeta(self) -> complex:
        return self.a + self.b

    @property
    def ratfunc(self) -> RatFunc:
        a, b, lam = self.a, self.b, self.lam
        num = lam * np.poly([0, a, b])
        den = np.polymul([-a.conjugate(), 1], [-b.conjugate(), 1])
        return RatFunc(num, den)

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        a, b = self.a, self.b
        out = self.lam * z * (z - a) * (z - b) / ((1 - a.conjugate() * z) * (1 - b.conjugate() * z))
        return out if out.ndim else complex(out)

    __call__ = eval

    def eval_inf_chart(self, w):
        """``1/B(1/w)``, which by the reflection symmetry equals ``conj(B(conj w))``."""
        return np.conj(self.eval(np.conj(np.asarray(w, dtype=complex))))

    def log_deriv(self, z):
        a, b = self.a, self.b
        ac, bc = a.conjugate(), b.conjugate()
        return 1 / z + 1 / (z - a) + 1 / (z - b) + ac / (1 - ac * z) + bc / (1 - bc * z)

    def deriv(self, z):
        return self.eval(z) * self.log_deriv(z)

    def deriv2(self, z):
        a, b = self.a, self.b
        ac, bc = a.conjugate(), b.conjugate()
        L = self.log_deriv(z)
        dL = -1 / z**2 - 1 / (z - a) ** 2 - 1 / (z - b) ** 2 + ac**2 / (1 - ac * z) ** 2 + bc**2 / (1 - bc * z) ** 2
        return self.eval(z) * (L * L + dL)

    def preimages(self, w) -> np.ndarray:
        return self.ratfunc.preimages(w)

    def _lift_params(self):
        if self.a == self.b:
            return -self.nu - self.t, 0j, 0j, 0.0
        a, binv = self.a, 1 / self.b
        const = -np.angle(1 - a) - np.angle(1 - binv)
        return -self.nu - self.t, a, binv, float(const)

    def lift(self) -> CircleLift:
        shift, a, binv, const = self._lift_params()

        def f(x):
            x = np.asarray(x, dtype=float)
            z = np.exp(1j * TAU * x)
            return x + shift + (np.angle(1 - a * np.conj(z)) + np.angle(1 - binv * z) + const) / math.pi

        return CircleLift(f, 0.0, lambda x0, n: _blaschke_advance(shift, a, binv, const, x0, n),
                          name=f"B^{self.t}")

    def critical_value(self) -> complex:
        return complex(self.eval(1.0))

    def to_json(self) -> dict:
        return {"family": "mating", "t": self.t, "nu": self.nu, "a": _cjson(self.a), "b": _cjson(self.b),
                "lambda": _cjson(self.lam)}


def build_B(t: float, nu: float, theta: Optional[float] = None) -> BlaschkeCubic:
    if abs(t - round(t)) < 1e-12:
        raise DegenerateModelError(f"t={t} is an integer: a = b = 1 and the degree collapses")
    a, b = solve_ab(t)
    kappa = complex(np.exp(1j * TAU * t))
    lam = complex(np.exp(-1j * TAU * nu)) / (a * b)
    return BlaschkeCubic(float(t), float(nu), kappa, a, b, lam, theta)


def affine_lift_displacement(t: float, nu: float) -> float:
    """Displacement at integer t, where B^t restricts to a rigid rotation."""
    return -nu - t


def critical_structure_check(model) -> dict:
    """Residuals of the double critical point at z = 1."""
    if isinstance(model, PetersenModel):
        z = complex(1.0)
        orbit_res = 0.0
        for _ in range(200):
            z = model.eval(z)
            orbit_res = max(orbit_res, abs(abs(z) - 1.0))
        return {"d1": abs(model.deriv(1.0 + 0j)), "d2": abs(model.deriv2(1.0 + 0j)), "orbit_on_circle": orbit_res}
    return {"d1": abs(model.deriv(1.0 + 0j)), "d2": abs(model.deriv2(1.0 + 0j))}


# ---------------------------------------------------------------------------
# Parameter solver
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    family: str
    theta: ContinuedFraction
    nu: Optional[ContinuedFraction]
    t: float
    model: object
    estimate: RotationEstimate
    target_displacement: float
    scan: list[tuple[float, float]] = field(default_factory=list)
    brackets: list[tuple[float, float]] = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "theta_cf": self.theta.spec_string(),
            "nu_cf": self.nu.spec_string() if self.nu is not None else None,
            "t": self.t,
            "rotation_estimate": self.estimate.to_json(),
            "target_displacement": self.target_displacement,
            "brackets": [list(b) for b in self.brackets],
            "residuals": self.residuals,
        }
        if isinstance(self.model, BlaschkeCubic):
            out.update(a=_cjson(self.model.a), b=_cjson(self.model.b), **{"lambda": _cjson(self.model.lam)})
        return out


def _displacement(family: str, t: float, nu: float, iters: int, seed: float) -> float:
    if family == "petersen":
        return (_petersen_advance(t, seed, iters) - seed) / iters
    if abs(t - round(t)) < 1e-12:
        return affine_lift_displacement(t, nu)
    a, b = solve_ab(t)
    binv = 1 / b
    const = float(-np.angle(1 - a) - np.angle(1 - binv))
    return (_blaschke_advance(-nu - t, a, binv, const, seed, iters) - seed) / iters


def target_displacement(family: str, theta: float, nu: float = 0.0) -> float:
    """Unreduced displacement whose fractional part is theta.

    Petersen displacement increases from 0 to 1; the mating displacement
    decreases from -nu to -nu-1, so the unique admissible lift of theta is
    theta - k with k = floor(theta + nu) + 1.
    """
    if family == "petersen":
        return theta
    return theta - (math.floor(theta + nu) + 1)


def displacement_scan(family: str, nu: float = 0.0, samples: int = 512, iters: int = 10**5,
                      seed: float = 0.0) -> list[tuple[float, float]]:
    ts = (np.arange(samples) + 0.5) / samples
    return [(float(t), _displacement(family, float(t), nu, iters, seed)) for t in ts]


def solve_t(target_theta, family: str = "petersen", nu=None, *, samples: int = 512, probe_iters: int = 10**5,
            confirm_iters: int = 10**6, depth: int = 5, tol: float = 1e-12, seed: float = 0.0) -> SolveResult:
    """Find t with rho(family(t) on the circle) = theta.

    Scan the unreduced lifted displacement on a grid, bisect the first
    bracket (all brackets are reported), and confirm with a long orbit.
    Only continuity and the endpoint values are guaranteed, not global
    monotonicity.
    """
    if family not in ("petersen", "mating"):
        raise ValueError(f"unknown family {family!r}")
    theta_cf = as_rotation(target_theta)
    theta = rotation_value(theta_cf)
    nu_cf = None
    nu_val = 0.0
    if family == "mating":
        if nu is None:
            raise ValueError("mating family needs nu")
        nu_cf = as_rotation(nu)
        nu_val = rotation_value(nu_cf)
    target = target_displacement(family, theta, nu_val)

    scan = displacement_scan(family, nu_val, samples, probe_iters, seed)
    # include the exact endpoint values so a bracket always exists in theory
    end0 = 0.0 if family == "petersen" else -nu_val
    end1 = 1.0 if family == "petersen" else -nu_val - 1.0
    pts = [(0.0, end0)] + scan + [(1.0, end1)]
    brackets = []
    for (t0, d0), (t1, d1) in zip(pts, pts[1:]):
        if (d0 - target) * (d1 - target) <= 0 and d0 != d1:
            brackets.append((t0, t1))
    if not brackets:
        raise SolverError(f"no bracket for target displacement {target}", scan=scan)

    lo, hi = brackets[0]
    f_lo = _displacement(family, lo, nu_val, probe_iters, seed) - target
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _displacement(family, mid, nu_val, probe_iters, seed) - target
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)

    model = PetersenModel(t) if family == "petersen" else build_B(t, nu_val, theta)
    est = rotation_number(model.lift(), confirm_iters, seed)
    if abs(est.displacement - target) > 2.0 / probe_iters:
        raise SolverError(f"confirmation failed: displacement {est.displacement} vs target {target}", scan=scan)
    if not est.agrees_with(theta_cf, depth):
        raise SolverError(f"rotation estimate {est.rho} does not share the first {depth} entries of {theta_cf}",
                          scan=scan)
    return SolveResult(family, theta_cf, nu_cf, t, model, est, target, scan, brackets,
                       {k: float(v) for k, v in critical_structure_check(model).items()})


def winding_over_t(z: complex, samples: int = 4001) -> float:
    """Turns accumulated by arg of (z-a)(z-b)/((1-conj(a)z)(1-conj(b)z)) as t runs over [0, 1]."""
    ts = np.linspace(0.0, 1.0, samples)
    vals = []
    for t in ts:
        a, b = solve_ab(float(t))
        vals.append((z - a) * (z - b) / ((1 - a.conjugate() * z) * (1 - b.conjugate() * z)))
    ph = np.unwrap(np.angle(np.array(vals)))
    return float((ph[-1] - ph[0]) / TAU)
