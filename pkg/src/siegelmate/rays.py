"""External rays of the Siegel quadratic and the angle combinatorics of the mating.

Rays are traced by backward iteration: the point of R(t) at potential G
is obtained from the point of R(2^n t) at potential 2^n G, which for large
n sits near the escape circle where the Boettcher map is the identity, by
taking n square roots with the branch chosen by continuity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .cf_arith import BigAngle, ContinuedFraction, as_rotation, omega_of_theta, rotation_value
from .errors import DegenerateModelError, PrecisionError, TrackingError
from .rational import SiegelQuadratic, f_theta


@dataclass(frozen=True)
class RayConfig:
    R0: float = 100.0
    S: int = 4
    eps_land: float = 1e-6
    K: int = 8
    max_steps: int = 100_000

    def __post_init__(self):
        if self.R0 < 10:
            raise ValueError("escape radius must be >= 10")
        if self.S < 2:
            raise ValueError("need at least 2 steps per potential halving")

    @property
    def required_bits(self) -> int:
        """Angle precision that keeps every doubled angle exact to 53 bits over max_steps."""
        return self.max_steps // self.S + 128

    def to_json(self) -> dict:
        return {"R0": self.R0, "S": self.S, "eps_land": self.eps_land, "K": self.K, "max_steps": self.max_steps}


@njit(cache=True)
def _trace_kernel(c, angles, R, S, maxsteps, eps, K):
    out = np.empty(maxsteps + 1, dtype=np.complex128)
    cur = np.empty(angles.shape[0], dtype=np.complex128)
    logR = math.log(R)
    cur[0] = R * np.exp(2j * np.pi * angles[0])
    out[0] = cur[0]
    n = 0
    last = 0
    status = 0   # 0 max steps, 1 landed, 2 branch lost, 3 out of angle digits
    for m in range(1, maxsteps + 1):
        if m - n * S >= S:
            n += 1
            if n >= angles.shape[0]:
                status = 3
                break
        lv = m - n * S
        cur[n] = np.exp(logR * 2.0 ** (-lv / S) + 2j * np.pi * angles[n])
        lost = False
        for k in range(n - 1, -1, -1):
            r = np.sqrt(cur[k + 1] - c)
            d1 = abs(r - cur[k])
            d2 = abs(r + cur[k])
            if d2 < d1:
                r = -r
                d1, d2 = d2, d1
            if d1 > 0.8 * d2:
                lost = True
            cur[k] = r
        out[m] = cur[0]
        last = m
        if lost:
            status = 2
            break
        if m >= K:
            dmax = 0.0
            for i in range(m - K + 1, m + 1):
                for j in range(i + 1, m + 1):
                    dd = abs(out[i] - out[j])
                    if dd > dmax:
                        dmax = dd
            if dmax < eps:
                status = 1
                break
    return out[:last + 1], status


@dataclass
class ExternalRay:
    angle: BigAngle
    polyline: np.ndarray = field(repr=False)
    potentials: np.ndarray = field(repr=False)
    landing: complex
    landed: bool
    landing_radius: float
    config: RayConfig

    @property
    def steps(self) -> int:
        return len(self.polyline) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["potential", "re", "im"])
        for g, z in zip(self.potentials, self.polyline):
            w.writerow([repr(float(g)), repr(z.real), repr(z.imag)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"angle": self.angle.to_json(), "landing": {"re": self.landing.real, "im": self.landing.imag},
                "landed": self.landed, "landing_radius": self.landing_radius, "steps": self.steps}


def trace_ray(f: SiegelQuadratic | complex, t: BigAngle, config: RayConfig = RayConfig()) -> ExternalRay:
    c = complex(f.c if isinstance(f, SiegelQuadratic) else f)
    if not isinstance(t, BigAngle):
        t = BigAngle.from_fraction(t, config.required_bits)
    count = config.max_steps // config.S + 2
    angles = np.array(t.float_windows(count))
    if len(angles) < 2:
        raise PrecisionError("angle has too few reliable digits to trace")
    pts, status = _trace_kernel(c, angles, float(config.R0), int(config.S), int(config.max_steps),
                                float(config.eps_land), int(config.K))
    m = np.arange(len(pts))
    pot = math.log(config.R0) * 2.0 ** (-m / config.S)
    if status == 2:
        raise TrackingError(f"ray {float(t)} lost its branch at potential {pot[-1]:.3e}", parameter=float(pot[-1]))
    tail = pts[-config.K:]
    radius = float(np.max(np.abs(tail[:, None] - tail[None, :]))) if len(tail) > 1 else math.inf
    return ExternalRay(t, pts, pot, complex(tail.mean()), status == 1, radius, config)


# ---------------------------------------------------------------------------
# Angle combinatorics
# ---------------------------------------------------------------------------

def critical_angles(theta, bits: int = 256) -> tuple[BigAngle, BigAngle]:
    """``(omega/2, (omega+1)/2)``: the two angles landing at the critical point."""
    w = omega_of_theta(as_rotation(theta), bits)
    lo = w.halved()
    hi = BigAngle(w.mantissa + (1 << w.bits), w.bits + 1, w.err_ulps)
    return lo, hi


def _in_half(x: BigAngle, start: BigAngle) -> bool:
    """Whether x lies in the half-open semicircle [start, start + 1/2)."""
    d = x - start
    return d.mantissa < (1 << (d.bits - 1))


def precritical_angle_pairs(theta, k: int, bits: int = 256) -> list[tuple[BigAngle, BigAngle]]:
    """Angle pairs of the rays landing at the 2^k points of f^{-k}(0).

    Each depth-k pair doubles onto a depth-(k-1) pair; the two halves of a
    pair are the preimages lying in the same semicircle cut out by the
    critical angles.  Pairs are ordered (smaller, larger) and sorted.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    lo, hi = critical_angles(theta, bits)
    pairs = [(lo, hi)]
    for _ in range(k):
        nxt = []
        for s, t in pairs:
            for s2 in (s.halved(), s.halved() + BigAngle(1, 1)):
                for t2 in (t.halved(), t.halved() + BigAngle(1, 1)):
                    if _in_half(s2, lo) == _in_half(t2, lo):
                        a, b = sorted((s2, t2), key=lambda x: x.value)
                        nxt.append((a, b))
        pairs = nxt
    return sorted(pairs, key=lambda p: p[0].value)


@dataclass(frozen=True)
class Itinerary:
    digits: tuple[int, ...]
    ambiguous: tuple[int, ...] = ()

    def shift(self) -> "Itinerary":
        return Itinerary(self.digits[1:], tuple(i - 1 for i in self.ambiguous if i > 0))

    def complement(self) -> "Itinerary":
        return Itinerary(tuple(1 - d for d in self.digits), self.ambiguous)


def itinerary_of_angle(t: BigAngle, n: int, theta=None) -> Itinerary:
    """First n itinerary digits (= binary digits of t).

    With ``theta`` given, positions j where 2^j t is a critical angle are
    marked ambiguous.
    """
    digits = tuple(t.digits(n))
    amb = []
    if theta is not None:
        lo, hi = critical_angles(theta, max(t.bits, 256))
        for j in range(n):
            u = t.doubled(j)
            for c in (lo, hi):
                if (u - c).distance_to_integer_ulps() <= (u - c).err_ulps:
                    amb.append(j)
    return Itinerary(digits, tuple(amb))


# ---------------------------------------------------------------------------
# Pinch points of the mating
# ---------------------------------------------------------------------------

@dataclass
class PinchPair:
    s: BigAngle
    t: BigAngle
    z: complex
    z_prime: complex
    separation: float
    class_size: int
    landed: bool

    def to_row(self) -> list:
        return [repr(float(self.s)), repr(float(self.t)), repr(self.z), repr(self.z_prime), repr(self.separation)]


def _same_rotation(x, y) -> bool:
    if isinstance(x, ContinuedFraction) and isinstance(y, ContinuedFraction):
        return x.entries == y.entries
    return abs(rotation_value(x) - rotation_value(y)) < 1e-15


def pinch_pairs(theta, nu, k: int = 0, config: RayConfig = RayConfig()) -> list[PinchPair]:
    """For each precritical pair (s, t) of the nu side, the landing points of
    the theta-side rays at -s and -t; the mating glues them into one point."""
    theta_cf, nu_cf = as_rotation(theta), as_rotation(nu)
    # the complement of cf [1] is not a rotation, so only compare entries when it exists
    has_complement = len(theta_cf) > 1 or theta_cf.entries[0] > 1
    if (has_complement and _same_rotation(nu_cf, theta_cf.complement())) \
            or abs(rotation_value(theta_cf) + rotation_value(nu_cf) - 1) < 1e-15:
        raise DegenerateModelError("theta = 1 - nu: no mating exists")
    f = f_theta(rotation_value(theta_cf))
    out = []
    for s, t in precritical_angle_pairs(nu_cf, k, config.required_bits):
        r1 = trace_ray(f, -s, config)
        r2 = trace_ray(f, -t, config)
        # two landing points on the theta side plus the precritical point on the nu side
        out.append(PinchPair(s, t, r1.landing, r2.landing, abs(r1.landing - r2.landing), 3,
                             r1.landed and r2.landed))
    return out


def pinch_csv(pairs: list[PinchPair]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "t", "z", "z_prime", "separation"])
    for p in pairs:
        w.writerow(p.to_row())
    return buf.getvalue()


def repelling_fixed_point(f: SiegelQuadratic) -> complex:
    """The non-Siegel fixed point, by root solving."""
    from .roots import companion_roots
    r = companion_roots([1, -1, f.c])
    return complex(r[np.argmax(np.abs(r - f.alpha))])
