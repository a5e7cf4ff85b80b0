"""Exact arithmetic on rotation numbers and binary angles.

Rotation numbers are carried as continued fractions; angles on R/Z as
integer mantissas with an explicit error bound counted in units of the last
place (ulps).  Everything here is integer arithmetic, so error bounds are
exact rather than estimated.
"""

from __future__ import annotations

import csv
import io
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import PrecisionError

RealLike = Union[float, int, Fraction]

DEFAULT_BITS = 256
GOLDEN_DEPTH = 40


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    """Finite continued fraction ``[a_1, a_2, ..., a_N]`` of a number in (0, 1).

    ``origin`` is ``"exact"`` for entries supplied by the user (a bounded-type
    rotation number known by its entries) and ``"truncated"`` for entries
    produced by :func:`cf_expand` from a real.
    """

    entries: tuple[int, ...]
    origin: str = "exact"

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if not entries:
            raise ValueError("continued fraction needs at least one entry")
        if any(a < 1 for a in entries):
            raise ValueError(f"continued fraction entries must be >= 1, got {entries}")
        if self.origin not in ("exact", "truncated"):
            raise ValueError(f"unknown origin {self.origin!r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def repeated(cls, a: int, n: int) -> "ContinuedFraction":
        return cls((a,) * n)

    @classmethod
    def golden(cls, n: int = GOLDEN_DEPTH) -> "ContinuedFraction":
        """(sqrt(5)-1)/2 truncated to ``n`` ones (error < 1e-16 for n=40)."""
        return cls.repeated(1, n)

    def __len__(self):
        return len(self.entries)

    def convergents(self) -> list[tuple[int, int]]:
        """All ``(p_n, q_n)`` for n = 0..N, starting from p_0/q_0 = 0/1."""
        p_prev, q_prev = 1, 0
        p, q = 0, 1
        out = [(p, q)]
        for a in self.entries:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append((p, q))
        return out

    @property
    def value(self) -> Fraction:
        p, q = self.convergents()[-1]
        return Fraction(p, q)

    @property
    def error_bound(self) -> Fraction:
        """Bound on |x - p_N/q_N| valid for every continuation of the entries."""
        conv = self.convergents()
        q_n, q_prev = conv[-1][1], conv[-2][1]
        return Fraction(1, q_n * (q_n + q_prev))

    def __float__(self):
        return float(self.value)

    def complement(self) -> "ContinuedFraction":
        """Continued fraction of ``1 - x``."""
        a = self.entries
        if a[0] > 1:
            new = (1, a[0] - 1) + a[1:]
        elif len(a) > 1:
            new = (a[1] + 1,) + a[2:]
        else:
            raise ValueError("1 - [1] = 0 has no continued fraction in (0,1)")
        return ContinuedFraction(new, self.origin)

    def prefix(self, n: int) -> tuple[int, ...]:
        return self.entries[:n]

    def spec_string(self) -> str:
        """Compact ``cf:`` string accepted by :func:`parse_rotation`."""
        runs = []
        for a in self.entries:
            if runs and runs[-1][0] == a:
                runs[-1][1] += 1
            else:
                runs.append([a, 1])
        return "cf:" + ",".join(f"{a}x{k}" if k > 1 else str(a) for a, k in runs)

    def __str__(self):
        return self.spec_string()


def _as_fraction(x: RealLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    return Fraction(str(x))


def cf_expand(x: RealLike, n: int) -> ContinuedFraction:
    """First ``n`` entries of the continued fraction of ``x`` in (0, 1).

    Floats are expanded exactly as the binary rationals they are, so entries
    past roughly the 20th of an irrational approximated by a float are noise.
    A rational with a shorter expansion returns that full expansion.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    r = _as_fraction(x)
    if not 0 < r < 1:
        raise ValueError(f"cf_expand needs x in (0,1), got {x}")
    entries = []
    while len(entries) < n and r != 0:
        r = 1 / r
        a = r.numerator // r.denominator
        entries.append(a)
        r -= a
    return ContinuedFraction(tuple(entries), origin="truncated")


def convergent(cf: ContinuedFraction, n: int) -> Fraction:
    """The n-th convergent ``p_n/q_n`` (``n=0`` gives 0/1)."""
    if n < 0 or n > len(cf):
        raise IndexError(f"convergent {n} requested from {len(cf)} stored entries")
    p, q = cf.convergents()[n]
    return Fraction(p, q)


def cf_prefix_agreement(x: RealLike, target: ContinuedFraction | Sequence[int]) -> int:
    """Number of leading continued-fraction entries ``x`` shares with ``target``."""
    entries = target.entries if isinstance(target, ContinuedFraction) else tuple(target)
    got = cf_expand(x, len(entries)).entries
    k = 0
    for u, v in zip(got, entries):
        if u != v:
            break
        k += 1
    return k


_CF_ITEM = re.compile(r"^(\d+)(?:x(\d+))?$")


def parse_rotation(text: str, depth: int = GOLDEN_DEPTH) -> ContinuedFraction:
    """Parse ``cf:a1,a2,...``, ``cf:KxN`` run-length items, or a decimal.

    Decimals are truncated through :func:`cf_expand` to ``depth`` entries and
    a warning is issued, since the entries are then only as good as the
    decimal string.
    """
    text = text.strip()
    if text.startswith("cf:"):
        entries: list[int] = []
        for item in text[3:].split(","):
            m = _CF_ITEM.match(item.strip())
            if not m:
                raise ValueError(f"bad continued-fraction item {item!r} in {text!r}")
            a = int(m.group(1))
            entries.extend([a] * (int(m.group(2)) if m.group(2) else 1))
        return ContinuedFraction(tuple(entries), origin="exact")
    try:
        x = Fraction(text)
    except ValueError:
        raise ValueError(f"cannot parse rotation number {text!r}") from None
    warnings.warn(f"decimal rotation number {text} truncated to a continued fraction", stacklevel=2)
    return cf_expand(x, depth)


# ---------------------------------------------------------------------------
# Binary angles
# ---------------------------------------------------------------------------

def _ceil_ulps(err: float, bits: int) -> int:
    return math.ceil(Fraction(err) * (1 << bits)) if err > 0 else 0


@dataclass(frozen=True)
class BigAngle:
    """A point of R/Z stored as ``mantissa / 2**bits`` with error ``err_ulps / 2**bits``.

    Doubling keeps ``bits`` and doubles the error; halving appends a bit, so
    iterated preimages under angle doubling stay exact.
    """

    mantissa: int
    bits: int
    err_ulps: int = 0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be positive")
        if self.err_ulps < 0:
            raise ValueError("error bound must be non-negative")
        object.__setattr__(self, "mantissa", self.mantissa % (1 << self.bits))

    # construction -------------------------------------------------------
    @classmethod
    def from_fraction(cls, x: RealLike, bits: int = DEFAULT_BITS) -> "BigAngle":
        r = _as_fraction(x) % 1
        scaled = r * (1 << bits)
        m = scaled.numerator // scaled.denominator
        return cls(m, bits, 0 if scaled.denominator == 1 else 1)

    @classmethod
    def zero(cls, bits: int = DEFAULT_BITS) -> "BigAngle":
        return cls(0, bits)

    # views --------------------------------------------------------------
    @property
    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.bits)

    @property
    def err(self) -> float:
        """Error bound as a float, rounded up."""
        e = math.ldexp(self.err_ulps, -self.bits)
        return math.nextafter(e, math.inf) if e and Fraction(e) < Fraction(self.err_ulps, 1 << self.bits) else e

    @property
    def exact(self) -> bool:
        return self.err_ulps == 0

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"BigAngle({float(self):.17g}, bits={self.bits}, err<={self.err:.3g})"

    # arithmetic mod 1 --------------------------------------------------
    def with_bits(self, bits: int) -> "BigAngle":
        """Re-express at ``bits`` of precision (rounding down when shrinking)."""
        if bits >= self.bits:
            s = bits - self.bits
            return BigAngle(self.mantissa << s, bits, self.err_ulps << s)
        s = self.bits - bits
        low = self.mantissa & ((1 << s) - 1)
        err = -(-self.err_ulps >> s) + (1 if low else 0)
        return BigAngle(self.mantissa >> s, bits, err)

    def _aligned(self, other: "BigAngle"):
        bits = max(self.bits, other.bits)
        return self.with_bits(bits), other.with_bits(bits), bits

    def __add__(self, other: "BigAngle") -> "BigAngle":
        if not isinstance(other, BigAngle):
            other = BigAngle.from_fraction(other, self.bits)
        a, b, bits = self._aligned(other)
        return BigAngle(a.mantissa + b.mantissa, bits, a.err_ulps + b.err_ulps)

    def __neg__(self) -> "BigAngle":
        return BigAngle(-self.mantissa, self.bits, self.err_ulps)

    def __sub__(self, other: "BigAngle") -> "BigAngle":
        if not isinstance(other, BigAngle):
            other = BigAngle.from_fraction(other, self.bits)
        return self + (-other)

    def doubled(self, k: int = 1) -> "BigAngle":
        """``2**k * self`` mod 1."""
        return BigAngle(self.mantissa << k, self.bits, self.err_ulps << k)

    def halved(self) -> "BigAngle":
        """``self / 2`` in [0, 1/2), exact (one more bit)."""
        return BigAngle(self.mantissa, self.bits + 1, self.err_ulps)

    def preimage(self, k: int, j: int) -> "BigAngle":
        """``(self + j) / 2**k``."""
        return BigAngle(self.mantissa + (j << self.bits), self.bits + k, self.err_ulps)

    def distance_to_integer_ulps(self) -> int:
        m = self.mantissa
        return min(m, (1 << self.bits) - m)

    def distance_to_integer(self) -> Fraction:
        return Fraction(self.distance_to_integer_ulps(), 1 << self.bits)

    def reliable_digits(self) -> int:
        """Largest n such that the first n binary digits are fixed by the error bound."""
        lo = self.mantissa - self.err_ulps
        hi = self.mantissa + self.err_ulps
        if lo < 0 or hi >= (1 << self.bits):
            return 0
        if lo == hi:
            return self.bits
        # digits agree up to the highest differing bit of lo and hi
        return self.bits - (lo ^ hi).bit_length()

    def digits(self, n: int) -> list[int]:
        """First ``n`` binary digits; digits beyond an exact mantissa are 0."""
        if n > self.reliable_digits() and not (self.exact and n >= self.bits):
            raise PrecisionError(
                f"requested {n} digits but only {self.reliable_digits()} are reliable"
            )
        m = self.mantissa
        if n <= self.bits:
            chunk = m >> (self.bits - n)
        else:
            chunk = m << (n - self.bits)
        s = format(chunk, f"0{n}b") if n else ""
        return [int(ch) for ch in s]

    def float_windows(self, count: int, window: int = 53) -> list[float]:
        """``float(2**j * self mod 1)`` for j = 0..count-1.

        Entries whose leading ``window`` bits are not reliable are omitted, so
        the list may be shorter than ``count``.
        """
        total = count + window
        if self.exact:
            m = self.mantissa << max(0, total - self.bits) if total > self.bits else self.mantissa
            nbits = max(self.bits, total)
            usable = count
        else:
            m, nbits = self.mantissa, self.bits
            usable = max(0, min(count, self.reliable_digits() - window))
        s = format(m, f"0{nbits}b")
        scale = 2.0 ** -window
        return [int(s[j:j + window], 2) * scale for j in range(usable)]

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"mantissa_hex": hex(self.mantissa), "bits": self.bits, "err": self.err}

    @classmethod
    def from_json(cls, data: dict) -> "BigAngle":
        bits = int(data["bits"])
        return cls(int(data["mantissa_hex"], 16), bits, _ceil_ulps(float(data["err"]), bits))


# ---------------------------------------------------------------------------
# Certified floors
# ---------------------------------------------------------------------------

def _theta_rational(theta) -> tuple[Fraction, Fraction]:
    """Exact centre and error radius for a rotation number input."""
    if isinstance(theta, ContinuedFraction):
        return theta.value, theta.error_bound
    return _as_fraction(theta), Fraction(0)


class _FloorSequence:
    """Evaluates ``floor(k*theta + phi)`` with a proof that the floor is stable
    over the whole uncertainty interval of ``theta``."""

    def __init__(self, theta, phi: RealLike = 0):
        center, err = _theta_rational(theta)
        phi = _as_fraction(phi)
        self.den = center.denominator * phi.denominator
        self.num = center.numerator * phi.denominator
        self.off = phi.numerator * center.denominator
        self.err_num, self.err_den = err.numerator, err.denominator

    def __call__(self, k: int) -> int:
        x = k * self.num + self.off
        fl, r = divmod(x, self.den)
        gap = min(r, self.den - r)
        # need gap/den > k*err, i.e. the interval k*[theta-err, theta+err]+phi
        # contains no integer
        if k and gap * self.err_den <= k * self.err_num * self.den:
            raise PrecisionError(
                f"floor of {k}*theta is not determined at the given precision (q={k})", q=k
            )
        if k and r == 0:
            raise PrecisionError(f"{k}*theta is an integer; theta is not irrational (q={k})", q=k)
        return fl


# ---------------------------------------------------------------------------
# omega(theta) and the Sturmian rotation sets
# ---------------------------------------------------------------------------

def omega_of_theta(theta, bits: int = DEFAULT_BITS, terms: int | None = None) -> BigAngle:
    """Angle of the external ray landing at the critical value of the Siegel quadratic.

    Uses ``omega = sum_{q>=1} floor(q*theta) 2**-q``, which for irrational
    theta counts the fractions ``0 < p/q < theta``.  The first ``terms``
    (default ``bits``) terms are summed exactly; the tail is bounded by
    ``(terms + 2) 2**-terms``.
    """
    Q = bits if terms is None else terms
    if not 1 <= Q <= bits:
        raise ValueError("terms must lie in 1..bits")
    floor_of = _FloorSequence(theta)
    m = 0
    for q in range(1, Q + 1):
        m = (m << 1) + floor_of(q)
    m <<= bits - Q
    return BigAngle(m, bits, (Q + 2) << (bits - Q))


def omega_double_sum(theta, terms: int) -> Fraction:
    """Literal ``sum over fractions 0<p/q<theta, q<=terms`` of ``2**-q``.

    Slow brute-force reference for :func:`omega_of_theta`; counts
    non-reduced fractions too.
    """
    center, _ = _theta_rational(theta)
    total = Fraction(0)
    for q in range(1, terms + 1):
        count = sum(1 for p in range(1, q) if Fraction(p, q) < center)
        total += Fraction(count, 2 ** q)
    return total


def sturmian_point(theta, phi: RealLike = 0, bits: int = DEFAULT_BITS) -> BigAngle:
    """Point of the Sturmian rotation set with digits ``b_k = floor(k theta + phi) - floor((k-1) theta + phi)``."""
    phi = _as_fraction(phi)
    if not 0 <= phi < 1:
        raise ValueError("phi must lie in [0, 1)")
    floor_of = _FloorSequence(theta, phi)
    prev = floor_of(0)
    m = 0
    for k in range(1, bits + 1):
        cur = floor_of(k)
        m = (m << 1) + (cur - prev)
        prev = cur
    return BigAngle(m, bits, 1)


def staircase_rho(omega: BigAngle, n: int) -> float:
    """Frequency of the digit 1 among the first ``n`` binary digits of ``omega``.

    For ``omega = omega(theta)`` this estimates the rotation number theta of
    the minimal rotation set in ``[omega/2, (omega+1)/2]`` with error O(1/n).
    Off that family the estimate is a heuristic.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(omega.digits(n)) / n


def dyadic_preimages(t: BigAngle, k: int) -> list[BigAngle]:
    """All ``u`` with ``2**k u = t`` mod 1, ascending."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return [t.preimage(k, j) for j in range(1 << k)]


# ---------------------------------------------------------------------------
# The relation 2^n omega(theta) + 2^m omega(nu) = 0 mod 1
# ---------------------------------------------------------------------------

@dataclass
class RelationReport:
    theta: str
    nu: str
    N: int
    bits: int
    min_distance: float
    argmin: tuple[int, int]
    error: float
    verdict: str
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified_positive"

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "nu": self.nu,
            "N": self.N,
            "bits": self.bits,
            "min_distance": self.min_distance,
            "argmin": list(self.argmin),
            "error": self.error,
            "verdict": self.verdict,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "distance"])
        for n, m, d, _ in self.rows:
            w.writerow([n, m, repr(d)])
        return buf.getvalue()


def check_relation(theta, nu, N: int = 10, bits: int = DEFAULT_BITS, guard: int = 32) -> RelationReport:
    """Scan ``dist(2**n omega(theta) + 2**m omega(nu), Z)`` over ``0 <= n, m <= N``.

    The verdict is ``certified_positive`` only if every scanned distance
    exceeds its own propagated error; otherwise ``inconclusive``.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    if bits < N + guard:
        raise ValueError(f"bits={bits} leaves no headroom for N={N} doublings plus {guard} guard bits")
    w1 = omega_of_theta(theta, bits)
    w2 = omega_of_theta(nu, bits)
    best = None
    rows = []
    certified = True
    max_err = 0
    for n in range(N + 1):
        a = w1.doubled(n)
        for m in range(N + 1):
            s = a + w2.doubled(m)
            d = s.distance_to_integer_ulps()
            e = s.err_ulps
            rows.append((n, m, math.ldexp(d, -bits), math.ldexp(e, -bits)))
            if d <= e:
                certified = False
            max_err = max(max_err, e)
            if best is None or d < best[0]:
                best = (d, e, (n, m))
    d, e, arg = best
    return RelationReport(
        theta=_label(theta),
        nu=_label(nu),
        N=N,
        bits=bits,
        min_distance=math.ldexp(d, -bits),
        argmin=arg,
        error=math.ldexp(max_err, -bits),
        verdict="certified_positive" if certified else "inconclusive",
        rows=rows,
    )


def _label(x) -> str:
    return x.spec_string() if isinstance(x, ContinuedFraction) else repr(float(x))


def rotation_value(x) -> float:
    """Float value of a rotation-number input (continued fraction or real)."""
    return float(x.value) if isinstance(x, ContinuedFraction) else float(x)


def as_rotation(x) -> ContinuedFraction:
    """Coerce a float/Fraction/string to a continued fraction."""
    if isinstance(x, ContinuedFraction):
        return x
    if isinstance(x, str):
        return parse_rotation(x)
    return cf_expand(x, GOLDEN_DEPTH)


def iter_digits(angle: BigAngle, n: int) -> Iterable[int]:
    return iter(angle.digits(n))
