"""Rotation numbers of circle maps and closest-return bookkeeping.

Circle maps are handled through a lift ``F: R -> R`` with ``F(x+1) = F(x)+1``.
Angles are in turns (x in R/Z corresponds to e^{2 pi i x}).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cf_arith import ContinuedFraction, cf_expand, cf_prefix_agreement
from .errors import NumericError

RETURN_TOL = 1e-14


@dataclass(frozen=True)
class CircleLift:
    """Lift of a degree-one circle map.

    ``evaluator`` maps floats (or float arrays) to floats.  ``advance``, if
    given, is a fast ``(x0, n) -> F^n(x0)`` used for long orbits; otherwise
    the evaluator is iterated in Python.
    """

    evaluator: Callable
    critical_lift: Optional[float] = None
    advance: Optional[Callable[[float, int], float]] = None
    name: str = ""

    def __call__(self, x):
        return self.evaluator(x)

    def iterate(self, x0: float, n: int) -> float:
        if self.advance is not None:
            return float(self.advance(float(x0), int(n)))
        f = self.evaluator
        x = float(x0)
        for _ in range(n):
            x = float(f(x))
        return x

    def orbit(self, x0: float, n: int) -> np.ndarray:
        """``[x0, F(x0), ..., F^n(x0)]`` (unreduced)."""
        out = np.empty(n + 1)
        out[0] = x = float(x0)
        f = self.evaluator
        for k in range(1, n + 1):
            x = float(f(x))
            out[k] = x
        return out

    def degree_one_defect(self, samples: int = 257) -> float:
        x = np.linspace(0.0, 1.0, samples)
        return float(np.max(np.abs(self.evaluator(x + 1.0) - self.evaluator(x) - 1.0)))

    def is_monotone(self, samples: int = 4097, slack: float = 1e-12) -> bool:
        x = np.linspace(0.0, 1.0, samples)
        return bool(np.all(np.diff(self.evaluator(x)) >= -slack))


def rigid_rotation(theta: float) -> CircleLift:
    theta = float(theta)
    return CircleLift(lambda x: x + theta, 0.0, lambda x0, n: x0 + n * theta, name=f"rotation({theta})")


@dataclass(frozen=True)
class RotationEstimate:
    rho: float            # reduced to [0, 1)
    displacement: float   # unreduced (F^N(x0) - x0) / N
    error: float          # 2 / N
    iters: int
    seed: float

    def cf_prefix(self, depth: int) -> tuple[int, ...]:
        if not 0.0 < self.rho < 1.0:
            return ()
        return cf_expand(self.rho, depth).entries

    def agrees_with(self, target: ContinuedFraction, depth: int) -> bool:
        return cf_prefix_agreement(self.rho, target.entries[:depth]) >= depth

    def to_json(self) -> dict:
        return {"rho": self.rho, "displacement": self.displacement, "error": self.error, "iters": self.iters}


def rotation_number(lift: CircleLift, iters: int = 10**6, seed: float = 0.0) -> RotationEstimate:
    """Birkhoff estimate ``(F^N(x0) - x0) / N`` with error bar ``2/N``."""
    if iters < 1000:
        raise ValueError("rotation_number needs at least 1000 iterates")
    xn = lift.iterate(seed, iters)
    if not math.isfinite(xn):
        raise NumericError(f"lift orbit diverged after {iters} iterates from x0={seed}")
    disp = (xn - seed) / iters
    return RotationEstimate(disp % 1.0, disp, 2.0 / iters, iters, float(seed))


# ---------------------------------------------------------------------------
# Closest returns
# ---------------------------------------------------------------------------

@dataclass
class ClosestReturnTable:
    moments: list[int]
    arcs: Optional[list[float]] = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "q_n", "|I_n|", "ratio"])
        arcs = self.arcs or [float("nan")] * len(self.moments)
        for n, (q, arc) in enumerate(zip(self.moments, arcs)):
            ratio = arcs[n + 1] / arc if n + 1 < len(arcs) and arc > 0 else float("nan")
            w.writerow([n, q, repr(arc), repr(ratio)])
        return buf.getvalue()


def closest_return_moments(cf: ContinuedFraction, M: int) -> ClosestReturnTable:
    """Convergent denominators ``q_0 .. q_{M-1}``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if M - 1 > len(cf):
        raise ValueError(f"need {M - 1} entries, continued fraction has {len(cf)}")
    return ClosestReturnTable([q for _, q in cf.convergents()[:M]])


def _circ_dist(x: np.ndarray | float, c: float):
    d = np.abs((np.asarray(x) - c + 0.5) % 1.0 - 0.5)
    return d


def empirical_closest_returns(lift: CircleLift, N: int, c: Optional[float] = None) -> ClosestReturnTable:
    """Moments ``n <= N`` at which the orbit of ``c`` comes closer to ``c`` than ever before.

    Improvements smaller than :data:`RETURN_TOL` count as ties and go to the
    earlier moment.  An orbit point within the tolerance of ``c`` ends the
    scan with a warning (rational rotation number, or precision exhausted).
    """
    if c is None:
        c = lift.critical_lift if lift.critical_lift is not None else 0.0
    orbit = lift.orbit(c, N)
    dists = _circ_dist(orbit[1:], c)
    moments, arcs = [], []
    best = math.inf
    for n, d in enumerate(dists, start=1):
        if d < best - RETURN_TOL:
            moments.append(n)
            arcs.append(float(d))
            best = d
            if d <= RETURN_TOL:
                warnings.warn(f"orbit returns to the critical point at n={n}; truncating", stacklevel=2)
                break
    return ClosestReturnTable(moments, arcs)


@dataclass
class CommensurabilityReport:
    rows: list[tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        return [r[3] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "q_n", "|I_n|", "ratio"])
        for row in self.rows:
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
        return buf.getvalue()


def commensurability_report(lift: CircleLift, levels: int, N: int = 100000,
                            c: Optional[float] = None) -> CommensurabilityReport:
    """Ratios ``|I_{n+1}| / |I_n|`` of consecutive closest-return arcs.

    Diagnostic only.  For a rigid golden rotation the ratios tend to the
    golden mean 0.618.
    """
    table = empirical_closest_returns(lift, N, c)
    arcs = table.arcs
    rows = []
    for n in range(min(levels + 1, len(arcs) - 1)):
        if arcs[n] < 1e-15:
            warnings.warn(f"arc length underflow at level {n}", stacklevel=2)
            break
        rows.append((n, table.moments[n], arcs[n], arcs[n + 1] / arcs[n]))
    return CommensurabilityReport(rows)
