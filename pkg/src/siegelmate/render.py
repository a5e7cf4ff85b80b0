"""Orbit-classification images of the Julia-type sets.

Siegel disks cannot be certified numerically, so each is replaced by a
trap: a small disk around the Siegel point that is checked, on probe
orbits, to be mapped back into a slightly larger disk.  An orbit entering a
trap is classified to that side; orbits that never do stay undecided.  The
classification is conservative: undecided pixels over-cover the Julia set.

Palette (fixed for byte-exact regression):
    undecided  white   (255, 255, 255)
    side A     black   (0, 0, 0)
    side B     gray    (150, 150, 150)
    escaped    light   (225, 225, 225)
    overlays   accent  (215, 40, 40)
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

from .blaschke import BlaschkeCubic, PetersenModel, solve_t
from .cf_arith import as_rotation, rotation_value
from .errors import NoTrapError
from .rational import ChebyshevQuotient, QuadRational, SiegelQuadratic, F_normal, chebyshev_G, f_theta

TAU = 2.0 * math.pi


class Cls(IntEnum):
    UNDECIDED = 0
    SIDE_A = 1
    SIDE_B = 2
    ESCAPED = 3


PALETTE = np.array([[255, 255, 255], [0, 0, 0], [150, 150, 150], [225, 225, 225]], dtype=np.uint8)
ACCENT = np.array([215, 40, 40], dtype=np.uint8)

KINDS = ("fjulia", "petersen", "mating", "fmating", "chebyshev")
_KIND_ID = {k: i for i, k in enumerate(KINDS)}

DEFAULT_VIEWPORTS = {
    "fjulia": (-1.5, -1.5, 1.5, 1.5),
    "petersen": (-2.5, -4.5, 6.5, 4.5),
    "mating": (-4.0, -4.0, 4.0, 4.0),
    "fmating": (-3.0, -3.0, 3.0, 3.0),
    "chebyshev": (-2.0, -3.0, 4.0, 3.0),
}

TRAP_PROBES = 256
TRAP_ITERS = 200
TRAP_SLACK = 0.05
TRAP_MIN = 1e-6
DEFAULT_ETA = 0.25
DEFAULT_MAX_ITER = 2000
FJULIA_ESCAPE = 4.0
PETERSEN_ESCAPE = 1e3


# ---------------------------------------------------------------------------
# Traps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrapRegion:
    center: str           # "0", "inf" or "1"
    radius: float
    validated: bool
    max_drift: float      # max |u_k| / radius over probes and iterates

    def to_json(self) -> dict:
        return {"center": self.center, "radius": self.radius, "validated": self.validated, "max_drift": self.max_drift}


def _chart(target, which) -> tuple[Callable, np.ndarray]:
    """Map in the local chart u centred at the Siegel point, and critical points in that chart."""
    which = str(which)
    if isinstance(target, BlaschkeCubic):
        crit = target.ratfunc.critical_points()
        if which == "0":
            return target.eval, crit
        return target.eval_inf_chart, np.array([1 / c for c in crit if c != 0])
    if isinstance(target, QuadRational):
        crit = target.critical_points()
        if which == "0":
            return target.eval, crit
        return target.eval_inf_chart, 1 / crit
    if isinstance(target, ChebyshevQuotient):
        return (lambda u: target.eval(u + 1) - 1), np.array([target.c1 - 1, target.c2 - 1])
    if isinstance(target, SiegelQuadratic):
        a = target.alpha
        return (lambda u: (u + a) ** 2 + target.c - a), np.array([-a])
    # a bare callable in its own chart (test doubles)
    return target, np.asarray(getattr(target, "critical_points", []), dtype=complex)


def validate_trap(chart_map: Callable, radius: float, probes: int = TRAP_PROBES, iters: int = TRAP_ITERS) -> float:
    u = radius * np.exp(1j * TAU * np.arange(probes) / probes)
    drift = 1.0
    with np.errstate(all="ignore"):
        for _ in range(iters):
            u = chart_map(u)
            m = np.max(np.abs(u)) / radius
            if not np.isfinite(m):
                return math.inf
            drift = max(drift, float(m))
    return drift


def make_trap(target, which="0", eta: float = DEFAULT_ETA) -> TrapRegion:
    """Largest validated disk of the form eta * dist(centre, critical set) / 2^k."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    chart_map, crit = _chart(target, which)
    crit = np.asarray(crit)
    r = eta * float(np.min(np.abs(crit))) if crit.size else eta
    while r >= TRAP_MIN:
        drift = validate_trap(chart_map, r)
        if drift <= 1 + TRAP_SLACK:
            return TrapRegion(str(which), r, True, drift)
        r /= 2
    raise NoTrapError(f"no validated trap at {which} down to radius {TRAP_MIN}")


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _step(kind, z, p):
    if kind == 1:      # petersen
        return p[0] * z * z * (z - 3) / (1 - 3 * z)
    if kind == 2:      # mating
        return p[0] * z * (z - p[1]) * (z - p[2]) / ((1 - p[1].conjugate() * z) * (1 - p[2].conjugate() * z))
    if kind == 3:      # fmating
        return z * (p[0] * z + p[1]) / (p[2] * z + p[3])
    if kind == 4:      # chebyshev
        L = 1 - p[0]
        M = 1 + p[0]
        if abs(z) > 1e100:
            return 4 / (L * L * z)
        d = L * z + M
        return 4 * z / (d * d)
    return z * z + p[0]


@njit(cache=True)
def _classify_point(kind, z, p, r0, rinf, max_iter, capture, escape):
    inv = 1.0 / rinf if rinf > 0 else math.inf
    for k in range(max_iter + 1):
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            if kind == 0 or kind == 1:
                return 3, k
            if kind == 4:
                return 0, k
            return 2, k
        az = abs(z)
        if kind == 0:
            if az > escape:
                return 3, k
        elif kind == 1:
            if az < 1.0:
                return 1, k
            if az > escape:
                return 3, k
        elif kind == 4:
            if abs(z - 1) < r0:
                return 1, k
        else:
            if capture and kind == 2 and az < 1.0:
                return 1, k
            if az < r0:
                return 1, k
            if az > inv:
                return 2, k
        if k < max_iter:
            z = _step(kind, z, p)
    if kind == 0:
        return 1, max_iter
    return 0, max_iter


@njit(cache=True)
def _classify_grid(kind, re, im, p, r0, rinf, max_iter, capture, escape):
    h = im.shape[0]
    w = re.shape[0]
    cls = np.zeros((h, w), dtype=np.uint8)
    its = np.zeros((h, w), dtype=np.int32)
    for j in range(h):
        for i in range(w):
            c, k = _classify_point(kind, complex(re[i], im[j]), p, r0, rinf, max_iter, capture, escape)
            cls[j, i] = c
            its[j, i] = k
    return cls, its


@njit(cache=True)
def _classify_points(kind, zs, p, r0, rinf, max_iter, capture, escape):
    n = zs.shape[0]
    cls = np.zeros(n, dtype=np.uint8)
    its = np.zeros(n, dtype=np.int32)
    for i in range(n):
        c, k = _classify_point(kind, zs[i], p, r0, rinf, max_iter, capture, escape)
        cls[i] = c
        its[i] = k
    return cls, its


# ---------------------------------------------------------------------------
# Classifier objects
# ---------------------------------------------------------------------------

@dataclass
class Classifier:
    kind: str
    params: np.ndarray
    r0: float = 0.0
    rinf: float = 0.0
    capture: bool = True
    escape: float = math.inf
    traps: dict = field(default_factory=dict)

    def classify(self, zs, max_iter: int = DEFAULT_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
        zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
        return _classify_points(_KIND_ID[self.kind], zs, self.params, self.r0, self.rinf, int(max_iter),
                                self.capture, self.escape)

    def classify_one(self, z, max_iter: int = DEFAULT_MAX_ITER) -> tuple[Cls, int]:
        c, k = self.classify([z], max_iter)
        return Cls(int(c[0])), int(k[0])

    def grid(self, re: np.ndarray, im: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
        return _classify_grid(_KIND_ID[self.kind], re, im, self.params, self.r0, self.rinf, int(max_iter),
                              self.capture, self.escape)


def mating_classifier(model: BlaschkeCubic, eta: float = DEFAULT_ETA, traps_only: bool = False) -> Classifier:
    """Disk capture plus the trap at infinity; with ``traps_only`` use
    reflection-symmetric traps at 0 and infinity instead of disk capture."""
    tinf = make_trap(model, "inf", eta)
    traps = {"inf": tinf}
    r0 = 0.0
    if traps_only:
        t0 = make_trap(model, "0", eta)
        r = min(t0.radius, tinf.radius)
        traps["0"] = t0
        r0, rinf = r, r
    else:
        rinf = tinf.radius
    p = np.array([model.lam, model.a, model.b], dtype=complex)
    return Classifier("mating", p, r0, rinf, not traps_only, math.inf, traps)


def fmating_classifier(F: QuadRational, eta: float = DEFAULT_ETA, symmetric: bool = False) -> Classifier:
    t0, tinf = make_trap(F, "0", eta), make_trap(F, "inf", eta)
    r0, rinf = t0.radius, tinf.radius
    if symmetric:
        r0 = rinf = min(r0, rinf)
    return Classifier("fmating", np.array([F.A, F.B, F.C, F.D]), r0, rinf, False, math.inf, {"0": t0, "inf": tinf})


def petersen_classifier(model: PetersenModel) -> Classifier:
    return Classifier("petersen", np.array([model.kappa]), 0.0, 0.0, True, PETERSEN_ESCAPE)


def fjulia_classifier(f: SiegelQuadratic, R: float = FJULIA_ESCAPE) -> Classifier:
    if R < 2 + abs(f.c):
        raise ValueError(f"escape radius {R} below 2 + |c|")
    return Classifier("fjulia", np.array([f.c]), 0.0, 0.0, False, R)


def chebyshev_classifier(G: ChebyshevQuotient, eta: float = DEFAULT_ETA) -> Classifier:
    t1 = make_trap(G, "1", eta)
    return Classifier("chebyshev", np.array([G.e]), t1.radius, 0.0, False, math.inf, {"1": t1})


def classify_B(model: BlaschkeCubic, classifier: Classifier, z, max_iter: int = DEFAULT_MAX_ITER):
    return classifier.classify_one(z, max_iter)


def classify_F(F: QuadRational, classifier: Classifier, z, max_iter: int = DEFAULT_MAX_ITER):
    return classifier.classify_one(z, max_iter)


def escape_classify_f(c: complex, z: complex, max_iter: int = DEFAULT_MAX_ITER, R: float = FJULIA_ESCAPE):
    """``(True, k)`` if |f^k(z)| > R first at step k, else ``(False, max_iter)``."""
    if R < 2 + abs(c):
        raise ValueError(f"escape radius {R} below 2 + |c|")
    cls, k = _classify_point(0, complex(z), np.array([complex(c)]), 0.0, 0.0, int(max_iter), False, float(R))
    return cls == 3, int(k)


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

@dataclass
class ImageGrid:
    kind: str
    width: int
    height: int
    viewport: tuple[float, float, float, float]
    classes: np.ndarray = field(repr=False)
    iters: np.ndarray = field(repr=False)
    config: dict = field(default_factory=dict)
    overlay_mask: Optional[np.ndarray] = field(default=None, repr=False)

    def rgb(self) -> np.ndarray:
        img = PALETTE[self.classes]
        if self.overlay_mask is not None:
            img = img.copy()
            img[self.overlay_mask] = ACCENT
        return img

    def to_ppm(self) -> bytes:
        return b"P6\n%d %d\n255\n" % (self.width, self.height) + self.rgb().tobytes()

    def to_png(self) -> bytes:
        raw = b"".join(b"\x00" + row.tobytes() for row in self.rgb())

        def chunk(tag, data):
            return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

        ihdr = struct.pack(">IIBBBBB", self.width, self.height, 8, 2, 0, 0, 0)
        return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")

    def pixel_to_complex(self, i, j):
        re0, im0, re1, im1 = self.viewport
        return re0 + (np.asarray(i) + 0.5) * (re1 - re0) / self.width + 1j * (im1 - (np.asarray(j) + 0.5) * (im1 - im0) / self.height)


def pixel_axes(viewport, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    re0, im0, re1, im1 = viewport
    re = re0 + (np.arange(width) + 0.5) * (re1 - re0) / width
    im = im1 - (np.arange(height) + 0.5) * (im1 - im0) / height
    return re, im


def rasterize(polylines: Sequence[np.ndarray], viewport, width: int, height: int) -> np.ndarray:
    """1-pixel strokes of complex polylines as a boolean mask."""
    mask = np.zeros((height, width), dtype=bool)
    re0, im0, re1, im1 = viewport
    sx, sy = width / (re1 - re0), height / (im1 - im0)
    for pl in polylines:
        pl = np.asarray(pl, dtype=complex)
        pl = pl[np.isfinite(pl)]
        if len(pl) == 0:
            continue
        x = (pl.real - re0) * sx
        y = (im1 - pl.imag) * sy
        for k in range(max(len(pl) - 1, 1)):
            x0, y0 = x[k], y[k]
            x1, y1 = (x[k + 1], y[k + 1]) if len(pl) > 1 else (x0, y0)
            n = int(min(max(abs(x1 - x0), abs(y1 - y0)), 4 * (width + height))) + 1
            ts = np.linspace(0, 1, n + 1)
            xi = np.floor(x0 + ts * (x1 - x0)).astype(int)
            yi = np.floor(y0 + ts * (y1 - y0)).astype(int)
            ok = (xi >= 0) & (xi < width) & (yi >= 0) & (yi < height)
            mask[yi[ok], xi[ok]] = True
    return mask


def build_classifier(kind: str, theta, nu=None, eta: float = DEFAULT_ETA, model=None) -> Classifier:
    th = rotation_value(as_rotation(theta))
    if kind == "fjulia":
        return fjulia_classifier(f_theta(th))
    if kind == "petersen":
        return petersen_classifier(model if model is not None else solve_t(theta, "petersen").model)
    if kind == "mating":
        return mating_classifier(model if model is not None else solve_t(theta, "mating", nu).model, eta)
    if kind == "fmating":
        return fmating_classifier(F_normal(th, rotation_value(as_rotation(nu))), eta)
    if kind == "chebyshev":
        return chebyshev_classifier(chebyshev_G(th), eta)
    raise ValueError(f"unknown render kind {kind!r}")


def render(kind: str, theta, nu=None, width: int = 512, height: int = 512, viewport=None,
           max_iter: int = DEFAULT_MAX_ITER, eta: float = DEFAULT_ETA, overlays: Sequence = (),
           model=None, classifier: Optional[Classifier] = None) -> ImageGrid:
    if kind not in KINDS:
        raise ValueError(f"unknown render kind {kind!r}")
    vp = tuple(float(v) for v in (viewport or DEFAULT_VIEWPORTS[kind]))
    clf = classifier or build_classifier(kind, theta, nu, eta, model)
    re, im = pixel_axes(vp, width, height)
    cls, its = clf.grid(re, im, max_iter)
    mask = rasterize(overlays, vp, width, height) if len(overlays) else None
    th = as_rotation(theta)
    config = {
        "kind": kind,
        "theta_cf": th.spec_string(),
        "nu_cf": as_rotation(nu).spec_string() if nu is not None else None,
        "viewport": {"re0": vp[0], "im0": vp[1], "re1": vp[2], "im1": vp[3]},
        "px": {"w": width, "h": height},
        "max_iter": max_iter,
        "eta": eta,
        "traps": {k: t.to_json() for k, t in clf.traps.items()},
        "overlays": [len(o) for o in overlays],
    }
    return ImageGrid(kind, width, height, vp, cls, its, config, mask)


def pixel_churn(a: ImageGrid, b: ImageGrid) -> float:
    return float(np.mean(a.classes != b.classes))


def symmetry_check(classifier: Classifier, samples: np.ndarray, involution: Callable, max_iter: int = DEFAULT_MAX_ITER
                   ) -> float:
    """Fraction of samples whose class, with sides swapped, equals the class of the involuted point."""
    c1, _ = classifier.classify(samples, max_iter)
    c2, _ = classifier.classify(involution(samples), max_iter)
    swap = np.array([0, 2, 1, 3], dtype=np.uint8)
    return float(np.mean(swap[c1] == c2))


def config_json(img: ImageGrid) -> str:
    return json.dumps(img.config, sort_keys=True, indent=2)
