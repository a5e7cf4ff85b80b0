"""Drops: iterated preimages of the unit disk attached to the circle.

A drop with address (i1, ..., ik) has depth n = i1 + ... + ik and
generation k.  One application of the model sends it conformally onto the
drop with the shifted address

    (i1, i2, ...) -> (i1 - 1, i2, ...)   if i1 > 1
    (1, i2, ...)  -> (i2, ...)           if i1 = 1

and the empty address is the unit disk itself.  A boundary point of a depth-n
drop is labelled by s in [0, 1] through  M^n(z) = v e^{2 pi i s},  where v is
the critical value; s = 0 and s = 1 are the root.  Boundaries are computed by
pulling back the image drop's boundary at the same s, selecting the cubic
root nearest the previous sample (continuity tracking).

Limb diameters here are diameters of a drop together with its *constructed*
descendants.  That is a lower bound for the true limb, so the profile is a
trend diagnostic and not a bound.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import AmbiguityError, NumericError, TrackingError

TAU = 2.0 * math.pi
Address = tuple[int, ...]

ACCEPT_RATIO = 0.3
MAX_REFINE = 16
ROOT_PROBE = 1e-7


def shift(address: Address) -> Address:
    if not address:
        raise ValueError("the unit disk has no image address")
    if address[0] > 1:
        return (address[0] - 1,) + address[1:]
    return address[1:]


def depth_of(address: Address) -> int:
    return sum(address)


def default_resolution(generation: int) -> int:
    return max(512 >> max(generation - 1, 0), 64)


def circle_backward_orbit(model, n: int) -> np.ndarray:
    """``x_1 = 1`` and ``x_{j+1}`` the preimage of ``x_j`` on the unit circle."""
    xs = [1.0 + 0j]
    for _ in range(n - 1):
        pre = np.asarray(model.preimages(xs[-1]))
        k = int(np.argmin(np.abs(np.abs(pre) - 1.0)))
        z = complex(pre[k])
        if abs(abs(z) - 1.0) > 1e-9:
            raise NumericError(f"no preimage of {xs[-1]} on the unit circle (closest modulus {abs(z)})")
        xs.append(z / abs(z))
    return np.array(xs)


@dataclass
class DropNode:
    address: Address
    root: complex
    s: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    side: str = "disk"

    @property
    def depth(self) -> int:
        return depth_of(self.address)

    @property
    def generation(self) -> int:
        return len(self.address)

    @property
    def parent(self) -> Optional[Address]:
        return self.address[:-1] if self.address else None

    def hull_points(self) -> np.ndarray:
        return _hull(self.boundary)

    @property
    def diameter(self) -> float:
        return _diameter(self.hull_points())


def _hull(pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts)
    if len(pts) < 4:
        return pts
    xy = np.column_stack([pts.real, pts.imag])
    try:
        h = ConvexHull(xy)
    except QhullError:
        return pts
    return pts[h.vertices]


def _diameter(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    return float(np.max(np.abs(pts[:, None] - pts[None, :])))


class DropTree:
    """Drops of one model, keyed by address.  Built by :func:`build_drop_tree`."""

    def __init__(self, model, side: str = "disk"):
        self.model = model
        self.side = side
        self.v = complex(model.eval(1.0 + 0j))
        self.nodes: dict[Address, DropNode] = {}
        self._xs = circle_backward_orbit(model, 2)

    # -- geometry of boundaries -------------------------------------------
    def _x(self, n: int) -> complex:
        if len(self._xs) < n:
            self._xs = circle_backward_orbit(self.model, max(n, 2 * len(self._xs)))
        return complex(self._xs[n - 1])

    def _pick(self, cands: np.ndarray, ref: complex, s: float, strict: bool = True) -> complex:
        d = np.abs(cands - ref)
        order = np.argsort(d)
        if strict and d[order[0]] > ACCEPT_RATIO * d[order[1]]:
            raise TrackingError(f"branch ambiguous at s={s}", parameter=s)
        return complex(cands[order[0]])

    def boundary_point(self, address: Address, s: float) -> complex:
        """Boundary point of a constructed drop (or the unit circle) at parameter s."""
        s = float(s) % 1.0
        if not address:
            return self.v * complex(np.exp(1j * TAU * s))
        node = self.nodes[address]
        j = int(round(s * (len(node.s) - 1)))
        if abs(node.s[j] - s) < 1e-15:
            return complex(node.boundary[j])
        w = self.boundary_point(shift(address), s)
        cands = np.asarray(self.model.preimages(w))
        if address == (1,):
            return complex(cands[np.argmax(np.abs(cands))])
        ref = node.root if min(s, 1 - s) < 1.0 / (len(node.s) - 1) else complex(node.boundary[j])
        return self._pick(cands, ref, s, strict=False)

    def _track(self, address: Address, prev: complex, s0: float, s1: float, level: int) -> list:
        w = self.boundary_point(shift(address), s1)
        cands = np.asarray(self.model.preimages(w))
        d = np.sort(np.abs(cands - prev))
        if d[0] <= ACCEPT_RATIO * d[1]:
            return [(s1, complex(cands[np.argmin(np.abs(cands - prev))]))]
        if level >= MAX_REFINE:
            raise TrackingError(f"lost the inverse branch of drop {address} near s={s1}", parameter=s1)
        mid = 0.5 * (s0 + s1)
        first = self._track(address, prev, s0, mid, level + 1)
        return first + self._track(address, first[-1][1], mid, s1, level + 1)

    def drop_boundary(self, address: Address, root: complex, resolution: int) -> tuple[np.ndarray, np.ndarray]:
        s = np.arange(resolution + 1) / resolution
        if address == (1,):
            w = self.v * np.exp(1j * TAU * s)
            cands = np.asarray(self.model.preimages(w))
            pts = cands[np.arange(len(s)), np.argmax(np.abs(cands), axis=1)]
            pts[0] = pts[-1] = root
            return s, pts
        image = self.nodes[shift(address)]
        step = (len(image.s) - 1) // resolution
        if step * resolution == len(image.s) - 1:
            ws = image.boundary[::step]
        else:
            ws = np.array([self.boundary_point(image.address, x) for x in s])
        cands = np.asarray(self.model.preimages(ws))
        pts = np.empty(len(s), dtype=complex)
        pts[0] = prev = root
        for j in range(1, len(s)):
            c = cands[j]
            d = np.abs(c - prev)
            order = np.argsort(d)
            if d[order[0]] <= ACCEPT_RATIO * d[order[1]]:
                prev = complex(c[order[0]])
            else:
                prev = self._track(address, prev, s[j - 1], s[j], 1)[-1][1]
            pts[j] = prev
        if abs(pts[-1] - root) > 1e-6 * max(1.0, abs(root)):
            raise TrackingError(f"boundary of drop {address} does not close up at its root", parameter=1.0)
        pts[-1] = root
        return s, pts

    # -- roots ---------------------------------------------------------------
    def child_root(self, parent: Address, index: int) -> complex:
        """Root of the child ``parent + (index,)``: the preimage of the shifted
        drop's root that lies on the parent's boundary."""
        child = parent + (index,)
        if not parent:
            return self._x(index)
        target = self.nodes[shift(child)].root if shift(child) else self.v
        cands = np.asarray(self.model.preimages(target))
        m = depth_of(parent)
        residuals = []
        for c in cands:
            z = complex(c)
            for _ in range(m):
                z = complex(self.model.eval(z))
            if not math.isfinite(abs(z)) or abs(abs(z) - 1.0) > 1e-6:
                residuals.append(math.inf)
                continue
            s_star = (np.angle(z / self.v) / TAU) % 1.0
            residuals.append(abs(complex(c) - self.boundary_point(parent, s_star)))
        residuals = np.array(residuals)
        order = np.argsort(residuals)
        tol = 1e-6 * max(1.0, self.nodes[parent].diameter)
        if residuals[order[0]] > tol:
            raise NumericError(f"no preimage of {target} lies on the boundary of drop {parent}")
        if residuals[order[1]] <= tol:
            raise AmbiguityError(f"two candidate roots on the boundary of drop {parent}",
                                 candidates=[complex(c) for c in cands[order[:2]]])
        return complex(cands[order[0]])

    def add(self, address: Address, resolution: Optional[int] = None) -> DropNode:
        if address in self.nodes:
            return self.nodes[address]
        if resolution is None:
            resolution = default_resolution(len(address))
        root = self.child_root(address[:-1], address[-1])
        s, pts = self.drop_boundary(address, root, resolution)
        node = DropNode(address, root, s, pts, self.side)
        self.nodes[address] = node
        return node

    # -- diagnostics ------------------------------------------------------
    def root_angle(self, address: Address, probe: float = ROOT_PROBE) -> float:
        """Interior angle (degrees) of the drop at its root."""
        node = self.nodes[address]
        d1 = self.boundary_point(address, probe) - node.root
        d2 = self.boundary_point(address, 1 - probe) - node.root
        return math.degrees(abs(np.angle(d1 / d2)))

    def forward_residual(self, address: Address) -> float:
        node = self.nodes[address]
        z = node.boundary.copy()
        for _ in range(node.depth):
            z = self.model.eval(z)
        return float(np.max(np.abs(np.abs(z) - 1.0)))

    def dynamics_residual(self, address: Address) -> float:
        img = shift(address)
        target = self.nodes[img].root if img else self.v
        return abs(complex(self.model.eval(self.nodes[address].root)) - target)

    def descendants(self, address: Address) -> list[Address]:
        k = len(address)
        return [a for a in self.nodes if len(a) > k and a[:k] == address]

    def limb_diameter(self, address: Address) -> float:
        pts = [self.nodes[address].hull_points()] + [self.nodes[a].hull_points() for a in self.descendants(address)]
        return _diameter(_hull(np.concatenate(pts)))

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "side": self.side,
            "nodes": [
                {"address": list(a), "depth": n.depth, "generation": n.generation,
                 "root": {"re": n.root.real, "im": n.root.imag}, "diameter": n.diameter}
                for a, n in sorted(self.nodes.items(), key=lambda kv: (kv[1].depth, kv[0]))
            ],
        }

    def boundaries_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["address", "s", "re", "im"])
        for a, n in sorted(self.nodes.items(), key=lambda kv: (kv[1].depth, kv[0])):
            label = ".".join(map(str, a))
            for s, z in zip(n.s, n.boundary):
                w.writerow([label, repr(float(s)), repr(z.real), repr(z.imag)])
        return buf.getvalue()


def _compositions(max_gen: int, max_depth: int) -> list[Address]:
    out = []

    def rec(prefix, remaining):
        if prefix:
            out.append(prefix)
        if len(prefix) == max_gen:
            return
        for i in range(1, remaining + 1):
            rec(prefix + (i,), remaining - i)

    rec((), max_depth)
    return out


def _closure(addresses: Iterable[Address]) -> set[Address]:
    need, stack = set(), list(addresses)
    while stack:
        a = tuple(a for a in stack.pop())
        if not a or a in need:
            continue
        need.add(a)
        stack.append(a[:-1])
        stack.append(shift(a))
    return need


def _mirror(tree: DropTree, model) -> DropTree:
    out = DropTree.__new__(DropTree)
    out.model, out.side, out.v = model, "infinity", tree.v
    out._xs = tree._xs
    out.nodes = {a: DropNode(a, 1 / n.root.conjugate(), n.s, 1 / np.conj(n.boundary), "infinity")
                 for a, n in tree.nodes.items()}
    return out


def swapped_model(model):
    """The mating model with theta and nu exchanged."""
    from .blaschke import solve_t
    if model.theta is None:
        raise ValueError("model does not record its target theta; pass swapped_model explicitly")
    if abs(model.theta - model.nu) < 1e-15:
        return model
    return solve_t(model.nu, "mating", model.theta).model


def build_drop_tree(model, side: str = "disk", max_generation: int = 3, max_depth: int = 12,
                    resolution: Optional[int] = None, addresses: Optional[Iterable[Address]] = None,
                    swapped=None) -> DropTree:
    """All drops with generation <= max_generation and depth <= max_depth
    (or the closure of ``addresses`` under parent and shift), by increasing depth.

    ``side="infinity"`` mirrors the unit-disk tree of the parameter-swapped
    mating model by z -> 1/conj(z).
    """
    if side == "infinity":
        other = swapped if swapped is not None else swapped_model(model)
        return _mirror(build_drop_tree(other, "disk", max_generation, max_depth, resolution, addresses), model)
    if side != "disk":
        raise ValueError(f"unknown side {side!r}")
    wanted = _closure(addresses) if addresses is not None else set(_compositions(max_generation, max_depth))
    tree = DropTree(model, side)
    for a in sorted(wanted, key=lambda a: (depth_of(a), len(a), a)):
        res = resolution if resolution is not None else default_resolution(len(a))
        if resolution is not None:
            res = max(resolution >> (len(a) - 1), 64)
        tree.add(a, res)
    return tree


def limb_diameter_profile(tree: DropTree) -> dict[int, float]:
    """depth -> max limb diameter over constructed drops of that depth."""
    prof: dict[int, float] = {}
    for a, n in tree.nodes.items():
        prof[n.depth] = max(prof.get(n.depth, 0.0), tree.limb_diameter(a))
    return dict(sorted(prof.items()))


def profile_ratio(profile: dict[int, float], d0: int, d: int) -> float:
    return profile[d] / profile[d0]


def drop_chain_landing(tree: DropTree, chain: list[Address]) -> tuple[complex, float]:
    """Root of the deepest drop of a nested chain and that drop's diameter as radius."""
    if not chain:
        raise ValueError("empty chain")
    for p, c in zip(chain, chain[1:]):
        if c[:-1] != p:
            raise ValueError(f"{c} is not a child of {p}")
    for a in chain:
        if a and a not in tree.nodes:
            raise IndexError(f"drop {a} is not in the constructed tree")
    last = tree.nodes[chain[-1]] if chain[-1] else None
    if last is None:
        return 0j, 1.0
    return last.root, last.diameter
