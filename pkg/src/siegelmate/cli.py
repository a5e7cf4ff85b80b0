"""Command-line interface: ``siegelmate <subcommand> [flags]``.

Exit status: 0 on success, 2 on usage errors, 1 on numeric or solver
failures.  Every run writes its artifact and ``<out>.manifest.json`` echoing
the full effective configuration.  The only environment variable consulted
is ``SIEGELMATE_OUTDIR``, which relocates relative output paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cf_arith import (BigAngle, ContinuedFraction, check_relation, omega_of_theta, parse_rotation,
                       rotation_value, staircase_rho, sturmian_point)
from .errors import SiegelMateError

REPORT_SCHEMA = "siegelmate.report/1"
OUTDIR_ENV = "SIEGELMATE_OUTDIR"


class _Once(argparse.Action):
    """Store a value, refusing a second occurrence of the same flag."""

    def __call__(self, parser, namespace, values, option_string=None):
        if getattr(namespace, "_seen_" + self.dest, False):
            parser.error(f"{option_string} given more than once")
        setattr(namespace, "_seen_" + self.dest, True)
        setattr(namespace, self.dest, values)


def _rotation(text: str) -> ContinuedFraction:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return parse_rotation(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _angle(text: str) -> str:
    if text in ("omega", "omega/2", "(omega+1)/2"):
        return text
    try:
        Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle {text!r}") from None
    return text


def _viewport(text: str) -> list[float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("viewport needs re0,im0,re1,im1")
    return parts


def _add_theta(p, nu: bool = False, required: bool = True):
    p.add_argument("--theta", type=_rotation, action=_Once, required=required,
                   help="rotation number: cf:a1,a2,..., cf:KxN, or a decimal")
    if nu:
        p.add_argument("--nu", type=_rotation, action=_Once, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siegelmate", description="Matings of Siegel quadratic polynomials, at desk scale.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve for the Blaschke parameter t")
    p.add_argument("--family", choices=["petersen", "mating"], default="petersen")
    p.add_argument("--theta", type=_rotation, action=_Once, required=True)
    p.add_argument("--nu", type=_rotation, action=_Once)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--probe-iters", type=int, default=10**5)
    p.add_argument("--confirm-iters", type=int, default=10**6)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--out", default="solve.json")

    p = sub.add_parser("omega", help="external angle of the critical value")
    _add_theta(p)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--out", default="omega.json")

    p = sub.add_parser("rotset", help="Sturmian rotation-set points and staircase estimate")
    _add_theta(p)
    p.add_argument("--phi", type=Fraction, default=Fraction(0))
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--digits", type=int, default=200)
    p.add_argument("--out", default="rotset.json")

    p = sub.add_parser("relation", help="scan 2^n omega(theta) + 2^m omega(nu) mod 1")
    _add_theta(p, nu=True)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--out", default="relation.json")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("drops", help="build a drop tree")
    p.add_argument("--family", choices=["petersen", "mating"], default="petersen")
    p.add_argument("--theta", type=_rotation, action=_Once, required=True)
    p.add_argument("--nu", type=_rotation, action=_Once)
    p.add_argument("--side", choices=["disk", "infinity"], default="disk")
    p.add_argument("--max-generation", type=int, default=3)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--out", default="drops.json")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("rays", help="trace external rays of the Siegel quadratic")
    _add_theta(p)
    p.add_argument("--angle", type=_angle, action="append", default=None,
                   help="angle as a fraction, or omega, omega/2, (omega+1)/2 (repeatable)")
    p.add_argument("--R0", type=float, default=100.0)
    p.add_argument("--S", type=int, default=4)
    p.add_argument("--eps-land", type=float, default=1e-6)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--out", default="rays.json")
    p.add_argument("--csv", default=None)

    p = sub.add_parser("pinch", help="pinch pairs of the mating")
    _add_theta(p, nu=True)
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--eps-land", type=float, default=1e-6)
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--out", default="pinch.csv")

    p = sub.add_parser("render", help="render an orbit-classification image")
    p.add_argument("--kind", choices=["fjulia", "petersen", "mating", "fmating", "chebyshev"], default="fjulia")
    p.add_argument("--theta", type=_rotation, action=_Once, required=True)
    p.add_argument("--nu", type=_rotation, action=_Once)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--viewport", type=_viewport, default=None)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--eta", type=float, default=0.25)
    p.add_argument("--overlay", choices=["drops", "rays"], action="append", default=[])
    p.add_argument("--out", default="render.ppm")

    p = sub.add_parser("report", help="solve + omega + relation + limb profile bundle")
    _add_theta(p, nu=True)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--out", default="report.json")
    return ap


# ---------------------------------------------------------------------------

def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: str, data, outputs: list) -> Path:
    p = _resolve(path)
    if isinstance(data, bytes):
        p.write_bytes(data)
    elif isinstance(data, str):
        p.write_text(data)
    else:
        p.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    outputs.append(str(p))
    return p


def _effective(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k.startswith("_seen_"):
            continue
        if isinstance(v, ContinuedFraction):
            v = v.spec_string()
        elif isinstance(v, Fraction):
            v = str(v)
        out[k] = v
    return out


def _need_nu(args):
    if args.nu is None:
        raise _Usage("--nu is required for the mating family")
    return args.nu


class _Usage(Exception):
    pass


def _ray_angles(theta, specs, bits):
    from .rays import critical_angles
    if any(s.startswith(("omega", "(omega")) for s in specs):
        lo, hi = critical_angles(theta, bits)
    out = []
    for s in specs:
        if s == "omega":
            out.append((s, lo.doubled()))
        elif s == "omega/2":
            out.append((s, lo))
        elif s == "(omega+1)/2":
            out.append((s, hi))
        else:
            out.append((s, BigAngle.from_fraction(Fraction(s), bits)))
    return out


def run(args) -> tuple[dict, list]:
    outputs: list = []
    cmd = args.command
    summary: dict = {}

    if cmd == "solve":
        from .blaschke import solve_t
        nu = _need_nu(args) if args.family == "mating" else None
        res = solve_t(args.theta, args.family, nu, samples=args.samples, probe_iters=args.probe_iters,
                      confirm_iters=args.confirm_iters, depth=args.depth)
        data = res.to_json()
        _write(args.out, data, outputs)
        summary = {"t": res.t, **({"a": data["a"], "b": data["b"]} if "a" in data else {})}

    elif cmd == "omega":
        w = omega_of_theta(args.theta, args.bits)
        data = {"theta_cf": args.theta.spec_string(), "omega": w.to_json(), "float": float(w),
                "digits": "".join(map(str, w.digits(min(64, w.reliable_digits()))))}
        _write(args.out, data, outputs)
        summary = {"omega": float(w), "digits": data["digits"][:32]}

    elif cmd == "rotset":
        w = omega_of_theta(args.theta, args.bits)
        p = sturmian_point(args.theta, args.phi, args.bits)
        data = {"theta_cf": args.theta.spec_string(), "phi": str(args.phi), "point": p.to_json(),
                "omega": w.to_json(), "semicircle": [float(w) / 2, (float(w) + 1) / 2],
                "staircase_rho": staircase_rho(w, min(args.digits, w.reliable_digits()))}
        _write(args.out, data, outputs)
        summary = {"point": float(p), "staircase_rho": data["staircase_rho"]}

    elif cmd == "relation":
        rep = check_relation(args.theta, args.nu, args.N, args.bits)
        _write(args.out, rep.to_json(), outputs)
        if args.csv:
            _write(args.csv, rep.to_csv(), outputs)
        summary = {"min_distance": rep.min_distance, "argmin": list(rep.argmin), "verdict": rep.verdict}

    elif cmd == "drops":
        from .blaschke import solve_t
        from .drops import build_drop_tree, limb_diameter_profile
        nu = _need_nu(args) if args.family == "mating" else None
        if args.side == "infinity" and args.family != "mating":
            raise _Usage("--side infinity needs --family mating")
        model = solve_t(args.theta, args.family, nu).model
        swapped = solve_t(nu, "mating", args.theta).model if args.side == "infinity" else None
        tree = build_drop_tree(model, args.side, args.max_generation, args.max_depth, args.resolution,
                               swapped=swapped)
        data = tree.to_json()
        data["limb_profile"] = {str(k): v for k, v in limb_diameter_profile(tree).items()}
        _write(args.out, data, outputs)
        if args.csv:
            _write(args.csv, tree.boundaries_csv(), outputs)
        summary = {"nodes": len(tree.nodes)}

    elif cmd == "rays":
        from .rational import f_theta
        from .rays import RayConfig, trace_ray
        cfg = RayConfig(args.R0, args.S, args.eps_land, args.K, args.max_steps)
        f = f_theta(rotation_value(args.theta))
        rays = []
        for label, t in _ray_angles(args.theta, args.angle or ["0"], cfg.required_bits):
            r = trace_ray(f, t, cfg)
            rays.append((label, r))
        _write(args.out, {"theta_cf": args.theta.spec_string(), "config": cfg.to_json(),
                          "rays": [{"label": l, **r.to_json()} for l, r in rays]}, outputs)
        if args.csv:
            _write(args.csv, "".join(r.to_csv() for _, r in rays), outputs)
        summary = {l: [r.landing.real, r.landing.imag, r.landed] for l, r in rays}

    elif cmd == "pinch":
        from .rays import RayConfig, pinch_csv, pinch_pairs
        cfg = RayConfig(eps_land=args.eps_land, max_steps=args.max_steps)
        pairs = pinch_pairs(args.theta, args.nu, args.depth, cfg)
        _write(args.out, pinch_csv(pairs), outputs)
        summary = {"pairs": len(pairs), "min_separation": min(p.separation for p in pairs)}

    elif cmd == "render":
        from .render import render
        nu = args.nu
        if args.kind in ("mating", "fmating") and nu is None:
            raise _Usage(f"--nu is required for --kind {args.kind}")
        overlays, model = [], None
        if args.overlay:
            overlays, model = _overlays(args)
        img = render(args.kind, args.theta, nu, args.width, args.height, args.viewport, args.max_iter, args.eta,
                     overlays, model)
        data = img.to_png() if str(args.out).lower().endswith(".png") else img.to_ppm()
        _write(args.out, data, outputs)
        summary = {"pixels": args.width * args.height}

    elif cmd == "report":
        summary = _report(args, outputs)

    return summary, outputs


def _overlays(args):
    from .blaschke import solve_t
    overlays, model = [], None
    if "drops" in args.overlay and args.kind in ("petersen", "mating"):
        from .drops import build_drop_tree
        model = solve_t(args.theta, args.kind, args.nu).model
        tree = build_drop_tree(model, "disk", 2, 8)
        overlays += [n.boundary for n in tree.nodes.values()]
    if "rays" in args.overlay and args.kind == "fjulia":
        from .rational import f_theta
        from .rays import RayConfig, critical_angles, trace_ray
        cfg = RayConfig()
        f = f_theta(rotation_value(args.theta))
        lo, hi = critical_angles(args.theta, cfg.required_bits)
        for t in (BigAngle.zero(64), BigAngle.from_fraction(Fraction(1, 2), 64), lo.doubled(), lo, hi):
            overlays.append(trace_ray(f, t, cfg).polyline)
    return overlays, model


def _report(args, outputs) -> dict:
    from .blaschke import solve_t
    from .drops import build_drop_tree, limb_diameter_profile
    res = solve_t(args.theta, "mating", args.nu)
    rel = check_relation(args.theta, args.nu, args.N, args.bits)
    tree = build_drop_tree(res.model, "disk", 3, args.max_depth)
    prof = limb_diameter_profile(tree)
    d0 = min(4, max(prof))
    bundle = {
        "schema": REPORT_SCHEMA,
        "solve": res.to_json(),
        "omega": {"theta": omega_of_theta(args.theta, args.bits).to_json(),
                  "nu": omega_of_theta(args.nu, args.bits).to_json()},
        "relation": rel.to_json(),
        "limb_profile": {str(k): v for k, v in prof.items()},
        "limb_ratio": prof[max(prof)] / prof[d0],
    }
    _write(args.out, bundle, outputs)
    return {"t": res.t, "verdict": rel.verdict, "limb_ratio": bundle["limb_ratio"]}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)   # exits with status 2 on usage errors
    try:
        summary, outputs = run(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"siegelmate: error: {exc}", file=sys.stderr)
        return 2
    except SiegelMateError as exc:
        print(f"siegelmate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    manifest = {"version": __version__, "argv": argv, "command": args.command, "config": _effective(args),
                "outputs": outputs, "outdir_override": os.environ.get(OUTDIR_ENV)}
    _write(str(args.out) + ".manifest.json", manifest, [])
    print(json.dumps(summary, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
