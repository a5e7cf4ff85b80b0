import json
import math
import struct
import zlib
from pathlib import Path

import numpy as np
import pytest

from siegelmate.errors import NoTrapError
from siegelmate.rational import F_normal, chebyshev_G, f_theta
from siegelmate.render import (Cls, build_classifier, classify_B, classify_F, config_json,
                               escape_classify_f, fjulia_classifier, fmating_classifier, make_trap,
                               mating_classifier, pixel_churn, render, symmetry_check, validate_trap)

from conftest import GOLDEN

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def F():
    return F_normal(GOLDEN, GOLDEN)


# -- traps -------------------------------------------------------------------------

def test_trap_F_golden(F):
    t = make_trap(F, "0")
    assert t.validated and t.radius > 1e-4 and t.max_drift <= 1.05
    assert make_trap(F, "inf").radius > 1e-4


def test_trap_linear_test_double():
    rot = lambda u: np.exp(2j * math.pi * 0.3) * u
    for eta in (1e-3, 0.5, 10.0):
        t = make_trap(rot, "0", eta)
        assert t.radius == eta and abs(t.max_drift - 1) < 1e-12


def test_trap_bad_eta(F):
    for eta in (0, -1, float("nan")):
        with pytest.raises(ValueError):
            make_trap(F, "0", eta)


def test_trap_never_validates():
    with pytest.raises(NoTrapError):
        make_trap(lambda u: 2 * u, "0")


def test_trap_record_is_forward_invariant(mating_golden):
    for which in ("0", "inf"):
        t = make_trap(mating_golden, which)
        chart = mating_golden.eval if which == "0" else mating_golden.eval_inf_chart
        assert validate_trap(chart, t.radius) == pytest.approx(t.max_drift)
        assert t.max_drift <= 1.05


def test_chebyshev_trap():
    assert make_trap(chebyshev_G(GOLDEN), "1").validated


# -- point classification -------------------------------------------------------------

def test_classify_B_examples(mating_golden):
    clf = mating_classifier(mating_golden)
    assert classify_B(mating_golden, clf, 0j) == (Cls.SIDE_A, 0)
    w = 0.5 * clf.rinf
    assert classify_B(mating_golden, clf, 1 / w) == (Cls.SIDE_B, 0)
    for n in (10, 500, 3000):
        assert classify_B(mating_golden, clf, 1 + 0j, n) == (Cls.UNDECIDED, n)


def test_classify_F_examples(F):
    clf = fmating_classifier(F)
    assert classify_F(F, clf, 0j)[0] == Cls.SIDE_A
    assert classify_F(F, clf, 1e300 + 0j)[0] == Cls.SIDE_B
    assert classify_F(F, clf, 1 + 0j, 500)[0] == Cls.UNDECIDED
    assert abs(F.mu3) > 1


def test_escape_examples():
    f = f_theta(GOLDEN)
    assert escape_classify_f(f.c, 5 + 0j) == (True, 0)
    assert escape_classify_f(f.c, f.alpha, 10**4) == (False, 10**4)
    assert escape_classify_f(f.c, f.c, 10**4) == (False, 10**4)
    with pytest.raises(ValueError):
        escape_classify_f(f.c, 0j, R=2.0)
    with pytest.raises(ValueError):
        fjulia_classifier(f, R=2.0)


def test_monotone_classification(mating_golden):
    clf = mating_classifier(mating_golden)
    rng = np.random.default_rng(5)
    zs = rng.uniform(-3, 3, 4000) + 1j * rng.uniform(-3, 3, 4000)
    c1, _ = clf.classify(zs, 200)
    c2, _ = clf.classify(zs, 2000)
    decided = c1 != Cls.UNDECIDED
    assert np.all(c1[decided] == c2[decided])
    assert np.sum(c2 == Cls.UNDECIDED) <= np.sum(c1 == Cls.UNDECIDED)


def test_fmating_involution_symmetry(F):
    clf = fmating_classifier(F, symmetric=True)
    rng = np.random.default_rng(11)
    zs = np.exp(rng.uniform(-1, 1, 1000) + 2j * math.pi * rng.random(1000))
    assert symmetry_check(clf, zs, lambda z: 1 / z, 2000) >= 0.99


# -- images -----------------------------------------------------------------------------

def test_small_render_deterministic():
    a = render("fjulia", GOLDEN, width=16, height=16).to_ppm()
    b = render("fjulia", GOLDEN, width=16, height=16).to_ppm()
    assert a == b
    assert a.startswith(b"P6\n16 16\n255\n") and len(a) == len(b"P6\n16 16\n255\n") + 16 * 16 * 3


def test_png_valid():
    img = render("fjulia", GOLDEN, width=20, height=12)
    png = img.to_png()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    w, h = struct.unpack(">II", png[16:24])
    assert (w, h) == (20, 12)
    idat_len = struct.unpack(">I", png[33:37])[0]
    raw = zlib.decompress(png[41:41 + idat_len])
    rows = np.frombuffer(raw, np.uint8).reshape(12, 1 + 20 * 3)
    assert np.all(rows[:, 0] == 0)
    assert np.array_equal(rows[:, 1:].reshape(12, 20, 3), img.rgb())


def test_palette_and_overlay():
    ring = [0.5 * np.exp(2j * math.pi * np.linspace(0, 1, 200))]
    img = render("fjulia", GOLDEN, width=32, height=32, overlays=ring)
    rgb = img.rgb()
    assert img.overlay_mask.sum() > 0
    assert np.all(rgb[img.overlay_mask] == [215, 40, 40])
    plain = render("fjulia", GOLDEN, width=32, height=32).rgb()
    assert np.array_equal(rgb[~img.overlay_mask], plain[~img.overlay_mask])
    assert set(map(tuple, plain.reshape(-1, 3))) <= {(0, 0, 0), (225, 225, 225), (255, 255, 255)}


def test_pixel_mapping():
    img = render("fjulia", GOLDEN, width=4, height=2, viewport=(-2, -1, 2, 1))
    assert img.pixel_to_complex(0, 0) == complex(-1.5, 0.5)
    assert img.pixel_to_complex(3, 1) == complex(1.5, -0.5)


def test_fjulia_snapshot():
    """Golden-image regression; a handful of boundary pixels may differ across platforms."""
    ref = (DATA / "fjulia_golden_96.ppm").read_bytes()
    img = render("fjulia", GOLDEN, width=96, height=96).to_ppm()
    header = b"P6\n96 96\n255\n"
    assert ref.startswith(header) and img.startswith(header)
    a = np.frombuffer(ref[len(header):], np.uint8).reshape(-1, 3)
    b = np.frombuffer(img[len(header):], np.uint8).reshape(-1, 3)
    assert np.mean(np.any(a != b, axis=1)) <= 0.005
    # the central quasidisk around the Siegel point is bounded (black)
    f = f_theta(GOLDEN)
    i, j = int((f.alpha.real + 1.5) / 3 * 96), int((1.5 - f.alpha.imag) / 3 * 96)
    assert tuple(b.reshape(96, 96, 3)[j, i]) == (0, 0, 0)


def test_render_kinds_small(petersen_golden, mating_golden):
    # the Chebyshev trap is far smaller than a default-viewport pixel, so zoom in on it
    near_one = {"viewport": (0.8, -0.2, 1.2, 0.2)}
    for kind, kw in (("petersen", {"model": petersen_golden}), ("mating", {"model": mating_golden}),
                     ("fmating", {}), ("chebyshev", near_one)):
        img = render(kind, GOLDEN, GOLDEN, width=24, height=24, max_iter=300, **kw)
        assert img.classes.shape == (24, 24)
        assert len(np.unique(img.classes)) >= 2


def test_churn_and_config(mating_golden):
    clf = build_classifier("mating", GOLDEN, GOLDEN, model=mating_golden)
    a = render("mating", GOLDEN, GOLDEN, 48, 48, max_iter=500, classifier=clf)
    b = render("mating", GOLDEN, GOLDEN, 48, 48, max_iter=1000, classifier=clf)
    assert pixel_churn(a, a) == 0 and 0 <= pixel_churn(a, b) < 0.05
    cfg = json.loads(config_json(a))
    assert cfg["kind"] == "mating" and cfg["px"] == {"w": 48, "h": 48} and "inf" in cfg["traps"]


def test_unknown_kind():
    with pytest.raises(ValueError):
        render("nope", GOLDEN)
