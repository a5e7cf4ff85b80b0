import cmath
import json
import math

import numpy as np
import pytest
import sympy as sp

from siegelmate.blaschke import (PetersenModel, build_B, critical_structure_check, solve_ab, solve_t,
                                 winding_over_t)
from siegelmate.errors import DegenerateModelError, SolverError

from conftest import GOLDEN

FIG_A = complex(-0.019048, -0.298116)
FIG_B = complex(3.280417, -0.667122)


def test_solve_ab_examples():
    assert solve_ab(0.0) == (1, 1)
    a, b = solve_ab(0.5)
    assert abs(a - (2 - math.sqrt(5))) < 1e-14 and abs(b - (2 + math.sqrt(5))) < 1e-14


def test_ab_structure_grid():
    for t in (np.arange(128) + 0.5) / 128:
        a, b = solve_ab(t)
        k = cmath.exp(2j * math.pi * t)
        assert abs(a * b - k) < 1e-12
        assert abs(a + b - (3 - k.conjugate())) < 1e-12
        assert abs(abs(a * b) - 1) < 1e-12
        assert abs(a * b.conjugate() - 1) > 1e-6
        assert abs(a) < 1 < abs(b)
        a1, _ = solve_ab(t + 1)
        assert abs(a1 - a) < 1e-12


def test_winding_null_homotopic():
    for k in range(16):
        z = cmath.exp(2j * math.pi * (k + 0.5) / 16)
        assert abs(winding_over_t(z)) < 1e-6


def test_build_B_multipliers():
    B = build_B(0.3, 0.2)
    h = 1e-7
    d0 = (B.eval(h + 0j) - B.eval(-h + 0j)) / (2 * h)
    assert abs(d0 - cmath.exp(-2j * math.pi * 0.2)) < 1e-8
    assert abs(B.lam * B.a * B.b - cmath.exp(-2j * math.pi * 0.2)) < 1e-14
    d_inf = (B.eval_inf_chart(h) - B.eval_inf_chart(-h)) / (2 * h)
    assert abs(d_inf - cmath.exp(2j * math.pi * 0.2)) < 1e-8
    assert abs(abs(B.lam) - 1) < 1e-14
    assert B.eval(0j) == 0 and B.eval_inf_chart(0j) == 0


def test_build_B_degenerate():
    with pytest.raises(DegenerateModelError):
        build_B(1.0, 0.3)


def test_eval_symmetry_and_circle():
    rng = np.random.default_rng(1)
    B = build_B(0.41, GOLDEN)
    Q = PetersenModel(0.2)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    for M in (B, Q):
        prod = M.eval(1 / np.conj(z)) * np.conj(M.eval(z))
        assert np.max(np.abs(prod - 1)) < 1e-12
        u = np.exp(2j * np.pi * rng.random(50))
        assert np.max(np.abs(np.abs(M.eval(u)) - 1)) < 1e-12


def test_derivatives_against_symbolic_oracle():
    z = sp.symbols("z")
    B = build_B(0.37, 0.21)
    a, b, lam = (sp.nsimplify(0) + sp.Float(x.real, 30) + sp.I * sp.Float(x.imag, 30) for x in (B.a, B.b, B.lam))
    expr = lam * z * (z - a) * (z - b) / ((1 - sp.conjugate(a) * z) * (1 - sp.conjugate(b) * z))
    d1, d2 = sp.diff(expr, z), sp.diff(expr, z, 2)
    for z0 in (0.3 + 0.4j, -1.2 + 0.1j, 2.0 - 1.0j):
        assert abs(complex(d1.subs(z, z0).evalf(20)) - B.deriv(z0)) < 1e-10
        assert abs(complex(d2.subs(z, z0).evalf(20)) - B.deriv2(z0)) < 1e-9


@pytest.mark.parametrize("nu", [0.1, GOLDEN, 0.77])
def test_double_critical_point_every_t(nu):
    res = critical_structure_check(build_B(0.5, nu))
    assert res["d1"] < 1e-8 and res["d2"] < 1e-8


def test_petersen_critical_point():
    for t in np.linspace(0, 1, 17):
        res = critical_structure_check(PetersenModel(t))
        assert res["d1"] < 1e-10 and res["orbit_on_circle"] < 1e-12


def test_preimages_are_preimages():
    B = build_B(0.63, 0.2)
    w = np.array([0.5 + 0.1j, 3 - 2j, np.exp(0.7j)])
    pre = B.preimages(w)
    assert pre.shape == (3, 3)
    assert np.max(np.abs(B.eval(pre) - w[:, None])) < 1e-10


def test_petersen_solution(petersen_solution):
    assert abs(petersen_solution.t - 0.613648) < 5e-4
    assert petersen_solution.estimate.cf_prefix(5) == (1, 1, 1, 1, 1)


def test_mating_solution(mating_solution):
    m = mating_solution.model
    assert abs(m.a - FIG_A) < 1e-3 and abs(m.b - FIG_B) < 1e-3
    assert mating_solution.target_displacement == pytest.approx(GOLDEN - 2)
    assert mating_solution.brackets
    assert critical_structure_check(m)["d1"] < 1e-8


def test_solve_json(mating_solution):
    data = json.loads(json.dumps(mating_solution.to_json()))
    for key in ("family", "theta_cf", "nu_cf", "t", "a", "b", "lambda", "rotation_estimate", "residuals"):
        assert key in data
    assert data["theta_cf"] == "cf:1x40"


def test_solve_reproducible_across_seeds(golden_cf):
    r1 = solve_t(golden_cf, "petersen", samples=64, seed=0.0)
    r2 = solve_t(golden_cf, "petersen", samples=64, seed=0.37)
    assert abs(r1.estimate.rho - r2.estimate.rho) <= r1.estimate.error + r2.estimate.error
    assert abs(r1.t - r2.t) < 1e-4


def test_solver_failure_reports_scan(golden_cf):
    # demanding a prefix deeper than a 1000-iterate confirmation can resolve
    with pytest.raises(SolverError) as ei:
        solve_t(golden_cf, "petersen", samples=16, probe_iters=1000, confirm_iters=1000, depth=30)
    assert len(ei.value.scan) == 16
