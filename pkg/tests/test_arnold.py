from fractions import Fraction

import numpy as np
import pytest

from twistlab.arnold import build, circle_map, invariance_defect, min_order, norm_decay_check, plateau_scan
from twistlab.circle import MonotonicityError, mode_lock_detect
from twistlab.graphsolve import functional_eq_residual, solve
from twistlab.periodic import lip_seminorm, mean


def test_min_order():
    assert min_order() == 7
    assert 2 * np.pi / 7 <= 0.9 < 2 * np.pi / 6


def test_small_order_rejected():
    with pytest.raises(ValueError, match="monotonicity"):
        circle_map(5, 0.0)


class TestBuild:
    @pytest.mark.parametrize("n,a1", [(50, 0.0), (50, 0.3), (200, 0.123)])
    def test_functional_equation(self, n, a1):
        inst = build(n, a1, 0.25)
        assert functional_eq_residual(inst.g, inst.params, inst.ginv) <= 1e-8

    def test_mean_zero(self):
        assert abs(mean(build(50, 0.2, 0.25).psi)) <= 1e-8

    def test_invariance(self):
        assert invariance_defect(build(50, 0.2, 0.25)) <= 1e-10

    def test_solver_finds_same_graph(self):
        inst = build(100, 0.3, 0.25)
        assert lip_seminorm(inst.psi) <= 0.25
        G = solve(inst.params, tol=1e-11)
        assert np.max(np.abs(G.psi.values - inst.Psi.values)) < 1e-9


class TestDecay:
    def test_exponents(self):
        rep = norm_decay_check(0.25, [50, 100, 200, 400, 800])
        assert -1.2 <= rep["exponents"]["c1"] <= -0.8

    def test_c0_halving(self):
        rows = norm_decay_check(0.25, [50, 100, 200])["rows"]
        for a, b in zip(rows, rows[1:]):
            assert 0.4 <= b["c0"] / a["c0"] <= 0.6

    @pytest.mark.parametrize("n", [50, 200])
    def test_c0_leading_term(self, n):
        lam = 0.25
        c0 = build(n, 0.0, lam).psi.sup_norm()
        assert abs(c0 - (1 - lam) / n) < 10.0 / n**2


class TestPlateaus:
    def test_zero_plateau(self):
        n = 50
        steps = 201
        a1 = np.linspace(-2 / n, 2 / n, steps)
        step = a1[1] - a1[0]
        rows = plateau_scan(n, 0.25, -2 / n, 2 / n, steps, q_max=4, grid_n=1024)
        zero = [iv for iv, fr in rows if fr == Fraction(0, 1)]
        assert len(zero) == 1
        lo, hi = zero[0]
        assert abs(lo + 1 / n) <= 2 * step and abs(hi - 1 / n) <= 2 * step

    def test_irrational_parameter_locked(self):
        a1 = np.sqrt(2) / 100
        g = circle_map(50, a1, 1024)
        fr = mode_lock_detect(g, 4)
        assert fr == Fraction(0, 1) and fr != a1

    def test_complement_positive(self):
        rows = plateau_scan(20, 0.25, 0.3, 0.5, 81, q_max=6, grid_n=512)
        covered = sum(hi - lo for (lo, hi), _ in rows)
        assert covered < 0.2

    def test_refinement_grows(self):
        coarse = plateau_scan(50, 0.25, -0.04, 0.04, 41, q_max=2, grid_n=512)
        fine = plateau_scan(50, 0.25, -0.04, 0.04, 161, q_max=2, grid_n=512)
        (c_lo, c_hi), = [iv for iv, fr in coarse if fr == 0]
        (f_lo, f_hi), = [iv for iv, fr in fine if fr == 0]
        assert f_lo <= c_lo + 1e-15 and f_hi >= c_hi - 1e-15
