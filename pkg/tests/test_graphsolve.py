import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.circle import CircleLift, invert
from twistlab.graphsolve import (
    GraphTransformError,
    ThresholdError,
    ThresholdSet,
    closed_form_defect,
    cone_check,
    cone_margins,
    contraction_ratios,
    functional_eq_residual,
    graph_transform,
    invariance_residual,
    pair_contraction,
    slope_discontinuity_scan,
    solve,
)
from twistlab.periodic import PeriodicFn, grid, lip_seminorm
from twistlab.twist import TwistParams, standard_map

lams = st.floats(0.01, 0.99)


def flat(lam, a1=0.0, a2=0.0, n=256):
    return TwistParams(lam, a1, a2, PeriodicFn.constant(0.0, n))


def random_lip(seed, n, lip, interp="cubic"):
    """Random trigonometric polynomial scaled to a given Lipschitz size."""
    rng = np.random.default_rng(seed)
    x = grid(n)
    v = sum(rng.normal() * np.sin(2 * np.pi * k * x + rng.uniform(0, 2 * np.pi)) / k for k in range(1, 6))
    f = PeriodicFn(v)
    return PeriodicFn(v * lip / lip_seminorm(f), interp)


class TestThresholds:
    @given(lams)
    def test_ordering(self, lam):
        th = ThresholdSet.for_lambda(lam)
        assert th.K2 < min(th.K1, th.K3)
        assert th.contraction == pytest.approx(math.sqrt(lam), rel=1e-14)
        assert th.lip_threshold < th.beta / (1 + th.beta)

    def test_gap_values(self):
        assert ThresholdSet.for_lambda(0.25).gap == pytest.approx(0.8611, abs=1e-4)
        assert ThresholdSet.for_lambda(0.04).gap == pytest.approx(0.3796, abs=1e-4)
        assert ThresholdSet.for_lambda(0.25).bohr == pytest.approx(1.1111, abs=1e-4)


class TestGraphTransform:
    def test_flat_contracts_constant(self):
        out = graph_transform(flat(0.3), PeriodicFn.constant(0.7, 256))
        assert np.allclose(out.values, 0.21, atol=1e-15)

    def test_fixed_point(self):
        p = standard_map(0.25, 0.2, 0.38)
        G = solve(p, tol=1e-11)
        assert np.max(np.abs(graph_transform(p, G.psi).values - G.psi.values)) < 1e-10

    @given(st.integers(0, 10**6), st.integers(0, 10**6))
    def test_contraction_half(self, s1, s2):
        p = standard_map(0.25, 0.2, 0.38, n=1024)
        a = random_lip(s1, 1024, 0.9)
        b = random_lip(s2, 1024, 0.9).shifted(0.05)
        assert pair_contraction(p, a, b) <= 0.5 + 1e-9

    @given(st.integers(0, 10**6), st.floats(0.05, 1.0))
    def test_contraction_estimate(self, seed, lip):
        p = standard_map(0.25, 0.2, 0.1, n=1024)
        a = random_lip(seed, 1024, lip)
        b = random_lip(seed + 1, 1024, lip)
        ratio = pair_contraction(p, a, b)
        # T psi(z) = z - x_psi(z) - a1 + a2, so the bound involves the image slopes
        image_lip = min(lip_seminorm(graph_transform(p, a)), lip_seminorm(graph_transform(p, b)))
        assert ratio <= 0.25 * (1 + image_lip) + 1e-6
        assert ratio <= ThresholdSet.for_lambda(0.25).contraction + 1e-9

    @given(st.integers(0, 10**6))
    def test_well_defined(self, seed):
        p = standard_map(0.25, 0.25, 0.2, n=1024)
        out = graph_transform(p, random_lip(seed, 1024, 1.0).shifted(0.0))
        assert lip_seminorm(out) <= 1.0 + 1e-3

    def test_budget_error(self):
        p = standard_map(0.25, 0.5, n=256)
        with pytest.raises(GraphTransformError, match="Lip"):
            graph_transform(p, random_lip(0, 256, 3.0))


class TestSolve:
    def test_flat(self):
        G = solve(flat(0.5, 0.3, 0.15))
        assert np.allclose(G.psi.values, 0.3, atol=1e-12)
        assert np.allclose(G.g.disp.values, 0.45, atol=1e-12)

    def test_at_threshold(self):
        G = solve(standard_map(0.25, 0.25))
        assert G.converged and G.lip_cert <= 1.0 + 1e-3

    def test_refuses(self):
        with pytest.raises(ThresholdError, match="force"):
            solve(standard_map(0.25, 1.2, n=256))

    def test_force_diverges(self):
        G = solve(standard_map(0.25, 1.2, n=512), force=True)
        assert G.status == "diverged" and not G.converged

    def test_max_iter(self):
        G = solve(standard_map(0.81, 0.01, 0.3, n=256), max_iter=2)
        assert G.status == "max_iter" and not G.converged

    def test_uniqueness(self):
        p = standard_map(0.5, 0.08, 0.2, 0.1, n=1024)
        a = solve(p, tol=1e-10)
        b = solve(p, tol=1e-10, psi0=random_lip(3, 1024, 0.3))
        assert np.max(np.abs(a.psi.values - b.psi.values)) <= 2e-10

    def test_residuals_and_closed_form(self, crit1_graphs):
        for p, G in crit1_graphs.values():
            assert G.converged
            assert G.residual_inv <= 1e-8
            assert G.residual_fe <= 1e-8
            assert closed_form_defect(G) <= 1e-8

    def test_contraction_history(self, crit1_graphs):
        for lam, (p, G) in crit1_graphs.items():
            r = contraction_ratios(G)
            assert r.size and r.max() <= math.sqrt(lam) + 0.02


class TestResiduals:
    def test_flat_exact(self):
        p = flat(0.5, 0.1, 0.15)
        assert invariance_residual(p, PeriodicFn.constant(0.3, 256)) == 0.0

    def test_constant_shift_flat(self):
        p = flat(0.4, 0.1, 0.12)
        d = 1e-3
        r = invariance_residual(p, PeriodicFn.constant(0.2 + d, 256))
        assert r == pytest.approx(d * 0.6, rel=1e-9)

    def test_constant_shift_direct_oracle(self):
        p = standard_map(0.25, 0.2, 0.38)
        G = solve(p, tol=1e-12)
        d = 1e-3
        shifted = G.psi.shifted(d)
        x = grid(p.phi.n)
        gx = x + p.alpha1 + p.lam * shifted.values + p.phi.values
        direct = np.max(np.abs(shifted(gx) - p.lam * shifted.values - p.phi.values - p.alpha2))
        assert invariance_residual(p, shifted) == pytest.approx(direct, rel=1e-12)

    @pytest.mark.parametrize("a1,a2,rho", [(0.3, 0.15, 0.45), (0.1, 0.1, 0.2), (0.3, 0.15, 0.5)])
    def test_rigid_functional_equation(self, a1, a2, rho):
        lam = 0.5
        p = flat(lam, a1, a2)
        res = functional_eq_residual(CircleLift.rotation(rho, 256), p)
        if abs(a1 + lam * a2 / (1 - lam) - rho) < 1e-14:
            assert res < 1e-14
        else:
            assert res > 1e-3

    def test_closed_form_identity(self):
        p = standard_map(0.5, 0.08, 0.2, 0.1)
        G = solve(p, tol=1e-11)
        ginv = invert(G.g)
        assert functional_eq_residual(G.g, p, ginv) <= 1e-10
        alt = -ginv.disp.values - p.alpha1 + p.alpha2
        assert np.max(np.abs(G.psi.values - alt)) <= 1e-10


class TestCone:
    def test_analytic_pass(self):
        p = standard_map(0.25, 0.2, 0.38)
        rep = cone_check(p, solve(p))
        assert rep["cone_threshold"] == pytest.approx(2 / 3)
        assert abs(rep["zeta_hat"] - 0.2) < 1e-3
        assert rep["analytic_pass"]

    @pytest.mark.parametrize("lam", [0.04, 0.25, 0.5, 0.81])
    def test_flat_margins_match_direct_inequality(self, lam):
        beta = 1 / math.sqrt(lam)
        direct = min(beta * abs(1 + s * lam * beta) - lam * beta for s in (1, -1))
        p = flat(lam)
        rep = cone_check(p, solve(p), k_max=5)
        assert rep["worst_margin"] == pytest.approx(direct, abs=1e-12)
        assert rep["node_pass"] == (direct > 0)

    def test_flat_pass_small_lambda(self):
        for lam in (0.04, 0.25):
            p = flat(lam)
            assert cone_check(p, solve(p), k_max=5)["node_pass"]
        p = flat(0.5)
        assert not cone_check(p, solve(p), k_max=5)["node_pass"]

    def test_flat_slope_field(self):
        p = flat(0.3)
        rep = cone_check(p, solve(p), k_max=30)
        assert np.max(np.abs(rep["limit_slope"])) < 1e-12
        assert rep["aperture_history"][-1] < rep["aperture_history"][0]

    def test_margins_shape(self):
        assert cone_margins(np.zeros(5), 0.25, 2.0).shape == (2, 5)

    def test_k2_aperture_passes(self, crit1_graphs):
        for p, G in crit1_graphs.values():
            assert cone_check(p, G, k_max=10)["node_pass_K2"]


class TestSlopeScan:
    def test_smooth_empty(self, crit1_graphs):
        for p, G in crit1_graphs.values():
            assert slope_discontinuity_scan(G.psi, 0.05) == []

    def test_inserted_corner(self):
        n = 1024
        x = grid(n)
        v = 0.02 * np.sin(2 * np.pi * x) + 0.5 * np.maximum(x - 0.5, 0) - 0.5 * np.maximum(x - 0.75, 0)
        hits = slope_discontinuity_scan(PeriodicFn(v), 0.25)
        xs = [h[0] for h in hits]
        assert any(abs(xi - 0.5) < 2 / n for xi in xs)
        best = min(hits, key=lambda h: abs(h[0] - 0.5))
        assert abs(abs(best[2] - best[1]) - 0.5) < 0.05
