import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twistlab.periodic import (
    PeriodicFn,
    c1_norm,
    derivative,
    grid,
    holder_seminorm,
    lip_seminorm,
    mean,
    standard_phi,
)

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
samples = st.integers(16, 256).flatmap(lambda n: arrays(np.float64, n, elements=finite))


def sine(n, interp="linear"):
    return PeriodicFn.from_function(lambda x: np.sin(2 * np.pi * x), n, interp)


class TestConstruction:
    def test_too_small_grid(self):
        with pytest.raises(ValueError, match="minimum of 16"):
            PeriodicFn(np.zeros(8))

    def test_non_finite(self):
        v = np.zeros(32)
        v[3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            PeriodicFn(v)

    def test_immutable(self):
        f = PeriodicFn(np.zeros(32))
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_unknown_interp(self):
        with pytest.raises(ValueError, match="interp"):
            PeriodicFn(np.zeros(32), "quadratic")


class TestEval:
    def test_sine_quarter(self):
        f = sine(4096)
        assert abs(f(0.25) - 1.0) < 4.0 / 4096**2 * 10

    def test_constant(self):
        f = PeriodicFn.constant(0.7, 64)
        assert np.all(f(np.array([-3.3, 0.1, 0.77, 12.5])) == 0.7)

    def test_periodic_shift(self):
        f = sine(4096)
        assert f(1.25) == f(0.25)

    def test_nodes_exact(self):
        v = np.random.default_rng(0).normal(size=64)
        for interp in ("linear", "cubic"):
            f = PeriodicFn(v, interp)
            assert np.allclose(f(grid(64)), v, atol=1e-13, rtol=0)

    @given(samples, st.floats(-50, 50))
    def test_periodic_extension(self, v, x):
        f = PeriodicFn(v)
        assert abs(f(x) - f(x + 1.0)) <= 1e-12 * (1 + np.max(np.abs(v)))

    def test_cubic_more_accurate(self):
        xs = np.linspace(0, 1, 1001)
        exact = np.sin(2 * np.pi * xs)
        err_lin = np.max(np.abs(sine(256)(xs) - exact))
        err_cub = np.max(np.abs(sine(256, "cubic")(xs) - exact))
        assert err_cub < err_lin / 100


class TestMean:
    def test_sine(self):
        for n in (64, 256, 4096):
            assert abs(mean(sine(n))) < 1e-12

    def test_constant(self):
        assert mean(PeriodicFn.constant(0.3, 64)) == 0.3

    def test_sine_squared(self):
        n = 256
        f = PeriodicFn.from_function(lambda x: np.sin(2 * np.pi * x) ** 2, n)
        assert abs(mean(f) - 0.5) < 1.0 / n**2


class TestLipschitz:
    def test_standard_map(self):
        assert abs(lip_seminorm(standard_phi(0.2, 4096)) - 0.2) < 1e-3

    def test_constant(self):
        assert lip_seminorm(PeriodicFn.constant(1.0, 64)) == 0.0

    def test_tent(self):
        f = PeriodicFn.from_function(lambda x: 1.0 - 2.0 * np.abs(x - 0.5), 64)
        assert lip_seminorm(f) == 2.0

    @given(samples)
    def test_c0_below_lip_for_zero_mean(self, v):
        f = PeriodicFn(v - v.mean())
        assert f.sup_norm() <= lip_seminorm(f) + 1e-9


class TestHolder:
    def test_constant(self):
        assert holder_seminorm(PeriodicFn.constant(-0.4, 64), 0.3) == 0.4

    def test_small_sine(self):
        f = PeriodicFn.from_function(lambda x: 0.01 * np.sin(2 * np.pi * x), 1024)
        val = holder_seminorm(f, 0.5)
        assert 0.0 < val <= 0.01 + (2 * np.pi / 100) ** 0.5 * 0.01**0.5 * 2

    @given(samples, st.floats(0.05, 0.95))
    def test_interpolation_inequality(self, v, eps):
        f = PeriodicFn(v)
        A, L = f.sup_norm(), lip_seminorm(f)
        # |f(x) - f(y)| <= min(L d, 2A) gives the quotient bound (2A)^eps L^(1-eps)
        assert holder_seminorm(f, eps) <= A + (2 * A) ** eps * L ** (1 - eps) + 1e-9
        assert holder_seminorm(f, eps) <= A + 2**eps * A**eps * (A + L) ** (1 - eps) + A + 1e-9
        assert holder_seminorm(f, eps) <= (1 + 2 ** (1 - eps)) * (A + L) + 1e-9

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.2])
    def test_eps_range(self, eps):
        with pytest.raises(ValueError):
            holder_seminorm(PeriodicFn.constant(0.0, 32), eps)


class TestDerivative:
    def test_sine(self):
        n = 1024
        d = derivative(sine(n)).values
        exact = 2 * np.pi * np.cos(2 * np.pi * grid(n))
        assert np.max(np.abs(d - exact)) < (2 * np.pi) ** 3 / n**2

    def test_constant(self):
        assert np.all(derivative(PeriodicFn.constant(2.0, 32)).values == 0.0)

    def test_sawtooth_accepted(self):
        f = PeriodicFn.from_function(lambda x: x - np.floor(x), 32)
        assert derivative(f).n == 32

    @given(samples)
    def test_mean_zero(self, v):
        assert abs(mean(derivative(PeriodicFn(v)))) <= 1e-10 * (1 + np.max(np.abs(v))) * len(v)

    def test_c1_norm_max_convention(self):
        f = standard_phi(0.2, 4096)
        assert abs(c1_norm(f) - 0.2) < 1e-3


class TestCsv:
    def test_roundtrip(self, tmp_path):
        f = sine(64)
        path = tmp_path / "f.csv"
        text = f.to_csv(path)
        assert text.startswith("x,value\n") and "\r" not in text
        assert len(text.splitlines()) == 65
        g = PeriodicFn.from_csv(path)
        assert np.array_equal(g.values, f.values)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("a,b\n0,1\n")
        with pytest.raises(ValueError, match="header"):
            PeriodicFn.from_csv(path)

    def test_bad_grid(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("x,value\n" + "".join(f"{i / 20},0\n" for i in range(16)))
        with pytest.raises(ValueError, match="uniform grid"):
            PeriodicFn.from_csv(path)
