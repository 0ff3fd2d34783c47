"""Lifts of orientation-preserving circle homeomorphisms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .periodic import PeriodicFn, grid


class MonotonicityError(ValueError):
    """Raised when a sampled lift fails to be strictly increasing."""


@dataclass(frozen=True, eq=False)
class CircleLift:
    """Lift ``g(x) = x + disp(x)`` with ``disp`` 1-periodic."""

    disp: PeriodicFn

    def __post_init__(self):
        d = self.disp.values
        n = self.disp.n
        steps = 1.0 / n + np.diff(np.append(d, d[0]))
        bad = np.flatnonzero(steps <= 0.0)
        if bad.size:
            i = int(bad[0])
            raise MonotonicityError(
                f"lift not increasing between nodes {i} and {(i + 1) % n} "
                f"(x={i / n:.6g}, step={steps[i]:.3g})"
            )

    @classmethod
    def rotation(cls, omega: float, n: int = 256) -> "CircleLift":
        return cls(PeriodicFn.constant(omega, n))

    @classmethod
    def from_function(cls, func, n: int = 4096, interp: str = "linear") -> "CircleLift":
        x = grid(n)
        return cls(PeriodicFn(np.asarray(func(x), dtype=float) - x, interp))

    @property
    def n(self) -> int:
        return self.disp.n

    def __call__(self, x):
        if np.ndim(x):
            return np.asarray(x, dtype=float) + self.disp(x)
        return float(x) + self.disp(x)

    def derivative(self, x):
        return 1.0 + self.disp.slope(x)

    def node_images(self) -> np.ndarray:
        return grid(self.n) + self.disp.values


def _solve_preimages(g: CircleLift, z: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised bisection for x with g(x) = z, then secant polish."""
    d = g.disp
    lo = z - d.values.max() - 1.0 / d.n
    hi = z - d.values.min() + 1.0 / d.n

    def resid(x):
        return x + kernels.eval_periodic(d.values, d.curv, x) - z

    f_lo = resid(lo)
    f_hi = resid(hi)
    for _ in range(200):
        if np.max(hi - lo) <= tol * 0.25:
            break
        mid = 0.5 * (lo + hi)
        fm = resid(mid)
        left = fm > 0.0
        hi = np.where(left, mid, hi)
        f_hi = np.where(left, fm, f_hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, fm)
    x = np.where(np.abs(f_lo) < np.abs(f_hi), lo, hi)
    x_prev = np.where(np.abs(f_lo) < np.abs(f_hi), hi, lo)
    f_x = resid(x)
    f_p = resid(x_prev)
    for _ in range(2):
        denom = f_x - f_p
        ok = np.abs(denom) > 0.0
        step = np.where(ok, f_x * (x - x_prev) / np.where(ok, denom, 1.0), 0.0)
        cand = x - step
        f_c = resid(cand)
        better = np.abs(f_c) < np.abs(f_x)
        x_prev, f_p = np.where(better, x, x_prev), np.where(better, f_x, f_p)
        x, f_x = np.where(better, cand, x), np.where(better, f_c, f_x)
    return x


def invert(g: CircleLift, tol: float = 1e-13) -> CircleLift:
    """Inverse lift sampled at the same nodes: |g(h(x_i)) - x_i| <= tol."""
    z = grid(g.n)
    x = _solve_preimages(g, z, tol)
    return CircleLift(PeriodicFn(x - z, g.disp.interp))


def iterate(g: CircleLift, x0: float, k: int) -> float:
    """k-fold composition g^k(x0) on the lift."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return float(x0)
    return float(kernels.iterate_many(g.disp.values, g.disp.curv, np.array([x0], dtype=float), k)[0])


def rotation_number(g: CircleLift, x0: float = 0.0, n_iter: int = 10**6, tol: float = 1e-6):
    """Birkhoff quotient (g^n(x0) - x0)/n with a dyadic self-consistency flag.

    Returns ``(rho, converged)``; converged when the estimates at n and n/2
    agree within ``tol``.
    """
    if n_iter < 1000:
        raise ValueError("n_iter must be at least 1000")
    x_half, x_end = kernels.orbit_endpoints(g.disp.values, g.disp.curv, x0, n_iter)
    half = n_iter // 2
    rho = (x_end - x0) / n_iter
    rho_half = (x_half - x0) / half
    return float(rho), bool(abs(rho - rho_half) < tol)


def convergents(x: float, q_max: int):
    """Continued-fraction convergents p/q of x with q <= q_max."""
    out = []
    a0 = math.floor(x)
    p_prev, q_prev = 1, 0
    p, q = a0, 1
    rem = x - a0
    out.append(Fraction(p, q))
    for _ in range(64):
        if rem < 1e-15:
            break
        inv = 1.0 / rem
        a = math.floor(inv)
        rem = inv - a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        if q > q_max:
            break
        out.append(Fraction(p, q))
    return out


def periodic_orbit_residual(g: CircleLift, p: int, q: int, tol: float = 1e-10):
    """Smallest |g^q(x) - x - p| found on the grid, refined at sign changes.

    Returns ``(residual, x)`` for the best point found.
    """
    xs = grid(g.n)
    vals, curv = g.disp.values, g.disp.curv
    F = kernels.iterate_many(vals, curv, xs, q) - xs - p
    i = int(np.argmin(np.abs(F)))
    best = (float(abs(F[i])), float(xs[i]))
    if best[0] < tol:
        return best
    Fn = np.append(F, F[0])
    xn = np.append(xs, 1.0)
    flips = np.flatnonzero(np.sign(Fn[:-1]) * np.sign(Fn[1:]) < 0)

    def f(x):
        return float(kernels.iterate_many(vals, curv, np.array([x]), q)[0]) - x - p

    for k in flips[:8]:
        root = brentq(f, xn[k], xn[k + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        r = abs(f(root))
        if r < best[0]:
            best = (r, float(root))
        if best[0] < tol:
            break
    return best


def mode_lock_detect(g: CircleLift, q_max: int, tol: float = 1e-10, n_iter: int = 1 << 17):
    """Lowest-denominator p/q (q <= q_max) carrying a genuine periodic orbit.

    Candidates are the convergents of the measured rotation number; each
    is accepted only if g^q(x) - x - p has a zero to within ``tol``.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    rho, _ = rotation_number(g, 0.0, n_iter)
    seen = set()
    for frac in sorted(convergents(rho, q_max), key=lambda f: f.denominator):
        if frac in seen:
            continue
        seen.add(frac)
        res, _ = periodic_orbit_residual(g, frac.numerator, frac.denominator, tol)
        if res < tol:
            return frac
    return None
