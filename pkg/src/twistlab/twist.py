"""The family F(x, y) = (x + a1 + lam*y + phi(x), a2 + lam*y + phi(x))."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .periodic import DEFAULT_N, PeriodicFn, lip_seminorm, mean, standard_phi

MEAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TwistParams:
    lam: float
    alpha1: float
    alpha2: float
    phi: PeriodicFn

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        m = mean(self.phi)
        if abs(m) > MEAN_TOL:
            raise ValueError(
                f"phi has mean {m:.3e}; subtract its mean (phi - mean(phi)) before use"
            )

    @property
    def offset(self) -> float:
        """Height a2/(1-lam) of the invariant line when phi = 0."""
        return self.alpha2 / (1.0 - self.lam)

    @property
    def centered_alpha1(self) -> float:
        """Horizontal shift after the substitution y -> y - a2/(1-lam)."""
        return self.alpha1 + self.lam * self.offset

    def replace(self, **kw) -> "TwistParams":
        fields = dict(lam=self.lam, alpha1=self.alpha1, alpha2=self.alpha2, phi=self.phi)
        fields.update(kw)
        return TwistParams(**fields)


def standard_map(lam, kappa, alpha1=0.0, alpha2=0.0, n=DEFAULT_N, interp="cubic") -> TwistParams:
    """Dissipative standard map with phi(x) = (kappa/2pi) sin(2 pi x)."""
    return TwistParams(lam, alpha1, alpha2, standard_phi(kappa, n, interp))


def apply(p: TwistParams, x, y):
    f = p.phi(x)
    return x + p.alpha1 + p.lam * y + f, p.alpha2 + p.lam * y + f


def phi_prime(p: TwistParams, x, h: float = 1e-6):
    """Central finite difference of phi's interpolant."""
    return (p.phi(np.asarray(x) + h) - p.phi(np.asarray(x) - h)) / (2.0 * h)


def jacobian(p: TwistParams, x: float) -> np.ndarray:
    d = float(phi_prime(p, x))
    return np.array([[1.0 + d, p.lam], [d, p.lam]])


def default_oracle_iters(lam: float, tol: float = 1e-7) -> int:
    """Steps so that a spread of 2 decays below tol at rate sqrt(lam) over the
    discarded 90% of the run."""
    rate = math.sqrt(lam)
    steps = math.log(tol / 2.0) / (0.9 * math.log(rate))
    return max(50, int(math.ceil(steps)))


def attractor_oracle(
    p: TwistParams,
    n_points: int = 4096,
    n_iter: int | None = None,
    nbins: int | None = None,
    force: bool = False,
) -> PeriodicFn:
    """Graph of the attractor obtained by plain forward iteration.

    Seeds on a lattice of [0,1) x [-1,1] (around the unperturbed line) are
    iterated ``n_iter`` times; points from the last 10% of steps are binned
    by x mod 1 into ``nbins`` node-centred bins (default n/8), and the
    binned means are interpolated back to the grid of ``p.phi``.
    """
    thr = (1.0 - math.sqrt(p.lam)) ** 2
    if not force and lip_seminorm(p.phi) > thr * (1.0 + 1e-9):
        raise ValueError(
            f"Lipschitz size {lip_seminorm(p.phi):.4g} of phi exceeds (1-sqrt(lam))^2 = {thr:.4g}"
        )
    n = p.phi.n
    nbins = nbins or max(16, n // 8)
    n_iter = n_iter or default_oracle_iters(p.lam)
    n_skip = int(0.9 * n_iter)
    ny = 4
    nx = max(1, n_points // ny)
    gx, gy = np.meshgrid(np.arange(nx) / nx, np.linspace(-1.0, 1.0, ny), indexing="ij")
    xs = gx.ravel()
    ys = gy.ravel() + p.offset
    cnt, sx, sy = kernels.attractor_cloud(
        p.phi.values, p.phi.curv, p.lam, p.alpha1, p.alpha2, xs, ys, n_iter, n_skip, nbins
    )
    empty = np.flatnonzero(cnt == 0)
    if empty.size:
        raise ValueError(
            f"{empty.size} of {nbins} bins received no points; increase n_points or n_iter"
        )
    bx = np.arange(nbins) / nbins + sx / cnt
    by = sy / cnt
    order = np.argsort(np.mod(bx, 1.0), kind="stable")
    vals = np.interp(np.arange(n) / n, np.mod(bx, 1.0)[order], by[order], period=1.0)
    return PeriodicFn(vals, "linear")
