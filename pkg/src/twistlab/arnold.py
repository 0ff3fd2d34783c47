"""Arnold-type circle maps g(x) = x + a1 + (1/n) sin(2 pi x) realised as
induced maps of twist maps, and their mode-locking plateaus."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._accel import thread_cap
from .circle import CircleLift, invert, mode_lock_detect
from .periodic import PeriodicFn, c1_norm, grid, holder_seminorm
from .twist import TwistParams

TWO_PI = 2.0 * math.pi


def min_order() -> int:
    """Least n with 2 pi / n <= 0.9, so that Dg >= 0.1."""
    return int(math.ceil(TWO_PI / 0.9))


@dataclass(eq=False)
class ArnoldInstance:
    order: int
    alpha1: float
    lam: float
    g: CircleLift
    ginv: CircleLift
    Psi: PeriodicFn
    psi: PeriodicFn

    @property
    def params(self) -> TwistParams:
        return TwistParams(self.lam, self.alpha1, 0.0, self.psi)


def circle_map(order: int, alpha1: float, grid_n: int = 4096) -> CircleLift:
    if order < min_order():
        raise ValueError(f"n={order} too small: need n >= {min_order()} (2 pi / n <= 0.9) for monotonicity")
    x = grid(grid_n)
    return CircleLift(PeriodicFn(alpha1 + np.sin(TWO_PI * x) / order, "cubic"))


def build(order: int, alpha1: float, lam: float, grid_n: int = 4096) -> ArnoldInstance:
    """g, its invariant graph Psi = (1/n) sin(2 pi g^-1) and the forcing
    psi_n = (1/n) sin(2 pi x) - (lam/n) sin(2 pi g^-1(x))."""
    g = circle_map(order, alpha1, grid_n)
    ginv = invert(g)
    x = grid(grid_n)
    s_inv = np.sin(TWO_PI * (x + ginv.disp.values)) / order
    Psi = PeriodicFn(s_inv, "cubic")
    psi = PeriodicFn(np.sin(TWO_PI * x) / order - lam * s_inv, "cubic")
    return ArnoldInstance(order, alpha1, lam, g, ginv, Psi, psi)


def invariance_defect(inst: ArnoldInstance) -> float:
    """max over nodes of |Psi(g(x)) - lam Psi(x) - psi_n(x)|."""
    x = grid(inst.g.n)
    r = inst.Psi(inst.g(x)) - inst.lam * inst.Psi.values - inst.psi.values
    return float(np.max(np.abs(r)))


def norm_decay_check(lam: float, orders, alpha1: float = 0.0, eps: float = 0.1, grid_n: int = 4096) -> dict:
    """Sizes of psi_n for each n and the fitted power-law exponents."""
    rows = []
    for order in orders:
        inst = build(order, alpha1, lam, grid_n)
        rows.append(
            {
                "n": int(order),
                "c0": inst.psi.sup_norm(),
                "c1": c1_norm(inst.psi),
                "holder": holder_seminorm(inst.psi, eps),
            }
        )
    logn = np.log([r["n"] for r in rows])
    fits = {}
    for key in ("c0", "c1", "holder"):
        fits[key] = float(np.polyfit(logn, np.log([r[key] for r in rows]), 1)[0])
    return {"rows": rows, "exponents": fits}


def _classify(order, a1, q_max, tol, grid_n):
    return mode_lock_detect(circle_map(order, a1, grid_n), q_max, tol)


def plateau_scan(
    order: int,
    lam: float,
    a1_lo: float,
    a1_hi: float,
    steps: int,
    q_max: int = 8,
    tol: float = 1e-10,
    grid_n: int = 1024,
):
    """Classify an alpha1 grid by locked rotation number and merge runs.

    Returns a list of ``((lo, hi), p/q)`` for maximal runs of scan points
    sharing the same detected fraction. ``lam`` does not affect the circle
    map; it is accepted so scans are labelled by the full parameter set.
    """
    a1s = np.linspace(a1_lo, a1_hi, steps)
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        fracs = list(pool.map(lambda a: _classify(order, a, q_max, tol, grid_n), a1s))
    out = []
    start = None
    for i, fr in enumerate(fracs):
        if fr is None:
            if start is not None:
                out.append(((float(a1s[start]), float(a1s[i - 1])), fracs[start]))
                start = None
            continue
        if start is not None and fracs[start] != fr:
            out.append(((float(a1s[start]), float(a1s[i - 1])), fracs[start]))
            start = None
        if start is None:
            start = i
    if start is not None:
        out.append(((float(a1s[start]), float(a1s[-1])), fracs[start]))
    return out
