"""Invariant graphs by graph-transform iteration, with residual certificates
and cone-field diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .circle import CircleLift, invert
from .periodic import PeriodicFn, c1_norm, derivative, grid, lip_seminorm
from .twist import TwistParams, phi_prime


class ThresholdError(ValueError):
    """phi is larger than the existence threshold and force was not given."""


class GraphTransformError(ValueError):
    """The push-forward is not a graph (base map not invertible)."""


@dataclass(frozen=True)
class ThresholdSet:
    lam: float
    K1: float
    K2: float
    K3: float
    contraction: float
    lip_threshold: float
    bohr: float
    beta: float

    @classmethod
    def for_lambda(cls, lam: float) -> "ThresholdSet":
        if not 0.0 < lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {lam}")
        s = math.sqrt(lam)
        k2 = 1.0 / s - 1.0
        return cls(
            lam=lam,
            K1=2.0 / s - 1.0,
            K2=k2,
            K3=1.0 / lam - 1.0,
            contraction=lam * (1.0 + k2),
            lip_threshold=(1.0 - s) ** 2,
            bohr=2.0 * (1.0 + lam) / (2.0 + lam),
            beta=1.0 / s,
        )

    @property
    def gap(self) -> float:
        """Distance between the destruction bound and the existence threshold."""
        return self.bohr - self.lip_threshold

    @property
    def cone_threshold(self) -> float:
        return self.beta / (1.0 + self.beta)


@dataclass(eq=False)
class InvariantGraph:
    psi: PeriodicFn
    g: CircleLift | None
    residual_inv: float
    residual_fe: float
    lip_cert: float
    iterations: int
    converged: bool
    status: str
    params: TwistParams
    increments: list = field(default_factory=list)
    lip_history: list = field(default_factory=list)

    @property
    def psi_centered(self) -> PeriodicFn:
        return self.psi.shifted(-self.params.offset)


def _check_budget(p: TwistParams, psi: PeriodicFn):
    a = lip_seminorm(p.phi)
    b = lip_seminorm(psi)
    if a + p.lam * b >= 1.0:
        raise GraphTransformError(
            f"Lip(phi) + lam*Lip(psi) = {a:.4g} + {p.lam:.4g}*{b:.4g} = {a + p.lam * b:.4g} >= 1"
        )


def _push_centered(p: TwistParams, psi_c: PeriodicFn) -> PeriodicFn | None:
    phi = p.phi
    pc = psi_c
    if pc.interp != phi.interp:
        pc = PeriodicFn(pc.values, phi.interp)
    out, _, ok = kernels.push_graph(pc.values, pc.curv, phi.values, phi.curv, p.lam, p.centered_alpha1)
    if not ok:
        return None
    return PeriodicFn(out, phi.interp)


def graph_transform(p: TwistParams, psi: PeriodicFn, check: bool = True) -> PeriodicFn:
    """Image of the graph of ``psi`` under F, re-parametrised over the circle."""
    if psi.n != p.phi.n:
        raise ValueError("psi and phi must share the grid")
    if check:
        _check_budget(p, psi)
    out = _push_centered(p, psi.shifted(-p.offset))
    if out is None:
        raise GraphTransformError("x -> X(x, psi(x)) is not increasing on the grid")
    return out.shifted(p.offset)


def induced_map(p: TwistParams, psi: PeriodicFn) -> CircleLift:
    """g(x) = x + a1 + lam*Psi(x) + phi(x) for an (uncentred) graph Psi."""
    vals = p.alpha1 + p.lam * psi.values + p.phi.values
    return CircleLift(PeriodicFn(vals, p.phi.interp))


def invariance_residual(p: TwistParams, psi: PeriodicFn) -> float:
    """max over nodes of |Psi(g(x)) - lam*Psi(x) - phi(x) - a2|."""
    x = grid(psi.n)
    gx = x + p.alpha1 + p.lam * psi.values + p.phi.values
    r = psi(gx) - p.lam * psi.values - p.phi.values - p.alpha2
    return float(np.max(np.abs(r)))


def functional_eq_residual(g: CircleLift, p: TwistParams, ginv: CircleLift | None = None) -> float:
    """Defect of g/(1+lam) + lam*g^-1/(1+lam) = x + ((1-lam)a1 + lam*a2 + phi)/(1+lam)."""
    lam = p.lam
    ginv = ginv or invert(g)
    x = grid(g.n)
    lhs = (x + g.disp.values) / (1.0 + lam) + lam * (x + ginv.disp.values) / (1.0 + lam)
    rhs = x + ((1.0 - lam) * p.alpha1 + lam * p.alpha2 + p.phi(x)) / (1.0 + lam)
    return float(np.max(np.abs(lhs - rhs)))


def closed_form_defect(G: InvariantGraph, ginv: CircleLift | None = None) -> float:
    """sup |Psi(x) - (x - g^-1(x) - a1 + a2)| over the nodes."""
    p = G.params
    ginv = ginv or invert(G.g)
    alt = -ginv.disp.values - p.alpha1 + p.alpha2
    return float(np.max(np.abs(G.psi.values - alt)))


def solve(
    p: TwistParams,
    tol: float = 1e-10,
    max_iter: int = 20000,
    force: bool = False,
    psi0: PeriodicFn | None = None,
) -> InvariantGraph:
    """Fixed point of the graph transform started from the unperturbed line.

    Stops when the C0 increment drops below tol*(1 - sqrt(lam)), which bounds
    the distance to the fixed point by tol. With ``force`` the threshold
    guard is skipped and divergence is diagnosed instead of prevented.
    """
    th = ThresholdSet.for_lambda(p.lam)
    lip_phi = lip_seminorm(p.phi)
    if not force and lip_phi > th.lip_threshold * (1.0 + 1e-12):
        raise ThresholdError(
            f"Lip(phi) = {lip_phi:.6g} exceeds (1-sqrt(lam))^2 = {th.lip_threshold:.6g}; use force"
        )
    stop = tol * (1.0 - math.sqrt(p.lam))
    psi_c = (psi0.shifted(-p.offset) if psi0 is not None else PeriodicFn.constant(0.0, p.phi.n))
    psi_c = PeriodicFn(psi_c.values, p.phi.interp)
    increments, lips = [], []
    status = "max_iter"
    grow = 0
    it = 0
    for it in range(1, max_iter + 1):
        if not force:
            _check_budget(p, psi_c)
        nxt = _push_centered(p, psi_c)
        if nxt is None:
            status = "diverged"
            break
        inc = float(np.max(np.abs(nxt.values - psi_c.values)))
        lip = lip_seminorm(nxt)
        increments.append(inc)
        lips.append(lip)
        psi_c = nxt
        if inc < stop:
            status = "converged"
            break
        if force:
            grow = grow + 1 if len(increments) > 1 and inc > increments[-2] else 0
            if lip > th.K1 or grow >= 20 or not math.isfinite(inc):
                status = "diverged"
                break
    psi = psi_c.shifted(p.offset)
    converged = status == "converged"
    g = None
    res_inv = res_fe = float("nan")
    try:
        g = induced_map(p, psi)
    except ValueError:
        converged = False
        status = "diverged" if status == "converged" else status
    if g is not None:
        res_inv = invariance_residual(p, psi)
        res_fe = functional_eq_residual(g, p)
    return InvariantGraph(
        psi=psi,
        g=g,
        residual_inv=res_inv,
        residual_fe=res_fe,
        lip_cert=lip_seminorm(psi),
        iterations=it,
        converged=converged,
        status=status,
        params=p,
        increments=increments,
        lip_history=lips,
    )


def contraction_ratios(G: InvariantGraph, floor: float = 1e-13) -> np.ndarray:
    """Successive increment ratios of the iteration, ignoring the float floor."""
    inc = np.asarray(G.increments)
    if inc.size < 2:
        return np.zeros(0)
    keep = (inc[:-1] > floor) & (inc[1:] > floor)
    return inc[1:][keep] / inc[:-1][keep]


def pair_contraction(p: TwistParams, psi1: PeriodicFn, psi2: PeriodicFn) -> float:
    """||T psi1 - T psi2|| / ||psi1 - psi2|| in the sup norm over nodes."""
    a = graph_transform(p, psi1)
    b = graph_transform(p, psi2)
    return float(np.max(np.abs(a.values - b.values)) / np.max(np.abs(psi1.values - psi2.values)))


# ------------------------------------------------------------------ cones


def cone_margins(d, lam: float, beta: float) -> np.ndarray:
    """beta*|v1'| - |v2'| for the images of (1, +beta) and (1, -beta).

    ``d`` holds phi' at the base points; returns an array of shape (2, len(d)).
    """
    d = np.asarray(d, dtype=float)
    out = []
    for sgn in (1.0, -1.0):
        v1 = 1.0 + d + sgn * lam * beta
        v2 = d + sgn * lam * beta
        out.append(beta * np.abs(v1) - np.abs(v2))
    return np.array(out)


def cone_check(p: TwistParams, G: InvariantGraph, k_max: int = 40, beta: float | None = None) -> dict:
    """Cone-field diagnostics, by default for the aperture beta = 1/sqrt(lam).

    (i) analytic test ||phi||_C1 < beta/(1+beta); (ii) at every node the
    images of the boundary vectors (1, +-beta) lie strictly inside the
    cone; (iii) pushing the cone along k_max steps of the orbit ending at
    each node, the aperture history and the limiting slope, compared with
    the slope of the solved graph. The node test is also reported for the
    aperture K2 = 1/sqrt(lam) - 1, the Lipschitz bound of the graph.
    """
    th = ThresholdSet.for_lambda(p.lam)
    beta = th.beta if beta is None else float(beta)
    lam = p.lam
    zeta = c1_norm(p.phi)
    x = grid(p.phi.n)
    d = phi_prime(p, x)
    margins = cone_margins(d, lam, beta)
    violations = []
    for row, sgn in zip(margins, (1, -1)):
        for i in np.flatnonzero(row <= 0.0):
            violations.append({"x": float(x[i]), "sign": sgn, "margin": float(row[i])})
    margins_k2 = cone_margins(d, lam, th.K2)

    ginv = invert(G.g)
    back = [x]
    for _ in range(k_max):
        back.append(kernels.iterate_many(ginv.disp.values, ginv.disp.curv, back[-1], 1))
    s_hi = np.full_like(x, beta)
    s_lo = np.full_like(x, -beta)
    apertures = []
    for k in range(k_max, 0, -1):
        dk = phi_prime(p, back[k])
        s_hi = (dk + lam * s_hi) / (1.0 + dk + lam * s_hi)
        s_lo = (dk + lam * s_lo) / (1.0 + dk + lam * s_lo)
        apertures.append(float(np.max(np.abs(s_hi - s_lo))))
    slope = 0.5 * (s_hi + s_lo)
    graph_slope = derivative(G.psi).values
    return {
        "zeta_hat": zeta,
        "beta": beta,
        "cone_threshold": beta / (1.0 + beta),
        "analytic_pass": bool(zeta < beta / (1.0 + beta)),
        "node_pass": not violations,
        "worst_margin": float(margins.min()),
        "violations": violations,
        "node_pass_K2": bool(margins_k2.min() > 0.0),
        "worst_margin_K2": float(margins_k2.min()),
        "aperture_history": apertures,
        "limit_slope": slope,
        "slope_vs_graph": float(np.max(np.abs(slope - graph_slope))),
    }


def slope_discontinuity_scan(psi: PeriodicFn, jump_tol: float):
    """Nodes whose one-sided difference quotients (mean over steps 1, 2, 3)
    differ by more than ``jump_tol``; one report per local maximum."""
    v = psi.values
    n = psi.n
    left = np.zeros(n)
    right = np.zeros(n)
    for m in (1, 2, 3):
        left += (v - np.roll(v, m)) * n / m
        right += (np.roll(v, -m) - v) * n / m
    left /= 3.0
    right /= 3.0
    jump = np.abs(right - left)
    out = []
    for i in np.flatnonzero(jump > jump_tol):
        window = jump[np.arange(i - 3, i + 4) % n]
        if jump[i] >= window.max():
            out.append((float(i / n), float(left[i]), float(right[i])))
    return out
