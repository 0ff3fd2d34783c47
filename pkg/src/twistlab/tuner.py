"""Rotation-number targeting and parameter-dependence checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circle import rotation_number
from .graphsolve import InvariantGraph, ThresholdSet, solve
from .twist import TwistParams

RHO_ITERS = 1 << 22


class TuneError(RuntimeError):
    pass


@dataclass
class TuneResult:
    parameter: str
    value: float
    target: float
    achieved: float
    iterations: int
    params: TwistParams
    graph: InvariantGraph

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "achieved": self.achieved,
            "parameter": self.value,
            "vary": self.parameter,
            "iterations": self.iterations,
        }


def rho_of(p: TwistParams, n_iter: int = RHO_ITERS, tol: float = 1e-11, graph=None) -> float:
    """Rotation number of the map induced on the invariant graph."""
    G = graph if graph is not None else solve(p, tol=tol)
    if not G.converged:
        raise TuneError(f"graph solve did not converge ({G.status})")
    rho, _ = rotation_number(G.g, 0.0, n_iter)
    return rho


def _tune(p: TwistParams, omega: float, tol: float, which: str, n_iter: int, max_steps: int = 200):
    lam = p.lam
    th = ThresholdSet.for_lambda(lam)
    delta = p.phi.sup_norm() + lam * th.K2 + 0.1
    if which == "alpha1":
        centre = omega - lam * p.alpha2 / (1.0 - lam)
        half = delta
    else:
        centre = (omega - p.alpha1) * (1.0 - lam) / lam
        half = delta * (1.0 - lam) / lam

    last = {}

    def measure(v):
        q = p.replace(**{which: v})
        G = solve(q, tol=1e-11, psi0=last.get("psi"))
        if not G.converged:
            raise TuneError(f"solver failed at {which}={v!r} ({G.status})")
        last["psi"] = G.psi
        rho, _ = rotation_number(G.g, 0.0, n_iter)
        return rho, q, G

    steps = 0
    for _ in range(9):
        lo, hi = centre - half, centre + half
        r_lo = measure(lo)[0]
        r_hi = measure(hi)[0]
        steps += 2
        if r_lo <= omega <= r_hi:
            break
        half *= 2.0
    else:
        raise TuneError(f"could not bracket rho = {omega} by varying {which}")
    best = None
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        rho, q, G = measure(mid)
        steps += 1
        if best is None or abs(rho - omega) < abs(best[0] - omega):
            best = (rho, mid, q, G)
        if abs(rho - omega) <= 0.5 * tol:
            break
        if rho < omega:
            lo = mid
        else:
            hi = mid
        if hi - lo < 4e-16 * max(1.0, abs(mid)):
            break
    rho, v, q, G = best
    if abs(rho - omega) > tol:
        raise TuneError(f"bisection ended with |rho - omega| = {abs(rho - omega):.3g} > {tol}")
    return TuneResult(which, v, omega, rho, steps, q, G)


def tune_alpha1(p: TwistParams, omega: float, tol: float = 1e-6, n_iter: int = RHO_ITERS) -> TuneResult:
    """Bisection in alpha1 (alpha2 fixed) until |rho - omega| <= tol."""
    return _tune(p, omega, tol, "alpha1", n_iter)


def tune_alpha2(p: TwistParams, omega: float, tol: float = 1e-6, n_iter: int = RHO_ITERS) -> TuneResult:
    """Bisection in alpha2 (alpha1 fixed) until |rho - omega| <= tol."""
    return _tune(p, omega, tol, "alpha2", n_iter)


def lipschitz_dependence_check(p: TwistParams, alpha2_values, tol: float = 1e-3, solve_tol: float = 1e-11) -> dict:
    """Largest sup_x |Psi_a(x) - Psi_a'(x)| / |a2 - a2'| over all pairs."""
    graphs = {}
    for a2 in alpha2_values:
        G = solve(p.replace(alpha2=float(a2)), tol=solve_tol)
        if not G.converged:
            raise TuneError(f"solver failed at alpha2={a2}")
        graphs[float(a2)] = G.psi.values
    pairs = []
    for a, b in itertools.combinations(sorted(graphs), 2):
        ratio = float(np.max(np.abs(graphs[a] - graphs[b])) / abs(a - b))
        pairs.append({"alpha2": a, "alpha2_prime": b, "ratio": ratio})
    bound = 1.0 / (1.0 - p.lam)
    worst = max(r["ratio"] for r in pairs)
    return {"max_ratio": worst, "bound": bound, "pass": worst <= bound + tol, "pairs": pairs}


def alpha1_dependence(p: TwistParams, alpha1_values, solve_tol: float = 1e-11) -> dict:
    """sup-norm distance between graphs solved at different alpha1 (alpha2 fixed)."""
    ref = None
    diffs = []
    for a1 in alpha1_values:
        G = solve(p.replace(alpha1=float(a1)), tol=solve_tol)
        if not G.converged:
            raise TuneError(f"solver failed at alpha1={a1}")
        if ref is None:
            ref = (float(a1), G.psi.values)
            continue
        diffs.append({"alpha1": ref[0], "alpha1_prime": float(a1), "sup_diff": float(np.max(np.abs(G.psi.values - ref[1])))})
    worst = max((d["sup_diff"] for d in diffs), default=0.0)
    return {"max_sup_diff": worst, "pairs": diffs}


def rotation_identity_check(p: TwistParams, n_iter: int = 10**6, x0: float = 0.0, graph=None) -> dict:
    """Compare the measured rotation number with a1 + lam<Psi> + <phi>,
    the averages taken along the same orbit of the induced map."""
    G = graph if graph is not None else solve(p, tol=1e-11)
    if not G.converged:
        raise TuneError(f"graph solve did not converge ({G.status})")
    disp = G.g.disp
    obs = np.vstack([G.psi.values, p.phi.values])
    curv = np.vstack([G.psi.curv, p.phi.curv]) if p.phi.interp == "cubic" else np.zeros((2, 0))
    if p.phi.interp == "cubic" and G.psi.interp != "cubic":
        curv = np.vstack([kernels.spline_curvature(G.psi.values), p.phi.curv])
    x_end, sums = kernels.birkhoff_sums(disp.values, disp.curv, obs, curv, x0, n_iter)
    rho = (x_end - x0) / n_iter
    avg_psi, avg_phi = sums / n_iter
    predicted = p.alpha1 + p.lam * avg_psi + avg_phi
    return {
        "rho": float(rho),
        "avg_psi": float(avg_psi),
        "avg_phi": float(avg_phi),
        "predicted": float(predicted),
        "defect": float(abs(rho - predicted)),
        "seed": float(x0),
        "n_iter": int(n_iter),
    }


def rho_scan(p: TwistParams, alpha1_values, n_iter: int = 1 << 18) -> np.ndarray:
    """Rotation numbers along an alpha1 grid (alpha2 fixed)."""
    out = []
    psi = None
    for a1 in alpha1_values:
        G = solve(p.replace(alpha1=float(a1)), tol=1e-11, psi0=psi)
        psi = G.psi
        out.append(rotation_number(G.g, 0.0, n_iter)[0])
    return np.array(out)


def golden() -> float:
    return (math.sqrt(5.0) - 1.0) / 2.0
