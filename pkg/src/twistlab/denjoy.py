"""Denjoy circle maps with wandering intervals, derivative surgery along a
wandering orbit, and the twist-map perturbation they induce.

The maps are held as exact piecewise objects (interval data plus a smooth
bump primitive) and sampled onto uniform grids only for output and norms.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .circle import CircleLift, convergents, rotation_number
from .graphsolve import solve
from .periodic import PeriodicFn, grid, holder_seminorm, lip_seminorm, mean
from .twist import TwistParams

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DenjoyError(ValueError):
    pass


@dataclass(frozen=True)
class DenjoyConfig:
    omega: float = GOLDEN
    eps: float = 0.1
    N: int = 200
    K: int = 400
    lam: float = 0.25
    beta0: float | None = None
    grid_n: int = 1 << 16
    ramp: float = 0.25
    ramp_end: float = 0.05

    @property
    def beta_seed(self) -> float:
        return (1.0 + self.lam) / 2.0 if self.beta0 is None else float(self.beta0)

    def validate(self):
        lam, N = self.lam, self.N
        if not 0.0 < lam < 1.0:
            raise DenjoyError(f"lambda must lie in (0, 1), got {lam}")
        if self.eps <= 0.0:
            raise DenjoyError("eps must be positive")
        if self.K < 1:
            raise DenjoyError("K must be >= 1")
        r = 1.0 / math.sqrt(N)
        s = math.sqrt(lam)
        if not r < min(lam, 0.5 * (s - lam)):
            raise DenjoyError(f"need 1/sqrt(N) < min(lam, (sqrt(lam)-lam)/2); N={N} too small")
        if not N > max(1.0 / lam**2, 4.0 / (s * (1.0 - s) ** 2)):
            raise DenjoyError(f"need N > max(1/lam^2, 4/(sqrt(lam)(1-sqrt(lam))^2)); N={N} too small")
        b = self.beta_seed
        if not lam + r < b < 1.0 - r:
            raise DenjoyError(f"beta0={b} outside ({lam + r:.4g}, {1 - r:.4g})")
        frac = self.omega - math.floor(self.omega)
        for c in convergents(frac, 10**4):
            if abs(frac - c.numerator / c.denominator) < 1e-12:
                raise DenjoyError(f"omega={self.omega} is rational to 1e-12 ({c})")


# ------------------------------------------------------------------ bump


class Bump:
    """eta(u) = C exp(-1/(1 - v^2)), v = 4u - 2, supported on [1/4, 3/4] with
    unit integral, and its primitive E(u) (E = 0 left of the support, 1 right)."""

    def __init__(self, cells: int = 2048, order: int = 16):
        self.cells = cells
        self.nodes, self.weights = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(-1.0, 1.0, cells + 1)
        self.edges = edges
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        pts = mid[:, None] + half[:, None] * self.nodes[None, :]
        cell_int = (self._kernel(pts) * self.weights[None, :]).sum(axis=1) * half
        self.cum = np.concatenate(([0.0], np.cumsum(cell_int)))
        self.total = float(self.cum[-1])

    @staticmethod
    def _kernel(v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        inside = np.abs(v) < 1.0
        vi = v[inside]
        out[inside] = np.exp(-1.0 / (1.0 - vi * vi))
        return out

    def eta(self, u):
        u = np.asarray(u, dtype=float)
        return 4.0 * self._kernel(4.0 * u - 2.0) / self.total

    def E(self, u):
        u = np.asarray(u, dtype=float)
        v = np.clip(4.0 * u - 2.0, -1.0, 1.0)
        i = np.clip(np.searchsorted(self.edges, v, side="right") - 1, 0, self.cells - 1)
        lo = self.edges[i]
        half = 0.5 * (v - lo)
        pts = (lo + half)[..., None] + half[..., None] * self.nodes
        part = (self._kernel(pts) * self.weights).sum(axis=-1) * half
        return (self.cum[i] + part) / self.total


_BUMP = None


def bump() -> Bump:
    global _BUMP
    if _BUMP is None:
        _BUMP = Bump()
    return _BUMP


# --------------------------------------------------------- interval system


def index_window(cfg: DenjoyConfig):
    """Half-width M of the index window and the rational p/q = rho(g).

    q = 2M + 1 is the least odd continued-fraction denominator of omega
    with q >= 2K + 1 for which closing I_M -> I_-M keeps the cyclic order.
    """
    frac = cfg.omega - math.floor(cfg.omega)
    for c in convergents(frac, 10**7):
        q = c.denominator
        if q < 2 * cfg.K + 1 or q % 2 == 0:
            continue
        M = (q - 1) // 2
        if _closure_preserves_order(frac, M):
            return M, c.numerator + int(math.floor(cfg.omega)) * q, q
    raise DenjoyError("no admissible odd convergent denominator found")


def _closure_preserves_order(frac: float, M: int) -> bool:
    ks = np.arange(-M, M + 1)
    pos = np.mod(ks * frac, 1.0)
    rank = np.empty(ks.size, dtype=np.int64)
    rank[np.argsort(pos, kind="stable")] = np.arange(ks.size)
    nxt = np.arange(1, ks.size + 1) % ks.size
    shift = np.mod(rank[nxt] - rank, ks.size)
    return bool(np.all(shift == shift[0]))


def lengths(cfg: DenjoyConfig, M: int | None = None):
    """Interval lengths l_k for |k| <= M, normalised to total 1.

    Returns ``(ks, ell)``.
    """
    if M is None:
        M = index_window(cfg)[0]
    ks = np.arange(-M, M + 1)
    m = np.abs(ks) + cfg.N
    raw = 1.0 / (m * np.log(m) ** (1.0 + cfg.eps))
    return ks, raw / raw.sum()


def arrange(cfg: DenjoyConfig, ks: np.ndarray, ell: np.ndarray):
    """Left endpoints a_k ordered like {k omega mod 1}.

    Returns ``(a, skeleton)`` where ``skeleton[k]`` = frac(k omega) is the
    semiconjugacy value at a_k.
    """
    pos = np.mod(ks * cfg.omega, 1.0)
    order = np.argsort(pos, kind="stable")
    if np.any(np.diff(pos[order]) <= 1e-15):
        raise DenjoyError("duplicate fractional parts: omega is rational to machine precision")
    a = np.empty_like(ell)
    a[order] = np.concatenate(([0.0], np.cumsum(ell[order])[:-1]))
    return a, pos


class DenjoyMap:
    """The circle map sending I_k onto I_{k+1} by t -> t + (l_{k+1}-l_k) E(t/l_k),
    with I_M sent to I_-M."""

    def __init__(self, ks, ell, a, omega):
        self.ks = ks
        self.ell = ell
        self.a = a
        self.size = ks.size
        self.nxt = np.arange(1, self.size + 1) % self.size
        self.prv = np.arange(-1, self.size - 1) % self.size
        self.order = np.argsort(a, kind="stable")
        self.a_sorted = a[self.order]
        self.dell = ell[self.nxt] - ell
        raw = a[self.nxt] - a
        disp = np.mod(raw - omega + 0.5, 1.0) + omega - 0.5
        self.wind = np.rint(disp - raw)
        self.bump = bump()

    def locate(self, x):
        x = np.asarray(x, dtype=float)
        m = np.floor(x)
        f = x - m
        r = np.clip(np.searchsorted(self.a_sorted, f, side="right") - 1, 0, self.size - 1)
        idx = self.order[r]
        return idx, m, f - self.a[idx]

    def zeta(self, idx, t):
        return t + self.dell[idx] * self.bump.E(t / self.ell[idx])

    def dzeta(self, idx, t):
        return 1.0 + self.dell[idx] / self.ell[idx] * self.bump.eta(t / self.ell[idx])

    def zeta_inv(self, idx, tp):
        t = tp * self.ell[idx] / self.ell[self.nxt[idx]]
        for _ in range(60):
            step = (self.zeta(idx, t) - tp) / self.dzeta(idx, t)
            t = t - step
            if np.all(np.abs(step) < 1e-17):
                break
        return t

    def __call__(self, x):
        idx, m, t = self.locate(x)
        return m + self.a[self.nxt[idx]] + self.wind[idx] + self.zeta(idx, t)

    def deriv(self, x):
        idx, _, t = self.locate(x)
        return self.dzeta(idx, t)

    def inverse(self, y):
        tgt, m, tp = self.locate(y)
        src = self.prv[tgt]
        return m - self.wind[src] + self.a[src] + self.zeta_inv(src, tp)


def build_g(cfg: DenjoyConfig, ks, ell, a) -> DenjoyMap:
    return DenjoyMap(ks, ell, a, cfg.omega)


# ------------------------------------------------------------ Moebius orbit


def mobius(m, lam, t):
    """Phi_m(t) = m - lam / t."""
    return m - lam / t


def mobius_inv(m, lam, t):
    return lam / (m - t)


def mobius_orbit(cfg: DenjoyConfig, ks: np.ndarray, m_seq: np.ndarray):
    """Two-sided beta_k: beta_k = Phi_{m_k}(beta_{k-1}) forward from beta_0,
    beta_k = Phi^-1_{m_{k+1}}(beta_{k+1}) backward.

    Returns ``(beta, exits)`` where ``exits`` lists k with beta_k outside (0, m_k).
    """
    lam = cfg.lam
    beta = np.empty(ks.size)
    i0 = int(np.flatnonzero(ks == 0)[0])
    beta[i0] = cfg.beta_seed
    for i in range(i0 + 1, ks.size):
        beta[i] = mobius(m_seq[i], lam, beta[i - 1])
        if beta[i] <= 0.0:
            raise DenjoyError(f"beta_{ks[i]} = {beta[i]:.4g} <= 0: seed outside the basin")
    for i in range(i0 - 1, -1, -1):
        beta[i] = mobius_inv(m_seq[i + 1], lam, beta[i + 1])
        if beta[i] <= 0.0:
            raise DenjoyError(f"beta_{ks[i]} = {beta[i]:.4g} <= 0: seed outside the basin")
    exits = [int(k) for k, b, m in zip(ks, beta, m_seq) if not 0.0 < b < m]
    return beta, exits


# ------------------------------------------------------------ surgery


class ArnaudMap:
    """g modified on J_k = (x_k, c_k): derivative piecewise linear from
    beta_k up to a plateau P_k and down to Dg(c_k), integral matching g."""

    def __init__(self, g: DenjoyMap, t0: float, beta: np.ndarray, lam: float, N: int, ramp: float, ramp_end: float):
        self.g = g
        self.t0 = t0
        self.beta = beta
        ell = g.ell
        L = 0.5 * (ell - t0)
        self.L = L
        idx = np.arange(g.size)
        tc = t0 + L
        self.dc = g.dzeta(idx, tc)
        G = g.zeta(idx, tc) - g.zeta(idx, np.full(g.size, t0))
        self.G = G
        cap = 1.0 + 0.5 / math.sqrt(N)
        f2 = ramp_end
        f_target = 2.0 * (cap * (1.0 - f2 / 2.0) - G / L + self.dc * f2 / 2.0) / (cap - beta)
        f1 = np.clip(np.minimum(ramp, f_target), 1e-3, ramp)
        self.r1 = f1 * L
        self.r2 = f2 * L
        self.P = (G - beta * self.r1 / 2.0 - self.dc * self.r2 / 2.0) / (L - (self.r1 + self.r2) / 2.0)
        lo, hi = lam - 1.0 / math.sqrt(N), 1.0 + 1.0 / math.sqrt(N)
        bad = np.flatnonzero((self.P < lo) | (self.P > hi))
        if bad.size:
            raise DenjoyError(f"profile infeasible for k = {g.ks[bad][:10].tolist()}")
        # cumulative integrals at the three breakpoints of each profile
        self.Q1 = (beta + self.P) * self.r1 / 2.0
        self.Q2 = self.Q1 + self.P * (L - self.r1 - self.r2)

    def profile(self, idx, s):
        """Dh at x_k + s, 0 <= s <= L_k."""
        b, P, d, r1, r2, L = self.beta[idx], self.P[idx], self.dc[idx], self.r1[idx], self.r2[idx], self.L[idx]
        up = b + (P - b) * s / r1
        down = P + (d - P) * (s - (L - r2)) / r2
        return np.where(s < r1, up, np.where(s <= L - r2, P, down))

    def primitive(self, idx, s):
        b, P, d, r1, r2, L = self.beta[idx], self.P[idx], self.dc[idx], self.r1[idx], self.r2[idx], self.L[idx]
        q_up = b * s + (P - b) * s * s / (2.0 * r1)
        q_mid = self.Q1[idx] + P * (s - r1)
        u = s - (L - r2)
        q_dn = self.Q2[idx] + P * u + (d - P) * u * u / (2.0 * r2)
        return np.where(s < r1, q_up, np.where(s <= L - r2, q_mid, q_dn))

    def primitive_inv(self, idx, q):
        b, P, d, r1, r2, L = self.beta[idx], self.P[idx], self.dc[idx], self.r1[idx], self.r2[idx], self.L[idx]
        Q1, Q2 = self.Q1[idx], self.Q2[idx]
        # rising ramp: (P-b)/(2 r1) s^2 + b s - q = 0
        A = (P - b) / (2.0 * r1)
        s_up = np.where(np.abs(A) > 0, 2.0 * q / (b + np.sqrt(np.maximum(b * b + 4.0 * A * q, 0.0))), q / b)
        s_mid = r1 + (q - Q1) / P
        qq = q - Q2
        A2 = (d - P) / (2.0 * r2)
        u = 2.0 * qq / (P + np.sqrt(np.maximum(P * P + 4.0 * A2 * qq, 0.0)))
        s_dn = (L - r2) + u
        return np.where(q < Q1, s_up, np.where(q <= Q2, s_mid, s_dn))

    def _in_window(self, idx, t):
        s = t - self.t0
        return (s >= 0.0) & (s <= self.L[idx]), np.clip(s, 0.0, None)

    def __call__(self, x):
        g = self.g
        idx, m, t = g.locate(x)
        inside, s = self._in_window(idx, t)
        base = m + g.a[g.nxt[idx]] + g.wind[idx]
        mod = base + g.zeta(idx, np.full_like(t, self.t0)) + self.primitive(idx, np.minimum(s, self.L[idx]))
        return np.where(inside, mod, base + g.zeta(idx, t))

    def deriv(self, x):
        g = self.g
        idx, _, t = g.locate(x)
        inside, s = self._in_window(idx, t)
        return np.where(inside, self.profile(idx, np.minimum(s, self.L[idx])), g.dzeta(idx, t))

    def inverse(self, y):
        g = self.g
        tgt, m, tp = g.locate(y)
        src = g.prv[tgt]
        z0 = g.zeta(src, np.full_like(tp, self.t0))
        q = tp - z0
        inside = (q >= 0.0) & (q <= self.G[src])
        s = self.primitive_inv(src, np.clip(q, 0.0, self.G[src]))
        t_mod = self.t0 + s
        t_out = np.where(inside, t_mod, g.zeta_inv(src, tp))
        return m - g.wind[src] + g.a[src] + t_out


def orbit_points(g: DenjoyMap, t0: float) -> np.ndarray:
    return g.a + t0


def arnaud_modify(cfg: DenjoyConfig, g: DenjoyMap, beta: np.ndarray, t0: float) -> ArnaudMap:
    return ArnaudMap(g, t0, beta, cfg.lam, cfg.N, cfg.ramp, cfg.ramp_end)


# ------------------------------------------------------------ assembly


def assemble(cfg: DenjoyConfig, h: ArnaudMap, n: int | None = None):
    """psi_N, phi_N = psi_N - mean, alpha_N = mean/(1-lam) and the graph
    Psi_N = Id - h^-1 - alpha_N, all sampled on an n-point grid."""
    n = n or cfg.grid_n
    lam = cfg.lam
    x = grid(n)
    hx = h(x)
    hinv = h.inverse(x)
    psi_vals = (hx - x) + lam * (hinv - x)
    psi = PeriodicFn(psi_vals)
    A = mean(psi)
    phi = PeriodicFn(psi_vals - A)
    alpha = A / (1.0 - lam)
    Psi = PeriodicFn(x - hinv - alpha)
    return psi, phi, alpha, Psi


@dataclass(eq=False)
class DenjoyArtifact:
    cfg: DenjoyConfig
    M: int
    p: int
    q: int
    ks: np.ndarray
    lengths: np.ndarray
    left_endpoints: np.ndarray
    skeleton: np.ndarray
    orbit: np.ndarray
    t0: float
    m_seq: np.ndarray
    betas: np.ndarray
    beta_exits: list
    gmap: DenjoyMap
    hmap: ArnaudMap
    psi: PeriodicFn
    phi: PeriodicFn
    alphaN: float
    Psi: PeriodicFn
    build_seconds: float
    report: dict = field(default_factory=dict)

    def index(self, k: int) -> int:
        return int(k) + self.M

    def sampled_lift(self, which: str = "h", n: int | None = None) -> CircleLift:
        n = n or self.cfg.grid_n
        x = grid(n)
        f = self.hmap if which == "h" else self.gmap
        return CircleLift(PeriodicFn(f(x) - x))


def build_artifact(cfg: DenjoyConfig) -> DenjoyArtifact:
    start = time.perf_counter()
    cfg.validate()
    M, p, q = index_window(cfg)
    ks, ell = lengths(cfg, M)
    a, skel = arrange(cfg, ks, ell)
    g = build_g(cfg, ks, ell, a)
    t0 = float(ell.min()) / 8.0
    xk = orbit_points(g, t0)
    dg = g.deriv(xk)
    m_seq = dg + cfg.lam / dg[g.prv]
    beta, exits = mobius_orbit(cfg, ks, m_seq)
    h = arnaud_modify(cfg, g, beta, t0)
    psi, phi, alpha, Psi = assemble(cfg, h)
    return DenjoyArtifact(
        cfg=cfg, M=M, p=p, q=q, ks=ks, lengths=ell, left_endpoints=a, skeleton=skel,
        orbit=xk, t0=t0, m_seq=m_seq, betas=beta, beta_exits=exits, gmap=g, hmap=h,
        psi=psi, phi=phi, alphaN=alpha, Psi=Psi, build_seconds=time.perf_counter() - start,
    )


# ------------------------------------------------------------ certificates


def _psi_exact(art: DenjoyArtifact, x):
    lam = art.cfg.lam
    return (art.hmap(x) - x) + lam * (art.hmap.inverse(x) - x)


def _dpsi_exact(art: DenjoyArtifact, x):
    lam = art.cfg.lam
    return art.hmap.deriv(x) + lam / art.hmap.deriv(art.hmap.inverse(x)) - (1.0 + lam)


def adapted_mesh(art: DenjoyArtifact, kmax: int, per_piece: int = 48) -> np.ndarray:
    """Points in I_k (|k| <= kmax) clustered on every breakpoint of Dh and of
    Dh o h^-1, with one-sided samples a hair inside each piece."""
    g, h = art.gmap, art.hmap
    sel = np.flatnonzero(np.abs(art.ks) <= kmax)
    pts = []
    for i in sel:
        a, l = g.a[i], g.ell[i]
        j = g.prv[i]
        own = [0.0, l / 4, 3 * l / 4, l, art.t0, art.t0 + h.r1[i], art.t0 + h.L[i] - h.r2[i], art.t0 + h.L[i]]
        src = np.array([art.t0 + h.r1[j], art.t0 + h.L[j] - h.r2[j], art.t0 + h.L[j], l_j4 := g.ell[j] / 4, 3 * l_j4])
        src_img = h(g.a[j] + src) - h(g.a[j]) + 0.0
        marks = np.unique(np.clip(np.concatenate((own, src_img)), 0.0, l))
        for lo, hi in zip(marks[:-1], marks[1:]):
            if hi - lo <= 0:
                continue
            w = hi - lo
            pts.append(a + lo + w * np.linspace(1e-9, 1 - 1e-9, per_piece))
    return np.concatenate(pts)


def one_sided_quotients(f, x, scale):
    """Richardson-corrected left and right difference quotients of f at x."""
    f0 = f(x)

    def q(sgn, s):
        return (f(x + sgn * s) - f0) / (sgn * s)

    right = 2.0 * q(1.0, scale) - q(1.0, 2.0 * scale)
    left = 2.0 * q(-1.0, scale) - q(-1.0, 2.0 * scale)
    return left, right


def faithful_mask(art: DenjoyArtifact, x: np.ndarray) -> np.ndarray:
    """True where x lies outside every I_k with |k| > K/2."""
    idx, _, _ = art.gmap.locate(x)
    return np.abs(art.ks[idx]) <= art.cfg.K // 2


def faithful_holder(art: DenjoyArtifact, eps: float | None = None) -> float:
    """C^(1-eps) norm of phi_N with quotients over dyadic grid pairs whose
    two ends both lie in the faithful region."""
    eps = art.cfg.eps if eps is None else eps
    v = art.phi.values
    n = v.size
    keep = faithful_mask(art, grid(n))
    best = 0.0
    for j in range(int(np.log2(n // 2)) + 1):
        m = 1 << j
        both = keep & np.roll(keep, -m)
        if np.any(both):
            d = np.abs(np.roll(v, -m) - v)[both]
            best = max(best, float(d.max()) / (m / n) ** (1.0 - eps))
    return art.phi.sup_norm() + best


def certify(art: DenjoyArtifact, tol: float = 1e-3) -> dict:
    """Validity record: construction identities plus the three headline
    properties, each with its measured value and a pass flag."""
    cfg = art.cfg
    lam, N, K = cfg.lam, cfg.N, cfg.K
    g, h = art.gmap, art.hmap
    ks = art.ks
    rep = {}
    ok = {}
    half = K // 2
    faithful = np.abs(ks) <= half
    nb = ks < art.M  # intervals whose successor is not across the bridge

    rep["window_M"] = art.M
    rep["rho_g_rational"] = [art.p, art.q]
    rep["sum_lengths_defect"] = float(abs(art.lengths.sum() - 1.0))
    ok["sum_lengths"] = rep["sum_lengths_defect"] <= 1e-12
    ratio = np.abs(art.lengths[1:] / art.lengths[:-1] - 1.0) * (np.abs(ks[:-1]) + N)
    rep["ratio_constant_C2"] = float(ratio.max())
    ok["ratio_bound"] = rep["ratio_constant_C2"] <= 3.0
    pos = np.mod(ks * cfg.omega, 1.0)
    ok["cyclic_order"] = bool(np.array_equal(np.argsort(art.left_endpoints, kind="stable"), np.argsort(pos, kind="stable")))
    ga = g(art.left_endpoints)
    jres = np.abs(np.mod(art.skeleton[g.nxt] - art.skeleton - cfg.omega + 0.5, 1.0) - 0.5)
    rep["semiconjugacy_residual"] = float(jres[nb].max())
    ok["semiconjugacy"] = rep["semiconjugacy_residual"] <= 1e-9
    rep["endpoint_image_defect"] = float(np.max(np.abs(np.mod(ga - art.left_endpoints[g.nxt] + 0.5, 1.0) - 0.5)))
    rep["Dg_at_endpoints_defect"] = float(np.max(np.abs(g.deriv(art.left_endpoints) - 1.0)))
    zend = g.zeta(np.arange(g.size), art.lengths)
    rep["zeta_end_defect"] = float(np.max(np.abs(zend - art.lengths[g.nxt])))
    ok["zeta_end"] = rep["zeta_end_defect"] <= 1e-10
    rho_g, _ = rotation_number(art.sampled_lift("g"), 0.0, 10**6)
    rep["rho_g"] = rho_g
    ok["rho_g"] = abs(rho_g - cfg.omega) <= 1e-4

    rep["m_window_times_N"] = float(np.max(np.abs(art.m_seq - (1.0 + lam))) * N)
    ok["m_window"] = rep["m_window_times_N"] <= 1.0
    iK, imK = art.index(K), art.index(-K)
    rep["beta_K_minus_1"] = float(art.betas[iK] - 1.0)
    rep["beta_minusK_minus_lam"] = float(art.betas[imK] - lam)
    ok["beta_limits"] = abs(rep["beta_K_minus_1"]) <= tol and abs(rep["beta_minusK_minus_lam"]) <= tol
    n_minus, n_plus = 1.0 + lam - 1.0 / N, 1.0 + lam + 1.0 / N
    lo = hi = cfg.beta_seed
    sandwich = True
    for k in range(1, art.M + 1):
        lo, hi = mobius(n_minus, lam, lo), mobius(n_plus, lam, hi)
        b = art.betas[art.index(k)]
        sandwich &= lo - 1e-15 <= b <= hi + 1e-15
    ok["beta_sandwich"] = bool(sandwich)
    rep["beta_exits"] = art.beta_exits
    rep["beta0_reading"] = "beta0 compared with Dg(x0) = %.12g" % float(g.deriv(art.orbit[art.index(0)]))

    xk = art.orbit
    sel = np.flatnonzero(faithful)
    hx = h(xk[sel])
    target = xk[g.nxt[sel]]
    rep["h_orbit_defect"] = float(np.max(np.abs(np.mod(hx - target + 0.5, 1.0) - 0.5)))
    ok["h_orbit"] = rep["h_orbit_defect"] <= 1e-12
    scales = art.lengths[sel] / 2.0**16
    _, dq_r = one_sided_quotients(h, xk[sel], scales)
    rep["h_right_derivative_defect"] = float(np.max(np.abs(dq_r - art.betas[sel])))
    ok["h_right_derivative"] = rep["h_right_derivative_defect"] <= tol
    mesh_all = adapted_mesh(art, art.M, per_piece=8)
    dh = h.deriv(np.concatenate((mesh_all, grid(cfg.grid_n))))
    rep["Dh_min"], rep["Dh_max"] = float(dh.min()), float(dh.max())
    rep["Dh_window"] = [lam - 1.0 / math.sqrt(N), 1.0 + 1.0 / math.sqrt(N)]
    ok["Dh_window"] = rep["Dh_window"][0] <= rep["Dh_min"] and rep["Dh_max"] <= rep["Dh_window"][1]
    rep["interval_images_defect"] = float(
        np.max(np.abs(np.mod(h(art.left_endpoints + art.lengths) - (art.left_endpoints[g.nxt] + art.lengths[g.nxt]) + 0.5, 1.0) - 0.5))
    )

    # psi_N: one-sided slopes at x_k agree
    psi_f = lambda x: _psi_exact(art, x)
    l_q, r_q = one_sided_quotients(psi_f, xk[sel], scales)
    rep["psi_slope_mismatch"] = float(np.max(np.abs(r_q - l_q)))
    ok["psi_slopes_agree"] = rep["psi_slope_mismatch"] <= tol
    # Psi_N = Id - h^-1 - alpha: jump at h(x_k) of size |1/beta_k - 1/Dg(x_k)|
    Psi_f = lambda x: x - h.inverse(x) - art.alphaN
    back = sel[(ks[sel] <= 0) & (ks[sel] >= -half)]
    fwd = sel[ks[sel] > 0]
    jumps = {}
    for name, ids in (("backward", back), ("forward", fwd)):
        pts = xk[g.nxt[ids]]
        lq, rq = one_sided_quotients(Psi_f, pts, art.lengths[g.nxt[ids]] / 2.0**16)
        measured = np.abs(rq - lq)
        oracle = np.abs(1.0 / art.betas[ids] - 1.0 / g.deriv(xk[ids]))
        jumps[name] = (measured, oracle)
    mb, ob = jumps["backward"]
    rep["Psi_jump_min_k_le_0"] = float(mb.min())
    rep["Psi_jump_oracle_defect"] = float(max(np.max(np.abs(mb - ob)), np.max(np.abs(jumps["forward"][0] - jumps["forward"][1]))))
    rep["Psi_jump_forward_range"] = [float(jumps["forward"][0].min()), float(jumps["forward"][0].max())]
    rep["Psi_jump_threshold"] = 1.0 / (2.0 * math.sqrt(N))
    ok["Psi_jumps"] = rep["Psi_jump_min_k_le_0"] > rep["Psi_jump_threshold"] and rep["Psi_jump_oracle_defect"] <= tol
    i0 = art.index(0)
    rep["Psi_jump_at_h_x0"] = float(abs(1.0 / g.deriv(xk[i0]) - 1.0 / art.betas[i0]))
    ok["Psi_jump_x0"] = rep["Psi_jump_at_h_x0"] > 1.0 / math.sqrt(N) - tol

    # (II) Lipschitz size of psi_N on the faithful region
    mesh = adapted_mesh(art, half)
    dpsi = _dpsi_exact(art, mesh)
    rep["lip_psi"] = float(np.max(np.abs(dpsi)))
    fine = np.sort(mesh)
    pv = psi_f(fine)
    dx = np.diff(fine)
    good = dx > 0
    rep["lip_psi_chord"] = float(np.max(np.abs(np.diff(pv)[good] / dx[good])))
    rep["lip_psi_grid4096"] = lip_seminorm(PeriodicFn(psi_f(grid(4096))))
    rep["lip_psi_grid"] = lip_seminorm(art.psi)
    rep["lip_threshold"] = (1.0 - math.sqrt(lam)) ** 2
    ok["lip_II"] = rep["lip_psi"] <= rep["lip_threshold"] + tol

    # (III) rotation number of the induced map x + alpha + lam Psi + phi
    ind = art.alphaN + lam * art.Psi.values + art.phi.values
    rho_ind, _ = rotation_number(CircleLift(PeriodicFn(ind)), 0.0, 10**6)
    rep["rho_induced"] = rho_ind
    ok["rho_III"] = abs(rho_ind - cfg.omega) <= tol

    # invariance of the closed-form graph under F with (alpha_N, 0) and phi_N
    xg = grid(cfg.grid_n)
    A = mean(art.psi)
    gx = xg + art.alphaN + lam * art.Psi.values + art.phi.values
    res = Psi_f(gx) - lam * art.Psi.values - art.phi.values
    rep["invariance_residual"] = float(np.max(np.abs(res)))
    ok["invariance"] = rep["invariance_residual"] <= 1e-6

    # the sampled perturbation fed back through the graph solver
    rep["lip_phi_grid"] = lip_seminorm(art.phi)
    ok["threshold_compliance"] = rep["lip_phi_grid"] <= rep["lip_threshold"] + tol
    G = solve(TwistParams(lam, art.alphaN, 0.0, art.phi), tol=1e-10, force=True)
    rep["solve_status"] = G.status
    rep["solve_vs_closed_form"] = float(np.max(np.abs(G.psi.values - art.Psi.values)))
    ok["solve_crosscheck"] = G.converged and rep["solve_vs_closed_form"] <= 1e-4

    rep["mean_phi"] = mean(art.phi)
    ok["mean_phi"] = abs(rep["mean_phi"]) <= 1e-12
    rep["alphaN"] = art.alphaN
    psi_g = (g(xg) - xg) + lam * (g.inverse(xg) - xg)
    rep["A_h"] = A
    rep["A_g"] = float(np.mean(psi_g))
    rep["A_h_minus_A_g"] = rep["A_h"] - rep["A_g"]
    rep["A_tolerance"] = 1e-9
    ok["A_h_equals_A_g"] = abs(rep["A_h_minus_A_g"]) <= rep["A_tolerance"]
    rep["phi_c0"] = art.phi.sup_norm()
    rep["phi_holder"] = faithful_holder(art)
    rep["phi_holder_global"] = holder_seminorm(art.phi, cfg.eps)
    rep["build_seconds"] = art.build_seconds
    ok["runtime"] = art.build_seconds <= 60.0
    rep["checks"] = {k: bool(v) for k, v in ok.items()}
    art.report = rep
    return rep


def decay_study(base: DenjoyConfig, Ns=(200, 400, 800)) -> dict:
    """C0 and C^(1-eps) sizes of phi_N across N with fitted exponents."""
    rows = []
    for N in Ns:
        cfg = DenjoyConfig(**{**base.__dict__, "N": N})
        art = build_artifact(cfg)
        rows.append(
            {
                "N": N,
                "phi_c0": art.phi.sup_norm(),
                "phi_holder": faithful_holder(art),
                "phi_holder_global": holder_seminorm(art.phi, cfg.eps),
            }
        )
    logN = np.log([r["N"] for r in rows])
    c0_exp = float(np.polyfit(logN, np.log([r["phi_c0"] for r in rows]), 1)[0])
    hol = [r["phi_holder"] for r in rows]
    return {
        "rows": rows,
        "c0_exponent": c0_exp,
        "c0_pass": -1.3 <= c0_exp <= -0.7,
        "holder_exponent": float(np.polyfit(logN, np.log(hol), 1)[0]),
        "holder_monotone": bool(all(b < a for a, b in zip(hol, hol[1:]))),
    }
