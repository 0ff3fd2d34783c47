"""Hot loops: periodic interpolation, orbit iteration, graph push-forward,
attractor clouds.

Every public kernel dispatches to a numba implementation (``_nb_*``) or a
numpy / plain-Python implementation (``_np_*``) according to
:data:`BACKEND`. Both paths compute the same quantities; tests check that
they agree and ``benchmarks/bench_kernels.py`` times them.

Interpolation convention shared by all kernels: ``vals`` holds samples at
``i/n``; ``curv`` holds periodic cubic-spline second derivatives, or is an
empty array for piecewise-linear interpolation.
"""

import math

import numpy as np

from ._accel import NUMBA_AVAILABLE, default_backend, njit

BACKEND = default_backend()
NO_CURV = np.zeros(0)


def set_backend(name):
    """Switch between ``"numba"`` and ``"numpy"`` kernels at runtime."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend unavailable")
    BACKEND = name


def spline_curvature(vals):
    """Second derivatives of the periodic cubic spline through ``vals``.

    The periodic tridiagonal system is circulant, so it is solved by FFT.
    """
    vals = np.asarray(vals, dtype=float)
    n = vals.shape[0]
    h = 1.0 / n
    rhs = 6.0 / h**2 * (np.roll(vals, -1) - 2.0 * vals + np.roll(vals, 1))
    k = np.arange(n)
    eig = 4.0 + 2.0 * np.cos(2.0 * np.pi * k / n)
    return np.real(np.fft.ifft(np.fft.fft(rhs) / eig))


# ---------------------------------------------------------------- scalar core


@njit
def _ev1(vals, curv, x):
    n = vals.shape[0]
    t = (x - math.floor(x)) * n
    fi = math.floor(t)
    s = t - fi
    i = int(fi) % n
    j = (i + 1) % n
    if curv.shape[0] == 0:
        return vals[i] + s * (vals[j] - vals[i])
    h = 1.0 / n
    a = 1.0 - s
    return (
        a * vals[i]
        + s * vals[j]
        + ((a * a * a - a) * curv[i] + (s * s * s - s) * curv[j]) * h * h / 6.0
    )


@njit
def _dv1(vals, curv, x):
    n = vals.shape[0]
    t = (x - math.floor(x)) * n
    fi = math.floor(t)
    s = t - fi
    i = int(fi) % n
    j = (i + 1) % n
    h = 1.0 / n
    slope = (vals[j] - vals[i]) / h
    if curv.shape[0] == 0:
        return slope
    a = 1.0 - s
    return slope + h * (-(3.0 * a * a - 1.0) * curv[i] + (3.0 * s * s - 1.0) * curv[j]) / 6.0


# -------------------------------------------------------------- evaluation


@njit
def _nb_eval(vals, curv, xs):
    out = np.empty(xs.shape[0])
    for k in range(xs.shape[0]):
        out[k] = _ev1(vals, curv, xs[k])
    return out


@njit
def _nb_deval(vals, curv, xs):
    out = np.empty(xs.shape[0])
    for k in range(xs.shape[0]):
        out[k] = _dv1(vals, curv, xs[k])
    return out


def _np_locate(n, xs):
    t = (xs - np.floor(xs)) * n
    fi = np.floor(t)
    s = t - fi
    i = fi.astype(np.int64) % n
    return i, (i + 1) % n, s


def _np_eval(vals, curv, xs):
    n = vals.shape[0]
    i, j, s = _np_locate(n, xs)
    if curv.shape[0] == 0:
        return vals[i] + s * (vals[j] - vals[i])
    h = 1.0 / n
    a = 1.0 - s
    return a * vals[i] + s * vals[j] + ((a**3 - a) * curv[i] + (s**3 - s) * curv[j]) * h * h / 6.0


def _np_deval(vals, curv, xs):
    n = vals.shape[0]
    i, j, s = _np_locate(n, xs)
    h = 1.0 / n
    slope = (vals[j] - vals[i]) / h
    if curv.shape[0] == 0:
        return slope
    a = 1.0 - s
    return slope + h * (-(3.0 * a * a - 1.0) * curv[i] + (3.0 * s * s - 1.0) * curv[j]) / 6.0


def eval_periodic(vals, curv, xs):
    xs = np.ascontiguousarray(xs, dtype=float)
    if BACKEND == "numba":
        return _nb_eval(vals, curv, xs)
    return _np_eval(vals, curv, xs)


def deval_periodic(vals, curv, xs):
    xs = np.ascontiguousarray(xs, dtype=float)
    if BACKEND == "numba":
        return _nb_deval(vals, curv, xs)
    return _np_deval(vals, curv, xs)


# ------------------------------------------------------------------ orbits


@njit
def _nb_orbit(disp, curv, x0, n_iter):
    x = x0
    half = n_iter // 2
    x_half = x0
    for k in range(n_iter):
        if k == half:
            x_half = x
        x = x + _ev1(disp, curv, x)
    if half == n_iter:
        x_half = x
    return x_half, x


def _py_ev_factory(disp, curv):
    vals = disp.tolist()
    n = len(vals)
    h = 1.0 / n
    floor = math.floor
    if curv.shape[0] == 0:

        def ev(x):
            t = (x - floor(x)) * n
            fi = floor(t)
            s = t - fi
            i = int(fi) % n
            y0 = vals[i]
            return y0 + s * (vals[(i + 1) % n] - y0)

        return ev
    cv = curv.tolist()
    c6 = h * h / 6.0

    def ev(x):
        t = (x - floor(x)) * n
        fi = floor(t)
        s = t - fi
        i = int(fi) % n
        j = (i + 1) % n
        a = 1.0 - s
        return a * vals[i] + s * vals[j] + ((a * a * a - a) * cv[i] + (s * s * s - s) * cv[j]) * c6

    return ev


def _np_orbit(disp, curv, x0, n_iter):
    ev = _py_ev_factory(disp, curv)
    x = float(x0)
    half = n_iter // 2
    x_half = x
    for k in range(n_iter):
        if k == half:
            x_half = x
        x = x + ev(x)
    return x_half, x


def orbit_endpoints(disp, curv, x0, n_iter):
    """Return ``(g^(n//2)(x0), g^n(x0))`` on the lift."""
    if BACKEND == "numba":
        return _nb_orbit(disp, curv, float(x0), int(n_iter))
    return _np_orbit(disp, curv, float(x0), int(n_iter))


@njit
def _nb_birkhoff(disp, curv, obs, obs_curv, x0, n_iter):
    m = obs.shape[0]
    sums = np.zeros(m)
    x = x0
    for _ in range(n_iter):
        for r in range(m):
            sums[r] += _ev1(obs[r], obs_curv[r], x)
        x = x + _ev1(disp, curv, x)
    return x, sums


def _np_birkhoff(disp, curv, obs, obs_curv, x0, n_iter):
    ev = _py_ev_factory(disp, curv)
    evs = [_py_ev_factory(obs[r], obs_curv[r]) for r in range(obs.shape[0])]
    sums = [0.0] * len(evs)
    x = float(x0)
    for _ in range(n_iter):
        for r, f in enumerate(evs):
            sums[r] += f(x)
        x = x + ev(x)
    return x, np.array(sums)


def birkhoff_sums(disp, curv, obs, obs_curv, x0, n_iter):
    """Iterate the lift from ``x0`` and sum observables along the orbit.

    ``obs`` is an (m, n) array of sample rows; ``obs_curv`` has shape
    (m, n) for spline rows or (m, 0) for linear rows.
    """
    obs = np.ascontiguousarray(obs, dtype=float)
    obs_curv = np.ascontiguousarray(obs_curv, dtype=float)
    if BACKEND == "numba":
        return _nb_birkhoff(disp, curv, obs, obs_curv, float(x0), int(n_iter))
    return _np_birkhoff(disp, curv, obs, obs_curv, float(x0), int(n_iter))


@njit
def _nb_iterate_many(disp, curv, xs, k):
    out = xs.copy()
    for p in range(out.shape[0]):
        x = out[p]
        for _ in range(k):
            x = x + _ev1(disp, curv, x)
        out[p] = x
    return out


def _np_iterate_many(disp, curv, xs, k):
    x = xs.copy()
    for _ in range(k):
        x = x + _np_eval(disp, curv, x)
    return x


def iterate_many(disp, curv, xs, k):
    """Apply the lift ``k`` times to every entry of ``xs``."""
    xs = np.ascontiguousarray(xs, dtype=float)
    if BACKEND == "numba":
        return _nb_iterate_many(disp, curv, xs, int(k))
    return _np_iterate_many(disp, curv, xs, int(k))


# --------------------------------------------------------- graph transform


@njit
def _nb_push_graph(psi, psi_curv, phi, phi_curv, lam, a1, u_ext, x_ext, y_ext, shift, newton):
    n = psi.shape[0]
    out = np.empty(n)
    pre = np.empty(n)
    m = u_ext.shape[0]
    j = 0
    for i in range(n):
        z = i / n
        while j < m - 2 and u_ext[j + 1] <= z:
            j += 1
        w = (z - u_ext[j]) / (u_ext[j + 1] - u_ext[j])
        r = x_ext[j] + w * (x_ext[j + 1] - x_ext[j])
        if newton == 0:
            out[i] = y_ext[j] + w * (y_ext[j + 1] - y_ext[j])
            pre[i] = r
            continue
        for _ in range(6):
            f = r + a1 - shift + lam * _ev1(psi, psi_curv, r) + _ev1(phi, phi_curv, r) - z
            df = 1.0 + lam * _dv1(psi, psi_curv, r) + _dv1(phi, phi_curv, r)
            step = f / df
            r -= step
            if abs(step) < 1e-16:
                break
        pre[i] = r
        out[i] = lam * _ev1(psi, psi_curv, r) + _ev1(phi, phi_curv, r)
    return out, pre


def _np_push_graph(psi, psi_curv, phi, phi_curv, lam, a1, u_ext, x_ext, y_ext, shift, newton):
    n = psi.shape[0]
    z = np.arange(n) / n
    r = np.interp(z, u_ext, x_ext)
    if not newton:
        return np.interp(z, u_ext, y_ext), r
    for _ in range(6):
        f = r + a1 - shift + lam * _np_eval(psi, psi_curv, r) + _np_eval(phi, phi_curv, r) - z
        df = 1.0 + lam * _np_deval(psi, psi_curv, r) + _np_deval(phi, phi_curv, r)
        step = f / df
        r = r - step
        if np.max(np.abs(step)) < 1e-16:
            break
    return lam * _np_eval(psi, psi_curv, r) + _np_eval(phi, phi_curv, r), r


def push_graph(psi, psi_curv, phi, phi_curv, lam, a1):
    """Push the graph of ``psi`` forward under the centred twist map.

    Centred map: ``(x, y) -> (x + a1 + lam*y + phi(x), lam*y + phi(x))``.
    Returns ``(new_psi, preimages, monotone)`` where ``preimages[i]`` is the
    base point x with ``X(x, psi(x)) = i/n`` (mod 1). ``monotone`` is False
    when ``x -> X(x, psi(x))`` fails to be increasing on the grid, in which
    case the other outputs are undefined.
    """
    n = psi.shape[0]
    x = np.arange(n) / n
    y = lam * psi + phi
    u = x + a1 + y
    shift = math.floor(u[0])
    u = u - shift
    steps = np.diff(np.append(u, u[0] + 1.0))
    if not np.all(steps > 0.0):
        return None, None, False
    u_ext = np.concatenate((u - 1.0, u, u + 1.0))
    x_ext = np.concatenate((x - 1.0, x, x + 1.0))
    y_ext = np.concatenate((y, y, y))
    newton = 1 if (psi_curv.shape[0] or phi_curv.shape[0]) else 0
    args = (psi, psi_curv, phi, phi_curv, float(lam), float(a1), u_ext, x_ext, y_ext, float(shift), newton)
    if BACKEND == "numba":
        out, pre = _nb_push_graph(*args)
    else:
        out, pre = _np_push_graph(*args)
    return out, pre, True


# ------------------------------------------------------------ attractor


@njit
def _nb_cloud(phi, phi_curv, lam, a1, a2, xs, ys, n_iter, n_skip, nbins):
    cnt = np.zeros(nbins)
    sx = np.zeros(nbins)
    sy = np.zeros(nbins)
    for p in range(xs.shape[0]):
        x = xs[p]
        y = ys[p]
        for t in range(n_iter):
            f = _ev1(phi, phi_curv, x)
            x = x + a1 + lam * y + f
            y = a2 + lam * y + f
            if t >= n_skip:
                fr = x - math.floor(x)
                b = int(math.floor(fr * nbins + 0.5))
                off = fr - b / nbins
                b = b % nbins
                cnt[b] += 1.0
                sx[b] += off
                sy[b] += y
    return cnt, sx, sy


def _np_cloud(phi, phi_curv, lam, a1, a2, xs, ys, n_iter, n_skip, nbins):
    cnt = np.zeros(nbins)
    sx = np.zeros(nbins)
    sy = np.zeros(nbins)
    x = xs.copy()
    y = ys.copy()
    for t in range(n_iter):
        f = _np_eval(phi, phi_curv, x)
        x = x + a1 + lam * y + f
        y = a2 + lam * y + f
        if t >= n_skip:
            fr = x - np.floor(x)
            b = np.floor(fr * nbins + 0.5).astype(np.int64)
            off = fr - b / nbins
            b = b % nbins
            cnt += np.bincount(b, minlength=nbins)
            sx += np.bincount(b, weights=off, minlength=nbins)
            sy += np.bincount(b, weights=y, minlength=nbins)
    return cnt, sx, sy


def attractor_cloud(phi, phi_curv, lam, a1, a2, xs, ys, n_iter, n_skip, nbins):
    """Iterate seeds forward and accumulate kept points into node-centred bins.

    Returns per-bin ``(count, sum of x offsets from bin centre, sum of y)``.
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    ys = np.ascontiguousarray(ys, dtype=float)
    args = (phi, phi_curv, float(lam), float(a1), float(a2), xs, ys, int(n_iter), int(n_skip), int(nbins))
    if BACKEND == "numba":
        return _nb_cloud(*args)
    return _np_cloud(*args)
