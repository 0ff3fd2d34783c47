"""1-periodic real functions sampled on a uniform grid."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels

INTERP_RULES = ("linear", "cubic")
DEFAULT_N = 4096


@dataclass(frozen=True, eq=False)
class PeriodicFn:
    """Samples ``values[i] = f(i/n)`` of a 1-periodic function.

    ``interp`` selects piecewise-linear (default) or periodic cubic spline
    evaluation between nodes. Instances are immutable.
    """

    values: np.ndarray
    interp: str = "linear"
    _curv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if vals.shape[0] < 16:
            raise ValueError(f"grid size n={vals.shape[0]} below the minimum of 16")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if self.interp not in INTERP_RULES:
            raise ValueError(f"interp must be one of {INTERP_RULES}, got {self.interp!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        curv = kernels.spline_curvature(vals) if self.interp == "cubic" else kernels.NO_CURV
        object.__setattr__(self, "_curv", curv)

    @classmethod
    def from_function(cls, func, n: int = DEFAULT_N, interp: str = "linear") -> "PeriodicFn":
        return cls(np.asarray(func(grid(n)), dtype=float) * np.ones(n), interp)

    @classmethod
    def constant(cls, c: float, n: int = DEFAULT_N, interp: str = "linear") -> "PeriodicFn":
        return cls(np.full(n, float(c)), interp)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def curv(self) -> np.ndarray:
        return self._curv

    @property
    def x(self) -> np.ndarray:
        return grid(self.n)

    def __call__(self, x):
        return eval_fn(self, x)

    def with_values(self, values) -> "PeriodicFn":
        return PeriodicFn(values, self.interp)

    def shifted(self, c: float) -> "PeriodicFn":
        return PeriodicFn(self.values + c, self.interp)

    def slope(self, x):
        """Derivative of the interpolant (one-sided from the right at nodes for linear)."""
        arr = np.asarray(x, dtype=float)
        out = kernels.deval_periodic(self.values, self._curv, np.atleast_1d(arr).ravel())
        return out.reshape(arr.shape) if arr.shape else float(out[0])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path_or_buf=None) -> str:
        buf = io.StringIO()
        buf.write("x,value\n")
        for xi, vi in zip(self.x, self.values):
            buf.write(f"{float(xi)!r},{float(vi)!r}\n")
        text = buf.getvalue()
        if path_or_buf is not None:
            with open(path_or_buf, "w", newline="\n") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path, interp: str = "linear") -> "PeriodicFn":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
            raise ValueError(f"{path}: expected header 'x,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        n = data.shape[0]
        if n < 16 or np.max(np.abs(data[:, 0] - grid(n))) > 1e-9:
            raise ValueError(f"{path}: x column must be the uniform grid i/n")
        return cls(data[:, 1], interp)


def grid(n: int) -> np.ndarray:
    return np.arange(n) / n


def eval_fn(f: PeriodicFn, x):
    """Evaluate the periodic interpolant at any real ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    out = kernels.eval_periodic(f.values, f.curv, np.atleast_1d(arr).ravel())
    return out.reshape(arr.shape) if arr.shape else float(out[0])


def mean(f: PeriodicFn) -> float:
    """Mean over one period (rectangle rule, exact trapezoid for periodic data)."""
    return float(np.mean(f.values))


def lip_seminorm(f: PeriodicFn) -> float:
    """Largest adjacent-node difference quotient, wrap-around included."""
    d = np.diff(np.append(f.values, f.values[0]))
    return float(np.max(np.abs(d)) * f.n)


def holder_seminorm(f: PeriodicFn, eps: float) -> float:
    """Full C^(1-eps) norm: sup norm plus the Hoelder quotient sup.

    Pairs at every periodic distance m/n (m <= n/2) when n <= 1024, dyadic
    distances otherwise.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n = f.n
    v = f.values
    if n <= 1024:
        shifts = range(1, n // 2 + 1)
    else:
        shifts = [1 << k for k in range(int(np.log2(n // 2)) + 1)]
    best = 0.0
    for m in shifts:
        q = np.max(np.abs(np.roll(v, -m) - v)) / (m / n) ** (1.0 - eps)
        best = max(best, float(q))
    return f.sup_norm() + best


def derivative(f: PeriodicFn) -> PeriodicFn:
    """Central differences at the nodes, returned with the same interp rule."""
    v = f.values
    d = (np.roll(v, -1) - np.roll(v, 1)) * (f.n / 2.0)
    return PeriodicFn(d, f.interp)


def c1_norm(f: PeriodicFn) -> float:
    """max(sup|f|, sup|f'|) with f' from central differences."""
    return max(f.sup_norm(), derivative(f).sup_norm())


def standard_phi(kappa: float, n: int = DEFAULT_N, interp: str = "cubic") -> PeriodicFn:
    """Dissipative standard-map forcing (kappa / 2 pi) sin(2 pi x)."""
    return PeriodicFn.from_function(lambda x: kappa / (2 * np.pi) * np.sin(2 * np.pi * x), n, interp)
