"""Leapfrog simulation of u_tt - u_xx + q u = g on (0, l) from rest.

Two problems share one scheme: boundary control (Dirichlet data f0, fl at
x = 0 and x = l, no source) and the source problem (homogeneous Dirichlet
data, right-hand side g).  Also support diagnostics for the states.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ParameterError
from .grid import Grid, GridFunction
from .slcore import Potential

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class BoundaryControl:
    """Control samples f0[k], fl[k] at t_k = k * dt."""

    dt: float
    f0: np.ndarray
    fl: np.ndarray

    def __post_init__(self):
        f0 = np.array(self.f0, dtype=float)
        fl = np.array(self.fl, dtype=float)
        if f0.shape != fl.shape or f0.ndim != 1 or f0.size < 3:
            raise ParameterError("controls need equal-length sample sequences (>= 3 samples)")
        if self.dt <= 0:
            raise ParameterError("time step must be positive")
        if not (np.all(np.isfinite(f0)) and np.all(np.isfinite(fl))):
            raise DataError("controls have non-finite samples")
        scale = max(np.max(np.abs(f0)), np.max(np.abs(fl)), 1e-300)
        if np.max(np.abs(np.concatenate([f0[:3], fl[:3]]))) > 1e-12 * scale:
            raise ParameterError("controls must vanish near t = 0 (first three samples zero)")
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "fl", fl)

    @classmethod
    def from_functions(cls, f0, fl, dt: float, steps: int) -> "BoundaryControl":
        t = np.arange(steps + 1) * dt
        zero = lambda s: np.zeros_like(s)  # noqa: E731
        return cls(dt, (f0 or zero)(t), (fl or zero)(t))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.f0.size) * self.dt

    def scaled(self, a: float) -> "BoundaryControl":
        return BoundaryControl(self.dt, a * self.f0, a * self.fl)

    def __add__(self, other: "BoundaryControl") -> "BoundaryControl":
        if other.dt != self.dt or other.f0.size != self.f0.size:
            raise ParameterError("controls live on different time grids")
        return BoundaryControl(self.dt, self.f0 + other.f0, self.fl + other.fl)


def smooth_bump(t0: float, t1: float, amplitude: float = 1.0):
    """C-infinity bump supported in [t0, t1]."""
    def f(t):
        t = np.asarray(t, dtype=float)
        s = (t - t0) / (t1 - t0)
        out = np.zeros_like(t)
        inside = (s > 0) & (s < 1)
        si = s[inside]
        out[inside] = amplitude * np.exp(4.0 - 1.0 / (si * (1.0 - si)))
        return out
    return f


@dataclass(frozen=True)
class WaveField:
    grid: Grid
    dt: float
    u: np.ndarray  # shape (steps + 1, n)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.u.shape[0]) * self.dt

    def index(self, t: float) -> int:
        k = int(round(t / self.dt))
        if k < 0 or k >= self.u.shape[0] or abs(k * self.dt - t) > _TIME_TOL * max(1.0, t):
            raise ParameterError(f"t={t!r} is not on the simulation time grid")
        return k

    def slice(self, t: float) -> GridFunction:
        return GridFunction(self.grid, self.u[self.index(t)])


def _time_grid(grid: Grid, T: float, cfl: float) -> tuple[float, int]:
    if not 0 < cfl <= 1:
        raise ParameterError(f"CFL number must lie in (0, 1], got {cfl!r}")
    dt = cfl * grid.h
    steps = int(round(T / dt))
    if T < 0 or abs(steps * dt - T) > _TIME_TOL * max(1.0, T):
        raise ParameterError(f"duration T={T!r} is not a multiple of dt={dt!r}")
    return dt, steps


def _leapfrog(pot: Potential, dt: float, steps: int, left, right, source) -> np.ndarray:
    grid = pot.grid
    q = pot.values
    r2 = (dt / grid.h) ** 2
    u = np.zeros((steps + 1, grid.n))
    if steps == 0:
        return u
    # Taylor start from rest: u(dt) = dt^2/2 * g(., 0) inside
    if source is not None:
        u[1, 1:-1] = 0.5 * dt**2 * source(0)[1:-1]
    u[1, 0], u[1, -1] = left(1), right(1)
    dt2q = dt**2 * q[1:-1]
    for k in range(1, steps):
        prev, cur = u[k - 1], u[k]
        nxt = u[k + 1]
        nxt[1:-1] = (2.0 * cur[1:-1] - prev[1:-1] + r2 * (cur[2:] - 2.0 * cur[1:-1] + cur[:-2])
                     - dt2q * cur[1:-1])
        if source is not None:
            nxt[1:-1] += dt**2 * source(k)[1:-1]
        nxt[0], nxt[-1] = left(k + 1), right(k + 1)
    return u


def simulate_boundary_control(pot: Potential, c: BoundaryControl, T: float,
                              cfl: float = 0.95) -> WaveField:
    dt, steps = _time_grid(pot.grid, T, cfl)
    if abs(c.dt - dt) > 1e-12 * dt:
        raise ParameterError(f"control time step {c.dt!r} differs from dt={dt!r}")
    if c.f0.size < steps + 1:
        raise ParameterError(f"controls cover {c.f0.size} samples, need {steps + 1}")
    u = _leapfrog(pot, dt, steps, c.f0.__getitem__, c.fl.__getitem__, None)
    return WaveField(pot.grid, dt, u)


def simulate_with_source(pot: Potential, g, T: float, cfl: float = 0.95) -> WaveField:
    """Zero Dirichlet data, source ``g``: an array (steps + 1, n) or a callable g(x, t).

    Smoothness of the source is not checked.
    """
    grid = pot.grid
    dt, steps = _time_grid(grid, T, cfl)
    if callable(g):
        x = grid.nodes
        src = lambda k: np.asarray(g(x, k * dt), dtype=float) * np.ones(grid.n)  # noqa: E731
    else:
        arr = np.asarray(g, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != grid.n or arr.shape[0] < steps + 1:
            raise ParameterError(f"source samples must have shape ({steps + 1}, {grid.n})")
        if not np.all(np.isfinite(arr)):
            raise DataError("source has non-finite samples")
        src = arr.__getitem__
    zero = lambda k: 0.0  # noqa: E731
    u = _leapfrog(pot, dt, steps, zero, zero, src)
    return WaveField(grid, dt, u)


def support_bounds(w: WaveField, t: float, threshold: float = 1e-8) -> list[tuple[float, float]]:
    """Node intervals [x_a, x_b] outside of which |u(., t)| < threshold * max |u(., t)|."""
    if not 0 < threshold < 1:
        raise ParameterError("threshold must lie in (0, 1)")
    v = np.abs(w.u[w.index(t)])
    top = v.max()
    if top == 0:
        return []
    on = v >= threshold * top
    x = w.grid.nodes
    edges = np.flatnonzero(np.diff(np.concatenate([[0], on.astype(np.int8), [0]])))
    return [(float(x[a]), float(x[b - 1])) for a, b in zip(edges[::2], edges[1::2])]


def leakage_fraction(w: WaveField, t: float, margin: float | None = None) -> float:
    """Share of the L2 energy of u(., t) outside [0, t + margin) U (l - t - margin, l]."""
    grid = w.grid
    if margin is None:
        margin = 2 * grid.h
    v = w.u[w.index(t)] ** 2
    total = v.sum()
    if total == 0:
        return 0.0
    x = grid.nodes
    outside = (x >= t + margin) & (x <= grid.l - t - margin)
    return float(v[outside].sum() / total)


# ---------------------------------------------------------------------------
# files

def read_controls(path, dt: float | None = None) -> BoundaryControl:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if [c.strip() for c in header.split(",")] != ["t", "f0", "fl"]:
        raise DataError(f"{path}: expected header 't,f0,fl'")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    step = t[1] - t[0] if t.size > 1 else 0.0
    if t.size < 3 or abs(t[0]) > 1e-12 or not np.allclose(np.diff(t), step, rtol=1e-9, atol=0):
        raise DataError(f"{path}: times must be uniform and start at 0")
    if dt is not None and abs(step - dt) > 1e-9 * dt:
        raise ParameterError(f"{path}: control time step {step!r} differs from dt={dt!r}")
    return BoundaryControl(dt if dt is not None else step, data[:, 1], data[:, 2])


def write_controls(path, c: BoundaryControl) -> None:
    data = np.column_stack([c.times, c.f0, c.fl])
    np.savetxt(Path(path), data, fmt="%.17g", delimiter=",", header="t,f0,fl", comments="")


def write_snapshot(path, w: WaveField, t: float) -> None:
    f = w.slice(t)
    data = np.column_stack([f.grid.nodes, f.values])
    np.savetxt(Path(path), data, fmt="%.17g", delimiter=",", header="x,u", comments="")


_MAGIC = b"SLWF1"


def dump_field(path, w: WaveField) -> None:
    """Binary dump: magic, uint64 rows and columns, then float64 samples (little-endian)."""
    rows, cols = w.u.shape
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(np.ascontiguousarray(w.u, dtype="<f8").tobytes())


def load_field(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:5] != _MAGIC:
        raise DataError(f"{path}: not a wave-field dump")
    rows, cols = struct.unpack("<QQ", raw[5:21])
    data = np.frombuffer(raw[21:], dtype="<f8")
    if data.size != rows * cols:
        raise DataError(f"{path}: truncated dump")
    return data.reshape(rows, cols).copy()
