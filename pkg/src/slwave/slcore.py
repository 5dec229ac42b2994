"""Potentials and the one-dimensional solvers for -u'' + q u.

Cauchy problems are integrated with classical RK4 at the grid spacing, which
needs q at cell midpoints: built-in potentials are evaluated there exactly,
sampled potentials are interpolated with a four-point cubic stencil.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import DataError, NotPositiveDefinite, NumericError, ParameterError
from .grid import Grid, GridFunction, read_grid_function


def _midpoint_samples(values: np.ndarray) -> np.ndarray:
    """Cubic interpolation of f at x_i + h/2, i = 0..n-2."""
    f = np.asarray(values, dtype=float)
    out = np.empty(f.size - 1)
    out[1:-1] = (-f[:-3] + 9.0 * f[1:-2] + 9.0 * f[2:-1] - f[3:]) / 16.0
    out[0] = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
    out[-1] = (5.0 * f[-1] + 15.0 * f[-2] - 5.0 * f[-3] + f[-4]) / 16.0
    return out


class Potential:
    """A potential q sampled on a grid, checked to give a positive-definite operator.

    Construction computes the lowest Dirichlet eigenvalue and refuses
    potentials for which it is not positive.
    """

    def __init__(self, q: GridFunction, q_half: np.ndarray | None = None, label: str = "samples",
                 func=None):
        self.q = q
        self.grid = q.grid
        self.label = label
        self.func = func
        if q_half is None:
            q_half = _midpoint_samples(q.values) if q.grid.n >= 5 else np.interp(
                q.grid.nodes[:-1] + 0.5 * q.grid.h, q.grid.nodes, q.values)
        self.q_half = np.asarray(q_half, dtype=float)
        self.lambda1 = lowest_dirichlet_eigenvalue(q)
        if not self.lambda1 > 0:
            raise NotPositiveDefinite(
                f"potential {label!r} is not positive definite (lowest Dirichlet eigenvalue "
                f"{self.lambda1:.6g})"
            )
        self._cache: dict = {}

    @classmethod
    def from_function(cls, grid: Grid, func, label: str = "function") -> "Potential":
        x = grid.nodes
        q = GridFunction(grid, np.broadcast_to(func(x), x.shape))
        q_half = np.broadcast_to(func(x[:-1] + 0.5 * grid.h), (grid.n - 1,))
        return cls(q, q_half, label, func)

    @property
    def values(self) -> np.ndarray:
        return self.q.values

    def reflected(self) -> "Potential":
        """The potential x -> q(l - x)."""
        l = self.grid.l
        if self.func is not None:
            f = self.func
            return Potential.from_function(self.grid, lambda x: f(l - x), f"reflect({self.label})")
        return Potential(self.q.reflected(), self.q_half[::-1], f"reflect({self.label})")


_BUILTIN = re.compile(r"^(const|poly|trig):(.*)$")


def builtin_function(spec: str):
    """Callable for ``const:c``, ``poly:a0,a1,...`` or ``trig:a,b,k`` (a + b cos(kx))."""
    m = _BUILTIN.match(spec.strip())
    if not m:
        raise ParameterError(f"unrecognized potential spec {spec!r}")
    kind, args = m.groups()
    try:
        coef = [float(a) for a in args.split(",")] if args.strip() else []
    except ValueError:
        raise ParameterError(f"bad coefficients in potential spec {spec!r}") from None
    if kind == "const":
        if len(coef) != 1:
            raise ParameterError("const: takes exactly one value")
        c = coef[0]
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if kind == "poly":
        if not coef:
            raise ParameterError("poly: needs at least one coefficient")
        return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coef)
    if len(coef) != 3:
        raise ParameterError("trig: takes a,b,k")
    a, b, k = coef
    return lambda x: a + b * np.cos(k * np.asarray(x, dtype=float))


def load_potential(spec: str, grid: Grid | None = None, l: float = 1.0, n: int = 2001) -> Potential:
    """Build a Potential from a built-in spec string or a ``x,value`` CSV path."""
    if _BUILTIN.match(spec.strip()):
        grid = grid or Grid(l, n)
        return Potential.from_function(grid, builtin_function(spec), spec)
    path = Path(spec)
    if not path.exists():
        raise ParameterError(f"potential {spec!r} is neither a built-in spec nor a file")
    try:
        q = read_grid_function(path, grid)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    return Potential(q, label=str(path))


# ---------------------------------------------------------------------------
# Cauchy problems

def _sweep(pot: Potential, start: int, y0: np.ndarray, step: int) -> np.ndarray:
    """RK4 for (u, u')' = (u', q u) from node ``start`` in direction ``step``.

    ``y0`` has shape (2, k) for k simultaneous solutions; returns an array of
    shape (count, 2, k) ordered along the sweep.
    """
    n = pot.grid.n
    h = pot.grid.h * step
    q, qh = pot.q.values, pot.q_half
    stop = n - 1 if step > 0 else 0
    count = abs(stop - start) + 1
    out = np.empty((count,) + y0.shape)
    y = np.array(y0, dtype=float)
    out[0] = y
    i = start
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, count):
            j = i + step
            qa, qm, qb = q[i], qh[min(i, j)], q[j]
            k1u, k1v = y[1], qa * y[0]
            u2, v2 = y[0] + 0.5 * h * k1u, y[1] + 0.5 * h * k1v
            k2u, k2v = v2, qm * u2
            u3, v3 = y[0] + 0.5 * h * k2u, y[1] + 0.5 * h * k2v
            k3u, k3v = v3, qm * u3
            u4, v4 = y[0] + h * k3u, y[1] + h * k3v
            k4u, k4v = v4, qb * u4
            y = np.array([
                y[0] + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u),
                y[1] + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v),
            ])
            out[k] = y
            i = j
    if not np.all(np.isfinite(out)):
        raise NumericError("Cauchy solution overflowed")
    return out


def solve_from_node(pot: Potential, node: int, u0, du0) -> tuple[np.ndarray, np.ndarray]:
    """Solutions of -u''+qu=0 with data (u0, du0) at an arbitrary node index.

    ``u0``/``du0`` may be arrays (several solutions at once); returns
    (values, derivatives) with the node axis first.
    """
    n = pot.grid.n
    y0 = np.array([np.atleast_1d(u0), np.atleast_1d(du0)], dtype=float)
    vals = np.empty((n, 2, y0.shape[1]))
    vals[node] = y0
    if node < n - 1:
        vals[node:] = _sweep(pot, node, y0, +1)
    if node > 0:
        vals[: node + 1] = _sweep(pot, node, y0, -1)[::-1]
    u, du = vals[:, 0, :], vals[:, 1, :]
    if np.ndim(u0) == 0 and np.ndim(du0) == 0:
        return u[:, 0], du[:, 0]
    return u, du


def solve_cauchy(pot: Potential, x0: float, u0: float, du0: float) -> GridFunction:
    """Solution of -u'' + q u = 0 with u(x0) = u0, u'(x0) = du0, x0 in {0, l}."""
    g = pot.grid
    if x0 == 0:
        node = 0
    elif abs(x0 - g.l) <= 1e-12 * g.l:
        node = g.n - 1
    else:
        raise ParameterError(f"Cauchy data must be posed at 0 or l, got x0={x0!r}")
    u, du = solve_from_node(pot, node, u0, du0)
    return GridFunction(g, u, du)


def kernel_basis(pot: Potential) -> tuple[GridFunction, GridFunction]:
    """e1, e2 with Cauchy data (1, 0) and (0, 1) at x = 0."""
    if "kernel_basis" not in pot._cache:
        u, du = solve_from_node(pot, 0, [1.0, 0.0], [0.0, 1.0])
        g = pot.grid
        pot._cache["kernel_basis"] = (
            GridFunction(g, u[:, 0], du[:, 0]),
            GridFunction(g, u[:, 1], du[:, 1]),
        )
    return pot._cache["kernel_basis"]


def wronskian(a: GridFunction, b: GridFunction) -> np.ndarray:
    return a.values * b.deriv - a.deriv * b.values


# ---------------------------------------------------------------------------
# Dirichlet problem

def _dirichlet_bands(q: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    h2 = q.grid.h ** 2
    diag = 2.0 / h2 + q.values[1:-1]
    off = np.full(q.grid.n - 3, -1.0 / h2)
    return diag, off


def lowest_dirichlet_eigenvalue(q: GridFunction) -> float:
    """Smallest eigenvalue of the 3-point Dirichlet discretization of -d^2/dx^2 + q."""
    diag, off = _dirichlet_bands(q)
    w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0),
                         lapack_driver="stebz")
    return float(w[0])


def apply_l_inverse(pot: Potential, f: GridFunction) -> GridFunction:
    """Solve -u'' + q u = f, u(0) = u(l) = 0 by the 3-point scheme."""
    if f.grid != pot.grid:
        raise ParameterError("right-hand side lives on a different grid")
    diag, off = _dirichlet_bands(pot.q)
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    try:
        inner = solve_banded((1, 1), ab, f.values[1:-1])
    except np.linalg.LinAlgError as exc:  # excluded by lambda1 > 0
        raise NumericError(f"singular Dirichlet system: {exc}") from None
    u = np.zeros(pot.grid.n)
    u[1:-1] = inner
    return GridFunction(pot.grid, u)


# ---------------------------------------------------------------------------

class DegenerateFunction(DataError):
    code = "degenerate"


def count_zeros(u: GridFunction | np.ndarray, rel_threshold: float = 1e-12) -> int:
    """Zeros of sampled u on [0, l]: runs of (near-)zero nodes plus sign changes."""
    v = np.asarray(u.values if isinstance(u, GridFunction) else u, dtype=float)
    scale = np.max(np.abs(v))
    if scale == 0:
        raise DegenerateFunction("function vanishes identically")
    s = np.sign(v)
    s[np.abs(v) <= rel_threshold * scale] = 0
    zero = s == 0
    runs = int(np.count_nonzero(zero[1:] & ~zero[:-1]) + zero[0])
    flips = int(np.count_nonzero(s[1:] * s[:-1] < 0))
    return runs + flips
