"""Uniform grids on [0, l], grid functions, Simpson quadrature and finite differences.

Every other module samples its objects on a :class:`Grid`.  The node count is
always odd, so the midpoint ``l/2`` is a node and the reflection ``x -> l - x``
maps nodes onto nodes (index ``i -> n - 1 - i``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .errors import ParameterError


class GridError(ParameterError):
    """Invalid grid parameters or mismatched grids."""


@dataclass(frozen=True)
class Grid:
    l: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.l) or self.l <= 0:
            raise GridError(f"interval length must be positive, got {self.l!r}")
        if int(self.n) != self.n or self.n < 3 or self.n % 2 == 0:
            raise GridError(f"node count must be an odd integer >= 3, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "l", float(self.l))

    @property
    def h(self) -> float:
        return self.l / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        # mirror the left half so that x_i + x_{n-1-i} = l and x_mid = l/2 exactly
        x = np.arange(self.n) * self.h
        m = self.mid
        x[m + 1 :] = self.l - x[:m][::-1]
        x[m] = 0.5 * self.l
        return x

    @property
    def mid(self) -> int:
        """Index of the node at l/2."""
        return (self.n - 1) // 2

    @property
    def half_nodes(self) -> np.ndarray:
        """Nodes of the half-grid [0, l/2]."""
        return self.nodes[: self.mid + 1].copy()

    def reflect(self, values: np.ndarray) -> np.ndarray:
        """Samples of ``x -> f(l - x)`` given samples of f (along axis 0)."""
        return np.asarray(values)[::-1]

    def sample(self, func) -> "GridFunction":
        return GridFunction(self, func(self.nodes))


def build_grid(l: float, n: int) -> Grid:
    return Grid(l, n)


@dataclass(frozen=True)
class GridFunction:
    """Real samples of a function at the nodes of ``grid``.

    ``deriv`` optionally carries exact (ODE-derived) first-derivative samples.
    """

    grid: Grid
    values: np.ndarray
    deriv: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise GridError(
                f"expected {self.grid.n} samples, got array of shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("grid function has non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.deriv is not None:
            d = np.array(self.deriv, dtype=float)
            if d.shape != values.shape:
                raise GridError("derivative samples do not match the grid")
            d.setflags(write=False)
            object.__setattr__(self, "deriv", d)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def at_mid(self) -> float:
        return float(self.values[self.grid.mid])

    def reflected(self) -> "GridFunction":
        d = None if self.deriv is None else -self.deriv[::-1]
        return GridFunction(self.grid, self.values[::-1], d)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _values(other, self.grid))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _values(other, self.grid))

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * _values(other, self.grid))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)


def _values(obj, grid: Grid):
    if isinstance(obj, GridFunction):
        _check_same(obj.grid, grid)
        return obj.values
    return obj


def _check_same(a: Grid, b: Grid):
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True)
class VectorGridFunction:
    """Pairs of reals sampled at abscissae ``x`` (a prefix of a half-grid)."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        v = np.array(self.values, dtype=float)
        if v.shape != (x.size, 2):
            raise GridError(f"vector field shape {v.shape} does not match {x.size} nodes")
        if not np.all(np.isfinite(v)):
            raise GridError("vector field has non-finite components")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.x.size


@dataclass(frozen=True)
class Matrix2Field:
    """A 2x2 real matrix per abscissa; ``values`` has shape (k, 2, 2)."""

    x: np.ndarray
    values: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        v = np.array(self.values, dtype=float)
        if v.shape != (x.size, 2, 2):
            raise GridError(f"matrix field shape {v.shape} does not match {x.size} nodes")
        if not np.all(np.isfinite(v)):
            raise GridError("matrix field has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.x.size

    def truncated(self, k: int) -> "Matrix2Field":
        return Matrix2Field(self.x[:k], self.values[:k], self.symmetric)

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.values)


def integrate(f: GridFunction, g: GridFunction | None = None) -> float:
    """Composite Simpson approximation of the integral of f*g over [0, l]."""
    if g is None:
        prod = f.values
    else:
        _check_same(f.grid, g.grid)
        prod = f.values * g.values
    return float(simpson(prod, dx=f.grid.h))


def integrate_samples(values: np.ndarray, h: float) -> float:
    """Simpson integral of uniformly spaced samples (any count >= 2)."""
    values = np.asarray(values, dtype=float)
    if values.size == 2:
        return float(0.5 * h * (values[0] + values[1]))
    return float(simpson(values, dx=h))


# first and second derivative stencils: (offsets, weights) for interior and
# for the first two boundary rows; weights are multiplied by 1/h^order
_STENCILS = {
    (1, 2): dict(
        interior=((-1, 1), (-0.5, 0.5)),
        edge=[((0, 1, 2), (-1.5, 2.0, -0.5))],
    ),
    (2, 2): dict(
        interior=((-1, 0, 1), (1.0, -2.0, 1.0)),
        edge=[((0, 1, 2, 3), (2.0, -5.0, 4.0, -1.0))],
    ),
    (1, 4): dict(
        interior=((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
        edge=[
            ((0, 1, 2, 3, 4), (-25 / 12, 48 / 12, -36 / 12, 16 / 12, -3 / 12)),
            ((-1, 0, 1, 2, 3), (-3 / 12, -10 / 12, 18 / 12, -6 / 12, 1 / 12)),
        ],
    ),
    (2, 4): dict(
        interior=((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
        edge=[
            ((0, 1, 2, 3, 4, 5), (45 / 12, -154 / 12, 214 / 12, -156 / 12, 61 / 12, -10 / 12)),
            ((-1, 0, 1, 2, 3, 4), (10 / 12, -15 / 12, -4 / 12, 14 / 12, -6 / 12, 1 / 12)),
        ],
    ),
}


def diff_samples(values: np.ndarray, h: float, order: int = 1, accuracy: int = 2) -> np.ndarray:
    """Finite-difference derivative along axis 0 of uniformly spaced samples.

    Central stencils inside, one-sided stencils of the same accuracy at the
    ends.  Trailing axes (vector or matrix components) are carried along.
    """
    try:
        st = _STENCILS[(order, accuracy)]
    except KeyError:
        raise ValueError(f"unsupported derivative order/accuracy: {order}/{accuracy}") from None
    f = np.asarray(values, dtype=float)
    m = f.shape[0]
    offsets, weights = st["interior"]
    r = max(abs(o) for o in offsets)
    need = max(len(w) for _, w in st["edge"]) + 1
    if m < need:
        raise GridError(f"need at least {need} samples for this stencil, got {m}")
    out = np.empty_like(f)
    inner = slice(r, m - r)
    out[inner] = sum(w * f[r + o : m - r + o] for o, w in zip(offsets, weights))
    for row, (offs, ws) in enumerate(st["edge"]):
        # left edge row `row`, right edge mirrored (odd derivatives flip sign)
        out[row] = sum(w * f[row + o] for o, w in zip(offs, ws))
        sign = -1.0 if order % 2 else 1.0
        out[m - 1 - row] = sign * sum(w * f[m - 1 - row - o] for o, w in zip(offs, ws))
    return out / h**order


def differentiate(f: GridFunction, order: int = 1, accuracy: int = 2) -> GridFunction:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return GridFunction(f.grid, diff_samples(f.values, f.grid.h, order, accuracy))


def endpoint_derivatives(values: np.ndarray, h: float, accuracy: int = 2) -> tuple[float, float]:
    """One-sided first derivatives at both ends (second or fourth order)."""
    v = np.asarray(values, dtype=float)
    offs, ws = _STENCILS[(1, accuracy)]["edge"][0]
    if v.size < len(offs):
        raise GridError(f"need at least {len(offs)} samples, got {v.size}")
    d0 = sum(w * v[o] for o, w in zip(offs, ws)) / h
    dl = -sum(w * v[-1 - o] for o, w in zip(offs, ws)) / h
    return float(d0), float(dl)


# ---------------------------------------------------------------------------
# CSV I/O

_FMT = "%.17g"


def write_grid_function(path, f: GridFunction) -> None:
    data = np.column_stack([f.grid.nodes, f.values])
    np.savetxt(Path(path), data, fmt=_FMT, delimiter=",", header="x,value", comments="")


def read_grid_function(path, grid: Grid | None = None) -> GridFunction:
    data = _read_csv(path, ["x", "value"])
    x = data[:, 0]
    if grid is None:
        if x.size < 3:
            raise GridError(f"{path}: too few rows")
        grid = Grid(float(x[-1] - x[0]), x.size)
    if x.size != grid.n or abs(x[0]) > 1e-12 * grid.l or not np.allclose(
        x, grid.nodes, rtol=0, atol=1e-9 * grid.l
    ):
        raise GridError(f"{path}: abscissae do not form the expected uniform grid")
    return GridFunction(grid, data[:, 1])


def write_matrix_field(path, m: Matrix2Field) -> None:
    data = np.column_stack([m.x, m.values.reshape(-1, 4)])
    np.savetxt(
        Path(path), data, fmt=_FMT, delimiter=",", header="x,m11,m12,m21,m22", comments=""
    )


def read_matrix_field(path) -> Matrix2Field:
    data = _read_csv(path, ["x", "m11", "m12", "m21", "m22"])
    return Matrix2Field(data[:, 0], data[:, 1:].reshape(-1, 2, 2))


def _read_csv(path, columns: list[str]) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if [c.strip() for c in header.split(",")] != columns:
        raise GridError(f"{path}: expected header {','.join(columns)!r}, got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(columns):
        raise GridError(f"{path}: expected {len(columns)} columns")
    return data
