"""Coordinate model of -u'' + q u: gauge data, the transform T(x), the unitary
map u -> T(x) (u(x), u(l-x)) onto vector functions on [0, l/2], and the
coefficients of the transported operator -y'' + P y' + Q y.

Derivatives of T are never obtained by differencing T; they follow from the
sampled kernel solutions and their derivatives through e'' = q e.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataError, SingularityError
from .grid import (
    GridFunction,
    Matrix2Field,
    VectorGridFunction,
    diff_samples,
    integrate_samples,
    read_matrix_field,
    write_matrix_field,
)
from .slcore import Potential, kernel_basis, solve_from_node

GAUGE_CONVENTION = "e(l/2)=1, e'(l/2)=0"
BASIS_CONVENTION = "e1: (e1,e1')(0)=(1,0); e2: (e2,e2')(0)=(0,1)"


@dataclass(frozen=True)
class GaugeData:
    potential: Potential
    e: GridFunction
    e1: GridFunction
    e2: GridFunction
    rho: GridFunction

    @property
    def grid(self):
        return self.potential.grid


def build_gauge(pot: Potential) -> GaugeData:
    g = pot.grid
    u, du = solve_from_node(pot, g.mid, 1.0, 0.0)
    e = GridFunction(g, u, du)
    e1, e2 = kernel_basis(pot)
    rho = GridFunction(g, e.values**2 + e.values[::-1] ** 2)
    return GaugeData(pot, e, e1, e2, rho)


def default_delta_nodes(delta: float | None, h: float) -> int:
    """Width of the excluded zone around l/2, in grid cells (default 5)."""
    if delta is None:
        return 5
    k = int(round(delta / h))
    if k < 1 or abs(k * h - delta) > 1e-9 * max(h, delta):
        raise DataError(f"delta={delta!r} must be a positive multiple of h={h!r}")
    return k


def _half(values: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Samples at x and at l - x for the half-grid nodes 0..m."""
    return values[: m + 1], values[::-1][: m + 1]


def transform_matrix(gd: GaugeData) -> tuple[Matrix2Field, Matrix2Field, Matrix2Field]:
    """T, T' and T'' on the half-grid."""
    grid = gd.grid
    m = grid.mid
    q, qr = _half(gd.potential.values, m)
    e, er = _half(gd.e.values, m)
    de, der = _half(gd.e.deriv, m)
    a, ar = _half(gd.e1.values, m)
    da, dar = _half(gd.e1.deriv, m)
    b, br = _half(gd.e2.values, m)
    db, dbr = _half(gd.e2.deriv, m)

    E = np.stack([np.stack([a, ar], -1), np.stack([b, br], -1)], -2)
    # d/dx of f(l - x) is -f'(l - x); second derivatives via f'' = q f
    E1 = np.stack([np.stack([da, -dar], -1), np.stack([db, -dbr], -1)], -2)
    E2 = E * np.stack([q, qr], -1)[:, None, :]
    rho = e**2 + er**2
    rho1 = 2.0 * (e * de - er * der)
    rho2 = 2.0 * (de**2 + q * e**2 + der**2 + qr * er**2)

    r = rho[:, None, None]
    r1 = rho1[:, None, None]
    r2 = rho2[:, None, None]
    T = E / r
    T1 = E1 / r - r1 * E / r**2
    T2 = E2 / r - 2.0 * r1 * E1 / r**2 + E * (2.0 * r1**2 / r**3 - r2 / r**2)
    x = grid.half_nodes
    return Matrix2Field(x, T), Matrix2Field(x, T1), Matrix2Field(x, T2)


def gram_matrix(gd: GaugeData, T: Matrix2Field) -> Matrix2Field:
    rho = gd.rho.values[: len(T)]
    Tv = T.values
    G = rho[:, None, None] * Tv @ np.swapaxes(Tv, -1, -2)
    G = 0.5 * (G + np.swapaxes(G, -1, -2))
    return Matrix2Field(T.x, G, symmetric=True)


def gram_from_kernel(gd: GaugeData) -> Matrix2Field:
    """G_ij = (e_i(x) e_j(x) + e_i(l-x) e_j(l-x)) / rho(x), directly from samples."""
    m = gd.grid.mid
    a, ar = _half(gd.e1.values, m)
    b, br = _half(gd.e2.values, m)
    rho = gd.rho.values[: m + 1]
    g11 = (a * a + ar * ar) / rho
    g12 = (a * b + ar * br) / rho
    g22 = (b * b + br * br) / rho
    G = np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)
    return Matrix2Field(gd.grid.half_nodes, G, symmetric=True)


def apply_w_c(gd: GaugeData, T: Matrix2Field, u: GridFunction | np.ndarray) -> VectorGridFunction:
    """u -> T(x) (u(x), u(l-x)) on the half-grid."""
    v = np.asarray(u.values if isinstance(u, GridFunction) else u, dtype=float)
    k = len(T)
    pair = np.stack([v[:k], v[::-1][:k]], -1)
    return VectorGridFunction(T.x, np.einsum("kij,kj->ki", T.values, pair))


def hc_inner(gd: GaugeData, T: Matrix2Field, y: VectorGridFunction, z: VectorGridFunction) -> float:
    """Inner product of the coordinate space: integral over [0, l/2] of (G^+ y, z) rho.

    The pseudo-inverse makes the integrand at the degenerate node x = l/2
    equal to its limit from the left.
    """
    G = gram_matrix(gd, T).values
    Gp = np.linalg.pinv(G, rcond=1e-13, hermitian=True)
    rho = gd.rho.values[: len(T)]
    integrand = np.einsum("kij,kj,ki->k", Gp, y.values, z.values) * rho
    return integrate_samples(integrand, gd.grid.h)


def hc_norm(gd: GaugeData, T: Matrix2Field, y: VectorGridFunction) -> float:
    return float(np.sqrt(max(hc_inner(gd, T, y, y), 0.0)))


class ConditioningError(SingularityError):
    code = "ill-conditioned"


def apply_w_c_adjoint(gd: GaugeData, T: Matrix2Field, y: VectorGridFunction,
                      delta: float | None = None, max_cond: float = 1e12) -> GridFunction:
    """Inverse (= adjoint) of the coordinate map.

    Values are computed from T^{-1}(x) y(x) outside (l/2 - delta, l/2 + delta).
    Inside that zone T^{-1} is not used: the midpoint value follows from
    y(l/2) being proportional to (e1, e2)(l/2), and the remaining nodes are
    filled by a cubic spline through the neighbouring values.
    """
    grid = gd.grid
    m, n, h = grid.mid, grid.n, grid.h
    if len(y) != m + 1 or len(T) != m + 1:
        raise DataError("adjoint needs fields on the whole half-grid")
    k = default_delta_nodes(delta, h)
    keep = m - k + 1
    Tk = T.values[:keep]
    cond = np.linalg.cond(Tk)
    if np.max(cond) > max_cond:
        raise ConditioningError(
            f"T is ill-conditioned (cond {np.max(cond):.3g}) inside the retained range"
        )
    w = np.linalg.solve(Tk, y.values[:keep, :, None])[..., 0]
    u = np.full(n, np.nan)
    u[:keep] = w[:, 0]
    u[::-1][:keep] = w[:, 1]

    v = np.array([gd.e1.values[m], gd.e2.values[m]])
    u_mid = gd.rho.values[m] * float(y.values[m] @ v) / (2.0 * float(v @ v))
    u[m] = u_mid
    if k > 1:
        s = min(4, keep)
        left = np.arange(keep - s, keep)
        right = n - 1 - left[::-1]
        idx = np.concatenate([left, [m], right])
        spline = CubicSpline(grid.nodes[idx], u[idx])
        gap = np.arange(keep, n - keep)
        u[gap] = spline(grid.nodes[gap])
    return GridFunction(grid, u)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelCoefficients:
    """P and Q of the model operator on the retained range [0, l/2 - delta].

    ``dP`` carries the exact derivative of P when the coefficients were
    generated from a potential; it is ``None`` for coefficients read from
    files without it.
    """

    P: Matrix2Field
    Q: Matrix2Field
    delta: float
    l: float
    n: int
    dP: Matrix2Field | None = None

    @property
    def retained(self) -> int:
        return len(self.P)

    @property
    def h(self) -> float:
        return self.l / (self.n - 1)


def _inverse_derivatives(T, T1, T2):
    N = np.linalg.inv(T)
    N1 = -N @ T1 @ N
    N2 = -N @ T2 @ N + 2.0 * N @ T1 @ N @ T1 @ N
    return N, N1, N2


def model_coefficients(pot: Potential, gd: GaugeData, T: Matrix2Field, T1: Matrix2Field,
                       T2: Matrix2Field, delta: float | None = None,
                       det_floor: float = 1e-14) -> ModelCoefficients:
    grid = pot.grid
    m, h = grid.mid, grid.h
    k = default_delta_nodes(delta, h)
    keep = m - k + 1
    if keep < 2:
        raise DataError("excluded zone leaves no retained nodes")
    Tv, T1v, T2v = T.values[:keep], T1.values[:keep], T2.values[:keep]
    det = np.linalg.det(Tv)
    scale = np.sum(Tv**2, axis=(1, 2))
    bad = np.abs(det) < det_floor * scale
    if np.any(bad):
        i = int(np.argmax(bad))
        raise SingularityError(f"det T vanishes at x={T.x[i]:.6g} inside the retained range")
    N, N1, N2 = _inverse_derivatives(Tv, T1v, T2v)
    q = pot.values
    Qd = np.zeros((keep, 2, 2))
    Qd[:, 0, 0] = q[:keep]
    Qd[:, 1, 1] = q[::-1][:keep]
    P = -2.0 * Tv @ N1
    Q = Tv @ Qd @ N - Tv @ N2
    dP = -2.0 * (T1v @ N1 + Tv @ N2)
    x = T.x[:keep]
    return ModelCoefficients(
        Matrix2Field(x, P), Matrix2Field(x, Q), k * h, grid.l, grid.n, Matrix2Field(x, dP)
    )


def forward(pot: Potential, delta: float | None = None):
    """Gauge data, (T, T', T'') and model coefficients of a potential."""
    gd = build_gauge(pot)
    T, T1, T2 = transform_matrix(gd)
    mc = model_coefficients(pot, gd, T, T1, T2, delta)
    return gd, (T, T1, T2), mc


def apply_model_operator(mc: ModelCoefficients, y: VectorGridFunction,
                         accuracy: int = 4) -> VectorGridFunction:
    """-y'' + P y' + Q y on the retained range.

    ``y`` may extend beyond the retained range (e.g. the whole half-grid), so
    that central stencils are used up to its last node.
    """
    k = mc.retained
    if len(y) < k:
        raise DataError("vector field is shorter than the retained range")
    yv = y.values
    d1 = diff_samples(yv, mc.h, 1, accuracy)[:k]
    d2 = diff_samples(yv, mc.h, 2, accuracy)[:k]
    out = -d2 + np.einsum("kij,kj->ki", mc.P.values, d1) + np.einsum(
        "kij,kj->ki", mc.Q.values, yv[:k]
    )
    return VectorGridFunction(y.x[:k], out)


# ---------------------------------------------------------------------------
# files

def write_model(directory, mc: ModelCoefficients, extra_meta: dict | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix_field(d / "P.csv", mc.P)
    write_matrix_field(d / "Q.csv", mc.Q)
    if mc.dP is not None:
        write_matrix_field(d / "dP.csv", mc.dP)
    meta = {
        "l": mc.l,
        "n": mc.n,
        "h": mc.h,
        "delta": mc.delta,
        "retained_range": [0.0, float(mc.P.x[-1])],
        "gauge_convention": GAUGE_CONVENTION,
        "kernel_basis_convention": BASIS_CONVENTION,
        "midpoint_policy": "T^-1 unused within delta of l/2; adjoint filled by continuity",
        "has_dP": mc.dP is not None,
    }
    if extra_meta:
        meta.update(extra_meta)
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_model(directory) -> ModelCoefficients:
    d = Path(directory)
    try:
        meta = json.loads((d / "meta.json").read_text())
        l, n, delta = float(meta["l"]), int(meta["n"]), float(meta["delta"])
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read {d / 'meta.json'}: {exc}") from None
    try:
        P = read_matrix_field(d / "P.csv")
        Q = read_matrix_field(d / "Q.csv")
        dP = read_matrix_field(d / "dP.csv") if (d / "dP.csv").exists() else None
    except OSError as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if len(P) != len(Q) or not np.allclose(P.x, Q.x) or (dP is not None and len(dP) != len(P)):
        raise DataError("P, Q (and dP) must share their abscissae")
    h = l / (n - 1)
    if not np.allclose(P.x, np.arange(len(P)) * h, rtol=0, atol=1e-9 * l):
        raise DataError("P.csv abscissae do not match l and n in meta.json")
    return ModelCoefficients(P, Q, delta, l, n, dP)
