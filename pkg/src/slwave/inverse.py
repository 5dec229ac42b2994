"""Recovery of the potential from the model coefficients (P, Q).

Pipeline: fundamental matrix M' = -M P / 2, M(0) = I; the matrix
A = M Q M^{-1} + M'' M^{-1}, whose eigenvalues at x are q(x) and q(l - x);
eigenvalue branches tracked by continuity; assembly of the two candidates
q(x) and q(l - x).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DataError, NumericError, SingularityError
from .grid import Grid, GridFunction, Matrix2Field, diff_samples, write_grid_function
from .model import ModelCoefficients


class BlowUpError(NumericError):
    code = "blow-up"

    def __init__(self, msg, last_valid: float):
        super().__init__(msg)
        self.last_valid = last_valid


def _rk4_sweep(P: np.ndarray, h: float, start: int, M0: np.ndarray, out: np.ndarray) -> None:
    """Step 2h from node ``start``, using the node in between as the midpoint."""
    Y = M0
    out[start] = Y
    H = 2.0 * h
    for i in range(start, P.shape[0] - 2, 2):
        k1 = -0.5 * Y @ P[i]
        k2 = -0.5 * (Y + 0.5 * H * k1) @ P[i + 1]
        k3 = -0.5 * (Y + 0.5 * H * k2) @ P[i + 1]
        k4 = -0.5 * (Y + H * k3) @ P[i + 2]
        Y = Y + H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 2] = Y


def fundamental_matrix(P: Matrix2Field) -> Matrix2Field:
    """Solution of M' = -M P / 2 with M(0) = I by classical RK4.

    P is known only at the nodes, so even and odd nodes are reached by two
    interleaved sweeps of step 2h.  The odd sweep starts from one step of
    size h whose midpoint value of P is interpolated near x = 0, where P is
    smooth.
    """
    Pv = P.values
    k = Pv.shape[0]
    if k < 2:
        return Matrix2Field(P.x, np.eye(2)[None].repeat(k, 0))
    h = float(P.x[1] - P.x[0])
    out = np.full((k, 2, 2), np.nan)
    with np.errstate(over="ignore", invalid="ignore"):
        _rk4_sweep(Pv, h, 0, np.eye(2), out)
        if k >= 4:
            Ph = (5.0 * Pv[0] + 15.0 * Pv[1] - 5.0 * Pv[2] + Pv[3]) / 16.0
        else:
            Ph = 0.5 * (Pv[0] + Pv[1])
        Y = np.eye(2)
        k1 = -0.5 * Y @ Pv[0]
        k2 = -0.5 * (Y + 0.5 * h * k1) @ Ph
        k3 = -0.5 * (Y + 0.5 * h * k2) @ Ph
        k4 = -0.5 * (Y + h * k3) @ Pv[1]
        _rk4_sweep(Pv, h, 1, Y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), out)
    bad = ~np.all(np.isfinite(out), axis=(1, 2))
    if np.any(bad):
        i = int(np.argmax(bad))
        last = float(P.x[i - 1]) if i > 0 else 0.0
        raise BlowUpError(f"fundamental matrix blew up after x={last:.6g}", last)
    out[0] = np.eye(2)
    return Matrix2Field(P.x, out)


def derivative_of_p(P: Matrix2Field, l: float | None = None) -> np.ndarray:
    """P' by central differences.

    P has a simple pole at l/2, so with ``l`` given the smooth product
    (l - 2x) P is differenced and P' = ((l - 2x) P)' / (l - 2x) + 2 P / (l - 2x).
    """
    h = float(P.x[1] - P.x[0])
    Pv = P.values
    if l is None:
        return diff_samples(Pv, h, 1, 2)
    w = (l - 2.0 * P.x)[:, None, None]
    return (diff_samples(w * Pv, h, 1, 2) + 2.0 * Pv) / w


def similarity_restore(M: Matrix2Field, P: Matrix2Field, Q: Matrix2Field,
                       dP: Matrix2Field | None = None, det_floor: float = 1e-10,
                       l: float | None = None) -> Matrix2Field:
    """A = M Q M^{-1} + M'' M^{-1} with M'' = M P^2 / 4 - M P' / 2.

    Written as M (Q + P^2/4 - P'/2) M^{-1} so the large terms near l/2
    cancel before the similarity is applied.  P' is differenced from P
    (see ``derivative_of_p``) unless supplied.
    """
    if not (len(M) == len(P) == len(Q)):
        raise DataError("M, P and Q must have equal length")
    Mv, Pv, Qv = M.values, P.values, Q.values
    det = np.linalg.det(Mv)
    if np.any(np.abs(det) < det_floor):
        i = int(np.argmax(np.abs(det) < det_floor))
        raise SingularityError(f"fundamental matrix is singular at x={M.x[i]:.6g}")
    if dP is None:
        dPv = derivative_of_p(P, l)
    else:
        dPv = dP.values
    B = Qv + 0.25 * Pv @ Pv - 0.5 * dPv
    A = Mv @ B @ np.linalg.inv(Mv)
    return Matrix2Field(M.x, A)


class InconsistentDataError(DataError):
    code = "complex-eigenvalues"


def eigen_branches(A: Matrix2Field, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray, dict]:
    """Closed-form eigenvalues of A(x) split into two continuous branches.

    Each node assigns its eigenvalue pair to the branches so as to stay
    closest to a linear extrapolation of the previous two nodes (the first
    step uses the previous value), i.e. the assignment with the smaller
    second difference.  Returns (b1, b2, log); at x = 0 b1 is the smaller
    eigenvalue.
    """
    Av = A.values
    tr = Av[:, 0, 0] + Av[:, 1, 1]
    det = Av[:, 0, 0] * Av[:, 1, 1] - Av[:, 0, 1] * Av[:, 1, 0]
    half = 0.5 * tr
    disc = half**2 - det
    scale = np.maximum(1.0, np.max(np.abs(Av), axis=(1, 2)) ** 2)
    if np.any(disc < -tol * scale):
        i = int(np.argmin(disc / scale))
        raise InconsistentDataError(
            f"eigenvalues of A are complex at x={A.x[i]:.6g} (discriminant {disc[i]:.3g})"
        )
    root = np.sqrt(np.maximum(disc, 0.0))
    lo, hi = half - root, half + root
    k = lo.size
    b1, b2 = np.empty(k), np.empty(k)
    b1[0], b2[0] = lo[0], hi[0]
    swaps = []
    near = []
    last_order = True
    for i in range(1, k):
        if i >= 2:
            p1, p2 = 2 * b1[i - 1] - b1[i - 2], 2 * b2[i - 1] - b2[i - 2]
        else:
            p1, p2 = b1[i - 1], b2[i - 1]
        keep = abs(lo[i] - p1) + abs(hi[i] - p2)
        swap = abs(hi[i] - p1) + abs(lo[i] - p2)
        if swap < keep:
            b1[i], b2[i] = hi[i], lo[i]
        else:
            b1[i], b2[i] = lo[i], hi[i]
        if root[i] <= 1e-6 * max(1.0, abs(half[i])):
            near.append(float(A.x[i]))
            continue
        order = b1[i] < b2[i]
        if order != last_order:
            swaps.append(float(A.x[i]))
            last_order = order
    log = {
        "crossings": swaps,
        "near_coalescence_nodes": len(near),
        "min_discriminant": float(np.min(disc)),
    }
    return b1, b2, log


@dataclass(frozen=True)
class RecoveryResult:
    q_plus: GridFunction
    q_minus: GridFunction
    x: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    delta: float
    diagnostics: dict = field(default_factory=dict)

    def candidates(self):
        return self.q_plus, self.q_minus

    def error_against(self, q: np.ndarray, mask: np.ndarray | None = None) -> float:
        """min over the two candidates of the sup-norm error, on ``mask``."""
        q = np.asarray(q, dtype=float)
        if mask is None:
            mask = np.ones(q.size, dtype=bool)
        return float(min(np.max(np.abs(c.values - q)[mask]) for c in self.candidates()))


def assemble_potential(b1: np.ndarray, b2: np.ndarray, grid: Grid, delta: float,
                       diagnostics: dict | None = None) -> RecoveryResult:
    """q_plus = b1 on [0, l/2 - delta], b2(l - x) on [l/2 + delta, l], cubic in between."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape != b2.shape:
        raise DataError("branch length mismatch")
    m, n, h = grid.mid, grid.n, grid.h
    keep = b1.size
    k = m - keep + 1
    if k < 0 or abs(k * h - delta) > 1e-9 * max(h, delta):
        raise DataError(
            f"branches of length {keep} do not cover [0, l/2 - delta] for n={n}, delta={delta}"
        )
    q = np.empty(n)
    q[:keep] = b1
    q[n - keep:] = b2[::-1]
    if k > 0:
        x = grid.nodes
        xa, xb = x[keep - 1], x[n - keep]
        sa = diff_samples(b1, h, 1, 2)[-1]
        sb = -diff_samples(b2, h, 1, 2)[-1]
        spline = CubicHermiteSpline([xa, xb], [b1[-1], b2[-1]], [sa, sb])
        q[keep : n - keep] = spline(x[keep : n - keep])
    elif keep == m + 1:
        q[m] = 0.5 * (b1[-1] + b2[-1])
    q_plus = GridFunction(grid, q)
    diag = dict(diagnostics or {})
    diag.setdefault("retained_range", [0.0, float(grid.nodes[keep - 1])])
    diag.setdefault("gap", [float(grid.nodes[keep - 1]), float(grid.nodes[n - keep])])
    return RecoveryResult(q_plus, q_plus.reflected(), grid.nodes[:keep], b1, b2, delta, diag)


def recover(mc: ModelCoefficients) -> RecoveryResult:
    """Run the whole inverse pipeline on model coefficients."""
    grid = Grid(mc.l, mc.n)
    M = fundamental_matrix(mc.P)
    A = similarity_restore(M, mc.P, mc.Q, mc.dP, l=mc.l)
    b1, b2, log = eigen_branches(A)
    # eigen-residual of the closed-form eigenvalues: |det(A - b I)|
    Av = A.values
    resid = max(
        float(np.max(np.abs(np.linalg.det(Av - b[:, None, None] * np.eye(2))))) for b in (b1, b2)
    )
    diag = {
        "eigen_residual": resid,
        "max_offdiag_A": float(np.max(np.abs(Av[:, [0, 1], [1, 0]]))),
        "derivative_of_P": "supplied" if mc.dP is not None else "central differences of (l - 2x) P",
        "branch_log": log,
        "delta": mc.delta,
    }
    return assemble_potential(b1, b2, grid, mc.delta, diag)


def write_recovery(directory, res: RecoveryResult) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_grid_function(d / "q_plus.csv", res.q_plus)
    write_grid_function(d / "q_minus.csv", res.q_minus)
    (d / "diagnostics.json").write_text(json.dumps(res.diagnostics, indent=2, sort_keys=True) + "\n")
