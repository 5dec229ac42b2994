"""Vishik decomposition and the boundary operators of -u'' + q u on (0, l).

Kernel elements are coefficient pairs over the basis (phi_0, phi_l) of
solutions of -u'' + q u = 0 with phi_0(0) = 0, phi_0'(0) = 1 and
phi_l(l) = 0, phi_l'(l) = 1.  For u on the grid,

    u = u0 + L^{-1} g_u + h_u,   Gamma_1 u = -h_u,   Gamma_2 u = g_u,

where u0 has vanishing values and derivatives at both ends and L^{-1} is the
Dirichlet inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .grid import GridFunction, differentiate, endpoint_derivatives, integrate
from .slcore import Potential, apply_l_inverse, solve_cauchy

# one-sided stencil order for u'(0), u'(l) and the eta endpoint derivatives;
# with second order the u' error dominates the boundary terms
ENDPOINT_ACCURACY = 4


@dataclass(frozen=True)
class KernelElement:
    c0: float
    cl: float

    def evaluate(self, pot: Potential) -> GridFunction:
        t = _table(pot)
        return GridFunction(pot.grid, self.c0 * t.phi0.values + self.cl * t.phil.values)

    def __neg__(self):
        return KernelElement(-self.c0, -self.cl)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c0, self.cl])

    def to_json(self) -> str:
        return json.dumps({"c0": self.c0, "cl": self.cl})

    @classmethod
    def from_json(cls, text: str) -> "KernelElement":
        d = json.loads(text)
        return cls(float(d["c0"]), float(d["cl"]))


@dataclass(frozen=True)
class _Table:
    phi0: GridFunction
    phil: GridFunction
    eta0: GridFunction
    etal: GridFunction
    # [[eta0'(0), etal'(0)], [eta0'(l), etal'(l)]]
    D: np.ndarray
    gram: np.ndarray


def _table(pot: Potential, det_tol: float = 1e-10) -> _Table:
    t = pot._cache.get("green")
    if t is not None:
        return t
    phi0 = solve_cauchy(pot, 0.0, 0.0, 1.0)
    phil = solve_cauchy(pot, pot.grid.l, 0.0, 1.0)
    eta0 = apply_l_inverse(pot, phi0)
    etal = apply_l_inverse(pot, phil)
    h = pot.grid.h
    e00, e0l = endpoint_derivatives(eta0.values, h, ENDPOINT_ACCURACY)
    el0, ell = endpoint_derivatives(etal.values, h, ENDPOINT_ACCURACY)
    D = np.array([[e00, el0], [e0l, ell]])
    scale = np.max(np.abs(D)) ** 2
    if abs(np.linalg.det(D)) < det_tol * scale:
        raise SingularityError(
            "eta_0'(0) eta_l'(l) - eta_l'(0) eta_0'(l) vanishes; decomposition undefined"
        )
    gram = np.array([
        [integrate(phi0, phi0), integrate(phi0, phil)],
        [integrate(phil, phi0), integrate(phil, phil)],
    ])
    t = _Table(phi0, phil, eta0, etal, D, gram)
    pot._cache["green"] = t
    return t


@dataclass(frozen=True)
class VishikParts:
    u0: GridFunction
    g: KernelElement
    h: KernelElement
    l_inv_g: GridFunction
    h_values: GridFunction

    def reconstruct(self) -> GridFunction:
        return self.u0 + self.l_inv_g + self.h_values


def _coefficients(pot: Potential, u: GridFunction):
    t = _table(pot)
    v = u.values
    du0, dul = endpoint_derivatives(v, pot.grid.h, ENDPOINT_ACCURACY)
    p0, pl = t.phi0, t.phil
    c0 = v[-1] / p0.values[-1]
    cl = v[0] / pl.values[0]
    r = np.array([
        du0 - c0 * p0.deriv[0] - cl * pl.deriv[0],
        dul - c0 * p0.deriv[-1] - cl * pl.deriv[-1],
    ])
    d0, dl = np.linalg.solve(t.D, r)
    return t, KernelElement(float(c0), float(cl)), KernelElement(float(d0), float(dl))


def vishik_decompose(pot: Potential, u: GridFunction) -> VishikParts:
    t, h, g = _coefficients(pot, u)
    l_inv_g = g.c0 * t.eta0 + g.cl * t.etal
    h_vals = h.c0 * t.phi0 + h.cl * t.phil
    u0 = u - l_inv_g - h_vals
    return VishikParts(u0, g, h, l_inv_g, h_vals)


def boundary_gamma(pot: Potential, u: GridFunction) -> tuple[KernelElement, KernelElement]:
    """(Gamma_1 u, Gamma_2 u) = (-h_u, g_u)."""
    _, h, g = _coefficients(pot, u)
    return -h, g


def kernel_inner(pot: Potential, a: KernelElement, b: KernelElement) -> float:
    """L2(0, l) inner product of two kernel elements."""
    return float(a.coefficients @ _table(pot).gram @ b.coefficients)


def apply_l0_star(pot: Potential, u: GridFunction) -> GridFunction:
    """-u'' + q u by second-order differences."""
    return -differentiate(u, 2) + pot.q * u


def greens_residual(pot: Potential, u: GridFunction, v: GridFunction) -> float:
    """|(L*u, v) - (u, L*v) - [(G1 u, G2 v) - (G2 u, G1 v)]|."""
    lhs = integrate(apply_l0_star(pot, u), v) - integrate(u, apply_l0_star(pot, v))
    g1u, g2u = boundary_gamma(pot, u)
    g1v, g2v = boundary_gamma(pot, v)
    rhs = kernel_inner(pot, g1u, g2v) - kernel_inner(pot, g2u, g1v)
    return abs(lhs - rhs)
