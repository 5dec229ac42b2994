import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import VISHIK_X2
from slwave import green
from slwave.checks import TrigPolynomial, observed_orders, random_trig
from slwave.errors import SingularityError
from slwave.grid import Grid, endpoint_derivatives
from slwave.slcore import kernel_basis, load_potential, solve_cauchy


def free(grid):
    return load_potential("const:0", grid)


def traces(u):
    d0, dl = endpoint_derivatives(u.values, u.grid.h, green.ENDPOINT_ACCURACY)
    return np.array([u.values[0], u.values[-1], d0, dl])


def test_kernel_element_json_and_eval(grid501):
    k = green.KernelElement(0.25, -1.5)
    assert green.KernelElement.from_json(k.to_json()) == k
    assert -k == green.KernelElement(-0.25, 1.5)
    v = k.evaluate(free(grid501)).values
    np.testing.assert_allclose(v, 0.25 * grid501.nodes - 1.5 * (grid501.nodes - 1), atol=1e-12)


def test_vishik_x_squared(grid2001):
    u = grid2001.sample(lambda x: x**2)
    parts = green.vishik_decompose(free(grid2001), u)
    np.testing.assert_allclose(parts.h.coefficients, VISHIK_X2["h"], atol=1e-12)
    np.testing.assert_allclose(parts.g.coefficients, VISHIK_X2["g"], atol=1e-6)
    assert (u - parts.reconstruct()).sup() <= 1e-6
    assert np.max(np.abs(traces(parts.u0))) <= 1e-6


def test_vishik_kernel_element(grid2001):
    pot = free(grid2001)
    e1, _ = kernel_basis(pot)
    parts = green.vishik_decompose(pot, e1)
    assert parts.u0.sup() <= 1e-10
    np.testing.assert_allclose(parts.g.coefficients, 0, atol=1e-8)
    # u = 1 = x/l - (x - l)/l
    np.testing.assert_allclose(parts.h.coefficients, [1.0, -1.0], atol=1e-12)


@pytest.mark.parametrize("spec", ["const:0", "trig:1,1,3", "poly:10,1"])
def test_vishik_domain_element(grid2001, spec):
    pot = load_potential(spec, grid2001)
    u = grid2001.sample(lambda x: x**2 * (1 - x) ** 2)
    parts = green.vishik_decompose(pot, u)
    assert (parts.u0 - u).sup() <= 1e-8
    np.testing.assert_allclose(parts.g.coefficients, 0, atol=1e-8)
    np.testing.assert_allclose(parts.h.coefficients, 0, atol=1e-12)
    g1, g2 = green.boundary_gamma(pot, u)
    np.testing.assert_allclose(np.r_[g1.coefficients, g2.coefficients], 0, atol=1e-8)


def test_gamma1_of_one(grid2001):
    pot = free(grid2001)
    u = grid2001.sample(np.ones_like)
    g1, g2 = green.boundary_gamma(pot, u)
    np.testing.assert_allclose(g1.coefficients, [-1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(g1.evaluate(pot).values, -1.0, atol=1e-12)
    np.testing.assert_allclose(g2.coefficients, 0, atol=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_gamma2_vanishes_on_kernel(a, b):
    pot = load_potential("trig:1,1,3", Grid(1.0, 501))
    u = a * solve_cauchy(pot, 0.0, 0.0, 1.0) + b * solve_cauchy(pot, 1.0, 0.0, 1.0)
    _, g2 = green.boundary_gamma(pot, u)
    assert np.max(np.abs(g2.coefficients)) <= 1e-6 * (1 + abs(a) + abs(b))


def test_vishik_random_smooth(pot_cos):
    rng = np.random.default_rng(21)
    for _ in range(5):
        u = random_trig(rng, pot_cos.grid)
        parts = green.vishik_decompose(pot_cos, u)
        assert (u - parts.reconstruct()).sup() <= 1e-12 * u.sup()
        assert np.max(np.abs(traces(parts.u0))) <= 1e-5


def test_gamma_matches_parts(pot_cos):
    u = random_trig(np.random.default_rng(3), pot_cos.grid)
    parts = green.vishik_decompose(pot_cos, u)
    g1, g2 = green.boundary_gamma(pot_cos, u)
    assert g1 == -parts.h and g2 == parts.g


def test_kernel_inner_free(grid2001):
    pot = free(grid2001)
    a, b = green.KernelElement(1, 0), green.KernelElement(0, 1)
    # phi_0 = x, phi_l = x - 1
    assert green.kernel_inner(pot, a, a) == pytest.approx(1 / 3, abs=1e-12)
    assert green.kernel_inner(pot, a, b) == pytest.approx(-1 / 6, abs=1e-12)
    assert green.kernel_inner(pot, b, b) == pytest.approx(1 / 3, abs=1e-12)


@pytest.mark.parametrize("u, v", [
    (lambda x: x**2 * (1 - x) ** 2, lambda x: np.sin(np.pi * x) ** 2 * x**3),
    (np.ones_like, lambda x: x),
])
def test_greens_formula_examples(grid2001, u, v):
    pot = free(grid2001)
    assert green.greens_residual(pot, grid2001.sample(u), grid2001.sample(v)) <= 1e-6


def test_greens_formula_random_pairs(pot_cos):
    rng = np.random.default_rng(5)
    worst = max(
        green.greens_residual(pot_cos, random_trig(rng, pot_cos.grid), random_trig(rng, pot_cos.grid))
        for _ in range(20)
    )
    assert worst <= 1e-4


def test_greens_formula_second_order():
    fu = TrigPolynomial.random(np.random.default_rng(8), 1.0)
    fv = TrigPolynomial.random(np.random.default_rng(9), 1.0)
    errs = []
    for n in (251, 501, 1001):
        g = Grid(1.0, n)
        pot = load_potential("trig:1,1,3", g)
        errs.append(green.greens_residual(pot, fu.on(g), fv.on(g)))
    assert min(observed_orders(errs)) >= 1.5


def test_singular_decomposition(grid501):
    pot = free(grid501)
    with pytest.raises(SingularityError):
        green._table(pot, det_tol=1e3)
