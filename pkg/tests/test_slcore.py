import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import DENSE_LAMBDA1_COS3, cauchy_reference, dense_dirichlet_eigenvalue
from slwave.checks import random_potential
from slwave.errors import DataError, NotPositiveDefinite, NumericError, ParameterError
from slwave.grid import Grid, GridFunction, write_grid_function
from slwave.slcore import (
    DegenerateFunction,
    Potential,
    apply_l_inverse,
    builtin_function,
    count_zeros,
    kernel_basis,
    load_potential,
    lowest_dirichlet_eigenvalue,
    solve_cauchy,
    wronskian,
)


def const(grid, c):
    return load_potential(f"const:{c}", grid)


@pytest.mark.parametrize("spec, x, expected", [
    ("const:2.5", 0.3, 2.5),
    ("poly:1,2,3", 2.0, 17.0),
    ("trig:1,2,3", 0.0, 3.0),
])
def test_builtin_specs(spec, x, expected):
    assert builtin_function(spec)(np.array([x]))[0] == pytest.approx(expected)


@pytest.mark.parametrize("spec", ["cosh:1", "const:", "const:1,2", "poly:", "trig:1,2", "poly:a"])
def test_bad_specs(spec):
    with pytest.raises(ParameterError):
        builtin_function(spec)


def test_load_potential_missing_file():
    with pytest.raises(ParameterError):
        load_potential("/nonexistent/q.csv")


def test_load_potential_from_csv(tmp_path, grid501):
    f = grid501.sample(lambda x: 3 + np.sin(x))
    write_grid_function(tmp_path / "q.csv", f)
    pot = load_potential(str(tmp_path / "q.csv"))
    np.testing.assert_array_equal(pot.values, f.values)
    np.testing.assert_allclose(pot.q_half, 3 + np.sin(grid501.nodes[:-1] + grid501.h / 2),
                               atol=1e-12)


def test_load_potential_bad_csv(tmp_path):
    p = tmp_path / "q.csv"
    p.write_text("x,value\n0,1\n0.3,1\n1,1\n")
    with pytest.raises(DataError):
        load_potential(str(p))


def test_not_positive_definite(grid501):
    with pytest.raises(NotPositiveDefinite):
        const(grid501, -20)


@pytest.mark.parametrize("x0, data, exact", [
    (0.0, (0.0, 1.0), lambda x: x),
    (1.0, (0.0, 1.0), lambda x: x - 1),
])
def test_cauchy_free(grid2001, x0, data, exact):
    u = solve_cauchy(const(grid2001, 0), x0, *data)
    np.testing.assert_allclose(u.values, exact(grid2001.nodes), atol=1e-12)
    np.testing.assert_allclose(u.deriv, 1.0, atol=1e-12)


def test_cauchy_sinh(grid2001):
    u = solve_cauchy(const(grid2001, 1), 0.0, 0.0, 1.0)
    assert np.max(np.abs(u.values - np.sinh(grid2001.nodes))) <= 1e-8


@pytest.mark.parametrize("x0, u0, du0", [(0.0, 1.0, -0.5), (1.0, 0.3, 2.0)])
def test_cauchy_against_reference(grid2001, pot_cos, x0, u0, du0):
    q = lambda x: 1 + np.cos(3 * x)  # noqa: E731
    ref = cauchy_reference(q, x0, u0, du0, grid2001.nodes)
    u = solve_cauchy(pot_cos, x0, u0, du0)
    assert np.max(np.abs(u.values - ref[0])) <= 1e-8
    assert np.max(np.abs(u.deriv - ref[1])) <= 1e-8


def test_cauchy_interior_point_rejected(grid501):
    with pytest.raises(ParameterError):
        solve_cauchy(const(grid501, 0), 0.5, 0, 1)


def test_cauchy_overflow():
    g = Grid(1.0, 11)
    pot = Potential.from_function(g, lambda x: np.full_like(x, 1e8), "huge")
    with pytest.raises(NumericError):
        solve_cauchy(pot, 0.0, 1.0, 1e300)


def test_cauchy_fourth_order():
    q = lambda x: 1 + np.cos(3 * x)  # noqa: E731
    errs = []
    for n in (51, 101):
        g = Grid(1.0, n)
        ref = cauchy_reference(q, 0.0, 1.0, 0.0, g.nodes)[0]
        errs.append(np.max(np.abs(solve_cauchy(Potential.from_function(g, q), 0.0, 1.0, 0.0).values - ref)))
    assert np.log2(errs[0] / errs[1]) > 3.7


@pytest.mark.parametrize("f, exact, tol", [
    (lambda x: np.ones_like(x), lambda x: x * (1 - x) / 2, 1e-8),
    (lambda x: np.sin(np.pi * x), lambda x: np.sin(np.pi * x) / np.pi**2, 1e-6),
    (lambda x: x, lambda x: (x - x**3) / 6, 1e-7),
])
def test_l_inverse_examples(grid2001, f, exact, tol):
    u = apply_l_inverse(const(grid2001, 0), grid2001.sample(f))
    assert np.max(np.abs(u.values - exact(grid2001.nodes))) <= tol


def test_l_inverse_grid_mismatch(grid501, grid2001):
    with pytest.raises(ParameterError):
        apply_l_inverse(const(grid501, 0), grid2001.sample(np.sin))


def test_lambda1_free(grid2001):
    q = GridFunction(grid2001, np.zeros(grid2001.n))
    assert abs(lowest_dirichlet_eigenvalue(q) - np.pi**2) <= 1e-3


@pytest.mark.parametrize("c, l", [(-3.0, 1.0), (5.0, 1.0), (2.0, 2.5)])
def test_lambda1_shift(c, l):
    g = Grid(l, 2001)
    q = GridFunction(g, np.full(g.n, c))
    assert abs(lowest_dirichlet_eigenvalue(q) - (np.pi**2 / l**2 + c)) <= 1e-3


def test_lambda1_dense_oracle():
    g = Grid(1.0, 401)
    q = g.sample(lambda x: np.cos(3 * x))
    assert abs(lowest_dirichlet_eigenvalue(q) - DENSE_LAMBDA1_COS3) <= 1e-6
    assert DENSE_LAMBDA1_COS3 == pytest.approx(dense_dirichlet_eigenvalue(lambda x: np.cos(3 * x), 1.0, 401), abs=1e-9)


def test_kernel_basis_free(grid2001):
    e1, e2 = kernel_basis(const(grid2001, 0))
    np.testing.assert_allclose(e1.values, 1.0, atol=1e-12)
    np.testing.assert_allclose(e2.values, grid2001.nodes, atol=1e-12)


def test_kernel_basis_cosh(grid2001):
    e1, e2 = kernel_basis(const(grid2001, 1))
    x = grid2001.nodes
    assert np.max(np.abs(e1.values - np.cosh(x))) <= 1e-8
    assert np.max(np.abs(e2.values - np.sinh(x))) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_wronskian_constant(seed):
    pot = random_potential(np.random.default_rng(seed), Grid(1.0, 501))
    e1, e2 = kernel_basis(pot)
    assert np.max(np.abs(wronskian(e1, e2) - 1)) <= 1e-8


@pytest.mark.parametrize("f, expected", [
    (lambda x: x, 1),
    (lambda x: np.sin(2 * np.pi * x), 3),
    (lambda x: 1 + x, 0),
    (lambda x: (x - 0.3) ** 2, 1),
])
def test_count_zeros_examples(grid2001, f, expected):
    assert count_zeros(grid2001.sample(f)) == expected


def test_count_zeros_degenerate(grid501):
    with pytest.raises(DegenerateFunction):
        count_zeros(GridFunction(grid501, np.zeros(grid501.n)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1), st.floats(-1, 1))
def test_kernel_elements_have_at_most_one_zero(seed, a, b):
    if abs(a) + abs(b) < 1e-3:
        return
    pot = random_potential(np.random.default_rng(seed), Grid(1.0, 501))
    e1, e2 = kernel_basis(pot)
    assert count_zeros(a * e1 + b * e2) <= 1


def test_reflected_potential(grid501):
    pot = load_potential("poly:10,1", grid501)
    r = pot.reflected()
    np.testing.assert_allclose(r.values, pot.values[::-1], atol=1e-13)
    s = Potential(pot.q).reflected()
    np.testing.assert_array_equal(s.values, pot.values[::-1])
