import numpy as np
import pytest

from oracles import free_P, free_Q, free_T
from slwave import model
from slwave.checks import TrigPolynomial, random_trig
from slwave.errors import DataError, SingularityError
from slwave.grid import Grid, VectorGridFunction, integrate
from slwave.slcore import load_potential


@pytest.fixture(scope="module")
def free_forward():
    pot = load_potential("const:0", Grid(1.0, 2001))
    return pot, model.forward(pot)


@pytest.fixture(scope="module")
def cos_forward():
    pot = load_potential("trig:1,1,3", Grid(1.0, 2001))
    return pot, model.forward(pot)


def test_gauge_free(free_forward):
    _, (gd, _, _) = free_forward
    np.testing.assert_allclose(gd.e.values, 1.0, atol=1e-12)
    np.testing.assert_allclose(gd.rho.values, 2.0, atol=1e-12)


def test_gauge_cosh(grid2001):
    gd = model.build_gauge(load_potential("const:1", grid2001))
    x = grid2001.nodes
    assert np.max(np.abs(gd.e.values - np.cosh(x - 0.5))) <= 1e-8
    assert np.max(np.abs(gd.rho.values - 2 * np.cosh(x - 0.5) ** 2)) <= 1e-8
    assert gd.e.values[grid2001.mid] == 1.0 and gd.e.deriv[grid2001.mid] == 0.0


def test_free_transform(free_forward):
    _, (_, (T, T1, T2), _) = free_forward
    np.testing.assert_allclose(T.values, free_T(T.x), atol=1e-12)
    np.testing.assert_allclose(T1.values, np.broadcast_to([[0, 0], [0.5, -0.5]], T1.values.shape), atol=1e-12)
    np.testing.assert_allclose(T2.values, 0, atol=1e-12)
    assert abs(T.det[-1]) <= 1e-12


def test_transform_degenerates_at_midpoint(cos_forward):
    _, (_, (T, _, _), _) = cos_forward
    assert abs(T.det[-1]) <= 1e-10 * np.max(np.abs(T.values[-1])) ** 2
    assert np.all(np.abs(T.det[:-1]) > 0)


def test_transform_derivatives_against_differences(cos_forward):
    pot, (_, (T, T1, T2), _) = cos_forward
    h = pot.grid.h
    d1 = np.gradient(T.values, h, axis=0)
    d2 = np.gradient(T1.values, h, axis=0)
    assert np.max(np.abs(d1 - T1.values)[1:-1]) <= 1e-5
    assert np.max(np.abs(d2 - T2.values)[1:-1]) <= 1e-5


def test_gram_free(free_forward):
    _, (gd, (T, _, _), _) = free_forward
    G = model.gram_matrix(gd, T)
    np.testing.assert_allclose(G.values[0], [[1, 0.5], [0.5, 0.5]], atol=1e-12)
    np.testing.assert_allclose(G.values, model.gram_from_kernel(gd).values, atol=1e-12)


def test_gram_two_ways(cos_forward):
    _, (gd, (T, _, _), _) = cos_forward
    np.testing.assert_allclose(model.gram_matrix(gd, T).values, model.gram_from_kernel(gd).values,
                               atol=1e-10)


def test_w_c_examples(free_forward):
    pot, (gd, (T, _, _), _) = free_forward
    y = model.apply_w_c(gd, T, np.ones(pot.grid.n))
    np.testing.assert_allclose(y.values, np.tile([1.0, 0.5], (len(T), 1)), atol=1e-12)
    assert not np.any(model.apply_w_c(gd, T, np.zeros(pot.grid.n)).values)
    back = model.apply_w_c_adjoint(gd, T, y)
    np.testing.assert_allclose(back.values, 1.0, atol=1e-10)
    zero = VectorGridFunction(T.x, np.zeros((len(T), 2)))
    assert not np.any(model.apply_w_c_adjoint(gd, T, zero).values)


def test_w_c_unitary(cos_forward):
    pot, (gd, (T, _, _), _) = cos_forward
    rng = np.random.default_rng(17)
    x = pot.grid.nodes
    outside = np.abs(x - 0.5) >= 5 * pot.grid.h - 1e-12
    for _ in range(5):
        u = random_trig(rng, pot.grid)
        y = model.apply_w_c(gd, T, u)
        nu = np.sqrt(integrate(u, u))
        assert abs(model.hc_norm(gd, T, y) - nu) <= 1e-6 * nu
        back = model.apply_w_c_adjoint(gd, T, y)
        assert np.max(np.abs(back.values - u.values)[outside]) <= 1e-6
        # the filled zone around l/2 stays close as well
        assert np.max(np.abs(back.values - u.values)) <= 1e-4 * u.sup()


def test_w_c_inner_product_polarization(cos_forward):
    pot, (gd, (T, _, _), _) = cos_forward
    rng = np.random.default_rng(4)
    u, v = random_trig(rng, pot.grid), random_trig(rng, pot.grid)
    lhs = model.hc_inner(gd, T, model.apply_w_c(gd, T, u), model.apply_w_c(gd, T, v))
    assert lhs == pytest.approx(integrate(u, v), abs=1e-8)


def test_adjoint_rejects_bad_lengths(cos_forward):
    _, (gd, (T, _, _), _) = cos_forward
    with pytest.raises(DataError):
        model.apply_w_c_adjoint(gd, T, VectorGridFunction(T.x[:5], np.zeros((5, 2))))


def test_adjoint_conditioning_guard(cos_forward):
    pot, (gd, (T, _, _), _) = cos_forward
    y = model.apply_w_c(gd, T, np.ones(pot.grid.n))
    with pytest.raises(model.ConditioningError):
        model.apply_w_c_adjoint(gd, T, y, max_cond=10.0)


def test_free_model_coefficients(free_forward):
    _, (_, _, mc) = free_forward
    x = mc.P.x
    np.testing.assert_allclose(mc.P.values, free_P(x), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(mc.Q.values, free_Q(x), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(mc.P.values[0], [[0, 0], [2, -4]], atol=1e-12)
    assert mc.retained == 1001 - 5 and mc.delta == pytest.approx(5 * mc.h)


def test_p_blows_up_like_inverse_distance(free_forward):
    _, (_, _, mc) = free_forward
    w = 1 - 2 * mc.P.x
    scaled = np.abs(mc.P.values[:, 1, 1]) * w
    np.testing.assert_allclose(scaled, 4.0, rtol=1e-8)


def test_delta_option(cos_forward):
    pot, _ = cos_forward
    gd = model.build_gauge(pot)
    T, T1, T2 = model.transform_matrix(gd)
    mc = model.model_coefficients(pot, gd, T, T1, T2, delta=10 * pot.grid.h)
    assert mc.retained == pot.grid.mid - 10 + 1
    with pytest.raises(DataError):
        model.model_coefficients(pot, gd, T, T1, T2, delta=2.5 * pot.grid.h)
    with pytest.raises(DataError):
        model.default_delta_nodes(0.0, pot.grid.h)


def test_singular_transform_inside_range(cos_forward):
    pot, (gd, (T, T1, T2), _) = cos_forward
    with pytest.raises(SingularityError):
        model.model_coefficients(pot, gd, T, T1, T2, det_floor=1e3)


def test_model_operator_kills_kernel(cos_forward):
    _, (gd, (T, _, _), mc) = cos_forward
    y = model.apply_w_c(gd, T, gd.e1)
    assert np.max(np.abs(model.apply_model_operator(mc, y).values)) <= 1e-4


def test_intertwining(cos_forward):
    pot, (gd, (T, _, _), mc) = cos_forward
    rng = np.random.default_rng(11)
    x = pot.grid.nodes
    for _ in range(3):
        f = TrigPolynomial.random(rng, 1.0)
        y = model.apply_w_c(gd, T, f(x))
        lu = -f.second_derivative(x) + pot.values * f(x)
        lhs = model.apply_model_operator(mc, y).values
        rhs = model.apply_w_c(gd, T, lu).values[: mc.retained]
        assert np.max(np.abs(lhs - rhs)) <= 1e-3


def test_model_operator_short_field(cos_forward):
    _, (_, _, mc) = cos_forward
    with pytest.raises(DataError):
        model.apply_model_operator(mc, VectorGridFunction(mc.P.x[:10], np.zeros((10, 2))))


def test_domain_shape_at_midpoint(cos_forward):
    """y = W^c u has a vanishing derivative at l/2 and y(l/2) parallel to (e1, e2)(l/2)."""
    pot, (gd, (T, T1, _), _) = cos_forward
    f = TrigPolynomial.random(np.random.default_rng(2), 1.0)
    x = pot.grid.nodes
    m = pot.grid.mid
    u, du = f(x), f.derivative(x)
    pair = np.stack([u[: m + 1], u[::-1][: m + 1]], -1)
    dpair = np.stack([du[: m + 1], -du[::-1][: m + 1]], -1)
    dy = np.einsum("kij,kj->ki", T1.values, pair) + np.einsum("kij,kj->ki", T.values, dpair)
    assert np.max(np.abs(dy[m])) <= 1e-10
    y = model.apply_w_c(gd, T, u).values[m]
    v = np.array([gd.e1.values[m], gd.e2.values[m]])
    assert abs(y[0] * v[1] - y[1] * v[0]) <= 1e-12


def test_model_files_roundtrip(tmp_path, cos_forward):
    _, (_, _, mc) = cos_forward
    model.write_model(tmp_path, mc, {"q": "trig:1,1,3"})
    back = model.read_model(tmp_path)
    np.testing.assert_array_equal(back.P.values, mc.P.values)
    np.testing.assert_array_equal(back.Q.values, mc.Q.values)
    np.testing.assert_array_equal(back.dP.values, mc.dP.values)
    assert (back.l, back.n, back.delta) == (mc.l, mc.n, mc.delta)
    (tmp_path / "dP.csv").unlink()
    assert model.read_model(tmp_path).dP is None


def test_read_model_errors(tmp_path, cos_forward):
    with pytest.raises(DataError):
        model.read_model(tmp_path)
    _, (_, _, mc) = cos_forward
    model.write_model(tmp_path, mc)
    (tmp_path / "meta.json").write_text('{"l": 1, "n": 1001, "delta": 0.0025}')
    with pytest.raises(DataError):
        model.read_model(tmp_path)
    (tmp_path / "meta.json").write_text("not json")
    with pytest.raises(DataError):
        model.read_model(tmp_path)
