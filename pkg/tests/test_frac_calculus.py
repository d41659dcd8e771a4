import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdecay.errors import DomainError
from fracdecay.frac_calculus import (
    SampledSignal,
    TimeGrid,
    caputo_derivative,
    empirical_order,
    fode_residual,
    mode_solution,
    residual_window,
    rl_integral,
    singular_exponents,
    starting_weights,
)


def sample(grid, f):
    return SampledSignal.from_function(grid, f)


def power_integral(m, beta, t):
    """I^beta t^m."""
    return math.gamma(m + 1) / math.gamma(m + 1 + beta) * t ** (m + beta)


# {{{ grids


def test_grid_basics():
    g = TimeGrid(2.0, 4)
    assert g.dt == 0.5
    np.testing.assert_array_equal(g.nodes, [0, 0.5, 1, 1.5, 2])
    assert g.refine().steps == 8
    with pytest.raises(DomainError):
        TimeGrid(1.0, 1)
    with pytest.raises(DomainError):
        TimeGrid(0.0, 4)
    with pytest.raises(DomainError):
        SampledSignal(g, np.zeros(3))


def test_window_is_second_half():
    g = TimeGrid(1.0, 8)
    np.testing.assert_array_equal(np.nonzero(residual_window(g))[0], [4, 5, 6, 7, 8])


# }}}


# {{{ Riemann-Liouville


def test_rl_of_one_order_one():
    g = TimeGrid(1.0, 16)
    out = rl_integral(sample(g, np.ones_like), 1.0).values
    np.testing.assert_allclose(out, g.nodes, atol=1e-14)


def test_rl_of_one_order_half():
    g = TimeGrid(1.0, 16)
    out = rl_integral(sample(g, np.ones_like), 0.5).values
    np.testing.assert_allclose(out, g.nodes**0.5 / math.gamma(1.5), atol=1e-14)


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 1.7])
def test_rl_exact_for_linear(beta):
    g = TimeGrid(2.0, 32)
    out = rl_integral(sample(g, lambda t: 3 - 2 * t), beta).values
    exact = 3 * power_integral(0, beta, g.nodes) - 2 * power_integral(1, beta, g.nodes)
    np.testing.assert_allclose(out, exact, atol=1e-13)
    assert out[0] == 0


def test_rl_second_order_for_quadratic():
    errs = []
    for n in (32, 64, 128):
        g = TimeGrid(1.0, n)
        out = rl_integral(sample(g, lambda t: t**2), 0.5).values
        errs.append(np.max(np.abs(out - power_integral(2, 0.5, g.nodes))))
    assert np.all(empirical_order(errs) > 1.9)


def test_rl_trailing_axes():
    g = TimeGrid(1.0, 8)
    v = np.stack([g.nodes, 2 * g.nodes], axis=-1)
    out = rl_integral(SampledSignal(g, v), 0.5).values
    np.testing.assert_allclose(out[:, 1], 2 * out[:, 0])


def test_rl_rejects_nonpositive_order():
    with pytest.raises(DomainError):
        rl_integral(sample(TimeGrid(1.0, 4), np.ones_like), 0.0)


def _scheme_error(f_coeffs, beta, grid):
    """Max error of rl_integral on a polynomial against the power rule."""
    poly = np.polynomial.Polynomial(f_coeffs)
    out = rl_integral(sample(grid, poly), beta).values
    exact = sum(c * power_integral(m, beta, grid.nodes) for m, c in enumerate(f_coeffs))
    return out, exact, float(np.max(np.abs(out - exact)))


@given(
    beta=st.floats(0.05, 1.5),
    gamma=st.floats(0.05, 1.5),
    coeffs=st.lists(st.floats(-2, 2), min_size=1, max_size=4),
)
def test_rl_semigroup(beta, gamma, coeffs):
    grid = TimeGrid(1.0, 64)
    once, _, e1 = _scheme_error(coeffs, beta, grid)
    direct, _, e2 = _scheme_error(coeffs, beta + gamma, grid)
    twice = rl_integral(SampledSignal(grid, once), gamma).values

    # error of the outer integral applied to the exact inner one
    exact_inner = sum(c * power_integral(m, beta, grid.nodes) for m, c in enumerate(coeffs))
    outer = rl_integral(SampledSignal(grid, exact_inner), gamma).values
    exact_outer = sum(c * power_integral(m, beta + gamma, grid.nodes) for m, c in enumerate(coeffs))
    e3 = float(np.max(np.abs(outer - exact_outer)))

    tol = 5 * max(e1, e2, e3) + 1e-13
    assert np.max(np.abs(twice - direct)) <= tol


# }}}


# {{{ Caputo


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 1.5])
def test_caputo_of_constant(beta):
    g = TimeGrid(1.0, 16)
    out = caputo_derivative(sample(g, lambda t: 0 * t + 4.0), beta, initial_slope=0.0)
    np.testing.assert_array_equal(out.values, 0)


def test_caputo_power_rule_order():
    errs = []
    for n in (64, 128, 256, 512):
        g = TimeGrid(1.0, n)
        out = caputo_derivative(sample(g, lambda t: t**2), 0.5).values
        exact = math.gamma(3) / math.gamma(2.5) * g.nodes**1.5
        errs.append(np.max(np.abs(out - exact)[1:]))
    assert empirical_order(errs)[-1] >= 1.5 - 0.1


def test_caputo_annihilates_linear_for_order_above_one():
    g = TimeGrid(1.0, 16)
    out = caputo_derivative(sample(g, lambda t: t), 1.5, initial_slope=1.0)
    np.testing.assert_allclose(out.values, 0, atol=1e-13)


def test_caputo_order_above_one_power_rule():
    errs = []
    for n in (64, 128, 256, 512):
        g = TimeGrid(1.0, n)
        out = caputo_derivative(sample(g, lambda t: t**3), 1.5, initial_slope=0.0).values
        exact = math.gamma(4) / math.gamma(2.5) * g.nodes**1.5
        errs.append(np.max(np.abs(out - exact)[1:]))
    assert empirical_order(errs)[-1] >= 2 - 1.5


def test_caputo_needs_initial_slope_above_one():
    with pytest.raises(DomainError):
        caputo_derivative(sample(TimeGrid(1.0, 8), np.sin), 1.5)


def test_caputo_input_checks():
    with pytest.raises(DomainError):
        caputo_derivative(sample(TimeGrid(1.0, 8), np.sin), 2.0)


def test_caputo_backward_difference_at_one():
    g = TimeGrid(1.0, 4)
    out = caputo_derivative(sample(g, lambda t: t**2), 1.0).values
    np.testing.assert_allclose(out[1:], np.diff(g.nodes**2) / g.dt)


@pytest.mark.parametrize("beta", [0.2, 0.3, 0.45, 0.7])
def test_starting_weights_make_powers_exact(beta):
    sig = singular_exponents(beta)
    g = TimeGrid(1.0, 40)
    for s in sig:
        out = caputo_derivative(sample(g, lambda t: t**s), beta, singular_exponents=sig).values
        exact = math.gamma(s + 1) / math.gamma(s + 1 - beta) * g.nodes[1:] ** (s - beta)
        np.testing.assert_allclose(out[1:], exact, rtol=1e-9)


def test_singular_exponents():
    assert singular_exponents(0.3) == pytest.approx((0.3, 0.6, 0.9))
    assert singular_exponents(0.5) == pytest.approx((0.5, 1.0))
    assert singular_exponents(0.8) == pytest.approx((0.8,))
    assert singular_exponents(1.5) == ()
    with pytest.raises(DomainError):
        starting_weights(0.5, (0.5, 1.0, 1.5), 2)


@given(beta=st.floats(0.1, 0.9), a=st.floats(-2, 2), b=st.floats(-2, 2))
def test_left_inverse(beta, a, b):
    f = lambda t: a * t + b * t**2  # noqa: E731
    errs = []
    for n in (64, 128):
        g = TimeGrid(1.0, n)
        back = caputo_derivative(rl_integral(sample(g, f), beta), beta).values
        errs.append(np.max(np.abs(back - f(g.nodes))[2:]))
    scale = abs(a) + abs(b)
    assert errs[1] <= 0.05 * scale + 1e-12
    assert errs[1] <= errs[0] + 1e-12


# }}}


# {{{ residuals


@pytest.mark.parametrize("kind, beta", [("heat", 0.4), ("schrodinger", 0.6), ("wave", 1.5)])
def test_residual_without_spectrum(kind, beta):
    g = TimeGrid(1.0, 32)
    assert fode_residual(beta, 0.0, 1.0, 0.7, g, kind) <= 1e-10


def test_residual_first_order_at_one():
    errs = [fode_residual(1.0, 2.0, 1.0, 0.0, TimeGrid(1.0, n)) for n in (64, 128, 256)]
    np.testing.assert_allclose(empirical_order(errs), 1.0, atol=0.05)


def test_residual_ratio_at_half():
    errs = [fode_residual(0.5, 1.0, 1.0, 0.0, TimeGrid(1.0, n)) for n in (256, 512, 1024)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    np.testing.assert_allclose(ratios[-1], 2 ** (2 - 0.5), rtol=0.05)


def test_mode_solution_kinds():
    t = np.linspace(0, 1, 5)
    assert mode_solution("heat", 1.0, 2.0, t) == pytest.approx(np.exp(-2 * t))
    with pytest.raises(DomainError):
        mode_solution("wave", 0.5, 1.0, t)
    with pytest.raises(DomainError):
        mode_solution("diffusion", 0.5, 1.0, t)
    with pytest.raises(DomainError):
        fode_residual(0.5, -1.0, 1.0, 0.0, TimeGrid(1.0, 8))


# }}}
