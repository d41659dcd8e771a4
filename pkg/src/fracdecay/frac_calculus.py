r"""Discrete fractional integrals and Caputo derivatives on uniform time grids.

The schemes here are deliberately simple (quadratic cost, uniform steps): they
serve as independent residual checks for the closed-form propagators, not as
production time steppers.

Signals are arrays whose leading axis runs over the time nodes
:math:`t_j = j \Delta t`, :math:`j = 0, \dots, N`; trailing axes are carried
along, so many modes or probe points can be processed at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from fracdecay.errors import DomainError
from fracdecay.ml_special import ml

EquationKind = Literal["heat", "wave", "schrodinger"]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j * t_end / steps`` on ``[0, t_end]``."""

    t_end: float
    steps: int

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise DomainError(f"t_end must be positive: {self.t_end}")
        if self.steps < 2:
            raise DomainError(f"at least two steps are required: {self.steps}")

    @property
    def dt(self) -> float:
        return self.t_end / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    def refine(self, factor: int = 2) -> TimeGrid:
        return TimeGrid(self.t_end, self.steps * factor)


@dataclass(frozen=True)
class SampledSignal:
    """Values of a function at the nodes of a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape[:1] != (self.grid.steps + 1,):
            raise DomainError(
                f"expected {self.grid.steps + 1} samples, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TimeGrid, f) -> SampledSignal:
        return cls(grid, np.asarray(f(grid.nodes)))


def _toeplitz_apply(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    """``out[n] = sum_{j <= n} weights[n - j] * values[j]`` along axis 0."""
    n = values.shape[0]
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    mat = np.where(diff >= 0, weights[np.clip(diff, 0, n - 1)], 0.0)
    return np.tensordot(mat, values, axes=(1, 0))


# {{{ Riemann-Liouville integral


def rl_integral(f: SampledSignal, beta: float) -> SampledSignal:
    r"""Riemann-Liouville integral of order :math:`\beta > 0`.

    .. math::

        I^\beta f(t) = \frac{1}{\Gamma(\beta)} \int_0^t (t - s)^{\beta - 1} f(s) \,\mathrm{d}s

    Product integration against the piecewise linear interpolant of ``f``,
    so the result is exact for linear functions.
    """
    if not beta > 0:
        raise DomainError(f"integral order must be positive: {beta}")

    grid = f.grid
    n = grid.steps
    v = np.asarray(f.values)
    m = np.arange(n + 2, dtype=np.float64)
    b1 = beta + 1

    # weight of f_j at node n depends on n - j only, except for j = 0 and j = n
    w = np.empty(n + 1)
    w[0] = 1.0
    w[1:] = m[2:] ** b1 - 2 * m[1:-1] ** b1 + m[:-2] ** b1
    # the j = 0 node only sees one adjacent interval
    w0 = (m[1:-1] - 1) ** b1 - (m[1:-1] - b1) * m[1:-1] ** beta

    vv = v.copy()
    vv[0] = 0
    out = _toeplitz_apply(w, vv)
    out[1:] += np.multiply.outer(w0, v[0]) if v.ndim > 1 else w0 * v[0]
    out *= grid.dt**beta / math.gamma(beta + 2)
    out[0] = 0
    return SampledSignal(grid, out)


# }}}


# {{{ Caputo derivative


def _l1_weights(order: float, n: int) -> np.ndarray:
    j = np.arange(n + 1, dtype=np.float64)
    return (j + 1) ** order - j**order


def caputo_derivative(f: SampledSignal, beta: float, initial_slope=None,
                      singular_exponents=()) -> SampledSignal:
    r"""Caputo derivative of order :math:`0 < \beta < 2`.

    * :math:`0 < \beta < 1`: the L1 scheme.
    * :math:`\beta = 1`: backward differences.
    * :math:`1 < \beta < 2`: the L1-type scheme for
      :math:`I^{2 - \beta} f''`, obtained from the Riemann-Liouville derivative of
      :math:`f(t) - f(0) - f'(0) t`. The initial slope :math:`f'(0)` is initial
      data and must be given as ``initial_slope``; it is never estimated by
      differencing.

    For :math:`0 < \beta < 1`, ``singular_exponents`` adds starting weights on
    the first few nodes that make the scheme exact for :math:`t^\sigma`. Solutions
    behaving like :math:`t^\beta` near zero otherwise limit the L1 scheme to
    order :math:`1 + \beta`.

    The value at ``t = 0`` is reported as zero.
    """
    grid = f.grid
    n = grid.steps
    v = np.asarray(f.values)
    if n < 2:
        raise DomainError("at least three nodes are required")
    if not 0 < beta < 2:
        raise DomainError(f"derivative order must lie in (0, 2): {beta}")

    dt = grid.dt
    diffs = np.diff(v, axis=0)
    out = np.zeros_like(v, dtype=np.result_type(v.dtype, np.float64))

    if beta == 1:
        out[1:] = diffs / dt
        return SampledSignal(grid, out)

    if beta < 1:
        b = _l1_weights(1 - beta, n)
        out[1:] = _l1_sum(b, diffs)
        out *= dt**-beta / math.gamma(2 - beta)
        if len(singular_exponents):
            weights = starting_weights(beta, singular_exponents, n)
            out[1:] += dt**-beta * np.tensordot(weights, v[1:len(singular_exponents) + 1] - v[0], axes=(1, 0))
        return SampledSignal(grid, out)

    if initial_slope is None:
        raise DomainError("orders in (1, 2) require the initial slope f'(0)")

    # slopes on each step, delta_k = (f_k - f_{k-1}) / dt, k = 1..n
    slopes = diffs / dt
    b = _l1_weights(2 - beta, n)
    # differences of the slope sequence, with f'(0) entering as the first one
    d = np.concatenate([slopes[:1] - np.asarray(initial_slope)[None, ...], np.diff(slopes, axis=0)])
    out[1:] = _l1_sum(b, d)
    out *= dt ** (1 - beta) / math.gamma(3 - beta)
    return SampledSignal(grid, out)


def starting_weights(beta: float, exponents, n: int) -> np.ndarray:
    r"""Correction weights ``W[n - 1, j - 1]`` acting on ``f_j - f_0``, ``j = 1..m``.

    Chosen so that the corrected L1 scheme reproduces
    :math:`\partial^\beta t^\sigma = \Gamma(\sigma + 1) / \Gamma(\sigma + 1 - \beta)
    t^{\sigma - \beta}` at every node for each ``sigma`` in ``exponents``.
    Computed on the unit-step grid; the caller scales by :math:`\Delta t^{-\beta}`.
    """
    sig = np.asarray(exponents, dtype=np.float64)
    m = sig.size
    if m > n:
        raise DomainError(f"{m} starting weights need at least {m} steps")

    j = np.arange(n + 1, dtype=np.float64)
    b = _l1_weights(1 - beta, n)
    # defect of the plain scheme on t^sigma (unit steps), one column per exponent
    defect = np.empty((n, m))
    for i, s in enumerate(sig):
        powers = j**s
        approx = _l1_sum(b, np.diff(powers)) / math.gamma(2 - beta)
        exact = math.gamma(s + 1) / math.gamma(s + 1 - beta) * j[1:] ** (s - beta)
        defect[:, i] = exact - approx

    # sum_k W[n, k] * k^sigma_i = defect[n, i]
    vander = np.arange(1, m + 1, dtype=np.float64)[:, None] ** sig[None, :]
    return np.linalg.solve(vander.T, defect.T).T


def singular_exponents(beta: float, limit: float = 1.0, count: int = 3) -> tuple[float, ...]:
    r"""Leading exponents :math:`k\beta \le` ``limit`` of the expansion of the mode
    solutions at zero, at most ``count`` of them.

    Terms :math:`t^{k\beta}` with :math:`k\beta < 1 - \beta` cap the L1 scheme
    below order :math:`2 - \beta`; the next few are kept as well because their
    defects dominate on practical grids. More columns make the starting
    weights ill-conditioned.
    """
    if not 0 < beta < 1:
        return ()
    out = []
    k = 1
    while k * beta <= limit + 1e-12 and len(out) < count:
        out.append(k * beta)
        k += 1
    return tuple(out)


def _l1_sum(b: np.ndarray, d: np.ndarray) -> np.ndarray:
    """``out[n-1] = sum_{k=1}^{n} b[n-k] d[k-1]`` for n = 1..N (a causal convolution)."""
    return _toeplitz_apply(b, d)


# }}}


# {{{ residuals


def mode_solution(kind: EquationKind, beta: float, s: float, t: np.ndarray,
                  u0: complex = 1.0, u1: complex = 0.0) -> np.ndarray:
    """Closed-form solution of the scalar fractional equation for one mode."""
    t = np.asarray(t, dtype=np.float64)
    if kind == "heat":
        if not 0 < beta <= 1:
            raise DomainError(f"heat kind requires 0 < beta <= 1: {beta}")
        return np.real(ml(-(t**beta) * s, beta, 1.0)) * u0
    if kind == "wave":
        if not 1 < beta < 2:
            raise DomainError(f"wave kind requires 1 < beta < 2: {beta}")
        z = -(t**beta) * s
        return np.real(ml(z, beta, 1.0)) * u0 + t * np.real(ml(z, beta, 2.0)) * u1
    if kind == "schrodinger":
        if not 0 < beta < 1:
            raise DomainError(f"Schrödinger kind requires 0 < beta < 1: {beta}")
        return ml(1j * (t**beta) * s, beta, 1.0) * u0
    raise DomainError(f"unknown equation kind: {kind!r}")


def residual_window(grid: TimeGrid) -> np.ndarray:
    """Boolean mask of the nodes on which residuals are measured."""
    t = grid.nodes
    return t >= 0.5 * grid.t_end - 1e-12 * grid.t_end


def equation_residual(kind: EquationKind, beta: float, u: np.ndarray, lu: np.ndarray,
                      grid: TimeGrid, u1=None) -> np.ndarray:
    r"""Pointwise residual of :math:`{}^C\partial_t^\beta u + \mathscr{L} u = 0`.

    ``lu`` holds :math:`\mathscr{L} u` at the same nodes; the Schrödinger kind
    uses :math:`i\,{}^C\partial_t^\beta u + \mathscr{L} u`.
    """
    du = caputo_derivative(SampledSignal(grid, u), beta,
                           initial_slope=u1 if beta > 1 else None,
                           singular_exponents=singular_exponents(beta)).values
    if kind == "schrodinger":
        return 1j * du + lu
    return du + lu


def fode_residual(beta: float, s: float, u0: complex, u1: complex, grid: TimeGrid,
                  kind: EquationKind = "heat") -> float:
    r"""Residual of the closed-form solution of the scalar mode equation.

    The exact solution :math:`u` (:func:`mode_solution`) is sampled on ``grid``
    and plugged into the discrete Caputo derivative. The result is the
    maximum of :math:`|{}^C\partial_t^\beta u + s u|` (heat and wave) or
    :math:`|i\,{}^C\partial_t^\beta u + s u|` (Schrödinger) over the nodes in
    :func:`residual_window`.
    """
    if s < 0:
        raise DomainError(f"spectral parameter must be nonnegative: {s}")

    t = grid.nodes
    u = mode_solution(kind, beta, s, t, u0, u1)
    res = equation_residual(kind, beta, u, s * u, grid, u1=u1)
    return float(np.max(np.abs(res[residual_window(grid)])))


def empirical_order(errors, factor: float = 2.0) -> np.ndarray:
    """Observed convergence orders from errors on successively refined grids."""
    e = np.asarray(errors, dtype=np.float64)
    return np.log(e[:-1] / e[1:]) / math.log(factor)


# }}}
