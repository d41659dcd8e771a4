r"""Fractional heat, wave and Schrödinger type equations on periodic grids.

The operator is the nonnegative Laplacian on the box :math:`[0, L)^d`, which is
diagonal in the discrete Fourier basis with eigenvalue
:math:`(2\pi|k|/L)^2` on mode :math:`k`. Solutions are obtained by multiplying
each Fourier coefficient by the corresponding Mittag-Leffler propagator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Callable

import numpy as np

from fracdecay.errors import DomainError
from fracdecay.frac_calculus import EquationKind, TimeGrid, equation_residual, residual_window
from fracdecay.ml_special import (
    propagator_heat,
    propagator_schrodinger,
    propagator_wave_pair,
)


@dataclass(frozen=True)
class GridFunction:
    """Complex field sampled at ``x_j = j * box_length / points_per_dim``.

    ``values`` has shape ``(points_per_dim,) * dim``.
    """

    dim: int
    points_per_dim: int
    box_length: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2: {self.dim}")
        n = self.points_per_dim
        if n < 2 or n & (n - 1):
            raise DomainError(f"points_per_dim must be a power of two: {n}")
        if not self.box_length > 0:
            raise DomainError(f"box_length must be positive: {self.box_length}")

        values = np.asarray(self.values, dtype=np.complex128)
        if values.size != n**self.dim:
            raise DomainError(f"expected {n ** self.dim} values, got {values.size}")
        object.__setattr__(self, "values", values.reshape((n,) * self.dim))

    @property
    def weight(self) -> float:
        """Quadrature weight of a single grid cell."""
        return (self.box_length / self.points_per_dim) ** self.dim

    @property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        x = self.box_length / self.points_per_dim * np.arange(self.points_per_dim)
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def replace(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.dim, self.points_per_dim, self.box_length, values)

    @classmethod
    def from_function(cls, dim: int, points_per_dim: int, box_length: float,
                      f: Callable[..., np.ndarray]) -> GridFunction:
        shell = cls(dim, points_per_dim, box_length, np.zeros(points_per_dim**dim))
        return shell.replace(np.broadcast_to(f(*shell.coordinates), (points_per_dim,) * dim))


def eigenvalues(f: GridFunction) -> np.ndarray:
    """Laplacian eigenvalue of every Fourier mode, in transform layout."""
    k = np.fft.fftfreq(f.points_per_dim, d=1.0 / f.points_per_dim)
    k2 = (2 * np.pi * k / f.box_length) ** 2
    if f.dim == 1:
        return k2
    return k2[:, None] + k2[None, :]


def forward_transform(f: GridFunction) -> np.ndarray:
    """Unitary discrete Fourier coefficients of ``f``."""
    return np.fft.fftn(f.values, norm="ortho")


def inverse_transform(coeffs: np.ndarray, like: GridFunction) -> GridFunction:
    return like.replace(np.fft.ifftn(coeffs, norm="ortho"))


@dataclass(frozen=True)
class EvolutionProblem:
    r"""The equation :math:`{}^C\partial_t^\beta w + \mathscr{L} w = 0` and its variants.

    * ``heat``: :math:`0 < \beta \le 1`, data ``w0``.
    * ``wave``: :math:`1 < \beta < 2`, data ``w0`` and ``w1``.
    * ``schrodinger``: :math:`i\,{}^C\partial_t^\beta w + \mathscr{L} w = 0`,
      :math:`0 < \beta < 1`, data ``w0``.

    With ``zero_mode_projection`` the mean of the data is removed.
    """

    kind: EquationKind
    beta: float
    zero_mode_projection: bool = False

    def __post_init__(self) -> None:
        b = self.beta
        ok = {
            "heat": 0 < b <= 1,
            "wave": 1 < b < 2,
            "schrodinger": 0 < b < 1,
        }
        if self.kind not in ok:
            raise DomainError(f"unknown equation kind: {self.kind!r}")
        if not ok[self.kind]:
            raise DomainError(f"beta = {b} is out of range for the {self.kind} kind")

    def multipliers(self, t, s) -> tuple[np.ndarray, np.ndarray | None]:
        """Propagators acting on the coefficients of ``w0`` and ``w1``."""
        if self.kind == "heat":
            return propagator_heat(self.beta, t, s), None
        if self.kind == "wave":
            return propagator_wave_pair(self.beta, t, s)
        return propagator_schrodinger(self.beta, t, s), None


def _check_data(problem: EvolutionProblem, w0: GridFunction, w1: GridFunction | None) -> None:
    if (w1 is not None) != (problem.kind == "wave"):
        raise DomainError("initial velocity w1 is required for (and only for) the wave kind")
    if w1 is not None and (w1.dim, w1.points_per_dim, w1.box_length) != (
            w0.dim, w0.points_per_dim, w0.box_length):
        raise DomainError("w0 and w1 live on different grids")


def _data_coefficients(problem, w0, w1):
    c0 = forward_transform(w0)
    c1 = None if w1 is None else forward_transform(w1)
    if problem.zero_mode_projection:
        c0.flat[0] = 0
        if c1 is not None:
            c1.flat[0] = 0
    return c0, c1


def _modal_multipliers(problem, times, lam, active):
    """Multipliers at ``times`` for the active modes, one evaluation per distinct eigenvalue."""
    s, inverse = np.unique(lam[active], return_inverse=True)
    tt = np.asarray(times, dtype=np.float64)[:, None]
    m0, m1 = problem.multipliers(tt, s[None, :])
    m0 = np.broadcast_to(m0, (tt.shape[0], s.size))[:, inverse]
    if m1 is not None:
        m1 = np.broadcast_to(m1, (tt.shape[0], s.size))[:, inverse]
    return m0, m1


def apply_propagator(problem: EvolutionProblem, t: float, w0: GridFunction,
                     w1: GridFunction | None = None) -> GridFunction:
    """The solution at time ``t``."""
    _check_data(problem, w0, w1)
    if not t >= 0:
        raise DomainError(f"t must be nonnegative: {t}")

    if t == 0:
        if not problem.zero_mode_projection:
            return w0.replace(w0.values.copy())
        return w0.replace(w0.values - np.mean(w0.values))

    c0, c1 = _data_coefficients(problem, w0, w1)
    active = c0 != 0
    if c1 is not None:
        active |= c1 != 0

    m0, m1 = _modal_multipliers(problem, [t], eigenvalues(w0), active)
    out = np.zeros_like(c0)
    out[active] = m0[0] * c0[active]
    if m1 is not None:
        out[active] += m1[0] * c1[active]

    return inverse_transform(out, w0)


def lq_norm(f: GridFunction, q: float) -> float:
    """Discrete :math:`L^q` norm (rectangle rule) for ``1 <= q < inf``."""
    if not 1 <= q < math.inf:
        raise DomainError(f"need 1 <= q < inf: {q}")
    a = np.abs(f.values)
    scale = float(np.max(a)) if a.size else 0.0
    if scale == 0:
        return 0.0
    # scaling first avoids overflow in |f|**q
    return scale * float(np.sum((a / scale) ** q) * f.weight) ** (1 / q)


def solution_residual(problem: EvolutionProblem, w0: GridFunction, w1: GridFunction | None,
                      grid: TimeGrid, probe=None) -> float:
    r"""Residual of the full equation for the propagated solution.

    The exact solution is sampled at every node of ``grid`` and at the
    ``probe`` points (flat grid indices, default all points). The discrete
    Caputo derivative along time plus :math:`\mathscr{L} w` (computed through
    the transform) is measured as in
    :func:`~fracdecay.frac_calculus.fode_residual`.
    """
    _check_data(problem, w0, w1)
    probe = np.arange(w0.values.size) if probe is None else np.asarray(probe).ravel()

    c0, c1 = _data_coefficients(problem, w0, w1)
    active = c0 != 0
    if c1 is not None:
        active |= c1 != 0
    lam = eigenvalues(w0)

    m0, m1 = _modal_multipliers(problem, grid.nodes, lam, active)
    coeffs = m0 * c0[active]
    if m1 is not None:
        coeffs = coeffs + m1 * c1[active]

    # synthesize at the probe points only
    n = w0.points_per_dim
    freq = np.fft.fftfreq(n, d=1.0 / n)
    kvec = np.stack([freq[ix] for ix in np.nonzero(active)], axis=-1)
    xidx = np.stack(np.unravel_index(probe, w0.values.shape), axis=-1)
    phase = np.exp(2j * np.pi * (xidx @ kvec.T) / n) / math.sqrt(w0.values.size)

    u = coeffs @ phase.T
    lu = (coeffs * lam[active]) @ phase.T
    u1 = None
    if c1 is not None:
        u1 = phase @ c1[active]

    res = equation_residual(problem.kind, problem.beta, u, lu, grid, u1=u1)
    return float(np.max(np.abs(res[residual_window(grid)])))


def write_snapshot(f: GridFunction, fp: IO[str]) -> None:
    """Write a field as CSV rows ``index, re, im`` (flat row-major index)."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["index", "re", "im"])
    for i, v in enumerate(f.values.ravel()):
        writer.writerow([i, f"{v.real:.17g}", f"{v.imag:.17g}"])
