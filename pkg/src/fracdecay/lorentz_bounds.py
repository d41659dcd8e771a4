r"""Weak Lorentz quasi-norms of spectral multipliers and their envelope bound.

For a positive operator with spectral counting function :math:`N(v)` and a
propagator :math:`\varphi` dominated by a decreasing envelope :math:`\psi`,

.. math::

    \|\varphi(|\mathscr{L}|)\|_{L^{r, \infty}}
    = \sup_{t > 0} t^{1/r} \mu_t(\varphi(|\mathscr{L}|))
    \le \sup_{v > 0} \psi(v) N(v)^{1/r}.

On finite diagonal models (counting measure as the trace) the left-hand side
is computable exactly, which turns the inequality into a testable statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from fracdecay.errors import DomainError, InvariantError, UnboundedSupremumError
from fracdecay.spectral_model import (
    Discrete,
    PowerLaw,
    SpectralProfile,
    TorusLattice,
    Vladimirov,
    counting_function,
)

Scalar = Callable[[np.ndarray], np.ndarray]


def validation_grid(spectrum: Discrete, points: int = 600) -> np.ndarray:
    """Sample points on which a model's envelope conditions are checked."""
    top = max(1.0e4, 10 * (spectrum.eigenvalues[-1] if spectrum.eigenvalues else 0.0))
    grid = np.concatenate([[0.0], np.geomspace(1.0e-4, top, points), spectrum.array])
    return np.unique(grid)


@dataclass(frozen=True)
class DiagonalPropagatorModel:
    r"""The operator :math:`\varphi(|\mathscr{L}|)` for a finite spectrum.

    ``phi`` and ``psi`` must accept arrays. On construction
    :math:`|\varphi| \le \psi` and monotonicity of :math:`\psi` are checked on
    :func:`validation_grid`.
    """

    spectrum: Discrete
    phi: Scalar
    psi: Scalar
    grid: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.spectrum, Discrete):
            raise DomainError("diagonal models need a Discrete spectrum")

        grid = validation_grid(self.spectrum) if self.grid is None else np.asarray(self.grid)
        object.__setattr__(self, "grid", grid)

        psi = np.asarray(self.psi(grid), dtype=np.float64)
        phi = np.abs(np.asarray(self.phi(grid)))
        if not np.all(np.isfinite(psi)) or psi[0] <= 0:
            raise DomainError("envelope must be finite with psi(0) > 0")
        if np.any(np.diff(psi) > 1.0e-14 * psi[:-1]):
            i = int(np.argmax(np.diff(psi)))
            raise DomainError(f"envelope is not decreasing near v = {grid[i]:.6g}")

        excess = phi - psi * (1 + 1.0e-12)
        if np.any(excess > 0):
            i = int(np.argmax(excess))
            raise DomainError(
                f"|phi| exceeds psi at v = {grid[i]:.6g}: {phi[i]:.6g} > {psi[i]:.6g}"
            )

    @property
    def values(self) -> np.ndarray:
        """``|phi(lambda_k)|`` sorted in decreasing order."""
        v = np.abs(np.asarray(self.phi(self.spectrum.array)))
        return np.sort(v.ravel())[::-1]


@dataclass(frozen=True)
class NormIndices:
    """Exponents ``1 < p <= 2 <= q < inf`` and ``1/r = 1/p - 1/q``."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not (1 < self.p <= 2 <= self.q < math.inf):
            raise DomainError(f"need 1 < p <= 2 <= q < inf: p={self.p}, q={self.q}")

    @property
    def gap(self) -> float:
        return 1 / self.p - 1 / self.q

    @property
    def r(self) -> float:
        return math.inf if self.gap == 0 else 1 / self.gap


# {{{ exact quantities on finite models


def distribution_function(model: DiagonalPropagatorModel, gamma: float) -> int:
    """``#{k : |phi(lambda_k)| > gamma}``, zero eigenvalues included."""
    if gamma < 0:
        raise DomainError(f"gamma must be nonnegative: {gamma}")
    return int(np.count_nonzero(model.values > gamma))


def singular_number(model: DiagonalPropagatorModel, t: float) -> float:
    """The generalized singular number ``mu_t``: the ``(floor(t) + 1)``-th largest value."""
    if not t > 0:
        raise DomainError(f"t must be positive: {t}")
    v = model.values
    k = math.floor(t)
    return float(v[k]) if k < v.size else 0.0


def _weak_norm_witness(values: np.ndarray, r: float) -> tuple[float, int]:
    if values.size == 0:
        return 0.0, 0
    k = np.arange(1, values.size + 1, dtype=np.float64)
    scaled = k ** (1 / r) * values
    i = int(np.argmax(scaled))
    return float(scaled[i]), i + 1


def weak_norm_exact(model: DiagonalPropagatorModel, r: float) -> float:
    r""":math:`\sup_{t > 0} t^{1/r} \mu_t`, attained as :math:`t \to k^-` at a breakpoint."""
    if not 1 <= r < math.inf:
        raise DomainError(f"need 1 <= r < inf: {r}")
    return _weak_norm_witness(model.values, r)[0]


# }}}


# {{{ envelope bound


class EnvelopeBound(NamedTuple):
    value: float
    maximizer: float
    #: ratio of the tail value at ``v_max`` to the supremum (below one when the tail check passed)
    tail_ratio: float


def closed_form_supremum(beta: float, lam: float, r: float, t: float) -> EnvelopeBound:
    r"""Exact supremum for :math:`\psi(v) = 1 / (1 + t^\beta v)` and :math:`N(v) = v^\lambda`.

    The maximizer is :math:`v^* = \lambda t^{-\beta} / (r - \lambda)` and the
    value :math:`C' t^{-\beta\lambda/r}` with
    :math:`C' = (\lambda / (r - \lambda))^{\lambda/r} (r - \lambda) / r`.
    """
    if not 0 < lam < r:
        raise DomainError(f"the supremum is finite only for 0 < lam < r: {lam}, {r}")
    if not t > 0:
        raise DomainError(f"t must be positive: {t}")
    c = (lam / (r - lam)) ** (lam / r) * (r - lam) / r
    return EnvelopeBound(c * t ** (-beta * lam / r), lam * t**-beta / (r - lam), 0.0)


def _breakpoints(profile: SpectralProfile, v_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Points where the step function ``N`` jumps and its value just after."""
    if isinstance(profile, (Discrete, TorusLattice)):
        ev = profile.array
        ev = ev[(ev > 0) & (ev < v_max)]
        v, counts = np.unique(ev, return_counts=True)
        # N(v+) = #{0 < lambda <= v}
        return v, np.cumsum(counts).astype(np.float64)

    if isinstance(profile, Vladimirov):
        # N jumps to rho**k at s = rho**(k mu); the lower end keeps N(v) above tiny values
        k_lo = math.floor(math.log(1.0e-8) / (profile.mu * math.log(profile.rho)))
        k_hi = math.floor(math.log(v_max) / (profile.mu * math.log(profile.rho)))
        k = np.arange(k_lo, k_hi + 1, dtype=np.float64)
        v = float(profile.rho) ** (k * profile.mu)
        keep = v <= v_max
        return v[keep], float(profile.rho) ** k[keep]

    raise TypeError(f"not a step profile: {profile!r}")


def envelope_bound(psi: Scalar, profile: SpectralProfile, r: float,
                   v_max: float | None = None, seeds: int = 400) -> EnvelopeBound:
    r""":math:`\sup_{0 < v \le v_{max}} \psi(v) N(v)^{1/r}`.

    Step profiles (explicit eigenvalues, Vladimirov) are evaluated exactly at
    their jumps, since :math:`\psi` is decreasing. Continuous profiles are
    scanned on ``seeds`` log-spaced points in :math:`[10^{-8}, v_{max}]` and the
    best bracket is refined by a bounded scalar search.

    :raises UnboundedSupremumError: if the product is still rising at ``v_max``.
    """
    if not 1 <= r < math.inf:
        raise DomainError(f"need 1 <= r < inf: {r}")

    if isinstance(profile, (Discrete, TorusLattice, Vladimirov)):
        if v_max is None:
            v_max = 1.0e12 if isinstance(profile, Vladimirov) else math.inf
        v, n = _breakpoints(profile, v_max)
        if v.size == 0:
            return EnvelopeBound(0.0, 0.0, 0.0)
        vals = np.asarray(psi(v), dtype=np.float64) * n ** (1 / r)
        i = int(np.argmax(vals))
        tail = float(vals[-1] / vals[i]) if vals[i] > 0 else 0.0
        if isinstance(profile, Vladimirov) and v.size > 1 and i == v.size - 1:
            raise UnboundedSupremumError(
                f"envelope product still rising at v = {v[-1]:.6g}")
        return EnvelopeBound(float(vals[i]), float(v[i]), tail)

    if not isinstance(profile, PowerLaw):
        raise TypeError(f"not a spectral profile: {profile!r}")

    v_max = 1.0e12 if v_max is None else v_max
    if not v_max > 1.0e-8:
        raise DomainError(f"v_max must exceed 1e-8: {v_max}")

    def f(logv):
        v = np.exp(logv)
        return np.asarray(psi(v), dtype=np.float64) * np.asarray(
            counting_function(profile, v)) ** (1 / r)

    logv = np.linspace(math.log(1.0e-8), math.log(v_max), seeds)
    vals = f(logv)
    i = int(np.argmax(vals))
    if i == seeds - 1:
        raise UnboundedSupremumError(
            f"envelope product still rising at v_max = {v_max:.6g}")

    lo, hi = logv[max(i - 1, 0)], logv[min(i + 1, seeds - 1)]
    res = minimize_scalar(lambda x: -float(f(x)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1.0e-10})
    best, arg = (float(-res.fun), float(math.exp(res.x)))
    if best < vals[i]:
        best, arg = float(vals[i]), float(math.exp(logv[i]))

    return EnvelopeBound(best, arg, float(vals[-1] / best) if best > 0 else 0.0)


# }}}


# {{{ inequality check


class Theorem31Result(NamedTuple):
    lhs: float
    rhs: float
    margin: float
    passed: bool
    witness: dict


def theorem31_check(model: DiagonalPropagatorModel, r: float, *,
                    atol: float = 1.0e-12, strict: bool = True) -> Theorem31Result:
    r"""Compare the exact weak norm of :math:`\varphi` with the envelope bound.

    ``margin = rhs - lhs``; the check passes when ``lhs <= rhs + atol``. On
    failure the witness records the breakpoint ``t = k`` realizing the weak
    norm and the eigenvalue carrying the ``k``-th largest value.

    :raises InvariantError: on failure when ``strict`` is set.
    """
    values = model.values
    lhs, k = _weak_norm_witness(values, r)
    bound = envelope_bound(model.psi, model.spectrum, r)
    rhs = bound.value
    passed = lhs <= rhs + atol

    witness = {}
    if not passed:
        ev = model.spectrum.array
        order = np.argsort(-np.abs(np.asarray(model.phi(ev))).ravel(), kind="stable")
        witness = {
            "r": r, "t": k, "v": float(ev[order[k - 1]]),
            "lhs": lhs, "rhs": rhs, "rhs_maximizer": bound.maximizer,
        }
        if strict:
            raise InvariantError(
                f"weak norm {lhs:.17g} exceeds envelope bound {rhs:.17g}", witness)

    return Theorem31Result(lhs, rhs, rhs - lhs, passed, witness)


# }}}


def decay_exponent(beta: float, lam: float, p: float, q: float) -> float:
    r"""Time decay exponent :math:`-\beta\lambda(1/p - 1/q)`.

    Valid only when :math:`1/\lambda > 1/p - 1/q`.
    """
    if not 0 < beta < 2:
        raise DomainError(f"need 0 < beta < 2: {beta}")
    if not lam > 0:
        raise DomainError(f"need lam > 0: {lam}")
    gap = NormIndices(p, q).gap
    if not 1 / lam > gap:
        raise DomainError(f"1/lam = {1 / lam:.6g} must exceed 1/p - 1/q = {gap:.6g}")
    return -beta * lam * gap + 0.0


# {{{ randomized models

PHI_FAMILIES = ("ml1", "ml2", "schrodinger", "oscillation")


def measured_envelope(phi: Scalar, grid: np.ndarray) -> float:
    """Smallest ``C`` with ``|phi(x)| <= C / (1 + x)`` on ``grid``."""
    return float(np.max((1 + grid) * np.abs(np.asarray(phi(grid)))))


def random_model(rng: np.random.Generator, max_size: int = 50,
                 spectrum_max: float = 100.0) -> tuple[DiagonalPropagatorModel, dict]:
    r"""Draw a random model with envelope :math:`\psi(x) = C / (1 + x)`.

    Eigenvalues are uniform on :math:`(0, \text{spectrum\_max}]`. The propagator
    is one of :math:`E_{\alpha,1}(-x)`, :math:`E_{\alpha,2}(-x)`,
    :math:`E_\alpha(ix)` or :math:`C \cos(\omega x) / (1 + x)`, and ``C`` is
    measured on the model's validation grid. Returns the model and a
    description of the draw.
    """
    from fracdecay.ml_special import ml

    size = int(rng.integers(1, max_size + 1))
    # uniform on (0, spectrum_max]: zero modes are never drawn
    ev = spectrum_max * (1 - rng.random(size))
    spectrum = Discrete(tuple(ev))

    family = PHI_FAMILIES[int(rng.integers(len(PHI_FAMILIES)))]
    if family == "ml1":
        alpha = float(rng.uniform(0.1, 1.95))
        phi = lambda x, a=alpha: np.real(ml(-np.asarray(x), a, 1.0))  # noqa: E731
    elif family == "ml2":
        alpha = float(rng.uniform(0.1, 1.95))
        phi = lambda x, a=alpha: np.real(ml(-np.asarray(x), a, 2.0))  # noqa: E731
    elif family == "schrodinger":
        alpha = float(rng.uniform(0.1, 0.95))
        phi = lambda x, a=alpha: ml(1j * np.asarray(x), a, 1.0)  # noqa: E731
    else:
        alpha = float(rng.uniform(0.1, 10.0))
        phi = lambda x, w=alpha: np.cos(w * np.asarray(x)) / (1 + np.asarray(x))  # noqa: E731

    grid = validation_grid(spectrum)
    c = measured_envelope(phi, grid) * (1 + 1.0e-9)
    psi = lambda x, c=c: c / (1 + np.asarray(x))  # noqa: E731

    info = {"family": family, "param": alpha, "size": size, "C": c}
    return DiagonalPropagatorModel(spectrum, phi, psi, grid=grid), info


# }}}
