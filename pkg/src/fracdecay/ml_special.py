r"""Two-parameter Mittag-Leffler function and the propagators built from it.

.. math::

    E_{\alpha, \delta}(z) = \sum_{k = 0}^\infty \frac{z^k}{\Gamma(\alpha k + \delta)}

Evaluation is split by the effective size :math:`R = |z|^{1/\alpha}`:

* small :math:`R`: Taylor series, accumulated in double-double arithmetic so
  that the cancellation for oscillatory negative arguments stays harmless;
* large :math:`R` outside the growing sector :math:`|\arg z| \le \pi\alpha/2`:
  the algebraic asymptotic expansion plus the exponentially small terms
  :math:`\alpha^{-1} \zeta^{1 - \delta} e^{\zeta}`, :math:`\zeta = z^{1/\alpha}
  e^{2\pi i m / \alpha}`;
* in between, a linear blend of both.

Everything is vectorized over ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, gammasgn, rgamma

from fracdecay import _dd
from fracdecay.errors import AccuracyError, DomainError

# series/asymptotic crossover, in terms of R = |z|^(1/alpha)
SERIES_RADIUS = 30.0
ASYMPTOTIC_RADIUS = 36.0
# series is still used up to this R inside the growing sector
MAX_SERIES_RADIUS = 40.0
MAX_SERIES_TERMS = 8192
MAX_ASYMPTOTIC_TERMS = 600

# unit roundoff of double-double accumulation (with a safety factor)
_DD_EPS = 2.0**-104


@dataclass(frozen=True)
class MLParams:
    """Parameters :math:`(\\alpha, \\delta)` of :math:`E_{\\alpha, \\delta}`."""

    alpha: float
    delta: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive: {self.alpha}")
        if not math.isfinite(self.delta):
            raise DomainError(f"delta must be finite: {self.delta}")

    def __call__(self, z):
        return ml(z, self.alpha, self.delta)


@dataclass(frozen=True)
class SectorSpec:
    r"""Closed sector :math:`\mu \le |\arg z| \le \pi` of the complex plane."""

    mu: float

    @classmethod
    def default(cls, alpha: float) -> SectorSpec:
        """Midpoint of the admissible range :math:`(\\pi\\alpha/2, \\min(\\pi, \\pi\\alpha))`."""
        lo = math.pi * alpha / 2
        hi = min(math.pi, math.pi * alpha)
        return cls(0.5 * (lo + hi))

    def validate(self, alpha: float) -> None:
        if not (math.pi * alpha / 2 < self.mu <= math.pi):
            raise DomainError(
                f"sector angle must lie in (pi*alpha/2, pi] = "
                f"({math.pi * alpha / 2:.6g}, {math.pi:.6g}]: got {self.mu}"
            )

    def contains(self, z) -> np.ndarray:
        theta = np.abs(np.angle(np.asarray(z, dtype=np.complex128)))
        return theta >= self.mu * (1 - 1e-14)


# {{{ gamma


def gamma_real(x: float) -> float:
    """Euler gamma function on the real line.

    :raises DomainError: at the poles ``0, -1, -2, ...``.
    """
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    try:
        return math.gamma(x)
    except OverflowError:
        return math.inf


# }}}


# {{{ series


@lru_cache(maxsize=512)
def _series_coefficients(alpha: float, delta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Double-double split of ``1 / Gamma(alpha k + delta)`` for ``k < n``."""
    hi = np.empty(n)
    lo = np.empty(n)
    with mpmath.workprec(128):
        a = mpmath.mpf(alpha)
        d = mpmath.mpf(delta)
        for k in range(n):
            c = mpmath.rgamma(a * k + d)
            hi[k] = float(c)
            lo[k] = float(c - hi[k])
    return hi, lo


def _log_series_terms(alpha: float, delta: float, logr: float, n: int) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)
    arg = alpha * k + delta
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lg = gammaln(arg)
        out = k * logr - lg
    # 1/Gamma vanishes at the poles
    pole = (arg <= 0) & (arg == np.floor(arg))
    out[pole] = -np.inf
    return out


def _series_term_count(alpha: float, delta: float, rmax: float, threshold: float) -> tuple[int, float]:
    """Number of terms after which the tail is below ``threshold``.

    :returns: the count and a geometric bound on the neglected tail.
    """
    if rmax == 0:
        return 1, 0.0

    logr = math.log(rmax)
    logthr = math.log(threshold)
    n = 64
    while True:
        lt = _log_series_terms(alpha, delta, logr, n)
        # past the maximum the terms decrease monotonically
        imax = int(np.argmax(lt))
        tail = lt[imax:]
        below = np.nonzero(tail < logthr)[0]
        if below.size:
            K = imax + int(below[0])
            # ratio of consecutive terms bounds the tail geometrically
            lk = lt[K]
            ratio = math.exp(min(0.0, lt[K] - lt[K - 1])) if K > 0 else 0.0
            if ratio < 1 and np.isfinite(lk):
                bound = math.exp(lk) / (1 - ratio)
            else:
                bound = 0.0
            return K + 1, bound
        if n >= MAX_SERIES_TERMS:
            raise AccuracyError(
                f"series for E_{{{alpha}, {delta}}} does not converge within "
                f"{MAX_SERIES_TERMS} terms at |z| = {rmax:.6g}",
                bound=float(np.exp(lt[-1])),
            )
        n = min(2 * n, MAX_SERIES_TERMS)


def _bucket(n: int) -> int:
    return 32 * (-(-n // 32))


# below this R the series loses at most ~2 digits to cancellation
_DOUBLE_SERIES_RADIUS = 4.0


def _double_coefficients(alpha: float, delta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    arg = alpha * np.arange(n) + delta
    return rgamma(arg), np.zeros(n)


def _series(z: np.ndarray, alpha: float, delta: float, threshold: float) -> tuple[np.ndarray, float]:
    """Series evaluation; returns values and an absolute error estimate."""
    rmax = float(np.max(np.abs(z))) if z.size else 0.0
    K, tail = _series_term_count(alpha, delta, rmax, threshold)
    if rmax ** (1 / alpha) <= _DOUBLE_SERIES_RADIUS:
        hi, lo = _double_coefficients(alpha, delta, K)
    else:
        hi, lo = _series_coefficients(float(alpha), float(delta), _bucket(K))
    value = _dd.horner(hi[:K], lo[:K], z)

    # rounding error of the compensated Horner scheme
    lt = _log_series_terms(alpha, delta, math.log(rmax) if rmax > 0 else -np.inf, K)
    with np.errstate(over="ignore"):
        mass = float(np.sum(np.exp(lt))) if rmax > 0 else abs(hi[0])
    rounding = 2 * math.sqrt(K) * _DD_EPS * mass

    return value, tail + rounding


def ml_series(z, alpha: float, delta: float = 1.0, tol: float = 1.0e-12):
    """Evaluate :math:`E_{\\alpha, \\delta}(z)` by its Taylor series.

    Terms are accumulated in double-double precision and the series is
    truncated once the neglected tail is below ``1e-3 tol``.

    :raises AccuracyError: if the result cannot be guaranteed to
        ``tol * (|E| + 1)``; the achieved bound is attached to the error.
    :raises DomainError: if :math:`|z|^{1/\\alpha}` exceeds ``MAX_SERIES_RADIUS``.
    """
    MLParams(alpha, delta)
    if tol <= 0:
        raise DomainError(f"tol must be positive: {tol}")

    zz = np.asarray(z, dtype=np.complex128)
    if zz.size and float(np.max(np.abs(zz))) > MAX_SERIES_RADIUS**alpha:
        # coefficients needed beyond this radius underflow in double precision
        raise DomainError(f"series evaluation requires |z| <= {MAX_SERIES_RADIUS**alpha:.6g}")
    value, err = _series(zz.ravel(), alpha, delta, 1.0e-3 * tol)
    scale = float(np.min(np.abs(value))) + 1 if value.size else 1.0
    if err > tol * scale:
        raise AccuracyError(
            f"series for E_{{{alpha}, {delta}}} reaches only {err:.3e} "
            f"(requested {tol:.3e} relative to |E| + 1)",
            bound=err,
        )
    value = value.reshape(zz.shape)
    return value[()] if value.ndim == 0 else value


# }}}


# {{{ asymptotics


def _exponential_part(z: np.ndarray, alpha: float, delta: float) -> np.ndarray:
    r"""Sum of :math:`\alpha^{-1} \zeta^{1 - \delta} e^\zeta` over the admissible branches.

    A branch contributes when :math:`|\arg z + 2\pi m| \le \pi\alpha`, with weight
    one half on the boundary.
    """
    r = np.abs(z)
    theta = np.angle(z)
    with np.errstate(divide="ignore"):
        big_r = r ** (1.0 / alpha)

    out = np.zeros(z.shape, dtype=np.complex128)
    bound = np.pi * alpha
    for m in range(-2, 3):
        shifted = theta + 2 * np.pi * m
        weight = np.where(
            np.abs(np.abs(shifted) - bound) <= 1.0e-13 * bound,
            0.5,
            np.where(np.abs(shifted) < bound, 1.0, 0.0),
        )
        if not np.any(weight):
            continue

        phi = shifted / alpha
        zeta = big_r * np.exp(1j * phi)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            log_term = (1 - delta) * (np.log(big_r) + 1j * phi) + zeta
            term = np.where(weight > 0, weight * np.exp(log_term) / alpha, 0.0)
        out += term

    return out


def _asymptotic_coefficients(alpha: float, delta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, n + 1, dtype=np.float64)
    arg = delta - alpha * k
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        logc = -gammaln(arg)
        sign = gammasgn(arg)
    pole = (arg <= 0) & (arg == np.floor(arg))
    logc[pole] = -np.inf
    sign[pole] = 0.0
    return logc, sign


def _asymptotic(z: np.ndarray, alpha: float, delta: float, terms: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic expansion; returns values and an estimate of the first omitted term."""
    n = MAX_ASYMPTOTIC_TERMS if terms is None else int(terms)
    logc, sign = _asymptotic_coefficients(alpha, delta, n + 1)

    # |1/Gamma(delta - alpha k)| <= Gamma(1 - delta + alpha k) / pi by reflection;
    # the envelope is smooth in k, unlike the coefficients themselves
    k = np.arange(1, n + 2, dtype=np.float64)
    refl = 1 - delta + alpha * k
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        logenv = np.where(refl >= 2, gammaln(np.maximum(refl, 2)) - math.log(math.pi), -np.inf)
    logenv = np.maximum(logenv, logc)

    value = _exponential_part(z, alpha, delta)
    logr = np.log(np.abs(z))
    theta = np.angle(z)
    terminating = _terminates(alpha, delta)

    active = np.ones(z.shape, dtype=bool)
    prev = np.full(z.shape, np.inf)
    err = np.zeros(z.shape)
    for k in range(1, n + 2):
        env = np.exp(logenv[k - 1] - k * logr)
        if k == n + 1:
            if not terminating:
                err = np.where(active, env, err)
            break

        if terms is None and refl[k - 1] >= 2:
            # optimal truncation at the smallest envelope term
            stop = active & ((env > prev) | (env < 1.0e-18 * np.abs(value)))
            err = np.where(stop, np.where(terminating, 0.0, env), err)
            active &= ~stop
            if not np.any(active):
                break
            prev = np.where(active, env, prev)

        if sign[k - 1] == 0:
            continue
        mag = np.exp(logc[k - 1] - k * logr)
        term = -sign[k - 1] * mag * np.exp(-1j * k * theta)
        value = np.where(active, value + term, value)

    return value, err


def _is_growing(z: np.ndarray, alpha: float) -> np.ndarray:
    return np.abs(np.angle(z)) <= np.pi * alpha / 2 * (1 + 1e-14)


def ml_asymptotic(z, alpha: float, delta: float = 1.0, terms: int | None = None,
                  sector: SectorSpec | None = None):
    r"""Evaluate :math:`E_{\alpha, \delta}(z)` by its large-:math:`|z|` expansion.

    .. math::

        E_{\alpha, \delta}(z) \sim \frac{1}{\alpha} \sum_m \zeta_m^{1 - \delta}
            e^{\zeta_m} - \sum_{k = 1}^{N} \frac{z^{-k}}{\Gamma(\delta - \alpha k)}

    The exponential sum runs over the branches :math:`\zeta_m` of
    :math:`z^{1/\alpha}` with :math:`|\arg z + 2\pi m| \le \pi\alpha` and is
    exponentially small away from the growing sector. With ``terms=None`` the
    algebraic sum is truncated at its smallest term.

    :arg sector: if given, every ``z`` must lie in it; otherwise ``z`` is only
        required to stay out of the growing sector :math:`|\arg z| \le \pi\alpha/2`.
    :raises DomainError: for ``alpha >= 2``, ``z = 0`` or arguments outside the sector.
    """
    MLParams(alpha, delta)
    if alpha >= 2:
        raise DomainError(f"asymptotic expansion requires alpha < 2: {alpha}")

    zz = np.asarray(z, dtype=np.complex128)
    if np.any(zz == 0):
        raise DomainError("asymptotic expansion is undefined at z = 0")
    if sector is not None:
        sector.validate(alpha)
        if not np.all(sector.contains(zz)):
            raise DomainError(f"argument outside the sector |arg z| >= {sector.mu}")
    elif np.any(_is_growing(zz, alpha)):
        raise DomainError("argument inside the growing sector |arg z| <= pi alpha / 2")

    value, _ = _asymptotic(zz.ravel(), alpha, delta, terms)
    value = value.reshape(zz.shape)
    return value[()] if value.ndim == 0 else value


# }}}


# {{{ dispatch


def _terminates(alpha: float, delta: float) -> bool:
    # 1/Gamma(delta - k) vanishes for all large k: the expansion is exact
    return alpha == 1.0 and float(delta).is_integer()


def crossover_radii(alpha: float, delta: float = 1.0) -> tuple[float, float]:
    """Radii ``(r0, r1)`` in ``|z|`` of the series/asymptotic blending annulus."""
    if _terminates(alpha, delta):
        return max(5.0, 5.0 * alpha), 2 * max(5.0, 5.0 * alpha)
    return SERIES_RADIUS**alpha, ASYMPTOTIC_RADIUS**alpha


def ml(z, alpha: float, delta: float = 1.0):
    """Evaluate the Mittag-Leffler function :math:`E_{\\alpha, \\delta}(z)`.

    Accepts scalars or arrays; returns complex values of the same shape.

    :raises DomainError: for large ``|z|`` inside the growing sector
        :math:`|\\arg z| \\le \\pi\\alpha/2` (or any large ``|z|`` if
        ``alpha >= 2``).
    """
    MLParams(alpha, delta)
    zz = np.asarray(z, dtype=np.complex128)
    flat = zz.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)

    r = np.abs(flat)
    r0, r1 = crossover_radii(alpha, delta)
    if alpha >= 2:
        decaying = np.zeros(flat.shape, dtype=bool)
    else:
        decaying = ~_is_growing(flat, alpha)

    rmax_series = MAX_SERIES_RADIUS**alpha
    bad = ~decaying & (r > rmax_series)
    if np.any(bad):
        raise DomainError(
            f"E_{{{alpha}, {delta}}}(z) for |z| > {rmax_series:.6g} is only available "
            "outside the growing sector |arg z| <= pi alpha / 2"
        )

    use_series = ~decaying | (r < r1)
    use_asym = decaying & (r > r0)

    series_val = np.zeros(flat.shape, dtype=np.complex128)
    asym_val = np.zeros(flat.shape, dtype=np.complex128)
    if np.any(use_series):
        series_val[use_series], _ = _series(flat[use_series], alpha, delta, 1.0e-20)
    if np.any(use_asym):
        asym_val[use_asym], _ = _asymptotic(flat[use_asym], alpha, delta)

    w = np.clip((r - r0) / (r1 - r0), 0.0, 1.0)
    w = np.where(decaying, w, 0.0)
    out = np.where(use_series & use_asym, (1 - w) * series_val + w * asym_val,
                   np.where(use_asym, asym_val, series_val))

    out = out.reshape(zz.shape)
    return out[()] if out.ndim == 0 else out


# }}}


# {{{ propagators


def _check_time_and_spectrum(t, s):
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if np.any(t < 0) or np.any(s < 0):
        raise DomainError("time and spectral parameter must be nonnegative")
    return t, s


def propagator_heat(beta: float, t, s):
    r"""Heat-type propagator :math:`E_\beta(-t^\beta s)` for :math:`0 < \beta \le 1`."""
    if not 0 < beta <= 1:
        raise DomainError(f"heat propagator requires 0 < beta <= 1: {beta}")
    t, s = _check_time_and_spectrum(t, s)
    return np.real(ml(-(t**beta) * s, beta, 1.0))


def propagator_wave_pair(beta: float, t, s):
    r"""Wave-type propagators :math:`(E_\beta(-t^\beta s), t E_{\beta, 2}(-t^\beta s))`.

    These multiply the initial position and velocity respectively, for
    :math:`1 < \beta < 2`.
    """
    if not 1 < beta < 2:
        raise DomainError(f"wave propagator requires 1 < beta < 2: {beta}")
    t, s = _check_time_and_spectrum(t, s)
    z = -(t**beta) * s
    return np.real(ml(z, beta, 1.0)), t * np.real(ml(z, beta, 2.0))


def propagator_schrodinger(beta: float, t, s):
    r"""Schrödinger-type propagator :math:`E_\beta(i t^\beta s)` for :math:`0 < \beta < 1`."""
    if not 0 < beta < 1:
        raise DomainError(f"Schrödinger propagator requires 0 < beta < 1: {beta}")
    t, s = _check_time_and_spectrum(t, s)
    return ml(1j * (t**beta) * s, beta, 1.0)


# }}}


# {{{ envelope


def sector_grid(alpha: float, radius: float, samples: int,
                sector: SectorSpec | None = None) -> np.ndarray:
    """Log-radial times angular sample grid in the sector, up to ``radius``.

    Only the upper half is sampled, since :math:`E(\\bar z) = \\overline{E(z)}`.
    """
    if sector is None:
        sector = SectorSpec.default(alpha)
    sector.validate(alpha)

    if sector.mu >= math.pi:
        nangles = 1
    else:
        nangles = max(8, int(math.sqrt(samples) / 2))
    nradii = max(2, math.ceil(samples / nangles))

    radii = np.concatenate([[0.0], np.geomspace(min(1.0e-3, radius), radius, nradii - 1)])
    angles = np.linspace(sector.mu, math.pi, nangles) if nangles > 1 else np.array([math.pi])
    return (radii[:, None] * np.exp(1j * angles[None, :])).ravel()


def envelope_constant(alpha: float, delta: float = 1.0, radius: float = 1.0e4,
                      samples: int = 4096, sector: SectorSpec | None = None) -> float:
    r"""Empirical constant :math:`C` in :math:`|E_{\alpha, \delta}(z)| \le C / (1 + |z|)`.

    The supremum of :math:`(1 + |z|) |E_{\alpha, \delta}(z)|` is taken over
    :func:`sector_grid`. ``sector=SectorSpec(math.pi)`` samples the negative
    real axis only.
    """
    MLParams(alpha, delta)
    if not 0 < alpha < 2:
        raise DomainError(f"envelope requires 0 < alpha < 2: {alpha}")
    if radius <= 0:
        raise DomainError(f"radius must be positive: {radius}")
    if samples < 1000:
        raise DomainError(f"at least 1000 samples are required: {samples}")

    z = sector_grid(alpha, radius, samples, sector)
    scaled = (1 + np.abs(z)) * np.abs(ml(z, alpha, delta))
    i = int(np.argmax(scaled))
    best = float(scaled[i])

    # polish the best sample along its ray, between the neighbouring radii
    r = np.abs(z)
    ray = np.exp(1j * np.angle(z[i])) if r[i] > 0 else -1.0
    radii = np.unique(r)
    j = int(np.searchsorted(radii, r[i]))
    lo, hi = radii[max(j - 1, 0)], radii[min(j + 1, radii.size - 1)]
    if hi > lo:
        def f(rho):
            return -(1 + rho) * abs(complex(ml(rho * ray, alpha, delta)))

        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1.0e-10 * max(hi, 1.0)})
        best = max(best, float(-res.fun))

    return best


# }}}
