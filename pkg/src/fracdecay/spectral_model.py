r"""Positive operators reduced to their spectral counting function.

A positive operator :math:`\mathscr{L}` enters the decay estimates only through

.. math::

    N(s) = \tau\big(E_{(0, s)}(\mathscr{L})\big),

the trace of its spectral projection on the open interval :math:`(0, s)`. The
profiles here either list eigenvalues explicitly (counting measure as the
trace) or give :math:`N` in closed form.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Union

import numpy as np

from fracdecay.errors import DomainError


@dataclass(frozen=True)
class Discrete:
    """Finite multiset of nonnegative eigenvalues, stored sorted."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=np.float64).ravel()
        if not np.all(np.isfinite(ev)) or np.any(ev < 0):
            raise DomainError("eigenvalues must be finite and nonnegative")
        object.__setattr__(self, "eigenvalues", tuple(float(x) for x in np.sort(ev)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.eigenvalues, dtype=np.float64)


@dataclass(frozen=True)
class PowerLaw:
    """Analytic counting function ``N(s) = coeff * s**lam``."""

    lam: float
    coeff: float = 1.0

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"exponent must be positive: {self.lam}")
        if not (self.coeff > 0 and math.isfinite(self.coeff)):
            raise DomainError(f"coefficient must be positive: {self.coeff}")


@dataclass(frozen=True)
class Vladimirov:
    r"""Vladimirov operator :math:`\mathfrak{D}^\mu` on the :math:`\rho`-adic numbers.

    Its symbol is :math:`|\xi|_\rho^\mu`, so :math:`N(s)` is the Haar volume of
    the :math:`\rho`-adic ball of radius :math:`s^{1/\mu}`. Balls have radii
    :math:`\rho^k` and volumes equal to their radii, giving a step function.
    """

    rho: int
    mu: float

    def __post_init__(self) -> None:
        if not _is_prime(self.rho):
            raise DomainError(f"rho must be a prime: {self.rho}")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"mu must be positive: {self.mu}")


@dataclass(frozen=True)
class TorusLattice:
    """Laplacian on the flat torus ``(R / 2 pi Z)**dim``: eigenvalues ``|k|**2``.

    Only integer vectors with every component in ``[-cutoff, cutoff]`` are
    enumerated, so counts are exact for ``s <= (cutoff + 1)**2``.
    """

    dim: int
    cutoff: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2: {self.dim}")
        if self.cutoff < 0:
            raise DomainError(f"cutoff must be nonnegative: {self.cutoff}")

    @property
    def array(self) -> np.ndarray:
        return _lattice_eigenvalues(self.dim, self.cutoff)


SpectralProfile = Union[Discrete, PowerLaw, Vladimirov, TorusLattice]


def _is_prime(n) -> bool:
    if not isinstance(n, (int, np.integer)) or n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(int(n)) + 1))


@lru_cache(maxsize=16)
def _lattice_eigenvalues(dim: int, cutoff: int) -> np.ndarray:
    k = np.arange(-cutoff, cutoff + 1, dtype=np.float64) ** 2
    ev = k if dim == 1 else (k[:, None] + k[None, :]).ravel()
    ev = np.sort(ev)
    ev.flags.writeable = False
    return ev


# {{{ counting function


def _count_open(ev: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``#{0 < ev < s}`` for sorted ``ev``."""
    n = np.searchsorted(ev, s, side="left") - np.searchsorted(ev, 0.0, side="right")
    return np.maximum(n, 0)


def _vladimirov_count(rho: int, mu: float, s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    radius = s ** (1.0 / mu)
    # the ball volume underflows together with its radius
    pos = radius > 0
    radius = radius[pos]
    k = np.floor(np.log(radius) / math.log(rho))
    # floor of a floating logarithm can be off by one at exact powers
    k = np.where(float(rho) ** (k + 1) <= radius * (1 + 1e-12), k + 1, k)
    k = np.where(float(rho) ** k > radius * (1 + 1e-12), k - 1, k)
    out[pos] = float(rho) ** k
    return out


def counting_function(profile: SpectralProfile, s):
    r"""Trace of the spectral projection on :math:`(0, s)`.

    For eigenvalue profiles this counts eigenvalues with :math:`0 < \lambda_k < s`
    (with multiplicity; zero modes never count). Accepts scalar or array ``s``.
    """
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any(np.isnan(s_arr)) or np.any(s_arr < 0):
        raise DomainError("counting function requires s >= 0")

    if isinstance(profile, (Discrete, TorusLattice)):
        out = _count_open(profile.array, s_arr)
        return int(out) if out.ndim == 0 else out
    if isinstance(profile, PowerLaw):
        out = profile.coeff * s_arr**profile.lam
    elif isinstance(profile, Vladimirov):
        out = _vladimirov_count(profile.rho, profile.mu, np.atleast_1d(s_arr)).reshape(s_arr.shape)
    else:
        raise TypeError(f"not a spectral profile: {profile!r}")

    return float(out) if out.ndim == 0 else out


def growth_exponent(profile: SpectralProfile) -> float:
    """Exponent ``lam`` with ``N(s) <~ s**lam`` as ``s -> infinity``."""
    if isinstance(profile, PowerLaw):
        return profile.lam
    if isinstance(profile, Vladimirov):
        return 1.0 / profile.mu
    if isinstance(profile, TorusLattice):
        return profile.dim / 2
    raise DomainError("finite spectra have no growth exponent")


def exponent_fit(profile: SpectralProfile, s_min: float, s_max: float,
                 points: int = 64) -> float:
    """Least-squares slope of ``log N(s)`` against ``log s`` on log-spaced samples.

    Samples with ``N(s) = 0`` are dropped.
    """
    if not 0 < s_min < s_max:
        raise DomainError(f"need 0 < s_min < s_max: {s_min}, {s_max}")
    if points < 10:
        raise DomainError(f"at least 10 sample points are required: {points}")

    s = np.geomspace(s_min, s_max, points)
    n = np.asarray(counting_function(profile, s), dtype=np.float64)
    keep = n > 0
    if np.count_nonzero(keep) < 2:
        raise DomainError(f"N(s) vanishes on [{s_min}, {s_max}]")

    slope, _ = np.polyfit(np.log(s[keep]), np.log(n[keep]), 1)
    return float(slope)


# }}}


# {{{ catalog


_CATALOG_ROW = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")

# name -> (number of parameters, exponent from the parameters)
_CATALOG = {
    "euclidean": (1, lambda n: n / 2),
    "compact": (1, lambda q: q / 2),
    "heisenberg": (1, lambda n: n + 1),
    "rockland": (2, lambda q, nu: q / nu),
    "engel": (0, lambda: 3.0),
    "cartan": (0, lambda: 4.5),
    "subcoercive": (2, lambda q, m: q / m),
}


def catalog_profile(row: str) -> SpectralProfile:
    """Counting profile of a named operator from the group catalog.

    ``row`` is one of ``euclidean(n)``, ``compact(Q)``, ``heisenberg(n)``,
    ``rockland(Q, nu)``, ``engel``, ``cartan``, ``subcoercive(Q, m)`` or
    ``vladimirov(rho, mu)``. All but the last are power laws with unit
    coefficient.
    """
    match = _CATALOG_ROW.match(row)
    if match is None:
        raise DomainError(f"cannot parse catalog row: {row!r}")

    name, argstr = match.groups()
    args = [a.strip() for a in argstr.split(",")] if argstr and argstr.strip() else []
    try:
        values = [float(a) for a in args]
    except ValueError:
        raise DomainError(f"non-numeric parameters in {row!r}") from None

    if name == "vladimirov":
        if len(values) != 2 or not values[0].is_integer():
            raise DomainError(f"expected vladimirov(rho, mu): {row!r}")
        return Vladimirov(int(values[0]), values[1])

    if name not in _CATALOG:
        raise DomainError(f"unknown catalog row: {row!r}")

    nargs, exponent = _CATALOG[name]
    if len(values) != nargs:
        raise DomainError(f"{name} takes {nargs} parameter(s): {row!r}")
    if any(v <= 0 for v in values):
        raise DomainError(f"parameters must be positive: {row!r}")

    return PowerLaw(float(exponent(*values)))


CATALOG_ROWS = (
    "euclidean(n)", "compact(Q)", "heisenberg(n)", "rockland(Q,nu)",
    "engel", "cartan", "subcoercive(Q,m)", "vladimirov(rho,mu)",
)


# }}}


# {{{ serialization


def profile_to_row(profile: SpectralProfile) -> list[str]:
    """Flat CSV row ``[variant, key=value, ...]``."""
    if isinstance(profile, Discrete):
        ev = " ".join(repr(x) for x in profile.eigenvalues)
        return ["discrete", f"eigenvalues={ev}"]
    if isinstance(profile, PowerLaw):
        return ["powerlaw", f"lam={profile.lam!r}", f"coeff={profile.coeff!r}"]
    if isinstance(profile, Vladimirov):
        return ["vladimirov", f"rho={profile.rho}", f"mu={profile.mu!r}"]
    if isinstance(profile, TorusLattice):
        return ["torus", f"dim={profile.dim}", f"cutoff={profile.cutoff}"]
    raise TypeError(f"not a spectral profile: {profile!r}")


def profile_from_row(row: Iterable[str]) -> SpectralProfile:
    row = [c.strip() for c in row]
    if not row:
        raise DomainError("empty profile row")

    variant, fields = row[0].lower(), {}
    for cell in row[1:]:
        key, sep, value = cell.partition("=")
        if not sep:
            raise DomainError(f"expected key=value, got {cell!r}")
        fields[key.strip()] = value.strip()

    try:
        if variant == "discrete":
            ev = fields.get("eigenvalues", "")
            return Discrete(tuple(float(x) for x in ev.split()))
        if variant == "powerlaw":
            return PowerLaw(float(fields["lam"]), float(fields.get("coeff", 1.0)))
        if variant == "vladimirov":
            return Vladimirov(int(fields["rho"]), float(fields["mu"]))
        if variant == "torus":
            return TorusLattice(int(fields["dim"]), int(fields["cutoff"]))
    except KeyError as exc:
        raise DomainError(f"missing field {exc} for {variant}") from None

    raise DomainError(f"unknown profile variant: {variant!r}")


def dump_profiles(profiles: Iterable[SpectralProfile], fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    for p in profiles:
        writer.writerow(profile_to_row(p))


def load_profiles(fp: IO[str]) -> list[SpectralProfile]:
    return [profile_from_row(row) for row in csv.reader(fp) if row]


# }}}
