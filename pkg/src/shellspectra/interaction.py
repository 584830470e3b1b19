"""Singular interface interactions on an equidistant family of shells.

A point interaction at radius ``x`` couples the one-sided boundary data of a
wave function through a transfer condition

    (f(x+), f'(x+))^T = e^{i chi} [[gamma, beta], [alpha, delta]] (f(x-), f'(x-))^T

subject to the symplectic constraint ``alpha*beta - gamma*delta = -1``, which
is what makes the underlying operator self-adjoint.  The phase ``chi`` is
isospectral: it never enters any spectral quantity, so the package stores it
but computes with the real matrix throughout.

Three asymptotic families are distinguished by the matrix entries:

* delta type: ``beta = 0``, ``gamma = delta = 1`` -- gap widths approach the
  constant ``2|alpha|/d`` at high energy,
* intermediate type: ``beta = 0``, ``|gamma + delta| > 2`` -- the band/gap
  width ratio approaches ``arcsin(2/|gamma+delta|) / arccos(2/|gamma+delta|)``,
* delta-prime type: ``beta != 0`` -- band widths approach ``8/|beta * d|``.

Everything else (for real entries: exactly ``beta = 0``, ``gamma = delta = -1``)
sits outside the trichotomy and is rejected by :func:`classify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    ConstraintViolation,
    PositionMismatch,
    UnclassifiableInteraction,
)

#: Absolute tolerance on the symplectic constraint alpha*beta - gamma*delta + 1.
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Boundary data ``(u, u')`` of a solution at a given radius.

    This is the object interface matrices act on and cell propagators evolve.

    Attributes
    ----------
    value : float
        Function value ``u``.
    derivative : float
        Radial derivative ``u'``.
    position : float
        Radius (or 1D coordinate) the data belongs to.
    """

    value: float
    derivative: float
    position: float

    def __post_init__(self) -> None:
        for name in ("value", "derivative", "position"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"StateVector.{name} must be finite")
        if self.value == 0.0 and self.derivative == 0.0:
            raise ValueError("StateVector: (value, derivative) = (0, 0) cannot track a solution")

    def as_array(self) -> np.ndarray:
        return np.array([self.value, self.derivative], dtype=float)


@dataclass(frozen=True)
class InteractionParams:
    """Interface coupling constants ``alpha, beta, gamma, delta`` and phase ``chi``.

    Construction validates the symplectic constraint both in scalar form,
    ``|alpha*beta - gamma*delta + 1| <= 1e-12``, and as the matrix identity
    ``Lambda^* sigma_2 Lambda = sigma_2`` with ``Lambda = e^{i chi} Lambda_real``.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    chi: float = 0.0

    def __post_init__(self) -> None:
        vals = (self.alpha, self.beta, self.gamma, self.delta, self.chi)
        if not all(math.isfinite(v) for v in vals):
            raise ConstraintViolation("interaction parameters must be finite")
        defect = self.alpha * self.beta - self.gamma * self.delta + 1.0
        if abs(defect) > CONSTRAINT_TOL:
            raise ConstraintViolation(
                f"alpha*beta - gamma*delta = -1 violated by {defect:.3e}"
            )
        sigma2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])
        lam = np.exp(1j * self.chi) * self.matrix()
        if not np.allclose(lam.conj().T @ sigma2 @ lam, sigma2, rtol=0.0, atol=CONSTRAINT_TOL * 10):
            raise ConstraintViolation("Lambda* sigma_2 Lambda = sigma_2 violated")

    def matrix(self) -> np.ndarray:
        """Real transfer matrix ``[[gamma, beta], [alpha, delta]]`` (chi dropped)."""
        return np.array([[self.gamma, self.beta], [self.alpha, self.delta]], dtype=float)

    def is_free(self) -> bool:
        """True for the identity interface (no interaction at all)."""
        return self.alpha == 0.0 and self.beta == 0.0 and self.gamma == 1.0 and self.delta == 1.0


def make_interaction(
    alpha: float, beta: float, gamma: float, delta: float, chi: float = 0.0
) -> InteractionParams:
    """Validate and build :class:`InteractionParams`.

    Raises
    ------
    ConstraintViolation
        If the symplectic constraint fails beyond 1e-12.
    """
    return InteractionParams(float(alpha), float(beta), float(gamma), float(delta), float(chi))


@dataclass(frozen=True)
class LatticeGeometry:
    """Equidistant shell lattice: shells at ``site(n) = n*d + offset``.

    The canonical offset is ``d/2`` (shells centered in each period cell);
    it is adjustable only because tiny offset perturbations serve as a
    documented fallback when a Floquet basis solution vanishes on a shell.

    Attributes
    ----------
    d : float
        Lattice period, ``d > 0``.
    offset : float
        Position of the first shell; defaults to ``d/2``.
    count_hint : int
        Number of shells a truncated computation should cover (>= 1).
        The default truncation radius is ``(count_hint + 1) * d`` so the
        wall sits mid-cell, never on a shell.
    """

    d: float
    offset: float = field(default=math.nan)
    count_hint: int = 64

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d) and self.d > 0.0):
            raise ConfigError("lattice period d must be positive and finite")
        if math.isnan(self.offset):
            object.__setattr__(self, "offset", 0.5 * self.d)
        if not (0.0 < self.offset <= self.d):
            raise ConfigError("shell offset must lie in (0, d]")
        if int(self.count_hint) != self.count_hint or self.count_hint < 1:
            raise ConfigError("count_hint must be an integer >= 1")

    def site(self, n: int) -> float:
        """Radius of the n-th shell (n = 0, 1, 2, ...)."""
        return n * self.d + self.offset

    def r_max_default(self) -> float:
        return (self.count_hint + 1) * self.d

    def sites_in(self, x0: float, x1: float) -> np.ndarray:
        """Shells with radius in the half-open interval ``(x0, x1]``."""
        if x1 <= x0:
            return np.empty(0, dtype=float)
        n_lo = int(math.ceil((x0 - self.offset) / self.d + 1e-12))
        if self.site(n_lo) <= x0:
            n_lo += 1
        n_lo = max(n_lo, 0)
        n_hi = int(math.floor((x1 - self.offset) / self.d + 1e-12))
        if n_hi < n_lo:
            return np.empty(0, dtype=float)
        return self.offset + self.d * np.arange(n_lo, n_hi + 1, dtype=float)


class InteractionKind(Enum):
    """Trichotomy tag for the high-energy band/gap asymptotics."""

    DELTA = "delta"
    INTERMEDIATE = "intermediate"
    DELTA_PRIME = "delta_prime"


@dataclass(frozen=True)
class InteractionClass:
    """Classification result with its quantitative prediction.

    Attributes
    ----------
    kind : InteractionKind
    predicted_asymptote : float
        Limit of the classified quantity: the gap width ``2|alpha|/d`` for
        delta type, the band-over-gap ratio for intermediate type, the band
        width ``8/|beta*d|`` for delta-prime type.
    mu_exponent : int
        Growth exponent of the adjacent gap/band width ratio, O(k^mu):
        -1, 0, +1 for the three kinds respectively.
    quantity : str
        Which quantity ``predicted_asymptote`` describes.
    """

    kind: InteractionKind
    predicted_asymptote: float
    mu_exponent: int
    quantity: str


def classify(p: InteractionParams, geom: LatticeGeometry) -> InteractionClass:
    """Assign an interaction to its asymptotic family.

    The lattice geometry enters only through the period ``d`` in the
    dimensionful predictions (gap width for delta type, band width for
    delta-prime type).

    Raises
    ------
    UnclassifiableInteraction
        For ``beta = 0`` with ``gamma*delta = 1``, ``|gamma + delta| <= 2``
        and ``(gamma, delta) != (1, 1)``; no asymptotic statement is
        available there.
    """
    if p.beta != 0.0:
        return InteractionClass(
            kind=InteractionKind.DELTA_PRIME,
            predicted_asymptote=8.0 / abs(p.beta * geom.d),
            mu_exponent=+1,
            quantity="band_width",
        )
    # beta = 0 and the constraint force gamma*delta = 1.
    if p.gamma == 1.0 and p.delta == 1.0:
        return InteractionClass(
            kind=InteractionKind.DELTA,
            predicted_asymptote=2.0 * abs(p.alpha) / geom.d,
            mu_exponent=-1,
            quantity="gap_width",
        )
    trace = abs(p.gamma + p.delta)
    if trace > 2.0:
        x = 2.0 / trace
        return InteractionClass(
            kind=InteractionKind.INTERMEDIATE,
            predicted_asymptote=math.asin(x) / math.acos(x),
            mu_exponent=0,
            quantity="band_gap_ratio",
        )
    raise UnclassifiableInteraction(
        f"beta = 0, gamma = {p.gamma}, delta = {p.delta}: outside the "
        "delta / intermediate / delta-prime trichotomy"
    )


def apply_interaction(p: InteractionParams, f: StateVector) -> StateVector:
    """Push boundary data through one interface (chi = 0 convention).

    Returns ``(gamma*u + beta*u', alpha*u + delta*u')`` at the same position.
    The map is linear and preserves the Wronskian of any two states, because
    the interface matrix has determinant one.
    """
    return StateVector(
        value=p.gamma * f.value + p.beta * f.derivative,
        derivative=p.alpha * f.value + p.delta * f.derivative,
        position=f.position,
    )


def wronskian(u: StateVector, v: StateVector) -> float:
    """``W[u, v] = u v' - u' v`` of two states at the same radius.

    Raises
    ------
    PositionMismatch
        If the states do not sit at the same position (within 1e-9 relative).
    """
    if abs(u.position - v.position) > 1e-9 * max(1.0, abs(u.position), abs(v.position)):
        raise PositionMismatch(
            f"Wronskian of states at different radii: {u.position} vs {v.position}"
        )
    return u.value * v.derivative - u.derivative * v.value


# ---------------------------------------------------------------------------
# config-mapping (de)serialization

_PARAM_KEYS = ("alpha", "beta", "gamma", "delta", "chi")


def params_from_mapping(mapping: Mapping[str, object]) -> InteractionParams:
    """Build parameters from a config mapping with decimal-string values.

    Keys ``alpha, beta, gamma, delta`` are required, ``chi`` is optional.
    Values may be strings (as read from a key/value config file) or numbers.
    """
    unknown = set(mapping) - set(_PARAM_KEYS)
    if unknown:
        raise ConstraintViolation(f"unknown interaction keys: {sorted(unknown)}")
    missing = [k for k in _PARAM_KEYS[:4] if k not in mapping]
    if missing:
        raise ConstraintViolation(f"missing interaction keys: {missing}")
    vals = {}
    for key in _PARAM_KEYS:
        if key not in mapping:
            vals[key] = 0.0
            continue
        raw = mapping[key]
        try:
            vals[key] = float(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError) as exc:
            raise ConstraintViolation(f"interaction key {key!r}: not a number: {raw!r}") from exc
    return make_interaction(**vals)


def params_to_mapping(p: InteractionParams) -> dict[str, str]:
    """Serialize to decimal strings; round-trips bit-exactly for finite doubles."""
    return {key: repr(getattr(p, key)) for key in _PARAM_KEYS}
