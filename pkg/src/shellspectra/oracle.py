"""Brute-force finite-difference cross-checks for the shell operators.

Everything else in this package reaches eigenvalues through transfer
matrices and oscillation counts.  This module goes the other way: assemble
the operator as a (mostly tridiagonal) matrix on a uniform grid, hand it to
a dense or banded eigensolver, and let the two roads disagree loudly if one
of them is wrong.  Accuracy is O(h^2) per grid, improved by Richardson
extrapolation over a pair of grids; the point is independence, not speed.

The interface condition at a shell is encoded by ghost-point elimination.
Shells are placed midway between two adjacent nodes (which forces the
number of nodes per lattice period to be odd); the two one-sided limits of
(u, u') at the shell are formed from the real node values and one ghost
value on each side, the jump condition is solved for the ghosts, and the
ghosts are substituted back into the three-point stencils of the two
adjacent rows.  For beta != 0 the resulting rows are not symmetric; the
eigensolver path then goes through a similarity rebalancing when the
sub/super products stay positive and through a dense general solver when
they do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, eigh, eigh_tridiagonal

from .errors import ConfigError, ConvergenceFailure, GridMisaligned, NumericsError
from .interaction import InteractionParams, LatticeGeometry
from .radial import ChannelSpec

_ALIGN_TOL = 1e-9


def _cells_per_period(geom: LatticeGeometry, grid_step: float) -> int:
    m = geom.d / grid_step
    m_int = round(m)
    if m_int < 3 or abs(m - m_int) > _ALIGN_TOL * m:
        raise GridMisaligned(
            f"grid step {grid_step!r} must divide the period {geom.d!r} "
            f"an integral number of times (got d/h = {m!r})"
        )
    if m_int % 2 == 0:
        raise GridMisaligned(
            f"d/h = {m_int} is even, which puts shells on grid nodes; "
            "an odd divisor places them midway between nodes"
        )
    return m_int


def _ghost_coeffs(alpha: float, beta: float, gamma: float, delta: float, h: float):
    """Coefficients expressing the two ghost values through real nodes.

    With u_L, u_R the node values adjacent to a shell, the eliminated
    ghosts are g_R = cA*u_L + cB*u_R (left solution continued rightward)
    and g_L = eA*u_L + eB*u_R (right solution continued leftward).
    """
    s = 0.5 * alpha * h
    t = 2.0 * beta / h
    den = gamma + delta + s + t
    if abs(den) < 1e-12 * (abs(gamma) + abs(delta) + abs(s) + abs(t) + 1.0):
        raise NumericsError(
            "ghost elimination is singular at this grid step; perturb h"
        )
    c_a = (delta - gamma - s + t) / den
    c_b = 2.0 / den
    e_a = (delta - s) - (delta + s) * c_a
    e_b = 1.0 - (delta + s) * c_b
    return c_a, c_b, e_a, e_b


@dataclass
class DiscretizedOperator:
    """A shell operator assembled on a uniform grid.

    For ``bc = "dirichlet"`` the matrix is tridiagonal over the interior
    nodes and stored as three arrays; wrapped boundary conditions
    ("periodic"/"antiperiodic", 1D only) add corner entries and are solved
    densely.  ``channel`` is None for the 1D lattice operator.
    """

    grid_step: float
    r_min: float
    r_max: float
    channel: ChannelSpec | None
    bc: str
    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray
    wrap_sign: float = 0.0  # 0 = hard walls, +1 periodic, -1 antiperiodic
    node_positions: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def size(self) -> int:
        return len(self.diag)

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.sub, self.sup, rtol=1e-12, atol=0.0))

    def dense(self) -> np.ndarray:
        n = self.size
        a = np.zeros((n, n))
        np.fill_diagonal(a, self.diag)
        a[np.arange(1, n), np.arange(n - 1)] = self.sub
        a[np.arange(n - 1), np.arange(1, n)] = self.sup
        if self.wrap_sign != 0.0:
            a[0, n - 1] += self.wrap_sign * self._wrap_sub
            a[n - 1, 0] += self.wrap_sign * self._wrap_sup
        return a

    # populated by discretize for wrapped operators
    _wrap_sub: float = field(default=0.0, repr=False)
    _wrap_sup: float = field(default=0.0, repr=False)

    def _all_eigenvalues(self) -> np.ndarray:
        if self.wrap_sign == 0.0 and self.is_symmetric():
            return eigh_tridiagonal(self.diag, self.sub, eigvals_only=True)
        if self.wrap_sign == 0.0:
            prod = self.sub * self.sup
            if np.all(prod > 0.0):
                # a diagonal similarity turns this into a symmetric
                # tridiagonal with off-diagonals sqrt(sub*sup); the
                # characteristic polynomial only sees the products
                return eigh_tridiagonal(self.diag, np.sqrt(prod), eigvals_only=True)
            return self._dense_eigenvalues()
        a = self.dense()
        if np.allclose(a, a.T, rtol=1e-12, atol=0.0):
            return eigh(a, eigvals_only=True)
        return self._dense_eigenvalues()

    def _dense_eigenvalues(self) -> np.ndarray:
        vals = eig(self.dense(), right=False)
        scale = float(np.max(np.abs(vals))) or 1.0
        bad = np.abs(vals.imag) > 1e-8 * scale
        if np.any(bad):
            raise ConvergenceFailure(
                f"{int(bad.sum())} eigenvalues came out complex (worst "
                f"imaginary part {np.max(np.abs(vals.imag)):.3e}); the "
                "interface rows made the operator non-real-diagonalizable"
            )
        return np.sort(vals.real)

    def lowest_eigenvalues(self, k: int) -> list[float]:
        """The k smallest eigenvalues, ascending."""
        if k < 1:
            raise ConfigError(f"need k >= 1, got {k}")
        if self.wrap_sign == 0.0 and self.is_symmetric():
            vals = eigh_tridiagonal(
                self.diag, self.sub, select="i", select_range=(0, k - 1)
            )[0]
            return [float(v) for v in vals]
        return [float(v) for v in self._all_eigenvalues()[:k]]

    def eigenvalues_in(self, lo: float, hi: float) -> list[float]:
        """All eigenvalues in the open window (lo, hi), ascending."""
        if not lo < hi:
            raise ConfigError(f"need lo < hi, got ({lo}, {hi})")
        vals = self._all_eigenvalues()
        return [float(v) for v in vals if lo < v < hi]

    def count_below(self, e: float) -> int:
        return int(np.count_nonzero(self._all_eigenvalues() < e))


def _shell_rows(
    positions: np.ndarray, shells: np.ndarray, h: float
) -> list[int]:
    """Index of the node just left of each shell; checks the midway rule."""
    rows = []
    for s in shells:
        j = round((s - positions[0]) / h - 0.5)
        if j < 0 or j + 1 >= len(positions):
            raise GridMisaligned(
                f"shell at {s!r} has no interior node pair inside the domain"
            )
        mid = 0.5 * (positions[j] + positions[j + 1])
        if abs(mid - s) > _ALIGN_TOL * max(1.0, abs(s)):
            raise GridMisaligned(
                f"shell at {s!r} is not midway between nodes "
                f"({positions[j]!r}, {positions[j + 1]!r})"
            )
        rows.append(j)
    return rows


def discretize(
    ch: ChannelSpec | None,
    p: InteractionParams,
    geom: LatticeGeometry,
    grid_step: float,
    domain: tuple[float, float],
    bc: str = "dirichlet",
) -> DiscretizedOperator:
    """Assemble the shell operator on a uniform grid over ``domain``.

    Parameters
    ----------
    ch : ChannelSpec or None
        None builds the 1D lattice operator (zero potential); a channel
        adds the centrifugal diagonal c/r^2 and requires domain[0] = 0 so
        the hard wall at the origin stands in for the regular condition.
    bc : str
        "dirichlet" (default) clamps both ends; "periodic"/"antiperiodic"
        wrap the 1D operator around (refused for radial channels).

    Raises
    ------
    GridMisaligned
        If the step does not divide the period an odd number of times, the
        domain ends do not land on nodes, or a shell misses the midpoint
        rule.
    """
    if bc not in ("dirichlet", "periodic", "antiperiodic"):
        raise ConfigError(f"unknown boundary condition {bc!r}")
    if ch is not None and bc != "dirichlet":
        raise ConfigError("wrapped boundary conditions only make sense in 1D")
    x0, x1 = float(domain[0]), float(domain[1])
    if not x0 < x1:
        raise ConfigError(f"empty domain {domain!r}")
    if ch is not None and x0 != 0.0:
        raise ConfigError(
            "radial discretization anchors the wall at the origin; "
            f"got domain start {x0!r}"
        )
    h = float(grid_step)
    _cells_per_period(geom, h)
    n_cells = (x1 - x0) / h
    n = round(n_cells)
    if abs(n_cells - n) > _ALIGN_TOL * n_cells or n < 4:
        raise GridMisaligned(
            f"domain length {x1 - x0!r} is not an integral number of steps"
        )

    if ch is not None:
        return _assemble_radial(ch, p, geom, h, n, x1)

    wrapped = bc != "dirichlet"
    if wrapped:
        # unknowns at nodes 0..n-1, node n identified with node 0
        positions = x0 + h * np.arange(n)
        size = n
        shells = geom.sites_in(x0 - 0.25 * h, x1 - 0.25 * h)
    else:
        # unknowns at interior nodes only
        positions = x0 + h * np.arange(1, n)
        size = n - 1
        shells = geom.sites_in(x0, x1)
        shells = shells[shells < x1 - 0.25 * h]

    inv_h2 = 1.0 / (h * h)
    diag = np.full(size, 2.0 * inv_h2)
    sub = np.full(size - 1, -inv_h2)
    sup = np.full(size - 1, -inv_h2)

    c_a, c_b, e_a, e_b = _ghost_coeffs(p.alpha, p.beta, p.gamma, p.delta, h)
    for j in _shell_rows(positions, shells, h):
        diag[j] = (2.0 - c_a) * inv_h2
        diag[j + 1] = (2.0 - e_b) * inv_h2
        sup[j] = -c_b * inv_h2
        sub[j] = -e_a * inv_h2
    opr = DiscretizedOperator(
        grid_step=h,
        r_min=x0,
        r_max=x1,
        channel=None,
        bc=bc,
        diag=diag,
        sub=sub,
        sup=sup,
        wrap_sign=0.0 if not wrapped else (1.0 if bc == "periodic" else -1.0),
        node_positions=positions,
    )
    opr._wrap_sub = -inv_h2
    opr._wrap_sup = -inv_h2
    return opr


def _conjugated_params(p: InteractionParams, s: float, x: float):
    """Interface entries in the power-gauge variables at shell radius x.

    With u = r^s w, the pair (w, w') jumps by S(x)^{-1} Lambda S(x) where
    S(x) = [[x^s, 0], [s x^{s-1}, x^s]]; determinant 1 is preserved.
    """
    lam = p.matrix()
    smat = np.array([[x**s, 0.0], [s * x ** (s - 1.0), x**s]])
    sinv = np.array([[x**-s, 0.0], [-s * x ** (-s - 1.0), x**-s]])
    lt = sinv @ lam @ smat
    return lt[1, 0], lt[0, 1], lt[0, 0], lt[1, 1]  # alpha, beta, gamma, delta


def _assemble_radial(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    h: float,
    n: int,
    r_wall: float,
) -> DiscretizedOperator:
    """Flux-form grid operator for a partial-wave channel on (0, r_wall).

    The naive stencil with a hard wall at r = 0 picks the wrong extension
    of the operator whenever the centrifugal coupling allows two
    square-integrable behaviours at the origin (it visibly misplaces
    eigenvalues for the critical two-dimensional s-wave).  Writing
    u = r^s w with the regular exponent s removes the r^{-2} term exactly:
    -(r^{2s} w')' = E r^{2s} w, with w smooth at 0 and a natural boundary
    there.  A finite-volume discretization of that form, with exact cell
    integrals of the weight and the shell condition conjugated into the
    w-variables, restores plain O(h^2) convergence on every channel.  The
    assembled matrix is the weight-rescaled standard form
    B^{-1/2} A B^{-1/2}, which keeps it banded for the tridiagonal solver.
    """
    s = ch.frobenius_exponent
    # unknowns at nodes 0..n-1 (r = j h); w(r_wall) = 0 clamps the wall
    positions = h * np.arange(n)
    two_s = 2.0 * s
    # face conductances P_{j+1/2} and exact cell masses W_j of r^{2s}
    faces = (h * (np.arange(n) + 0.5)) ** two_s
    cuts = np.empty(n + 1)
    cuts[0] = 0.0
    cuts[1:] = (h * (np.arange(n) + 0.5)) ** (two_s + 1.0)
    mass = (cuts[1:] - cuts[:-1]) / (two_s + 1.0)

    inv_h = 1.0 / h
    diag = np.empty(n)
    diag[0] = faces[0] * inv_h
    diag[1:] = (faces[:-1] + faces[1:]) * inv_h
    sub = -faces[:-1] * inv_h
    sup = sub.copy()

    shells = geom.sites_in(0.0, r_wall)
    shells = shells[shells < r_wall - 0.25 * h]
    for j, x in zip(_shell_rows(positions, shells, h), shells):
        c_a, c_b, e_a, e_b = _ghost_coeffs(*_conjugated_params(p, s, x), h)
        p_x = faces[j]  # the shell sits exactly on the face between j, j+1
        p_lo = faces[j - 1] if j > 0 else 0.0
        p_hi = faces[j + 1]
        diag[j] = (p_x * (1.0 - c_a) + p_lo) * inv_h
        diag[j + 1] = (p_hi + p_x * (1.0 - e_b)) * inv_h
        sup[j] = -p_x * c_b * inv_h
        sub[j] = -p_x * e_a * inv_h

    scale = 1.0 / np.sqrt(mass)
    diag *= scale * scale
    sub *= scale[1:] * scale[:-1]
    sup *= scale[:-1] * scale[1:]
    return DiscretizedOperator(
        grid_step=h,
        r_min=0.0,
        r_max=r_wall,
        channel=ch,
        bc="dirichlet",
        diag=diag,
        sub=sub,
        sup=sup,
        wrap_sign=0.0,
        node_positions=positions,
    )


def refine_eigenvalues(
    ch: ChannelSpec | None,
    p: InteractionParams,
    geom: LatticeGeometry,
    domain: tuple[float, float],
    k: int,
    base_cells: int = 65,
    bc: str = "dirichlet",
):
    """Richardson-extrapolated lowest eigenvalues over a grid pair.

    Builds the operator at d/m and d/(2m+1) (both odd divisors, step ratio
    close to 2) and combines the k lowest eigenvalues with the exact-ratio
    O(h^2) elimination formula.  Returns (extrapolated, coarse, fine).
    """
    m1 = base_cells
    m2 = 2 * base_cells + 1
    h1 = geom.d / m1
    h2 = geom.d / m2
    e1 = np.array(discretize(ch, p, geom, h1, domain, bc).lowest_eigenvalues(k))
    e2 = np.array(discretize(ch, p, geom, h2, domain, bc).lowest_eigenvalues(k))
    rho2 = (h1 / h2) ** 2
    extrap = (rho2 * e2 - e1) / (rho2 - 1.0)
    return extrap, e1, e2
