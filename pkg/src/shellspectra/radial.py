"""Half-line propagation for partial-wave channels across shell interfaces.

Each channel of the rotationally invariant operator reduces to

    -u'' + (c / r^2) u = E u  on (0, r_max),   c = (nu-1)(nu-3)/4 + l(l+nu-2),

with the interface matrix acting on (u, u') at every shell radius.  This
module owns the propagation machinery: adaptive cell integration, transfer
matrices, Wronskians, Pruefer phase bookkeeping, and eigenvalue counting via
zeros of the Wronskian of two solutions at different energies (relative
oscillation counting).

Conventions
-----------
State vectors are (value, derivative) = (u, u').  The Pruefer angle follows
(u, u') = rho (sin theta, cos theta), which makes theta increase through
multiples of pi at each simple zero of u (Sturm orientation) and gives the
phase equation theta' = cos^2 theta + (E - c/r^2) sin^2 theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ConfigError,
    DegenerateEndpoint,
    NumericsError,
    PositionMismatch,
    StepFailure,
)
from .interaction import (
    InteractionParams,
    LatticeGeometry,
    StateVector,
    apply_interaction,
    wronskian,
)
from .kronig1d import free_propagator

__all__ = [
    "ChannelSpec",
    "OriginCondition",
    "TransferMatrix",
    "PruferState",
    "origin_start",
    "propagate_cell",
    "transfer",
    "wronskian",
    "prufer_advance",
    "count_wronskian_zeros",
    "locate_eigenvalues",
    "matching_defect",
]

RTOL = 1e-10
ATOL = 1e-12

#: Default start radius as a fraction of the lattice period.
R_MIN_FACTOR = 1e-3


class OriginCondition(Enum):
    """Boundary behaviour selected at r = 0.

    REGULAR_2D: the sqrt(r) branch for (nu, l) = (2, 0), excluding
    sqrt(r) ln r.  DIRICHLET_3D: u(0+) = 0 for (nu, l) = (3, 0).  NONE: any
    other channel, where c > 0 already forces the recessive r^s branch.
    """

    REGULAR_2D = "regular_2d"
    DIRICHLET_3D = "dirichlet_3d"
    NONE = "none"


@dataclass(frozen=True)
class ChannelSpec:
    """Partial-wave channel (space dimension nu, angular momentum l)."""

    nu: int
    l: int

    def __post_init__(self) -> None:
        if int(self.nu) != self.nu or self.nu < 2:
            raise ConfigError(f"space dimension nu must be an integer >= 2, got {self.nu}")
        if int(self.l) != self.l or self.l < 0:
            raise ConfigError(f"angular momentum l must be an integer >= 0, got {self.l}")

    @property
    def c(self) -> float:
        """Centrifugal coefficient (nu-1)(nu-3)/4 + l(l+nu-2)."""
        nu, l = self.nu, self.l
        return (nu - 1) * (nu - 3) / 4.0 + l * (l + nu - 2)

    @property
    def origin_condition(self) -> OriginCondition:
        if (self.nu, self.l) == (2, 0):
            return OriginCondition.REGULAR_2D
        if (self.nu, self.l) == (3, 0):
            return OriginCondition.DIRICHLET_3D
        return OriginCondition.NONE

    @property
    def frobenius_exponent(self) -> float:
        """Exponent s of the recessive branch u ~ r^s; s = 1/2 + sqrt(c + 1/4)."""
        return 0.5 + math.sqrt(self.c + 0.25)


@dataclass(frozen=True)
class TransferMatrix:
    """Linear map of (u, u') from radius ``from_pos`` to ``to_pos``."""

    entries: np.ndarray
    energy: float
    from_pos: float
    to_pos: float

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        if abs(other.to_pos - self.from_pos) > 1e-9 * max(1.0, abs(self.from_pos)):
            raise PositionMismatch(
                f"cannot chain transfer ending at {other.to_pos} into one starting at {self.from_pos}"
            )
        return TransferMatrix(self.entries @ other.entries, self.energy, other.from_pos, self.to_pos)

    def apply(self, f: StateVector) -> StateVector:
        if abs(f.position - self.from_pos) > 1e-9 * max(1.0, abs(self.from_pos)):
            raise PositionMismatch(
                f"state at {f.position}, transfer starts at {self.from_pos}"
            )
        u, v = self.entries @ (f.value, f.derivative)
        return StateVector(float(u), float(v), self.to_pos)


def _det_check(
    m: np.ndarray, context: str, fro2: float | None = None, n_factors: int = 1
) -> None:
    """Unimodularity test, widened where the naive 1e-9 bound would only
    measure float cancellation, not real drift: in proportion to the worst
    intermediate norm^2, and with the number of composed factors (each
    integrated segment carries its own ~1e-11 det error at the working
    tolerances)."""
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if fro2 is None:
        fro2 = float(np.sum(np.abs(m) ** 2))
    tol = max(1e-9, 5e-11 * n_factors) * max(1.0, 1e-6 * fro2)
    if abs(det - 1.0) > tol:
        raise NumericsError(f"{context}: determinant off unity by {abs(det - 1.0):.3e}")


def _inv2(m: np.ndarray) -> np.ndarray:
    """Inverse of a det-1 2x2 matrix (adjugate; no division)."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=m.dtype)


# ---------------------------------------------------------------------------
# batched segment integrator

def _integrate_stack(
    cs: np.ndarray,
    es: np.ndarray,
    starts: np.ndarray,
    length: float,
    y0: np.ndarray,
    n_samples: int = 0,
):
    """Integrate ``u'' = (c/r^2 - E) u`` for a stack of independent blocks.

    Block ``b`` lives on the radii ``starts[b] + sign(length) * t`` with
    ``t in [0, |length|]``; all blocks share the parameter range, which is
    what lets one adaptive solve cover a whole sweep (many energies, or many
    cells of equal width) at once.

    Parameters
    ----------
    cs, es, starts : arrays of shape (B,)
        Centrifugal coefficient, energy, start radius per block.
    length : float
        Signed propagation length common to all blocks.
    y0 : array (B, 2) or (B, 2, k)
        Initial (u, u') data; the trailing axis propagates k columns jointly
        (k = 2 gives fundamental matrices).
    n_samples : int
        If positive, also return values at n_samples points spanning the
        segment inclusively.

    Returns
    -------
    y_end : array like y0
    ts : (T,) parameter offsets or None
    ys : (B, 2[, k], T) sampled values or None
    """
    cs = np.asarray(cs, dtype=float)
    es = np.asarray(es)
    starts = np.asarray(starts, dtype=float)
    y0 = np.asarray(y0)
    is_complex = np.iscomplexobj(es) or np.iscomplexobj(y0)
    dtype = complex if is_complex else float
    y0 = y0.astype(dtype)
    big = max(n_samples, 2)

    if length == 0.0:
        ts = np.zeros(big) if n_samples else None
        ys = np.repeat(y0[..., None], big, axis=-1) if n_samples else None
        return y0.copy(), ts, ys

    ll = abs(length)
    sgn = 1.0 if length > 0 else -1.0
    lo_r = np.min(np.minimum(starts, starts + length))
    if lo_r <= 0.0:
        raise PositionMismatch(f"propagation would reach r = {lo_r} <= 0")

    if np.all(cs == 0.0):
        # free channel: exact trig/hyperbolic propagation, no ODE solve
        ts = np.linspace(0.0, ll, big) if n_samples else np.array([ll])
        shape = y0.shape + (len(ts),)
        ys = np.empty(shape, dtype=dtype)
        for b in range(y0.shape[0]):
            e = complex(es[b]) if is_complex else float(es[b])
            for j, t in enumerate(ts):
                f = free_propagator(e, sgn * t)
                ys[b, ..., j] = f.astype(dtype) @ y0[b]
        y_end = ys[..., -1].copy()
        return (y_end, ts, ys) if n_samples else (y_end, None, None)

    blocks = y0.shape[0]
    flat_len = y0.size
    cols = y0.reshape(blocks, 2, -1).shape[2]

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        r = starts + sgn * t
        q = cs / (r * r) - es
        ym = y.reshape(blocks, 2, cols)
        out = np.empty_like(ym)
        out[:, 0, :] = sgn * ym[:, 1, :]
        out[:, 1, :] = sgn * q[:, None] * ym[:, 0, :]
        return out.reshape(flat_len)

    t_eval = np.linspace(0.0, ll, big) if n_samples else None
    sol = solve_ivp(
        rhs,
        (0.0, ll),
        y0.reshape(flat_len),
        method="DOP853",
        rtol=RTOL,
        atol=ATOL,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        r_fail = starts[0] + sgn * (sol.t[-1] if len(sol.t) else 0.0)
        raise StepFailure(f"integrator failed near r = {r_fail:.6g}: {sol.message}")
    ys = sol.y.reshape(y0.shape + (sol.y.shape[1],))
    y_end = ys[..., -1].copy()
    if n_samples:
        return y_end, sol.t, ys
    return y_end, None, None


def origin_start(ch: ChannelSpec, e: float, r_min: float) -> StateVector:
    """Recessive-branch data at a small start radius.

    Uses the series u = r^s (1 + a r^2 + b r^4) of the branch selected by the
    origin condition, with a = -E/(4s+2) and b = E^2/((4s+2)(8s+12)); the
    truncation error is O((E r^2)^3) relative, negligible at the default
    r_min = 1e-3 d.
    """
    if r_min <= 0.0:
        raise PositionMismatch(f"start radius must be positive, got {r_min}")
    s = ch.frobenius_exponent
    a = -e / (4.0 * s + 2.0)
    b = e * e / ((4.0 * s + 2.0) * (8.0 * s + 12.0))
    r2 = r_min * r_min
    val = r_min**s * (1.0 + a * r2 + b * r2 * r2)
    der = r_min ** (s - 1.0) * (s + a * (s + 2.0) * r2 + b * (s + 4.0) * r2 * r2)
    return StateVector(value=float(val), derivative=float(der), position=float(r_min))


def propagate_cell(
    ch: ChannelSpec, e: float, start: float, stop: float, f: StateVector
) -> StateVector:
    """Propagate boundary data through a shell-free interval.

    The caller guarantees no interaction site lies strictly inside
    (start, stop); this routine only solves the smooth channel ODE.  For
    c = 0 the exact free propagator is used instead of the integrator.
    """
    if not (0.0 < start < stop):
        raise PositionMismatch(f"need 0 < start < stop, got ({start}, {stop})")
    if abs(f.position - start) > 1e-9 * max(1.0, abs(start)):
        raise PositionMismatch(f"state sits at {f.position}, not at start = {start}")
    if ch.c == 0.0:
        m = free_propagator(e, stop - start)
        u, v = m @ (f.value, f.derivative)
        return StateVector(float(u), float(v), float(stop))
    y_end, _, _ = _integrate_stack(
        np.array([ch.c]),
        np.array([e]),
        np.array([start]),
        stop - start,
        np.array([[f.value, f.derivative]]),
    )
    return StateVector(float(y_end[0, 0]), float(y_end[0, 1]), float(stop))


def transfer(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    x0: float,
    x1: float,
) -> TransferMatrix:
    """Transfer matrix across (x0, x1] including every shell inside.

    Composes shell-free fundamental matrices with the interface matrix at
    each site in the half-open window; unimodularity is verified on the
    result.
    """
    if not (0.0 < x0 < x1):
        raise PositionMismatch(f"need 0 < x0 < x1, got ({x0}, {x1})")
    sites = geom.sites_in(x0, x1)
    lam = p.matrix()
    m = np.eye(2)
    pos = x0
    peak_fro2 = 2.0
    stops = list(sites) + ([x1] if (len(sites) == 0 or sites[-1] < x1) else [])
    for stop in stops:
        if stop > pos:
            if ch.c == 0.0:
                seg = free_propagator(e, stop - pos)
            else:
                seg, _, _ = _integrate_stack(
                    np.array([ch.c]),
                    np.array([e]),
                    np.array([pos]),
                    stop - pos,
                    np.eye(2)[None, :, :],
                )
                seg = seg[0]
            m = seg @ m
        if len(sites) and stop in sites:
            m = lam @ m
        peak_fro2 = max(peak_fro2, float(np.sum(m * m)))
        pos = stop
    # float cancellation in det scales with the worst intermediate product,
    # not the final one (elliptic composites grow and shrink again)
    _det_check(m, f"transfer({x0:.6g}, {x1:.6g})", fro2=peak_fro2, n_factors=len(stops))
    return TransferMatrix(entries=m, energy=float(e), from_pos=float(x0), to_pos=float(x1))


# ---------------------------------------------------------------------------
# Pruefer phase

@dataclass(frozen=True)
class PruferState:
    """Unwrapped phase theta, log amplitude, and the radius they describe.

    Reconstruction: (u, u') = exp(log_rho) * (sin theta, cos theta), up to an
    overall sign that interface jumps may flip (the mod-pi bookkeeping keeps
    the zero count exact, not the sign).
    """

    theta: float
    log_rho: float
    position: float


def _prufer_jump(p: InteractionParams, theta: float) -> tuple[float, float]:
    """Apply the interface to a unit Pruefer state; return (theta+, dlog_rho).

    The post-jump angle is the unique mod-pi representative with the jump in
    (-pi/2, pi/2] when the value component keeps its sign and in
    (pi/2, 3pi/2] when it flips; a numerically vanished value (|u| below
    1e-12) defers to the derivative's sign.
    """
    v = np.array([math.sin(theta), math.cos(theta)])
    w = p.matrix() @ v
    norm = float(np.hypot(w[0], w[1]))
    if norm == 0.0:
        raise NumericsError("interface annihilated the state (should be impossible, det = 1)")

    def eff_sign(vec: np.ndarray) -> float:
        if abs(vec[0]) > 1e-12 * float(np.hypot(vec[0], vec[1])):
            return math.copysign(1.0, vec[0])
        return math.copysign(1.0, vec[1])

    flip = eff_sign(v) * eff_sign(w) < 0
    principal = math.atan2(w[0], w[1])
    base = theta + (0.5 * math.pi if flip else -0.5 * math.pi)
    theta_new = principal + math.pi * (math.floor((base - principal) / math.pi) + 1.0)
    return theta_new, math.log(norm)


def prufer_advance(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    state: PruferState,
    to: float,
    trace_per_cell: int = 0,
):
    """Advance the Pruefer phase from ``state.position`` to ``to``.

    Integrates theta' = cos^2 theta + (E - c/r^2) sin^2 theta and
    (log rho)' = (1 + c/r^2 - E) sin theta cos theta between shells and
    applies the mod-pi jump rule at each site.  With ``trace_per_cell > 0``
    also returns arrays (radii, thetas, log_rhos) sampled along the way.
    """
    if to <= state.position:
        raise PositionMismatch(f"target {to} not beyond current position {state.position}")
    c = ch.c
    theta, logr = state.theta, state.log_rho
    pos = state.position
    sites = geom.sites_in(pos, to)
    rs_acc, th_acc, lr_acc = [pos], [theta], [logr]

    def rhs(r: float, y: np.ndarray) -> np.ndarray:
        sn, cn = math.sin(y[0]), math.cos(y[0])
        w = c / (r * r)
        return np.array([cn * cn + (e - w) * sn * sn, (1.0 + w - e) * sn * cn])

    stops = list(sites) + ([to] if (len(sites) == 0 or sites[-1] < to) else [])
    for stop in stops:
        if stop > pos:
            t_eval = (
                np.linspace(pos, stop, trace_per_cell + 1)[1:] if trace_per_cell else None
            )
            sol = solve_ivp(
                rhs,
                (pos, stop),
                np.array([theta, logr]),
                method="DOP853",
                rtol=RTOL,
                atol=ATOL,
                t_eval=t_eval,
            )
            if not sol.success:
                raise StepFailure(f"phase integration failed near r = {sol.t[-1]:.6g}")
            theta, logr = float(sol.y[0, -1]), float(sol.y[1, -1])
            if trace_per_cell:
                rs_acc.extend(sol.t.tolist())
                th_acc.extend(sol.y[0].tolist())
                lr_acc.extend(sol.y[1].tolist())
        if len(sites) and stop in sites:
            theta, dlog = _prufer_jump(p, theta)
            logr += dlog
            if trace_per_cell:
                rs_acc.append(stop)
                th_acc.append(theta)
                lr_acc.append(logr)
        pos = stop
    out = PruferState(theta=theta, log_rho=logr, position=float(to))
    if trace_per_cell:
        return out, (np.array(rs_acc), np.array(th_acc), np.array(lr_acc))
    return out


# ---------------------------------------------------------------------------
# two-energy Wronskian machinery

def _domain_boundaries(
    geom: LatticeGeometry, r_min: float, r_max: float
) -> np.ndarray:
    sites = geom.sites_in(r_min, r_max)
    sites = sites[sites < r_max - 1e-12 * max(1.0, r_max)]
    return np.concatenate(([r_min], sites, [r_max]))


def _renorm(y: np.ndarray, logs: np.ndarray) -> None:
    """Scale each block of (B, 2) down to unit max-norm, in place."""
    scale = np.maximum(np.max(np.abs(y), axis=1), 1e-300)
    y /= scale[:, None]
    logs += np.log(scale)


def _sweep_samples(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    es: np.ndarray,
    boundaries: np.ndarray,
    forward: bool,
    y_start: np.ndarray,
    samples_per_cell: int,
):
    """Propagate B solutions across all segments, collecting samples.

    Returns (vals, logs) where vals is a list over segments of arrays
    (B, 2, T) in ascending radius order and logs the matching (B,) log
    scale factors per segment.  Interface jumps apply between segments
    (forward: Lambda after a segment; backward: Lambda^{-1} before the next
    one down), so each segment's samples are one-sided limits at its ends.
    """
    es = np.asarray(es)
    B = len(es)
    cs = np.full(B, ch.c)
    lam = p.matrix()
    lam_inv = _inv2(lam)
    n_seg = len(boundaries) - 1
    y = np.array(y_start, dtype=complex if np.iscomplexobj(es) else float)
    logs = np.zeros(B)
    vals: list[np.ndarray] = [None] * n_seg  # type: ignore[list-item]
    seg_logs: list[np.ndarray] = [None] * n_seg  # type: ignore[list-item]

    order = range(n_seg) if forward else range(n_seg - 1, -1, -1)
    for k in order:
        a, b = boundaries[k], boundaries[k + 1]
        start, length = (a, b - a) if forward else (b, a - b)
        y_end, _, ys = _integrate_stack(
            cs, es, np.full(B, start), length, y, n_samples=samples_per_cell
        )
        vals[k] = ys if forward else ys[..., ::-1]
        seg_logs[k] = logs.copy()
        y = y_end
        if forward and k < n_seg - 1:
            y = np.einsum("ij,bj->bi", lam, y)
        elif not forward and k > 0:
            y = np.einsum("ij,bj->bi", lam_inv, y)
        _renorm(y, logs)
    return vals, seg_logs, y, logs


def _count_from_samples(w_segments, rel_tol: float = 1e-9):
    """Count sign changes of W across the sampled trace of one block.

    w_segments: list of (T,) arrays (per segment, ascending radius; each
    segment carries its own positive scale factor, which cannot affect
    signs).  Samples below rel_tol of their segment's peak are treated as
    sign-indeterminate and skipped: near an eigenvalue of the truncated
    problem the wall solution turns regular at the origin and W legitimately
    dips under the noise floor there, and counting a noise sign would
    produce spurious crossings.  A genuine crossing is still seen as a sign
    difference between the confident samples on either side of it.
    """
    count = 0
    prev_sign = 0.0
    for seg in w_segments:
        peak = float(np.max(np.abs(seg)))
        if peak == 0.0:
            raise DegenerateEndpoint(
                "Wronskian trace vanished over a whole segment; the two "
                "boundary solutions are not distinguished at these energies"
            )
        floor = rel_tol * peak
        for wv in seg:
            if abs(wv) <= floor:
                continue
            s = math.copysign(1.0, wv)
            if prev_sign != 0.0 and s != prev_sign:
                count += 1
            prev_sign = s
    return count


def _count_batch(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e1s: np.ndarray,
    e2s: np.ndarray,
    domain: tuple[float, float],
    samples_per_cell: int = 12,
):
    """Wronskian-zero counts for paired energy lists (vectorized sweeps)."""
    r_min, r_max = domain
    boundaries = _domain_boundaries(geom, r_min, r_max)
    e1s = np.asarray(e1s, dtype=float)
    e2s = np.asarray(e2s, dtype=float)
    y1 = np.array(
        [
            (lambda sv: [sv.value, sv.derivative])(origin_start(ch, e, r_min))
            for e in e1s
        ]
    )
    norms = np.max(np.abs(y1), axis=1)
    y1 /= norms[:, None]
    v1, _, _, _ = _sweep_samples(ch, p, geom, e1s, boundaries, True, y1, samples_per_cell)
    y2 = np.tile([0.0, 1.0], (len(e2s), 1))
    v2, _, _, _ = _sweep_samples(ch, p, geom, e2s, boundaries, False, y2, samples_per_cell)
    counts = np.empty(len(e1s), dtype=int)
    for b in range(len(e1s)):
        w_segments = [
            v1[k][b, 0, :] * v2[k][b, 1, :] - v1[k][b, 1, :] * v2[k][b, 0, :]
            for k in range(len(v1))
        ]
        counts[b] = _count_from_samples(w_segments)
    return counts


def count_wronskian_zeros(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e1: float,
    e2: float,
    domain: tuple[float, float] | None = None,
    bc: OriginCondition | None = None,
    samples_per_cell: int = 12,
) -> int:
    """Number of eigenvalues of the truncated channel operator in (e1, e2).

    Builds u1 at e1 from the origin condition and u2 at e2 from the
    Dirichlet condition at the outer wall, samples their Wronskian densely
    (including one-sided limits at every shell, across which it is
    continuous because the interface matrix is unimodular), and counts sign
    changes.  Valid for windows in spectral gaps or below the spectrum of
    the underlying periodic problem; inside bands the boundary solutions
    stop being distinguished and the count is not meaningful.

    Raises
    ------
    DegenerateEndpoint
        If the Wronskian trace vanishes over a whole segment, i.e. the two
        boundary solutions fail to be distinguished anywhere in it.
    """
    if not e1 < e2:
        raise ConfigError(f"need e1 < e2, got ({e1}, {e2})")
    if bc is not None and bc != ch.origin_condition:
        raise ConfigError(
            f"channel (nu={ch.nu}, l={ch.l}) implies origin condition "
            f"{ch.origin_condition.value}, got {bc.value}"
        )
    if domain is None:
        domain = (R_MIN_FACTOR * geom.d, geom.r_max_default())
    counts = _count_batch(ch, p, geom, np.array([e1]), np.array([e2]), domain, samples_per_cell)
    return int(counts[0])


def matching_defect(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    domain: tuple[float, float],
) -> float:
    """Normalized Wronskian of the left and right boundary solutions at e.

    Shoots from the origin condition up and from the Dirichlet wall down to
    a shell-free meeting radius; the Wronskian of the two, scaled by the
    product of their norms, vanishes exactly at eigenvalues of the
    truncated operator and is the quantity a root refiner should drive to
    zero.
    """
    r_min, r_max = domain
    boundaries = _domain_boundaries(geom, r_min, r_max)
    mid_idx = len(boundaries) // 2
    meet = 0.5 * (boundaries[mid_idx - 1] + boundaries[mid_idx])

    es = np.array([e])
    cs = np.array([ch.c])
    lam = p.matrix()
    lam_inv = _inv2(lam)

    sv = origin_start(ch, e, r_min)
    y = np.array([[sv.value, sv.derivative]])
    logs = np.zeros(1)
    _renorm(y, logs)
    for k in range(mid_idx - 1):
        a, b = boundaries[k], boundaries[k + 1]
        y, _, _ = _integrate_stack(cs, es, np.array([a]), b - a, y)
        y = np.einsum("ij,bj->bi", lam, y)
        _renorm(y, logs)
    a = boundaries[mid_idx - 1]
    y, _, _ = _integrate_stack(cs, es, np.array([a]), meet - a, y)
    left = y[0]

    y = np.array([[0.0, 1.0]])
    logs = np.zeros(1)
    for k in range(len(boundaries) - 2, mid_idx - 1, -1):
        a, b = boundaries[k], boundaries[k + 1]
        y, _, _ = _integrate_stack(cs, es, np.array([b]), a - b, y)
        if k > mid_idx - 1:
            y = np.einsum("ij,bj->bi", lam_inv, y)
            _renorm(y, logs)
    b = boundaries[mid_idx]
    y, _, _ = _integrate_stack(cs, es, np.array([b]), meet - b, y)
    right = y[0]

    w = left[0] * right[1] - left[1] * right[0]
    scale = float(np.hypot(left[0], left[1]) * np.hypot(right[0], right[1]))
    if scale == 0.0:
        raise DegenerateEndpoint("boundary solution vanished at the meeting radius")
    return float(w / scale)


def locate_eigenvalues(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    window: tuple[float, float],
    domain: tuple[float, float] | None = None,
    rel_tol: float = 1e-8,
    samples_per_cell: int = 12,
) -> list[float]:
    """All eigenvalues of the truncated channel operator inside a window.

    Counts Wronskian zeros over (lo, hi), then refines each eigenvalue by
    synchronized bisection on the count function: every bisection level
    evaluates all pending midpoints in one vectorized sweep, so the cost is
    set by the number of levels, not the number of eigenvalues.  The origin
    solution is pinned at the window bottom throughout, so its forward
    sweep is computed once and reused at every level.
    """
    lo, hi = window
    if not lo < hi:
        raise ConfigError(f"need lo < hi, got ({lo}, {hi})")
    if domain is None:
        domain = (R_MIN_FACTOR * geom.d, geom.r_max_default())
    boundaries = _domain_boundaries(geom, *domain)
    sv = origin_start(ch, lo, domain[0])
    y1 = np.array([[sv.value, sv.derivative]])
    y1 /= np.max(np.abs(y1))
    v1, _, _, _ = _sweep_samples(
        ch, p, geom, np.array([lo]), boundaries, True, y1, samples_per_cell
    )

    def counts_vs(e2s: np.ndarray) -> np.ndarray:
        y2 = np.tile([0.0, 1.0], (len(e2s), 1))
        v2, _, _, _ = _sweep_samples(
            ch, p, geom, e2s, boundaries, False, y2, samples_per_cell
        )
        out = np.empty(len(e2s), dtype=int)
        for j in range(len(e2s)):
            w_segments = [
                v1[k][0, 0, :] * v2[k][j, 1, :] - v1[k][0, 1, :] * v2[k][j, 0, :]
                for k in range(len(v1))
            ]
            out[j] = _count_from_samples(w_segments)
        return out

    total = int(counts_vs(np.array([hi]))[0])
    if total == 0:
        return []
    # bracket i-th eigenvalue (1-based) by count(lo, x) jumping i-1 -> i
    los = np.full(total, lo)
    his = np.full(total, hi)
    tol = rel_tol * max(1.0, abs(lo), abs(hi))
    while True:
        pending = np.where(his - los > tol)[0]
        if len(pending) == 0:
            break
        mids = 0.5 * (los[pending] + his[pending])
        counts = counts_vs(mids)
        for j, i in enumerate(pending):
            if counts[j] >= i + 1:
                his[i] = mids[j]
            else:
                los[i] = mids[j]
    return [float(0.5 * (a + b)) for a, b in zip(los, his)]
