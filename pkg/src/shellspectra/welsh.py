"""Discrete spectrum below the band bottom for the planar shell system.

In two dimensions the s-wave channel carries an attractive -1/(4 r^2)
term, and the lattice of shells turns that weak tail into infinitely many
eigenvalues accumulating at the bottom of the essential spectrum from
below.  The working parts here are: an exact evaluator for the
(anti)periodic solution at the band bottom and its Wronskian companion, a
Kepler-type angular variable whose unbounded decrease witnesses the
infinite family, a per-decade drop test that turns the a-priori statement
into a numerical verdict, and the actual eigenvalue extraction through the
oscillation machinery of the radial module.

Everything is specific to the planar case: the verdicts and eigenvalue
searches below refuse to run for other dimensions, where the centrifugal
term is non-negative and nothing lives below the band bottom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    BasisZero,
    ConfigError,
    ConvergenceFailure,
    StepFailure,
)
from .interaction import InteractionParams, LatticeGeometry
from .kronig1d import ground_state_symmetry, monodromy
from .radial import (
    ATOL,
    R_MIN_FACTOR,
    RTOL,
    ChannelSpec,
    PruferState,
    count_wronskian_zeros,
    matching_defect,
    origin_start,
    prufer_advance,
)
from .spectral_map import _scan_window_with_retries

# the planar s-wave channel is the only one with anything below the bands
_WELSH_CHANNEL = ChannelSpec(2, 0)

DROP_THRESHOLD = 0.1  # rad per decade; below this we suspect a plateau


class PhaseVerdict(Enum):
    UNBOUNDED = "Unbounded"
    PLATEAU_SUSPECTED = "PlateauSuspected"


@dataclass
class FloquetBasis:
    """Band-bottom solution pair with exact period-reduction evaluators.

    ``u0`` is the (anti)periodic solution at the band bottom e0, ``v0`` a
    companion with W[u0, v0] = 1.  Both are represented by their state
    vectors just after the anchor shell plus the one-cell monodromy M; the
    n-cell power reduces exactly to sigma^n (I + n (sigma M - I)) because
    the band-edge monodromy is sigma times a unipotent matrix, so
    evaluation anywhere on the half-line is two trig calls and never
    overflows.
    """

    e0: float
    sigma: float
    anchor: float
    period: float
    y_u: np.ndarray
    y_v: np.ndarray
    nilpotent: np.ndarray
    edge_residual: float
    u_scale: float = 1.0

    def site_state(self, n: int, y0: np.ndarray) -> tuple[float, float]:
        """Exact state just after the n-th shell: sigma^n (I + n N) y0."""
        sgn = 1.0 if (self.sigma > 0 or n % 2 == 0) else -1.0
        a = y0[0] + n * (self.nilpotent[0, 0] * y0[0] + self.nilpotent[0, 1] * y0[1])
        b = y0[1] + n * (self.nilpotent[1, 0] * y0[0] + self.nilpotent[1, 1] * y0[1])
        return sgn * a, sgn * b

    def state(self, y0: np.ndarray, r: float) -> tuple[float, float]:
        """(value, derivative) of the solution with state y0 at the anchor.

        At a shell radius this returns the pre-jump (left) limit: the cell
        index is biased down so that r = s_n reduces to a full propagation
        from s_{n-1}, never to the post-jump data at s_n.
        """
        n = math.floor((r - self.anchor) / self.period - 1e-9)
        t = r - (self.anchor + n * self.period)
        a, b = self.site_state(n, y0)
        e = self.e0
        if e > 0.0:
            k = math.sqrt(e)
            c, s = math.cos(k * t), math.sin(k * t) / k
        elif e < 0.0:
            k = math.sqrt(-e)
            c, s = math.cosh(k * t), math.sinh(k * t) / k
        else:
            c, s = 1.0, t
        return c * a + s * b, -e * s * a + c * b

    def u0(self, r: float) -> float:
        return self.state(self.y_u, r)[0]

    def v0(self, r: float) -> float:
        return self.state(self.y_v, r)[0]

    def wronskian_uv(self, r: float) -> float:
        u, du = self.state(self.y_u, r)
        v, dv = self.state(self.y_v, r)
        return u * dv - du * v


def floquet_basis_at_e0(p: InteractionParams, geom: LatticeGeometry) -> FloquetBasis:
    """Construct the band-bottom basis (u0, v0) with unit Wronskian.

    The state of u0 at the anchor (the first shell, post-jump side) is the
    singular direction of M(e0) -/+ I from the ground-symmetry analysis;
    v0 starts from the perpendicular vector scaled to make W[u0, v0] = 1.
    """
    gs = ground_state_symmetry(p, geom)
    sigma = 1.0 if gs.symmetry == "periodic" else -1.0
    m = monodromy(p, geom, gs.e0)
    w = np.array(gs.boundary_vector, dtype=float)
    w /= math.hypot(w[0], w[1])
    basis = FloquetBasis(
        e0=gs.e0,
        sigma=sigma,
        anchor=geom.site(0),
        period=geom.d,
        y_u=w,
        y_v=np.array([-w[1], w[0]]),
        nilpotent=sigma * m - np.eye(2),
        edge_residual=gs.residual,
    )
    probe = np.linspace(basis.anchor, basis.anchor + geom.d, 257)
    basis.u_scale = float(max(abs(basis.u0(r)) for r in probe))
    return basis


@dataclass
class KeplerTrace:
    """Sampled Kepler phase along the half-line, with shell bookkeeping."""

    radii: np.ndarray
    phi: np.ndarray
    gamma_phase: np.ndarray
    jump_sum: float


def _phi_jump(
    basis: FloquetBasis,
    p: InteractionParams,
    lam_inv: np.ndarray,
    n_site: int,
    r_site: float,
    phi_minus: float,
) -> tuple[float, float]:
    """Apply the shell discontinuity of tan(phi); returns (phi_plus, |dtan|).

    The new angle is the unique preimage of the jumped tangent inside
    (phi_minus - pi, phi_minus]: the phase never increases and never
    rewinds by a full pi at a single shell.
    """
    y_after = basis.site_state(n_site, basis.y_u)
    u_plus = y_after[0]
    u_minus = lam_inv[0, 0] * y_after[0] + lam_inv[0, 1] * y_after[1]
    if min(abs(u_plus), abs(u_minus)) < 1e-12 * basis.u_scale:
        raise BasisZero(
            f"band-bottom solution vanishes at the shell r = {r_site:.6g}"
        )
    dtan = -p.beta / (r_site * u_plus * u_minus)
    t_plus = math.tan(phi_minus) + dtan
    principal = math.atan(t_plus)
    phi_plus = principal + math.pi * math.floor((phi_minus - principal) / math.pi)
    return phi_plus, abs(dtan)


def kepler_trace(
    p: InteractionParams,
    geom: LatticeGeometry,
    r0: float,
    r1: float,
    basis: FloquetBasis | None = None,
    samples_per_cell: int = 16,
) -> KeplerTrace:
    """Integrate the Kepler angle of the planar s-wave channel over [r0, r1].

    Between shells the angle obeys
    phi' = (1/r) (-sin phi cos phi - u0^2 sin^2 phi / 4 - cos^2 phi / u0^2)
    with u0 the band-bottom solution; at each shell tan(phi) jumps by
    -beta / (r_n u0(r_n+) u0(r_n-)).  The quadratic form on the right is
    pointwise degenerate, so the angle chases a slowly moving null
    direction; only when u0 is constant (the free lattice) can it settle.

    The returned gamma_phase is the directly integrated radial phase at
    the band bottom, shifted so both angles can be compared; their
    difference stays bounded while each decreases without bound.

    Raises
    ------
    BasisZero
        If u0 vanishes at a shell (the jump formula divides by it).
    StepFailure
        If the angle integration fails, e.g. on traces through interior
        nodes of an antiperiodic u0 where 1/u0^2 spikes.
    """
    if not 0.0 < r0 < r1:
        raise ConfigError(f"need 0 < r0 < r1, got ({r0}, {r1})")
    if basis is None:
        basis = floquet_basis_at_e0(p, geom)
    lam_inv = np.linalg.inv(p.matrix())

    # anchor both angles to the radial phase of the regular solution at r0
    r_start = R_MIN_FACTOR * geom.d
    sv = origin_start(_WELSH_CHANNEL, basis.e0, min(r_start, 0.5 * r0))
    th0 = math.atan2(sv.value, sv.derivative)
    state = PruferState(theta=th0, log_rho=0.0, position=sv.position)
    state, (g_r, g_th, _) = prufer_advance(
        _WELSH_CHANNEL, p, geom, basis.e0, state, r1,
        trace_per_cell=max(4, samples_per_cell // 2),
    )
    gamma_r = np.asarray(g_r)
    gamma_v = 0.5 * math.pi - np.asarray(g_th)

    phi = float(np.interp(r0, gamma_r, gamma_v))
    sites = geom.sites_in(r0, r1)
    sites = sites[sites < r1]
    n_first = round((sites[0] - geom.site(0)) / geom.d) if len(sites) else 0
    stops = np.concatenate((sites, [r1]))

    def rhs(r: float, y: np.ndarray) -> np.ndarray:
        u = basis.u0(r)
        sn, cn = math.sin(y[0]), math.cos(y[0])
        return np.array(
            [-(sn * cn + 0.25 * u * u * sn * sn + (cn * cn) / (u * u)) / r]
        )

    radii = [r0]
    phis = [phi]
    jump_sum = 0.0
    pos = r0
    apply_jumps = p.beta != 0.0
    for j, stop in enumerate(stops):
        if stop > pos:
            sol = solve_ivp(
                rhs,
                (pos, stop),
                np.array([phi]),
                method="DOP853",
                rtol=RTOL,
                atol=ATOL,
                t_eval=np.linspace(pos, stop, samples_per_cell + 1)[1:],
            )
            if not sol.success:
                raise StepFailure(
                    f"Kepler angle integration failed near r = {sol.t[-1]:.6g}"
                )
            radii.extend(sol.t.tolist())
            phis.extend(sol.y[0].tolist())
            phi = float(sol.y[0, -1])
            pos = stop
        if apply_jumps and j < len(sites):
            phi, dtan = _phi_jump(basis, p, lam_inv, n_first + j, stop, phi)
            jump_sum += dtan
            radii.append(stop)
            phis.append(phi)

    radii_arr = np.array(radii)
    phi_arr = np.array(phis)
    gamma_arr = np.interp(radii_arr, gamma_r, gamma_v)
    gamma_arr += phi_arr[0] - gamma_arr[0]
    return KeplerTrace(
        radii=radii_arr, phi=phi_arr, gamma_phase=gamma_arr, jump_sum=jump_sum
    )


def _validate_windows(windows) -> tuple[float, float]:
    if len(windows) < 1:
        raise ConfigError("need at least one radius window")
    last_b = None
    for a, b in windows:
        if not 0.0 < a < b:
            raise ConfigError(f"bad radius window ({a}, {b})")
        if last_b is not None and a < last_b - 1e-12 * last_b:
            raise ConfigError("radius windows must be increasing")
        last_b = b
    span = math.log10(windows[-1][1] / windows[0][0])
    if span < 3.0 - 1e-9:
        raise ConfigError(
            f"windows span {span:.2f} decades; need at least 3 for a verdict"
        )
    return float(windows[0][0]), float(windows[-1][1])


def phase_unbounded_test(
    p: InteractionParams,
    geom: LatticeGeometry,
    windows: list[tuple[float, float]],
) -> dict:
    """Decide whether the Kepler angle keeps falling or levels off.

    Runs one continuous trace across all windows and measures the angle
    drop per decade of radius in each; the verdict is Unbounded when the
    last window still drops faster than the threshold, PlateauSuspected
    otherwise.  If the band-bottom solution happens to vanish on a shell,
    the lattice offset is perturbed by 1e-6 d and the run is flagged.
    """
    r_lo, r_hi = _validate_windows(windows)
    geom_used = geom
    perturbed = False
    try:
        trace = kepler_trace(p, geom, r_lo, r_hi)
    except BasisZero:
        geom_used = replace(geom, offset=geom.offset + 1e-6 * geom.d)
        perturbed = True
        trace = kepler_trace(p, geom_used, r_lo, r_hi)

    drops = []
    for a, b in windows:
        phi_a = float(np.interp(a, trace.radii, trace.phi))
        phi_b = float(np.interp(b, trace.radii, trace.phi))
        drops.append((phi_a - phi_b) / math.log10(b / a))
    drop = drops[-1]
    verdict = (
        PhaseVerdict.UNBOUNDED if drop > DROP_THRESHOLD else PhaseVerdict.PLATEAU_SUSPECTED
    )
    return {
        "drop_per_decade": drop,
        "verdict": verdict,
        "window_drops": drops,
        "offset_perturbed": perturbed,
        "trace": trace,
    }


def _verify_candidate(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    e0: float,
    domain: tuple[float, float],
) -> float:
    """Certify a located eigenvalue by the left/right matching defect.

    A state at depth kappa^2 below the band bottom decays like
    exp(-kappa r), so the full truncation domain is useless for matching:
    at the mid-domain meeting radius the defect saturates at O(1) for any
    representable energy offset.  Instead the Dirichlet wall is pulled in
    to ~40 decay lengths past the expected support, which moves the
    eigenvalue by a factor ~exp(-80) (nothing, in doubles), and the defect
    zero is polished by bracketed root finding there.  Returns the defect
    magnitude at the polished root; raises if no sign change exists near
    the candidate or the residual stays above 1e-6.
    """
    kappa = math.sqrt(max(e0 - e, 1e-300))
    delta = max(1e-6, 1e-6 * abs(e))
    wall = max(20.0 * geom.d, 6.0 / kappa)
    while True:
        wall = min(domain[1], geom.d * (math.floor(wall / geom.d) + 0.25))
        dom = (domain[0], wall)

        def f(x: float) -> float:
            return matching_defect(ch, p, geom, x, dom)

        a, b = e - delta, e + delta
        fa, fb = f(a), f(b)
        if fa * fb < 0.0:
            root = brentq(f, a, b, xtol=1e-14, rtol=8.9e-16)
            residual = abs(f(root))
            if residual < 1e-6 and abs(root - e) < 5e-7:
                return residual
        if wall >= domain[1]:
            raise ConvergenceFailure(
                f"candidate {e:.9g} failed matching at every wall up to "
                f"{domain[1]:.6g}"
            )
        wall *= 1.6


@dataclass
class WelshReport:
    """Eigenvalues found below the band bottom plus the phase evidence."""

    e0: float
    eigenvalues_found: list[float]
    phase_drop: float
    unbounded_evidence: dict
    requested: int
    truncation_radius: float
    matching_defects: list[float]

    @property
    def shortfall(self) -> int:
        """How many requested eigenvalues the truncated search missed.

        A positive shortfall is data, not an error: deeper members of the
        family accumulate at e0 and need a larger truncation radius.
        """
        return max(0, self.requested - len(self.eigenvalues_found))


def find_welsh_eigenvalues(
    p: InteractionParams,
    geom: LatticeGeometry,
    n_wanted: int,
    r_max: float,
) -> WelshReport:
    """Locate up to n_wanted eigenvalues below the band bottom (planar s-wave).

    Counts Wronskian zeros in a window below e0, widening it geometrically
    until nothing lies deeper, then bisects each eigenvalue to 1e-8
    relative and verifies it by the left/right matching defect.  The
    returned report also carries the per-decade phase-drop evidence for
    the infinite family.
    """
    if n_wanted < 1:
        raise ConfigError(f"need n_wanted >= 1, got {n_wanted}")
    if r_max < 500.0 * geom.d:
        raise ConfigError(
            f"r_max = {r_max} is too small for the three-decade phase "
            f"evidence; need at least 500 d = {500 * geom.d}"
        )
    ch = _WELSH_CHANNEL
    basis = floquet_basis_at_e0(p, geom)
    e0 = basis.e0
    domain = (R_MIN_FACTOR * geom.d, float(r_max))
    hi = e0 - 1e-9
    width = max(1.0, abs(e0))
    for _ in range(4):
        lo = e0 - width
        deeper = count_wronskian_zeros(ch, p, geom, lo - 3.0 * width, lo, domain=domain)
        if deeper == 0:
            break
        width *= 4.0
    eigs = _scan_window_with_retries(ch, p, geom, (lo, hi), domain)
    found = eigs[: int(n_wanted)]
    defects = [_verify_candidate(ch, p, geom, e, e0, domain) for e in found]

    r_lo = max(0.5 * geom.d, r_max * 1e-3)
    n_dec = max(3, int(math.floor(math.log10(r_max / r_lo))))
    marks = np.geomspace(r_lo, r_max, n_dec + 1)
    evidence = phase_unbounded_test(p, geom, list(zip(marks[:-1], marks[1:])))
    trace = evidence["trace"]
    evidence["window"] = (float(r_lo), float(r_max))
    phase_drop = float(trace.gamma_phase[-1] - trace.gamma_phase[0])
    return WelshReport(
        e0=e0,
        eigenvalues_found=found,
        phase_drop=min(phase_drop, 0.0),
        unbounded_evidence=evidence,
        requested=int(n_wanted),
        truncation_radius=float(r_max),
        matching_defects=defects,
    )
