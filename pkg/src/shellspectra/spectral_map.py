"""Operator-level spectral picture assembled from the cell-level machinery.

The full operator with concentric-shell interfaces decomposes into radial
channels over a common periodic background.  Its essential spectrum is the
half-line above the first band edge; on top of that the bands carry
absolutely continuous spectrum while the gaps of the background fill up
with channel eigenvalues as angular momentum grows.  This module produces
that map: transfer-matrix norm profiles certify boundedness inside bands
(and exponential growth inside gaps), gap scans across channels gather the
point spectrum candidates, and a boundary m-function estimator at complex
energy gives an independent ac/pp discriminator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    BracketingFailure,
    ConfigError,
    DegenerateEndpoint,
    NonDecayingStart,
)
from .interaction import InteractionParams, LatticeGeometry
from .kronig1d import BandStructure, band_structure, monodromy
from .radial import (
    R_MIN_FACTOR,
    ChannelSpec,
    _integrate_stack,
    locate_eigenvalues,
)

# probes stay clear of band edges by this fraction of the interval width
EDGE_MARGIN_FRAC = 1e-3
# no m-function claim below this epsilon: domain truncation caps resolution
EPSILON_FLOOR = 1e-5

_LOG_HUGE = 709.0  # overflow threshold of exp in double precision


class SpectralKind(Enum):
    ABSOLUTELY_CONTINUOUS = "absolutely_continuous"
    DENSE_POINT_CANDIDATE = "dense_point_candidate"


@dataclass(frozen=True)
class SpectrumInterval:
    lo: float
    hi: float
    kind: SpectralKind

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigError(f"empty spectral interval ({self.lo}, {self.hi})")

    def contains(self, e: float, margin: float = 0.0) -> bool:
        return self.lo + margin < e < self.hi - margin

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class SpectrumMap:
    """Tiling of [e0, cutoff] into ac/pp-candidate intervals plus evidence."""

    e0: float
    intervals: list[SpectrumInterval]
    channel_eigenvalues: dict[int, list[float]]
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        """JSON-ready dictionary (plain types only, deterministic order)."""
        return {
            "e0": self.e0,
            "intervals": [
                {"lo": iv.lo, "hi": iv.hi, "kind": iv.kind.value}
                for iv in self.intervals
            ],
            "channels": {
                str(l): list(eigs)
                for l, eigs in sorted(self.channel_eigenvalues.items())
            },
            "diagnostics": self.diagnostics,
        }

    def csv_rows(self):
        """Flat rows for plotting: (record_type, a, b, c)."""
        for iv in self.intervals:
            yield ("interval", iv.lo, iv.hi, iv.kind.value)
        for l in sorted(self.channel_eigenvalues):
            for e in self.channel_eigenvalues[l]:
                yield ("eigenvalue", float(l), e, "")


@dataclass
class TransferNormProfile:
    energy: float
    radii: np.ndarray
    sup_norm: float
    growth_rate: float
    log_norms: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


@dataclass(frozen=True)
class MFunctionEstimate:
    energy: float
    epsilon: float
    im_m: float
    abs_m: float


def _first_bands(p: InteractionParams, geom: LatticeGeometry, n_gaps: int = 0) -> BandStructure:
    """Band structure guaranteed to contain at least n_gaps complete gaps."""
    e_max = ((n_gaps + 2.41) * math.pi / geom.d) ** 2
    for _ in range(5):
        bs = band_structure(p, geom, e_max=e_max)
        if len(bs.gaps) >= n_gaps and len(bs.bands) >= 1:
            return bs
        e_max *= 2.0
    raise BracketingFailure(
        f"could not resolve {n_gaps} gaps below e_max = {e_max:.3g}"
    )


def essential_spectrum(p: InteractionParams, geom: LatticeGeometry) -> dict:
    """The half-line [e0, infinity) carried by the periodic background.

    Returns a record with the located band bottom and the human-readable
    statement; the spectral decomposition inside the half-line is the job
    of build_spectrum_map.
    """
    e0 = _first_bands(p, geom).e0
    return {"e0": e0, "statement": f"essential spectrum = [{e0:.12g}, infinity)"}


def _norm_profiles_batch(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    es: np.ndarray,
    x0: float,
    n_periods: int,
) -> np.ndarray:
    """log ||T(E, x0 + j d, x0)|| for all energies at once; shape (B, n+1).

    One fundamental-matrix stack marches period by period; each block is
    rescaled by its max entry between periods with the log folded back in,
    so gap energies never overflow.
    """
    es = np.asarray(es, dtype=float)
    b = len(es)
    cs = np.full(b, ch.c)
    lam = p.matrix()
    y = np.broadcast_to(np.eye(2), (b, 2, 2)).copy()
    logs = np.zeros(b)
    out = np.empty((b, n_periods + 1))
    out[:, 0] = 0.0
    pos = x0
    for j in range(1, n_periods + 1):
        mark = x0 + j * geom.d
        for site in geom.sites_in(pos, mark):
            if site > pos:
                y, _, _ = _integrate_stack(cs, es, np.full(b, pos), site - pos, y)
            y = np.einsum("ij,bjk->bik", lam, y)
            pos = site
        if mark > pos:
            y, _, _ = _integrate_stack(cs, es, np.full(b, pos), mark - pos, y)
            pos = mark
        sv = np.linalg.svd(y, compute_uv=False)
        out[:, j] = logs + np.log(sv[:, 0])
        scale = np.maximum(np.abs(y).max(axis=(1, 2)), 1e-300)
        y /= scale[:, None, None]
        logs += np.log(scale)
    return out


def transfer_norm_profile(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    x0: float,
    n_periods: int,
) -> TransferNormProfile:
    """Spectral norm of the transfer matrix at period marks above x0.

    Inside a band the norms stay bounded and the fitted growth rate is
    statistically zero; inside a gap the rate approaches the Floquet
    exponent of the periodic background.  The rate is fitted by least
    squares on the upper half of the trace, per unit length.
    """
    if x0 <= 0.0:
        raise ConfigError(f"need x0 > 0, got {x0}")
    if n_periods < 4:
        raise ConfigError(f"need at least 4 periods, got {n_periods}")
    log_norms = _norm_profiles_batch(ch, p, geom, np.array([e]), x0, n_periods)[0]
    radii = x0 + geom.d * np.arange(n_periods + 1)
    half = len(radii) // 2
    slope = float(np.polyfit(radii[half:], log_norms[half:], 1)[0])
    peak = float(log_norms.max())
    sup = math.inf if peak > _LOG_HUGE else float(math.exp(peak))
    return TransferNormProfile(
        energy=e,
        radii=radii,
        sup_norm=max(sup, 1.0),
        growth_rate=slope,
        log_norms=log_norms,
    )


def floquet_exponent(p: InteractionParams, geom: LatticeGeometry, e: float) -> float:
    """log of the expanding monodromy eigenvalue magnitude, per unit length.

    Zero inside bands (unimodular eigenvalues), positive inside gaps.
    """
    mu = np.linalg.eigvals(monodromy(p, geom, e))
    return float(np.log(np.abs(mu)).max() / geom.d)


def _scan_window_with_retries(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    window: tuple[float, float],
    domain: tuple[float, float],
) -> list[float]:
    """locate_eigenvalues, nudging the window when a probe lands on one."""
    lo, hi = window
    for attempt in range(4):
        try:
            return locate_eigenvalues(ch, p, geom, (lo, hi), domain=domain)
        except DegenerateEndpoint:
            shrink = (hi - lo) * 1e-5 * (attempt + 1)
            lo, hi = lo + shrink, hi - shrink
    raise DegenerateEndpoint(
        f"window probes kept landing on eigenvalues near ({window[0]}, {window[1]})"
    )


def gap_eigenvalues(
    p: InteractionParams,
    geom: LatticeGeometry,
    nu: int,
    gap_index: int,
    l_range: tuple[int, int],
    r_max: float,
) -> dict[int, list[float]]:
    """Channel eigenvalues inside one spectral gap of the background.

    Parameters
    ----------
    gap_index : int
        Index into the ordered list of open gaps (0 = first gap above e0).
    l_range : (int, int)
        Inclusive range of angular momenta to scan.

    Returns the found eigenvalues per channel, each strictly inside the
    gap; the scan window keeps a relative margin of 1e-3 off both edges,
    so eigenvalues hugging a band edge closer than that are out of scope.
    """
    l_lo, l_hi = l_range
    if l_lo > l_hi or l_lo < 0:
        raise ConfigError(f"bad l range {l_range!r}")
    bs = _first_bands(p, geom, n_gaps=gap_index + 1)
    g_lo, g_hi = bs.gaps[gap_index]
    margin = EDGE_MARGIN_FRAC * (g_hi - g_lo)
    window = (g_lo + margin, g_hi - margin)
    domain = (R_MIN_FACTOR * geom.d, float(r_max))
    found: dict[int, list[float]] = {}
    for l in range(l_lo, l_hi + 1):
        ch = ChannelSpec(nu, l)
        found[l] = _scan_window_with_retries(ch, p, geom, window, domain)
    return found


def m_function_estimate(
    ch: ChannelSpec,
    p: InteractionParams,
    geom: LatticeGeometry,
    e: float,
    epsilon: float,
    r_max: float,
) -> MFunctionEstimate:
    """Boundary m-function at E + i*epsilon from backward propagation.

    Starts at r_max in the contracting Floquet direction of the
    complex-energy background monodromy (the square-integrable solution
    tracks that direction once the centrifugal tail is negligible),
    integrates down to the anchor radius d/4, normalizes the solution
    value there to 1 and reports its derivative.  The imaginary part is
    strictly positive for epsilon > 0 and its epsilon -> 0 behaviour
    separates band energies (stabilizes at a positive constant) from gap
    energies away from eigenvalues (decays linearly).
    """
    if epsilon <= 0.0:
        raise ConfigError(f"need epsilon > 0, got {epsilon}")
    if epsilon < EPSILON_FLOOR:
        raise ConfigError(
            f"epsilon below the trust floor {EPSILON_FLOOR:g}: the domain "
            "truncation cannot resolve the boundary limit there"
        )
    z = complex(e, epsilon)
    m = monodromy(p, geom, z)
    vals, vecs = np.linalg.eig(m)
    i_small = int(np.argmin(np.abs(vals)))
    if abs(abs(vals[i_small]) - 1.0) < 1e-14:
        raise NonDecayingStart(
            f"no contracting direction at E = {z}: |mu| = {abs(vals[i_small])}"
        )
    anchor = 0.25 * geom.d
    sites = geom.sites_in(anchor, r_max)
    if len(sites) == 0:
        raise ConfigError(f"r_max = {r_max} leaves no shell above the anchor")
    # the monodromy (shell then free cell) has its eigenvectors at the
    # just-after-shell phase point; seeding mid-cell would contaminate the
    # start with the other Floquet direction, which at band energies and
    # small epsilon never decays away.  So the march starts at the
    # outermost shell, on the pre-jump side of the eigendirection.
    lam_inv = np.linalg.inv(p.matrix()).astype(complex)
    boundaries = np.concatenate(([anchor], sites))
    y = np.array([lam_inv @ vecs[:, i_small]])  # (1, 2) complex
    cs = np.array([ch.c])
    es = np.array([z])
    for k in range(len(boundaries) - 1, 0, -1):
        a, b = boundaries[k - 1], boundaries[k]
        y, _, _ = _integrate_stack(cs, es, np.array([b]), a - b, y)
        if k > 1:  # every boundary below the start is a shell
            y = np.einsum("ij,bj->bi", lam_inv, y)
        scale = np.max(np.abs(y))
        if scale == 0.0:
            raise NonDecayingStart("backward solution vanished identically")
        y = y / scale
    u, du = y[0]
    if u == 0:
        raise NonDecayingStart("backward solution has a node at the anchor")
    mval = du / u
    return MFunctionEstimate(
        energy=e,
        epsilon=epsilon,
        im_m=float(mval.imag),
        abs_m=float(abs(mval)),
    )


def build_spectrum_map(
    p: InteractionParams,
    geom: LatticeGeometry,
    nu: int,
    e_cutoff: float,
    l_range: tuple[int, int],
    r_max: float,
) -> SpectrumMap:
    """Merge band structure, gap scans and norm profiles into one map.

    Bands become absolutely-continuous intervals, open gaps become
    dense-point candidates populated by the channel scan; a short transfer
    norm profile at each interval midpoint goes into the diagnostics.
    """
    bs = band_structure(p, geom, e_max=e_cutoff)
    intervals: list[SpectrumInterval] = []
    for i, (b_lo, b_hi) in enumerate(bs.bands):
        intervals.append(
            SpectrumInterval(b_lo, b_hi, SpectralKind.ABSOLUTELY_CONTINUOUS)
        )
        if i < len(bs.gaps):
            g_lo, g_hi = bs.gaps[i]
            intervals.append(
                SpectrumInterval(g_lo, g_hi, SpectralKind.DENSE_POINT_CANDIDATE)
            )
    if intervals and intervals[-1].hi < e_cutoff:
        # the cutoff fell beyond the last resolved band: the remainder of
        # the window is gap up to the next band, label it as such
        intervals.append(
            SpectrumInterval(
                intervals[-1].hi, e_cutoff, SpectralKind.DENSE_POINT_CANDIDATE
            )
        )

    channel_eigs: dict[int, list[float]] = {
        l: [] for l in range(l_range[0], l_range[1] + 1)
    }
    gap_list = [
        iv for iv in intervals if iv.kind is SpectralKind.DENSE_POINT_CANDIDATE
    ]
    domain = (R_MIN_FACTOR * geom.d, float(r_max))
    for iv in gap_list:
        margin = EDGE_MARGIN_FRAC * iv.width
        window = (iv.lo + margin, iv.hi - margin)
        for l in channel_eigs:
            ch = ChannelSpec(nu, l)
            channel_eigs[l].extend(
                _scan_window_with_retries(ch, p, geom, window, domain)
            )
    for l in channel_eigs:
        channel_eigs[l].sort()

    diagnostics: dict = {"profiles": [], "largest_empty_subinterval": {}}
    probe_ch = ChannelSpec(nu, 0)
    for iv in intervals:
        e_mid = 0.5 * (iv.lo + iv.hi)
        prof = transfer_norm_profile(probe_ch, p, geom, e_mid, 4.0 * geom.d, 64)
        diagnostics["profiles"].append(
            {
                "lo": iv.lo,
                "hi": iv.hi,
                "kind": iv.kind.value,
                "probe_energy": e_mid,
                "growth_rate": prof.growth_rate,
                "sup_norm": prof.sup_norm,
            }
        )
    for g_idx, iv in enumerate(gap_list):
        pts = sorted(
            e for eigs in channel_eigs.values() for e in eigs if iv.contains(e)
        )
        cuts = [iv.lo] + pts + [iv.hi]
        diagnostics["largest_empty_subinterval"][g_idx] = float(
            max(b - a for a, b in zip(cuts[:-1], cuts[1:]))
        )
    return SpectrumMap(
        e0=bs.e0,
        intervals=intervals,
        channel_eigenvalues=channel_eigs,
        diagnostics=diagnostics,
    )
