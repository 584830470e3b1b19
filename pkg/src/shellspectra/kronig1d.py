"""Band structure of a 1D lattice of identical interface interactions.

On the line, an equidistant array of interfaces with period ``d`` turns the
free equation ``-u'' = E u`` into a periodic problem whose monodromy matrix
over one cell is ``M(E) = Lambda @ F(E, d)``, with ``F`` the free cell
propagator.  Half the trace,

    D(E) = ((gamma + delta) C(E) + (alpha - beta E) S(E)) / 2,

with ``C = cos(sqrt(E) d)`` and ``S = sin(sqrt(E) d)/sqrt(E)`` continued
analytically through E <= 0, is entire in E.  The spectrum is the closure of
``{|D| < 1}``; band edges solve ``D = +1`` or ``D = -1``.

The scan works in the signed square-root variable ``s`` (``E = s|s|``) where
band edges are roughly equally spaced, locates every extremum of ``D``, and
then brackets edges on the monotone branches in between.  Points where an
extremum touches ``+1`` or ``-1`` are reported as closed gaps rather than as
zero-width gap intervals, so band edge lists stay strictly increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BracketingFailure, DegenerateEdge, NumericsError
from .interaction import InteractionClass, InteractionParams, LatticeGeometry, classify

# Hyperbolic arguments are clipped here; beyond it |D| is astronomically
# large and only its sign matters (the clip region lies far below the
# spectrum, where no root search ever runs).
_HYP_CLIP = 650.0

#: An extremum of D counts as touching +-1 (closed gap) below this distance.
TANGENCY_TOL = 1e-9


def free_propagator(e: float | complex, length: float) -> np.ndarray:
    """Fundamental matrix of ``-u'' = E u`` over an interval of given length.

    Columns propagate ``(u, u')``: ``F = [[C, S], [E_term, C]]`` with
    ``C = cos(k L)``, ``S = sin(k L)/k``, ``k = sqrt(E)``, continued to
    ``E <= 0`` (trig turns hyperbolic) and to complex ``E`` analytically.

    Parameters
    ----------
    e : float or complex
        Energy.
    length : float
        Propagation distance, may be zero.
    """
    if isinstance(e, complex) and e.imag != 0.0:
        k = np.sqrt(complex(e))
        c = np.cos(k * length)
        s = np.sin(k * length) / k
        return np.array([[c, s], [-e * s, c]], dtype=complex)
    e = float(np.real(e))
    if e > 0.0:
        k = math.sqrt(e)
        c = math.cos(k * length)
        s = math.sin(k * length) / k
        return np.array([[c, s], [-e * s, c]], dtype=float)
    if e < 0.0:
        kap = math.sqrt(-e)
        arg = min(kap * length, _HYP_CLIP)
        c = math.cosh(arg)
        s = math.sinh(arg) / kap
        return np.array([[c, s], [-e * s, c]], dtype=float)
    return np.array([[1.0, length], [0.0, 1.0]], dtype=float)


def monodromy(p: InteractionParams, geom: LatticeGeometry, e: float | complex) -> np.ndarray:
    """One-cell transfer matrix ``Lambda @ F(E, d)`` (period starting at a shell).

    Raises
    ------
    NumericsError
        If the determinant drifts from 1 by more than 1e-10.
    """
    m = p.matrix().astype(complex if isinstance(e, complex) and e.imag != 0.0 else float)
    m = m @ free_propagator(e, geom.d)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > 1e-10:
        raise NumericsError(f"monodromy determinant off unity by {abs(det - 1.0):.3e}")
    return m


def _cs_arrays(e: np.ndarray, length: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized C(E), S(E) entries of the free propagator (real energies)."""
    e = np.asarray(e, dtype=float)
    c = np.empty_like(e)
    s = np.empty_like(e)
    pos = e > 0.0
    neg = e < 0.0
    zer = ~(pos | neg)
    if pos.any():
        k = np.sqrt(e[pos])
        c[pos] = np.cos(k * length)
        s[pos] = np.sin(k * length) / k
    if neg.any():
        kap = np.sqrt(-e[neg])
        arg = np.minimum(kap * length, _HYP_CLIP)
        c[neg] = np.cosh(arg)
        s[neg] = np.sinh(arg) / kap
    c[zer] = 1.0
    s[zer] = length
    return c, s


def discriminant(
    p: InteractionParams, geom: LatticeGeometry, e: float | complex | np.ndarray
) -> float | complex | np.ndarray:
    """Half-trace ``D(E)`` of the one-cell monodromy; accepts arrays.

    Entire in E; real on the real axis.  ``|D| <= 1`` characterizes the bands.
    """
    if np.iscomplexobj(e):
        f = free_propagator(complex(e), geom.d) if np.isscalar(e) else None
        if f is not None:
            return 0.5 * ((p.gamma + p.delta) * f[0, 0] + (p.alpha - p.beta * complex(e)) * f[0, 1])
        ec = np.asarray(e, dtype=complex)
        k = np.sqrt(ec)
        kd = k * geom.d
        s = np.where(kd == 0, geom.d, np.sin(kd) / np.where(k == 0, 1.0, k))
        return 0.5 * ((p.gamma + p.delta) * np.cos(kd) + (p.alpha - p.beta * ec) * s)
    arr = np.asarray(e, dtype=float)
    c, s = _cs_arrays(arr, geom.d)
    out = 0.5 * ((p.gamma + p.delta) * c + (p.alpha - p.beta * arr) * s)
    return float(out) if np.isscalar(e) else out


def _e_of_s(s: np.ndarray | float):
    return s * np.abs(s)


def _disc_scalar(p: InteractionParams, d: float, s: float) -> float:
    """D(E(s)) for scalar s, math-module fast path for root refinement."""
    e = s * abs(s)
    if e > 0.0:
        k = math.sqrt(e)
        c = math.cos(k * d)
        sn = math.sin(k * d) / k
    elif e < 0.0:
        kap = math.sqrt(-e)
        arg = min(kap * d, _HYP_CLIP)
        c = math.cosh(arg)
        sn = math.sinh(arg) / kap
    else:
        c, sn = 1.0, d
    return 0.5 * ((p.gamma + p.delta) * c + (p.alpha - p.beta * e) * sn)


@dataclass(frozen=True)
class BandStructure:
    """Bands, open gaps, and closed-gap energies over ``[e_min, e_max]``.

    ``bands`` and ``gaps`` are strictly increasing, non-overlapping energy
    intervals; ``gaps`` holds only gaps with a band on both sides.  Energies
    where two bands touch (discriminant tangent to +-1) appear in
    ``closed_gaps`` and inside a single merged band, never as zero-width
    intervals.  ``last_band_truncated`` is set when the top band still
    continues past ``e_max``.
    """

    bands: tuple[tuple[float, float], ...]
    gaps: tuple[tuple[float, float], ...]
    closed_gaps: tuple[float, ...]
    e_min: float
    e_max: float
    last_band_truncated: bool

    @property
    def e0(self) -> float:
        """Bottom of the spectrum."""
        return self.bands[0][0]

    def edges(self) -> np.ndarray:
        return np.array([x for b in self.bands for x in b])


def _default_e_min(p: InteractionParams, d: float) -> float:
    m = max(abs(p.alpha), abs(p.beta), abs(p.gamma), abs(p.delta))
    return -((m + 1.0) ** 2) * 4.0 / d**2


def band_structure(
    p: InteractionParams,
    geom: LatticeGeometry,
    e_max: float,
    e_min: float | None = None,
) -> BandStructure:
    """Locate every band edge of the periodic interface lattice up to ``e_max``.

    The default ``e_min`` sits safely below the spectrum for the given
    coupling strengths and is widened automatically (factor 4, a few tries)
    if the discriminant has not yet left the band region there.

    Raises
    ------
    BracketingFailure
        If no safe lower bound is found, no band exists below ``e_max``, or
        the band/gap alternation fails a midpoint consistency check.
    """
    d = geom.d
    if e_max <= 0.0:
        raise BracketingFailure("e_max must be positive; the spectrum is unbounded above")

    auto = e_min is None
    emn = _default_e_min(p, d) if e_min is None else float(e_min)
    for _ in range(7):
        if abs(_disc_scalar(p, d, -math.sqrt(-emn))) > 1.0 + 1e-9 or not auto:
            break
        emn *= 4.0
    else:
        raise BracketingFailure("could not find e_min with |D| > 1 below the spectrum")
    if emn >= 0.0 or abs(_disc_scalar(p, d, -math.sqrt(-emn))) <= 1.0:
        raise BracketingFailure(f"|D(e_min)| <= 1 at e_min = {emn}: not below the spectrum")

    s_lo = -math.sqrt(-emn)
    s_hi = math.sqrt(e_max)
    step = math.pi / (16.0 * d)
    n = max(int(math.ceil((s_hi - s_lo) / step)) + 1, 33)
    ss = np.linspace(s_lo, s_hi, n)
    gg = np.asarray(discriminant(p, geom, _e_of_s(ss)))

    # --- locate extrema of D(E(s)) between slope sign changes -------------
    crit: list[float] = []
    dg = np.diff(gg)
    sign = np.sign(dg)
    # walk over nonzero slopes; plateaus (exact zeros) just extend a branch
    last_sign, last_i = 0.0, 0
    for i in range(len(sign)):
        if sign[i] == 0.0:
            continue
        if last_sign != 0.0 and sign[i] != last_sign:
            # slope flips + to - at a maximum, - to + at a minimum; in both
            # cases minimizing -last_sign * D refines the extremum location
            a, b = ss[last_i], ss[i + 1]
            flip = -last_sign
            inner = minimize_scalar(
                lambda s: flip * _disc_scalar(p, d, s),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-11 * max(1.0, abs(b))},
            )
            crit.append(float(inner.x))
        last_sign, last_i = sign[i], i
    crit = [s for s in crit if s_lo < s < s_hi]

    # --- nodes = scan ends plus extrema; snap tangent extrema to +-1 ------
    nodes = [s_lo] + sorted(crit) + [s_hi]
    vals = [float(gg[0])] + [_disc_scalar(p, d, s) for s in sorted(crit)] + [float(gg[-1])]
    tangent: list[tuple[float, float]] = []  # (s, level)
    for j in range(1, len(nodes) - 1):
        for level in (1.0, -1.0):
            if abs(vals[j] - level) <= TANGENCY_TOL:
                tangent.append((nodes[j], level))
                vals[j] = level

    # --- transversal edges: brentq on each monotone branch ----------------
    rt = 4.0 * np.finfo(float).eps
    roots: list[float] = []
    for j in range(len(nodes) - 1):
        a, b = nodes[j], nodes[j + 1]
        for level in (1.0, -1.0):
            fa, fb = vals[j] - level, vals[j + 1] - level
            if fa == 0.0 or fb == 0.0 or fa * fb > 0.0:
                continue
            r = brentq(
                lambda s: _disc_scalar(p, d, s) - level, a, b, xtol=1e-13, rtol=rt
            )
            roots.append(float(r))
    roots.sort()
    # an edge landing on the scan boundary itself (it happens when e_max sits
    # exactly on a band edge) cannot be told apart from a band continuing
    # past e_max; drop it and let the truncation flag tell the story
    roots = [r for r in roots if r < s_hi - 1e-9 * max(1.0, abs(s_hi))]

    if not roots:
        raise BracketingFailure(f"no band edge found below e_max = {e_max}")

    # --- walk the s axis: crossings toggle band/gap, tangencies do not ----
    pts = [s_lo] + roots + [s_hi]
    inside = [False]
    for _ in roots:
        inside.append(not inside[-1])
    # validation by midpoint sampling where the region is wide enough
    for j in range(len(pts) - 1):
        if pts[j + 1] - pts[j] < 1e-7:
            continue
        mid = 0.5 * (pts[j] + pts[j + 1])
        # skip midpoints landing within a whisker of a tangency
        if any(abs(mid - ts) < 2e-2 / d for ts, _ in tangent):
            continue
        v = abs(_disc_scalar(p, d, mid))
        ok = (v < 1.0 + 1e-12) if inside[j] else (v > 1.0 - 1e-12)
        if not ok:
            raise BracketingFailure(
                f"band/gap alternation inconsistent near E = {_e_of_s(mid):.6g}"
            )

    bands: list[tuple[float, float]] = []
    gaps: list[tuple[float, float]] = []
    truncated = False
    for j in range(len(pts) - 1):
        lo, hi = _e_of_s(pts[j]), _e_of_s(pts[j + 1])
        if inside[j]:
            if j == len(pts) - 2:
                truncated = True
            bands.append((float(lo), float(hi)))
        elif 0 < j < len(pts) - 2:
            # interior gap: a band sits on both sides.  The leading region
            # (below the spectrum) and a trailing gap are not listed.
            gaps.append((float(lo), float(hi)))

    closed = tuple(float(_e_of_s(ts)) for ts, _ in sorted(tangent))
    eb = [x for b in bands for x in b]
    if any(eb[i] >= eb[i + 1] for i in range(len(eb) - 1)):
        raise BracketingFailure("band edges not strictly increasing")
    return BandStructure(
        bands=tuple(bands),
        gaps=tuple(gaps),
        closed_gaps=closed,
        e_min=float(emn),
        e_max=float(e_max),
        last_band_truncated=truncated,
    )


@dataclass(frozen=True)
class GroundStateSymmetry:
    """Symmetry of the solution at the bottom of the spectrum.

    ``residual`` is the smallest singular value of ``M(e0) - sigma I`` with
    ``sigma = +1`` (periodic) or ``-1`` (antiperiodic); ``boundary_vector``
    is the corresponding singular direction ``(u, u')`` at a cell start.
    """

    e0: float
    symmetry: str
    discriminant_value: float
    residual: float
    boundary_vector: tuple[float, float]
    matches_sign_rule: bool


def ground_state_symmetry(p: InteractionParams, geom: LatticeGeometry) -> GroundStateSymmetry:
    """Decide whether the ground state is periodic or antiperiodic.

    The sign rule says periodic for ``beta >= 0`` and antiperiodic for
    ``beta < 0``; the returned record carries both the verdict from the
    discriminant at the spectral bottom and whether it matches that rule.

    Raises
    ------
    DegenerateEdge
        If ``D(e0)`` lands away from both +1 and -1 (no clean verdict).
    """
    e_max = 9.0 * math.pi**2 / geom.d**2 + 1.0
    for _ in range(6):
        try:
            bs = band_structure(p, geom, e_max=e_max)
            break
        except BracketingFailure:
            e_max *= 4.0
    else:
        raise BracketingFailure("no spectrum found while searching for the ground state")
    e0 = bs.e0
    d0 = float(discriminant(p, geom, e0))
    if abs(d0 - 1.0) > 1e-6 and abs(d0 + 1.0) > 1e-6:
        raise DegenerateEdge(f"D(e0) = {d0!r} is near neither +1 nor -1")
    sigma = 1.0 if abs(d0 - 1.0) <= abs(d0 + 1.0) else -1.0
    m = monodromy(p, geom, e0)
    u, sv, vt = np.linalg.svd(m - sigma * np.eye(2))
    residual = float(sv[-1])
    vec = vt[-1]
    if vec[0] < 0 or (vec[0] == 0 and vec[1] < 0):
        vec = -vec
    symmetry = "periodic" if sigma > 0 else "antiperiodic"
    predicted = "periodic" if p.beta >= 0.0 else "antiperiodic"
    return GroundStateSymmetry(
        e0=e0,
        symmetry=symmetry,
        discriminant_value=d0,
        residual=residual,
        boundary_vector=(float(vec[0]), float(vec[1])),
        matches_sign_rule=symmetry == predicted,
    )


@dataclass(frozen=True)
class BandRow:
    """One band plus the gap above it, in energy and in sqrt-energy units."""

    index: int
    e_lower: float
    e_upper: float
    width_e: float
    width_k: float
    gap_after_e: float
    gap_after_k: float


@dataclass(frozen=True)
class AsymptoticsReport:
    """High-energy behaviour of bands and gaps against the classification.

    ``measured_constant`` averages, over the top third of complete bands,
    the quantity named by the classification (energy gap width for delta
    type, band over gap width ratio in k for the intermediate type, energy
    band width for delta-prime type).  ``fitted_mu`` is the least-squares
    slope of ``log(gap_k / band_k)`` against ``log k``, to be compared with
    the classification's growth exponent.  ``single_band`` marks the free
    lattice, where there is nothing to fit.
    """

    classification: InteractionClass
    rows: tuple[BandRow, ...]
    measured_constant: float
    fitted_mu: float
    single_band: bool


def _k_of_e(e: float) -> float:
    return math.copysign(math.sqrt(abs(e)), e)


def asymptotics_report(
    p: InteractionParams, geom: LatticeGeometry, n_bands: int = 24
) -> AsymptoticsReport:
    """Measure band/gap asymptotics and compare with the predicted family.

    Computes at least ``n_bands`` complete bands (growing ``e_max`` as
    needed), tabulates widths, and extracts the asymptotic constant and the
    growth exponent of the gap-to-band ratio.
    """
    cls = classify(p, geom)
    d = geom.d
    # nudged off (n pi / d)^2 so e_max cannot coincide with a band edge
    e_max = ((n_bands + 2.41) * math.pi / d) ** 2
    bs = None
    for _ in range(6):
        bs = band_structure(p, geom, e_max=e_max)
        complete = len(bs.bands) - (1 if bs.last_band_truncated else 0)
        if complete >= n_bands:
            break
        e_max *= 2.0
    assert bs is not None
    bands = list(bs.bands[: len(bs.bands) - (1 if bs.last_band_truncated else 0)])

    if len(bands) <= 1 and not bs.gaps:
        # free lattice or all gaps closed: one merged band, nothing to fit
        rows = tuple(
            BandRow(i, b[0], b[1], b[1] - b[0], _k_of_e(b[1]) - _k_of_e(b[0]), math.nan, math.nan)
            for i, b in enumerate(bands)
        )
        return AsymptoticsReport(cls, rows, math.nan, math.nan, True)

    rows = []
    for i, (lo, hi) in enumerate(bands):
        if i + 1 < len(bands):
            gap_e = bands[i + 1][0] - hi
            gap_k = _k_of_e(bands[i + 1][0]) - _k_of_e(hi)
        else:
            gap_e = gap_k = math.nan
        rows.append(
            BandRow(
                index=i,
                e_lower=lo,
                e_upper=hi,
                width_e=hi - lo,
                width_k=_k_of_e(hi) - _k_of_e(lo),
                gap_after_e=gap_e,
                gap_after_k=gap_k,
            )
        )

    full = [r for r in rows if math.isfinite(r.gap_after_e)]
    if len(full) < 4:
        raise BracketingFailure(
            f"only {len(full)} complete gaps found; cannot measure asymptotics"
        )
    tail = full[len(full) - max(3, len(full) // 3):]
    if cls.quantity == "gap_width":
        measured = float(np.mean([r.gap_after_e for r in tail]))
    elif cls.quantity == "band_gap_ratio":
        measured = float(np.mean([r.width_k / r.gap_after_k for r in tail]))
    else:
        measured = float(np.mean([r.width_e for r in tail]))

    upper = full[len(full) // 2:]
    ks = np.array([_k_of_e(0.5 * (r.e_upper + 0.5 * r.gap_after_e)) for r in upper])
    ratio = np.array([r.gap_after_k / r.width_k for r in upper])
    slope = float(np.polyfit(np.log(ks), np.log(ratio), 1)[0])
    return AsymptoticsReport(cls, tuple(rows), measured, slope, False)
