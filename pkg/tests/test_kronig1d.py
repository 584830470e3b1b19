"""1D lattice layer: discriminant, band structure, edge asymptotics."""

import math

import numpy as np
import pytest

from shellspectra import (
    LatticeGeometry,
    asymptotics_report,
    band_structure,
    discriminant,
    ground_state_symmetry,
    make_interaction,
    monodromy,
)
from conftest import random_params


def closed_form_delta_discriminant(alpha, d, e):
    """Textbook Kronig-Penney discriminant for a delta lattice, E > 0."""
    k = math.sqrt(e)
    return math.cos(k * d) + alpha / (2.0 * k) * math.sin(k * d)


def test_discriminant_matches_closed_form():
    p = make_interaction(1.0, 0.0, 1.0, 1.0)
    geom = LatticeGeometry(d=1.0)
    want = math.cos(1.0) + 0.5 * math.sin(1.0)
    got = float(discriminant(p, geom, np.array([1.0]))[0])
    assert abs(got - want) < 1e-12
    for e in (0.3, 2.7, 19.0, 145.2):
        want = closed_form_delta_discriminant(1.0, 1.0, e)
        got = float(discriminant(p, geom, np.array([e]))[0])
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_monodromy_det_one(rng):
    geom = LatticeGeometry(d=1.3)
    for _ in range(1000):
        p = random_params(rng)
        e = float(rng.uniform(-20.0, 80.0))
        m = monodromy(p, geom, e)
        assert abs(np.linalg.det(m) - 1.0) < 1e-10


def test_free_band_structure(free_unit):
    p, geom = free_unit
    bs = band_structure(p, geom, e_max=50.0)
    assert bs.e0 == pytest.approx(0.0, abs=1e-10)
    assert not bs.gaps or all(hi - lo < 1e-9 for lo, hi in bs.gaps)
    # effectively one merged band from 0 up
    assert bs.bands[0][0] == pytest.approx(0.0, abs=1e-10)


def test_delta_pi_gap_edges_pinned(delta_pi):
    # for beta = 0, E = (n pi / d)^2 = n^2 gives D = +-1 exactly, so one
    # edge of every gap sits at an integer square
    p, geom = delta_pi
    bs = band_structure(p, geom, e_max=110.0)
    assert len(bs.gaps) >= 8
    first = bs.gaps[0]
    assert first[0] == pytest.approx(1.0, abs=1e-9)
    assert first[1] > 1.0 + 1e-6
    for lo, hi in bs.gaps[:8]:
        n_near = round(math.sqrt(lo))
        assert min(abs(lo - n_near**2), abs(hi - n_near**2)) < 1e-8


def test_delta_pinned_energies_have_unit_discriminant(delta_pi):
    p, geom = delta_pi
    es = np.array([float(n * n) for n in range(1, 11)])
    d_vals = discriminant(p, geom, es)
    assert np.max(np.abs(np.abs(d_vals) - 1.0)) < 1e-9


def test_edges_consistent_with_discriminant(delta_pi):
    p, geom = delta_pi
    bs = band_structure(p, geom, e_max=60.0)
    edges = bs.edges()
    if bs.last_band_truncated:
        edges = edges[:-1]  # top entry is the cutoff, not a spectral edge
    d_vals = discriminant(p, geom, edges)
    assert np.max(np.abs(np.abs(d_vals) - 1.0)) < 1e-8


def test_band_interior_strictly_inside(delta_pi):
    p, geom = delta_pi
    bs = band_structure(p, geom, e_max=60.0)
    for lo, hi in bs.bands[:5]:
        mid = np.linspace(lo, hi, 9)[1:-1]
        assert np.all(np.abs(discriminant(p, geom, mid)) < 1.0)
    for lo, hi in bs.gaps[:5]:
        if hi - lo < 1e-9:
            continue
        mid = np.linspace(lo, hi, 7)[1:-1]
        assert np.all(np.abs(discriminant(p, geom, mid)) > 1.0)


def test_discriminant_smooth_inside_bands(delta_pi):
    # crude analyticity check: centered second differences stay bounded
    p, geom = delta_pi
    bs = band_structure(p, geom, e_max=40.0)
    lo, hi = bs.bands[1]
    width = hi - lo
    grid = np.linspace(lo + 0.1 * width, hi - 0.1 * width, 101)
    h = grid[1] - grid[0]
    vals = discriminant(p, geom, grid)
    second = np.diff(vals, 2) / h**2
    assert np.max(np.abs(second)) < 1e2


def test_chi_is_isospectral():
    geom = LatticeGeometry(d=1.0)
    p0 = make_interaction(0.7, 0.5, 1.1, (0.7 * 0.5 + 1.0) / 1.1, chi=0.0)
    p1 = make_interaction(0.7, 0.5, 1.1, (0.7 * 0.5 + 1.0) / 1.1, chi=1.3)
    b0 = band_structure(p0, geom, e_max=50.0)
    b1 = band_structure(p1, geom, e_max=50.0)
    assert len(b0.edges()) == len(b1.edges())
    for a, b in zip(b0.edges(), b1.edges()):
        assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_negative_ground_energy_for_attractive_delta():
    p = make_interaction(-4.0, 0.0, 1.0, 1.0)
    bs = band_structure(p, LatticeGeometry(d=1.0), e_max=30.0)
    assert bs.e0 < 0.0


def test_ground_state_symmetry_free(free_unit):
    gs = ground_state_symmetry(*free_unit)
    assert gs.symmetry == "periodic"
    assert gs.e0 == pytest.approx(0.0, abs=1e-9)
    assert gs.residual < 1e-8
    assert gs.matches_sign_rule


@pytest.mark.parametrize("alpha", [1.0, -1.0])
def test_ground_state_symmetry_delta(alpha):
    p = make_interaction(alpha, 0.0, 1.0, 1.0)
    gs = ground_state_symmetry(p, LatticeGeometry(d=1.0))
    assert gs.symmetry == "periodic"
    assert gs.residual < 1e-8
    assert gs.matches_sign_rule


def test_ground_state_symmetry_negative_beta():
    p = make_interaction(0.0, -1.0, 1.0, 1.0)
    gs = ground_state_symmetry(p, LatticeGeometry(d=1.0))
    assert gs.symmetry == "antiperiodic"
    assert gs.residual < 1e-8
    assert gs.matches_sign_rule


def test_asymptotics_free_single_band(free_unit):
    rep = asymptotics_report(*free_unit, 10)
    assert rep.single_band
    assert math.isnan(rep.fitted_mu)


def test_asymptotics_delta_prime_band_widths(dprime_unit):
    rep = asymptotics_report(*dprime_unit, 30)
    assert abs(rep.measured_constant - 8.0) / 8.0 < 0.05
    assert abs(rep.fitted_mu - 1.0) < 0.15
