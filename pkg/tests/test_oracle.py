"""Finite-difference cross-check operator: convergence and agreement."""

import math

import numpy as np
import pytest

from shellspectra import (
    ChannelSpec,
    ConfigError,
    GridMisaligned,
    LatticeGeometry,
    band_structure,
    count_wronskian_zeros,
    discretize,
    ground_state_symmetry,
    locate_eigenvalues,
    make_interaction,
    refine_eigenvalues,
)
from conftest import random_params

FREE = make_interaction(0.0, 0.0, 1.0, 1.0)


def shellfree_geom(h: float, box: float) -> LatticeGeometry:
    """Geometry whose first shell sits beyond ``box`` with d/h odd."""
    n = round(2.2 * box / h)
    n += (n + 1) % 2
    return LatticeGeometry(d=n * h)


def test_free_dirichlet_box_eigenvalues():
    L, h = 5.0, 5.0 / 1000
    op = discretize(None, FREE, shellfree_geom(h, L), grid_step=h, domain=(0.0, L))
    got = op.lowest_eigenvalues(3)
    for n, e in enumerate(got, start=1):
        exact = (n * math.pi / L) ** 2
        assert abs(e - exact) / exact < 1e-3


def test_free_box_h_squared_convergence():
    L = 5.0
    exact = (math.pi / L) ** 2
    errs = []
    for cells in (100, 200, 400):
        h = L / cells
        op = discretize(None, FREE, shellfree_geom(h, L), grid_step=h, domain=(0.0, L))
        errs.append(abs(op.lowest_eigenvalues(1)[0] - exact))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_richardson_pair_error_reduction():
    # the (d/m, d/(2m+1)) extrapolation must beat the fine grid by >= 3.5
    ch = ChannelSpec(3, 1)
    p = make_interaction(1.0, 0.0, 1.0, 1.0)
    geom = LatticeGeometry(d=1.0)
    domain = (0.0, 20.0)
    extrap, coarse, fine = refine_eigenvalues(ch, p, geom, domain, 4, base_cells=33)
    ref, _, _ = refine_eigenvalues(ch, p, geom, domain, 4, base_cells=131)
    err_fine = np.abs(fine - ref)
    err_extrap = np.abs(extrap - ref)
    assert np.all(err_extrap < err_fine / 3.5)


def test_periodic_box_reproduces_ground_energy():
    p = make_interaction(1.0, 0.0, 1.0, 1.0)
    geom = LatticeGeometry(d=1.0)
    e0 = ground_state_symmetry(p, geom).e0
    extrap, _, _ = refine_eigenvalues(
        p=p, ch=None, geom=geom, domain=(0.0, 20.0), k=1, base_cells=65, bc="periodic"
    )
    assert abs(extrap[0] - e0) < 1e-3


def test_delta_prime_wall_state_matches_radial():
    # the planar s-wave channel of a pure delta' lattice has genuinely
    # negative eigenvalues; oracle and shooting must agree on the first one
    p = make_interaction(0.0, 4.0, 1.0, 1.0)
    geom = LatticeGeometry(d=1.0)
    ch = ChannelSpec(2, 0)
    r_max = 60.0
    radial = locate_eigenvalues(ch, p, geom, (-0.2, -1e-4), domain=(1e-3, r_max))
    assert radial, "shooting found no negative eigenvalue"
    extrap, _, _ = refine_eigenvalues(ch, p, geom, (0.0, r_max), 3, base_cells=65)
    oracle_neg = [e for e in extrap if e < -1e-4]
    assert oracle_neg, "oracle found no negative eigenvalue"
    assert abs(oracle_neg[0] - radial[0]) < 1e-3


def test_count_agreement_random_windows(rng):
    # small-scale version of the oracle-equivalence acceptance run
    geom = LatticeGeometry(d=1.0)
    for _ in range(5):
        p = random_params(rng)
        bs = band_structure(p, geom, e_max=60.0)
        if not bs.gaps:
            continue
        lo, hi = bs.gaps[0]
        if hi - lo < 1e-6:
            continue
        pad = 0.02 * (hi - lo)
        window = (lo + pad, hi - pad)
        nu = int(rng.integers(2, 4))
        l = int(rng.integers(1, 3))
        ch = ChannelSpec(nu, l)
        r_max = 20.0
        n_shoot = count_wronskian_zeros(ch, p, geom, *window, domain=(1e-3, r_max))
        extrap, _, _ = refine_eigenvalues(ch, p, geom, (0.0, r_max), 40, base_cells=65)
        n_oracle = int(np.sum((extrap > window[0]) & (extrap < window[1])))
        assert n_shoot == n_oracle


def test_grid_alignment_rejected():
    geom = LatticeGeometry(d=1.0)
    with pytest.raises(GridMisaligned):
        discretize(None, FREE, geom, grid_step=1.0 / 64, domain=(0.0, 8.0))
    with pytest.raises(GridMisaligned):
        discretize(None, FREE, geom, grid_step=1.0 / 65, domain=(0.0, 8.3))


def test_radial_wall_must_anchor_at_origin():
    with pytest.raises(ConfigError):
        discretize(
            ChannelSpec(3, 0),
            FREE,
            LatticeGeometry(d=1.0),
            grid_step=1.0 / 65,
            domain=(0.5, 8.5),
        )
