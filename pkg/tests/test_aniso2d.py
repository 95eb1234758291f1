import itertools
import json
import math

import numpy as np
import pytest

import geopursuit as gp


def test_separable_product_at_identity():
    d = gp.Aniso2DDictionary((48, 48))
    g = d.synthesize(d.point(24.0, 24.0, 0.0, 1.0, 1.0))
    x = np.arange(48.0) - 24.0
    hat = (1.0 - x * x) * np.exp(-0.5 * x * x)
    gauss = np.exp(-0.5 * x * x)
    sep = np.outer(hat, gauss)
    sep /= np.linalg.norm(sep)
    assert np.abs(g.data - sep).max() < 1e-12


def test_mother_amplitude_constant():
    # peak of the continuum mother is sqrt(4 / (3 pi))
    d = gp.Aniso2DDictionary((64, 64))
    c = math.sqrt(4.0 / (3.0 * math.pi))
    raw = d._raw(np.array([32.0, 32.0, 0.0, 1.0, 1.0]), (64, 64))
    assert raw[32, 32] == pytest.approx(c, abs=1e-14)
    # at a well-resolved scale the renormalized atom keeps the continuum
    # amplitude c / sqrt(a1 a2)
    g = d.synthesize(d.point(32.0, 32.0, 0.0, 3.0, 3.0))
    assert g.data[32, 32] == pytest.approx(c / 3.0, abs=1e-6)


def test_quarter_turn_swaps_axes():
    # the mother is even in its second frame coordinate, so a quarter turn
    # equals transposing the axis roles for a centered atom on a square grid
    d = gp.Aniso2DDictionary((48, 48))
    g0 = d.synthesize(d.point(24.0, 24.0, 0.0, 2.0, 3.0))
    g90 = d.synthesize(d.point(24.0, 24.0, math.pi / 2, 2.0, 3.0))
    assert np.abs(g90.data - g0.data.T).max() < 1e-10


def test_boundary_atom_unit_norm():
    d = gp.Aniso2DDictionary((32, 32))
    g = d.synthesize(d.point(0.0, 31.0, 0.9, 4.0, 7.0))
    assert abs(gp.inner_product(g, g) - 1.0) < 1e-12


def test_pi_periodic_orientation():
    d = gp.Aniso2DDictionary((40, 40))
    raw_a = d._raw(np.array([20.5, 19.2, 0.7, 2.5, 4.0]), (40, 40))
    raw_b = d._raw(np.array([20.5, 19.2, 0.7 + math.pi, 2.5, 4.0]), (40, 40))
    assert np.abs(raw_a / np.linalg.norm(raw_a)
                  - raw_b / np.linalg.norm(raw_b)).max() < 1e-12


def test_isotropic_scales_rotation_invariant_oversampled():
    # with a1 == a2 the atom is a function of the rotated frame only through
    # its Mexican-Hat axis; checked on a 4x oversampled lattice to separate
    # parametrization effects from pixel-sampling anisotropy
    d = gp.Aniso2DDictionary((32, 32))
    lam1 = d.point(16.0, 16.0, 0.0, 3.0, 3.0)
    lam2 = d.point(16.0, 16.0, math.pi / 2, 3.0, 3.0)
    g1 = d.oversampled_atom(lam1, factor=4)
    g2 = d.oversampled_atom(lam2, factor=4)
    assert np.abs(g1 - g2.T).max() < 1e-6


def test_scale_domain_enforced():
    d = gp.Aniso2DDictionary((32, 32))
    with pytest.raises(gp.DomainError):
        d.synthesize(d.point(16.0, 16.0, 0.0, 0.5, 2.0))
    with pytest.raises(gp.DomainError):
        d.synthesize(d.point(16.0, 16.0, 0.0, 2.0, 40.0))


def test_grid_count_trivial():
    spec = gp.Grid2DSpec(nx=5, ny=7, j_scales=1, k_orients=1)
    pts = list(spec.points())
    assert len(pts) == 35 == spec.count
    assert all(p.coords[3] == pytest.approx(0.7) for p in pts)


def test_grid_count_formula():
    spec = gp.Grid2DSpec(nx=64, ny=64, j_scales=3, k_orients=4)
    assert spec.count == 9 * 4 * 4096 == 147456
    # slab stream agrees with the formula
    assert sum(1 for _ in spec.slabs()) * 64 * 64 == spec.count


def test_grid_scales_logarithmic():
    spec = gp.Grid2DSpec(nx=64, ny=64, j_scales=5, k_orients=2)
    scales = spec.scales()
    assert scales[0] == pytest.approx(0.7)
    assert scales[-1] == pytest.approx(64.0)
    ratios = scales[1:] / scales[:-1]
    assert np.allclose(ratios, ratios[0], rtol=1e-12)


def test_grid_orientations_evenly_spaced():
    spec = gp.Grid2DSpec(nx=8, ny=8, j_scales=1, k_orients=4)
    assert np.allclose(spec.thetas(), [0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])


def test_grid_enumeration_order():
    spec = gp.Grid2DSpec(nx=2, ny=3, j_scales=2, k_orients=2)
    pts = list(spec.points())
    assert len(pts) == 2 * 2 * 2 * 2 * 3
    # positions vary fastest, row-major
    first_slab = pts[:6]
    assert [(p.coords[0], p.coords[1]) for p in first_slab] == [
        (0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    # scale of the first axis is the outermost loop
    a1_sequence = [p.coords[3] for p in pts]
    assert a1_sequence == sorted(a1_sequence)


def test_grid_validation_and_json():
    with pytest.raises(ValueError):
        gp.Grid2DSpec(nx=0, ny=4, j_scales=1, k_orients=1)
    with pytest.raises(ValueError):
        gp.Grid2DSpec(nx=4, ny=4, j_scales=0, k_orients=1)
    spec = gp.Grid2DSpec(nx=64, ny=48, j_scales=3, k_orients=4)
    back = gp.Grid2DSpec.from_json(spec.to_json())
    assert (back.nx, back.ny, back.j_scales, back.k_orients) == (64, 48, 3, 4)
    assert set(json.loads(spec.to_json())) == {"Nx", "Ny", "J", "K"}
