import math

import numpy as np
import pytest

import geopursuit as gp
from geopursuit.dictionaries import ParamPoint
from conftest import interior_affine_points


def test_param_point_validation():
    p = gp.ParamPoint((3.0, 2.0), (gp.TRANSLATION, gp.SCALE))
    assert len(p) == 2
    with pytest.raises(gp.DomainError):
        gp.ParamPoint((3.0, -1.0), (gp.TRANSLATION, gp.SCALE))
    with pytest.raises(ValueError):
        gp.ParamPoint((3.0,), (gp.TRANSLATION, gp.SCALE))
    with pytest.raises(ValueError):
        gp.ParamPoint((3.0,), ("wobble",))


def test_synthesize_unit_norm_interior():
    d = gp.Affine1DDictionary(512)
    g = d.synthesize(d.point(256.0, 16.0))
    assert abs(g.norm() - 1.0) < 1e-12


def test_synthesize_unit_norm_boundary_truncated():
    # half the atom hangs off the left edge; renormalization restores norm 1
    d = gp.Affine1DDictionary(512)
    g = d.synthesize(d.point(0.0, 16.0))
    assert abs(g.norm() - 1.0) < 1e-12


def test_synthesize_peak_value():
    d = gp.Affine1DDictionary(512)
    g = d.synthesize(d.point(256.0, 8.0))
    c = gp.mexican_hat_norm_constant()
    assert g.data[256] == pytest.approx(c / math.sqrt(8.0), abs=1e-6)


def test_synthesize_domain_errors():
    d = gp.Affine1DDictionary(512, scale_range=(1.0, 64.0))
    with pytest.raises(gp.DomainError):
        d.synthesize(d.point(10.0, 0.5))
    with pytest.raises(gp.DomainError):
        d.synthesize(d.point(10.0, 100.0))
    with pytest.raises(gp.DomainError):
        d.synthesize(d.point(-1e6, 2.0))  # no support in the buffer


def test_norm_translation_invariance():
    d = gp.Affine1DDictionary(1024)
    vals = [d.synthesize(d.point(b, 8.0)).norm() for b in (300.0, 400.5, 612.25)]
    assert max(vals) - min(vals) < 1e-12


def test_partials_match_finite_differences(rng):
    d = gp.Affine1DDictionary(512)
    for lam in interior_affine_points(d, rng, 10):
        analytic = d.partials(lam)
        fd = d._fd_partials(lam, d.shape)
        for a, f in zip(analytic, fd):
            rel = np.linalg.norm(a.data - f.data) / np.linalg.norm(a.data)
            assert rel < 1e-4


def test_partials_orthogonal_to_atom(rng):
    d = gp.Affine1DDictionary(512)
    for lam in interior_affine_points(d, rng, 10):
        g = d.synthesize(lam)
        for p in d.partials(lam):
            assert abs(gp.inner_product(p, g)) < 1e-8


def test_partials_boundary_scale_raises():
    d = gp.Affine1DDictionary(512, scale_range=(1.0, 64.0))
    with pytest.raises(gp.DomainError):
        d.partials(d.point(100.0, 1.0))
    with pytest.raises(gp.DomainError):
        d.partials(d.point(100.0, 64.0))


def test_2d_has_five_partials():
    d = gp.Aniso2DDictionary((32, 32))
    parts = d.partials(d.point(16.0, 16.0, 0.3, 2.0, 3.0))
    assert len(parts) == 5
    assert all(p.shape == (32, 32) for p in parts)


def test_second_partials_symmetric(rng):
    d = gp.Affine1DDictionary(512)
    lam = d.point(247.3, 9.1)
    sec = d.second_partials(lam)
    off = np.abs(sec[0][1].data - sec[1][0].data).max()
    assert off / np.abs(sec[0][1].data).max() < 1e-6


def test_second_partials_metric_identity(rng):
    for d, lam in [
        (gp.Affine1DDictionary(512), None),
        (gp.Aniso2DDictionary((48, 48)), None),
    ]:
        if isinstance(d, gp.Affine1DDictionary):
            lam = d.point(251.7, 12.4)
        else:
            lam = d.point(23.4, 24.8, 0.9, 3.3, 5.1)
        g0 = d.synthesize(lam)
        G = gp.metric(d, lam)
        sec = d.second_partials(lam)
        for i in range(d.P):
            for j in range(d.P):
                lhs = gp.inner_product(sec[i][j], g0)
                assert lhs == pytest.approx(-G.matrix[i, j], abs=1e-6)


def test_pure_translation_second_derivative_vs_fd():
    d = gp.Affine1DDictionary(512)
    lam = d.point(260.0, 10.0)
    analytic = d.second_partials(lam)[0][0].data
    fd = d._fd_second_from_synthesize(lam, d.shape)[0][0]
    rel = np.linalg.norm(analytic - fd) / np.linalg.norm(analytic)
    assert rel < 1e-3


def test_score_directional_derivative(rng):
    # (S(l+hv) - S(l-hv)) / 2h vs v.partial(S) along random directions
    d = gp.Affine1DDictionary(512)
    u = gp.SignalBuffer(rng.standard_normal(512))
    for lam in interior_affine_points(d, rng, 5, scale_lo=4.0):
        info = gp.gradient(d, u, lam)
        v = rng.standard_normal(2)
        v[1] *= lam.coords[1]  # comparable step in the scale direction
        v /= np.linalg.norm(v)
        h = 1e-3
        sp = gp.score(d, u, ParamPoint(lam.coords + h * v, lam.kinds))
        sm = gp.score(d, u, ParamPoint(lam.coords - h * v, lam.kinds))
        fd = (sp - sm) / (2 * h)
        exact = float(v @ info.partial)
        assert fd == pytest.approx(exact, rel=1e-4, abs=1e-9)


def test_clamp_pulls_into_domain():
    d = gp.Affine1DDictionary(256, scale_range=(1.0, 32.0))
    clamped = d.clamp_coords(np.array([-40.0, 1000.0]))
    assert 0.0 <= clamped.coords[0] <= 255.0
    assert 1.0 < clamped.coords[1] < 32.0
    neg = d.clamp_coords(np.array([10.0, -5.0]))
    assert neg.coords[1] > 1.0


def test_angle_canonicalization():
    d = gp.Aniso2DDictionary((16, 16))
    p = d.point(8.0, 8.0, math.pi + 0.25, 2.0, 2.0)
    assert p.coords[2] == pytest.approx(0.25, abs=1e-12)
    assert 0.0 <= d.clamp(p).coords[2] < math.pi


class ConstantMother(gp.Dictionary):
    """Degenerate test dictionary: the atom does not depend on b."""

    def __init__(self, n):
        self.n = n
        self.shape = (n,)
        self.kinds = (gp.TRANSLATION,)
        self.scale_range = (1.0, 1.0)

    def translation_extent(self, i, shape):
        return (0.0, float(shape[0] - 1))

    def require_interior(self, lam):
        return None

    def _raw(self, coords, shape):
        return np.ones(shape[0])


def test_degenerate_dictionary_rejected():
    d = ConstantMother(32)
    assert abs(d.synthesize(d.point(3.0)).norm() - 1.0) < 1e-12
    with pytest.raises(gp.DegenerateMetricError):
        gp.metric(d, d.point(3.0))
