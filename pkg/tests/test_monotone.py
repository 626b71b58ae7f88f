import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greensplit.errors import DomainError
from greensplit.green import offcenter_green, radial_green
from greensplit.manifold import cone, euclidean, sphere_area, unit_ball_volume
from greensplit.monotone import (MonotoneProfile, contour_level_area, derivative_identity_check,
                                 level_integrals, monotone_profile, pinching, pinching_at,
                                 write_pinching_csv)
from greensplit.regions import regions
from models import pole, smoothed


@pytest.fixture(scope="module")
def euclid_offcenter():
    return offcenter_green(euclidean(3), 1.0, L=32)


@given(st.floats(0.05, 50.0))
def test_euclidean_center_values(s):
    A, V = level_integrals(radial_green(euclidean(3)), s)
    assert A.value == pytest.approx(4 * math.pi, rel=1e-12)
    assert V.value == pytest.approx(4 * math.pi / 3, rel=1e-10)


def test_euclidean_offcenter_values(euclid_offcenter):
    prof = monotone_profile(euclid_offcenter, [0.5, 1.0, 2.0, 8.0, 32.0])
    np.testing.assert_allclose(prof.A, 4 * math.pi, rtol=1e-10)
    np.testing.assert_allclose(prof.V, 4 * math.pi / 3, rtol=1e-10)
    np.testing.assert_allclose(prof.F, -4 * math.pi / 3, rtol=1e-10)


@pytest.mark.parametrize("n, a", [(3, 0.8), (4, 0.6)])
def test_cone_vertex_constants(n, a):
    prof = monotone_profile(radial_green(cone(n, a)), [0.5, 2.0, 10.0])
    np.testing.assert_allclose(prof.A, n * unit_ball_volume(n) * a ** (n - 1), rtol=1e-12)
    assert pinching(prof, 0.5, 10.0).F == pytest.approx(0, abs=1e-10)
    if n == 3 and a == 0.8:
        assert prof.A[0] == pytest.approx(8.04248, abs=1e-5)


@pytest.mark.parametrize("rho", [0.0, 1.0])
def test_smoothed_cone_monotone(rho):
    f = pole(smoothed(0.8, 0.1), rho)
    prof = monotone_profile(f, [0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    assert np.all(np.diff(prof.A) <= prof.errA[1:] + prof.errA[:-1] + 1e-12)
    assert np.all(np.diff(prof.F) >= -(prof.errF[1:] + prof.errF[:-1] + 1e-12))
    assert prof.violations() == (0.0, 0.0)


def test_pinchings_decrease_with_width():
    # F at the vertex pole falls like w^3; off-vertex poles tend to the cone's value
    rows = [(pinching_at(pole(smoothed(0.8, w), 0.0), 10, 20),
             pinching_at(pole(smoothed(0.8, w), 0.5), 10, 20)) for w in (0.4, 0.1)]
    (c0, o0), (c1, o1) = rows
    assert 0 < c1.F < c0.F / 8
    assert 0 < o1.W < o0.W and 0 < o1.F < o0.F


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=8))
def test_pinching_additive_on_monotone_data(steps):
    # cumulative sums give monotone A and F; pinchings then add over nested intervals
    inc = np.abs(np.asarray(steps))
    A = 10 - np.concatenate([[0.0], np.cumsum(inc)])
    V = np.full_like(A, 1.0)
    radii = np.arange(1.0, A.size + 1)
    prof = MonotoneProfile(3, radii, A, V, np.zeros_like(A), np.zeros_like(A))
    s, t, u = radii[0], radii[A.size // 2], radii[-1]
    if not s < t < u:
        return
    assert pinching(prof, s, u).W == pytest.approx(pinching(prof, s, t).W + pinching(prof, t, u).W)
    assert pinching(prof, s, u).F == pytest.approx(pinching(prof, s, t).F + pinching(prof, t, u).F)
    assert pinching(prof, s, t).W >= 0 and pinching(prof, s, t).F >= 0


def test_contour_oracle_agrees(reference_offcenter):
    ray = regions(reference_offcenter).level_area(1.5).value
    grid = contour_level_area(reference_offcenter, 1.5, r_top=4.0)
    assert grid == pytest.approx(ray, rel=1e-4)


def test_ray_quadrature_converges():
    f = pole(smoothed(0.8, 0.1), 1.0)
    ref = regions(f, n_theta=256).level_area(2.0).value
    errs = [abs(regions(f, n_theta=m).level_area(2.0).value - ref) for m in (32, 64)]
    assert errs[1] <= 0.5 * errs[0] or errs[1] < 1e-12


# ---------------------------------------------------------------------------
# derivative identities


def test_derivative_identity_exact_models(euclid_offcenter):
    for f in (radial_green(euclidean(3)), radial_green(cone(3, 0.8)), euclid_offcenter):
        chk = derivative_identity_check(f, 2.0)
        assert abs(chk.dA_fd) < 1e-8 and abs(chk.dA_rhs) < 1e-8
        assert abs(chk.dF_fd) < 1e-8 and abs(chk.dF_rhs) < 1e-8


def test_derivative_identity_offcenter(reference_offcenter):
    coarse = derivative_identity_check(reference_offcenter, 2.0, rel_step=0.1)
    fine = derivative_identity_check(reference_offcenter, 2.0, rel_step=0.05)
    assert fine.residual_A <= 0.05 and fine.residual_F <= 0.05
    assert fine.residual_A <= 0.5 * coarse.residual_A
    assert fine.residual_F <= 0.5 * coarse.residual_F
    # signs
    assert fine.dA_rhs <= 0 <= fine.dF_rhs


# ---------------------------------------------------------------------------
# plumbing


def test_profile_csv(tmp_path):
    prof = monotone_profile(radial_green(cone(3, 0.8)), [1.0, 2.0])
    prof.write_csv(tmp_path / "p.csv")
    rows = list(csv.reader(open(tmp_path / "p.csv")))
    assert rows[0] == ["r", "A", "V", "F", "errA", "errV"] and len(rows) == 3
    write_pinching_csv([pinching(prof, 1.0, 2.0)], tmp_path / "q.csv")
    rows = list(csv.reader(open(tmp_path / "q.csv")))
    assert rows[0] == ["s", "t", "W", "F_pinch", "errW", "errF"]


def test_profile_errors():
    f = radial_green(euclidean(3))
    with pytest.raises(DomainError):
        monotone_profile(f, [2.0, 1.0])
    prof = monotone_profile(f, [1.0, 2.0])
    with pytest.raises(DomainError):
        pinching(prof, 2.0, 1.0)
    with pytest.raises(DomainError):
        pinching(prof, 1.0, 3.0)


def test_scale_exceeds_grid(reference_offcenter):
    with pytest.raises(DomainError, match="exceeds grid"):
        regions(reference_offcenter).level_area(1e14)
    with pytest.raises(DomainError, match="exceeds grid"):
        contour_level_area(reference_offcenter, 10.0, r_top=2.0)


def test_level_area_matches_sphere_area_weighting():
    # radial shortcut on a cone: s^{1-n} |S^{n-1}| f(r_s)^{n-1} b'(r_s)^3 = |S^{n-1}| a^{n-1}
    A, _ = level_integrals(radial_green(cone(4, 0.7)), 3.0)
    assert A.value == pytest.approx(sphere_area(3) * 0.7**3, rel=1e-12)
