import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.special import eval_gegenbauer

from greensplit.errors import DomainError
from greensplit.green import (BField, export_field_csv, field_for_pole, gegenbauer,
                              offcenter_green, radial_green, uniform_estimates, zonal_harmonics)
from greensplit.manifold import (CENTER, ball_sampler, cone, euclidean, sphere_area,
                                 surface_distance)
from models import pole, smoothed, tanh_cap


# ---------------------------------------------------------------------------
# zonal harmonics


@given(st.integers(0, 30), st.floats(0.5, 3.0), st.floats(-1.0, 1.0))
def test_gegenbauer_recurrence_matches_scipy(L, lam, x):
    ours = gegenbauer(L, lam, x)
    ref = np.array([eval_gegenbauer(k, lam, x) for k in range(L + 1)])
    np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_zonal_value_at_pole_is_dimension(n):
    # Z_l(1) = dim H_l / |S^{n-1}|
    L = 12
    Z = zonal_harmonics(L, n, np.array(1.0))[0]
    dims = [math.comb(l + n - 1, n - 1) - math.comb(l + n - 3, n - 1) for l in range(L + 1)]
    np.testing.assert_allclose(Z * sphere_area(n - 1), dims, rtol=1e-12)


@pytest.mark.parametrize("n", [3, 4])
def test_zonal_derivatives(n):
    x = np.linspace(-0.9, 0.9, 7)
    h = 1e-5
    Z, Zx, Zxx = zonal_harmonics(10, n, x)
    Zp, Zm = zonal_harmonics(10, n, x + h)[0], zonal_harmonics(10, n, x - h)[0]
    np.testing.assert_allclose(Zx, (Zp - Zm) / (2 * h), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(Zxx, (Zp - 2 * Z + Zm) / h**2, rtol=1e-3, atol=1e-3)


def test_zonal_reproducing_on_s2():
    # integral over S^2 of Z_l(<x, y>) Z_m(<y, z>) dy = delta_lm Z_l(<x, z>)
    n, L = 3, 4
    t, w = np.polynomial.legendre.leggauss(40)
    ph = np.linspace(0, 2 * np.pi, 81)[:-1]
    T, P = np.meshgrid(t, ph, indexing="ij")
    W = np.outer(w, np.full(ph.size, 2 * np.pi / ph.size))
    y = np.stack([T, np.sqrt(1 - T**2) * np.cos(P), np.sqrt(1 - T**2) * np.sin(P)], -1)
    z = np.array([math.cos(0.7), math.sin(0.7), 0.0])
    Zx = zonal_harmonics(L, n, T)[0]
    Zz = zonal_harmonics(L, n, y @ z)[0]
    gram = np.einsum("lij,mij,ij->lm", Zx, Zz, W)
    expect = np.diag(zonal_harmonics(L, n, np.array(z[0]))[0])
    np.testing.assert_allclose(gram, expect, atol=1e-10)


# ---------------------------------------------------------------------------
# radial poles


@pytest.mark.parametrize("n", [3, 4, 5])
def test_radial_euclidean_closed_form(n):
    prof = radial_green(euclidean(n)).profile(np.array([0.5, 1.0, 3.0]))
    np.testing.assert_allclose(prof.G_CM, prof.r ** (2 - n), rtol=1e-12)
    np.testing.assert_allclose(prof.b, prof.r, rtol=1e-12)


@pytest.mark.parametrize("a", [0.6, 0.8, 0.9])
def test_radial_cone_b_is_distance(a):
    f = radial_green(cone(3, a))
    r = np.geomspace(1e-3, 50, 40)
    v = f.values(r, np.zeros_like(r))
    np.testing.assert_allclose(v.b, r, rtol=1e-12)
    np.testing.assert_allclose(v.b_r, 1.0, rtol=1e-12)


@pytest.mark.parametrize("spec", [tanh_cap(2.0, 0.7), smoothed(0.7, 0.3)], ids=["tanh", "smoothed"])
def test_radial_green_against_direct_quadrature(spec):
    # G_D(r) = |S^{n-1}|^{-1} int_r^inf f^{1-n}, tail exact beyond r_max
    n, p = spec.n, spec.profile
    f = radial_green(spec)
    for r in (0.05, 0.4, 2.0):
        body, _ = integrate.quad(lambda t: float(p.f(np.array([t]))[0]) ** (1 - n), r, p.r_max,
                                 epsabs=0, epsrel=1e-12, limit=400)
        tail = (p.f_max ** (2 - n)) / ((n - 2) * p.slope)
        G = (body + tail) / sphere_area(n - 1)
        assert f.profile(np.array([r])).G_D[0] == pytest.approx(G, rel=1e-8)


@pytest.mark.parametrize("spec", [tanh_cap(2.0, 0.7), smoothed(0.8, 0.1)], ids=["tanh", "smoothed"])
def test_radial_profile_invariants(spec):
    prof = radial_green(spec).profile(np.geomspace(1e-3, 40, 200))
    assert np.all(np.diff(prof.G_D) < 0) and np.all(prof.G_D > 0)
    assert np.all(np.diff(prof.b) > 0)
    assert np.all(prof.db > 0) and np.all(prof.db <= 1 / spec.b_inf * (1 + 1e-9))
    # b/r decreases from 1/b_inf toward 1
    assert np.all(prof.b > prof.r) and prof.b[-1] / prof.r[-1] == pytest.approx(1, abs=2e-2)


def test_b_inverse_round_trip():
    f = radial_green(smoothed(0.8, 0.1))
    for s in (0.01, 0.3, 5.0):
        r = f.b_inverse(s)
        assert f.profile(np.array([r])).b[0] == pytest.approx(s, rel=1e-10)


# ---------------------------------------------------------------------------
# off-center poles


@pytest.mark.parametrize("n", [3, 4])
def test_offcenter_euclidean_is_distance(n):
    spec = euclidean(n)
    f = offcenter_green(spec, 1.0, L=32)
    r = np.geomspace(0.01, 20, 40)
    R, P = np.meshgrid(r, np.linspace(0, np.pi, 17), indexing="ij")
    R, P = R.ravel(), P.ravel()
    d = surface_distance(spec, 1.0, R, P)
    keep = d > 0.05
    v = f.values(R[keep], P[keep])
    np.testing.assert_allclose(v.b, d[keep], rtol=1e-10)
    np.testing.assert_allclose(v.grad2, 1.0, atol=1e-9)


def test_side_flip_mirrors_field():
    spec = smoothed(0.8, 0.2)
    up, down = pole(spec, 0.5, 1), pole(spec, 0.5, -1)
    r = np.array([0.3, 1.0, 2.5])
    phi = np.array([0.2, 1.3, 2.9])
    np.testing.assert_allclose(up.values(r, phi).b, down.values(r, np.pi - phi).b, rtol=1e-12)


def test_small_rho_tends_to_radial():
    spec = smoothed(0.8, 0.2)
    rad = radial_green(spec)
    r = np.array([0.5, 1.0, 3.0])
    phi = np.array([0.4, 1.5, 2.7])
    b0 = rad.values(r, phi).b
    errs = [np.max(np.abs(BField(spec, rho, 24).values(r, phi).b - b0)) for rho in (0.08, 0.04)]
    assert errs[1] < errs[0] and errs[1] < 0.05


def test_far_field_ratio_on_cone():
    spec = cone(3, 0.9)
    f = offcenter_green(spec, 1.0, L=48)
    r = np.array([25.0, 40.0, 60.0])
    for phi in (0.0, 1.0, np.pi):
        ph = np.full_like(r, phi)
        d = surface_distance(spec, 1.0, r, ph)
        ratio = f.values(r, ph).b / d
        assert np.all((d < 20) | ((ratio >= 0.98) & (ratio <= 1.02)))


def test_harmonicity_second_order(reference_offcenter):
    # Delta G in (r, phi) by centered differences; residual falls ~4x per halving
    f = reference_offcenter
    spec = f.spec
    n = spec.n
    r0, p0 = np.array([1.6, 0.7, 2.3]), np.array([0.9, 2.0, 0.4])

    def G(r, p):
        return f.values(r, p).G

    res = []
    for h in (0.02, 0.01):
        Grr = (G(r0 + h, p0) - 2 * G(r0, p0) + G(r0 - h, p0)) / h**2
        Gr = (G(r0 + h, p0) - G(r0 - h, p0)) / (2 * h)
        Gpp = (G(r0, p0 + h) - 2 * G(r0, p0) + G(r0, p0 - h)) / h**2
        Gp = (G(r0, p0 + h) - G(r0, p0 - h)) / (2 * h)
        fr, dfr = spec.f(r0), spec.profile.df(r0)
        lap = Grr + (n - 1) * dfr / fr * Gr + (Gpp + (n - 2) / np.tan(p0) * Gp) / fr**2
        res.append(np.max(np.abs(lap / G(r0, p0))))
    assert res[1] < 0.35 * res[0]


def test_mode_truncation_within_tail_bound():
    spec = smoothed(0.8, 0.1)
    coarse, fine = pole(spec, 1.0, 1, 24), pole(spec, 1.0, 1, 48)
    ph = np.linspace(0.1, np.pi, 16)
    tail = coarse.mode_tail(np.full_like(ph, 1.0), ph)
    r = np.array([0.5, 1.0, 1.0, 2.0])
    phi = np.array([1.0, 0.5, 2.0, 0.3])
    rel = np.abs(fine.values(r, phi).b / coarse.values(r, phi).b - 1)
    assert np.all(rel <= tail)


def test_offcenter_tail_warning():
    with pytest.warns(RuntimeWarning, match="tail"):
        offcenter_green(smoothed(0.8, 0.1), 1.0, L=8)


def test_gradient_bound_offcenter(reference_offcenter):
    f = reference_offcenter
    S = ball_sampler(f.spec, CENTER, 3.0, 8192, breaks=(1.0,))
    g = np.sqrt(f.values(S.r, S.phi).grad2)
    assert g.max() <= (1 + 1e-3) / f.spec.b_inf


def test_uniform_estimates_exact_models():
    for spec in (euclidean(3), cone(3, 0.8)):
        u = uniform_estimates(radial_green(spec), 1.0)
        assert u.sup_ratio < 1e-6 and u.grad_defect < 1e-6
    u = uniform_estimates(offcenter_green(euclidean(3), 0.5, L=32), 1.0)
    assert u.sup_ratio < 1e-6 and u.grad_defect < 1e-6


def test_export_csv(tmp_path, reference_offcenter):
    path = tmp_path / "field.csv"
    digest = export_field_csv(reference_offcenter, path, nr=16, nphi=8)
    lines = path.read_text().splitlines()
    assert lines[0].startswith(f"# spec={reference_offcenter.spec.hash} rho=1 L=48")
    assert lines[1] == "r,phi,b,db_dr,db_dphi_over_f"
    assert len(lines) == 2 + 16 * 8
    again = export_field_csv(reference_offcenter, tmp_path / "again.csv", nr=16, nphi=8)
    assert digest == again
    assert hashlib.sha256(path.read_bytes()).digest() == \
        hashlib.sha256((tmp_path / "again.csv").read_bytes()).digest()


def test_b_vanishes_at_pole_and_is_positive(reference_offcenter):
    f = reference_offcenter
    near = f.values(np.array([1.0 + 1e-4]), np.array([0.0])).b[0]
    assert 0 < near < 1e-3
    r = np.geomspace(0.01, 10, 30)
    assert np.all(f.values(r, np.full_like(r, 1.0)).b > 0)


def test_domain_errors():
    with pytest.raises(DomainError):
        BField(smoothed(0.8, 0.1), -1.0)
