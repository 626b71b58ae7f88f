import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greensplit.errors import DegenerateConfigurationError, DomainError
from greensplit.green import offcenter_green, radial_green
from greensplit.manifold import cone, euclidean
from greensplit.splitting import (AxisPole, PoleConfig, axis_pole_distances, euclidean_splitting,
                                  finite_gh, grad_average, independence_proxy, orthonormalize,
                                  raw_splitting, splitting_report, symmetry_accepted,
                                  write_report_csv)
from models import pole, smoothed

E = np.eye(3)


def _bundle(spec, rho0, side0, rho1, side1, r=1.0, count=4096):
    cfg = PoleConfig(r, (AxisPole(rho0, side0), AxisPole(rho1, side1)))
    return orthonormalize(raw_splitting(spec, cfg, L=24, count=count))


# ---------------------------------------------------------------------------
# gradient averages


def test_grad_average_exact_models():
    assert grad_average(radial_green(euclidean(3)), 1.0, 2048) == pytest.approx(1, abs=1e-6)
    assert grad_average(radial_green(cone(3, 0.8)), 1.0, 2048) == pytest.approx(1, abs=1e-6)
    assert grad_average(offcenter_green(euclidean(3), 0.5, L=24), 1.0, 2048) == \
        pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("w", [0.4, 0.1])
def test_grad_average_smoothed_range(w):
    spec = smoothed(0.8, w)
    c = grad_average(pole(spec, 0.5, 1, 24), 1.0, 4096)
    assert 0.5 < c <= spec.b_inf**-2


# ---------------------------------------------------------------------------
# raw maps


def test_raw_map_is_linear_on_euclidean_axis():
    # b = d: (|y - e1|^2 - |y|^2 - 1) / 2 = -<y, e1>
    cfg = PoleConfig(2.0, (AxisPole(0.0), AxisPole(1.0)))
    b = raw_splitting(euclidean(3), cfg, L=24, count=4096)
    S = b.extra["samples"]
    np.testing.assert_allclose(b.u_raw[0], -S.r * np.cos(S.phi), atol=1e-9)
    np.testing.assert_allclose(b.c, 1.0, atol=1e-9)


def test_raw_map_euclidean_samples():
    b = euclidean_splitting(3, 1.0, [np.zeros(3), 0.5 * E[0]], count=512)
    np.testing.assert_allclose(b.u_raw[0], -b.extra["points"][:, 0], atol=1e-12)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(0.1, 1.0))
def test_raw_map_euclidean_closed_form(y1, y2, y3, d):
    # x_0 = 0, x_1 = d e_1: (|y - x_1|^2 - |y|^2 - d^2) / (2 d) = -<y, e_1>
    y = np.array([y1, y2, y3])
    h0, h1 = y @ y, (y - d * E[0]) @ (y - d * E[0])
    assert (h1 - h0 - d**2) / (2 * d) == pytest.approx(-y1, abs=1e-12)


def test_raw_map_zero_when_equidistant_offset():
    # b1^2 = b0^2 + d^2 gives u~ = 0: points on the hyperplane through x_0 orthogonal to x_1 - x_0
    b = euclidean_splitting(3, 1.0, [np.zeros(3), 0.5 * E[0]], count=512)
    Y = b.extra["points"]
    on = np.abs(Y[:, 0]) < 1e-12
    assert np.all(np.abs(b.u_raw[0][on]) < 1e-12)


def test_raw_gradient_chain_bound():
    spec = smoothed(0.8, 0.2)
    b = _bundle(spec, 0.5, -1, 0.5, 1)
    assert splitting_report(b, b_inf=spec.b_inf).grad_bound_ok


# ---------------------------------------------------------------------------
# orthonormalisation and Euclidean regressions


@pytest.mark.parametrize("poles", [
    [np.zeros(3), 0.5 * E[0]],
    [np.zeros(3), 0.5 * E[0], 0.5 * (E[0] + E[1]) / math.sqrt(2)],
    [np.zeros(3), 0.5 * E[0], 0.5 * E[1], 0.5 * E[2]],
], ids=["k1", "k2", "k3"])
def test_euclidean_splitting_exact(poles):
    b = orthonormalize(euclidean_splitting(3, 1.0, poles, count=4096))
    k = len(poles) - 1
    rep = splitting_report(b)
    assert np.all(rep.hess_lhs <= 1e-20)
    assert rep.gram_lhs <= 1e-6
    np.testing.assert_allclose(rep.sup_grad, 1.0, atol=1e-3)
    assert np.all(rep.sup_lap <= 1e-10)
    np.testing.assert_allclose(b.gram(), np.eye(k), atol=1e-8)
    # A lower triangular with positive diagonal
    assert np.allclose(np.triu(b.A, 1), 0) and np.all(np.diag(b.A) > 0)
    # u is an isometric linear map up to a constant: u = Q y + c with Q Q^T = I
    Y = b.extra["points"]
    X = np.hstack([Y, np.ones((len(Y), 1))])
    coef, *_ = np.linalg.lstsq(X, b.u.T, rcond=None)
    assert np.max(np.abs(X @ coef - b.u.T)) <= 1e-6
    Q = coef[:3].T
    np.testing.assert_allclose(Q @ Q.T, np.eye(k), atol=1e-6)


def test_dense_gram_oracle_k2():
    # Gram from the raw gradients against an independent dense quadrature
    poles = [np.zeros(3), 0.5 * E[0], 0.5 * (E[0] + E[1]) / math.sqrt(2)]
    b = euclidean_splitting(3, 1.0, poles, count=4096)
    X = np.asarray(poles)
    g = -(X[1:] - X[0]) / np.linalg.norm(X[1:] - X[0], axis=1)[:, None]  # constant gradients
    np.testing.assert_allclose(b.gram(raw=True), g @ g.T, atol=1e-12)


def test_orthonormal_input_gives_identity():
    b = orthonormalize(euclidean_splitting(3, 1.0, [np.zeros(3), 0.5 * E[0], 0.5 * E[1]]))
    np.testing.assert_allclose(b.A, np.eye(2), atol=1e-12)


def test_collinear_poles_are_dependent():
    b = euclidean_splitting(3, 1.0, [np.zeros(3), 0.3 * E[0], 0.6 * E[0]])
    with pytest.raises(DegenerateConfigurationError, match="nearly dependent"):
        orthonormalize(b)


def test_degenerate_configurations():
    with pytest.raises(DegenerateConfigurationError):
        euclidean_splitting(3, 1.0, [np.zeros(3), 0.01 * E[0]])
    with pytest.raises(DegenerateConfigurationError):
        raw_splitting(smoothed(0.8, 0.2), PoleConfig(1.0, (AxisPole(0.3), AxisPole(0.31))), L=24)
    with pytest.raises(DomainError):
        raw_splitting(smoothed(0.8, 0.2), PoleConfig(1.0, (AxisPole(0.3), AxisPole(1.5))), L=24)
    with pytest.raises(DomainError):
        raw_splitting(smoothed(0.8, 0.2),
                      PoleConfig(1.0, (AxisPole(0.0), AxisPole(0.3), AxisPole(0.5, -1))))
    with pytest.raises(DomainError):
        euclidean_splitting(3, 1.0, [np.zeros(3), 2 * E[0]])


# ---------------------------------------------------------------------------
# curved k = 1


def test_curved_splitting_report_shape():
    spec = smoothed(0.8, 0.2)
    b = _bundle(spec, 0.5, -1, 0.5, 1)
    rep = splitting_report(b, F_pinch=[0.01, 0.01], delta=0.25, b_inf=spec.b_inf)
    np.testing.assert_allclose(b.gram(), [[1.0]], atol=1e-8)
    assert rep.hess_lhs[0] > 0 and rep.sup_lap[0] > 0  # u is not harmonic
    assert rep.rhs_energy.shape == (1,) and rep.rhs_pinching[0] > 0


def test_scaling_covariance():
    # g -> lam^2 g maps smoothed(a, w) to smoothed(a, lam w); the Hessian term is scale free
    r1 = splitting_report(_bundle(smoothed(0.8, 0.2), 0.5, -1, 0.5, 1, r=1.0))
    r2 = splitting_report(_bundle(smoothed(0.8, 0.4), 1.0, -1, 1.0, 1, r=2.0))
    assert r2.hess_lhs[0] == pytest.approx(r1.hess_lhs[0], rel=1e-6)
    assert r2.gram_lhs == pytest.approx(r1.gram_lhs, rel=1e-6)
    assert r2.sup_lap[0] == pytest.approx(r1.sup_lap[0] / 2, rel=1e-6)


def test_symmetry_surrogate():
    assert symmetry_accepted(1e-9, 0.25) and not symmetry_accepted(1e-3, 0.25)


def test_report_csv(tmp_path):
    write_report_csv([{"w": 0.1, "item1": np.float64(0.5), "k": 1}], tmp_path / "r.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows == [["w", "item1", "k"], ["1.000000000000e-01", "5.000000000000e-01", "1"]]


# ---------------------------------------------------------------------------
# quantitative independence


def test_finite_gh_examples():
    assert finite_gh([[0, 2], [2, 0]], [[0]]) == pytest.approx(1.0)
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0.0]])
    assert finite_gh(D, D) == 0.0
    assert finite_gh(D, 2 * D) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        finite_gh(np.zeros((5, 5)), np.zeros((1, 1)))


def test_finite_gh_brute_force_oracle(rng):
    # compare with enumeration over all (not only minimal) correspondences for 2 x 3 spaces
    import itertools
    for _ in range(5):
        P, Q = rng.uniform(0, 1, (2, 2)), rng.uniform(0, 1, (3, 2))
        D1 = np.linalg.norm(P[:, None] - P[None], axis=-1)
        D2 = np.linalg.norm(Q[:, None] - Q[None], axis=-1)
        pairs = list(itertools.product(range(2), range(3)))
        best = math.inf
        for bits in range(1, 1 << 6):
            R = [pairs[i] for i in range(6) if bits >> i & 1]
            if {a for a, _ in R} != {0, 1} or {c for _, c in R} != {0, 1, 2}:
                continue
            dis = max(abs(D1[a, a2] - D2[c, c2]) for a, c in R for a2, c2 in R)
            best = min(best, dis)
        assert finite_gh(D1, D2) == pytest.approx(best / 2, abs=1e-12)


def test_independence_examples():
    assert independence_proxy([[0, 1], [1, 0]], 1.0, 1) == (0.5, False)
    collinear = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0.0]])
    assert independence_proxy(collinear, 1.0, 2)[0] == pytest.approx(0, abs=1e-8)
    tri = np.ones((3, 3)) - np.eye(3)
    assert independence_proxy(tri, 1.0, 2)[0] == pytest.approx(1 / 6, abs=1e-6)
    simplex = np.ones((5, 5)) - np.eye(5)
    alpha, proxy = independence_proxy(simplex, 1.0, 4)
    assert proxy and alpha > 0


@given(st.floats(0.1, 3.0))
def test_independence_scales_with_radius(r):
    tri = np.ones((3, 3)) - np.eye(3)
    assert independence_proxy(tri * r, r, 2)[0] == pytest.approx(1 / 6, abs=1e-6)


def test_axis_pole_distances():
    D = axis_pole_distances(euclidean(3), [AxisPole(0.5, -1), AxisPole(0.0), AxisPole(0.5, 1)])
    np.testing.assert_allclose(D, [[0, 0.5, 1.0], [0.5, 0, 0.5], [1.0, 0.5, 0]], atol=1e-12)
