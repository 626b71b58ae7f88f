"""Almost splitting maps built from Green functions of several poles.

For poles x_0..x_k in B_p(r) the raw maps are

    u~_j = (b~_j^2 - b~_0^2 - d(x_0, x_j)^2) / (2 d(x_0, x_j)),   b~^2 = b^2 / c_{r,x},

with c_{r,x} the ball average of |grad b_x|^2; they are then orthonormalised in
the averaged L^2 gradient inner product by a lower triangular matrix.

Curved models support k = 1 with both poles on the symmetry axis, which keeps
every field axisymmetric.  Euclidean space supports any k <= n in closed form.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateConfigurationError, DomainError
from .green import field_for_pole
from .hessian import ball_integral
from .manifold import CENTER, Point, ball_sampler, gl_nodes, sphere_area, surface_distance
from .monotone import pinching_at

GRAM_TOL = 1e-8
DISTANCE_FLOOR = 0.05


@dataclass(frozen=True)
class AxisPole:
    """Pole on the symmetry axis: distance rho from the center, on side +1 (phi=0) or -1."""

    rho: float
    side: int = 1

    @property
    def point(self):
        return CENTER if self.rho == 0 else Point(self.rho, 0.0 if self.side > 0 else math.pi)


@dataclass(frozen=True)
class PoleConfig:
    """Base point p (the center), radius r and poles x_0..x_k."""

    r: float
    poles: tuple
    floor: float = DISTANCE_FLOOR

    @property
    def k(self):
        return len(self.poles) - 1


def axis_distance(spec, a: AxisPole, b: AxisPole):
    gamma = 0.0 if (a.side == b.side or a.rho == 0 or b.rho == 0) else math.pi
    return float(surface_distance(spec, a.rho, b.rho, gamma))


# ---------------------------------------------------------------------------
# sampled frame quantities


@dataclass
class Sampled:
    """Per-sample b^2 data of one pole: h, grad h (frame vector), Hess h (matrix form)."""

    h: np.ndarray
    grad: np.ndarray  # (N, m)
    hess: np.ndarray  # (N, m, m)
    mult: np.ndarray  # multiplicities of the frame directions (orbit block)
    tf2: np.ndarray
    b: np.ndarray


def _axis_sampled(field, S):
    v = field.values(S.r, S.phi)
    n = field.spec.n
    grad = np.stack([2 * v.b * v.b_r, 2 * v.b * v.b_phi, np.zeros_like(v.b)], -1)
    H = np.zeros(v.b.shape + (3, 3))
    H[:, 0, 0], H[:, 0, 1], H[:, 1, 0] = v.Hrr, v.Hrp, v.Hrp
    H[:, 1, 1], H[:, 2, 2] = v.Hpp, v.Hkk
    return Sampled(v.b**2, grad, H, np.array([1.0, 1.0, n - 2.0]), v.tf2, v.b)


def _frobenius2(H, mult):
    # the orbit block is a multiple of the identity, uncoupled from the meridian block
    w = mult**0.25
    return np.sum((H * w[:, None] * w[None, :]) ** 2, axis=(-2, -1))


def _trace(H, mult):
    return np.einsum("...ii,i->...", H, mult)


# ---------------------------------------------------------------------------
# bundle


@dataclass
class SplittingBundle:
    n: int
    r: float
    weight: np.ndarray
    c: np.ndarray  # c_{r,x_j}, j = 0..k
    dist: np.ndarray  # d(x_0, x_j), j = 1..k
    A: np.ndarray
    u_raw: np.ndarray  # (k, N)
    grad_raw: np.ndarray  # (k, N, m)
    hess_raw: np.ndarray  # (k, N, m, m)
    mult: np.ndarray
    tf_b2: np.ndarray = None  # avg TF^2 b^-2 per pole
    extra: dict = dc_field(default_factory=dict)

    @property
    def u(self):
        return np.einsum("ij,jn->in", self.A, self.u_raw)

    @property
    def grad(self):
        return np.einsum("ij,jnm->inm", self.A, self.grad_raw)

    @property
    def hess(self):
        return np.einsum("ij,jnab->inab", self.A, self.hess_raw)

    def mean(self, x):
        return np.sum(self.weight * x, axis=-1) / self.weight.sum()

    def gram(self, raw=False):
        g = self.grad_raw if raw else self.grad
        return np.einsum("inm,jnm,n->ij", g, g, self.weight) / self.weight.sum()

    @property
    def laplacian(self):
        return _trace(self.hess, self.mult)


def grad_average(field, r, count=16384, center=CENTER):
    """c_{r,x}: ball average of |grad b_x|^2 over B_p(r)."""
    I, vol = ball_integral(field, center, r, lambda v, S: v.grad2, count)
    return I.value / vol


def _check_config(spec, cfg: PoleConfig):
    if cfg.k < 1:
        raise DomainError("need at least two poles")
    for x in cfg.poles:
        if x.rho >= cfg.r:
            raise DomainError(f"pole at rho={x.rho} outside B_p({cfg.r})")
    d = np.array([axis_distance(spec, cfg.poles[0], x) for x in cfg.poles[1:]])
    if np.any(d < cfg.floor * cfg.r):
        raise DegenerateConfigurationError(
            f"pole distance {d.min():.3g} below floor {cfg.floor * cfg.r:.3g}")
    return d


def raw_splitting(spec, cfg: PoleConfig, L=48, count=16384, fields=None) -> SplittingBundle:
    """Raw maps u~_j on the center ball B_p(r) from axis poles (k = 1 on curved models)."""
    if cfg.k != 1:
        raise DomainError("curved models support k = 1 (two axis poles); use euclidean_splitting")
    d = _check_config(spec, cfg)
    if fields is None:
        fields = [field_for_pole(spec, x.rho, x.side, L) for x in cfg.poles]
    breaks = tuple(sorted({x.rho for x in cfg.poles if 0 < x.rho < cfg.r}))
    S = ball_sampler(spec, CENTER, cfg.r, count, breaks=breaks)
    data = [_axis_sampled(f, S) for f in fields]
    c = np.array([np.sum(S.weight * np.sum(q.grad**2, -1) / (4 * q.h)) / S.volume
                  for q in data])
    u, g, H = _combine(data, c, d)
    mult = data[0].mult
    out = SplittingBundle(spec.n, cfg.r, S.weight, c, d, np.eye(1), u, g, H, mult)
    out.tf_b2 = np.array([np.sum(S.weight * q.tf2 / q.h) / S.volume for q in data])
    out.extra["fields"] = fields
    out.extra["samples"] = S
    return out


def _combine(data, c, d):
    q0 = data[0]
    u, g, H = [], [], []
    for j, qj in enumerate(data[1:]):
        dj = d[j]
        u.append((qj.h / c[j + 1] - q0.h / c[0] - dj**2) / (2 * dj))
        g.append((qj.grad / c[j + 1] - q0.grad / c[0]) / (2 * dj))
        H.append((qj.hess / c[j + 1] - q0.hess / c[0]) / (2 * dj))
    return np.array(u), np.array(g), np.array(H)


def orthonormalize(bundle: SplittingBundle) -> SplittingBundle:
    """Set A = L^{-1} with G = L L^T the averaged gradient Gram matrix of u~."""
    G = bundle.gram(raw=True)
    w = np.linalg.eigvalsh(G)
    if w.min() < GRAM_TOL:
        raise DegenerateConfigurationError(
            f"points nearly dependent: Gram eigenvalue {w.min():.3g} < {GRAM_TOL:g}")
    L = np.linalg.cholesky(G)
    bundle.A = np.linalg.solve(L, np.eye(len(G)))
    return bundle


# ---------------------------------------------------------------------------
# Euclidean closed form, any k <= n


def euclidean_ball_samples(n, r, count=4096, seed=0):
    """Radial Gauss nodes times seeded random directions; exact for radial polynomials."""
    m_r = max(8, int(round(count ** (1 / 3))))
    m_s = max(8, count // m_r)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((m_s, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t, wt = gl_nodes(0.0, r, m_r)
    Y = (t[:, None, None] * dirs[None]).reshape(-1, n)
    W = np.repeat(wt * t ** (n - 1) * sphere_area(n - 1) / m_s, m_s)
    return Y, W


def euclidean_splitting(n, r, poles, count=4096, seed=0, floor=DISTANCE_FLOOR) -> SplittingBundle:
    """Bundle for poles given as points of R^n, with b_x = |y - x| exactly."""
    X = np.asarray(poles, float)
    if X.ndim != 2 or X.shape[1] != n or len(X) < 2:
        raise DomainError("poles must be an array of k+1 points in R^n")
    if np.any(np.linalg.norm(X, axis=1) >= r):
        raise DomainError("poles must lie in B_p(r)")
    k = len(X) - 1
    if k > n:
        raise DomainError("k must not exceed n")
    d = np.linalg.norm(X[1:] - X[0], axis=1)
    if np.any(d < floor * r):
        raise DegenerateConfigurationError(f"pole distance {d.min():.3g} below floor")
    Y, W = euclidean_ball_samples(n, r, count, seed)
    data = []
    for x in X:
        diff = Y - x
        h = np.sum(diff**2, 1)
        hess = np.broadcast_to(2 * np.eye(n), (len(Y), n, n))
        data.append(Sampled(h, 2 * diff, hess, np.ones(n), np.zeros(len(Y)), np.sqrt(h)))
    c = np.ones(len(X))
    u, g, H = _combine(data, c, d)
    out = SplittingBundle(n, r, W, c, d, np.eye(k), u, g, H, np.ones(n))
    out.tf_b2 = np.zeros(len(X))
    out.extra["points"] = Y
    return out


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class SplittingReport:
    k: int
    hess_lhs: np.ndarray  # Hessian term: r^2 avg |Hess u_j|^2
    gram_lhs: float  # Gram defect: max_ij avg |<grad u_i, grad u_j> - delta_ij|^2
    sup_grad: np.ndarray  # sup |grad u_j|
    sup_lap: np.ndarray
    A_norm: float
    c: np.ndarray
    grad_bound_ok: bool
    F_pinch: np.ndarray = None  # F_{1/delta, 2/delta} per pole
    rhs_energy: np.ndarray = None
    rhs_pinching: np.ndarray = None


def splitting_report(bundle: SplittingBundle, F_pinch=None, delta=None, b_inf=1.0):
    """Hessian term, Gram defect, gradient sup, sup |Laplacian u_j| and, with pinchings, the two RHS forms."""
    r, n = bundle.r, bundle.n
    k = bundle.u_raw.shape[0]
    hess2 = _frobenius2(bundle.hess, bundle.mult)
    item1 = r**2 * bundle.mean(hess2)
    g = bundle.grad
    inner = np.einsum("inm,jnm->ijn", g, g)
    dev = (inner - np.eye(k)[:, :, None]) ** 2
    item2 = float(np.max(bundle.mean(dev)))
    sup_grad = np.sqrt(np.max(np.einsum("inm,inm->in", g, g), axis=1))
    sup_lap = np.max(np.abs(bundle.laplacian), axis=1)
    # chain-rule gradient bound for the raw maps
    graw = bundle.grad_raw
    raw_sup = np.sqrt(np.max(np.einsum("inm,inm->in", graw, graw), axis=1))
    bound = 4 * b_inf**-2 * r * (1 / bundle.c[0] + 1 / bundle.c[1:]) / (2 * bundle.dist)
    ok = bool(np.all(raw_sup <= bound * (1 + 1e-9)))
    t_en = t_pin = None
    if F_pinch is not None and delta is not None:
        F = np.asarray(F_pinch, float)
        dr = delta * r
        t_en = dr**-n * (F[1:] + F[0]) + r**2 * (bundle.tf_b2[1:] + bundle.tf_b2[0])
        e = 1 - 2 / n
        t_pin = dr**-n * (F[1:] + F[0] + dr**2 * (F[1:] ** e + F[0] ** e))
    return SplittingReport(k, item1, item2, sup_grad, sup_lap, float(np.linalg.norm(bundle.A, 2)),
                           bundle.c, ok, None if F_pinch is None else np.asarray(F_pinch), t_en, t_pin)


def pole_pinchings(fields, delta, n_theta=128, n_nodes=16):
    """F_{1/delta, 2/delta} and F_{2/delta, 4/delta} for each pole field."""
    s = 1 / delta
    F1 = [pinching_at(f, s, 2 * s, n_theta, n_nodes) for f in fields]
    F2 = [pinching_at(f, 2 * s, 4 * s, n_theta, n_nodes) for f in fields]
    return F1, F2


def symmetry_accepted(F2, delta, mu=1.0, C=1.0):
    """Surrogate (0, delta^2)-symmetry test F_{2/delta, 4/delta} < delta^{4+4mu} / C."""
    return F2 < delta ** (4 + 4 * mu) / C


def write_report_csv(rows, path):
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in keys])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{x:.12e}"
    return str(x)


# ---------------------------------------------------------------------------
# quantitative independence


@lru_cache(maxsize=None)
def _minimal_correspondences(m1, m2):
    """Minimal surjective relations between sets of sizes m1, m2, as boolean masks."""
    pairs = [(a, b) for a in range(m1) for b in range(m2)]
    out = []
    for bits in range(1, 1 << len(pairs)):
        R = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
        la = [0] * m1
        lb = [0] * m2
        for a, b in R:
            la[a] += 1
            lb[b] += 1
        if min(la) == 0 or min(lb) == 0:
            continue
        # minimal: every pair is the only cover of its left or right element
        if all(la[a] == 1 or lb[b] == 1 for a, b in R):
            out.append([a * m2 + b for a, b in R])
    masks = np.zeros((len(out), m1 * m2), bool)
    for i, R in enumerate(out):
        masks[i, R] = True
    return masks


def finite_gh(D1, D2):
    """Exact GH distance between two finite metric spaces of at most 4 points."""
    D1, D2 = np.asarray(D1, float), np.asarray(D2, float)
    m1, m2 = len(D1), len(D2)
    if max(m1, m2) > 4:
        raise DomainError("exact GH enumeration limited to 4 points")
    T = np.abs(D1[:, None, :, None] - D2[None, :, None, :]).reshape(m1 * m2, m1 * m2)
    M = _minimal_correspondences(m1, m2)
    both = M[:, :, None] & M[:, None, :]
    dist = np.max(np.where(both, T[None], 0.0), axis=(1, 2))
    return 0.5 * float(dist.min())


def _pdist(Z):
    return np.linalg.norm(Z[:, None] - Z[None], axis=-1)


def independence_proxy(D, r, k, seed=0, starts=6):
    """Estimate alpha = r^{-1} inf_{U' in R^{k-1}} d_GH(U, U') for k+1 points.

    Exact GH over correspondences with a multi-start fit of U' for k <= 3;
    a classical-MDS distortion proxy beyond.  Returns (alpha, is_proxy).
    """
    D = np.asarray(D, float)
    m = len(D)
    if m != k + 1:
        raise DomainError("need k+1 points")
    dim = k - 1
    if dim == 0:
        return finite_gh(D, np.zeros((1, 1))) / r, False
    Z0 = _classical_mds(D, dim)
    if k > 3:
        return 0.5 * float(np.max(np.abs(D - _pdist(Z0)))) / r, True
    rng = np.random.default_rng(seed)
    best = math.inf
    scale = D.max()

    def obj(z):
        return finite_gh(D, _pdist(z.reshape(m, dim)))

    inits = [Z0] + [rng.standard_normal((m, dim)) * scale for _ in range(starts - 1)]
    for Z in inits:
        res = minimize(obj, Z.ravel(), method="Nelder-Mead",
                       options={"xatol": 1e-10 * scale, "fatol": 1e-12 * scale, "maxiter": 4000})
        best = min(best, float(res.fun))
    return best / r, False


def _classical_mds(D, dim):
    m = len(D)
    J = np.eye(m) - 1.0 / m
    B = -0.5 * J @ (D**2) @ J
    w, V = np.linalg.eigh(B)
    idx = np.argsort(w)[::-1][:dim]
    return V[:, idx] * np.sqrt(np.maximum(w[idx], 0.0))


def axis_pole_distances(spec, poles):
    m = len(poles)
    D = np.zeros((m, m))
    for i, j in itertools.combinations(range(m), 2):
        D[i, j] = D[j, i] = axis_distance(spec, poles[i], poles[j])
    return D
