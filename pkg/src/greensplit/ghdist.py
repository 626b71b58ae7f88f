"""Gromov-Hausdorff upper bounds between regions of M and of best-fit cones.

Regions are balls B(s) and annuli A(s, 2s) about the center of a rotationally
symmetric spec.  A point (r, omega) of M is matched with (r, omega) in the cone
C(S^{n-1}(a)); half the distortion of this correspondence on a finite sample
bounds the GH distance between the sampled sets from above.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import qmc, spearmanr

from .errors import DomainError
from .green import radial_green
from .manifold import angle_between, surface_distance
from .monotone import monotone_profile
from .quad import gl_nodes

MIN_POINTS = 32


@dataclass(frozen=True)
class RegionSpec:
    """Ball ``B(s)`` (kind="ball") or annulus ``A(s, 2s)`` (kind="annulus") about the center."""

    kind: str
    s: float

    def __post_init__(self):
        if self.kind not in ("ball", "annulus"):
            raise DomainError(f"unknown region kind {self.kind!r}")
        if not self.s > 0:
            raise DomainError("region scale must be positive")

    @property
    def r_range(self):
        return (0.0, self.s) if self.kind == "ball" else (self.s, 2 * self.s)


@dataclass
class MetricSample:
    """Sampled points (r, unit direction) of a region with their pairwise distances."""

    region: RegionSpec
    r: np.ndarray
    omega: np.ndarray
    D: np.ndarray
    spec_hash: str = ""
    n: int = 3

    def __len__(self):
        return self.r.size

    @property
    def gamma(self):
        return angle_between(self.omega[:, None, :], self.omega[None, :, :])

    def subsample(self, m):
        """The first m points (nested in the full sample)."""
        return MetricSample(self.region, self.r[:m], self.omega[:m], self.D[:m, :m],
                            self.spec_hash, self.n)

    def triangle_defect(self):
        """max over triples of d(i, k) - d(i, j) - d(j, k), clipped at 0."""
        D = self.D
        worst = 0.0
        for j in range(D.shape[0]):
            worst = max(worst, float(np.max(D - D[:, j, None] - D[None, j, :])))
        return max(worst, 0.0)


def _radial_cdf_inverse(spec, lo, hi, u):
    """Invert the volume distribution of r on [lo, hi] (density f^{n-1})."""
    edges = np.linspace(lo, hi, 65)
    x, w = gl_nodes(edges[:-1, None], edges[1:, None], 8)
    x, w = x.reshape(64, -1), w.reshape(64, -1)
    mass = np.concatenate([[0.0], np.cumsum(np.sum(w * spec.f(x) ** (spec.n - 1), 1))])
    # piecewise-linear inverse on the panel edges, refined by bisection
    target = u * mass[-1]
    k = np.clip(np.searchsorted(mass, target) - 1, 0, 63)
    a, b = edges[k], edges[k + 1]
    base = mass[k]
    for _ in range(50):
        mid = 0.5 * (a + b)
        xs, ws = gl_nodes(edges[k], mid, 8)
        part = base + np.sum(ws * spec.f(xs) ** (spec.n - 1), -1)
        below = part < target
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return 0.5 * (a + b)


def _polar_angle_inverse(n, u):
    """Invert the density sin^{n-2} phi on [0, pi]."""
    grid = np.linspace(0.0, np.pi, 2049)
    dens = np.sin(grid) ** (n - 2)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    return np.interp(u * cdf[-1], cdf, grid)


def sample_region(spec, region: RegionSpec, count=256, seed=0) -> MetricSample:
    """Latin-hypercube sample stratified in (r, phi) with density given by the volume.

    phi is the polar angle from the symmetry axis; the remaining S^{n-2} angle
    is drawn uniformly.
    """
    if count < 2:
        raise DomainError("need at least two points")
    n = spec.n
    rng = np.random.default_rng(seed)
    u = qmc.LatinHypercube(d=2, seed=rng).random(count)
    lo, hi = region.r_range
    r = _radial_cdf_inverse(spec, lo, hi, u[:, 0])
    phi = _polar_angle_inverse(n, u[:, 1])
    xi = rng.standard_normal((count, n - 1))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    omega = np.concatenate([np.cos(phi)[:, None], np.sin(phi)[:, None] * xi], 1)
    D = distance_matrix(spec, r, omega)
    return MetricSample(region, r, omega, D, spec.hash, n)


def distance_matrix(spec, r, omega):
    i, j = np.triu_indices(r.size, 1)
    gam = angle_between(omega[i], omega[j])
    d = surface_distance(spec, r[i], r[j], gam)
    D = np.zeros((r.size, r.size))
    D[i, j] = d
    D[j, i] = d
    return D


def cone_distances(a, r, gamma):
    ang = np.minimum(a * gamma, np.pi)
    r1, r2 = r[:, None], r[None, :]
    return np.sqrt((r1 - r2) ** 2 + 4 * r1 * r2 * np.sin(ang / 2) ** 2)


@dataclass(frozen=True)
class ConeFit:
    a: float
    D: float
    region: RegionSpec

    @property
    def bound(self):
        """Implied GH upper bound D/2."""
        return 0.5 * self.D


def _distortion(sample, a, gamma=None):
    gamma = sample.gamma if gamma is None else gamma
    return float(np.max(np.abs(sample.D - cone_distances(a, sample.r, gamma))))


def best_fit_cone(sample: MetricSample, grid=201) -> ConeFit:
    """Cone slope a in (0, 1] minimizing the distortion of the identity-in-polar-coordinates match."""
    if len(sample) < MIN_POINTS:
        raise DomainError(f"sample too small: {len(sample)} < {MIN_POINTS} points")
    gamma = sample.gamma
    a_grid = np.linspace(1.0 / grid, 1.0, grid)
    vals = np.array([_distortion(sample, a, gamma) for a in a_grid])
    k = int(np.argmin(vals))
    lo, hi = a_grid[max(k - 1, 0)], a_grid[min(k + 1, grid - 1)]
    res = minimize_scalar(lambda a: _distortion(sample, a, gamma), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-6})
    a, D = (float(res.x), float(res.fun)) if res.fun < vals[k] else (float(a_grid[k]), float(vals[k]))
    return ConeFit(a, D, sample.region)


def correspondence_distortion(sample: MetricSample, cone: ConeFit, region: RegionSpec):
    """GH upper bound D/2 between the sampled region and the same region of C(S^{n-1}(a))."""
    if region != sample.region or region != cone.region:
        raise DomainError("region mismatch between sample, cone fit and request")
    return 0.5 * _distortion(sample, cone.a)


# ---------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepRow:
    param: float
    s: float
    W: float
    F: float
    errW: float
    errF: float
    gh_ball: float  # scaled: bound / s
    gh_annulus: float
    a_ball: float
    a_annulus: float
    spec_hash: str


@dataclass
class SweepTable:
    rows: list
    exponent: float
    spearman_ball: float
    spearman_annulus: float
    count: int = 256
    trial_mu: tuple = (0.0, 0.5, 1.0)
    meta: dict = dc_field(default_factory=dict)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "s", "W_pinch", "F_pinch", "errW", "errF", "gh_bound_ball",
                        "gh_bound_annulus", "a_ball", "a_annulus", "fitted_exponent",
                        *[f"gh_ball_pow_{2 + m:g}" for m in self.trial_mu],
                        "count", "spec_hash"])
            for r in self.rows:
                nums = (r.param, r.s, r.W, r.F, r.errW, r.errF, r.gh_ball, r.gh_annulus,
                        r.a_ball, r.a_annulus, self.exponent,
                        *[r.gh_ball ** (2 + m) for m in self.trial_mu])
                w.writerow([f"{x:.10e}" for x in nums] + [self.count, r.spec_hash])


def fitted_exponent(pinch, gh, floor=1e-12):
    """mu with (GH/s)^{2+mu} proportional to the pinching, by least squares in log-log."""
    pinch, gh = np.asarray(pinch, float), np.asarray(gh, float)
    ok = (pinch > floor) & (gh > floor)
    if ok.sum() < 2 or np.ptp(np.log(gh[ok])) == 0:
        return math.nan
    slope = np.polyfit(np.log(gh[ok]), np.log(pinch[ok]), 1)[0]
    return float(slope - 2)


def _spearman(x, y):
    x, y = np.asarray(x), np.asarray(y)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    return float(spearmanr(x, y).statistic)


def pinching_vs_gh_sweep(family, scales, count=256, seed=0, n_nodes=16) -> SweepTable:
    """Center-pole pinchings W_{s/4,s/2}, F_{2s,4s} against scaled GH bounds on B(s), A(s,2s).

    ``family`` is a sequence of (parameter, spec) pairs.
    """
    rows = []
    for param, spec in family:
        field = radial_green(spec)
        radii = sorted({x for s in scales for x in (s / 4, s / 2, 2 * s, 4 * s)})
        prof = monotone_profile(field, radii, n_nodes=n_nodes)
        for s in scales:
            i1, i2, j1, j2 = (prof.index(x) for x in (s / 4, s / 2, 2 * s, 4 * s))
            W = abs(prof.A[i2] - prof.A[i1])
            F = abs(prof.F[j2] - prof.F[j1])
            fits = []
            for kind in ("ball", "annulus"):
                reg = RegionSpec(kind, s)
                smp = sample_region(spec, reg, count, seed)
                fit = best_fit_cone(smp)
                fits.append((correspondence_distortion(smp, fit, reg) / s, fit.a))
            rows.append(SweepRow(float(param), float(s), W, F,
                                 prof.errA[i1] + prof.errA[i2], prof.errF[j1] + prof.errF[j2],
                                 fits[0][0], fits[1][0], fits[0][1], fits[1][1], spec.hash))
    F = [r.F for r in rows]
    return SweepTable(rows, fitted_exponent(F, [r.gh_ball for r in rows]),
                      _spearman(F, [r.gh_ball for r in rows]),
                      _spearman(F, [r.gh_annulus for r in rows]), count)
