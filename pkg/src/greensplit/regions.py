"""Integrals over level sets and b-regions {lo <= b <= hi} of a pole field.

Off-center poles: the meridian half-plane is parametrised by polar coordinates
(t, theta) about the pole in the conformal chart zeta = (sigma/sigma_rho) e^{i phi},
where the pole sits at zeta = 1.  The two-dimensional metric is
Omega^2 (dt^2 + t^2 dtheta^2) with Omega = f / |zeta|, so

    dV = |S^{n-2}| (f sin phi)^{n-2} Omega^2 t dt dtheta.

Level sets {b = s} are star-shaped about the pole in this chart (b increases
along every ray); each is found ray by ray.  Center poles reduce to radial
quadrature with dV = |S^{n-1}| f^{n-1} dr.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .green import RadialField
from .manifold import sphere_area
from .quad import composite_nodes, gl_nodes

PANEL = 8
WEIGHT_CUTOFF = 1e-12
ROUNDOFF = 64 * np.finfo(float).eps


@dataclass
class Geometry:
    """Per-point geometric data accompanying FieldValues."""

    r: np.ndarray
    phi: np.ndarray
    f: np.ndarray
    dV: np.ndarray  # volume weight times quadrature weight


@dataclass(frozen=True)
class Integral:
    value: float
    error: float

    @classmethod
    def estimate(cls, fine, coarse):
        """Value from the fine rule; error from the coarse one, floored at round-off."""
        return cls(fine, max(abs(fine - coarse), ROUNDOFF * abs(fine)))


def ricci_quadratic(spec, v):
    """Ric(grad b^2, grad b^2) from the diagonal Ricci eigenvalues."""
    if spec.kind == "euclidean":
        return np.zeros_like(v.b)
    p, n = spec.profile, spec.n
    f, df, d2f = p.f(v.r), p.df(v.r), p.d2f(v.r)
    rad = -(n - 1) * d2f / f
    tan = -d2f / f + (n - 2) * (1 - df**2) / f**2
    return 4 * v.b**2 * (rad * v.b_r**2 + tan * v.b_phi**2)


class _RadialRegions:
    def __init__(self, field, n_nodes):
        self.field, self.spec = field, field.spec
        self.n_nodes = n_nodes
        self._inv_cache = {}

    def b_inverse(self, s):
        s = np.atleast_1d(np.asarray(s, float))
        lo = np.zeros_like(s)
        hi = np.maximum(s, 1e-12) * 2
        b = lambda r: self.field.values(r, np.zeros_like(r)).b
        while True:
            bad = b(hi) < s
            if not bad.any():
                break
            hi = np.where(bad, 2 * hi, hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = b(mid) < s
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def level_area(self, s, power=3):
        """s^{1-n} int_{b=s} |grad b|^power dA (closed form on spheres)."""
        n = self.spec.n
        rs = self.b_inverse(s)
        v = self.field.values(rs, np.zeros_like(rs))
        val = s ** (1 - n) * sphere_area(n - 1) * self.spec.f(rs) ** (n - 1) * v.b_r**power
        return Integral.estimate(float(val[0]), float(val[0]))

    def _nodes(self, lo, hi, k):
        n = self.spec.n
        p = self.spec.profile
        r_lo = 0.0 if lo <= 0 else float(self.b_inverse(lo)[0])
        pieces = []
        # break at the profile's structural radii so panels resolve the core
        knots = [x for x in (p.scale, p.r_lin) if np.isfinite(x)]
        if math.isinf(hi):
            r_hi = max([r_lo * 2, *knots]) if r_lo > 0 else max([1.0, *knots])
            if r_lo > 0 and r_hi <= r_lo:
                r_hi = 2 * r_lo
        else:
            r_hi = float(self.b_inverse(hi)[0])
        edges = np.unique([r_lo, *[x for x in knots if r_lo < x < r_hi], r_hi])
        if edges.size > 1:
            e = np.concatenate([np.linspace(a, b, 3)[:-1] for a, b in zip(edges[:-1], edges[1:])]
                               + [[edges[-1]]])
            r, w = composite_nodes(e, k)
            pieces.append((r, w))
        if math.isinf(hi):
            vmax = WEIGHT_CUTOFF_V(n)
            v, wv = composite_nodes(np.linspace(0.0, vmax, 7), k)
            pieces.append((r_hi * np.exp(v), wv * r_hi * np.exp(v)))
        r = np.concatenate([q[0] for q in pieces])
        w = np.concatenate([q[1] for q in pieces])
        return r, w

    def integrate(self, lo, hi, fn, k=None):
        k = k or self.n_nodes
        vals = []
        for kk in (k, max(4, k // 2)):
            r, w = self._nodes(lo, hi, kk)
            phi = np.full_like(r, 0.5 * np.pi)
            v = self.field.values(r, phi)
            f = self.spec.f(r)
            dV = w * sphere_area(self.spec.n - 1) * f ** (self.spec.n - 1)
            vals.append(float(np.sum(fn(v, Geometry(r, phi, f, dV)) * dV)))
        return Integral.estimate(vals[0], vals[1])


def WEIGHT_CUTOFF_V(n):
    # b^{2-2n} drops by WEIGHT_CUTOFF over a factor e^{vmax} in b
    return math.log(1 / WEIGHT_CUTOFF) / (2 * n - 2)


class _RayRegions:
    def __init__(self, field, n_theta, n_nodes):
        self.field, self.spec = field, field.spec
        self.n_theta, self.n_nodes = n_theta, n_nodes
        self.sig_tau = field.tau_rho
        # size of the curvature core about the center, in chart units
        p = self.spec.profile
        core = math.exp(float(self.spec.chart.tau_of_r(np.array([p.scale]))[0]) - field.tau_rho)
        self.grading = int(np.clip(math.ceil(math.log2(1 / min(core, 0.5))) + 1, 2, 12))

    # --- chart ----------------------------------------------------------------

    def point(self, t, th):
        c, s = np.cos(th), np.sin(th)
        z2 = np.maximum(1 + 2 * t * c + t * t, 1e-300)
        tau = self.sig_tau + 0.5 * np.log(z2)
        phi = np.arctan2(t * s, 1 + t * c)
        return tau, phi, z2, (c + t) / z2, s / z2

    def values(self, t, th):
        tau, phi, z2, xt, pt = self.point(t, th)
        r = self.spec.chart.r_of_tau(tau)
        v = self.field.values_tau(tau, phi, r)
        f = self.spec.f(r)
        bt = f * (v.b_r * xt + v.b_phi * pt)
        return v, r, phi, z2, f, bt

    def level(self, s, th):
        """t*(theta) with b = s, by bracketing, bisection and Newton."""
        th = np.asarray(th, float)
        hi = np.full(th.shape, max(s, 1e-6))
        while True:
            v = self.values(hi, th)[0]
            bad = v.b < s
            if not bad.any():
                break
            hi = np.where(bad, 2 * hi, hi)
            if np.any(hi > 1e12):
                raise DomainError("scale exceeds grid: level set not found")
        lo = np.zeros_like(hi)
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            below = self.values(mid, th)[0].b < s
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        t = 0.5 * (lo + hi)
        for _ in range(4):
            v, _, _, _, _, bt = self.values(t, th)
            t = np.clip(t - (v.b - s) / bt, lo, hi)
        v, r, phi, z2, f, bt = self.values(t, th)
        if np.any(bt <= 0):
            raise ConvergenceError("b is not increasing along a ray; level set not star-shaped")
        return t, v, r, phi, z2, f, bt

    def _theta(self, m):
        """Composite rule on [0, pi], graded geometrically toward the ray through the center."""
        panels = max(2, m // PANEL)
        h = np.pi / panels
        edges = np.concatenate([np.linspace(0.0, np.pi - h, panels),
                                np.pi - h * 0.5 ** np.arange(1, self.grading + 1), [np.pi]])
        return composite_nodes(edges, PANEL)

    def level_area(self, s, power=3):
        n = self.spec.n
        vals = []
        for m in (self.n_theta, self.n_theta // 2):
            th, w = self._theta(m)
            t, v, r, phi, z2, f, bt = self.level(s, th)
            om2 = f * f / z2
            orbit = sphere_area(n - 2) * (f * np.sin(phi)) ** (n - 2)
            g = np.sqrt(v.grad2)
            dens = g ** (power + 1) * om2 * t / bt * orbit
            vals.append(s ** (1 - n) * float(np.sum(w * dens)))
        return Integral.estimate(vals[0], vals[1])

    def _segments(self, th, t_lo, t_hi, k):
        """Composite nodes on [t_lo, t_hi] per ray, graded toward the point nearest the center."""
        m = th.size
        tc = -np.cos(th)
        cut = np.where((tc > t_lo) & (tc < t_hi), tc, 0.5 * (t_lo + t_hi))
        g = np.concatenate([0.5 ** np.arange(self.grading + 1), [0.0]])
        left = cut[:, None] - (cut - t_lo)[:, None] * g
        right = cut[:, None] + (t_hi - cut)[:, None] * g[::-1][1:]
        e = np.concatenate([left, right], 1)
        t, w = gl_nodes(e[:, :-1], e[:, 1:], k)
        return t.reshape(m, -1), w.reshape(m, -1)

    def integrate(self, lo, hi, fn, k=None):
        """Integral of fn(values, geometry) dV over {lo <= b <= hi}, with an error estimate."""
        k = k or self.n_nodes
        n = self.spec.n
        vals = []
        for m, kk in ((self.n_theta, k), (self.n_theta // 2, max(4, k // 2))):
            th, wth = self._theta(m)
            t_lo = np.zeros_like(th) if lo <= 0 else self.level(lo, th)[0]
            if math.isinf(hi):
                if lo <= 0:
                    raise DomainError("region {b >= 0} is the whole manifold")
                # graded finite part past the center, then b^{2-2n}-scaled tail
                t_b = 2 * np.maximum(np.maximum(t_lo, -np.cos(th)), 0.5)
                t1, w1 = self._segments(th, t_lo, t_b, kk)
                v, wv = composite_nodes(np.linspace(0.0, WEIGHT_CUTOFF_V(n), 7), kk)
                t2 = t_b[:, None] * np.exp(v)[None]
                T = np.concatenate([t1, t2], 1)
                Wt = np.concatenate([w1, t2 * wv[None]], 1)
            else:
                t_hi = self.level(hi, th)[0]
                T, Wt = self._segments(th, t_lo, t_hi, kk)
            TH = np.broadcast_to(th[:, None], T.shape)
            vals_, r, phi, z2, f, bt = self.values(T.ravel(), TH.ravel())
            om2 = f * f / z2
            orbit = sphere_area(n - 2) * (f * np.sin(phi)) ** (n - 2)
            dV = (Wt * wth[:, None]).ravel() * om2 * T.ravel() * orbit
            vals.append(float(np.sum(fn(vals_, Geometry(r, phi, f, dV)) * dV)))
        return Integral.estimate(vals[0], vals[1])


def regions(field, n_theta=128, n_nodes=16):
    """Integration helper for a pole field (radial or off-center)."""
    if isinstance(field, RadialField):
        return _RadialRegions(field, n_nodes * 2)
    return _RayRegions(field, n_theta, n_nodes)
