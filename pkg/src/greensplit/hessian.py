"""Trace-free Hessian of b^2, weighted energies and the pinching inequalities."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DomainError
from .manifold import CENTER, Point, ball_sampler, surface_distance
from .monotone import pinching_at
from .regions import Integral, regions


@dataclass(frozen=True)
class TensorField:
    """Hess b^2 of a pole field, evaluated lazily at meridian points."""

    field: object

    def at(self, r, phi):
        v = self.field.values(r, phi)
        m = v.trace / v.n
        return TensorSample(v, v.Hrr - m, v.Hrp, v.Hpp - m, v.Hkk - m)

    def grid(self, nr=512, nphi=256, r_top=8.0):
        r = np.geomspace(r_top * 1e-3, r_top, nr)
        phi = np.linspace(0, np.pi, nphi)
        R, P = np.meshgrid(r, phi, indexing="ij")
        return R, P, self.at(R.ravel(), P.ravel())


@dataclass(frozen=True)
class TensorSample:
    values: object
    Trr: np.ndarray
    Trp: np.ndarray
    Tpp: np.ndarray
    Tkk: np.ndarray

    @property
    def norm2(self):
        n = self.values.n
        return self.Trr**2 + 2 * self.Trp**2 + self.Tpp**2 + (n - 2) * self.Tkk**2

    @property
    def trace(self):
        return self.Trr + self.Tpp + (self.values.n - 2) * self.Tkk


def tracefree_hessian_field(field) -> TensorField:
    return TensorField(field)


@dataclass(frozen=True)
class Region:
    """{lo <= b <= hi} for kind 'level', or a metric ball about ``center``."""

    kind: str
    lo: float = 0.0
    hi: float = math.inf
    center: Point = CENTER
    radius: float = 0.0

    @staticmethod
    def sublevel(r):
        return Region("level", 0.0, r)

    @staticmethod
    def superlevel(s):
        return Region("level", s, math.inf)

    @staticmethod
    def annulus(a, c):
        if not 0 < a <= c:
            raise DomainError("annulus needs 0 < a <= c")
        return Region("level", a, c)

    @staticmethod
    def ball(center, radius):
        return Region("ball", center=center, radius=radius)

    def describe(self):
        if self.kind == "ball":
            return f"ball(r={self.center.r:g},phi={self.center.phi:g};R={self.radius:g})"
        return f"b in [{self.lo:g},{self.hi:g}]"


@dataclass(frozen=True)
class EnergyValue:
    region: Region
    w: int
    value: float
    error: float


def ball_integral(field, center, radius, fn, count=16384):
    """Integral of fn(values, samples) over a metric ball, with a coarse-grid error."""
    spec = field.spec
    out = []
    for c in (count, count // 4):
        breaks = (field.rho,) if center.r == 0 and 0 < field.rho < radius else ()
        S = ball_sampler(spec, center, radius, c, breaks=breaks)
        v = field.values(S.r, S.phi)
        out.append((float(np.sum(S.weight * fn(v, S))), S.volume))
    return Integral.estimate(out[0][0], out[1][0]), out[0][1]


def weighted_energy(field, region: Region, w=0, n_theta=128, n_nodes=16, count=16384):
    """Integral of |TF Hess b^2|^2 b^w over the region."""
    if w not in (0, -2, -field.spec.n):
        raise DomainError(f"weight exponent must be 0, -2 or -n, got {w}")
    dens = lambda v, _: v.tf2 * v.b**w
    if region.kind == "ball":
        I, _ = ball_integral(field, region.center, region.radius, dens, count)
    else:
        I = regions(field, n_theta, n_nodes).integrate(region.lo, region.hi, dens)
    return EnergyValue(region, w, I.value, I.error)


# ---------------------------------------------------------------------------
# inequality checks

# absolute slack for integrals that vanish analytically and carry only round-off
ROUNDOFF = 1e-20


@dataclass(frozen=True)
class MarginRow:
    id: str
    params: str
    lhs: float
    rhs: float  # right-hand side, with unknown constants set to 1
    ratio: float
    err: float
    asserted: bool

    @property
    def margin(self):
        """rhs - lhs; negative values within ``err`` are quadrature noise."""
        return self.rhs - self.lhs

    @property
    def holds(self):
        return (not self.asserted) or self.margin >= -(self.err + ROUNDOFF)


@dataclass
class PinchingCheck:
    rows: list = dc_field(default_factory=list)
    eta: float = float("nan")
    H_ball: float = float("nan")
    H_pole: float = float("nan")

    def row(self, id_):
        return next(r for r in self.rows if r.id == id_)

    @property
    def all_hold(self):
        return all(r.holds for r in self.rows)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["inequality", "params", "lhs", "rhs", "ratio", "err", "asserted", "margin"])
            for r in self.rows:
                w.writerow([r.id, r.params, f"{r.lhs:.12e}", f"{r.rhs:.12e}", f"{r.ratio:.12e}",
                            f"{r.err:.12e}", int(r.asserted), f"{r.margin:.12e}"])


def _ratio(lhs, rhs):
    # integrands that vanish analytically leave only round-off; their ratio is 0
    if abs(lhs) <= ROUNDOFF:
        return 0.0
    if rhs == 0:
        return math.inf
    return lhs / rhs


def pole_point(field):
    if field.rho == 0:
        return CENTER
    return Point(field.rho, 0.0 if field.side > 0 else math.pi)


def sup_tracefree(field, center, radius, count=4096):
    S = ball_sampler(field.spec, center, radius, count)
    return float(np.max(field.values(S.r, S.phi).tf2))


def tracefree_at_pole(field, eps=1e-4):
    """|TF|^2 extrapolated to the pole along the axis (linear in the offset)."""
    if field.rho == 0:
        r = np.array([eps, 2 * eps])
        t = field.values(r, np.zeros(2)).tf2
    else:
        r = field.rho + np.array([eps, 2 * eps])
        t = field.values(r, np.full(2, 0.0 if field.side > 0 else math.pi)).tf2
    return float(max(2 * t[0] - t[1], 0.0))


def pinching_inequality_check(field, s, r=1.0, C_ann=4.0, C_sub=2.0, p=CENTER, count=16384,
                              n_theta=128, n_nodes=16) -> PinchingCheck:
    """Margins for the annulus trace-free bound, the ball bound via F, and the eta split.

    ``s`` is the pinching scale (needs s >= 2 r / b_inf); ``r`` the ball radius about ``p``.
    """
    spec = field.spec
    n = spec.n
    if s < 2 * r / spec.b_inf * (1 - 1e-12):
        raise DomainError(f"scale hypothesis violated: s={s} < 2 r / b_inf = {2 * r / spec.b_inf}")
    out = PinchingCheck()
    reg = regions(field, n_theta, n_nodes)
    dens = lambda w: (lambda v, g: v.tf2 * v.b**w)

    # annulus bound with C = C_ann from the A-pinching on [s, 2s]
    pin = pinching_at(field, s, 2 * s, n_theta, n_nodes)
    ann = reg.integrate(2 * s, C_ann * s, dens(-n))
    rhs = 2 * C_ann ** (n - 2) * pin.W
    out.rows.append(MarginRow("annulus_W", f"s={s:g},C={C_ann:g}", ann.value, rhs,
                              _ratio(ann.value, rhs), ann.error + 2 * C_ann ** (n - 2) * pin.errW, True))
    # same integrand over the whole superlevel set (reported only)
    sup = reg.integrate(2 * s, math.inf, dens(-n))
    out.rows.append(MarginRow("superlevel_W", f"s={s:g},C={C_ann:g}", sup.value, rhs,
                              _ratio(sup.value, rhs), sup.error, False))

    # sublevel bound with C = C_sub from the F-pinching on [s, C s]
    pinF = pinching_at(field, s, C_sub * s, n_theta, n_nodes)
    sub = reg.integrate(0.0, s, dens(0))
    lhs = s**-n * sub.value
    k = 2 * C_sub ** (n + 1) / (C_sub - 1)
    out.rows.append(MarginRow("sublevel_F", f"r={s:g},C={C_sub:g}", lhs, k * pinF.F,
                              _ratio(lhs, k * pinF.F), s**-n * sub.error + k * pinF.errF, True))

    # ball average bounded by (s/r)^n F_{s,2s}; constant unknown, ratio only
    pin2 = pinF if C_sub == 2 else pinching_at(field, s, 2 * s, n_theta, n_nodes)
    tf_ball, vol = ball_integral(field, p, r, dens(0), count)
    avg = tf_ball.value / vol
    base = (s / r) ** n * pin2.F
    out.rows.append(MarginRow("ball_avg_F", f"s={s:g},r={r:g}", avg, base, _ratio(avg, base),
                              tf_ball.error / vol, False))
    # explicit constant: int_{b<=s} TF^2 <= 2^{n+2} s^n F_{s,2s}, and B_p(r) inside {b<=s}
    out.rows.append(MarginRow("ball_F_explicit", f"s={s:g},r={r:g}", tf_ball.value,
                              2 ** (n + 2) * s**n * pin2.F,
                              _ratio(tf_ball.value, 2 ** (n + 2) * s**n * pin2.F),
                              tf_ball.error + 2 ** (n + 2) * s**n * pin2.errF, True))

    _eta_split(field, out, s, r, p, pin2, count)
    return out


def _eta_split(field, out, s, r, p, pin, count):
    """Two-piece bound of the b^{-2}-weighted energy, split at the optimal eta."""
    spec, n = field.spec, field.spec.n
    x = pole_point(field)
    d_px = float(surface_distance(spec, p.r, x.r, abs(p.phi - x.phi))) if p.r or x.r else 0.0
    out.H_pole = tracefree_at_pole(field)
    out.H_ball = H = sup_tracefree(field, p, 2 * r, count // 4)
    total, vol = ball_integral(field, p, r, lambda v, _: v.tf2 * v.b**-2, count)
    if H <= ROUNDOFF or pin.F <= 0:
        out.eta = 0.0
        out.rows.append(MarginRow("eta_split", f"s={s:g},r={r:g}", total.value / vol, 0.0,
                                  _ratio(total.value, 0.0), total.error / vol, False))
        return
    eta = (2 * s**n * pin.F / ((n - 2) * H)) ** (1 / n)
    out.eta = eta
    room = 2 * r - d_px
    if eta >= room:
        # the optimal eta leaves B_p(2r); the split is not available at this scale
        out.rows.append(MarginRow("eta_split", f"s={s:g},r={r:g},eta={eta:.3g}",
                                  total.value / vol, math.nan, math.nan, total.error / vol, False))
        return
    ratio_fn = lambda v, S: (_dist_to(spec, x, S) / np.maximum(v.b, 1e-300)) ** 2
    inner, _ = ball_integral(field, x, eta, lambda v, S: v.tf2 * v.b**-2, count // 4)
    Sx = ball_sampler(spec, x, eta, count // 4)
    vx = field.values(Sx.r, Sx.phi)
    sup_db = float(np.max(ratio_fn(vx, Sx)))
    inv_d2 = float(np.sum(Sx.weight / np.maximum(_dist_to(spec, x, Sx), 1e-300) ** 2))
    bound_in = sup_db * H * inv_d2
    out.rows.append(MarginRow("eta_inner", f"eta={eta:.6g}", inner.value, bound_in,
                              _ratio(inner.value, bound_in), inner.error, True))
    # sup of d^2/b^2 on the sphere of radius eta, via a thin shell of the sampler
    th = np.linspace(0.0, np.pi, 257)
    rr, pp = _sphere_points(spec, x, eta, th)
    sup_sphere = float(np.max((eta / field.values(rr, pp).b) ** 2))
    outer, _ = ball_integral(
        field, p, r, lambda v, S: np.where(_dist_to(spec, x, S) > eta, v.tf2 * v.b**-2, 0.0), count)
    tf_ball, _ = ball_integral(field, p, r, lambda v, _: v.tf2, count)
    bound_out = sup_sphere * eta**-2 * tf_ball.value
    out.rows.append(MarginRow("eta_outer", f"eta={eta:.6g}", outer.value, bound_out,
                              _ratio(outer.value, bound_out), outer.error, True))
    # measured constant of the combined estimate, for trend tables
    base = eta**-2 * ((s / r) ** n * pin.F + eta**n / r**n * H)
    out.rows.append(MarginRow("eta_split", f"s={s:g},r={r:g},eta={eta:.6g}", total.value / vol,
                              base, _ratio(total.value / vol, base), total.error / vol, False))


def _dist_to(spec, x, S):
    return surface_distance(spec, x.r, S.r, np.abs(S.phi - x.phi))


def _sphere_points(spec, x, radius, th):
    """Meridian points at distance ``radius`` from the axis point x, one per direction."""
    sgn = 1.0 if x.phi == 0 else -1.0
    lo, hi = np.zeros_like(th), np.full_like(th, 4 * radius)

    def where(t):
        X = sgn * x.r + t * np.cos(th)
        Y = t * np.sin(th)
        rr, ph = np.hypot(X, Y), np.arctan2(Y, X)
        return rr, ph

    for _ in range(50):
        mid = 0.5 * (lo + hi)
        rr, ph = where(mid)
        inside = surface_distance(spec, x.r, rr, np.abs(ph - x.phi)) < radius
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return where(0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# Poincare diagnostics


def poincare_quotient(u, grad2_u, weight, diam):
    """(avg |u - avg u|^2) / (diam^2 avg |grad u|^2); 0 for constant u."""
    u, g, w = (np.asarray(a, float) for a in (u, grad2_u, weight))
    m = np.sum(w * u) / w.sum()
    num = np.sum(w * (u - m) ** 2) / w.sum()
    den = np.sum(w * g) / w.sum()
    if den <= 0:
        return 0.0
    return float(num / (diam**2 * den))


def grad_of_grad2(v):
    """Frame components of grad |grad b|^2 = Hess_h(grad b / b) - (Delta h / n) grad b / b."""
    m = v.trace / v.n
    gr, gp = v.b_r / v.b, v.b_phi / v.b
    return v.Hrr * gr + v.Hrp * gp - m * gr, v.Hrp * gr + v.Hpp * gp - m * gp


def gradient_oscillation_check(field, p=CENTER, r=1.0, count=16384):
    """Measured chain r^{-2} avg||grad b|^2 - c|^2 <= 4 Q b_inf^{-2} avg TF^2 b^{-2}.

    Q is the measured Poincare quotient of u = |grad b|^2 on the ball, so the
    chain is exact up to quadrature: it returns (lhs, rhs, Q).
    """
    spec = field.spec
    breaks = (field.rho,) if p.r == 0 and 0 < field.rho < r else ()
    S = ball_sampler(spec, p, r, count, breaks=breaks)
    v = field.values(S.r, S.phi)
    u = v.grad2
    gx, gy = grad_of_grad2(v)
    Q = poincare_quotient(u, gx**2 + gy**2, S.weight, 2 * r)
    c = S.mean(u)
    lhs = r**-2 * S.mean((u - c) ** 2)
    rhs = 4 * Q * spec.b_inf**-2 * S.mean(v.tf2 * v.b**-2)
    return lhs, rhs, Q
