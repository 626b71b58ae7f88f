"""Rotationally symmetric model manifolds dr^2 + f(r)^2 g_{S^{n-1}}.

Everything downstream works with a :class:`ManifoldSpec`; Euclidean space and
exact cones are the warped products with f(r) = r and f(r) = a r.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.special import erf

from .errors import ConfigError, DomainError, ValidationError
from .quad import gl_nodes

RICCI_TOL = 1e-8


def unit_ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(m):
    """Area of the unit m-sphere S^m in R^{m+1}."""
    return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


# ---------------------------------------------------------------------------
# warp profiles


class WarpProfile:
    """Warping function f on [0, r_max], continued linearly beyond r_max.

    ``r_max = inf`` means the closed form is used everywhere (then ``slope``
    must be supplied).  ``a0`` is f'(0): 1 for smooth centers, a for cones.
    """

    def __init__(self, id, params, f, df, d2f, r_max, slope=None, a0=1.0, scale=1.0):
        self.id = id
        self.params = tuple(float(p) for p in params)
        self._f, self._df, self._d2f = f, df, d2f
        self.r_max = float(r_max)
        self.a0 = float(a0)
        self.scale = float(scale)
        if math.isinf(self.r_max):
            if slope is None:
                raise ValueError("unbounded profile needs an explicit slope")
            self.f_max = math.inf
            self.slope = float(slope)
        else:
            self.f_max = float(f(np.array([self.r_max]))[0])
            self.slope = float(df(np.array([self.r_max]))[0])

    def __repr__(self):
        return f"WarpProfile({self.id!r}, {self.params}, r_max={self.r_max:g})"

    @property
    def r_lin(self):
        """Radius beyond which f is exactly linear (0 for cones)."""
        return 0.0 if self.is_linear else self.r_max

    @property
    def is_linear(self):
        return self.id in ("euclidean", "cone")

    @property
    def vertex_shift(self):
        """r0 with f(r) = a (r - r0) on the linear continuation."""
        if self.is_linear or self.slope <= 0:
            return 0.0
        return self.r_max - self.f_max / self.slope

    def _split(self, r):
        r = np.asarray(r, dtype=float)
        return r, r > self.r_max

    def f(self, r):
        r, out = self._split(r)
        val = self._f(np.where(out, self.r_max, r) if out.any() else r)
        if out.any():
            val = np.where(out, self.f_max + self.slope * (r - self.r_max), val)
        return val

    def df(self, r):
        r, out = self._split(r)
        val = self._df(np.where(out, self.r_max, r) if out.any() else r)
        return np.where(out, self.slope, val) if out.any() else val

    def d2f(self, r):
        r, out = self._split(r)
        val = self._d2f(np.where(out, self.r_max, r) if out.any() else r)
        return np.where(out, 0.0, val) if out.any() else val


def euclidean_profile():
    return WarpProfile(
        "euclidean", (), lambda r: np.asarray(r, float) * 1.0,
        lambda r: np.ones_like(np.asarray(r, float)),
        lambda r: np.zeros_like(np.asarray(r, float)), math.inf, slope=1.0)


def cone_profile(a):
    return WarpProfile(
        "cone", (a,), lambda r: a * np.asarray(r, float),
        lambda r: np.full_like(np.asarray(r, float), a),
        lambda r: np.zeros_like(np.asarray(r, float)), math.inf, slope=a, a0=a)


def smoothed_cone_profile(a, w, r_max=None):
    """f' = a + (1-a) exp(-(r/w)^2): flat core of width ~w, cone of slope a outside."""
    c = (1 - a) * w * math.sqrt(math.pi) / 2

    def f(r):
        return a * r + c * erf(r / w)

    def df(r):
        return a + (1 - a) * np.exp(-((r / w) ** 2))

    def d2f(r):
        return -2 * (1 - a) * r / w**2 * np.exp(-((r / w) ** 2))

    # exp(-x^2) < 1e-17 past x = 6.3
    return WarpProfile("smoothed-cone", (a, w), f, df, d2f,
                       6.5 * w if r_max is None else r_max, scale=w)


def tanh_cap_profile(lam, a=0.0, r_max=None):
    """f = a r + (1-a) tanh(lam r)/lam.  With a = 0 the volume growth is not Euclidean."""
    def f(r):
        return a * r + (1 - a) * np.tanh(lam * r) / lam

    def df(r):
        return a + (1 - a) / np.cosh(lam * r) ** 2

    def d2f(r):
        return -2 * (1 - a) * lam * np.tanh(lam * r) / np.cosh(lam * r) ** 2

    if r_max is None:
        r_max = 20.0 / lam
    return WarpProfile("tanh-cap", (lam, a), f, df, d2f, r_max, scale=1 / lam)


def poly_profile(coeffs, r_max):
    """f = sum_k c_k r^(k+1) on [0, r_max]."""
    p = np.polynomial.Polynomial([0.0, *coeffs])
    dp, d2p = p.deriv(), p.deriv(2)
    return WarpProfile("poly", coeffs, p, dp, d2p, r_max, scale=r_max / 4)


def table_profile(r, f, r_max=None):
    r = np.asarray(r, float)
    f = np.asarray(f, float)
    if r[0] != 0.0 or f[0] != 0.0:
        raise ConfigError("warp.table", "table must start at (0, 0)")
    spl = CubicSpline(r, f)
    d1, d2 = spl.derivative(), spl.derivative(2)
    rm = r[-1] if r_max is None else min(r_max, r[-1])
    return WarpProfile("table", (), spl, d1, d2, rm, scale=r[1] * 8)


def make_profile(id, params=(), r_max=None):
    params = tuple(float(p) for p in params)
    try:
        if id == "euclidean":
            return euclidean_profile()
        if id == "cone":
            return cone_profile(*params)
        if id == "smoothed-cone":
            return smoothed_cone_profile(*params, r_max=r_max)
        if id == "tanh-cap":
            return tanh_cap_profile(*params, r_max=r_max)
        if id == "poly":
            if r_max is None:
                raise ConfigError("r_max", "poly profile needs r_max")
            return poly_profile(params, r_max)
    except TypeError as exc:
        raise ConfigError("warp.params", f"wrong parameter count for {id}: {exc}") from None
    raise ConfigError("warp.id", f"unknown warp profile {id!r}")


# ---------------------------------------------------------------------------
# the conformal radial coordinate tau = log sigma, d tau / d r = 1 / f


class RadialChart:
    """Map between r and tau = log(sigma) with d tau = dr / f.

    The meridian metric dr^2 + f^2 dphi^2 equals (f/sigma)^2 (dsigma^2 +
    sigma^2 dphi^2), so (sigma, phi) are conformally flat polar coordinates.
    sigma is normalised by sigma ~ r^(1/a0) at the center.
    """

    NODE_STEP = 0.004

    def __init__(self, profile: WarpProfile):
        self.profile = p = profile
        self.a = p.slope
        if p.is_linear:
            self.tau_lin = -math.inf
            return
        r_min = 1e-7 * min(1.0, p.scale)
        self.tau_min = math.log(r_min) / p.a0
        r_lin = p.r_lin

        def rhs(t, y):
            r = math.exp(y[0])
            return [float(p.f(np.array([r]))[0]) / r]

        def hit(t, y):
            return y[0] - math.log(r_lin)

        hit.terminal = True
        span = (self.tau_min, self.tau_min + 200.0)
        sol = solve_ivp(rhs, span, [math.log(r_min)], method="DOP853", rtol=1e-13,
                        atol=1e-14, events=hit, dense_output=True)
        if not sol.t_events[0].size:
            raise ValidationError("profile never reaches its linear regime", r_lin)
        self.tau_lin = float(sol.t_events[0][0])
        m = max(64, int(math.ceil((self.tau_lin - self.tau_min) / self.NODE_STEP)))
        tau = np.linspace(self.tau_min, self.tau_lin, m + 1)
        logr = sol.sol(tau)[0]
        logr[-1] = math.log(r_lin)
        r = np.exp(logr)
        slope = p.f(r) / r
        self._logr = CubicHermiteSpline(tau, logr, slope)
        self._tau = CubicHermiteSpline(logr, tau, 1.0 / slope)
        self.r0 = p.vertex_shift

    def r_of_tau(self, tau):
        tau = np.asarray(tau, float)
        p = self.profile
        if p.is_linear:
            return np.exp(p.a0 * tau)
        out = np.empty_like(tau)
        lo = tau < self.tau_min
        hi = tau > self.tau_lin
        mid = ~(lo | hi)
        out[lo] = np.exp(p.a0 * tau[lo])
        out[mid] = np.exp(self._logr(tau[mid]))
        out[hi] = self.r0 + (p.r_lin - self.r0) * np.exp(self.a * (tau[hi] - self.tau_lin))
        return out

    def tau_of_r(self, r):
        r = np.asarray(r, float)
        p = self.profile
        with np.errstate(divide="ignore"):
            if p.is_linear:
                return np.log(r) / p.a0
            out = np.empty_like(r)
            logr = np.log(r)
            lo = logr < self._tau.x[0]
            hi = r > p.r_lin
            mid = ~(lo | hi)
            out[lo] = logr[lo] / p.a0
            out[mid] = self._tau(logr[mid])
            out[hi] = self.tau_lin + np.log((r[hi] - self.r0) / (p.r_lin - self.r0)) / self.a
        return out


# ---------------------------------------------------------------------------
# specs


KINDS = ("euclidean", "cone", "warped")


@dataclass(frozen=True)
class ManifoldSpec:
    n: int
    kind: str
    profile: WarpProfile = field(compare=False)
    label: str = ""

    @property
    def a(self):
        return self.profile.slope

    @cached_property
    def chart(self):
        return RadialChart(self.profile)

    @cached_property
    def volume(self):
        return avr_and_binfty(self)

    @property
    def b_inf(self):
        return self.volume.b_inf

    @cached_property
    def hash(self):
        p = self.profile
        blob = json.dumps([self.n, self.kind, p.id, p.params, repr(p.r_max)])
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def f(self, r):
        return self.profile.f(r)


@dataclass(frozen=True)
class VolumeData:
    V_M: float
    b_inf: float
    v: float


@dataclass(frozen=True)
class Point:
    """A point in polar coordinates; ``orbit`` rotates about the symmetry axis."""

    r: float
    phi: float = 0.0
    orbit: float = 0.0

    def __post_init__(self):
        if self.r < 0 or not 0 <= self.phi <= math.pi:
            raise DomainError(f"invalid polar point r={self.r}, phi={self.phi}")

    def direction(self, n):
        d = np.zeros(n)
        d[0] = math.cos(self.phi)
        d[1] = math.sin(self.phi) * math.cos(self.orbit)
        d[2] = math.sin(self.phi) * math.sin(self.orbit)
        return d


CENTER = Point(0.0)


def euclidean(n, label=""):
    _check_dim(n)
    return ManifoldSpec(n, "euclidean", euclidean_profile(), label or f"R^{n}")


def cone(n, a, label=""):
    _check_dim(n)
    if not 0 < a <= 1:
        raise ValidationError(f"cone slope must lie in (0, 1], got {a}")
    if a == 1:
        return euclidean(n, label)
    return ManifoldSpec(n, "cone", cone_profile(a), label or f"cone(a={a:g})")


def warped(n, profile, label="", validate=True):
    _check_dim(n)
    spec = ManifoldSpec(n, "warped", profile, label or f"{profile.id}{profile.params}")
    if validate:
        validate_spec(spec)
    return spec


def _check_dim(n):
    if int(n) != n or n < 3:
        raise ValidationError(f"dimension must be an integer >= 3, got {n}")


def validation_grid(profile, nr=2000):
    top = profile.r_max * 1.5 if math.isfinite(profile.r_max) else 10.0
    lo = min(profile.scale, top) * 1e-4
    return np.unique(np.concatenate([np.geomspace(lo, top, nr), np.linspace(lo, top, nr)]))


# slopes below this are treated as zero: no Euclidean volume growth
MIN_SLOPE = 1e-6


def validate_spec(spec: ManifoldSpec, nr=2000):
    _check_dim(spec.n)
    p = spec.profile
    if p.is_linear:
        return spec
    r = validation_grid(p, nr)
    f0 = float(p.f(np.array([0.0]))[0])
    df0 = float(p.df(np.array([0.0]))[0])
    rep = ricci_range(spec, r)
    if rep.min_eigenvalue < -RICCI_TOL:
        raise ValidationError(f"Ricci curvature negative: min eigenvalue {rep.min_eigenvalue:.3g}",
                              rep.argmin)
    if abs(f0) > 1e-12:
        raise ValidationError(f"f(0) = {f0:g}, expected 0", 0.0)
    if abs(df0 - 1) > 1e-6:
        raise ValidationError(f"f'(0) = {df0:g}, expected 1", 0.0)
    if np.any(p.f(r) <= 0):
        raise ValidationError("f must be positive for r > 0", float(r[np.argmin(p.f(r))]))
    if not MIN_SLOPE <= p.slope <= 1 + 1e-12:
        raise ValidationError(f"volume growth undetermined: asymptotic slope {p.slope:g}")
    ratio = p.f(r) / r
    jumps = np.diff(ratio)
    if np.any(jumps > 1e-10 * ratio[1:]):
        raise ValidationError("f(r)/r must be non-increasing", float(r[1:][np.argmax(jumps)]))
    return spec


# ---------------------------------------------------------------------------
# config parsing


def _parse_floats(key, text):
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(key, f"expected numbers, got {text!r}") from None


def parse_config(text):
    """Parse ``key = value`` text with ``[section]`` headers into nested dicts."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    return {s: dict(cp[s]) for s in cp.sections()}


def load_spec(config, validate=True) -> ManifoldSpec:
    """Build a spec from config text, a parsed mapping, or a flat mapping.

    Accepted keys: n, kind, a, warp.id, warp.params, warp.table, r_max, label.
    """
    if isinstance(config, str):
        sections = parse_config(config)
        if "manifold" not in sections:
            raise ConfigError("[manifold]", "missing section")
        config = sections["manifold"]
    cfg = {str(k).lower(): v for k, v in dict(config).items()}
    if "n" not in cfg:
        raise ConfigError("n", "missing")
    try:
        n = int(cfg["n"])
    except (TypeError, ValueError):
        raise ConfigError("n", f"not an integer: {cfg['n']!r}") from None
    _check_dim(n)
    kind = str(cfg.get("kind", "")).strip().lower()
    label = str(cfg.get("label", ""))
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {KINDS}, got {cfg.get('kind')!r}")
    if kind == "euclidean":
        return euclidean(n, label)
    if kind == "cone":
        if "a" not in cfg:
            raise ConfigError("a", "cone needs a slope")
        try:
            a = float(cfg["a"])
        except (TypeError, ValueError):
            raise ConfigError("a", f"not a number: {cfg['a']!r}") from None
        return cone(n, a, label)
    wid = cfg.get("warp.id")
    if wid is None:
        raise ConfigError("warp.id", "warped spec needs a profile id")
    r_max = cfg.get("r_max")
    if r_max is not None:
        r_max = _parse_floats("r_max", str(r_max))[0] if isinstance(r_max, str) else float(r_max)
    if wid == "table":
        tab = cfg.get("warp.table")
        if tab is None:
            raise ConfigError("warp.table", "table profile needs warp.table = r f r f ...")
        vals = _parse_floats("warp.table", tab) if isinstance(tab, str) else tuple(np.ravel(tab))
        if len(vals) % 2 or len(vals) < 8:
            raise ConfigError("warp.table", "need an even number (>= 8) of values")
        arr = np.array(vals).reshape(-1, 2)
        prof = table_profile(arr[:, 0], arr[:, 1], r_max)
    else:
        params = cfg.get("warp.params", ())
        if isinstance(params, str):
            params = _parse_floats("warp.params", params)
        prof = make_profile(str(wid).strip(), params, r_max)
    return warped(n, prof, label, validate=validate)


# ---------------------------------------------------------------------------
# curvature and volume


@dataclass(frozen=True)
class RicciReport:
    r: np.ndarray
    ric_rad: np.ndarray
    ric_tan: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float
    argmin: float


def ricci_eigenvalues(n, profile, r):
    """Radial and tangential Ricci eigenvalues of dr^2 + f^2 g_S at radii r."""
    f, df, d2f = profile.f(r), profile.df(r), profile.d2f(r)
    rad = -(n - 1) * d2f / f
    tan = -d2f / f + (n - 2) * (1 - df**2) / f**2
    return rad, tan


def ricci_range(spec, grid=None) -> RicciReport:
    if grid is None or np.isscalar(grid):
        r = validation_grid(spec.profile, 2000 if grid is None else int(grid))
    else:
        r = np.asarray(grid, float)
    if spec.kind == "euclidean":
        rad = tan = np.zeros_like(r)
    else:
        rad, tan = ricci_eigenvalues(spec.n, spec.profile, r)
    both = np.minimum(rad, tan)
    i = int(np.argmin(both))
    return RicciReport(r, rad, tan, float(both[i]), float(np.maximum(rad, tan).max()), float(r[i]))


def avr_and_binfty(spec, v=None) -> VolumeData:
    """Asymptotic volume ratio and the normalisation b_inf = (V_M/omega_n)^(1/(n-2))."""
    n, a = spec.n, spec.profile.slope
    if not a > 0:
        raise ValidationError("volume growth undetermined")
    # Vol(B_R) = |S^{n-1}| int_0^R f^{n-1}, and f ~ a r
    V_M = unit_ball_volume(n) * a ** (n - 1)
    b_inf = (V_M / unit_ball_volume(n)) ** (1 / (n - 2))
    return VolumeData(V_M, b_inf, V_M if v is None else float(v))


def ball_volume(spec, R, nodes=200):
    """|S^{n-1}| int_0^R f^{n-1} dr about the center."""
    r, w = gl_nodes(0.0, R, nodes)
    return sphere_area(spec.n - 1) * float(np.sum(w * spec.f(r) ** (spec.n - 1)))


# ---------------------------------------------------------------------------
# geodesic distance on the totally geodesic surface dr^2 + f^2 dtheta^2

_NQ = 32


def _clairaut_integrals(profile, start, end, c_frac):
    """Angle swept and length of a geodesic piece with Clairaut constant c.

    c = c_frac * f(start).  Integrates from ``start`` to ``end`` using
    r = start + (end - start) v^2, which removes the square-root singularity
    at a turning point; f - f(start) is formed as a divided difference to
    avoid cancellation next to it.
    """
    v, w = gl_nodes(0.0, 1.0, _NQ)
    span = (end - start)[..., None]
    s = start[..., None]
    fs = profile.f(s)
    c = c_frac[..., None] * fs
    dr = span * v**2
    f = profile.f(s + dr)
    small = dr < 1e-5 * (s + profile.scale)
    safe = np.where(small, 1.0, dr)
    dd = np.where(small, profile.df(s) + 0.5 * profile.d2f(s) * dr, (f - fs) / safe)
    # root^2 / v^2 = f^2 - c^2 over v^2, written without cancellation
    q = span * dd * (f + fs) + fs**2 * (1 - c_frac[..., None] ** 2) / np.maximum(v**2, 1e-300)
    jac = 2 * np.sqrt(span) * w / np.sqrt(np.maximum(q / np.maximum(span, 1e-300), 1e-300))
    theta = np.sum(jac * c / f, axis=-1)
    length = np.sum(jac * f, axis=-1)
    return theta, length


def _bisect(fun, lo, hi, iters=48):
    """Vectorised bisection for the sign change of an increasing ``fun``."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        up = fun(mid) > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return 0.5 * (lo + hi)


def _warped_distance(profile, r1, r2, gamma):
    lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
    out = lo + hi  # path through the center is always admissible
    # an endpoint within round-off of the center is the center
    radial = (lo <= 1e-14 * np.maximum(hi, 1.0)) | (gamma <= 1e-14)
    out = np.where(radial, hi - lo, out)
    todo = ~radial
    if not todo.any():
        return out
    lo, hi, gam = lo[todo], hi[todo], gamma[todo]
    th1, _ = _clairaut_integrals(profile, lo, hi, np.ones_like(lo))
    res = np.full(lo.shape, np.inf)

    mono = gam <= th1
    if mono.any():
        l_, h_, g_ = lo[mono], hi[mono], gam[mono]

        def fun(alpha):
            return _clairaut_integrals(profile, l_, h_, np.sin(alpha))[0] - g_

        alpha = _bisect(fun, np.zeros_like(l_), np.full_like(l_, np.pi / 2))
        res[mono] = _clairaut_integrals(profile, l_, h_, np.sin(alpha))[1]

    turn = ~mono
    if turn.any():
        l_, h_, g_ = lo[turn], hi[turn], gam[turn]

        def swept(beta):
            rs = l_ * beta
            one = np.ones_like(rs)
            t1, L1 = _clairaut_integrals(profile, rs, l_, one)
            t2, L2 = _clairaut_integrals(profile, rs, h_, one)
            return t1 + t2, L1 + L2

        # scan the turning radius downwards; the first crossing is the shortest branch
        betas = np.geomspace(1.0, 1e-4, 41)
        prev = np.ones_like(l_)
        found = np.zeros(l_.shape, bool)
        blo = np.zeros_like(l_)
        bhi = np.ones_like(l_)
        for b in betas[1:]:
            th, _ = swept(np.full_like(l_, b))
            cross = (~found) & (th >= g_)
            blo[cross], bhi[cross] = b, prev[cross]
            found |= cross
            prev = np.full_like(l_, b)
            if found.all():
                break
        sub = np.full(l_.shape, np.inf)
        if found.any():
            lf, hf, gf = l_[found], h_[found], g_[found]

            def fun(beta):
                rs = lf * beta
                one = np.ones_like(rs)
                return -(_clairaut_integrals(profile, rs, lf, one)[0]
                         + _clairaut_integrals(profile, rs, hf, one)[0] - gf)

            beta = _bisect(fun, blo[found], bhi[found])
            rs = lf * beta
            one = np.ones_like(rs)
            sub[found] = (_clairaut_integrals(profile, rs, lf, one)[1]
                          + _clairaut_integrals(profile, rs, hf, one)[1])
        res[turn] = sub
    out[todo] = np.minimum(out[todo], res)
    return out


def surface_distance(spec, r1, r2, gamma):
    """Geodesic distance between points at radii r1, r2 with angular separation gamma.

    Arrays broadcast.  Exact for Euclidean space and cones; Clairaut shooting
    with bisection on the turning radius otherwise.
    """
    r1, r2, gamma = np.broadcast_arrays(*(np.asarray(x, float) for x in (r1, r2, gamma)))
    gamma = np.clip(gamma, 0.0, np.pi)
    if spec.kind in ("euclidean", "cone"):
        ang = np.minimum(spec.a * gamma, np.pi)
        return np.sqrt((r1 - r2) ** 2 + 4 * r1 * r2 * np.sin(ang / 2) ** 2)
    shape = r1.shape
    r1, r2, gamma = r1.ravel().copy(), r2.ravel().copy(), gamma.ravel().copy()
    out, done = _shifted_cone_distance(spec.profile, r1, r2, gamma)
    if not done.all():
        todo = ~done
        out[todo] = _warped_distance(spec.profile, r1[todo], r2[todo], gamma[todo])
    return out.reshape(shape)


def _shifted_cone_distance(profile, r1, r2, gamma):
    """Exact distances for pairs whose geodesic never enters the curved core.

    Beyond r_lin the metric is a cone in rho = r - r0.  The straight cone
    geodesic is globally minimal when it stays outside the core (closest
    approach >= rho_lin) and is no longer than r1 + r2 - 2 r_lin, a lower
    bound for any path that dips into the core.
    """
    out = np.zeros_like(r1)
    a, r_lin = profile.slope, profile.r_lin
    if not (0 < a <= 1) or not np.isfinite(r_lin):
        return out, np.zeros(r1.shape, bool)
    r0 = profile.vertex_shift
    p1, p2 = r1 - r0, r2 - r0
    ang = a * gamma
    d = np.sqrt((p1 - p2) ** 2 + 4 * p1 * p2 * np.sin(ang / 2) ** 2)
    # closest approach of the straight segment to the vertex
    with np.errstate(invalid="ignore", divide="ignore"):
        foot = np.where(d > 0, p1 * p2 * np.sin(ang) / d, np.minimum(p1, p2))
        t1 = (p1 - p2 * np.cos(ang)) * p1  # sign tests whether the foot lies inside
        t2 = (p2 - p1 * np.cos(ang)) * p2
    closest = np.where((t1 > 0) & (t2 > 0), foot, np.minimum(p1, p2))
    ok = ((np.minimum(r1, r2) >= r_lin) & (ang <= np.pi)
          & (closest >= r_lin - r0) & (d <= r1 + r2 - 2 * r_lin))
    out[ok] = d[ok]
    return out, ok


def angle_between(u, v):
    # half-angle form, accurate for nearly parallel and nearly opposite vectors
    return 2 * np.arctan2(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))


def geodesic_distance(spec, p: Point, q: Point, r_limit=None):
    """Distance between two points; ``r_limit`` optionally bounds the domain."""
    if r_limit is not None and max(p.r, q.r) > r_limit:
        raise DomainError(f"points beyond r_max={r_limit}")
    if spec.kind == "euclidean":
        return float(np.linalg.norm(p.r * p.direction(spec.n) - q.r * q.direction(spec.n)))
    gamma = angle_between(p.direction(spec.n), q.direction(spec.n))
    return float(surface_distance(spec, p.r, q.r, gamma))


def graph_distance(spec, r1, r2, gamma, resolution=64, r_top=None):
    """Shortest path on a polar grid graph of the meridian surface.

    Slow and only first-order accurate; kept as an independent check of
    :func:`surface_distance`.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    r_top = r_top or 1.5 * max(r1, r2)
    nr, nt = resolution, 2 * resolution
    rs = np.linspace(0.0, r_top, nr + 1)[1:]
    ts = np.linspace(0.0, np.pi, nt + 1)
    R, T = np.meshgrid(rs, ts, indexing="ij")
    idx = np.arange(R.size).reshape(R.shape)
    rows, cols, wts = [], [], []
    stencil = [(i, j) for i in range(-3, 4) for j in range(-3, 4)
               if (i, j) > (0, 0) and math.gcd(abs(i), abs(j)) == 1]
    for di, dj in stencil:
        a = idx[max(0, -di):nr - max(0, di), max(0, -dj):nt + 1 - max(0, dj)]
        b = idx[max(0, di):nr + min(0, di) or None, max(0, dj):nt + 1 + min(0, dj) or None]
        ra, rb = R.flat[a], R.flat[b]
        mid = 0.5 * (ra + rb)
        dth = T.flat[b] - T.flat[a]
        # Simpson rule along the straight coordinate segment
        seg = (np.sqrt((rb - ra) ** 2 + spec.f(ra) ** 2 * dth**2)
               + 4 * np.sqrt((rb - ra) ** 2 + spec.f(mid) ** 2 * dth**2)
               + np.sqrt((rb - ra) ** 2 + spec.f(rb) ** 2 * dth**2)) / 6
        rows.append(a.ravel()); cols.append(b.ravel()); wts.append(seg.ravel())
    # the center node joins every r = rs[0] node radially
    center = R.size
    rows.append(np.full(nt + 1, center)); cols.append(idx[0]); wts.append(np.full(nt + 1, rs[0]))
    g = coo_matrix((np.concatenate(wts), (np.concatenate(rows), np.concatenate(cols))),
                   shape=(R.size + 1, R.size + 1)).tocsr()

    def node(r, t):
        if r == 0:
            return center
        return idx[int(round(r / r_top * nr)) - 1, int(round(t / np.pi * nt))]

    d = dijkstra(g, directed=False, indices=node(r1, 0.0))
    return float(d[node(r2, gamma)])


# ---------------------------------------------------------------------------
# ball sampling


@dataclass(frozen=True)
class SampleSet:
    """Weighted meridian samples (r, phi); weights integrate over the n-manifold."""

    r: np.ndarray
    phi: np.ndarray
    weight: np.ndarray

    @property
    def volume(self):
        return float(self.weight.sum())

    def mean(self, values):
        return float(np.sum(self.weight * values) / self.weight.sum())

    def __len__(self):
        return self.r.size


MIN_SAMPLES = 16


def volume_weight(spec, r, phi):
    n = spec.n
    f = spec.f(r)
    return sphere_area(n - 2) * (f * np.sin(phi)) ** (n - 2) * f


def ball_sampler(spec, center: Point, radius, count=4096, breaks=()):
    """Quadrature samples of B_center(radius).

    Centered balls use tensor Gauss rules in (r, phi), with the radial rule
    split at ``breaks``; off-center balls are parametrised by rays from the
    center in the (r cos phi, r sin phi) plane, clipped by geodesic distance.
    """
    if count < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {count}")
    m = max(4, int(round(math.sqrt(count))))
    if center.r == 0:
        edges = np.unique(np.clip([0.0, *breaks, radius], 0.0, radius))
        pieces = max(1, len(edges) - 1)
        nr = max(4, m // pieces)
        r, wr = gl_nodes(edges[:-1], edges[1:], nr)
        r, wr = r.ravel(), wr.ravel()
        ph, wp = gl_nodes(0.0, np.pi, m)
        R, P = np.meshgrid(r, ph, indexing="ij")
        W = np.outer(wr, wp) * volume_weight(spec, R, P)
        return SampleSet(R.ravel(), P.ravel(), W.ravel())
    if center.phi not in (0.0, math.pi):
        raise DomainError("off-axis ball centers are not axisymmetric")
    sgn = 1.0 if center.phi == 0.0 else -1.0
    th, wt = gl_nodes(0.0, np.pi, m)

    def dist(t):
        x = sgn * center.r + t * np.cos(th)
        y = t * np.sin(th)
        rr = np.hypot(x, y)
        ph = np.arctan2(y, x)
        ang = ph if sgn > 0 else np.pi - ph
        return surface_distance(spec, center.r, rr, ang) - radius, rr, ph

    hi = np.full(m, radius)
    while True:
        bad = dist(hi)[0] < 0
        if not bad.any():
            break
        hi = np.where(bad, 2 * hi, hi)
    lo = np.zeros(m)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        inside = dist(mid)[0] < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    tmax = 0.5 * (lo + hi)
    t, wtt = gl_nodes(np.zeros(m), tmax, m)
    x = sgn * center.r + t * np.cos(th)[:, None]
    y = t * np.sin(th)[:, None]
    rr, ph = np.hypot(x, y), np.arctan2(y, x)
    # plane polar Jacobian t, then convert dx dy to dr dphi (1/r)
    W = wt[:, None] * wtt * t / rr * volume_weight(spec, rr, ph)
    return SampleSet(rr.ravel(), ph.ravel(), W.ravel())


# ---------------------------------------------------------------------------
# model families used by sweeps

DEFAULT_WIDTHS = (0.4, 0.2, 0.1, 0.05)


def smoothed_cone_family(n=3, a=0.8, widths=DEFAULT_WIDTHS):
    """(width, spec) pairs; the members approach the cone of slope a as width -> 0."""
    return [(float(w), warped(n, smoothed_cone_profile(a, w))) for w in widths]
