"""Minimal positive Green functions and the normalised function b_x.

Normalisations: Delta G_D = -delta, G_CM = n(n-2) omega_n G_D and
b = b_inf^{-1} G_CM^{1/(2-n)}, so that b/d -> 1 at infinity.

Poles at the center are handled with the radial formula.  Off-center poles use
an expansion in zonal harmonics about the axis through the pole.  The leading
singularity is removed analytically: in the conformally flat coordinates
(sigma, phi) the metric is psi^2 times the Euclidean one, and

    S = (psi(r) psi(rho))^{-(n-2)/2} |X - Y|^{2-n} / ((n-2)|S^{n-1}|)

matches G up to O(d^{4-n}).  Only G - S is summed mode by mode, so the
truncation error does not blow up near the pole.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.interpolate import CubicHermiteSpline

from .errors import ConvergenceError, DomainError
from .manifold import SampleSet, ball_sampler, sphere_area, surface_distance, unit_ball_volume

MODE_NODE_STEP = 0.01
TAIL_TOL = 1e-3


def gegenbauer(L, lam, x):
    """C_0^lam(x) .. C_L^lam(x) by the three-term recurrence; shape (L+1,) + x.shape."""
    x = np.asarray(x, float)
    out = np.empty((L + 1,) + x.shape)
    out[0] = 1.0
    if L >= 1:
        out[1] = 2 * lam * x
    for k in range(1, L):
        out[k + 1] = (2 * (k + lam) * x * out[k] - (k + 2 * lam - 1) * out[k - 1]) / (k + 1)
    return out


def zonal_harmonics(L, n, x):
    """Zonal harmonics Z_l(x) on S^{n-1} normalised so that sum_l Z_l = delta.

    Returns Z, dZ/dx, d^2Z/dx^2, each of shape (L+1,) + x.shape.
    """
    lam = (n - 2) / 2
    x = np.asarray(x, float)
    ell = np.arange(L + 1).reshape((-1,) + (1,) * x.ndim)
    norm = (ell + lam) / (lam * sphere_area(n - 1))
    c0 = gegenbauer(L, lam, x)
    d1 = np.zeros_like(c0)
    d2 = np.zeros_like(c0)
    if L >= 1:
        d1[1:] = 2 * lam * gegenbauer(L - 1, lam + 1, x)
    if L >= 2:
        d2[2:] = 4 * lam * (lam + 1) * gegenbauer(L - 2, lam + 2, x)
    return norm * c0, norm * d1, norm * d2


@dataclass
class FieldValues:
    """b, its gradient and the Hessian of h = b^2 at a batch of points.

    Gradient and Hessian are in the orthonormal frame (e_r, e_phi, orbit);
    the orbit block is Hkk times the identity on n-2 directions.
    """

    n: int
    r: np.ndarray
    phi: np.ndarray
    G: np.ndarray
    b: np.ndarray
    b_r: np.ndarray
    b_phi: np.ndarray  # f^{-1} d b / d phi
    Hrr: np.ndarray
    Hrp: np.ndarray
    Hpp: np.ndarray
    Hkk: np.ndarray

    @property
    def grad2(self):
        return self.b_r**2 + self.b_phi**2

    @property
    def trace(self):
        return self.Hrr + self.Hpp + (self.n - 2) * self.Hkk

    @property
    def tf2(self):
        """|Hess b^2 - (Delta b^2 / n) g|^2."""
        m = self.trace / self.n
        return ((self.Hrr - m) ** 2 + 2 * self.Hrp**2 + (self.Hpp - m) ** 2
                + (self.n - 2) * (self.Hkk - m) ** 2)

    @property
    def hess2(self):
        return self.Hrr**2 + 2 * self.Hrp**2 + self.Hpp**2 + (self.n - 2) * self.Hkk**2

    def flipped(self):
        """Values seen from the opposite end of the axis (phi -> pi - phi)."""
        return FieldValues(self.n, self.r, np.pi - self.phi, self.G, self.b, self.b_r,
                           -self.b_phi, self.Hrr, -self.Hrp, self.Hpp, self.Hkk)


class _FieldBase:
    """Shared assembly of b and Hess b^2 from G and its (tau, phi) derivatives."""

    spec = None
    side = 1

    def _assemble(self, tau, phi, r, G, Gt, Gtt, Gp, Gp_sin, Gtp, Gpp):
        spec = self.spec
        n = spec.n
        c = n * (n - 2) * unit_ball_volume(n)
        gam = 2.0 / (2 - n)
        kappa = spec.b_inf**-2 * c**gam
        f = spec.f(r)
        fp = spec.profile.df(r)
        if np.any(G <= 0):
            raise ConvergenceError("Green function lost positivity; increase the mode cutoff")
        base = kappa * gam * G ** (gam - 1)
        h = kappa * G**gam
        ht, hp, hp_sin = base * Gt, base * Gp, base * Gp_sin
        htt = base * (Gtt + (gam - 1) * Gt * Gt / G)
        htp = base * (Gtp + (gam - 1) * Gt * Gp / G)
        hpp = base * (Gpp + (gam - 1) * Gp * Gp / G)
        b = np.sqrt(h)
        f2 = f * f
        return FieldValues(
            n, r, phi, G, b,
            0.5 * ht / (b * f), 0.5 * hp / (b * f),
            (htt - fp * ht) / f2, (htp - fp * hp) / f2, (hpp + fp * ht) / f2,
            (fp * ht + np.cos(phi) * hp_sin) / f2,
        )

    def values(self, r, phi):
        """Field values at meridian points (r, phi) of the ambient axis."""
        r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
        local = phi if self.side > 0 else np.pi - phi
        out = self.values_tau(self.spec.chart.tau_of_r(r), local, r)
        return out if self.side > 0 else out.flipped()

    def b(self, r, phi):
        return self.values(r, phi).b


# ---------------------------------------------------------------------------
# pole at the center


@dataclass
class RadialProfile:
    r: np.ndarray
    G_D: np.ndarray
    G_CM: np.ndarray
    b: np.ndarray
    db: np.ndarray


class RadialField(_FieldBase):
    """Green function with pole at the center.

    With tau = log sigma, J(tau) = |S^{n-1}| G_D = int_tau^inf f^{2-n}.  The
    bounded quantity K = J f^{n-2} solves K' = -1 + (n-2) f' K, integrated
    inwards from the exact-cone value 1/(a(n-2)) on the linear continuation.
    """

    rho = 0.0
    L = 0

    def __init__(self, spec):
        self.spec = spec
        n, p, ch = spec.n, spec.profile, spec.chart
        self.K_lin = 1.0 / (p.slope * (n - 2))
        self.K_center = 1.0 / (p.a0 * (n - 2))
        if p.is_linear:
            self._K = None
            return

        def rhs(t, y):
            fp = p.df(ch.r_of_tau(np.array([t])))[0]
            return [-1.0 + (n - 2) * fp * y[0]]

        sol = solve_ivp(rhs, (ch.tau_lin, ch.tau_min), [self.K_lin], method="DOP853",
                        rtol=1e-12, atol=1e-14, dense_output=True)
        m = int(math.ceil((ch.tau_lin - ch.tau_min) / MODE_NODE_STEP))
        tau = np.linspace(ch.tau_min, ch.tau_lin, m + 1)
        K = sol.sol(tau)[0]
        dK = -1.0 + (n - 2) * p.df(ch.r_of_tau(tau)) * K
        self._K = CubicHermiteSpline(tau, K, dK)
        self._lo, self._hi = tau[0], tau[-1]

    def K(self, tau):
        tau = np.asarray(tau, float)
        if self._K is None:
            return np.full_like(tau, self.K_lin)
        out = np.where(tau >= self._hi, self.K_lin, self.K_center)
        mid = (tau > self._lo) & (tau < self._hi)
        out = np.where(mid, self._K(np.clip(tau, self._lo, self._hi)), out)
        return out

    def values_tau(self, tau, phi, r=None):
        tau, phi = np.broadcast_arrays(np.asarray(tau, float), np.asarray(phi, float))
        spec, n = self.spec, self.spec.n
        if r is None:
            r = spec.chart.r_of_tau(tau)
        S = sphere_area(n - 1)
        f = spec.f(r)
        fp = spec.profile.df(r)
        fpow = f ** (2 - n)
        G = self.K(tau) * fpow / S
        Gt = -fpow / S
        Gtt = (n - 2) * fp * fpow / S
        z = np.zeros_like(G)
        return self._assemble(tau, phi, r, G, Gt, Gtt, z, z, z, z)

    def profile(self, r):
        """Radial profile (G_D, G_CM, b, b') at radii r."""
        r = np.asarray(r, float)
        v = self.values(r, np.zeros_like(r))
        n = self.spec.n
        return RadialProfile(r, v.G, n * (n - 2) * unit_ball_volume(n) * v.G, v.b, v.b_r)

    def b_inverse(self, s):
        """Radius where b = s (b is increasing)."""
        b = lambda x: self.profile(np.array([x])).b[0] - s
        hi = max(s, 1e-12)
        while b(hi) < 0:
            hi *= 2
        lo = 0.5 * hi
        while b(lo) > 0:
            lo *= 0.5
        return brentq(b, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def radial_green(spec) -> RadialField:
    return RadialField(spec)


# ---------------------------------------------------------------------------
# pole off the center


class BField(_FieldBase):
    """Green function with pole on the axis at distance ``rho`` from the center.

    ``side = +1`` puts the pole at phi = 0, ``side = -1`` at phi = pi.
    """

    def __init__(self, spec, rho, L=48, side=1, node_step=MODE_NODE_STEP):
        if not rho > 0:
            raise DomainError("off-center pole needs rho > 0")
        if L < 8:
            raise DomainError("mode cutoff must be at least 8")
        self.spec, self.rho, self.L, self.side = spec, float(rho), int(L), int(side)
        n, p, ch = spec.n, spec.profile, spec.chart
        self.lam = lam = (n - 2) / 2
        self.tau_rho = float(ch.tau_of_r(np.array([rho]))[0])
        self.f_rho = float(p.f(np.array([rho]))[0])
        ell = np.arange(L + 1, dtype=float)
        self.ell = ell
        self.mu = mu = ell * (ell + n - 2)

        def fixed(a, sign):
            return (-(n - 2) * a + sign * np.sqrt((n - 2) ** 2 * a * a + 4 * mu)) / 2

        self.zp_center = fixed(p.a0, 1)
        self.zq_far = fixed(p.slope, -1)
        self.m_in = ell
        self.m_out = 2 - n - ell
        self._node_step = node_step
        self._build()

    # --- mode ODEs --------------------------------------------------------

    def _riccati(self, tau, z):
        fp = self.spec.profile.df(self.spec.chart.r_of_tau(tau))
        return self.mu - (self.spec.n - 2) * fp * z - z * z

    def _branch(self, t0, t1, z0):
        """Integrate the Riccati system and its running integral from t0 to t1."""
        Lp1 = self.L + 1
        if t0 == t1:
            return None

        def rhs(t, y):
            z = y[:Lp1]
            return np.concatenate([self._riccati(np.full(Lp1, t), z), z])

        y0 = np.concatenate([z0, np.zeros(Lp1)])
        sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=1e-11, atol=1e-12,
                        dense_output=True)
        if not sol.success:
            raise ConvergenceError(f"mode ODE failed ({sol.message}); modes 0..{self.L}")
        return sol

    def _build(self):
        ch, p, n, lam = self.spec.chart, self.spec.profile, self.spec.n, self.lam
        tr = self.tau_rho
        linear = p.is_linear
        # inner branch: regular at the center
        t_in = tr if linear else min(ch.tau_min, tr)
        sol_in = None if linear else self._branch(t_in, tr, self.zp_center)
        # outer branch: decaying at infinity
        t_out = tr if linear else max(ch.tau_lin, tr)
        sol_out = None if linear else self._branch(t_out, tr, self.zq_far)

        def z_at(sol, zconst, tau, end):
            if sol is None:
                return np.repeat(zconst[None], np.size(tau), 0), (tau - end)[:, None] * zconst
            y = sol.sol(tau).T
            I_end = sol.sol(end)[self.L + 1:]
            return y[:, :self.L + 1], y[:, self.L + 1:] - I_end

        z_p_rho = self.zp_center if sol_in is None else sol_in.sol(tr)[:self.L + 1]
        z_q_rho = self.zq_far if sol_out is None else sol_out.sol(tr)[:self.L + 1]
        jump = z_p_rho - z_q_rho
        if np.any(jump <= 0):
            bad = int(np.argmin(jump))
            raise ConvergenceError(f"non-positive Wronskian for mode {bad}")
        self.delta_rho = np.log(2 * self.ell + n - 2) - np.log(jump)

        def splines(t_a, t_b, sol, zconst, m):
            if t_a == t_b:
                return None
            k = max(8, int(math.ceil(abs(t_b - t_a) / self._node_step)))
            tau = np.linspace(min(t_a, t_b), max(t_a, t_b), k + 1)
            z, I = z_at(sol, zconst, tau, tr)
            r = ch.r_of_tau(tau)
            fp, f, fpp = p.df(r), p.f(r), p.d2f(r)
            lam_p = -lam * (fp - 1)[:, None] + m
            # Delta = log g - log s, fixed at tau_rho by the Wronskian
            x = tau - tr
            D = I + (lam * (np.log(f / self.f_rho) - x))[:, None] - m * x[:, None] + self.delta_rho
            dD = z - lam_p
            ddD = (self.mu - (n - 2) * fp[:, None] * z - z * z) + (lam * f * fpp)[:, None]
            return (CubicHermiteSpline(tau, D, dD), CubicHermiteSpline(tau, dD, ddD),
                    tau[0], tau[-1])

        self._in = splines(t_in, tr, sol_in, self.zp_center, self.m_in)
        self._out = splines(tr, t_out, sol_out, self.zq_far, self.m_out)

    def _delta(self, tau, inner):
        """Delta_l, Delta_l', Delta_l'' at tau; arrays of shape (N, L+1)."""
        p, n, lam = self.spec.profile, self.spec.n, self.lam
        m = self.m_in if inner else self.m_out
        tr = self.tau_rho
        spl = self._in if inner else self._out
        N = tau.size
        if spl is None:
            # exactly linear profile on this side: z and Lambda' are constant
            zc = self.zp_center if inner else self.zq_far
            a = p.a0 if inner else p.slope
            slope = zc - (-lam * (a - 1) + m)
            D = self.delta_rho + (tau - tr)[:, None] * slope
            return D, np.repeat(slope[None], N, 0), np.zeros((N, self.L + 1))
        sD, sdD, lo, hi = spl
        tc = np.clip(tau, lo, hi)
        D = sD(tc)
        dD = sdD(tc)
        # beyond the node range z and Lambda' are constant: extend linearly
        D = D + (tau - tc)[:, None] * dD
        r = self.spec.chart.r_of_tau(tau)
        fp, f, fpp = p.df(r), p.f(r), p.d2f(r)
        z = dD + (-lam * (fp - 1))[:, None] + m
        ddD = self.mu - (n - 2) * fp[:, None] * z - z * z + (lam * f * fpp)[:, None]
        return D, dD, ddD

    # --- evaluation ---------------------------------------------------------

    def _logW(self, f, x):
        # log of (psi psi_rho)^{-lam} sigma_rho^{2-n}, psi = f / sigma
        return -self.lam * (np.log(f / self.f_rho) - x) - (self.spec.n - 2) * math.log(self.f_rho)

    def values_tau(self, tau, phi, r=None):
        tau, phi = np.broadcast_arrays(np.asarray(tau, float), np.asarray(phi, float))
        shape = tau.shape
        tau, phi = tau.ravel(), phi.ravel()
        spec, n, lam, L = self.spec, self.spec.n, self.lam, self.L
        p = spec.profile
        r = spec.chart.r_of_tau(tau) if r is None else np.asarray(r, float).ravel()
        f, fp, fpp = p.f(r), p.df(r), p.d2f(r)
        tr = self.tau_rho
        x = tau - tr
        zeta = np.exp(x)
        cphi, sphi = np.cos(phi), np.sin(phi)

        # conformal weight W = (psi psi_rho)^{-lam}, psi = f / sigma
        logW = self._logW(f, x)
        W = np.exp(logW)
        Wt = -lam * (fp - 1)
        Wtt = Wt * Wt - lam * f * fpp

        # singular part S = W * c_E * q^{-lam}, q = zeta^2 + 1 - 2 zeta cos(phi)
        cE = 1.0 / ((n - 2) * sphere_area(n - 1))
        q = zeta * zeta + 1 - 2 * zeta * cphi
        q_t = 2 * zeta * zeta - 2 * zeta * cphi
        q_tt = 4 * zeta * zeta - 2 * zeta * cphi
        q_ps = 2 * zeta  # q_phi / sin(phi)
        E = cE * q**-lam
        E_t = -lam * E * q_t / q
        E_ps = -lam * E * q_ps / q
        E_p = E_ps * sphi
        E_tt = E * (lam * (lam + 1) * q_t * q_t / q**2 - lam * q_tt / q)
        E_tp = E * (lam * (lam + 1) * q_t * q_ps / q**2 - lam * q_ps / q) * sphi
        E_pp = E * (lam * (lam + 1) * (q_ps * sphi) ** 2 / q**2 - lam * 2 * zeta * cphi / q)

        S = W * E
        S_t = W * (Wt * E + E_t)
        S_tt = W * (Wtt * E + 2 * Wt * E_t + E_tt)
        S_p, S_ps = W * E_p, W * E_ps
        S_tp = W * (Wt * E_p + E_tp)
        S_pp = W * E_pp

        # residual modes d_l = s_l expm1(Delta_l), s_l = W zeta^m / (2l+n-2)
        R = np.zeros((6, tau.size))
        Z, Zx, Zxx = zonal_harmonics(L, n, cphi)
        for inner in (True, False):
            sel = (x <= 0) if inner else (x > 0)
            if not sel.any():
                continue
            m = self.m_in if inner else self.m_out
            D, dD, ddD = self._delta(tau[sel], inner)
            logs = logW[sel, None] + m * x[sel, None] - np.log(2 * self.ell + n - 2)
            s = np.exp(logs)
            Lp = Wt[sel, None] + m
            Lpp = (-lam * f * fpp)[sel, None]
            eD = np.exp(D)
            em1 = np.expm1(D)
            d0 = s * em1
            d1 = s * (Lp * em1 + eD * dD)
            d2 = s * ((Lpp + Lp * Lp) * em1 + 2 * Lp * eD * dD + eD * (ddD + dD * dD))
            Zs, Zxs, Zxxs = Z[:, sel].T, Zx[:, sel].T, Zxx[:, sel].T
            sp, cp = sphi[sel, None], cphi[sel, None]
            R[0, sel] = np.sum(d0 * Zs, 1)
            R[1, sel] = np.sum(d1 * Zs, 1)
            R[2, sel] = np.sum(d2 * Zs, 1)
            R[3, sel] = -np.sum(d0 * Zxs, 1)  # G_phi / sin(phi)
            R[4, sel] = -np.sum(d1 * Zxs, 1)  # G_tau_phi / sin(phi)
            R[5, sel] = np.sum(d0 * (sp * sp * Zxxs - cp * Zxs), 1)
        G = S + R[0]
        Gt = S_t + R[1]
        Gtt = S_tt + R[2]
        Gps = S_ps + R[3]
        Gp = S_p + R[3] * sphi
        Gtp = S_tp + R[4] * sphi
        Gpp = S_pp + R[5]
        out = self._assemble(tau, phi, r, G, Gt, Gtt, Gp, Gps, Gtp, Gpp)
        if shape != tau.shape:
            for k in ("r", "phi", "G", "b", "b_r", "b_phi", "Hrr", "Hrp", "Hpp", "Hkk"):
                setattr(out, k, getattr(out, k).reshape(shape))
        return out

    # --- diagnostics --------------------------------------------------------

    def mode_tail(self, r, phi):
        """Largest relative contribution of the top two modes at the given points."""
        tau = self.spec.chart.tau_of_r(np.asarray(r, float).ravel())
        phi = np.asarray(phi, float).ravel()
        x = tau - self.tau_rho
        n = self.spec.n
        Z = zonal_harmonics(self.L, n, np.cos(phi))[0][-2:]
        out = 0.0
        G = self.values_tau(tau, phi).G
        for inner in (True, False):
            sel = (x <= 0) if inner else (x > 0)
            if not sel.any():
                continue
            m = (self.m_in if inner else self.m_out)[-2:]
            D = self._delta(tau[sel], inner)[0][:, -2:]
            logW = self._logW(self.spec.f(self.spec.chart.r_of_tau(tau[sel])), x[sel])
            s = np.exp(logW[:, None] + m * x[sel, None] - np.log(2 * self.ell[-2:] + n - 2))
            contrib = np.abs(s * np.expm1(D) * Z[:, sel].T).sum(1) / G[sel]
            out = max(out, float(contrib.max()))
        return out

    def grid_table(self, nr=512, nphi=256, r_top=None):
        """(r, phi, b, db_dr, db_dphi_over_f) on a log-radial grid."""
        r_top = r_top or 8 * max(self.rho, 1.0)
        r = np.geomspace(r_top * 1e-3, r_top, nr)
        phi = np.linspace(0, np.pi, nphi)
        R, P = np.meshgrid(r, phi, indexing="ij")
        v = self.values(R.ravel(), P.ravel())
        return np.column_stack([R.ravel(), P.ravel(), v.b, v.b_r, v.b_phi])


def offcenter_green(spec, rho, L=48, side=1, check_tail=True):
    field = BField(spec, rho, L, side)
    if check_tail:
        ph = np.linspace(0.1, np.pi, 16)
        r = np.full_like(ph, rho)
        tail = field.mode_tail(r, ph)
        field.tail_bound = tail
        if tail > TAIL_TOL:
            warnings.warn(f"mode truncation tail {tail:.2e} above {TAIL_TOL:g} (L={L})",
                          RuntimeWarning, stacklevel=2)
    return field


def field_for_pole(spec, rho, side=1, L=48):
    """Radial field for rho = 0, mode expansion otherwise."""
    if rho == 0:
        return RadialField(spec)
    return BField(spec, rho, L, side)


def export_field_csv(field, path, nr=512, nphi=256):
    import hashlib

    if isinstance(field, RadialField):
        r = np.geomspace(1e-3, 8.0, nr)
        phi = np.linspace(0, np.pi, nphi)
        R, P = np.meshgrid(r, phi, indexing="ij")
        v = field.values(R.ravel(), P.ravel())
        table = np.column_stack([R.ravel(), P.ravel(), v.b, v.b_r, v.b_phi])
    else:
        table = field.grid_table(nr, nphi)
    with open(path, "w") as fh:
        fh.write(f"# spec={field.spec.hash} rho={field.rho:.17g} L={field.L} "
                 f"b_inf={field.spec.b_inf:.17g}\n")
        fh.write("r,phi,b,db_dr,db_dphi_over_f\n")
        for row in table:
            fh.write(",".join(f"{v:.12e}" for v in row) + "\n")
    return hashlib.sha256(table.tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# uniform estimates on balls


@dataclass(frozen=True)
class UniformEstimate:
    sup_ratio: float  # sup |b^2/d^2 - 1| outside the excluded pole ball
    grad_defect: float  # |avg |grad b|^2 - 1|
    sup_c0: float  # sup |b - d| / r
    excluded: float


def uniform_estimates(field, radius=1.0, count=4096, exclude=None):
    """Uniform diagnostics of b_x against d_x on B_o(radius).

    The ball is centered at the center of symmetry.  b/d tends to 1/b_inf at a
    smooth pole, so the sup of |b^2/d^2 - 1| is taken outside B_x(exclude)
    (default 0.05 radius); ``sup_c0`` has no exclusion.
    """
    spec = field.spec
    if exclude is None:
        exclude = 0.05 * radius
    rho = field.rho
    breaks = (rho,) if 0 < rho < radius else ()
    samples = ball_sampler(spec, _center(), radius, count, breaks=breaks)
    v = field.values(samples.r, samples.phi)
    pole_phi = 0.0 if field.side > 0 else np.pi
    d = surface_distance(spec, rho, samples.r, np.abs(samples.phi - pole_phi))
    keep = d > exclude
    ratio = np.abs(v.b[keep] ** 2 / d[keep] ** 2 - 1)
    return UniformEstimate(
        float(ratio.max()) if ratio.size else 0.0,
        abs(samples.mean(v.grad2) - 1.0),
        float(np.max(np.abs(v.b - d)) / radius),
        exclude,
    )


def _center():
    from .manifold import CENTER

    return CENTER
