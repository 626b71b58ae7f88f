"""Monotone quantities A, V, F of a pole field and their pinchings."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .regions import Integral, regions, ricci_quadratic


@dataclass(frozen=True)
class MonotoneProfile:
    """A, V, F = A - 2(n-1)V at increasing radii, with quadrature error estimates."""

    n: int
    radii: np.ndarray
    A: np.ndarray
    V: np.ndarray
    errA: np.ndarray
    errV: np.ndarray
    spec_hash: str = ""
    b_inf: float = 1.0

    @property
    def F(self):
        return self.A - 2 * (self.n - 1) * self.V

    @property
    def errF(self):
        return self.errA + 2 * (self.n - 1) * self.errV

    def index(self, s):
        i = np.flatnonzero(np.isclose(self.radii, s, rtol=1e-12, atol=0))
        if i.size == 0:
            raise DomainError(f"scale {s} not in profile radii")
        return int(i[0])

    def violations(self):
        """Largest increase of A and decrease of F between neighbours, net of error."""
        dA = np.diff(self.A) - (self.errA[1:] + self.errA[:-1])
        dF = -np.diff(self.F) - (self.errF[1:] + self.errF[:-1])
        return float(max(dA.max(initial=0.0), 0.0)), float(max(dF.max(initial=0.0), 0.0))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "A", "V", "F", "errA", "errV"])
            for row in zip(self.radii, self.A, self.V, self.F, self.errA, self.errV):
                w.writerow([f"{x:.12e}" for x in row])


@dataclass(frozen=True)
class PinchingReport:
    s: float
    t: float
    W: float
    F: float
    errW: float
    errF: float


def level_integrals(field, s, n_theta=128, n_nodes=16):
    """(A(s), V(s)) as Integral objects."""
    reg = regions(field, n_theta, n_nodes)
    n = field.spec.n
    A = reg.level_area(s, 3)
    V = reg.integrate(0.0, s, lambda v, g: v.grad2**2)
    return A, Integral(V.value * s**-n, V.error * s**-n)


def monotone_profile(field, radii, n_theta=128, n_nodes=16) -> MonotoneProfile:
    radii = np.asarray(radii, float)
    if radii.ndim != 1 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise DomainError("radii must be positive and increasing")
    out = [level_integrals(field, s, n_theta, n_nodes) for s in radii]
    A = np.array([a.value for a, _ in out])
    V = np.array([v.value for _, v in out])
    eA = np.array([a.error for a, _ in out])
    eV = np.array([v.error for _, v in out])
    return MonotoneProfile(field.spec.n, radii, A, V, eA, eV, field.spec.hash, field.spec.b_inf)


def pinching(profile: MonotoneProfile, s, t) -> PinchingReport:
    if not s < t:
        raise DomainError("pinching needs s < t")
    i, j = profile.index(s), profile.index(t)
    W = abs(profile.A[j] - profile.A[i])
    F = abs(profile.F[j] - profile.F[i])
    return PinchingReport(s, t, W, F, profile.errA[i] + profile.errA[j],
                          profile.errF[i] + profile.errF[j])


def pinching_at(field, s, t, n_theta=128, n_nodes=16) -> PinchingReport:
    """Pinchings between two scales computed directly from a field."""
    return pinching(monotone_profile(field, [s, t], n_theta, n_nodes), s, t)


def write_pinching_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "t", "W", "F_pinch", "errW", "errF"])
        for p in reports:
            w.writerow([f"{x:.12e}" for x in (p.s, p.t, p.W, p.F, p.errW, p.errF)])


# ---------------------------------------------------------------------------
# derivative identities


def energy_density(spec):
    """|TF Hess b^2|^2 + Ric(grad b^2, grad b^2)."""
    return lambda v, g: v.tf2 + ricci_quadratic(spec, v)


def derivative_rhs(field, r, n_theta=128, n_nodes=16):
    """Right-hand sides of the A' and F' identities at r."""
    spec, n = field.spec, field.spec.n
    reg = regions(field, n_theta, n_nodes)
    e = energy_density(spec)
    sup = reg.integrate(r, np.inf, lambda v, g: e(v, g) * v.b ** (2 - 2 * n))
    sub = reg.integrate(0.0, r, e)
    cA = -0.5 * r ** (n - 3)
    cF = 0.5 * r ** (-1 - n)
    return Integral(cA * sup.value, abs(cA) * sup.error), Integral(cF * sub.value, cF * sub.error)


@dataclass(frozen=True)
class DerivativeCheck:
    r: float
    h: float
    dA_fd: float
    dA_rhs: float
    dF_fd: float
    dF_rhs: float

    @staticmethod
    def _rel(x, y, floor=1e-10):
        # both sides vanish on cone-like regions; compare absolutely there
        return abs(x - y) / max(abs(x), abs(y), floor)

    @property
    def residual_A(self):
        return self._rel(self.dA_fd, self.dA_rhs)

    @property
    def residual_F(self):
        return self._rel(self.dF_fd, self.dF_rhs)


def derivative_identity_check(field, r, rel_step=0.05, n_theta=128, n_nodes=16):
    """Centered differences of A and F against the integral formulas."""
    h = rel_step * r
    prof = monotone_profile(field, [r - h, r + h], n_theta, n_nodes)
    dA = (prof.A[1] - prof.A[0]) / (2 * h)
    dF = (prof.F[1] - prof.F[0]) / (2 * h)
    rA, rF = derivative_rhs(field, r, n_theta, n_nodes)
    return DerivativeCheck(r, h, dA, rA.value, dF, rF.value)


# ---------------------------------------------------------------------------
# independent oracle


def contour_level_area(field, s, r_top, nr=800, nphi=400):
    """A(s) from a marching-squares contour of b on a uniform (r, phi) grid.

    Used as an independent check of the ray-based level-set quadrature.
    """
    from skimage.measure import find_contours

    spec, n = field.spec, field.spec.n
    from .manifold import sphere_area

    r = np.linspace(1e-6, r_top, nr)
    phi = np.linspace(0.0, np.pi, nphi)
    R, P = np.meshgrid(r, phi, indexing="ij")
    B = field.values(R.ravel(), P.ravel()).b.reshape(R.shape)
    if not B[-1].min() > s:
        raise DomainError("scale exceeds grid: level set reaches r_top")
    total = 0.0
    for c in find_contours(B, s):
        rr = np.interp(c[:, 0], np.arange(nr), r)
        pp = np.interp(c[:, 1], np.arange(nphi), phi)
        if np.any(c[:, 0] >= nr - 1):
            raise DomainError("scale exceeds grid")
        v = field.values(rr, pp)
        f = spec.f(rr)
        dens = np.sqrt(v.grad2) ** 3 * sphere_area(n - 2) * (f * np.sin(pp)) ** (n - 2)
        rm, pm = 0.5 * (rr[1:] + rr[:-1]), 0.5 * (pp[1:] + pp[:-1])
        dl = np.hypot(np.diff(rr), spec.f(rm) * np.diff(pp))
        total += float(np.sum(0.5 * (dens[1:] + dens[:-1]) * dl))
    return total * s ** (1 - n)
