"""Zero divisors of random sections and their integral pairings.

A section's zeros are the roots of its frame polynomial.  Root finding
is Aberth-Ehrlich with a companion-matrix fallback and Newton
refinement; multiplicities come from cluster detection (random sections
have simple roots almost surely, so clusters only fire on engineered
inputs, where they must be exact).

Two independent counting oracles are provided: root clusters filtered
by region membership, and the argument principle along region
boundaries.  Divisor pairings, the Poincare-Lelong residual, and the
cusp log-norm integral live here too.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from secgeom import models as geo
from secgeom.models import (ChartAnnulus, ChartDisk, ChartRectangle,
                            DomainError, ModelKind, TWO_PI)
from secgeom import quadrature as quadlib

CLUSTER_RADIUS = 1e-7      # times max(1, |root|)
RESIDUAL_TOL = 1e-8        # times the local coefficient scale
BOUNDARY_GUARD = 1e-9
CONTOUR_GUARD = 1e-6
WINDING_INTEGER_TOL = 1e-3


class DegenerateSectionError(ValueError):
    """All coefficients are exactly zero."""


class RootFindingError(RuntimeError):
    def __init__(self, message, worst_residual=math.inf):
        super().__init__(message)
        self.worst_residual = worst_residual


class ContourError(RuntimeError):
    """Contour too close to a root, or non-integer winding."""


class BoundaryRootWarning(UserWarning):
    """A root sits within the numerical guard band of a region boundary."""


@dataclass(frozen=True)
class ZeroSet:
    """Roots of a frame polynomial with multiplicities and residuals.

    degree is the frame polynomial degree (the basis's top exponent);
    order_at_infinity accounts for vanishing leading coefficients, so
    sum(multiplicities) + order_at_infinity == degree always.
    """
    locations: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray
    degree: int
    order_at_infinity: int

    @property
    def roots(self):
        return tuple(zip(self.locations.tolist(),
                         self.multiplicities.tolist()))

    @property
    def residual(self):
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0

    @property
    def degree_accounted(self):
        return int(np.sum(self.multiplicities)) + self.order_at_infinity

    @property
    def total_multiplicity(self):
        return int(np.sum(self.multiplicities))

    def to_csv(self):
        lines = ["re,im,multiplicity,residual"]
        for z, m, res in zip(self.locations, self.multiplicities,
                             self.residuals):
            lines.append(f"{float(z.real)!r},{float(z.imag)!r},"
                         f"{int(m)},{float(res)!r}")
        return "\n".join(lines) + "\n"


def _frame_poly(section):
    """Ascending coefficients with structural zeros stripped:
    (a, k_min, k_hi, scale).

    Only exact zeros are stripped.  Basis gaps stay exact under the
    diagonal frame transform, while a tiny nonzero coefficient can
    still carry a root at a modest radius (orthonormalizing diagonals
    span many orders of magnitude at high tensor power), so any
    magnitude-based trim would silently relocate true roots to 0.
    """
    a = section.monomial_coeffs
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise DegenerateSectionError("all-zero section")
    sig = np.nonzero(a)[0]
    return a, int(sig[0]), int(sig[-1]), scale


def _local_scale(scale, degree, z):
    return scale * np.maximum(1.0, np.abs(z)) ** degree


def _aberth(c, max_iter=120):
    """Simultaneous root iteration for ascending coefficients c.

    Returns (roots, converged).  c[0] and c[-1] must be nonzero.
    """
    m = len(c) - 1
    if m == 1:
        return np.array([-c[0] / c[1]]), True
    cp = npoly.polyder(c)
    # initial guesses between the inner and outer Cauchy bounds
    outer = 1.0 + float(np.max(np.abs(c[:-1]) / np.abs(c[-1])))
    inner = float(np.abs(c[0])) / (float(np.abs(c[0]))
                                   + float(np.max(np.abs(c[1:]))))
    radii = inner * (outer / inner) ** ((np.arange(m) + 0.5) / m)
    angles = TWO_PI * np.arange(m) * 0.3819660112501051 + 0.42
    z = radii * np.exp(1j * angles)
    for _ in range(max_iter):
        fz = npoly.polyval(z, c)
        fpz = npoly.polyval(z, cp)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = fz / fpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = np.sum(1.0 / diff, axis=1) - 1.0  # remove diagonal's 1/1
            corr = w / (1.0 - w * s)
        if not np.all(np.isfinite(corr)):
            return z, False
        z = z - corr
        if np.max(np.abs(corr)) <= 1e-14 * np.max(
                np.maximum(1.0, np.abs(z))):
            return z, True
    return z, False


def _newton_refine(c, roots, steps=3):
    cp = npoly.polyder(c)
    z = roots.astype(complex)
    for _ in range(steps):
        fz = npoly.polyval(z, c)
        fpz = npoly.polyval(z, cp)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(fpz) > 0, fz / fpz, 0.0)
        step = np.where(np.isfinite(step), step, 0.0)
        # damp runaway steps near multiple roots
        cap = 0.5 * np.maximum(1.0, np.abs(z))
        mag = np.abs(step)
        with np.errstate(divide="ignore", invalid="ignore"):
            damped = step * (cap / mag)
        step = np.where(mag > cap, damped, step)
        z = z - step
    return z


def _cluster(roots):
    """Greedy clustering with scale-invariant radius; returns
    (means, counts) sorted by (|z|, angle) for determinism."""
    order = np.lexsort((np.angle(roots), np.abs(roots)))
    roots = roots[order]
    means = []
    counts = []
    for z in roots:
        if means and abs(z - means[-1]) <= CLUSTER_RADIUS * max(
                1.0, abs(means[-1])):
            k = counts[-1]
            means[-1] = (means[-1] * k + z) / (k + 1)
            counts[-1] = k + 1
        else:
            means.append(z)
            counts.append(1)
    return np.array(means, dtype=complex), np.array(counts, dtype=int)


def find_zeros(section):
    """All roots of the frame polynomial, with multiplicities.

    Exactly-zero low-order coefficients become an exact root at 0;
    exactly-zero leading coefficients become order at infinity.
    """
    a, k_min, k_hi, scale = _frame_poly(section)
    degree = len(a) - 1
    c = a[k_min:k_hi + 1]
    locs = []
    mults = []
    if k_min > 0:
        locs.append(0.0 + 0.0j)
        mults.append(k_min)
    if k_hi > k_min:
        roots, ok = _aberth(c)
        if not ok:
            roots = npoly.polyroots(c)
        roots = _newton_refine(c, roots)
        res = np.abs(npoly.polyval(roots, c)) / _local_scale(
            scale, k_hi - k_min, roots)
        if np.max(res) > RESIDUAL_TOL:
            roots2 = _newton_refine(c, npoly.polyroots(c), steps=5)
            res2 = np.abs(npoly.polyval(roots2, c)) / _local_scale(
                scale, k_hi - k_min, roots2)
            if np.max(res2) > RESIDUAL_TOL:
                raise RootFindingError(
                    "root refinement failed to reach the residual "
                    "threshold", worst_residual=float(np.max(res2)))
            roots = roots2
        means, counts = _cluster(roots)
        locs.extend(means.tolist())
        mults.extend(counts.tolist())
    locations = np.array(locs, dtype=complex)
    multiplicities = np.array(mults, dtype=int)
    residuals = np.abs(npoly.polyval(locations, a)) / _local_scale(
        scale, k_hi, locations)
    return ZeroSet(locations=locations, multiplicities=multiplicities,
                   residuals=residuals, degree=degree,
                   order_at_infinity=degree - k_hi)


def count_zeros_in(zeroset, region):
    """Total multiplicity of roots strictly inside the region."""
    if len(zeroset.locations) == 0:
        return 0
    inside = region.contains(zeroset.locations)
    near = region.boundary_distance(zeroset.locations) < BOUNDARY_GUARD
    if np.any(near):
        warnings.warn("root within the boundary guard band; count may "
                      "be grid-sensitive", BoundaryRootWarning)
    return int(np.sum(zeroset.multiplicities[inside]))


# ---------------------------------------------------------------------------
# argument principle

def _circle_values(a, center, radius, n_points):
    theta = np.arange(n_points) * (TWO_PI / n_points)
    z = center + radius * np.exp(1j * theta)
    return z, npoly.polyval(z, a)


def _winding_from_values(values):
    """Winding numbers of closed sampled loops; raises on bad sampling.

    values has shape (n_loops, n_points).  Returns integer array.
    """
    if np.any(np.abs(values) == 0.0) or np.any(~np.isfinite(values)):
        raise ContourError("zero or non-finite value on contour")
    shifted = np.roll(values, 1, axis=1)
    d = np.angle(values * np.conj(shifted))
    if np.max(np.abs(d)) > 2.8:
        raise ContourError("phase step near pi: sampling too coarse or "
                           "root near contour")
    s = np.sum(d, axis=1) / TWO_PI
    w = np.rint(s)
    if np.max(np.abs(s - w)) > WINDING_INTEGER_TOL:
        raise ContourError(
            f"winding deviates from integer by {np.max(np.abs(s - w)):.2e}")
    return w.astype(int)


def winding_counts_batch(values):
    """Vectorized winding numbers with a validity mask (no raising).

    For Monte Carlo loops: invalid rows (coarse sampling or near-zero
    values) should be recomputed by the caller with a robust method.
    """
    shifted = np.roll(values, 1, axis=1)
    with np.errstate(invalid="ignore"):
        d = np.angle(values * np.conj(shifted))
    finite = (np.all(np.isfinite(d), axis=1)
              & (np.min(np.abs(values), axis=1) > 0.0))
    d = np.where(np.isfinite(d), d, 0.0)
    s = np.sum(d, axis=1) / TWO_PI
    w = np.rint(s)
    ok = (finite & (np.max(np.abs(d), axis=1) < 2.6)
          & (np.abs(s - w) < 1e-2))
    return w.astype(int), ok


def _check_contour_clearance(a, scale, degree, z, v):
    cp = npoly.polyder(a)
    vp = npoly.polyval(z, cp)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.abs(v) / np.abs(vp)
    dist = np.where(np.isfinite(dist), dist, np.inf)
    if np.min(dist) < CONTOUR_GUARD:
        raise ContourError(
            f"estimated root distance {np.min(dist):.2e} from contour "
            f"is inside the {CONTOUR_GUARD:.0e} guard")


def argument_principle_count(section, region, n_points=None):
    """Zeros inside the region by boundary winding number.

    Supports ChartDisk and ChartAnnulus regions (circle boundaries) and
    ChartRectangle (four segments).
    """
    a, _, k_hi, scale = _frame_poly(section)
    if n_points is None:
        n_points = max(256, 8 * k_hi)
    for attempt in range(3):
        m = n_points * (4 ** attempt)
        try:
            return _argument_principle_once(a, scale, k_hi, region, m)
        except ContourError:
            if attempt == 2:
                raise
    raise AssertionError("unreachable")


def _argument_principle_once(a, scale, degree, region, m):
    if isinstance(region, ChartDisk):
        z, v = _circle_values(a, region.center, region.radius, m)
        _check_contour_clearance(a, scale, degree, z, v)
        return int(_winding_from_values(v[None, :])[0])
    if isinstance(region, ChartAnnulus):
        z1, v1 = _circle_values(a, 0.0, region.r_outer, m)
        z2, v2 = _circle_values(a, 0.0, region.r_inner, m)
        _check_contour_clearance(a, scale, degree,
                                 np.concatenate([z1, z2]),
                                 np.concatenate([v1, v2]))
        w_out = _winding_from_values(v1[None, :])[0]
        w_in = _winding_from_values(v2[None, :])[0]
        return int(w_out - w_in)
    if isinstance(region, ChartRectangle):
        corners = np.array([region.x0 + 1j * region.y0,
                            region.x1 + 1j * region.y0,
                            region.x1 + 1j * region.y1,
                            region.x0 + 1j * region.y1])
        t = np.arange(m) / m
        pts = np.concatenate([c0 + t * (c1 - c0) for c0, c1 in
                              zip(corners, np.roll(corners, -1))])
        v = npoly.polyval(pts, a)
        _check_contour_clearance(a, scale, degree, pts, v)
        return int(_winding_from_values(v[None, :])[0])
    raise DomainError(f"unsupported contour region {type(region)}")


def vanishing_order(section, puncture=0.0 + 0.0j):
    """Order of vanishing at a puncture (chart point 0 in these models).

    Exact integer: the lowest exponent with a nonzero coefficient.
    """
    if puncture != 0:
        raise ValueError("punctures sit at the chart origin in all models")
    _, k_min, _, _ = _frame_poly(section)
    return k_min


# ---------------------------------------------------------------------------
# radial test functions

def _sstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _sstep_d1(t):
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * t * t * (t - 1.0) * (t - 1.0), 0.0)


def _sstep_d2(t):
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 60.0 * t * (2.0 * t - 1.0) * (t - 1.0), 0.0)


@dataclass(frozen=True)
class RadialTestFunction:
    """C^2 radial plateau: ramps up on [r_lo, r_lo+ramp], is constant
    amplitude on the plateau, ramps down on [r_hi-ramp, r_hi].

    constant_one means phi = amplitude everywhere (no support bounds);
    it is locally constant near punctures but not compactly supported.
    """
    r_lo: float = 0.0
    r_hi: float = 1.0
    ramp: float = 0.1
    amplitude: float = 1.0
    constant_one: bool = False

    def __post_init__(self):
        if self.constant_one:
            return
        if not (self.r_lo >= 0.0 and self.ramp > 0.0):
            raise ValueError("need r_lo >= 0 and ramp > 0")
        if self.r_hi - self.r_lo < 2.0 * self.ramp:
            raise ValueError("ramps overlap: need r_hi - r_lo >= 2*ramp")

    @property
    def locally_constant_near_punctures(self):
        # identically 0 (or identically amplitude) near r = 0
        return self.constant_one or self.r_lo > 0.0

    @property
    def compact_support(self):
        return not self.constant_one

    def profile(self, r):
        if self.constant_one:
            return np.full_like(np.asarray(r, dtype=float), self.amplitude)
        r = np.asarray(r, dtype=float)
        up = _sstep((r - self.r_lo) / self.ramp)
        down = _sstep((self.r_hi - r) / self.ramp)
        return self.amplitude * up * down

    def __call__(self, z):
        return self.profile(np.abs(np.asarray(z)))

    def laplacian(self, z):
        """Analytic radial Laplacian: phi'' + phi'/r."""
        r = np.abs(np.asarray(z, dtype=complex))
        if self.constant_one:
            return np.zeros_like(r)
        tu = (r - self.r_lo) / self.ramp
        td = (self.r_hi - r) / self.ramp
        up = _sstep(tu)
        dn = _sstep(td)
        up1 = _sstep_d1(tu) / self.ramp
        dn1 = -_sstep_d1(td) / self.ramp
        up2 = _sstep_d2(tu) / self.ramp ** 2
        dn2 = _sstep_d2(td) / self.ramp ** 2
        d1 = up1 * dn + up * dn1
        d2 = up2 * dn + 2.0 * up1 * dn1 + up * dn2
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = d2 + np.where(r > 0.0, d1 / r, 0.0)
        return self.amplitude * lap

    def scaled(self, alpha):
        return RadialTestFunction(self.r_lo, self.r_hi, self.ramp,
                                  self.amplitude * alpha, self.constant_one)


def constant_one():
    return RadialTestFunction(constant_one=True)


def pair_divisor(zeroset, phi, p):
    """(1/p) * sum over roots of multiplicity x phi(root)."""
    if len(zeroset.locations) == 0:
        return 0.0
    vals = phi(zeroset.locations)
    return float(np.sum(zeroset.multiplicities * vals)) / p


# ---------------------------------------------------------------------------
# Poincare-Lelong and log-norm integrals

LOG_FLOOR = -1e12  # clamp for quadrature nodes that hit a root exactly


def poincare_lelong_residual(section, phi, quad=None):
    """Residual of: sum m phi(root) = (1/2pi) int Lap(phi) log|s| dA
                                       + p int phi c1.

    phi must be compactly supported, away from punctures when the model
    has them.  The log integral runs only over the two ramp bands where
    Lap(phi) is supported, with adaptive refinement at roots.
    """
    from secgeom import hilbert
    quad = quad or {}
    basis = section.basis
    model = basis.model
    p = basis.p
    if not phi.compact_support:
        raise ValueError("phi must be compactly supported")
    if model.punctures and phi.r_lo <= 0.0:
        raise DomainError("phi support must avoid the puncture")
    zeroset = find_zeros(section)
    term_roots = float(np.sum(zeroset.multiplicities
                              * phi(zeroset.locations)))

    nodes, wts = quadlib.panel_nodes(
        _curvature_panels(model, phi.r_lo, phi.r_hi), 24)
    z_nodes = nodes.astype(complex)
    integrand = (phi.profile(nodes) * geo.curvature_ratio(model, z_nodes)
                 * geo.volume_density(model, z_nodes) * nodes)
    term_curv = p * float(np.sum(wts * np.real(integrand)))

    abs_tol = quad.get("abs_tol", 1e-6 * max(1.0, p))

    def g(z):
        vals = hilbert.evaluate_log_h_norm(basis, section.coeffs, z)
        vals = np.maximum(vals, LOG_FLOOR)
        return phi.laplacian(z) * vals

    total = 0.0
    for band in ((phi.r_lo, phi.r_lo + phi.ramp),
                 (phi.r_hi - phi.ramp, phi.r_hi)):
        val, _ = quadlib.integrate_polar(
            g, band, (0.0, TWO_PI), center=0.0, abs_tol=abs_tol / 2.0)
        total += val
    term_log = total / TWO_PI
    return abs(term_roots - (term_log + term_curv))


def _curvature_panels(model, r_lo, r_hi):
    edges = {r_lo, r_hi}
    if model.kind == ModelKind.CUSPED_SPHERE:
        for rb in model.blend_radii:
            if r_lo < rb < r_hi:
                edges.add(rb)
    base = sorted(edges)
    panels = []
    for a, b in zip(base[:-1], base[1:]):
        panels.extend(np.linspace(a, b, 9)[:-1])
    panels.append(r_hi)
    return np.array(panels)


def log_norm_integral(section, region, abs_tol=1e-6):
    """Integral of |log |s|_{h^p}| against the area form over a region.

    Regions touching a puncture are rejected: the integrand is not
    integrable toward a cusp (its primitive diverges), which is exactly
    what nested-annuli experiments document.
    """
    from secgeom import hilbert
    basis = section.basis
    model = basis.model
    if not isinstance(region, (ChartAnnulus, ChartDisk)):
        raise DomainError("log-norm integral supports disks and annuli")
    if isinstance(region, ChartDisk):
        if model.punctures and (abs(region.center) <= region.radius):
            raise DomainError(
                "region touches the puncture; the cusp log-norm integral "
                "diverges")
        r_lo, r_hi = 0.0, region.radius
        center = region.center
    else:
        if region.r_inner <= 0.0 and model.punctures:
            raise DomainError(
                "region touches the puncture; the cusp log-norm integral "
                "diverges")
        r_lo, r_hi = region.r_inner, region.r_outer
        center = 0.0
    in_cusp_zone = (model.kind == ModelKind.PUNCTURED_DISK
                    or (model.kind == ModelKind.CUSPED_SPHERE
                        and r_hi <= model.blend_radii[0]))
    if in_cusp_zone and center == 0.0 and r_lo > 0.0:
        # u = -log r^2 substitution: area form becomes du dtheta / u^2,
        # uniformly resolvable however deep toward the cusp
        u_hi = -2.0 * math.log(r_lo)
        u_lo = -2.0 * math.log(min(r_hi, 1.0 - 1e-12))

        def f(u, theta):
            z = np.exp(-0.5 * u) * np.exp(1j * theta)
            vals = hilbert.evaluate_log_h_norm(basis, section.coeffs, z)
            return np.abs(np.maximum(vals, LOG_FLOOR)) / (u * u)

        val, _ = quadlib.adaptive_cells(f, (u_lo, u_hi), (0.0, TWO_PI),
                                        abs_tol=abs_tol)
        return val

    def g(z):
        vals = hilbert.evaluate_log_h_norm(basis, section.coeffs, z)
        dens = geo.volume_density(model, z)
        return np.abs(np.maximum(vals, LOG_FLOOR)) * dens

    val, _ = quadlib.integrate_polar(g, (r_lo, r_hi), (0.0, TWO_PI),
                                     center=center, abs_tol=abs_tol)
    return val
