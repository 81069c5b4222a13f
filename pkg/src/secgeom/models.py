"""Model geometries: punctured disk, round sphere, sphere with one cusp.

Each model carries a chart (a subset of the plane), a frame weight w(z)
for the line bundle metric, and a volume density for the surface area
form.  Everything downstream (inner products, kernels, zero statistics)
consumes these three ingredients.

Normalization, fixed once and used everywhere in this package: chart
areas are planar Lebesgue measure dA = dx dy and the area form
convention is i dz ^ dzbar = 2 dA.  Consequences:

  - punctured-disk volume density:  2 / (|z|^2 * log^2 |z|^2)
  - round-sphere volume density:    2 / (1 + |z|^2)^2
  - curvature form of a weight w:   -(1/2) * Laplacian(log w) * dA
  - first Chern mass of a region:   area_L(region) / (2*pi)

The sphere-with-cusp model glues the exact cusp weight |log|z|^2| into a
spherical background weight with a C^2 radial blend.  The blend
interpolates the slope of log w in t = log|z| monotonically between the
two closed-form endpoint slopes, which keeps -(d/dt)^2 log w, and hence
the curvature, positive across the zone whenever the endpoint slopes
are ordered; positivity is still verified numerically, never assumed.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi

# finite-difference step factor for the blended model's curvature
FD_STEP_FACTOR = 1e-4


class DomainError(ValueError):
    """A chart point lies outside the model's domain (or at a puncture)."""


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the achieved error bound."""

    def __init__(self, message, achieved=math.inf):
        super().__init__(message)
        self.achieved = achieved


class ModelKind:
    PUNCTURED_DISK = "punctured_disk"
    SPHERE = "sphere"
    CUSPED_SPHERE = "cusped_sphere"


def _smoothstep(t):
    """C^2 quintic step: 0 at t<=0, 1 at t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@dataclass(frozen=True)
class _BlendCoeffs:
    """Closed-form data of the radial weight blend in t = log|z|."""
    rin: float
    rout: float
    t0: float
    t1: float
    width: float
    c0: float        # log-weight value at the inner seam
    m0: float        # log-weight t-slope at the inner seam
    dm: float        # slope change across the zone (negative when valid)
    g0: float        # normalized inner second derivative
    g1: float        # normalized outer second derivative
    alpha: int
    beta: int
    gamma: float
    log_scale: float  # matching constant of the outer spherical weight


@functools.lru_cache(maxsize=None)
def _blend_coeffs(n, rin, rout):
    """Coefficients of the slope-interpolating blend.

    In t = log r the cusp log-weight is log(-2t) and the spherical one
    is L - n*log(1+e^(2t)).  The blend prescribes the t-slope of log w
    on [log rin, log rout] as m0 + dm*G(tau) with G increasing from 0
    to 1; its derivative G' is a sum of three nonnegative pieces whose
    endpoint values reproduce the closed-form second derivatives, so
    the glued weight is C^2 and its zone curvature has the sign of -dm.
    dm < 0 is exactly the mass-balance condition
    n*rout^2/(1+rout^2) > 1/u(rin); when it fails, G' dips negative and
    the verification grid reports the nonpositive curvature honestly.
    """
    t0 = math.log(rin)
    t1 = math.log(rout)
    width = t1 - t0
    c0 = math.log(-2.0 * t0)
    m0 = 1.0 / t0
    s1 = -2.0 * n * rout * rout / (1.0 + rout * rout)
    dm = s1 - m0
    cpp = -1.0 / (t0 * t0)
    spp = -4.0 * n * rout * rout / (1.0 + rout * rout) ** 2
    g0 = cpp * width / dm if dm != 0.0 else 0.0
    g1 = spp * width / dm if dm != 0.0 else 0.0
    alpha = 2 + max(0, math.ceil(2.0 * abs(g0)))
    beta = 2 + max(0, math.ceil(2.0 * abs(g1)))
    # unit total increment of G fixes the weight of the interior bump;
    # the edge masses are each below 1/2 by the exponent choice, so
    # gamma > 0 whenever g0, g1 >= 0
    gamma = 1.0 - g0 / (alpha + 1.0) - g1 / (beta + 1.0)
    int_g = (g0 / (alpha + 2.0)
             + g1 / ((beta + 1.0) * (beta + 2.0)) + 0.5 * gamma)
    value_out = c0 + m0 * width + dm * width * int_g
    log_scale = value_out + n * math.log1p(rout * rout)
    return _BlendCoeffs(rin=rin, rout=rout, t0=t0, t1=t1, width=width,
                        c0=c0, m0=m0, dm=dm, g0=g0, g1=g1, alpha=alpha,
                        beta=beta, gamma=gamma, log_scale=log_scale)


def _blend_shape(b, tau):
    """G(tau): the interpolation shape, increasing from 0 to 1."""
    om = 1.0 - tau
    q = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
    return (b.g0 / (b.alpha + 1.0) * (1.0 - om ** (b.alpha + 1))
            + b.g1 / (b.beta + 1.0) * tau ** (b.beta + 1)
            + b.gamma * q)


def _blend_shape_deriv(b, tau):
    """G'(tau) >= 0 on [0, 1] for a valid blend."""
    om = 1.0 - tau
    return (b.g0 * om ** b.alpha + b.g1 * tau ** b.beta
            + b.gamma * 30.0 * tau * tau * om * om)


def _blend_shape_int(b, tau):
    """Integral of G from 0 to tau."""
    om = 1.0 - tau
    iq = tau ** 4 * (2.5 + tau * (-3.0 + tau))
    return (b.g0 / (b.alpha + 1.0)
            * (tau - (1.0 - om ** (b.alpha + 2)) / (b.alpha + 2.0))
            + b.g1 * tau ** (b.beta + 2) / ((b.beta + 1.0) * (b.beta + 2.0))
            + b.gamma * iq)


def blend_log_scale(n, rin, rout):
    """Matching constant L of the outer weight e^L * (1+|z|^2)^(-n)."""
    return _blend_coeffs(n, float(rin), float(rout)).log_scale


@dataclass(frozen=True)
class ModelSpace:
    """Immutable geometric model; all operations on it are pure.

    epsilon0 is the verified lower bound for the curvature ratio
    (grid-verified for the blended model, exact for the others); it is
    reported, not certified between grid points.
    """
    kind: str
    bundle_degree: int = 1
    punctures: tuple = ()
    blend_radii: tuple = None
    epsilon0: float = 1.0
    # matching constant for the blended background weight (cusped only)
    log_bg_scale: float = field(default=0.0, repr=False)

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "bundle_degree": self.bundle_degree,
             "punctures": [[z.real, z.imag] for z in self.punctures],
             "epsilon0": self.epsilon0}
        if self.blend_radii is not None:
            d["blend_radii"] = list(self.blend_radii)
        return d


def punctured_disk() -> ModelSpace:
    """Unit disk minus the origin with the cusp metric; curvature ratio
    is identically 1, so epsilon0 = 1 exactly."""
    return ModelSpace(kind=ModelKind.PUNCTURED_DISK, bundle_degree=1,
                      punctures=(0.0 + 0.0j,), epsilon0=1.0)


def fubini_study_sphere(n: int) -> ModelSpace:
    """Round sphere in one stereographic chart, bundle degree n >= 1.
    Curvature ratio is the constant n, so epsilon0 = n exactly."""
    if n < 1:
        raise ValueError("bundle degree must be >= 1")
    return ModelSpace(kind=ModelKind.SPHERE, bundle_degree=n,
                      punctures=(), epsilon0=float(n))


def cusped_sphere(n: int, blend_radii=(0.05, 0.6)) -> ModelSpace:
    """Sphere with a single cusp at the origin.

    The frame weight equals |log|z|^2| inside blend_radii[0], the scaled
    spherical weight outside blend_radii[1], and a C^2 slope-monotone
    blend between.  epsilon0 is set to the minimum curvature ratio found
    on a construction-time verification grid (it may come out
    nonpositive for mass-starved blends, e.g. rout too small for the
    degree; verify_conditions then reports the failure).
    """
    if n < 1:
        raise ValueError("bundle degree must be >= 1")
    rin, rout = blend_radii
    if not (0.0 < rin < rout < 1.0):
        raise ValueError("blend radii must satisfy 0 < rin < rout < 1")
    coeffs = _blend_coeffs(n, float(rin), float(rout))
    model = ModelSpace(kind=ModelKind.CUSPED_SPHERE, bundle_degree=n,
                       punctures=(0.0 + 0.0j,),
                       blend_radii=(float(rin), float(rout)),
                       epsilon0=1.0, log_bg_scale=coeffs.log_scale)
    eps = _grid_min_curvature(model)
    # keep a 5% margin below the grid minimum so that verification on a
    # differently spaced grid cannot land under the reported bound
    object.__setattr__(model, "epsilon0", 0.95 * eps if eps > 0.0 else eps)
    return model


def _grid_min_curvature(model, n_r=96, n_t=8):
    rin, rout = model.blend_radii
    # radii concentrated around the blend zone plus cusp and far field
    radii = np.concatenate([
        np.exp(np.linspace(math.log(rin * 1e-3), math.log(rin), 16)),
        np.linspace(rin, rout, n_r)[1:-1],
        np.linspace(rout, 4.0, 24),
    ])
    thetas = np.linspace(0.0, TWO_PI, n_t, endpoint=False)
    best = math.inf
    for r in radii:
        z = r * np.exp(1j * thetas)
        a = curvature_ratio(model, z)
        best = min(best, float(np.min(a)))
    return best


# ---------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class ChartDisk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("need radius > 0")

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def boundary_distance(self, z):
        return np.abs(np.abs(np.asarray(z) - self.center) - self.radius)


@dataclass(frozen=True)
class ChartAnnulus:
    """Annulus r_inner < |z| < r_outer centered at the origin."""
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0.0 <= self.r_inner < self.r_outer):
            raise ValueError("need 0 <= r_inner < r_outer")

    def contains(self, z):
        r = np.abs(np.asarray(z))
        return (r > self.r_inner) & (r < self.r_outer)

    def boundary_distance(self, z):
        r = np.abs(np.asarray(z))
        return np.minimum(np.abs(r - self.r_inner),
                          np.abs(r - self.r_outer))


@dataclass(frozen=True)
class SphericalCap:
    """Geodesic cap on the sphere model: round-sphere angle < alpha."""
    center: complex
    alpha: float

    def _cos_angle(self, z):
        z = np.asarray(z)
        c = self.center
        t = np.abs(z - c) ** 2 / ((1.0 + np.abs(z) ** 2)
                                  * (1.0 + abs(c) ** 2))
        return 1.0 - 2.0 * t

    def contains(self, z):
        return self._cos_angle(z) > math.cos(self.alpha)

    def boundary_distance(self, z):
        # angular distance to the rim, adequate for boundary flags
        ang = np.arccos(np.clip(self._cos_angle(z), -1.0, 1.0))
        return np.abs(ang - self.alpha)


@dataclass(frozen=True)
class ChartRectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, z):
        z = np.asarray(z)
        return ((z.real > self.x0) & (z.real < self.x1)
                & (z.imag > self.y0) & (z.imag < self.y1))

    def boundary_distance(self, z):
        z = np.asarray(z)
        dx = np.minimum(np.abs(z.real - self.x0), np.abs(z.real - self.x1))
        dy = np.minimum(np.abs(z.imag - self.y0), np.abs(z.imag - self.y1))
        inside = self.contains(z)
        return np.where(inside, np.minimum(dx, dy), np.hypot(
            np.maximum(np.maximum(self.x0 - z.real, z.real - self.x1), 0.0),
            np.maximum(np.maximum(self.y0 - z.imag, z.imag - self.y1), 0.0)))


# ---------------------------------------------------------------------------
# pointwise geometric quantities

def _check_domain(model, z, allow_punctures=False):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if model.kind == ModelKind.PUNCTURED_DISK and np.any(r >= 1.0):
        raise DomainError("point on or outside the unit circle")
    if not allow_punctures and model.punctures:
        if np.any(r == 0.0):
            raise DomainError("point at a puncture")
    return z, r


def log_frame_weight(model, z):
    """log w(z) for the p = 1 frame weight; vectorized over z."""
    z, r = _check_domain(model, z)
    if model.kind == ModelKind.PUNCTURED_DISK:
        u = -2.0 * np.log(r)
        return np.log(u)
    if model.kind == ModelKind.SPHERE:
        return -model.bundle_degree * np.log1p(r * r)
    n = model.bundle_degree
    b = _blend_coeffs(n, *model.blend_radii)
    shape = r.shape
    rf = np.asarray(r, dtype=float).ravel()
    out = np.empty_like(rf)
    cusp = rf <= b.rin
    far = rf >= b.rout
    mid = ~(cusp | far)
    out[cusp] = np.log(-2.0 * np.log(rf[cusp]))
    out[far] = b.log_scale - n * np.log1p(rf[far] ** 2)
    if np.any(mid):
        t = np.log(rf[mid])
        tau = (t - b.t0) / b.width
        out[mid] = (b.c0 + b.m0 * (t - b.t0)
                    + b.dm * b.width * _blend_shape_int(b, tau))
    return out.reshape(shape)


def bundle_weight(model, z, p=1):
    """|1^{tensor p}|^2 at z, i.e. w(z)^p.

    Computed as w(z, 1)**p so the power identity holds exactly.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    w1 = np.exp(log_frame_weight(model, z))
    return w1 ** p


def volume_density(model, z):
    """Density of the area form with respect to Lebesgue dA."""
    z, r = _check_domain(model, z)
    if model.kind == ModelKind.PUNCTURED_DISK:
        u = -2.0 * np.log(r)
        return 2.0 / (r * r * u * u)
    if model.kind == ModelKind.SPHERE:
        return 2.0 / (1.0 + r * r) ** 2
    rin, rout = model.blend_radii
    chi = 1.0 - _smoothstep((r - rin) / (rout - rin))
    with np.errstate(divide="ignore"):
        u = -2.0 * np.log(r)
        cusp = np.where(chi > 0.0, 2.0 / (r * r * u * u), 0.0)
    return chi * cusp + (1.0 - chi) * 2.0 / (1.0 + r * r) ** 2


def curvature_ratio(model, z):
    """a(z): curvature density of the weight over the volume density.

    Exact closed forms for the disk and the sphere.  For the blended
    model the weight is the exact cusp weight inside the blend zone
    (ratio 1) and the exact spherical weight outside it (ratio n); in
    the open blend zone the radial construction gives the Laplacian of
    log w in closed form, -G'(tau) * dm/width * |z|^-2, which
    verify_conditions cross-checks against a finite-difference stencil.
    """
    z, r = _check_domain(model, z)
    if model.kind == ModelKind.PUNCTURED_DISK:
        return np.ones_like(r)
    if model.kind == ModelKind.SPHERE:
        return np.full_like(r, float(model.bundle_degree))
    rin, rout = model.blend_radii
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(z)
    r = np.atleast_1d(r)
    out = np.where(r >= rout, float(model.bundle_degree), 1.0)
    mid = (r > rin) & (r < rout)
    if np.any(mid):
        b = _blend_coeffs(model.bundle_degree, rin, rout)
        t = np.log(r[mid])
        tau = (t - b.t0) / b.width
        curv = -0.5 * np.exp(-2.0 * t) * b.dm * _blend_shape_deriv(
            b, tau) / b.width
        out[mid] = curv / volume_density(model, z[mid])
    return out[0] if scalar else out


def _fd_curvature_ratio(model, z):
    """Curvature ratio from a 5-point stencil on log w; independent of
    the closed-form zone derivative, used only for cross-checks."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    h = FD_STEP_FACTOR * np.abs(z)
    f0 = log_frame_weight(model, z)
    lap = (log_frame_weight(model, z + h)
           + log_frame_weight(model, z - h)
           + log_frame_weight(model, z + 1j * h)
           + log_frame_weight(model, z - 1j * h) - 4.0 * f0) / (h * h)
    return -0.5 * lap / volume_density(model, z)


# ---------------------------------------------------------------------------
# areas

def _radial_area_integrand(model, r):
    # a(r) * density(r) * 2*pi*r for scalar r
    a = curvature_ratio(model, np.array([r + 0.0j]))[0]
    f = volume_density(model, np.array([r + 0.0j]))[0]
    return a * f * TWO_PI * r


def _blend_zone_area(model, r_lo, r_hi):
    """area_L of an annulus inside the blend zone, via t = log r.

    The substitution absorbs the e^(-2t) growth of the curvature
    density toward the inner seam, leaving a bounded smooth integrand.
    """
    def g(t):
        r = math.exp(t)
        return _radial_area_integrand(model, r) * r

    val, err = integrate.quad(g, math.log(r_lo), math.log(r_hi), limit=200)
    return val, err


def _area_centered(model, r1, r2, rel_tol):
    """area_L of the annulus r1 < |z| < r2 (r1 may be 0)."""
    if model.kind == ModelKind.PUNCTURED_DISK:
        if r2 >= 1.0:
            raise DomainError("annulus touches the unit circle")
        # integrate in u = -log r^2; integrand 2*pi / u^2
        u2 = -2.0 * math.log(r2)
        u1 = math.inf if r1 == 0.0 else -2.0 * math.log(r1)
        val, err = integrate.quad(lambda u: TWO_PI / (u * u), u2, u1)
        _check_quad(val, err, rel_tol)
        return val
    if model.kind == ModelKind.SPHERE:
        n = model.bundle_degree
        val, err = integrate.quad(
            lambda r: n * 2.0 / (1.0 + r * r) ** 2 * TWO_PI * r, r1, r2)
        _check_quad(val, err, rel_tol)
        return val
    # cusped sphere: piecewise with the blend radii as panel edges
    rin, rout = model.blend_radii
    total = 0.0
    total_err = 0.0
    # cusp piece: exact ratio 1 inside rin, integrate in u
    lo = r1
    if lo < rin:
        hi = min(r2, rin)
        u_hi = -2.0 * math.log(lo) if lo > 0.0 else math.inf
        u_lo = -2.0 * math.log(hi)
        val, err = integrate.quad(lambda u: TWO_PI / (u * u), u_lo, u_hi)
        total += val
        total_err += err
        lo = hi
    if lo < r2 and lo < rout:
        hi = min(r2, rout)
        val, err = _blend_zone_area(model, lo, hi)
        total += val
        total_err += err
        lo = hi
    if lo < r2:
        n = model.bundle_degree
        val, err = integrate.quad(
            lambda r: n * 2.0 / (1.0 + r * r) ** 2 * TWO_PI * r, lo, r2)
        total += val
        total_err += err
    _check_quad(total, total_err, rel_tol)
    return total


def _check_quad(val, err, rel_tol):
    if err > max(abs(val), 1e-12) * rel_tol * 100.0:
        raise QuadratureError("radial quadrature did not converge",
                              achieved=err)


def area_L(model, region, rel_tol=1e-10):
    """Curvature-weighted area of a region: the integral of the
    curvature ratio against the area form.  Finite toward a cusp."""
    if isinstance(region, ChartAnnulus):
        return _area_centered(model, region.r_inner, region.r_outer, rel_tol)
    if isinstance(region, ChartDisk) and region.center == 0:
        return _area_centered(model, 0.0, region.radius, rel_tol)
    if isinstance(region, SphericalCap):
        if model.kind != ModelKind.SPHERE:
            raise DomainError("spherical caps only apply to the sphere")
        n = model.bundle_degree
        return n * math.pi * (1.0 - math.cos(region.alpha))
    from secgeom.quadrature import integrate_polar, integrate_cartesian, \
        AdaptiveError

    def g(z):
        return curvature_ratio(model, z) * volume_density(model, z)

    try:
        if isinstance(region, ChartDisk):
            _region_avoids_punctures(model, region)
            val, err = integrate_polar(g, (0.0, region.radius),
                                       center=region.center,
                                       abs_tol=rel_tol)
        elif isinstance(region, ChartRectangle):
            _region_avoids_punctures(model, region)
            val, err = integrate_cartesian(g, (region.x0, region.x1),
                                           (region.y0, region.y1),
                                           abs_tol=rel_tol)
        else:
            raise DomainError(f"unsupported region kind {type(region)}")
    except AdaptiveError as exc:
        raise QuadratureError("area quadrature budget exhausted",
                              achieved=exc.err_bound) from exc
    return val


def _region_avoids_punctures(model, region):
    for a in model.punctures:
        if np.any(region.contains(a)) or np.min(
                region.boundary_distance(a)) < 1e-12:
            raise DomainError("region closure touches a puncture")


def total_chern_mass(model, rel_tol=1e-9):
    """Degree of the bundle metric: area_L of the whole surface / 2*pi.

    Exact n for the sphere; for the cusped sphere the cusp and far
    pieces are closed-form and the blend zone is quadrature.
    """
    if model.kind == ModelKind.SPHERE:
        return float(model.bundle_degree)
    if model.kind == ModelKind.PUNCTURED_DISK:
        raise DomainError("the disk model has infinite chart area; "
                          "degree is only defined for the compact models")
    rin, rout = model.blend_radii
    n = model.bundle_degree
    # cusp piece (curvature ratio exactly 1 there): mass 1/u(rin)
    cusp = 1.0 / (-2.0 * math.log(rin))
    # far piece: exact spherical background
    far = n * (1.0 - rout * rout / (1.0 + rout * rout))
    blend, err = _blend_zone_area(model, rin, rout)
    _check_quad(blend, err, rel_tol)
    return cusp + far + blend / TWO_PI


# ---------------------------------------------------------------------------
# distance and condition verification

def local_distance(model, x, y, tol=1e-12):
    """Metric length of the straight chart segment from x to y.

    An upper bound for the true distance, asymptotically exact as
    |x - y| -> 0, which is the only regime the near-diagonal kernel
    checks rely on.
    """
    x = complex(x)
    y = complex(y)
    if x == y:
        return 0.0
    for a in model.punctures:
        # distance from the puncture to the segment
        seg = y - x
        t = np.clip(((a - x) / seg).real, 0.0, 1.0) if seg != 0 else 0.0
        if abs(x + t * seg - a) < 1e-12:
            raise DomainError("segment passes through a puncture")
    _check_domain(model, np.array([x, y]))

    def speed(t):
        z = x + t * np.asarray(y - x)
        f = volume_density(model, z)
        return np.sqrt(f) * abs(y - x)

    from secgeom.quadrature import gl_nodes
    val_prev = None
    for n_panels in (4, 8, 16, 32, 64, 128):
        nodes, weights = gl_nodes(0.0, 1.0, 16)
        total = 0.0
        for k in range(n_panels):
            a, b = k / n_panels, (k + 1) / n_panels
            t = a + (b - a) * nodes
            total += (b - a) * float(np.sum(weights * speed(t)))
        if val_prev is not None and abs(total - val_prev) <= tol * max(
                1.0, abs(total)):
            return total
        val_prev = total
    return val_prev


def verify_conditions(model, grid=None):
    """Curvature and cusp-equality verification over a grid.

    Returns a report dict with the grid minimum of the curvature ratio,
    the maximum deviation |ratio - 1| on the cusp zone, and pass flags.
    """
    grid = grid or {}
    n_r = grid.get("n_r", 80)
    n_t = grid.get("n_theta", 12)
    if model.kind == ModelKind.PUNCTURED_DISK:
        radii = np.exp(np.linspace(math.log(1e-8), math.log(0.95), n_r))
        cusp_zone = radii < 1.0
    elif model.kind == ModelKind.SPHERE:
        radii = np.linspace(1e-3, 6.0, n_r)
        cusp_zone = np.zeros_like(radii, dtype=bool)
    else:
        rin, rout = model.blend_radii
        radii = np.concatenate([
            np.exp(np.linspace(math.log(rin * 1e-4), math.log(rin), n_r // 3)),
            np.linspace(rin, rout, n_r // 3)[1:-1],
            np.linspace(rout, 6.0, n_r // 3),
        ])
        cusp_zone = radii <= rin
    thetas = np.linspace(0.0, TWO_PI, n_t, endpoint=False)
    zz = radii[:, None] * np.exp(1j * thetas[None, :])
    ratios = curvature_ratio(model, zz.ravel()).reshape(zz.shape)
    min_ratio = float(np.min(ratios))
    imin = np.unravel_index(np.argmin(ratios), ratios.shape)
    argmin_z = zz[imin]
    if model.kind == ModelKind.SPHERE:
        cusp_dev = None
        cusp_ok = True
    else:
        cusp_vals = ratios[cusp_zone, :]
        cusp_dev = float(np.max(np.abs(cusp_vals - 1.0)))
        cusp_ok = cusp_dev <= 1e-5
    blend_dev = None
    blend_ok = True
    if model.kind == ModelKind.CUSPED_SPHERE:
        # cross-check the closed-form zone curvature against a stencil
        rin, rout = model.blend_radii
        rm = np.exp(np.linspace(math.log(rin), math.log(rout), 19))[1:-1]
        zm = (rm[:, None] * np.exp(1j * thetas[None, :4])).ravel()
        blend_dev = float(np.max(np.abs(
            _fd_curvature_ratio(model, zm) - curvature_ratio(model, zm))))
        blend_ok = blend_dev <= 5e-3
    curv_ok = (min_ratio > 0.0) and (min_ratio >= model.epsilon0 - 1e-9)
    return {
        "kind": model.kind,
        "epsilon0": model.epsilon0,
        "min_curvature_ratio": min_ratio,
        "argmin": [argmin_z.real, argmin_z.imag],
        "cusp_max_deviation": cusp_dev,
        "blend_stencil_deviation": blend_dev,
        "n_grid_points": int(zz.size),
        "passes_curvature_bound": bool(curv_ok),
        "passes_cusp_equality": bool(cusp_ok),
        "passes_blend_consistency": bool(blend_ok),
        "passes": bool(curv_ok and cusp_ok and blend_ok),
    }
