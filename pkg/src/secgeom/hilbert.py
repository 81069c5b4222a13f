"""Orthonormal bases of the finite L2 holomorphic section spaces.

A degree-p section in the global frame is a polynomial (a truncated
power series for the disk model, which is infinite-dimensional before
truncation).  The inner product integrates |f|^2 w^p against the area
form.  All three models are rotation invariant, so monomials are
orthogonal and the Gram matrix is diagonal; the diagonal is computed
(closed forms for disk and sphere, radial quadrature for the blended
model) and can be verified against full 2-D quadrature on demand.

Kernel evaluations switch to log-domain summation at p >= LOG_DOMAIN_P
to avoid overflow in the monomial norms.
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from secgeom import models as geo
from secgeom.models import DomainError, ModelKind, QuadratureError, TWO_PI
from secgeom import quadrature as quadlib

LOG_DOMAIN_P = 64


class ConditioningError(RuntimeError):
    """Gram matrix too ill-conditioned to orthonormalize."""


class TruncationError(RuntimeError):
    """Requested evaluation where the truncation tail is not controlled."""


# ---------------------------------------------------------------------------
# norms

def _disk_log_sq_norm(p, k):
    """log of ||z^k||^2 for the disk model: 2*pi*(p-2)!/k^(p-1)."""
    return math.log(TWO_PI) + gammaln(p - 1) - (p - 1) * np.log(k)


def _sphere_log_sq_norm(p, n, k):
    """log of ||z^k||^2 on the sphere: 2*pi*k!(np-k)!/(np+1)!."""
    d = n * p
    return (math.log(TWO_PI) + gammaln(k + 1.0) + gammaln(d - k + 1.0)
            - gammaln(d + 2.0))


def disk_norm_quadrature(p, k):
    """Independent radial quadrature of the disk monomial norm.

    Integrates exp(-k*u) * u^(p-2) over u in (0, inf) times 2*pi, with
    the integrand written directly in the substitution variable.
    """
    val, err = integrate.quad(
        lambda u: math.exp(-k * u + (p - 2) * math.log(u)), 0.0, np.inf,
        limit=200)
    return TWO_PI * val, TWO_PI * err


def _cusped_log_sq_norm(model, p, k):
    """Radial quadrature of ||z^k||^2 for the blended model.

    Piecewise: the cusp piece is an exact incomplete-gamma tail, the
    blend zone is panel Gauss-Legendre on a scaled integrand, and the
    spherical far zone is polynomial after the rational substitution.
    """
    from scipy.special import gammaincc
    rin, rout = model.blend_radii
    n = model.bundle_degree
    u_in = -2.0 * math.log(rin)
    # piece 1: r in (0, rin]; integrand exp(-k u) u^(p-2) du
    # = Gamma(p-1) * k^-(p-1) * Q(p-1, k*u_in)  (upper regularized)
    q = gammaincc(p - 1, k * u_in)
    log_p1 = (gammaln(p - 1) - (p - 1) * math.log(k) + math.log(q)
              if q > 0.0 else -math.inf)

    # piece 2: blend zone, quadrature on log-integrand minus its max;
    # panel edges align with the blend radii where smoothness drops
    r_nodes, r_w = quadlib.panel_nodes(
        np.linspace(rin, rout, 33), 24)
    z = r_nodes.astype(complex)
    log_int = (2.0 * k * np.log(r_nodes)
               + p * geo.log_frame_weight(model, z)
               + np.log(np.real(geo.volume_density(model, z)))
               + np.log(r_nodes))
    m = float(np.max(log_int))
    log_p2 = m + math.log(float(np.sum(r_w * np.exp(log_int - m))))

    # piece 3: spherical zone via v = r^2/(1+r^2), where the density
    # and jacobian collapse to dv; integrand v^k (1-v)^(np-k) * B^p
    # is polynomial, so GL is exact
    v_out = rout * rout / (1.0 + rout * rout)
    v_nodes, v_w = quadlib.gl_nodes(v_out, 1.0, n * p + 8)
    log_int3 = (k * np.log(v_nodes) + (n * p - k) * np.log1p(-v_nodes)
                + p * model.log_bg_scale)
    m3 = float(np.max(log_int3))
    log_p3 = m3 + math.log(float(np.sum(v_w * np.exp(log_int3 - m3))))

    return math.log(TWO_PI) + logsumexp([log_p1, log_p2, log_p3])


def _disk_tail_bound(p, K, r_work):
    """Upper bound for the omitted kernel-diagonal mass sum_{k>K} of
    |z^k|^2 w^p / ||z^k||^2 for |z| <= r_work, plus the kernel floor.

    Terms increase in r up to the per-term peak u = p/k; for k > K >=
    p / u_work every term is increasing on the region, so the supremum
    sits at r_work and the tail is a convergent explicit sum.
    """
    u_work = -2.0 * math.log(r_work)
    if K < p / u_work:
        raise ValueError("truncation too small for the working radius")
    log_terms = []
    k = K + 1
    log_w = p * math.log(u_work)
    while True:
        lt = -k * u_work + log_w - _disk_log_sq_norm(p, k)
        log_terms.append(lt)
        if lt < -80.0 + log_terms[0] or k > K + 20000:
            break
        k += 1
    tail = float(np.exp(logsumexp(np.array(log_terms))))
    return tail


# ---------------------------------------------------------------------------
# basis

@dataclass(frozen=True)
class SectionBasis:
    """Immutable orthonormal basis in monomial-frame coordinates.

    transform is lower triangular with positive diagonal; for the
    rotation-invariant models here the Gram matrix is diagonal, so the
    transform is the diagonal of inverse square-root norms and the
    entrywise rescaling is exact (no triangular solve is involved, so
    no conditioning loss).
    """
    model: geo.ModelSpace
    p: int
    exponents: np.ndarray
    log_sq_norms: np.ndarray
    truncated: bool
    truncation_tail: dict | None

    @property
    def d_p(self):
        return len(self.exponents)

    @cached_property
    def transform(self):
        return np.diag(np.exp(-0.5 * self.log_sq_norms))

    @cached_property
    def _diag(self):
        return np.exp(-0.5 * self.log_sq_norms)

    @property
    def max_exponent(self):
        return int(self.exponents[-1])

    def monomial_coeffs(self, coeffs):
        """Ascending monomial coefficient array of sum_j coeffs_j f_j."""
        coeffs = np.asarray(coeffs)
        if coeffs.shape[-1] != self.d_p:
            raise ValueError(
                f"coefficient vector has length {coeffs.shape[-1]}, "
                f"basis dimension is {self.d_p}")
        out_shape = coeffs.shape[:-1] + (self.max_exponent + 1,)
        out = np.zeros(out_shape, dtype=complex)
        out[..., self.exponents] = coeffs * self._diag
        return out


def build_basis(model, p, truncation=None, working_radius=0.75):
    """Build the orthonormal degree-p basis.

    The disk model requires a truncation size and records an analytic
    bound for the omitted kernel mass on |z| <= working_radius.  Closed
    form norms are cross-checked against quadrature at build time.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}; degree-1 norms "
                         "diverge at the cusp")
    n = model.bundle_degree
    if model.kind == ModelKind.PUNCTURED_DISK:
        if truncation is None:
            raise ValueError("the disk model requires a truncation size")
        K = int(truncation)
        exponents = np.arange(1, K + 1)
        lsn = _disk_log_sq_norm(p, exponents.astype(float))
        # build-time spot check of the closed forms against quadrature
        for k in (1, max(1, K // 2), K):
            if p <= 24:  # quadrature comparison meaningful in this range
                qval, qerr = disk_norm_quadrature(p, k)
                closed = math.exp(_disk_log_sq_norm(p, k))
                if abs(qval - closed) > 1e-8 * closed + 10.0 * qerr:
                    raise QuadratureError(
                        f"disk norm spot check failed at p={p}, k={k}",
                        achieved=abs(qval - closed) / closed)
        tail = _disk_tail_bound(p, K, working_radius)
        meta = {"working_radius": working_radius, "tail_bound": tail}
        basis = SectionBasis(model, p, exponents, lsn, True, meta)
    elif model.kind == ModelKind.SPHERE:
        if truncation is not None:
            raise ValueError("sphere bases are finite; no truncation")
        exponents = np.arange(0, n * p + 1)
        lsn = _sphere_log_sq_norm(p, n, exponents.astype(float))
        basis = SectionBasis(model, p, exponents, lsn, False, None)
    elif model.kind == ModelKind.CUSPED_SPHERE:
        if truncation is not None:
            raise ValueError("cusped-sphere bases are finite; no truncation")
        exponents = np.arange(1, n * p + 1)
        lsn = np.array([_cusped_log_sq_norm(model, p, int(k))
                        for k in exponents])
        basis = SectionBasis(model, p, exponents, lsn, False, None)
    else:
        raise ValueError(f"unknown model kind {model.kind}")
    if not np.all(np.isfinite(basis.log_sq_norms)):
        raise ConditioningError(
            f"non-finite monomial norms at p={p}, n={n}")
    return basis


def dimension_check(basis):
    """Compare the basis cardinality with p*deg + chi.

    deg is the total curvature mass over 2*pi (quadrature for the
    blended model, exact for the sphere); chi counts the punctures off
    the sphere.  The discrete slope d_{p+1} - d_p always equals deg for
    these models; the absolute formula is reported with an honest match
    flag (it misses by one on the compact control sphere, whose section
    count is the classical np + 1).
    """
    if basis.truncated:
        raise ValueError("dimension check is unsupported for truncated bases")
    model = basis.model
    deg = geo.total_chern_mass(model)
    chi = 2 - len(model.punctures)
    formula = basis.p * deg + chi
    return {
        "d_p": basis.d_p,
        "deg_h": deg,
        "chi": chi,
        "formula": formula,
        "match": bool(abs(basis.d_p - formula) < 0.5),
    }


# ---------------------------------------------------------------------------
# sections and evaluation

@dataclass(frozen=True)
class RandomSection:
    """A coefficient vector bound to a basis; evaluable, root-findable."""
    basis: SectionBasis
    coeffs: np.ndarray

    @cached_property
    def monomial_coeffs(self):
        return self.basis.monomial_coeffs(self.coeffs)

    @cached_property
    def coeff_scale(self):
        return float(np.max(np.abs(self.monomial_coeffs)))

    def frame_value(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex),
                                                self.monomial_coeffs)

    def log_h_norm(self, z):
        return evaluate_log_h_norm(self.basis, self.coeffs, z)


def evaluate_section(basis, coeffs, z):
    """Frame value and pointwise h^p-norm of sum_j coeffs_j f_j at z."""
    z_arr, _ = geo._check_domain(basis.model, z)
    a = basis.monomial_coeffs(coeffs)
    value = np.polynomial.polynomial.polyval(z_arr, a)
    log_w = geo.log_frame_weight(basis.model, z_arr)
    h_norm = np.abs(value) * np.exp(0.5 * basis.p * log_w)
    return value, h_norm


def evaluate_log_h_norm(basis, coeffs, z):
    """log |s(z)|_{h^p}, stable near punctures and for large p.

    Factors out the lowest nonvanishing monomial so the value is exact
    even where individual powers of z underflow.
    """
    z_arr, _ = geo._check_domain(basis.model, z)
    a = basis.monomial_coeffs(coeffs)
    nz = np.nonzero(np.abs(a) > 0.0)[0]
    if len(nz) == 0:
        raise ValueError("all-zero section")
    k_min = int(nz[0])
    scale = float(np.max(np.abs(a)))
    ahat = a[k_min:] / scale
    with np.errstate(divide="ignore", under="ignore"):
        rest = np.polynomial.polynomial.polyval(z_arr, ahat)
        base = k_min * np.log(np.abs(z_arr)) if k_min > 0 else 0.0
        log_f = math.log(scale) + base + np.log(np.abs(rest))
    log_w = geo.log_frame_weight(basis.model, z_arr)
    return log_f + 0.5 * basis.p * log_w


# ---------------------------------------------------------------------------
# kernels

@dataclass(frozen=True)
class KernelValue:
    raw: complex
    weighted_norm: float


def _check_tail(basis, r, tol=1e-8):
    if not basis.truncated:
        return
    meta = basis.truncation_tail
    if np.any(np.asarray(r) > meta["working_radius"]):
        raise TruncationError(
            "evaluation outside the tail-controlled working radius")
    if meta["tail_bound"] > tol:
        raise TruncationError(
            f"truncation tail {meta['tail_bound']:.2e} exceeds {tol:.0e};"
            " rebuild with a larger truncation")


def bergman_density(basis, x):
    """Kernel diagonal B_p(x, x) = sum_j |f_j(x)|^2 w(x)^p."""
    x_arr, r = geo._check_domain(basis.model, x)
    _check_tail(basis, r)
    k = basis.exponents.astype(float)
    log_w = geo.log_frame_weight(basis.model, x_arr)
    with np.errstate(divide="ignore"):
        log_r2 = 2.0 * np.log(np.abs(x_arr))
    with np.errstate(invalid="ignore"):
        lt = np.multiply.outer(log_r2, k)
    lt = np.where(k == 0.0, 0.0, lt)  # 0*log(0) := 0 for the constant term
    log_terms = (-basis.log_sq_norms + lt
                 + basis.p * np.asarray(log_w)[..., None])
    if basis.p >= LOG_DOMAIN_P:
        return np.exp(logsumexp(log_terms, axis=-1))
    with np.errstate(under="ignore"):
        return np.sum(np.exp(log_terms), axis=-1)


def _log_weighted_kernel(basis, x, y):
    """log |B_p(x, y)| in the pointwise metric norm, plus the raw value.

    Diagonal transform makes the raw kernel a polynomial in x*conj(y);
    summing scaled exponentials keeps it finite for any p.
    """
    x_arr, rx = geo._check_domain(basis.model, x)
    y_arr, ry = geo._check_domain(basis.model, y)
    _check_tail(basis, np.maximum(rx, ry))
    k = basis.exponents.astype(float)
    xi = x_arr * np.conj(y_arr)
    with np.errstate(divide="ignore"):
        log_mod = np.log(np.abs(xi))
    phase = np.angle(xi)
    with np.errstate(invalid="ignore"):
        lt = np.multiply.outer(log_mod, k)
    lt = np.where(k == 0.0, 0.0, lt)
    log_terms = -basis.log_sq_norms + lt
    m = np.max(log_terms, axis=-1, keepdims=True)
    with np.errstate(under="ignore"):
        scaled = np.sum(np.exp(log_terms - m)
                        * np.exp(1j * np.multiply.outer(phase, k)), axis=-1)
    m = np.squeeze(m, axis=-1)
    log_wx = geo.log_frame_weight(basis.model, x_arr)
    log_wy = geo.log_frame_weight(basis.model, y_arr)
    with np.errstate(divide="ignore"):
        log_weighted = (m + np.log(np.abs(scaled))
                        + 0.5 * basis.p * (log_wx + log_wy))
    return log_weighted, scaled, m


def bergman_kernel(basis, x, y):
    """Raw (frame) kernel value and its pointwise metric norm."""
    log_weighted, scaled, m = _log_weighted_kernel(basis, x, y)
    if basis.p >= LOG_DOMAIN_P:
        with np.errstate(over="ignore"):
            raw = scaled * np.exp(m)
    else:
        raw = scaled * np.exp(m)
    return KernelValue(raw=complex(raw) if np.isscalar(m) or m.ndim == 0
                       else raw,
                       weighted_norm=float(np.exp(log_weighted))
                       if np.ndim(log_weighted) == 0
                       else np.exp(log_weighted))


def normalized_kernel(basis, x, y):
    """Two-point kernel correlation in [0, 1]; equals 1 on the diagonal."""
    log_num, _, _ = _log_weighted_kernel(basis, x, y)
    log_bx = np.log(bergman_density(basis, x))
    log_by = np.log(bergman_density(basis, y))
    val = np.exp(log_num - 0.5 * (log_bx + log_by))
    return float(val) if np.ndim(val) == 0 else val


def near_diagonal_report(basis, x, direction, radii, b=4.0):
    """Table comparing the normalized kernel with the Gaussian falloff
    exp(-a(x) p dist^2 / 4) along a chart ray from x.

    Rows outside the near-diagonal window dist <= b*sqrt(log p / p) are
    kept but flagged as out of regime.
    """
    model = basis.model
    p = basis.p
    a_x = float(curvature_ratio_scalar(model, x))
    window = b * math.sqrt(math.log(p) / p)
    e = np.exp(1j * direction)
    rows = []
    for t in radii:
        y = x + t * e
        dist = geo.local_distance(model, x, y)
        pval = float(normalized_kernel(basis, x, y))
        gauss = math.exp(-a_x * p * dist * dist / 4.0)
        rows.append({
            "chart_radius": float(t),
            "dist": dist,
            "P_p": pval,
            "gaussian": gauss,
            "ratio": pval / gauss if gauss > 0 else math.inf,
            "in_regime": bool(dist <= window),
        })
    return {"p": p, "a_x": a_x, "window": window, "rows": rows}


def curvature_ratio_scalar(model, z):
    return float(np.asarray(geo.curvature_ratio(model, np.array([z])))[0])


# ---------------------------------------------------------------------------
# quadrature nodes for inner products

def inner_product_nodes(basis, n_theta=None):
    """Radial nodes/weights and angular count for the model's inner
    product; radial weights fold in the volume density and jacobian so
    that <F, G> ~= sum_i w_i * (2 pi / n_theta) * sum_m F conj(G) w^p.
    """
    model = basis.model
    p = basis.p
    kmax = basis.max_exponent
    if n_theta is None:
        n_theta = 2 * kmax + 2
    if model.kind == ModelKind.PUNCTURED_DISK:
        u_hi = 8.0 * p + 80.0
        u, w = quadlib.panel_nodes(geometric_edges(1e-5, u_hi), 24)
        r = np.exp(-0.5 * u)
        return r, w / (u * u), n_theta
    if model.kind == ModelKind.SPHERE:
        v, w = quadlib.gl_nodes(0.0, 1.0, max(kmax + 8, 32))
        r = np.sqrt(v / (1.0 - v))
        return r, w, n_theta
    rin, rout = model.blend_radii
    u_in = -2.0 * math.log(rin)
    u, wu = quadlib.panel_nodes(
        u_in + geometric_edges(1.0 / 16.0, 8.0 * p + 80.0), 24)
    r1 = np.exp(-0.5 * u)
    w1 = wu / (u * u)
    r2, w2 = quadlib.panel_nodes(np.linspace(rin, rout, 33), 24)
    z2 = r2.astype(complex)
    w2 = w2 * np.real(geo.volume_density(model, z2)) * r2
    v_out = rout * rout / (1.0 + rout * rout)
    v, wv = quadlib.gl_nodes(v_out, 1.0, max(kmax + 8, 32))
    r3 = np.sqrt(v / (1.0 - v))
    return (np.concatenate([r1, r2, r3]),
            np.concatenate([w1, w2, wv]), n_theta)


def geometric_edges(first, hi):
    """Panel edges [0, first, 2*first, ...], doubling up to hi."""
    edges = [0.0, first]
    while edges[-1] < hi:
        edges.append(min(edges[-1] * 2.0, hi))
    return np.array(edges)


def weighted_basis_values(basis, z):
    """Matrix of f_j(z) * w(z)^{p/2} values, shape (d_p, n_points).

    These are the h^p-normed orthonormal basis evaluations; computed in
    log form so they are finite for any p and any chart point.
    """
    z_arr, r = geo._check_domain(basis.model, z)
    _check_tail(basis, r)
    zf = np.atleast_1d(z_arr).ravel()
    k = basis.exponents.astype(float)
    with np.errstate(divide="ignore"):
        log_r = np.log(np.abs(zf))
    log_w = geo.log_frame_weight(basis.model, zf)
    with np.errstate(invalid="ignore"):
        lt = np.multiply.outer(k, log_r)
    lt = np.where(k[:, None] == 0.0, 0.0, lt)
    log_mag = (-0.5 * basis.log_sq_norms[:, None] + lt
               + 0.5 * basis.p * np.asarray(log_w)[None, :])
    with np.errstate(under="ignore"):
        mag = np.exp(log_mag)
    phase = np.exp(1j * np.multiply.outer(basis.exponents, np.angle(zf)))
    return mag * phase


def _weighted_node_matrix(basis, r_nodes, w_radial, n_theta):
    """Matrix of w^(p/2)-weighted orthonormal basis values on a polar
    tensor grid, built in log form so large exponents at far nodes
    cannot overflow.  Returns (phi_w, node_weights).
    """
    theta = np.arange(n_theta) * (TWO_PI / n_theta)
    k = basis.exponents.astype(float)
    with np.errstate(divide="ignore"):
        log_r = np.log(r_nodes)
    log_w = geo.log_frame_weight(basis.model, r_nodes.astype(complex))
    log_mag = (-0.5 * basis.log_sq_norms[:, None]
               + np.multiply.outer(k, log_r)
               + 0.5 * basis.p * log_w[None, :])
    with np.errstate(under="ignore"):
        mag = np.exp(log_mag)
    phase = np.exp(1j * np.multiply.outer(basis.exponents, theta))
    phi_w = (mag[:, :, None] * phase[:, None, :]).reshape(basis.d_p, -1)
    weights = np.broadcast_to((w_radial * (TWO_PI / n_theta))[:, None],
                              (len(r_nodes), n_theta)).ravel()
    return phi_w, weights


def verify_gram(basis, n_theta=None):
    """Max deviation of the quadrature Gram matrix from the identity."""
    r, w, n_t = inner_product_nodes(basis, n_theta)
    phi_w, wf = _weighted_node_matrix(basis, r, w, n_t)
    gram = (phi_w * wf[None, :]) @ phi_w.conj().T
    return float(np.max(np.abs(gram - np.eye(basis.d_p))))


def reproducing_check(basis, coeffs, x, quad=None):
    """Residual of reproducing the section from the kernel integral.

    Integrates K(x, y) f(y) w(y)^p against the area form and compares
    with f(x); returns the absolute residual.
    """
    quad = quad or {}
    x_arr, _ = geo._check_domain(basis.model, x)
    r, w, n_t = inner_product_nodes(basis, quad.get("n_theta"))
    phi_w, wf = _weighted_node_matrix(basis, r, w, n_t)
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (basis.d_p,):
        raise ValueError(
            f"coefficient vector has shape {coeffs.shape}, "
            f"expected ({basis.d_p},)")
    f_w = coeffs @ phi_w
    inner = phi_w.conj() @ (f_w * wf)
    fx_reproduced = np.sum(basis._diag
                           * np.asarray(x_arr) ** basis.exponents * inner)
    a = basis.monomial_coeffs(coeffs)
    fx = np.polynomial.polynomial.polyval(np.asarray(x, dtype=complex), a)
    return float(np.abs(fx_reproduced - fx))


# ---------------------------------------------------------------------------
# export / import

def _complex_matrix_to_json(m):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _complex_matrix_from_json(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def basis_to_json(basis):
    """Serialize to a JSON string; round-trips bit-exactly."""
    doc = {
        "model": basis.model.descriptor(),
        "p": basis.p,
        "exponents": [int(k) for k in basis.exponents],
        "transform": _complex_matrix_to_json(basis.transform),
        "d_p": basis.d_p,
        "truncated": basis.truncated,
        "truncation_tail": basis.truncation_tail,
        "log_sq_norms": [float(v) for v in basis.log_sq_norms],
    }
    return json.dumps(doc, sort_keys=True)


def basis_from_json(text):
    doc = json.loads(text)
    desc = doc["model"]
    kind = desc["kind"]
    punctures = tuple(complex(re, im) for re, im in desc["punctures"])
    blend = tuple(desc["blend_radii"]) if "blend_radii" in desc else None
    log_bg = 0.0
    if kind == ModelKind.CUSPED_SPHERE:
        rin, rout = blend
        log_bg = geo.blend_log_scale(desc["bundle_degree"], rin, rout)
    model = geo.ModelSpace(kind=kind, bundle_degree=desc["bundle_degree"],
                           punctures=punctures, blend_radii=blend,
                           epsilon0=desc["epsilon0"], log_bg_scale=log_bg)
    basis = SectionBasis(
        model=model,
        p=doc["p"],
        exponents=np.array(doc["exponents"]),
        log_sq_norms=np.array(doc["log_sq_norms"]),
        truncated=doc["truncated"],
        truncation_tail=doc["truncation_tail"],
    )
    # the transform is derived data; check it matches what was stored
    stored = _complex_matrix_from_json(doc["transform"])
    if stored.shape != basis.transform.shape or not np.array_equal(
            stored, basis.transform):
        raise ValueError("stored transform does not match the norms")
    return basis
