"""Monte Carlo experiments over random holomorphic sections.

Reduction determinism: trials are split into fixed 2048-trial chunks
keyed by (p, chunk index).  Within a chunk, per-trial values are reduced
with math.fsum; chunk results are then combined in chunk-index order
with plain sums.  The partition, the per-trial coefficient streams, and
both reduction orders never depend on the worker count, so experiment
reports are byte-identical for any --workers value.

Probability curves carry Clopper-Pearson 95% intervals; decay-rate fits
are weighted least squares on log probability against three candidate
abscissas (p, p^2, p*log p) side by side, excluding points with fewer
than 5 observed events.
"""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from secgeom import ensembles as ens
from secgeom import hilbert
from secgeom import models as geo
from secgeom import quadrature as quadlib
from secgeom import zeros as zlib
from secgeom.models import ChartAnnulus, ChartDisk, DomainError, TWO_PI

CHUNK_TRIALS = 2048        # fixed; part of the determinism contract
MIN_FIT_EVENTS = 5
GRID_SPACING_FACTOR = 0.25  # grid step <= this times 1/sqrt(p), metrically
NORMAL_CI = 1.96
RULE_OF_THREE = 3.0

_ABSCISSAS = ("p", "p2", "plogp")


def _abscissa_value(kind, p):
    if kind == "p":
        return float(p)
    if kind == "p2":
        return float(p) ** 2
    if kind == "plogp":
        return float(p) * math.log(p)
    raise ValueError(f"unknown abscissa {kind!r}; choose from {_ABSCISSAS}")


# ---------------------------------------------------------------------------
# estimates and fits

@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo estimate with its uncertainty.

    ci95 brackets the mean: Clopper-Pearson for event probabilities
    (n_events is the event count), normal-theory otherwise
    (n_events is None).
    """
    mean: float
    std_error: float
    n_trials: int
    ci95: tuple
    n_events: int = None

    def __post_init__(self):
        lo, hi = self.ci95
        if not (lo <= self.mean <= hi):
            raise ValueError("ci95 must bracket the mean")

    def to_dict(self):
        return {"mean": self.mean, "std_error": self.std_error,
                "n_trials": self.n_trials, "ci95": list(self.ci95),
                "n_events": self.n_events}


@dataclass(frozen=True)
class DecayFit:
    """WLS fit of log(probability) = intercept + slope * abscissa(p)."""
    abscissa: str
    slope: float
    intercept: float
    r_squared: float
    points: tuple       # (p, probability, n_events) actually used
    excluded: tuple     # p values dropped for thin event counts

    def to_dict(self):
        return {"abscissa": self.abscissa, "slope": self.slope,
                "intercept": self.intercept, "r_squared": self.r_squared,
                "points": [list(pt) for pt in self.points],
                "excluded": list(self.excluded)}


def clopper_pearson(k, n, confidence=0.95):
    """Exact binomial confidence interval; (0, upper) when k == 0."""
    if not (0 <= k <= n) or n < 1:
        raise ValueError("need 0 <= k <= n with n >= 1")
    alpha = 1.0 - confidence
    lo = 0.0 if k == 0 else float(beta_dist.ppf(alpha / 2.0, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1.0 - alpha / 2.0,
                                                k + 1, n - k))
    return lo, hi


def _mc_from_sums(total, total_sq, n):
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    if n > 1:
        var *= n / (n - 1.0)
    se = math.sqrt(var / n)
    return McEstimate(mean=mean, std_error=se, n_trials=int(n),
                      ci95=(mean - NORMAL_CI * se, mean + NORMAL_CI * se))


def _mc_probability(k, n):
    mean = k / n
    se = math.sqrt(mean * (1.0 - mean) / n)
    return McEstimate(mean=mean, std_error=se, n_trials=int(n),
                      ci95=clopper_pearson(k, n), n_events=int(k))


def fit_decay(points, abscissa="p"):
    """Weighted least-squares decay fit on log probability.

    points is a sequence of (p, probability, n_events).  Points with
    fewer than MIN_FIT_EVENTS events (or degenerate probability 0 or 1)
    are excluded and reported; at least 3 usable points are required.
    Weights are inverse delta-method variances of log(p_hat), i.e.
    n_events / (1 - probability).
    """
    usable = []
    excluded = []
    for p, prob, k in points:
        if k is not None and k >= MIN_FIT_EVENTS and 0.0 < prob < 1.0:
            usable.append((int(p), float(prob), int(k)))
        else:
            excluded.append(int(p))
    if len(usable) < 3:
        raise ValueError(
            f"need >= 3 points with >= {MIN_FIT_EVENTS} events to fit; "
            f"got {len(usable)} (excluded p = {excluded})")
    x = np.array([_abscissa_value(abscissa, p) for p, _, _ in usable])
    y = np.array([math.log(prob) for _, prob, _ in usable])
    w = np.array([k / (1.0 - prob) for _, prob, k in usable])
    sw = np.sqrt(w)
    slope, intercept = np.polyfit(x, y, 1, w=sw)
    yhat = slope * x + intercept
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_res = float(np.sum(w * (y - yhat) ** 2))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(abscissa=abscissa, slope=float(slope),
                    intercept=float(intercept), r_squared=float(r2),
                    points=tuple(usable), excluded=tuple(excluded))


def _fit_all(points):
    """All three candidate abscissas side by side; failures annotated."""
    fits = {}
    for kind in _ABSCISSAS:
        try:
            fits[kind] = fit_decay(points, abscissa=kind)
        except ValueError as exc:
            fits[kind] = {"unavailable": str(exc)}
    return fits


def _monotone_flags(estimates):
    """Non-increase of successive estimates, up to CI overlap."""
    flags = []
    for a, b in zip(estimates[:-1], estimates[1:]):
        flags.append(bool(b.mean <= a.mean or b.ci95[0] <= a.ci95[1]))
    return flags


# ---------------------------------------------------------------------------
# chunked execution

def _chunk_spans(n_trials):
    return [(s, min(CHUNK_TRIALS, n_trials - s))
            for s in range(0, n_trials, CHUNK_TRIALS)]


def _chunk_worker(kind, payload, p, start, size):
    return _CHUNK_FUNCS[kind](payload, p, start, size)


def _run_chunks(kind, payload, p, n_trials, workers):
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    spans = _chunk_spans(n_trials)
    if workers and workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_chunk_worker, kind, payload, p, s, c)
                       for s, c in spans]
            parts = [f.result() for f in futures]
    else:
        parts = [_chunk_worker(kind, payload, p, s, c) for s, c in spans]
    merged = {}
    for part in parts:  # chunk-index order: worker-count independent
        for key, val in part.items():
            merged[key] = merged.get(key, 0) + val
    return merged


def _fsum(arr):
    return math.fsum(np.asarray(arr, dtype=float).tolist())


def _supnorm_chunk(payload, p, start, size):
    basis = payload["basis"]
    phi_w = hilbert.weighted_basis_values(basis, payload["z"])
    coeffs = ens.sample_block(payload["ensemble"], basis.d_p,
                              payload["seed"], p, range(start, start + size))
    m = np.abs(coeffs @ phi_w).max(axis=1)
    logm = np.log(np.maximum(m, 1e-300))
    n_tail = int(np.sum(np.abs(logm) >= payload["delta"] * p))
    return {"n": size,
            "sum_m": _fsum(m), "sum_m2": _fsum(m * m),
            "sum_logm": _fsum(logm), "sum_logm2": _fsum(logm * logm),
            "n_tail": n_tail}


def _variance_chunk(payload, p, start, size):
    basis = payload["basis"]
    fvec = hilbert.weighted_basis_values(basis, payload["x"])[:, 0]
    coeffs = ens.sample_block(payload["ensemble"], basis.d_p,
                              payload["seed"], p, range(start, start + size))
    v2 = np.abs(coeffs @ fvec) ** 2
    return {"n": size, "sum": _fsum(v2), "sum_sq": _fsum(v2 * v2)}


def _region_circles(region):
    """Signed boundary circles whose winding difference counts interior
    zeros."""
    if isinstance(region, ChartDisk):
        return [(complex(region.center), float(region.radius), 1)]
    if isinstance(region, ChartAnnulus):
        return [(0.0 + 0.0j, float(region.r_outer), 1),
                (0.0 + 0.0j, float(region.r_inner), -1)]
    raise DomainError("zero counting by winding supports disks and annuli")


def _count_chunk(payload, p, start, size):
    basis = payload["basis"]
    region = payload["region"]
    n_pts = payload["n_points"]
    coeffs = ens.sample_block(payload["ensemble"], basis.d_p,
                              payload["seed"], p, range(start, start + size))
    mono = (coeffs * np.exp(-0.5 * basis.log_sq_norms)[None, :])
    scale = np.max(np.abs(mono), axis=1, keepdims=True)
    bad = (scale[:, 0] == 0.0)
    mono = mono / np.where(scale > 0.0, scale, 1.0)
    k = basis.exponents.astype(float)
    theta = np.arange(n_pts) * (TWO_PI / n_pts)
    counts = np.zeros(size, dtype=int)
    ok = ~bad
    for center, radius, sign in _region_circles(region):
        zc = center + radius * np.exp(1j * theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            lt = np.multiply.outer(k, np.log(np.abs(zc)))
        lt = np.where(k[:, None] == 0.0, 0.0, lt)
        with np.errstate(under="ignore", over="ignore"):
            powers = np.exp(lt + 1j * np.multiply.outer(
                k, np.angle(zc).astype(float)))
        values = mono @ powers
        w, row_ok = zlib.winding_counts_batch(values)
        counts += sign * w
        ok &= row_ok
    n_fallback = 0
    for i in np.where(~ok)[0]:
        section = hilbert.RandomSection(basis, coeffs[i])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", zlib.BoundaryRootWarning)
            counts[i] = zlib.count_zeros_in(zlib.find_zeros(section), region)
        n_fallback += 1
    ratio = counts / float(p)
    out = {"n": size,
           "sum_ratio": _fsum(ratio), "sum_ratio2": _fsum(ratio * ratio),
           "n_hole": int(np.sum(counts == 0)),
           "n_fallback": n_fallback}
    if payload.get("delta") is not None:
        dev = np.abs(ratio - payload["target"]) > payload["delta"]
        out["n_dev"] = int(np.sum(dev))
    return out


def _pairing_chunk(payload, p, start, size):
    basis = payload["basis"]
    phi = payload["phi"]
    add_inf = payload["add_infinity"]
    excl_origin = payload["exclude_origin"]
    coeffs = ens.sample_block(payload["ensemble"], basis.d_p,
                              payload["seed"], p, range(start, start + size))
    vals = np.empty(size)
    for i in range(size):
        zs = zlib.find_zeros(hilbert.RandomSection(basis, coeffs[i]))
        v = zlib.pair_divisor(zs, phi, p)
        if add_inf:
            v += zs.order_at_infinity * phi.amplitude / p
        if excl_origin and len(zs.locations):
            at0 = zs.locations == 0.0
            if np.any(at0):
                v -= float(np.sum(
                    zs.multiplicities[at0])) * phi.amplitude / p
        vals[i] = v
    dev = np.abs(vals - payload["target"]) > payload["delta"]
    return {"n": size, "sum": _fsum(vals), "sum_sq": _fsum(vals * vals),
            "n_dev": int(np.sum(dev))}


_CHUNK_FUNCS = {
    "supnorm": _supnorm_chunk,
    "variance": _variance_chunk,
    "count": _count_chunk,
    "pairing": _pairing_chunk,
}


# ---------------------------------------------------------------------------
# shared experiment plumbing

def _region_descriptor(region):
    if isinstance(region, ChartDisk):
        c = complex(region.center)
        return {"kind": "disk", "center": [c.real, c.imag],
                "radius": region.radius}
    if isinstance(region, ChartAnnulus):
        return {"kind": "annulus", "r_inner": region.r_inner,
                "r_outer": region.r_outer}
    return {"kind": type(region).__name__}


def _check_family(bases, ensemble):
    if not bases:
        raise ValueError("need at least one basis")
    model = bases[0].model
    ref = model.descriptor()
    for b in bases[1:]:
        if b.model.descriptor() != ref:
            raise ValueError("all bases must share one model")
    if sorted(b.p for b in bases) != [b.p for b in bases]:
        raise ValueError("bases must be ordered by increasing p")
    if len({b.p for b in bases}) != len(bases):
        raise ValueError("duplicate p in basis family")
    ens.validate_ensemble(ensemble, d_max=max(b.d_p for b in bases))
    return model


def _count_points(region, basis):
    return max(256, 8 * int(basis.max_exponent))


# ---------------------------------------------------------------------------
# experiments

def variance_identity_check(basis, ensemble, x, n_trials, seed, workers=1):
    """Empirical E|s(x)|_h^2 against the exact value (variance * kernel
    diagonal); reports the z-score of the discrepancy."""
    ens.validate_ensemble(ensemble, d_max=basis.d_p)
    payload = {"basis": basis, "ensemble": ensemble, "seed": seed,
               "x": complex(x)}
    merged = _run_chunks("variance", payload, basis.p, n_trials, workers)
    est = _mc_from_sums(merged["sum"], merged["sum_sq"], merged["n"])
    analytic = (ensemble.variance(basis.d_p)
                * float(hilbert.bergman_density(basis, complex(x))))
    if est.std_error > 0.0:
        z = abs(est.mean - analytic) / est.std_error
    else:
        z = 0.0 if est.mean == analytic else math.inf
    return {"kind": "variance_identity", "p": basis.p, "d_p": basis.d_p,
            "x": [complex(x).real, complex(x).imag],
            "empirical": est, "analytic": analytic, "z_score": float(z)}


def _supnorm_grid(model, region, p, spec=None, factor=1):
    """Polar evaluation grid with metric spacing <= 0.25 / sqrt(p).

    spec may fix {"n_r", "n_theta"}; it is rejected if coarser than the
    spacing rule demands.  factor refines both directions (for the grid
    convergence study).
    """
    h = GRID_SPACING_FACTOR / math.sqrt(p)
    if isinstance(region, ChartDisk):
        center, r_lo, r_hi = complex(region.center), 0.0, region.radius
    elif isinstance(region, ChartAnnulus):
        center, r_lo, r_hi = 0.0 + 0.0j, region.r_inner, region.r_outer
    else:
        raise DomainError("sup-norm grids support disks and annuli")
    width = r_hi - r_lo
    probe_r = np.linspace(r_lo + width / 128.0, r_hi - width / 128.0, 48)
    probe_t = np.arange(32) * (TWO_PI / 32)
    probe = center + probe_r[:, None] * np.exp(1j * probe_t[None, :])
    s_max = 1.05 * float(np.sqrt(np.max(geo.volume_density(model, probe))))
    n_r_min = max(4, math.ceil(width * s_max / h))
    n_t_min = max(16, math.ceil(TWO_PI * r_hi * s_max / h))
    if spec is None:
        n_r, n_t = n_r_min, n_t_min
    else:
        n_r, n_t = int(spec["n_r"]), int(spec["n_theta"])
        if n_r < n_r_min or n_t < n_t_min:
            raise ValueError(
                f"grid too coarse at p={p}: the metric spacing rule "
                f"needs at least ({n_r_min}, {n_t_min}) points, "
                f"got ({n_r}, {n_t})")
    n_r, n_t = n_r * factor, n_t * factor
    r = r_lo + (np.arange(n_r) + 0.5) * (width / n_r)
    t = np.arange(n_t) * (TWO_PI / n_t)
    z = (center + r[:, None] * np.exp(1j * t[None, :])).ravel()
    meta = {"n_r": int(n_r), "n_theta": int(n_t),
            "n_points": int(n_r * n_t), "target_spacing": h,
            "metric_scale": s_max}
    return z, meta


def supnorm_experiment(bases, ensemble, region, n_trials, seed, delta=0.08,
                       grid=None, workers=1, refinement_trials=512):
    """Sup of |s|_h over a metric grid: means, log-deviation tail
    probabilities, decay fits, and a grid-refinement drift study.

    The grid maximum is a lower proxy for the true sup; the refinement
    study (factors 1, 2, 4 at the largest p) reports how much the mean
    still moves, which bounds the bias the grid is contributing.
    """
    model = _check_family(bases, ensemble)
    per_p = []
    points = []
    for basis in bases:
        z, meta = _supnorm_grid(model, region, basis.p, spec=grid)
        payload = {"basis": basis, "ensemble": ensemble, "seed": seed,
                   "z": z, "delta": delta}
        merged = _run_chunks("supnorm", payload, basis.p, n_trials, workers)
        n = merged["n"]
        mean_m = _mc_from_sums(merged["sum_m"], merged["sum_m2"], n)
        mean_log = _mc_from_sums(merged["sum_logm"], merged["sum_logm2"], n)
        tail = _mc_probability(merged["n_tail"], n)
        per_p.append({"p": basis.p, "d_p": basis.d_p, "grid": meta,
                      "mean_sup": mean_m, "mean_log_sup": mean_log,
                      "tail": tail})
        points.append((basis.p, tail.mean, tail.n_events))
    refinement = []
    top = bases[-1]
    n_ref = min(refinement_trials, n_trials)
    for factor in (1, 2, 4):
        z, meta = _supnorm_grid(model, region, top.p, spec=grid,
                                factor=factor)
        payload = {"basis": top, "ensemble": ensemble, "seed": seed,
                   "z": z, "delta": delta}
        merged = _run_chunks("supnorm", payload, top.p, n_ref, workers)
        refinement.append({"factor": factor, "n_points": meta["n_points"],
                           "mean_sup": merged["sum_m"] / merged["n"]})
    base_mean = refinement[0]["mean_sup"]
    drift = [abs(r["mean_sup"] - base_mean) / abs(base_mean)
             for r in refinement[1:]]
    return {"kind": "supnorm", "delta": delta,
            "region": _region_descriptor(region),
            "per_p": per_p, "points": points, "fits": _fit_all(points),
            "grid_refinement": {"levels": refinement,
                                "relative_drift": drift},
            "n_trials": n_trials}


def equidistribution_experiment(bases, ensemble, region, n_trials, seed,
                                delta=0.1, workers=1):
    """Zero-count ratios N/p in a region against the curvature mass,
    with deviation-event probabilities and decay fits."""
    model = _check_family(bases, ensemble)
    target = geo.area_L(model, region) / TWO_PI
    per_p = []
    points = []
    ratio_ests = []
    dev_ests = []
    for basis in bases:
        payload = {"basis": basis, "ensemble": ensemble, "seed": seed,
                   "region": region, "n_points": _count_points(region, basis),
                   "target": target, "delta": delta}
        merged = _run_chunks("count", payload, basis.p, n_trials, workers)
        n = merged["n"]
        ratio = _mc_from_sums(merged["sum_ratio"], merged["sum_ratio2"], n)
        dev = _mc_probability(merged["n_dev"], n)
        per_p.append({"p": basis.p, "d_p": basis.d_p, "mean_ratio": ratio,
                      "deviation": dev,
                      "fallback_fraction": merged["n_fallback"] / n})
        points.append((basis.p, dev.mean, dev.n_events))
        ratio_ests.append(ratio)
        dev_ests.append(dev)
    final = ratio_ests[-1]
    gap = abs(final.mean - target)
    return {"kind": "equidistribution", "delta": delta, "target": target,
            "region": _region_descriptor(region), "per_p": per_p,
            "points": points, "fits": _fit_all(points),
            "monotone_within_ci": _monotone_flags(dev_ests),
            "final_ratio_gap": gap,
            "final_ratio_within_3se": bool(
                gap <= 3.0 * final.std_error + 1e-12),
            "n_trials": n_trials}


def _hole_lower_bound(basis, region):
    """Analytic lower bound for the hole probability, Gaussian sigma=1.

    Picks the basis element with the largest infimum of |E_j|_h over the
    region, verifies it has no zeros there, and applies the two-event
    construction: {|eta_j| > 1} and {|eta_l| <= t for l != j} forces
    |s| > 0 on the region when t = inf|E_j| / (sqrt(d_p) sup_B), giving
    P(hole) >= e^-1 * (t^2 / 2)^(d_p - 1) for t <= 1.
    """
    model = basis.model
    if isinstance(region, ChartAnnulus):
        r_lo, r_hi = region.r_inner, region.r_outer
    elif isinstance(region, ChartDisk) and region.center == 0:
        r_lo, r_hi = 0.0, region.radius
    else:
        return {"available": False,
                "reason": "bound needs a rotation-invariant region"}
    if model.punctures and r_lo <= 0.0:
        # every section norm vanishes toward a puncture, so the infimum
        # underlying the bound is 0 and the bound degenerates
        return {"available": False,
                "reason": "region closure touches a puncture"}
    r_grid = np.linspace(r_lo, r_hi, 2001)
    mags = np.abs(hilbert.weighted_basis_values(
        basis, r_grid.astype(complex)))
    infs = mags.min(axis=1)
    j_star = int(np.argmax(infs))
    if infs[j_star] <= 0.0:
        return {"available": False,
                "reason": "every basis element vanishes inside the region"}
    unit = np.zeros(basis.d_p, dtype=complex)
    unit[j_star] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", zlib.BoundaryRootWarning)
        n_roots = zlib.count_zeros_in(
            zlib.find_zeros(hilbert.RandomSection(basis, unit)), region)
    if n_roots != 0:
        return {"available": False,
                "reason": "comparison element has zeros in the region"}
    density = hilbert.bergman_density(basis, r_grid.astype(complex))
    s_sup = math.sqrt(float(np.max(np.maximum(
        density - mags[j_star] ** 2, 0.0))))
    if s_sup == 0.0:
        t = 1.0
    else:
        t = min(1.0, float(infs[j_star]) / (math.sqrt(basis.d_p) * s_sup))
    log_bound = -1.0 + (basis.d_p - 1) * math.log(t * t / 2.0)
    return {"available": True, "j_star": j_star,
            "b_p": -math.log(float(infs[j_star])), "s_sup": s_sup, "t": t,
            "log_bound": log_bound, "log10_bound": log_bound / math.log(10),
            "value": math.exp(log_bound) if log_bound > -700 else 0.0}


def hole_experiment(bases, ensemble, region, n_trials, seed, workers=1):
    """Probability that a region is zero-free, with Clopper-Pearson
    intervals, decay fits, and (for Gaussian sigma=1) an analytic lower
    bound per p that the estimate is checked against."""
    model = _check_family(bases, ensemble)
    gaussian_unit = ensemble.is_gaussian and abs(ensemble.sigma - 1.0) < 1e-12
    per_p = []
    points = []
    hole_ests = []
    for basis in bases:
        payload = {"basis": basis, "ensemble": ensemble, "seed": seed,
                   "region": region, "n_points": _count_points(region, basis),
                   "target": None, "delta": None}
        merged = _run_chunks("count", payload, basis.p, n_trials, workers)
        n = merged["n"]
        est = _mc_probability(merged["n_hole"], n)
        row = {"p": basis.p, "d_p": basis.d_p, "hole": est,
               "fallback_fraction": merged["n_fallback"] / n}
        if est.n_events == 0:
            row["rule_of_three_upper"] = RULE_OF_THREE / n
        if gaussian_unit:
            bound = _hole_lower_bound(basis, region)
            row["lower_bound"] = bound
            if bound["available"]:
                ci_width = est.ci95[1] - est.ci95[0]
                row["bound_respected"] = bool(
                    est.mean >= bound["value"] - ci_width)
        per_p.append(row)
        points.append((basis.p, est.mean, est.n_events))
        hole_ests.append(est)
    return {"kind": "hole", "region": _region_descriptor(region),
            "gaussian_lower_bound": gaussian_unit, "per_p": per_p,
            "points": points, "fits": _fit_all(points),
            "monotone_within_ci": _monotone_flags(hole_ests),
            "all_zero_events": all(e.n_events == 0 for e in hole_ests),
            "n_trials": n_trials}


def _radial_pairing_target(model, phi):
    """(1/2pi) integral of phi against the curvature form."""
    nodes, wts = quadlib.panel_nodes(
        zlib._curvature_panels(model, phi.r_lo, phi.r_hi), 24)
    zn = nodes.astype(complex)
    vals = (phi.profile(nodes) * geo.curvature_ratio(model, zn)
            * geo.volume_density(model, zn) * nodes)
    return float(np.sum(wts * np.real(vals)))


def test_function_ld_experiment(bases, ensemble, phi, n_trials, seed,
                                delta=0.1, workers=1):
    """Divisor pairings (1/p) sum m phi(root) against the curvature
    integral of phi, with deviation-event probabilities and fits.

    Test functions must be locally constant near the punctures.  The
    constant function is admissible only on the cusped sphere (its
    surface has finite curvature mass and no chart boundary); there the
    pairing counts the full divisor on the surface, every root except
    the puncture itself plus the order at infinity, and the target is
    the total curvature mass.  On the other models phi must be a
    compactly supported plateau, vanishing near the puncture when the
    model has one.
    """
    model = _check_family(bases, ensemble)
    exclude_origin = False
    add_infinity = False
    if phi.constant_one:
        if model.kind != geo.ModelKind.CUSPED_SPHERE:
            raise DomainError(
                "the constant test function is only admissible on the "
                "cusped sphere; it is not compactly supported on the "
                "other models")
        target = phi.amplitude * geo.total_chern_mass(model)
        add_infinity = True
        exclude_origin = True
    elif model.punctures:
        if not (phi.compact_support and phi.locally_constant_near_punctures):
            raise DomainError(
                "punctured models need compactly supported test functions "
                "that are constant near the punctures")
        target = _radial_pairing_target(model, phi)
    else:
        target = _radial_pairing_target(model, phi)
    per_p = []
    points = []
    dev_ests = []
    for basis in bases:
        payload = {"basis": basis, "ensemble": ensemble, "seed": seed,
                   "phi": phi, "target": target, "delta": delta,
                   "add_infinity": add_infinity,
                   "exclude_origin": exclude_origin}
        merged = _run_chunks("pairing", payload, basis.p, n_trials, workers)
        n = merged["n"]
        mean = _mc_from_sums(merged["sum"], merged["sum_sq"], n)
        dev = _mc_probability(merged["n_dev"], n)
        per_p.append({"p": basis.p, "d_p": basis.d_p, "mean_pairing": mean,
                      "deviation": dev})
        points.append((basis.p, dev.mean, dev.n_events))
        dev_ests.append(dev)
    final = per_p[-1]["mean_pairing"]
    gap = abs(final.mean - target)
    return {"kind": "test_function_ld", "delta": delta, "target": target,
            "phi": {"r_lo": phi.r_lo, "r_hi": phi.r_hi, "ramp": phi.ramp,
                    "amplitude": phi.amplitude,
                    "constant_one": phi.constant_one},
            "per_p": per_p, "points": points, "fits": _fit_all(points),
            "monotone_within_ci": _monotone_flags(dev_ests),
            "final_pairing_gap": gap,
            "final_pairing_within_3se": bool(
                gap <= 3.0 * final.std_error + 1e-12),
            "n_trials": n_trials}
