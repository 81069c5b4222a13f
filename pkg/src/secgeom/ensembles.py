"""Coefficient ensembles: validated distributions and reproducible streams.

A random section is sum_j eta_j f_j with i.i.d. centered coefficients.
Supported coefficient laws: symmetric complex Gaussian and the uniform
law on a disk whose radius may depend on the space dimension.  Each
ensemble carries three validated constants:

  M0 — sup of the single-coefficient density,
  c0 — lower bound for the per-coefficient variance,
  C0 — moment growth constant, E|eta|^d <= C0 * d^d for all d used.

Sampling is counter-based: the stream for (master_seed, p, trial) is an
independent Philox generator, so any worker may draw any trial in any
order with bit-identical results.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtri

GAUSSIAN = "complex_gaussian"
UNIFORM_DISK = "uniform_disk"

# largest coefficient-vector dimension the moment bound is certified for
D_MAX_DEFAULT = 4096

# reserved stream namespaces (experiments use p >= 2)
_MOMENT_STREAM_P = 0
_SUBSPACE_STREAM_P = 1


class EnsembleValidationError(ValueError):
    """The ensemble violates a density/variance/moment condition."""


@dataclass(frozen=True)
class Ensemble:
    """Immutable coefficient-law specification.

    radius_rule is ("constant", r) or ("min_dp", r) meaning
    r_p = min(d_p, r); sigma applies to the Gaussian kind only.
    """
    kind: str
    sigma: float = None
    radius_rule: tuple = None
    M0: float = None
    c0: float = None
    C0: float = None

    def radius(self, d_p):
        if self.kind != UNIFORM_DISK:
            raise ValueError("radius only applies to the uniform-disk kind")
        rule, value = self.radius_rule
        if rule == "constant":
            return float(value)
        if rule == "min_dp":
            return float(min(d_p, value))
        raise ValueError(f"unknown radius rule {rule!r}")

    def min_radius(self):
        rule, value = self.radius_rule
        return float(value) if rule == "constant" else float(min(1.0, value))

    def variance(self, d_p):
        """Per-coefficient variance E|eta|^2 at dimension d_p."""
        if self.kind == GAUSSIAN:
            return self.sigma ** 2
        return self.radius(d_p) ** 2 / 2.0

    @property
    def is_gaussian(self):
        return self.kind == GAUSSIAN

    def descriptor(self):
        d = {"kind": self.kind, "M0": self.M0, "c0": self.c0, "C0": self.C0}
        if self.kind == GAUSSIAN:
            d["sigma"] = self.sigma
        else:
            d["radius_rule"] = list(self.radius_rule)
        return d


def complex_gaussian(sigma=1.0, M0=None, c0=None, C0=None):
    """Symmetric complex Gaussian with E|eta|^2 = sigma^2.

    Density sup is exactly 1/(pi sigma^2); defaults derive the three
    constants from sigma and are re-checked by validate_ensemble.
    """
    if not (sigma > 0.0):
        raise EnsembleValidationError("sigma must be positive "
                                      "(zero-variance ensembles are "
                                      "degenerate)")
    if M0 is None:
        M0 = 1.0 / (math.pi * sigma * sigma)
    if c0 is None:
        c0 = sigma * sigma
    if C0 is None:
        # E|eta|^d = sigma^d Gamma(d/2 + 1); C0 covers all d >= 1
        C0 = max(1.0, _gaussian_moment_constant(sigma, D_MAX_DEFAULT))
    return Ensemble(kind=GAUSSIAN, sigma=float(sigma), M0=float(M0),
                    c0=float(c0), C0=float(C0))


def uniform_disk(radius_rule=("constant", 1.0), M0=None, c0=None, C0=None):
    """Uniform law on |eta| <= r_p with r_p from the radius rule."""
    if isinstance(radius_rule, (int, float)):
        radius_rule = ("constant", float(radius_rule))
    rule, value = radius_rule
    if rule not in ("constant", "min_dp"):
        raise EnsembleValidationError(f"unknown radius rule {rule!r}")
    if not (value > 0.0):
        raise EnsembleValidationError("disk radius must be positive")
    ens = Ensemble(kind=UNIFORM_DISK, radius_rule=(rule, float(value)))
    r_min = ens.min_radius()
    r_max = float(value)
    if M0 is None:
        M0 = 1.0 / (math.pi * r_min * r_min)
    if c0 is None:
        c0 = r_min * r_min / 2.0
    if C0 is None:
        # E|U|^d = 2 r^d / (d+2) <= C0 d^d once r_p <= d_p
        C0 = max(1.0, r_max)
    return Ensemble(kind=UNIFORM_DISK, radius_rule=(rule, float(value)),
                    M0=float(M0), c0=float(c0), C0=float(C0))


def _gaussian_moment_constant(sigma, d_max):
    d = np.arange(1, d_max + 1, dtype=float)
    log_moment = d * math.log(sigma) + gammaln(d / 2.0 + 1.0)
    return float(np.max(np.exp(log_moment - d * np.log(d))))


def validate_ensemble(ensemble, d_max=D_MAX_DEFAULT):
    """Analytic verification of the density, variance, and moment
    conditions; raises EnsembleValidationError on failure.

    Returns a report dict with each condition's margin.
    """
    checks = {}
    if ensemble.kind == GAUSSIAN:
        if not (ensemble.sigma and ensemble.sigma > 0.0):
            raise EnsembleValidationError("Gaussian sigma must be positive")
        density_sup = 1.0 / (math.pi * ensemble.sigma ** 2)
        var_min = ensemble.sigma ** 2
        moment_const = _gaussian_moment_constant(ensemble.sigma, d_max)
    elif ensemble.kind == UNIFORM_DISK:
        rule, value = ensemble.radius_rule
        if not (value > 0.0):
            raise EnsembleValidationError("disk radius must be positive")
        r_min = ensemble.min_radius()
        density_sup = 1.0 / (math.pi * r_min * r_min)
        var_min = r_min * r_min / 2.0
        # with r_p <= d_p enforced at sampling, E|U|^d = 2 r^d/(d+2)
        # <= 2 d^d/(d+2) <= d^d; a constant rule can exceed d at small
        # d, so bound with the worst case d = 1
        r_max = value
        d = np.arange(1, d_max + 1, dtype=float)
        log_m = np.minimum(d * math.log(r_max), d * np.log(d)) \
            + math.log(2.0) - np.log(d + 2.0)
        moment_const = float(np.max(np.exp(log_m - d * np.log(d))))
    else:
        raise EnsembleValidationError(f"unknown ensemble kind "
                                      f"{ensemble.kind!r}")
    checks["density_sup"] = density_sup
    checks["density_ok"] = bool(density_sup <= ensemble.M0 * (1 + 1e-12))
    checks["variance_min"] = var_min
    checks["variance_ok"] = bool(var_min >= ensemble.c0 * (1 - 1e-12))
    checks["moment_constant"] = moment_const
    checks["moment_ok"] = bool(moment_const <= ensemble.C0 * (1 + 1e-12))
    checks["c0_positive"] = bool(ensemble.c0 > 0.0)
    checks["d_max"] = d_max
    checks["ok"] = bool(checks["density_ok"] and checks["variance_ok"]
                        and checks["moment_ok"] and checks["c0_positive"])
    if not checks["ok"]:
        raise EnsembleValidationError(
            f"ensemble conditions failed: {checks}")
    return checks


# ---------------------------------------------------------------------------
# seeded streams

_MASK32 = (1 << 32) - 1
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the (p, trial) -> stream derivation."""
    master: int

    def generator(self, p, trial):
        """Independent Philox stream for (master, p, trial)."""
        if p < 0 or trial < 0:
            raise ValueError("p and trial must be nonnegative")
        key = [self.master & _MASK64,
               ((p & _MASK32) << 32) | (trial & _MASK32)]
        return np.random.Generator(np.random.Philox(key=key))


def sample_coefficients(ensemble, d_p, seed, p, trial):
    """One coefficient vector; pure in (ensemble, d_p, seed, p, trial).

    Draws exactly 2*d_p uniforms from the stream regardless of the
    ensemble kind, so streams stay aligned across ensembles.
    """
    if d_p < 1:
        raise ValueError("d_p must be >= 1")
    gen = seed.generator(p, trial)
    u = gen.random((2, d_p))
    return _transform_uniforms(ensemble, d_p, u)


def _transform_uniforms(ensemble, d_p, u):
    if ensemble.kind == GAUSSIAN:
        # inverse-CDF keeps consumption fixed; clip away exact 0
        g = ndtri(np.clip(u, 1e-300, 1.0 - 1e-16))
        return (ensemble.sigma / math.sqrt(2.0)) * (g[0] + 1j * g[1])
    r_p = ensemble.radius(d_p)
    if r_p > d_p:
        raise EnsembleValidationError(
            f"uniform-disk radius {r_p} exceeds d_p={d_p}; the moment "
            "condition requires r_p <= d_p")
    return r_p * np.sqrt(u[0]) * np.exp((2j * math.pi) * u[1])


def sample_block(ensemble, d_p, seed, p, trials):
    """Coefficient matrix for a range of trials, one stream per trial."""
    out = np.empty((len(trials), d_p), dtype=complex)
    for i, t in enumerate(trials):
        out[i] = sample_coefficients(ensemble, d_p, seed, p, int(t))
    return out


# ---------------------------------------------------------------------------
# empirical reports

def moment_report(ensemble, d_p, n_samples, seed, chunk=4096):
    """Empirical per-coordinate and vector moments with standard errors.

    Samples n_samples coefficient vectors of length d_p from the
    reserved moment stream and compares against the analytic values and
    the C0 d^d bound.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    sums = np.zeros(4)
    sqs = np.zeros(4)
    count = 0
    chunk_idx = 0
    while count < n_samples:
        size = min(chunk, n_samples - count)
        gen = seed.generator(_MOMENT_STREAM_P, chunk_idx)
        u = gen.random((2, size * d_p)).reshape(2, size, d_p)
        eta = _transform_uniforms(ensemble, d_p, u.reshape(2, -1)) \
            .reshape(size, d_p)
        abs2 = np.abs(eta) ** 2
        vals = np.stack([
            abs2.mean(axis=1),
            (abs2 ** (d_p / 2.0)).mean(axis=1),
            abs2.sum(axis=1),
            abs2.sum(axis=1) ** (d_p / 2.0),
        ])
        sums += vals.sum(axis=1)
        sqs += (vals * vals).sum(axis=1)
        count += size
        chunk_idx += 1
    mean = sums / count
    se = np.sqrt(np.maximum(sqs / count - mean * mean, 0.0) / count)
    var = ensemble.variance(d_p)
    report = {
        "d_p": d_p,
        "n_samples": count,
        "E_abs2": {"value": mean[0], "std_error": se[0]},
        "E_abs_dp": {"value": mean[1], "std_error": se[1]},
        "E_norm2": {"value": mean[2], "std_error": se[2]},
        "E_norm_dp": {"value": mean[3], "std_error": se[3]},
        "analytic_E_abs2": var,
        "analytic_E_norm2": d_p * var,
        "moment_bound": ensemble.C0 * float(d_p) ** d_p,
    }
    if ensemble.kind == UNIFORM_DISK:
        r = ensemble.radius(d_p)
        report["analytic_E_abs_dp"] = 2.0 * r ** d_p / (d_p + 2.0)
    else:
        report["analytic_E_abs_dp"] = (ensemble.sigma ** d_p
                                       * math.exp(gammaln(d_p / 2.0 + 1.0)))
    report["flags"] = {
        "E_abs2_matches": bool(
            abs(mean[0] - var) <= 4.0 * se[0] + 1e-12),
        "E_norm2_in_bounds": bool(
            ensemble.c0 * d_p <= mean[2] + 4.0 * se[2]),
        "moment_bounded": bool(
            mean[1] <= report["moment_bound"] * (1 + 1e-9)),
    }
    return report


def marginal_bound(d_p, n, M0):
    """Density bound M0^n * binom(d_p, n) for an n-dim projection."""
    if not (0 <= n <= d_p):
        raise ValueError(f"need 0 <= n <= d_p, got n={n}, d_p={d_p}")
    if d_p <= 60:
        return float(M0 ** n * math.comb(d_p, n))
    log_binom = (gammaln(d_p + 1.0) - gammaln(n + 1.0)
                 - gammaln(d_p - n + 1.0))
    return float(math.exp(n * math.log(M0) + log_binom))


def _random_subspace(d_p, n, seed):
    gen = seed.generator(_SUBSPACE_STREAM_P, 0)
    a = gen.standard_normal((d_p, n)) + 1j * gen.standard_normal((d_p, n))
    q, _ = np.linalg.qr(a)
    return q[:, :n].T.conj()


def marginal_density_probe(ensemble, d_p, n, n_samples, seed,
                           subspace=None, chunk=65536):
    """Histogram estimate of the projected-coefficient density sup.

    Projects onto an n-dim subspace (random if not given) and bins the
    2n real coordinates; the estimate is the max cell frequency over
    cell volume, an underestimate of the true sup by cell averaging.
    """
    if d_p > 4 or n > 2 or n < 1:
        raise ValueError("histogram probe supports d_p <= 4, 1 <= n <= 2")
    if subspace is None:
        v = _random_subspace(d_p, n, seed)
    else:
        v = np.asarray(subspace, dtype=complex).reshape(n, d_p)
        gram = v @ v.conj().T
        if np.max(np.abs(gram - np.eye(n))) > 1e-10:
            raise ValueError("subspace rows must be orthonormal")
    bound = marginal_bound(d_p, n, ensemble.M0)
    if ensemble.kind == GAUSSIAN:
        half_width = 5.0 * ensemble.sigma
    else:
        half_width = ensemble.radius(d_p) * math.sqrt(d_p)
    bins_per_axis = 25 if n == 1 else 12
    edges = [np.linspace(-half_width, half_width, bins_per_axis + 1)] \
        * (2 * n)
    cell_vol = (2.0 * half_width / bins_per_axis) ** (2 * n)
    # demand enough samples that the max cell is not shot-noise limited
    if bound * cell_vol * n_samples < 100.0:
        raise ValueError(
            "sample count too small for the histogram resolution: "
            f"expected max-cell count {bound * cell_vol * n_samples:.1f}")
    counts = np.zeros([bins_per_axis] * (2 * n))
    done = 0
    chunk_idx = 0
    while done < n_samples:
        size = min(chunk, n_samples - done)
        gen = seed.generator(_MOMENT_STREAM_P, 1_000_000 + chunk_idx)
        u = gen.random((2, size * d_p)).reshape(2, size, d_p)
        eta = _transform_uniforms(ensemble, d_p, u.reshape(2, -1)) \
            .reshape(size, d_p)
        w = eta @ v.T
        coords = np.column_stack([w.real, w.imag] if n == 1 else
                                 [w[:, 0].real, w[:, 0].imag,
                                  w[:, 1].real, w[:, 1].imag])
        h, _ = np.histogramdd(coords, bins=edges)
        counts += h
        done += size
        chunk_idx += 1
    max_count = float(np.max(counts))
    estimate = max_count / (n_samples * cell_vol)
    std_error = math.sqrt(max_count) / (n_samples * cell_vol)
    return {
        "estimate": estimate,
        "std_error": std_error,
        "bound": bound,
        "n_samples": n_samples,
        "bins_per_axis": bins_per_axis,
        "cell_volume": cell_vol,
        "ok": bool(estimate <= bound * 1.2),
    }
