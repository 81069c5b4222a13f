"""Command-line entry points.

    secgeom COMMAND --config PATH [--workers N] [--seed S] [--out DIR]

Commands: model-check (verify curvature and cusp conditions; exit 3 on
failure), basis (build and serialize an orthonormal basis), bergman
(kernel diagonal and near-diagonal diagnostics), experiment (run the
Monte Carlo experiment the config describes).

Config files are plain text, one dotted `key = value` per line; values
use JSON syntax where possible (numbers, lists, booleans) and bare
strings otherwise, `#` starts a comment.  Exit codes: 0 success, 2
invalid configuration (nothing is written), 3 model-condition failure.

Each run appends a fresh directory <out>/runs/<confighash>-<stamp>/ and
never overwrites existing files.  Reports embed the config hash and the
resolved configuration but no timestamps or worker counts, so one
config produces byte-identical reports at any --workers setting.
"""

import argparse
import dataclasses
import hashlib
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from secgeom import ensembles as ens
from secgeom import hilbert
from secgeom import models as geo
from secgeom import stats
from secgeom import zeros as zlib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONDITIONS = 3

CURVE_HEADER = ("p", "estimate", "ci_low", "ci_high", "n_trials",
                "n_events")

_RADIUS_RULE_RE = re.compile(r"^min\(\s*d_p\s*,\s*([0-9.eE+-]+)\s*\)$")


class ConfigError(ValueError):
    """The configuration is missing keys or has unusable values."""


class ModelConditionError(RuntimeError):
    """The model fails its curvature/cusp verification."""


# ---------------------------------------------------------------------------
# config parsing

def _parse_value(raw):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config(text):
    """Flat dict of dotted keys from `key = value` lines."""
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ConfigError(f"line {lineno}: expected `key = value`")
        if key in cfg:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        cfg[key] = _parse_value(raw)
    return cfg


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing required key {key!r}")
    return cfg[key]


def parse_radius_rule(value):
    """`min(d_p, X)` or a plain number (constant radius)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ("constant", float(value))
    if isinstance(value, str):
        m = _RADIUS_RULE_RE.match(value.strip())
        if m:
            return ("min_dp", float(m.group(1)))
    if isinstance(value, list) and len(value) == 2:
        return (str(value[0]), float(value[1]))
    raise ConfigError(f"cannot parse radius rule {value!r}; use a number "
                      "or min(d_p, X)")


def config_hash(cfg):
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:8]


# ---------------------------------------------------------------------------
# object construction from config

def build_model(cfg):
    kind = _require(cfg, "model.kind")
    degree = int(cfg.get("model.degree", 1))
    if kind in ("punctured_disk", "disk"):
        return geo.punctured_disk()
    if kind in ("sphere", "fubini_study_sphere"):
        return geo.fubini_study_sphere(degree)
    if kind == "cusped_sphere":
        blend = cfg.get("model.blend")
        if blend is None:
            return geo.cusped_sphere(degree)
        if not (isinstance(blend, list) and len(blend) == 2):
            raise ConfigError("model.blend must be [r_in, r_out]")
        return geo.cusped_sphere(degree, (float(blend[0]), float(blend[1])))
    raise ConfigError(f"unknown model.kind {kind!r}")


def build_ensemble(cfg):
    kind = _require(cfg, "ensemble.kind")
    if kind == "gaussian":
        return ens.complex_gaussian(float(cfg.get("ensemble.sigma", 1.0)))
    if kind == "uniform_disk":
        rule = parse_radius_rule(cfg.get("ensemble.radius_rule", 1.0))
        return ens.uniform_disk(rule)
    raise ConfigError(f"unknown ensemble.kind {kind!r}")


def build_seed(cfg, override=None):
    master = override if override is not None else cfg.get("seed.master")
    if master is None:
        raise ConfigError("seed.master is required (or pass --seed)")
    return ens.SeedSpec(master=int(master))


def _as_complex(value, what):
    if isinstance(value, (int, float)):
        return complex(value, 0.0)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{what} must be a number or [re, im]")


def build_region(cfg):
    kind = _require(cfg, "region.kind")
    if kind == "disk":
        center = _as_complex(cfg.get("region.center", 0.0), "region.center")
        return geo.ChartDisk(center=center,
                             radius=float(_require(cfg, "region.radius")))
    if kind == "annulus":
        return geo.ChartAnnulus(float(_require(cfg, "region.r_inner")),
                                float(_require(cfg, "region.r_outer")))
    raise ConfigError(f"unknown region.kind {kind!r}")


def build_phi(cfg):
    amplitude = float(cfg.get("phi.amplitude", 1.0))
    if cfg.get("phi.constant_one", False):
        return zlib.RadialTestFunction(constant_one=True,
                                       amplitude=amplitude)
    return zlib.RadialTestFunction(
        r_lo=float(_require(cfg, "phi.r_lo")),
        r_hi=float(_require(cfg, "phi.r_hi")),
        ramp=float(_require(cfg, "phi.ramp")),
        amplitude=amplitude)


def build_bases(cfg, model, p_values):
    truncation = cfg.get("basis.truncation")
    if truncation is not None:
        truncation = int(truncation)
    kwargs = {}
    if "basis.working_radius" in cfg:
        kwargs["working_radius"] = float(cfg["basis.working_radius"])
    return [hilbert.build_basis(model, int(p), truncation=truncation,
                                **kwargs)
            for p in p_values]


def _p_values(cfg, key="experiment.p_values"):
    raw = _require(cfg, key)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key} must be a non-empty list")
    ps = [int(p) for p in raw]
    if ps != sorted(ps) or len(set(ps)) != len(ps):
        raise ConfigError(f"{key} must be strictly increasing")
    return ps


def check_model_conditions(model):
    report = geo.verify_conditions(model)
    if not report["passes"]:
        raise ModelConditionError(
            f"min curvature ratio {report['min_curvature_ratio']:.6g} "
            f"(needs > 0), cusp deviation {report['cusp_max_deviation']}")
    return report


# ---------------------------------------------------------------------------
# output plumbing

def _jsonable(obj):
    if isinstance(obj, (stats.McEstimate, stats.DecayFit)):
        return _jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path, obj):
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=2)
                    + "\n")


def make_run_dir(out_dir, hash8):
    runs = Path(out_dir) / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    for i in range(10000):
        suffix = "" if i == 0 else f"-{i}"
        path = runs / f"{hash8}-{stamp}{suffix}"
        try:
            path.mkdir()
            return path
        except FileExistsError:
            continue
    raise ConfigError("could not allocate a fresh run directory")


_PRIMARY_ESTIMATE = {
    "supnorm": "tail",
    "equidistribution": "deviation",
    "hole": "hole",
    "test_function_ld": "deviation",
}


def _curve_rows(record):
    key = _PRIMARY_ESTIMATE.get(record.get("kind"))
    if key is None or "per_p" not in record:
        return []
    rows = []
    for entry in record["per_p"]:
        est = entry[key]
        rows.append((entry["p"], est.mean, est.ci95[0], est.ci95[1],
                     est.n_trials, est.n_events))
    return rows


def _format_cell(v):
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def write_curves(run_dir, record):
    rows = _curve_rows(record)
    if not rows:
        return
    csv_lines = [",".join(CURVE_HEADER)]
    dat_lines = ["# " + " ".join(CURVE_HEADER)]
    for row in rows:
        cells = [_format_cell(v) for v in row]
        csv_lines.append(",".join(cells))
        dat_lines.append(" ".join(cells))
    (run_dir / "curves.csv").write_text("\n".join(csv_lines) + "\n")
    (run_dir / "curves.dat").write_text("\n".join(dat_lines) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_model_check(cfg, args):
    model = build_model(cfg)
    report = geo.verify_conditions(model)
    doc = {"command": "model-check", "config": cfg,
           "config_hash": config_hash(cfg),
           "model": model.descriptor(), "report": report}
    if model.kind != geo.ModelKind.PUNCTURED_DISK:
        doc["total_chern_mass"] = geo.total_chern_mass(model)
    run_dir = make_run_dir(args.out, config_hash(cfg))
    write_json(run_dir / "model_check.json", doc)
    status = "pass" if report["passes"] else "FAIL"
    print(f"model-check {status}: min curvature ratio "
          f"{report['min_curvature_ratio']:.6g} -> {run_dir}")
    return EXIT_OK if report["passes"] else EXIT_CONDITIONS


def cmd_basis(cfg, args):
    model = build_model(cfg)
    check_model_conditions(model)
    p = int(_require(cfg, "basis.p"))
    [basis] = build_bases(cfg, model, [p])
    text = hilbert.basis_to_json(basis)
    recovered = hilbert.basis_from_json(text)
    roundtrip = (np.array_equal(recovered.log_sq_norms, basis.log_sq_norms)
                 and np.array_equal(recovered.exponents, basis.exponents))
    report = {"command": "basis", "config": cfg,
              "config_hash": config_hash(cfg),
              "p": basis.p, "d_p": basis.d_p,
              "truncated": basis.truncated,
              "gram_deviation": hilbert.verify_gram(basis),
              "roundtrip_exact": bool(roundtrip)}
    if not basis.truncated:
        report["dimension"] = hilbert.dimension_check(basis)
    else:
        report["truncation_tail"] = basis.truncation_tail
    run_dir = make_run_dir(args.out, config_hash(cfg))
    (run_dir / "basis.json").write_text(text + "\n")
    write_json(run_dir / "basis_report.json", report)
    print(f"basis p={basis.p} d_p={basis.d_p} gram_dev="
          f"{report['gram_deviation']:.3e} -> {run_dir}")
    return EXIT_OK


def cmd_bergman(cfg, args):
    model = build_model(cfg)
    check_model_conditions(model)
    p_values = _p_values(cfg, "bergman.p_values")
    bases = build_bases(cfg, model, p_values)
    x = _as_complex(_require(cfg, "bergman.x"), "bergman.x")
    direction = float(cfg.get("bergman.direction", 0.0))
    b_window = float(cfg.get("bergman.b", 4.0))
    rho_x = float(geo.volume_density(model, x))
    per_p = []
    csv_lines = ["p,chart_radius,dist,P_p,gaussian,ratio,in_regime"]
    for basis in bases:
        p = basis.p
        density = float(hilbert.bergman_density(basis, x))
        a_x = hilbert.curvature_ratio_scalar(model, x)
        # the kernel diagonal is itself a density against the volume
        # form, so the leading term carries no extra density factor
        leading = p * a_x / (2.0 * math.pi)
        if "bergman.radii" in cfg:
            radii = [float(t) for t in cfg["bergman.radii"]]
        else:
            chart_window = (b_window * math.sqrt(math.log(p) / p)
                            / math.sqrt(rho_x))
            radii = [chart_window * j / 8.0 for j in range(1, 13)]
        nd = hilbert.near_diagonal_report(basis, x, direction, radii,
                                          b=b_window)
        for row in nd["rows"]:
            csv_lines.append(",".join(_format_cell(v) for v in (
                p, row["chart_radius"], row["dist"], row["P_p"],
                row["gaussian"], row["ratio"], int(row["in_regime"]))))
        per_p.append({"p": p, "d_p": basis.d_p, "density": density,
                      "leading_order": leading,
                      "density_ratio": density / leading,
                      "near_diagonal": nd})
    doc = {"command": "bergman", "config": cfg,
           "config_hash": config_hash(cfg),
           "x": [x.real, x.imag], "per_p": per_p}
    run_dir = make_run_dir(args.out, config_hash(cfg))
    write_json(run_dir / "bergman.json", doc)
    (run_dir / "near_diagonal.csv").write_text("\n".join(csv_lines) + "\n")
    ratios = ", ".join(f"p={e['p']}: {e['density_ratio']:.4f}"
                       for e in per_p)
    print(f"bergman density/leading {ratios} -> {run_dir}")
    return EXIT_OK


def _run_experiment(cfg, args):
    kind = _require(cfg, "experiment.kind")
    model = build_model(cfg)
    check_model_conditions(model)
    ensemble = build_ensemble(cfg)
    seed = build_seed(cfg, args.seed)
    n_trials = int(_require(cfg, "experiment.n_trials"))
    if n_trials < 1:
        raise ConfigError("experiment.n_trials must be >= 1")
    p_values = _p_values(cfg)
    bases = build_bases(cfg, model, p_values)
    workers = max(1, int(args.workers))
    if kind == "variance":
        x = _as_complex(_require(cfg, "experiment.x"), "experiment.x")
        rows = [stats.variance_identity_check(b, ensemble, x, n_trials,
                                              seed, workers=workers)
                for b in bases]
        return {"kind": "variance_identity", "per_p": rows,
                "max_z_score": max(r["z_score"] for r in rows),
                "n_trials": n_trials}, bases, ensemble, seed
    if kind == "supnorm":
        region = build_region(cfg)
        grid = None
        if "grid.n_r" in cfg or "grid.n_theta" in cfg:
            grid = {"n_r": int(_require(cfg, "grid.n_r")),
                    "n_theta": int(_require(cfg, "grid.n_theta"))}
        record = stats.supnorm_experiment(
            bases, ensemble, region, n_trials, seed,
            delta=float(cfg.get("experiment.delta", 0.08)), grid=grid,
            workers=workers)
        return record, bases, ensemble, seed
    if kind == "equidistribution":
        record = stats.equidistribution_experiment(
            bases, ensemble, build_region(cfg), n_trials, seed,
            delta=float(cfg.get("experiment.delta", 0.1)), workers=workers)
        return record, bases, ensemble, seed
    if kind == "hole":
        record = stats.hole_experiment(bases, ensemble, build_region(cfg),
                                       n_trials, seed, workers=workers)
        return record, bases, ensemble, seed
    if kind == "test_function_ld":
        record = stats.test_function_ld_experiment(
            bases, ensemble, build_phi(cfg), n_trials, seed,
            delta=float(cfg.get("experiment.delta", 0.1)), workers=workers)
        return record, bases, ensemble, seed
    raise ConfigError(f"unknown experiment.kind {kind!r}")


def cmd_experiment(cfg, args):
    record, bases, ensemble, seed = _run_experiment(cfg, args)
    doc = {"command": "experiment", "config": cfg,
           "config_hash": config_hash(cfg),
           "seed_master": seed.master,
           "ensemble": ensemble.descriptor(),
           "model": bases[0].model.descriptor(),
           "result": record}
    run_dir = make_run_dir(args.out, config_hash(cfg))
    write_json(run_dir / "report.json", doc)
    write_curves(run_dir, record)
    if record["kind"] in ("equidistribution", "hole", "test_function_ld"):
        top = bases[-1]
        coeffs = ens.sample_coefficients(ensemble, top.d_p, seed, top.p, 0)
        zs = zlib.find_zeros(hilbert.RandomSection(top, coeffs))
        (run_dir / "sample_zeros.csv").write_text(zs.to_csv())
    print(f"experiment {record['kind']} done "
          f"(p={[b.p for b in bases]}, {record['n_trials']} trials) "
          f"-> {run_dir}")
    return EXIT_OK


_COMMANDS = {
    "model-check": cmd_model_check,
    "basis": cmd_basis,
    "bergman": cmd_bergman,
    "experiment": cmd_experiment,
}


def main(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="path to a key = value config file")
    common.add_argument("--workers", type=int, default=1,
                        help="worker processes (results are identical "
                        "for any value)")
    common.add_argument("--seed", type=int, default=None,
                        help="override seed.master from the config")
    common.add_argument("--out", default="out",
                        help="output root (runs are appended under "
                        "<out>/runs/)")
    parser = argparse.ArgumentParser(
        prog="secgeom",
        description="Random holomorphic section laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common])
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
        return _COMMANDS[args.command](cfg, args)
    except ModelConditionError as exc:
        print(f"model conditions failed: {exc}", file=sys.stderr)
        return EXIT_CONDITIONS
    except (ConfigError, geo.DomainError, ens.EnsembleValidationError,
            ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
