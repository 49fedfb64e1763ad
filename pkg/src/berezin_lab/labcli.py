"""Experiment runner: config parsing, orchestration, CSV/JSON reports.

All experiments are byte-deterministic: identical configs (seeds included)
produce identical CSV output.  No timestamps or environment-dependent values
enter the tables; floats are written as shortest round-trip decimals.

CLI: ``berezin-lab <experiment> --config file.json [--out dir] [--seed n]
[--threads n]``, with flags overriding config-file keys.  Exit codes:
0 success, 2 when a verdict comes back failing/inconsistent, 1 on any error
(including config schema violations, which are reported with their JSON
path on stderr).
"""

import argparse
import csv
import hashlib
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import jsonschema

from . import __version__, _accel
from .bergman import (KernelEvaluator, build_inflated_space, build_space,
                      inflation_kernel_residuals, kernel_mass_outside,
                      multiindices)
from .domains import (PointKind, boundary_point, classify_boundary,
                      domain_from_config, sample_boundary)
from .errors import LabError, ParameterError, SchemaError
from .operators import (OperatorExpr, axler_zheng_report, boundary_profile,
                        expr_from_json, product_decomposition_residual,
                        semi_commutator_residual, toeplitz)
from .quadrature import (WeightedMeasure, inflation_constant,
                         inflation_constant_mc, monomial_moment,
                         monomial_moment_mc, polar_tensor_rule)
from .symbols import Symbol

EXPERIMENTS = ("kernel-check", "inflation-check", "moments", "berezin-profile",
               "semi-commutator", "axler-zheng", "classify", "constants")


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------

@dataclass
class Table:
    columns: list
    rows: list


@dataclass
class Report:
    experiment: str
    metadata: dict
    tables: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def failed(self):
        if self.verdicts.get("verdict") == "inconsistent":
            return True
        return self.verdicts.get("pass") is False


def canonical_config_hash(config):
    """sha256 over the canonical (sorted, compact) JSON serialization.

    Run-location keys (out, threads) do not affect results and are excluded,
    so reruns of the same experiment hash identically wherever they write.
    """
    semantic = {k: v for k, v in config.items() if k not in ("out", "threads")}
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _fmt_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def emit(report, fmt, out_dir):
    """Write report files; CSV gets one file per table, JSON mirrors all tables."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    prefix = report.experiment.replace("-", "_")
    if fmt == "csv":
        for name, table in report.tables.items():
            path = os.path.join(out_dir, f"{prefix}_{name}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(table.columns)
                for row in table.rows:
                    writer.writerow([_fmt_cell(x) for x in row])
            written.append(path)
        return written
    if fmt == "json":
        path = os.path.join(out_dir, f"{prefix}_report.json")
        payload = {
            "metadata": _jsonify(report.metadata),
            "tables": {name: {"columns": t.columns,
                              "rows": [[_json_cell(x) for x in row] for row in t.rows]}
                       for name, t in report.tables.items()},
            "verdicts": _jsonify(report.verdicts),
            "warnings": list(report.warnings),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
        return [path]
    raise ParameterError(f"unknown report format {fmt!r}")


def _json_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return _json_cell(obj)


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

_POINT = {"oneOf": [
    {"type": "number"},
    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                "minItems": 2, "maxItems": 2}},
]}

_TGRID = {"oneOf": [
    {"type": "array", "items": {"type": "number"}, "minItems": 1},
    {"type": "object",
     "properties": {"start": {"type": "number"}, "stop": {"type": "number"},
                    "count": {"type": "integer", "minimum": 1}},
     "required": ["start", "stop", "count"], "additionalProperties": False},
]}

_DOMAIN = {"type": "object",
           "properties": {"name": {"type": "string"}},
           "required": ["name"]}

_COMMON = {
    "experiment": {"type": "string", "enum": list(EXPERIMENTS)},
    "out": {"type": "string"},
    "seed": {"type": "integer"},
    "threads": {"type": "integer", "minimum": 1},
}


def _schema(props, required=()):
    full = dict(_COMMON)
    full.update(props)
    return {"type": "object", "properties": full,
            "required": list(required), "additionalProperties": False}


SCHEMAS = {
    "constants": _schema({
        "pairs": {"type": "array",
                  "items": {"type": "array", "items": {"type": "number"},
                            "minItems": 2, "maxItems": 2}},
        "p": {"type": "integer", "minimum": 1},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "samples": {"type": "integer", "minimum": 1000},
    }),
    "kernel-check": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "minimum": 0},
        "N": {"type": "integer", "minimum": 1},
        "grid_points": {"type": "integer", "minimum": 2},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "phase": {"type": "number"},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    }, required=("domain",)),
    "inflation-check": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "exclusiveMinimum": 0},
        "p": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "grid_points": {"type": "integer", "minimum": 2},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "phase": {"type": "number"},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    }, required=("domain", "r", "p")),
    "moments": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "minimum": 0},
        "N": {"type": "integer", "minimum": 0},
        "alphas": {"type": "array",
                   "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "mc": {"type": "boolean"},
        "samples": {"type": "integer", "minimum": 1000},
    }, required=("domain",)),
    "berezin-profile": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "minimum": 0},
        "N": {"type": "integer", "minimum": 1},
        "symbol": {"type": "string"},
        "point": _POINT,
        "t_grid": _TGRID,
        "expect_limit": {"type": "number"},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "snap_points": {"type": "boolean"},
        "mass_outside": {"type": "object",
                         "properties": {"center": _POINT,
                                        "radius": {"type": "number", "exclusiveMinimum": 0},
                                        "quad_order": {"type": "integer", "minimum": 8},
                                        "tolerance": {"type": "number", "exclusiveMinimum": 0}},
                         "required": ["center", "radius"],
                         "additionalProperties": False},
    }, required=("domain", "symbol", "point")),
    "semi-commutator": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "minimum": 0},
        "N": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 0},
        "margin_pairs": {"type": "integer", "minimum": 0},
        "margin_triples": {"type": "integer", "minimum": 0},
        "include_triples": {"type": "boolean"},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    }, required=("domain",)),
    "axler-zheng": _schema({
        "domain": _DOMAIN,
        "r": {"type": "number", "minimum": 0},
        "N": {"type": "integer", "minimum": 1},
        "operator": {"type": "object"},
        "symbol": {"type": "string"},
        "strong_points": {"type": "array", "items": _POINT, "minItems": 1},
        "weak_points": {"type": "array", "items": _POINT},
        "t_grid": _TGRID,
        "thresholds": {"type": "object",
                       "properties": {"berezin": {"type": "number"},
                                      "tail": {"type": "number"},
                                      "window": {"type": "integer", "minimum": 2}},
                       "additionalProperties": False},
        "tail_k": {"type": "integer", "minimum": 0},
        "validate_points": {"type": "boolean"},
        "snap_points": {"type": "boolean"},
    }, required=("domain", "strong_points")),
    "classify": _schema({
        "domain": _DOMAIN,
        "count": {"type": "integer", "minimum": 1},
        "tolerance": {"type": "number"},
    }, required=("domain",)),
}


def validate_config(experiment, config):
    if experiment not in EXPERIMENTS:
        raise SchemaError(f"unknown experiment {experiment!r}")
    if "experiment" in config and config["experiment"] != experiment:
        raise SchemaError(
            f"config experiment {config['experiment']!r} does not match {experiment!r}")
    try:
        jsonschema.validate(config, SCHEMAS[experiment])
    except jsonschema.ValidationError as exc:
        path = "$" + "".join(f"[{p!r}]" for p in exc.absolute_path)
        raise SchemaError(f"config field {path}: {exc.message}") from exc


# ---------------------------------------------------------------------------
# config helpers
# ---------------------------------------------------------------------------

def _to_point(spec, dim):
    """Decode a point: number, [re, im], or [[re, im], ...]."""
    if isinstance(spec, (int, float)):
        vec = [complex(spec)]
    elif spec and isinstance(spec[0], (int, float)):
        vec = [complex(spec[0], spec[1])]
    else:
        vec = [complex(p[0], p[1]) for p in spec]
    if len(vec) != dim:
        raise SchemaError(f"point {spec} has {len(vec)} coordinates, expected {dim}")
    return np.array(vec, dtype=np.complex128)


def _snap_to_boundary(dom, point, band=0.01):
    """Rescale a nearly-boundary point onto the boundary along its ray.

    Config files cannot carry boundary coordinates to the 1e-10 membership
    band, so points within |rho| <= band are projected; anything farther
    inside/outside is left alone for classify_boundary to reject.
    """
    if abs(float(dom.rho(point))) <= band:
        return boundary_point(dom, point)
    return point


def _to_tgrid(spec):
    if spec is None:
        return np.concatenate([np.linspace(0.5, 0.95, 10),
                               np.linspace(0.96, 0.995, 6)])
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], spec["count"])
    return np.asarray(spec, dtype=float)


def _monomial_symbols(dim, degree):
    """All z^gamma zbar^delta with total degree <= degree, deterministic order."""
    syms = []
    for combo in multiindices(2 * dim, degree):
        gamma = tuple(int(x) for x in combo[:dim])
        delta = tuple(int(x) for x in combo[dim:])
        syms.append(Symbol.from_monomials({(gamma, delta): 1.0}, dim))
    return syms


def _closed_form_kernel(domain, r):
    """(z, w) -> K^r(z, w) for disk and balls, else None."""
    if domain.exponents is None or any(q != 2.0 for q in domain.exponents):
        return None
    n = domain.dim
    from scipy.special import gammaln
    const = np.exp(gammaln(n + 1 + r) - gammaln(r + 1)) / np.pi ** n

    def closed(z, w):
        inner = np.sum(np.atleast_2d(z) * np.conj(np.atleast_2d(w)), axis=1)
        return const * (1.0 - inner) ** (-(n + 1 + r))

    return closed


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _run_constants(config, report):
    pairs = config.get("pairs")
    if pairs is None:
        if "p" not in config or "r" not in config:
            raise SchemaError("constants needs either 'pairs' or both 'p' and 'r'")
        pairs = [[config["p"], config["r"]]]
    samples = int(config.get("samples", 10_000_000))
    seed = int(config.get("seed", 42))
    rows = []
    all_within = True
    exact_ok = True
    for p, r in pairs:
        p = int(p)
        cf = inflation_constant(p, r)
        mc = inflation_constant_mc(p, r, samples=samples, seed=seed)
        sigmas = abs(cf - mc.value) / mc.stderr if mc.stderr > 0 else 0.0
        within = sigmas <= 3.0
        all_within &= within
        exact_err = abs(cf - np.pi ** p / math.factorial(p)) if p == r else ""
        if p == r:
            exact_ok &= exact_err <= 1e-12 * cf
        rows.append([p, float(r), cf, mc.value, mc.stderr, abs(cf - mc.value),
                     sigmas, within, exact_err])
    report.tables["constants"] = Table(
        ["p", "r", "closed_form", "mc_estimate", "mc_stderr", "abs_diff",
         "sigmas", "within_3_sigma", "exact_check_p_eq_r"], rows)
    report.verdicts = {"pass": bool(all_within and exact_ok),
                       "within_3_sigma": bool(all_within),
                       "exact_p_eq_r": bool(exact_ok)}


def _run_kernel_check(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config.get("r", 0.0))
    n_grid = int(config.get("grid_points", 10))
    radius = float(config.get("radius", 0.8))
    phase = float(config.get("phase", 0.3))
    tol = float(config.get("tolerance", 1e-8))
    nn = int(config.get("N", 64))
    closed = _closed_form_kernel(dom, r)
    if closed is None:
        raise ParameterError(
            f"kernel-check requires a disk/ball domain with a closed-form kernel, "
            f"got {dom.name}")
    space = build_space(WeightedMeasure(dom, r), nn)
    ev = KernelEvaluator(space)
    # ray grid: phases aligned so z wbar >= 0; anti-aligned pairs at these
    # truncations sit below the closed-form magnitude and fail the relative
    # tolerance for structural (not numerical) reasons
    ts = radius * np.arange(n_grid) / (n_grid - 1)
    u = np.exp(1j * phase) * np.ones(dom.dim) / np.sqrt(dom.dim)
    rows = []
    worst = 0.0
    for tz, tw in itertools.product(ts, ts):
        z, w = tz * u, tw * u
        kt = ev.kernel(z, w)
        kc = complex(closed(z[None, :], w[None, :])[0])
        err = abs(kt - kc) / abs(kc)
        worst = max(worst, err)
        rows.append([float(tz), float(tw), err])
    report.tables["residuals"] = Table(["t_z", "t_w", "rel_err"], rows)
    report.verdicts = {"pass": bool(worst < tol), "max_rel_err": worst,
                       "tolerance": tol}


def _run_inflation_check(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config["r"])
    p = int(config["p"])
    nn = int(config.get("N", 32))
    n_grid = int(config.get("grid_points", 8))
    radius = float(config.get("radius", 0.6))
    phase = float(config.get("phase", 0.2))
    tol = float(config.get("tolerance", 1e-8))
    space = build_space(WeightedMeasure(dom, r), nn)
    infl_space = build_inflated_space(space, p)
    ts = radius * np.arange(n_grid) / (n_grid - 1)
    u = np.exp(1j * phase) * np.ones(dom.dim) / np.sqrt(dom.dim)
    zs, xis = [], []
    for tz, tx in itertools.product(ts, ts):
        zs.append(tz * u)
        xis.append(tx * u)
    zs = np.array(zs)
    xis = np.array(xis)
    resid, kb, ki = inflation_kernel_residuals(space, p, zs, xis, infl_space=infl_space)
    closed = _closed_form_kernel(dom, r)
    c = inflation_constant(p, r)
    rows = []
    worst_closed = 0.0
    for i, (tz, tx) in enumerate(itertools.product(ts, ts)):
        if closed is not None:
            kc = complex(closed(zs[i][None, :], xis[i][None, :])[0])
            cerr = abs(c * ki[i] - kc) / abs(kc)
            worst_closed = max(worst_closed, cerr)
        else:
            cerr = float("nan")
        rows.append([float(tz), float(tx), float(resid[i]), cerr])
    report.tables["residuals"] = Table(
        ["t_z", "t_xi", "identity_residual", "closed_form_residual"], rows)
    ok = float(np.max(resid)) < tol and (closed is None or worst_closed < tol)
    report.verdicts = {"pass": bool(ok),
                       "max_identity_residual": float(np.max(resid)),
                       "max_closed_form_residual": worst_closed if closed else None,
                       "constant": c, "tolerance": tol}


def _run_moments(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config.get("r", 0.0))
    measure = WeightedMeasure(dom, r)
    if "alphas" in config:
        alphas = [tuple(a) for a in config["alphas"]]
        for a in alphas:
            if len(a) != dom.dim:
                raise SchemaError(f"multiindex {a} has wrong length for {dom.name}")
    else:
        alphas = [tuple(int(x) for x in a)
                  for a in multiindices(dom.dim, int(config.get("N", 8)))]
    mc = bool(config.get("mc", False))
    samples = int(config.get("samples", 1_000_000))
    seed = int(config.get("seed", 42))
    rows = []
    ok = True
    for i, a in enumerate(alphas):
        m = monomial_moment(measure, a)
        if mc:
            est = monomial_moment_mc(measure, a, samples=samples, seed=seed + i)
            sig = abs(m - est.value) / est.stderr if est.stderr > 0 else 0.0
            ok &= sig <= 4.0
            rows.append([";".join(map(str, a)), m, est.value, est.stderr, sig])
        else:
            rows.append([";".join(map(str, a)), m, "", "", ""])
    report.tables["moments"] = Table(
        ["alpha", "moment", "mc_estimate", "mc_stderr", "sigmas"], rows)
    report.verdicts = {"pass": bool(ok)}


def _run_berezin_profile(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config.get("r", 0.0))
    nn = int(config.get("N", 96 if dom.dim == 1 else 16))
    space = build_space(WeightedMeasure(dom, r), nn)
    sym = Symbol.parse(config["symbol"], dom.dim)
    p0 = _to_point(config["point"], dom.dim)
    if config.get("snap_points", True):
        p0 = _snap_to_boundary(dom, p0)
    t_grid = _to_tgrid(config.get("t_grid"))
    op = toeplitz(space, sym)
    prof = boundary_profile(op, p0, t_grid)
    rows = [[s.t, s.value.real, s.value.imag, s.trunc_flag] for s in prof]
    report.tables["profile"] = Table(
        ["t", "re_berezin", "im_berezin", "trunc_flag"], rows)
    for s in prof:
        if s.trunc_flag:
            report.warnings.append(
                f"t={s.t!r}: -rho below interior accuracy contract; "
                f"top-degree kernel share {s.tail_fraction:.3e}")
    verdicts = {"terminal": abs(prof[-1].value)}
    if "expect_limit" in config:
        tol = float(config.get("tolerance", 0.05))
        err = abs(prof[-1].value - config["expect_limit"])
        verdicts.update({"pass": bool(err < tol), "limit_error": err,
                         "tolerance": tol})
    if "mass_outside" in config:
        mo = config["mass_outside"]
        if dom.dim != 1:
            raise ParameterError("mass_outside is implemented for 1-dimensional domains")
        center = _to_point(mo["center"], dom.dim)
        radius = float(mo["radius"])
        order = int(mo.get("quad_order", 256))
        rule = polar_tensor_rule(space.measure, radial_order=order,
                                 angular_order=2 * order)
        ev = KernelEvaluator(space)
        rows = []
        for t in t_grid:
            mass = kernel_mass_outside(ev, float(t) * p0, center, radius, rule)
            rows.append([float(t), mass])
        report.tables["mass_outside"] = Table(["t", "off_mass"], rows)
        if "tolerance" in mo:
            mtol = float(mo["tolerance"])
            verdicts["mass_terminal"] = rows[-1][1]
            verdicts["pass"] = bool(verdicts.get("pass", True)
                                    and rows[-1][1] < mtol)
    report.verdicts = verdicts


def _run_semi_commutator(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config.get("r", 0.0))
    nn = int(config.get("N", 32))
    degree = int(config.get("degree", 2))
    margin_pairs = int(config.get("margin_pairs", degree))
    margin_triples = int(config.get("margin_triples", 3 * degree))
    tol = float(config.get("tolerance", 1e-9))
    include_triples = bool(config.get("include_triples", True))
    space = build_space(WeightedMeasure(dom, r), nn)
    syms = _monomial_symbols(dom.dim, degree)
    rows = []
    worst = 0.0
    for s2, s1 in itertools.product(syms, syms):
        resid = semi_commutator_residual(space, s2, s1, margin_pairs)
        worst = max(worst, resid)
        rows.append([s2.text, s1.text, resid])
    report.tables["pairs"] = Table(["sym2", "sym1", "residual"], rows)
    if include_triples:
        rows3 = []
        for s3, s2, s1 in itertools.product(syms, syms, syms):
            resid = product_decomposition_residual(space, [s3, s2, s1],
                                                   margin_triples)
            worst = max(worst, resid)
            rows3.append([s3.text, s2.text, s1.text, resid])
        report.tables["triples"] = Table(["sym3", "sym2", "sym1", "residual"], rows3)
    report.verdicts = {"pass": bool(worst < tol), "max_residual": worst,
                       "tolerance": tol}


def _run_axler_zheng(config, report):
    dom = domain_from_config(config["domain"])
    r = float(config.get("r", 0.0))
    nn = int(config.get("N", 16))
    space = build_space(WeightedMeasure(dom, r), nn)
    if "operator" in config:
        expr = expr_from_json(config["operator"], dom.dim)
    elif "symbol" in config:
        expr = OperatorExpr.toeplitz(Symbol.parse(config["symbol"], dom.dim))
    else:
        raise SchemaError("axler-zheng needs 'operator' or 'symbol'")
    strong = [_to_point(p, dom.dim) for p in config["strong_points"]]
    weak = [_to_point(p, dom.dim) for p in config.get("weak_points", [])]
    if config.get("snap_points", True):
        strong = [_snap_to_boundary(dom, p) for p in strong]
        weak = [_snap_to_boundary(dom, p) for p in weak]
    pt_rows = []
    if config.get("validate_points", True):
        for role, pts, want in (("strong", strong, PointKind.STRONGLY_PSEUDOCONVEX),
                                ("weak", weak, PointKind.WEAKLY_PSEUDOCONVEX)):
            for i, p in enumerate(pts):
                cls = classify_boundary(dom, p)
                if cls.kind is not want:
                    raise ParameterError(
                        f"{role} point #{i} {p} classified {cls.kind.value}")
                pt_rows.append([role, i, cls.kind.value,
                                cls.min_tangential_eigenvalue])
    thr = config.get("thresholds", {})
    az_cfg = {
        "berezin_threshold": float(thr.get("berezin", 0.1)),
        "tail_threshold": float(thr.get("tail", 0.5)),
        "decreasing_window": int(thr.get("window", 5)),
        "tail_k": config.get("tail_k"),
        "t_grid": _to_tgrid(config.get("t_grid")),
    }
    rep = axler_zheng_report(expr, space, strong, weak, az_cfg)
    for name, profs in (("strong_profiles", rep.strong_profiles),
                        ("weak_profiles", rep.weak_profiles)):
        rows = []
        for i, (_, prof) in enumerate(profs):
            for s in prof:
                rows.append([i, s.t, s.value.real, s.value.imag, s.trunc_flag])
        report.tables[name] = Table(
            ["point_index", "t", "re_berezin", "im_berezin", "trunc_flag"], rows)
    report.tables["tails"] = Table(
        ["k", "tail_norm"], [[k, v] for k, v in rep.tail_curve])
    if pt_rows:
        report.tables["points"] = Table(
            ["role", "index", "kind", "min_tangential_eigenvalue"], pt_rows)
    report.verdicts = {
        "verdict": rep.verdict,
        "classification": rep.classification,
        "strong_terminal_sup": rep.strong_terminal_sup,
        "berezin_vanishing": rep.berezin_vanishing,
        "tail_k": rep.tail_k,
        "tail_value": rep.tail_value,
        "tail_vanishing": rep.tail_vanishing,
    }


def _run_classify(config, report):
    dom = domain_from_config(config["domain"])
    count = int(config.get("count", 64))
    seed = int(config.get("seed", 0))
    tol = config.get("tolerance")
    pts = sample_boundary(dom, count, seed=seed)
    rows = []
    for p in pts:
        cls = classify_boundary(dom, p, tol=tol)
        row = []
        for c in p:
            row.extend([c.real, c.imag])
        row.extend([cls.kind.value, cls.min_tangential_eigenvalue,
                    cls.tolerance_used])
        rows.append(row)
    cols = []
    for j in range(dom.dim):
        cols.extend([f"p{j+1}_re", f"p{j+1}_im"])
    cols.extend(["kind", "min_tangential_eigenvalue", "tolerance_used"])
    report.tables["points"] = Table(cols, rows)
    n_weak = sum(1 for row in rows if row[-3] == PointKind.WEAKLY_PSEUDOCONVEX.value)
    report.verdicts = {"pass": True, "n_points": len(rows), "n_weak": n_weak}


_RUNNERS = {
    "constants": _run_constants,
    "kernel-check": _run_kernel_check,
    "inflation-check": _run_inflation_check,
    "moments": _run_moments,
    "berezin-profile": _run_berezin_profile,
    "semi-commutator": _run_semi_commutator,
    "axler-zheng": _run_axler_zheng,
    "classify": _run_classify,
}


def run(experiment, config, write=True):
    """Validate, execute, and (optionally) write one experiment.

    Returns the Report; files go to config['out'] (default 'reports') in both
    CSV and JSON forms.
    """
    validate_config(experiment, config)
    # recorded for provenance; the numeric kernels are single-threaded and
    # all reductions use fixed orderings, so results never depend on this
    threads = config.get("threads") or os.environ.get("BEREZIN_LAB_THREADS")
    report = Report(experiment, metadata={
        "experiment": experiment,
        "config_hash": canonical_config_hash(config),
        "version": __version__,
        "backend": _accel.backend_name(),
        "threads": int(threads) if threads else None,
    })
    _RUNNERS[experiment](config, report)
    if write:
        out = config.get("out", "reports")
        emit(report, "csv", out)
        emit(report, "json", out)
    return report


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="berezin-lab",
        description="Weighted Bergman-space experiment runner")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="seed override")
        sp.add_argument("--threads", type=int, help="worker count override")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        print(f"config parse error in {args.config}: line {exc.lineno} "
              f"column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return 1
    if not isinstance(config, dict):
        print("config must be a JSON object", file=sys.stderr)
        return 1
    for key in ("out", "seed", "threads"):
        val = getattr(args, key)
        if val is not None:
            config[key] = val
    try:
        report = run(args.experiment, config)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 2 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
