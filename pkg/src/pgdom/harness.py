"""Experiment runner: configuration, multi-seed rate fits, check suites, reports.

Command line::

    pgdom [--out DIR] [--jobs N] [--format {json,csv,both}] run CONFIG
    pgdom verify [--filter PATTERN]
    pgdom rates CONFIG
    pgdom lowerbound-demo --alpha A --tau T --g G --r R --eps E1,E2,... --seed S

Exit codes: 0 success, 2 a check or rate band failed, 3 bad configuration,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import fnmatch
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, InfeasiblePrecisionError, NumericFailure
from .geometry import Interval, indicator_prox
from .instances import (
    make_foster_instance,
    make_lower_bound_pair,
    make_nbs_instance,
    make_phi_kl_instance,
    make_power_instance,
    nbs_parameters,
)
from .oracles import PRNG_ALGORITHM, ExactGradient, FosterUniform, GaussianAdditive, NbsBernoulli, make_rng
from .optimizers import proj_sgd, proj_storm, prox_sgd
from .verifiers import (
    CheckReport,
    GridSpec,
    check_delta_recursion,
    check_poly_bound,
    check_variance_recursion,
    kl_per_step,
    verify_distance_bounds,
    verify_grad_dominance,
    verify_holder,
    verify_local_grad_dominance,
    verify_phi_kl,
    verify_projected_grad_dominance,
    verify_smoothness,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "ExperimentConfig",
    "RateReport",
    "fit_slope",
    "load_config",
    "lowerbound_demo",
    "main",
    "parse_config",
    "run_experiment",
    "run_verification_suite",
    "write_outputs",
]

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4
GAP_FLOOR = 1e-14
CALIBRATION_NOTE = "run budgets, seed counts and tolerance bands are calibration choices of this package"

# ---------------------------------------------------------------------------
# configuration

_SCHEMA = {
    "instance": {
        "kind": str, "alpha": float, "C": float, "R": float, "rho": float, "x0": object,
        "p": float, "G": float, "N": int, "j_star": int, "q": float,
        "m": int, "d": int, "basis_seed": int, "lam": float, "dim": int,
    },
    "oracle": {"kind": str, "sigma": float},
    "optimizer": {
        "kind": str, "eta0": object, "beta0": object, "a0": float, "b0": float,
        "alpha": float, "g0_batch": int, "enforce": bool,
    },
    "run": {"seeds": object, "T": list, "parallelism": int, "tol_T": float, "tol_Q": float},
    "output": {"dir": str, "format": str},
}
_REQUIRED = [("instance", "kind"), ("optimizer", "kind"), ("run", "seeds"), ("run", "T")]
_INSTANCES = ("f0", "f1", "nbs", "phi_kl", "foster", "power")
_ORACLES = ("gaussian", "exact", "nbs", "foster")
_OPTIMIZERS = ("proj_storm", "proj_sgd", "prox_sgd")
_FORMATS = ("json", "csv", "both")


@dataclass
class ExperimentConfig:
    instance: dict
    oracle: dict
    optimizer: dict
    seeds: list
    T: list
    parallelism: int = 1
    tol_T: float | None = None
    tol_Q: float | None = None
    out_dir: str | None = None
    fmt: str = "both"
    raw: dict = field(default_factory=dict)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a nested mapping; every problem is reported at once."""
    problems = []
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for sec, body in raw.items():
        if sec not in _SCHEMA:
            problems.append(f"unknown section '{sec}'")
            continue
        if not isinstance(body, dict):
            problems.append(f"section '{sec}' must be a table")
            continue
        for key, val in body.items():
            if key not in _SCHEMA[sec]:
                problems.append(f"unknown key '{sec}.{key}'")
                continue
            want = _SCHEMA[sec][key]
            if want is float and not (isinstance(val, (int, float)) and not isinstance(val, bool)):
                problems.append(f"'{sec}.{key}' must be a number")
            elif want is int and not (isinstance(val, int) and not isinstance(val, bool)):
                problems.append(f"'{sec}.{key}' must be an integer")
            elif want in (str, bool, list) and not isinstance(val, want):
                problems.append(f"'{sec}.{key}' must be of type {want.__name__}")
    for sec, key in _REQUIRED:
        if key not in raw.get(sec, {}):
            problems.append(f"missing required key '{sec}.{key}'")
    if problems:
        raise ConfigError(problems)

    inst = dict(raw.get("instance", {}))
    orc = dict(raw.get("oracle", {}))
    opt = dict(raw.get("optimizer", {}))
    run = dict(raw.get("run", {}))
    out = dict(raw.get("output", {}))
    if inst["kind"] not in _INSTANCES:
        problems.append(f"instance.kind must be one of {_INSTANCES}")
    orc.setdefault("kind", "gaussian")
    if orc["kind"] not in _ORACLES:
        problems.append(f"oracle.kind must be one of {_ORACLES}")
    if opt["kind"] not in _OPTIMIZERS:
        problems.append(f"optimizer.kind must be one of {_OPTIMIZERS}")
    for key in ("eta0", "beta0"):
        v = opt.get(key, "auto")
        if v != "auto" and not (isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0):
            problems.append(f"optimizer.{key} must be 'auto' or a positive number")
    seeds = run["seeds"]
    if isinstance(seeds, int) and not isinstance(seeds, bool):
        seeds = list(range(seeds))
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        problems.append("run.seeds must be a nonempty list of integers or a positive count")
        seeds = []
    T = run["T"]
    if not T or not all(isinstance(t, int) and t >= 1 for t in T):
        problems.append("run.T must be a nonempty list of positive integers")
    elif any(b <= a for a, b in zip(T, T[1:])):
        problems.append("run.T must be strictly increasing")
    par = run.get("parallelism", 1)
    if par < 1:
        problems.append("run.parallelism must be positive")
    fmt = out.get("format", "both")
    if fmt not in _FORMATS:
        problems.append(f"output.format must be one of {_FORMATS}")
    if problems:
        raise ConfigError(problems)
    cfg = ExperimentConfig(
        instance=inst, oracle=orc, optimizer=opt, seeds=seeds, T=list(T), parallelism=par,
        tol_T=run.get("tol_T"), tol_Q=run.get("tol_Q"), out_dir=out.get("dir"), fmt=fmt, raw=raw,
    )
    try:
        _build(cfg, 0)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid experiment: {exc}") from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# experiment construction


def _objective(inst: dict):
    kind = inst["kind"]
    if kind in ("f0", "f1"):
        pair = make_lower_bound_pair(inst.get("alpha", 1.5), inst.get("C", 1.0), inst.get("R", 1.0),
                                     inst.get("rho", 0.1))
        return getattr(pair, kind), pair.domain
    if kind == "nbs":
        f = make_nbs_instance(inst.get("alpha", 2.0), inst["p"], inst.get("G", 1.0), inst.get("R", 1.0),
                              inst["N"], inst.get("j_star", 1))
        return f, f.domain
    if kind == "phi_kl":
        f = make_phi_kl_instance(inst.get("q", 2.0), inst["p"], inst.get("G", 1.0), inst.get("R", 1.0),
                                 inst["N"], inst.get("j_star", 1))
        return f, f.domain
    if kind == "foster":
        f = make_foster_instance(inst.get("sigma_", 1.0), inst.get("R", 1.0), inst.get("m", 4),
                                 inst.get("d", inst.get("m", 4)), inst.get("basis_seed", 0))
        return f, f.domain
    dim = inst.get("dim", 1)
    R = inst.get("R", 1.0)
    from .geometry import Box

    dom = Box(-R * np.ones(dim), R * np.ones(dim))
    return make_power_instance(inst.get("alpha", 2.0), inst.get("lam", 1.0), np.zeros(dim), dom), dom


def _build(cfg: ExperimentConfig, seed: int):
    inst = dict(cfg.instance)
    sigma = float(cfg.oracle.get("sigma", 1.0))
    if inst["kind"] == "foster":
        inst["sigma_"] = sigma
    F, domain = _objective(inst)
    okind = cfg.oracle["kind"]
    if okind == "gaussian":
        oracle = GaussianAdditive(F, sigma, seed)
    elif okind == "exact":
        oracle = ExactGradient(F, seed)
    elif okind == "nbs":
        if inst["kind"] not in ("nbs", "phi_kl"):
            raise ValueError("the nbs oracle needs an nbs or phi_kl instance")
        oracle = NbsBernoulli(F, seed)
    else:
        if inst["kind"] != "foster":
            raise ValueError("the foster oracle needs the foster instance")
        oracle = FosterUniform(F, seed)
    x0 = inst.get("x0")
    if x0 is None:
        x0 = [domain.lo] if isinstance(domain, Interval) else np.zeros(domain.dim)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    return F, domain, oracle, x0


def _schedule_alpha(cfg):
    opt, inst = cfg.optimizer, cfg.instance
    return float(opt.get("alpha", inst.get("alpha", 1.0 if inst["kind"] == "foster" else 2.0)))


def _step_sizes(cfg, F):
    opt = cfg.optimizer
    cert = F.constants
    L = None if cert is None else cert.L
    eta0 = opt.get("eta0", "auto")
    if eta0 == "auto":
        if L is None:
            raise ValueError("optimizer.eta0 = 'auto' needs a known smoothness constant")
        if opt["kind"] == "proj_storm" and cert.eta0 is not None:
            eta0 = cert.eta0
        else:
            eta0 = 1.0 / (2.0 * L)
    beta0 = opt.get("beta0", "auto")
    if beta0 == "auto":
        if L is None:
            raise ValueError("optimizer.beta0 = 'auto' needs a known smoothness constant")
        beta0 = 1.0 / (2.0 * L * eta0)
    return float(eta0), float(beta0)


def _run_cell(cfg: ExperimentConfig, seed: int, T: int):
    F, domain, oracle, x0 = _build(cfg, seed)
    opt = cfg.optimizer
    alpha = _schedule_alpha(cfg)
    enforce = bool(opt.get("enforce", True))
    eta0, beta0 = _step_sizes(cfg, F)
    if opt["kind"] == "proj_storm":
        return proj_storm(oracle, domain, x0, T, eta0, opt.get("a0", 1.5), beta0, alpha,
                          opt.get("g0_batch", 1), enforce)
    b0 = opt.get("b0", 4.0)
    if opt["kind"] == "proj_sgd":
        return proj_sgd(oracle, domain, x0, T, eta0, b0, alpha, enforce)
    return prox_sgd(oracle, indicator_prox(domain), x0, T, eta0, b0, alpha, enforce)


def _curve_points(T_list, T_max):
    pts = np.unique(np.round(np.logspace(0, math.log10(T_max), 64)).astype(int))
    return sorted(set(pts.tolist()) | set(T_list) | {0})


def _seed_job(args):
    cfg, seed = args
    T_list = cfg.T
    try:
        tr = _run_cell(cfg, seed, T_list[-1])
    except NumericFailure as exc:
        return {"seed": seed, "failed": str(exc), "rows": []}
    if tr.gap is None:
        return {"seed": seed, "failed": "minimum unknown; gap unset", "rows": []}
    rows = [
        (int(t), int(tr.queries[t]), seed, float(tr.gap[t]), float(tr.grad_error_sq[t]))
        for t in _curve_points(T_list, T_list[-1])
    ]
    return {"seed": seed, "failed": None, "rows": rows, "notes": tr.notes}


# ---------------------------------------------------------------------------
# rates


def fit_slope(x, y):
    """OLS slope of ``log y`` on ``log x`` and the residual RMS."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def _targets(cfg):
    a = _schedule_alpha(cfg)
    if cfg.optimizer["kind"] == "proj_storm":
        tT = tQ = -a / 2.0
        dT = dQ = 0.15
    else:
        tT = -a / (2.0 - a)
        tQ = -a / (4.0 - a)
        dT, dQ = 0.3, 0.12
    return tT, tQ, cfg.tol_T if cfg.tol_T is not None else dT, cfg.tol_Q if cfg.tol_Q is not None else dQ


@dataclass
class RateReport:
    T: list
    mean_gap: list
    stderr_gap: list
    queries: list
    mean_grad_error_sq: list
    fit_T: list
    slope_T: float | None
    residual_T: float | None
    slope_Q: float | None
    residual_Q: float | None
    target_T: float
    target_Q: float
    tol_T: float
    tol_Q: float
    pass_T: bool
    pass_Q: bool
    below_floor: list
    failed_cells: list
    notes: list
    rows: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.pass_T and self.pass_Q and not self.failed_cells

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        d["passed"] = self.passed
        return d


def _aggregate(cfg, results) -> RateReport:
    T_list = cfg.T
    failed = [{"seed": r["seed"], "reason": r["failed"]} for r in results if r["failed"]]
    ok = [r for r in results if not r["failed"]]
    rows = [row for r in results for row in r["rows"]]
    notes = sorted({n for r in ok for n in r.get("notes", [])})
    tT, tQ, dT, dQ = _targets(cfg)
    mean, se, qs, errs, floor = [], [], [], [], []
    for T in T_list:
        g = np.array([row[3] for row in rows if row[0] == T])
        q = np.array([row[1] for row in rows if row[0] == T])
        e = np.array([row[4] for row in rows if row[0] == T])
        if g.size == 0:
            mean.append(None), se.append(None), qs.append(None), errs.append(None)
            continue
        mean.append(float(g.mean()))
        se.append(float(g.std(ddof=1) / math.sqrt(g.size)) if g.size > 1 else 0.0)
        qs.append(float(q.mean()))
        errs.append(float(e.mean()))
        if g.mean() <= GAP_FLOOR:
            floor.append(T)
    half = len(T_list) // 2
    fit_T = T_list[half:]
    idx = list(range(half, len(T_list)))
    sT = rT = sQ = rQ = None
    usable = len(idx) >= 2 and all(mean[i] is not None and mean[i] > GAP_FLOOR for i in idx)
    if usable:
        sT, rT = fit_slope([T_list[i] for i in idx], [mean[i] for i in idx])
        sQ, rQ = fit_slope([qs[i] for i in idx], [mean[i] for i in idx])
    elif floor:
        notes.append("converged below floor")
    pT = sT is not None and abs(sT - tT) <= dT
    pQ = sQ is not None and abs(sQ - tQ) <= dQ
    return RateReport(T_list, mean, se, qs, errs, fit_T, sT, rT, sQ, rQ, tT, tQ, dT, dQ, pT, pQ, floor,
                      failed, notes, rows)


def run_experiment(cfg: ExperimentConfig, jobs: int | None = None) -> RateReport:
    """Run every seed and aggregate mean gaps per budget.

    Schedules do not depend on the horizon, so the run for the largest
    budget is read at every smaller budget; this coincides exactly with a
    fresh run per budget.
    """
    jobs = jobs or cfg.parallelism
    tasks = [(cfg, s) for s in cfg.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_seed_job, tasks))
    else:
        results = [_seed_job(t) for t in tasks]
    return _aggregate(cfg, results)


# ---------------------------------------------------------------------------
# reports


def _report_doc(kind: str, config, result) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "kind": kind,
        "prng": PRNG_ALGORITHM,
        "calibration_note": CALIBRATION_NOTE,
        "config": config,
        "result": result,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_outputs(out_dir, doc: dict, rows=None, fmt="both"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        with open(out / "report.json", "w") as fh:
            json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if rows is not None and fmt in ("csv", "both"):
        with open(out / "curves.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "queries", "seed", "gap", "grad_error_sq"])
            for r in sorted(rows, key=lambda r: (r[2], r[0])):
                w.writerow([r[0], r[1], r[2], repr(float(r[3])), repr(float(r[4]))])


def read_curves(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [(int(r["t"]), int(r["queries"]), int(r["seed"]), float(r["gap"]), float(r["grad_error_sq"]))
                for r in rd]


# ---------------------------------------------------------------------------
# verification suite


def _matrix():
    for a, C, rho in itertools.product((1.2, 1.5, 1.8), (0.25, 0.5, 1.0), (0.05, 0.1)):
        yield a, C, rho, make_lower_bound_pair(a, C, 1.0, rho)


def _registry():
    checks = []

    def add(name, fn):
        checks.append((name, fn))

    for a, C, rho, pair in _matrix():
        cert = pair.f0.constants
        grid = GridSpec(pair.domain, 10_000)
        wide = GridSpec(Interval(-pair.R, pair.R), 10_000)
        etas = [cert.eta0 / 4, cert.eta0 / 2, cert.eta0]
        tag = f"alpha={a},C={C},rho={rho}"
        for fname in ("f0", "f1"):
            f = getattr(pair, fname)
            add(f"grad_dominance/{fname}/{tag}", lambda f=f, g=grid, c=cert: verify_grad_dominance(f, g, c.alpha, c.tau, 1e-6))
            add(f"projected_grad_dominance/{fname}/{tag}",
                lambda f=f, g=grid, c=cert, e=etas, d=pair.domain: verify_projected_grad_dominance(f, d, g, c.alpha, c.tau, e, 1e-6))
            add(f"smoothness/{fname}/{tag}", lambda f=f, g=wide, c=cert: verify_smoothness(f, g, c.L))
            add(f"distance_bounds/{fname}/{tag}",
                lambda f=f, g=grid, c=cert, d=pair.domain: verify_distance_bounds(f, d, g, c.alpha, c.tau, c.L))
        add(f"kl_integrand/{tag}", lambda pair=pair: _kl_check(pair))
    add("holder/f0/alpha=1.5", lambda: _holder_check())
    for a in (1.2, 1.5, 2.0):
        add(f"local_grad_dominance/nbs/alpha={a}", lambda a=a: _nbs_check(a))
    for q in (2.0, 3.0, 4.0):
        add(f"phi_kl_dominance/q={q}", lambda q=q: _phi_kl_check(q))
    add("recursion/variance", _variance_suite)
    for a in (1.0, 1.5, 1.9):
        add(f"recursion/delta/alpha={a}", lambda a=a: check_delta_recursion(**delta_defaults(a)))
    add("recursion/poly_bound", _poly_suite)
    return checks


def delta_defaults(alpha, L=1.0, beta0=1.0, eta0=1.0, tau=1.0, E=1.0, delta0=1.0, T=100_000):
    """Unit constants with ``q0 = L beta0^2 / 4`` and ``c0 = L beta0 / 2``."""
    return dict(q0=L * beta0**2 / 4.0, eta0=eta0, beta0=beta0, c0=L * beta0 / 2.0, tau=tau, alpha=alpha,
                E=E, delta0=delta0, T=T)


def _kl_check(pair):
    x = np.linspace(0.0, pair.R, 100_000)
    k = kl_per_step(pair, 1.0, x)
    right = float(np.max(k[x >= 2 * pair.rho]))
    top = int(np.argmax(k))
    ok = right == 0.0 and top == 0
    return CheckReport(ok, 0.0 if ok else math.inf, float(x[top]), f"argmax x={x[top]}, max beyond 2 rho={right}")


def _holder_check():
    pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
    return verify_holder(pair.f0, GridSpec(Interval(-1.0, 1.0), 10_000), pair.f0.constants.L, 2.0)


def _nbs_check(a):
    # the sublevel set {gap <= pGh/q} is exactly the hidden interval
    f = make_nbs_instance(a, 0.2, 1.0, 1.0, 4, 2)
    return verify_local_grad_dominance(f, f.domain, GridSpec(f.domain, 10_000), a, f.local_tau(), -f.min_value)


def _phi_kl_check(q):
    N, R, G = 4, 1.0, 1.0
    h = R / (2 * N)
    p = q * h ** (q - 1.0) / G
    f = make_phi_kl_instance(q, p, G, R, N, 2)
    lo, hi = float(f.breakpoint(2)), float(f.breakpoint(3))
    return verify_phi_kl(f, GridSpec(Interval(lo, np.nextafter(hi, lo)), 10_000), q)


def _variance_draws(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        a0 = rng.uniform(1.01, 1.99)
        beta0, sigma, Lt, R, V0 = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), 5))
        yield dict(a0=a0, beta0=beta0, sigma=sigma, L_tilde=Lt, R=R, V0=V0)


def _variance_suite(n=1000, T=2000, shift=1):
    worst, at, fails = 0.0, None, 0
    for k, p in enumerate(_variance_draws(n)):
        r = check_variance_recursion(T=T, shift=shift, **p)
        fails += not r.passed
        if r.worst_ratio > worst:
            worst, at = r.worst_ratio, k
    return CheckReport(fails == 0, worst, at, f"{fails} of {n} draws violate V_t <= E/(t+{shift})",
                       "variance_recursion", False, {"violations": fails})


def _poly_draws(n=1000, seed=1):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        A0, A1 = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), 2))
        A2 = float(np.exp(rng.uniform(math.log(1e-3), math.log(1e2))))
        yield float(A0), float(A1), A2, float(rng.uniform(1.0, 1.95))


def _poly_suite(n=1000):
    worst_id, fails = 0.0, 0
    for A0, A1, A2, a in _poly_draws(n):
        r = check_poly_bound(A0, A1, A2, a)
        fails += not r.passed
        worst_id = max(worst_id, r.extra["identity_error"])
    return CheckReport(fails == 0, 1.0 + worst_id, None, f"{fails} of {n} draws failed; worst identity error {worst_id:.2e}",
                       "poly_bound", False, {"identity_error": worst_id})


def run_verification_suite(pattern: str = "") -> list:
    """Run every registered check whose name contains ``pattern`` (glob patterns allowed)."""
    selected = []
    for name, fn in _registry():
        if not pattern or pattern in name or fnmatch.fnmatch(name, pattern):
            selected.append((name, fn))
    reports = []
    for name, fn in selected:
        rep = fn()
        rep.name = name
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# lower-bound exhibit


def _search_until(inst, oracle, eta, eps, x0, max_queries):
    x = float(x0)
    lo, hi = 0.0, inst.R
    n = 0
    while inst.gap([x]) > eps:
        if n >= max_queries:
            return n, False
        g = oracle.query([x])[0]
        x = min(max(x - eta * g, lo), hi)
        n += 1
    return n, True


def lowerbound_demo(eps_list, alpha, tau, G, R, seed, trials=20, max_queries=10_000_000) -> dict:
    """Queries used by projected stochastic subgradient steps on the search instance.

    For each accuracy the hidden interval is drawn at random, the start is the
    far endpoint of the domain and the step is ``eps / G^2``. The run stops
    the first time the exact gap is at most ``eps``. This is an empirical
    exhibit of the query scaling, not a verification of any lower bound.
    """
    root = np.random.SeedSequence(seed)
    rows = []
    for eps, ss in zip(eps_list, root.spawn(len(eps_list))):
        try:
            p, N = nbs_parameters(eps, alpha, tau, G, R)
        except InfeasiblePrecisionError as exc:
            rows.append({"epsilon": eps, "skipped": str(exc)})
            continue
        counts, reached = [], True
        for tss in ss.spawn(trials):
            rng = make_rng(tss)
            j_star = int(rng.integers(1, N))
            inst = make_nbs_instance(alpha, p, G, R, N, j_star)
            x0 = 0.0 if j_star > N / 2 else R
            oracle = NbsBernoulli(inst, tss.spawn(1)[0])
            n, ok = _search_until(inst, oracle, eps / G**2, eps, x0, max_queries)
            counts.append(n)
            reached &= ok
        c = np.array(counts, dtype=float)
        rows.append({
            "epsilon": eps, "p": p, "N": N, "queries_mean": float(c.mean()),
            "queries_stderr": float(c.std(ddof=1) / math.sqrt(c.size)) if c.size > 1 else 0.0,
            "reached": bool(reached),
        })
    good = [r for r in rows if "queries_mean" in r]
    exponent = None
    if len(good) >= 2:
        exponent, _ = fit_slope([r["epsilon"] for r in good], [r["queries_mean"] for r in good])
    by_eps = sorted(good, key=lambda r: -r["epsilon"])
    monotone = all(b["queries_mean"] > a["queries_mean"] for a, b in zip(by_eps, by_eps[1:]))
    limit = -2.0 / alpha + 0.4
    return {
        "label": "empirical exhibit of query scaling; not a verification of the lower bound",
        "alpha": alpha, "tau": tau, "G": G, "R": R, "seed": seed, "trials": trials,
        "rows": rows, "exponent": exponent, "exponent_limit": limit, "monotone": monotone,
        "passed": bool(monotone and exponent is not None and exponent <= limit),
    }


# ---------------------------------------------------------------------------
# command line


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--jobs", type=int, default=d, help="parallel worker processes")
    p.add_argument("--format", choices=_FORMATS, default=d, help="report formats to write")


def _parser():
    ap = argparse.ArgumentParser(prog="pgdom", description=__doc__.splitlines()[0])
    _global_flags(ap, False)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "rates"):
        sp = sub.add_parser(name)
        _global_flags(sp, True)
        sp.add_argument("config")
    sp = sub.add_parser("verify")
    _global_flags(sp, True)
    sp.add_argument("--filter", default="", help="substring or glob selecting checks")
    sp = sub.add_parser("lowerbound-demo")
    _global_flags(sp, True)
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--g", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--eps", default="0.04,0.02,0.01,0.005")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=20)
    return ap


def _print_rates(rep: RateReport, stream):
    print(f"{'T':>8} {'queries':>12} {'mean gap':>12} {'stderr':>10}", file=stream)
    for T, q, m, s in zip(rep.T, rep.queries, rep.mean_gap, rep.stderr_gap):
        if m is None:
            print(f"{T:>8} {'failed':>12}", file=stream)
        else:
            print(f"{T:>8} {q:>12.0f} {m:>12.4e} {s:>10.2e}", file=stream)
    for lab, s, t, d, ok in (("T", rep.slope_T, rep.target_T, rep.tol_T, rep.pass_T),
                             ("queries", rep.slope_Q, rep.target_Q, rep.tol_Q, rep.pass_Q)):
        shown = "n/a" if s is None else f"{s:.3f}"
        print(f"slope vs {lab}: {shown} (target {t:.3f} +- {d}) {'PASS' if ok else 'FAIL'}", file=stream)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    fmt = args.format
    try:
        if args.command in ("run", "rates"):
            cfg = load_config(args.config)
            if args.jobs:
                cfg.parallelism = args.jobs
            rep = run_experiment(cfg)
            out_dir = args.out or cfg.out_dir or "pgdom-out"
            doc = _report_doc(args.command, cfg.raw, rep.summary())
            write_outputs(out_dir, doc, rep.rows, fmt or cfg.fmt)
            _print_rates(rep, out)
            if rep.failed_cells:
                return EXIT_NUMERIC
            return EXIT_OK if (args.command == "run" or rep.passed) else EXIT_FAIL
        if args.command == "verify":
            reports = run_verification_suite(args.filter)
            if not reports:
                print("no checks selected", file=out)
            for r in reports:
                status = "INCONCLUSIVE" if r.inconclusive else ("PASS" if r.passed else "FAIL")
                print(f"{status:12} {r.name}  worst_ratio={r.worst_ratio:.6g}  {r.details}", file=out)
            if args.out:
                doc = _report_doc("verify", {"filter": args.filter}, [r.to_dict() for r in reports])
                write_outputs(args.out, doc, None, fmt or "json")
            return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
        eps = [float(e) for e in args.eps.split(",") if e.strip()]
        res = lowerbound_demo(eps, args.alpha, args.tau, args.g, args.r, args.seed, args.trials)
        print(res["label"], file=out)
        print(f"{'epsilon':>10} {'p':>8} {'N':>4} {'queries':>12}", file=out)
        for r in res["rows"]:
            if "skipped" in r:
                print(f"{r['epsilon']:>10g} skipped: {r['skipped']}", file=out)
            else:
                print(f"{r['epsilon']:>10g} {r['p']:>8.4f} {r['N']:>4d} {r['queries_mean']:>12.1f}", file=out)
        print(f"fitted exponent: {res['exponent']}  (limit {res['exponent_limit']})", file=out)
        if args.out:
            write_outputs(args.out, _report_doc("lowerbound-demo", vars(args), res), None, fmt or "json")
        return EXIT_OK if res["passed"] else EXIT_FAIL
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
