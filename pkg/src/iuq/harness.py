"""End-to-end orchestration.

Runs the two confidence-interval pipelines (standard estimator with its
budget split, and the pooled kNN / likelihood-ratio estimators with a
separate simulation parameter set), repeats them over macro replications of
the input data to estimate empirical coverage and width against a pinned
reference value, and writes CSV/JSON reports.

Every macro replication is a pure function of (config, master seed, macro
index): random streams are derived from seed-sequence keys
(seed, macro, phase), so results are identical regardless of worker count
and are merged by macro index.
"""

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ci import percentile_ci
from .design import (
    anova_select_r,
    bootstrap_params,
    cv_select_k,
    default_k_grid,
    sample_sim_params,
    sample_size_rule,
)
from .estimators import (
    NeighborIndex,
    build_run_table,
    klr_fallback_k1,
    klr_ratio,
    knn_ratio,
    std_ratio,
)
from .input_models import EstimationError
from .reference import reference_eta
from .simulators import make_testbed

ESTIMATORS = ("std-opt", "std-even", "knn", "klr")
SAMPLING_MODES = ("bootstrap", "ellipsoid")

# replication counts pinned from the variance-ratio pilot at m=50; the erm
# value comes from a one-off large pilot (b=200 parameters, 2*10^5 runs each:
# zeta per run = 2.37e-4 for Y and A alike) because the default pilot sizes
# cannot resolve that small a ratio.  Override with ExperimentConfig.r.
DEFAULT_R = {"san": 99, "mm1": 7, "erm": 423}

# rng phase keys
_PH_DATA, _PH_BOOT, _PH_SIM, _PH_RUNS = range(4)


def _rng(seed, macro, phase):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(macro), int(phase)]))


@dataclass(frozen=True)
class PilotSettings:
    b: int = 50
    s0: int = 10
    ds: int = 10
    c_zeta: float = 0.1
    max_s: int = 500


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    m: int
    alpha: float = 0.05
    estimator: str = "klr"
    sampling: str = "ellipsoid"
    r: object = "auto"  # int or "auto"
    macros: int = 200
    seed: int = 0
    out: str = None
    san_topology: str = None
    workers: int = 1
    eta_ref: float = None
    pilot: PilotSettings = field(default_factory=PilotSettings)
    cv_folds: int = 5
    cv_grid: tuple = None
    mvee_tol: float = 1e-7

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.macros < 1:
            raise ValueError("macro-run count must be at least 1")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"sampling must be one of {SAMPLING_MODES}")
        if self.r != "auto" and (not isinstance(self.r, int) or self.r < 1):
            raise ValueError("r must be a positive integer or 'auto'")

    def resolved_r(self):
        return DEFAULT_R[self.model] if self.r == "auto" else int(self.r)


@dataclass(frozen=True)
class MacroRow:
    macro_id: int
    estimator: str
    sampling: str
    m: int
    n: int
    n_tilde: int
    r: int
    k_y: int
    k_a: int
    lower: float
    upper: float
    width: float
    covered: int
    sims_used: int
    seed: int


@dataclass(frozen=True)
class MacroResult:
    rows: tuple
    failures: tuple  # (macro_id, reason) pairs
    summary: dict


# -- single-dataset pipelines ---------------------------------------------


def run_iuq_knn_klr(testbed, data, estimator, sampling, alpha, r, rngs,
                    cv_folds=5, cv_grid=None, mvee_tol=1e-7):
    """Pooled-estimator pipeline on one input dataset.

    Bootstraps the MLE, draws an independent simulation parameter set, runs
    r simulations at each simulation parameter, picks the pooling sizes for
    numerator and denominator by cross validation, estimates the ratio at
    every bootstrap parameter, and forms the percentile interval.

    ``rngs`` maps phase names ('boot', 'sim', 'runs') to generators so that
    phases stay stream-independent.
    """
    if estimator not in ("knn", "klr"):
        raise ValueError("estimator must be 'knn' or 'klr'")
    data = np.asarray(data, dtype=float)
    model = testbed.input_model
    theta_hat = model.mle(data)
    m = data.shape[0]
    n, n_tilde = sample_size_rule(m)
    boots = bootstrap_params(model, theta_hat, m, n_tilde, rngs["boot"])
    sim = sample_sim_params(
        sampling, boots, model, theta_hat, m, n, rngs["sim"], mvee_tol=mvee_tol
    )
    table = build_run_table(
        testbed, sim.params, r, rngs["runs"], collect_stats=(estimator == "klr")
    )
    mask = table.eligible()
    n_eligible = int(mask.sum())
    if n_eligible == 0:
        raise EstimationError("every simulation parameter has zero average denominator")
    grid = list(cv_grid) if cv_grid else default_k_grid(n)
    # both cross-validations use the same deterministic fold partition so
    # their losses correlate; with strongly dependent (Y, A) the selected
    # pool sizes then coincide and the ratio keeps its error cancellation
    k_y = min(cv_select_k(sim.params, table.y_mean, grid, cv_folds), n_eligible)
    k_a = min(cv_select_k(sim.params, table.a_mean, grid, cv_folds), n_eligible)
    index = NeighborIndex(sim.params)
    estimates = np.empty(n_tilde)
    if estimator == "knn":
        for i in range(n_tilde):
            estimates[i] = knn_ratio(table, index, boots.params[i], k_y, k_a).value
    else:
        for i in range(n_tilde):
            estimates[i] = klr_ratio(
                table,
                index,
                boots.params[i],
                k_y,
                k_a,
                lr_target=testbed.lr_param(boots.params[i]),
            ).value
    ci = percentile_ci(estimates, alpha, estimator=estimator)
    diag = {
        "theta_hat": theta_hat,
        "boot_params": boots.params,
        "sim_params": sim.params,
        "n": n,
        "n_tilde": n_tilde,
        "r": r,
        "k_y": k_y,
        "k_a": k_a,
        "sims_used": n * r,
    }
    return ci, diag


def std_budget_split(budget, split):
    """Bootstrap-set size and per-parameter run count for the standard
    pipeline at a shared total budget.

    'opt' uses (budget^(2/3), budget^(1/3)); 'even' splits evenly as
    (sqrt(budget), sqrt(budget)).  Values floor to integers >= 1.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    if split == "opt":
        n_s = budget ** (2.0 / 3.0)
        r_s = budget ** (1.0 / 3.0)
    elif split == "even":
        n_s = r_s = math.sqrt(budget)
    else:
        raise ValueError(f"unknown split {split!r}")
    return max(1, int(math.floor(n_s + 1e-9))), max(1, int(math.floor(r_s + 1e-9)))


def run_iuq_std(testbed, data, split, alpha, r, rngs):
    """Standard-estimator pipeline on one input dataset.

    Simulates directly at the bootstrap parameters with the budget split
    implied by the pooled design's n*r total; zero-denominator parameters
    fall back to the reweighted nearest eligible neighbor's estimate.
    """
    data = np.asarray(data, dtype=float)
    model = testbed.input_model
    theta_hat = model.mle(data)
    m = data.shape[0]
    n, _ = sample_size_rule(m)
    n_s, r_s = std_budget_split(n * r, split)
    boots = bootstrap_params(model, theta_hat, m, n_s, rngs["boot"])
    table = build_run_table(testbed, boots.params, r_s, rngs["runs"], collect_stats=True)
    index = NeighborIndex(boots.params)
    mask = table.eligible()
    estimates = np.empty(n_s)
    n_fallback = 0
    for i in range(n_s):
        est = std_ratio(table.y[i], table.a[i])
        if est.fallback:
            if not mask.any():
                raise EstimationError("every bootstrap parameter has zero average denominator")
            est = klr_fallback_k1(
                table, index, boots.params[i], lr_target=testbed.lr_param(boots.params[i])
            )
            n_fallback += 1
        estimates[i] = est.value
    ci = percentile_ci(estimates, alpha, estimator=f"std-{split}")
    diag = {
        "theta_hat": theta_hat,
        "boot_params": boots.params,
        "n": n_s,
        "n_tilde": n_s,
        "r": r_s,
        "k_y": 0,
        "k_a": 0,
        "sims_used": n_s * r_s,
        "fallbacks": n_fallback,
    }
    return ci, diag


# -- macro experiment ------------------------------------------------------


def _run_single_macro(cfg, macro_idx, eta_ref):
    testbed = make_testbed(cfg.model, san_topology=cfg.san_topology)
    data = testbed.input_model.sample(
        testbed.true_theta, _rng(cfg.seed, macro_idx, _PH_DATA), size=cfg.m
    )
    rngs = {
        "boot": _rng(cfg.seed, macro_idx, _PH_BOOT),
        "sim": _rng(cfg.seed, macro_idx, _PH_SIM),
        "runs": _rng(cfg.seed, macro_idx, _PH_RUNS),
    }
    r = cfg.resolved_r()
    try:
        if cfg.estimator in ("knn", "klr"):
            ci, diag = run_iuq_knn_klr(
                testbed,
                data,
                cfg.estimator,
                cfg.sampling,
                cfg.alpha,
                r,
                rngs,
                cv_folds=cfg.cv_folds,
                cv_grid=cfg.cv_grid,
                mvee_tol=cfg.mvee_tol,
            )
        else:
            split = cfg.estimator.split("-", 1)[1]
            ci, diag = run_iuq_std(testbed, data, split, cfg.alpha, r, rngs)
    except EstimationError as exc:
        return macro_idx, None, str(exc)
    row = MacroRow(
        macro_id=macro_idx,
        estimator=cfg.estimator,
        sampling=cfg.sampling if cfg.estimator in ("knn", "klr") else "bootstrap",
        m=cfg.m,
        n=diag["n"],
        n_tilde=diag["n_tilde"],
        r=diag["r"],
        k_y=diag["k_y"],
        k_a=diag["k_a"],
        lower=ci.lower,
        upper=ci.upper,
        width=ci.width,
        covered=int(ci.covers(eta_ref)),
        sims_used=diag["sims_used"],
        seed=cfg.seed,
    )
    return macro_idx, row, None


def _macro_worker(args):
    return _run_single_macro(*args)


def run_macro_experiment(cfg):
    """Repeat the full pipeline over fresh input datasets.

    Each macro run draws a new size-m dataset from the true input model,
    runs the configured pipeline, and records whether the interval covers
    the pinned reference value.  Failed macro runs are excluded and
    counted; more than 10% failures aborts the experiment.
    """
    eta_ref = cfg.eta_ref if cfg.eta_ref is not None else reference_eta(cfg.model)
    jobs = [(cfg, i, eta_ref) for i in range(cfg.macros)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_macro_worker, jobs, chunksize=1))
    else:
        outcomes = [_run_single_macro(*job) for job in jobs]
    outcomes.sort(key=lambda t: t[0])
    rows = tuple(row for _, row, err in outcomes if err is None)
    failures = tuple((idx, err) for idx, row, err in outcomes if err is not None)
    if len(failures) > 0.1 * cfg.macros:
        raise EstimationError(
            f"{len(failures)} of {cfg.macros} macro runs failed; first: {failures[0]}"
        )
    summary = summarize(rows, failures, cfg, eta_ref)
    return MacroResult(rows=rows, failures=failures, summary=summary)


def summarize(rows, failures, cfg, eta_ref):
    n = len(rows)
    covered = np.array([r.covered for r in rows], dtype=float)
    widths = np.array([r.width for r in rows], dtype=float)
    coverage = float(covered.mean()) if n else float("nan")
    summary = {
        "model": cfg.model,
        "estimator": cfg.estimator,
        "sampling": cfg.sampling,
        "m": cfg.m,
        "alpha": cfg.alpha,
        "r": cfg.resolved_r(),
        "macros": cfg.macros,
        "completed": n,
        "failed": len(failures),
        "seed": cfg.seed,
        "eta_ref": eta_ref,
        "coverage": coverage,
        "coverage_se": float(math.sqrt(coverage * (1 - coverage) / n)) if n else float("nan"),
        "mean_width": float(widths.mean()) if n else float("nan"),
        "width_se": float(widths.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "total_sims": int(sum(r.sims_used for r in rows)),
    }
    return summary


# -- reporting -------------------------------------------------------------

_CSV_FIELDS = [f.name for f in dataclasses.fields(MacroRow)]


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(result, path):
    """Write ``<path>.csv`` (one row per macro run) and ``<path>.json``
    (the summary).  Output bytes are a pure function of (config, seed)."""
    if not result.rows:
        raise ValueError("nothing to report")
    base = path[:-4] if str(path).endswith(".csv") else str(path)
    parent = os.path.dirname(base)
    if parent:
        os.makedirs(parent, exist_ok=True)
    csv_path = base + ".csv"
    json_path = base + ".json"
    lines = [",".join(_CSV_FIELDS)]
    for row in result.rows:
        lines.append(",".join(_format_cell(getattr(row, f)) for f in _CSV_FIELDS))
    with open(csv_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    payload = dict(result.summary)
    payload["failures"] = [list(f) for f in result.failures]
    with open(json_path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


_INT_FIELDS = {"macro_id", "m", "n", "n_tilde", "r", "k_y", "k_a", "covered",
               "sims_used", "seed"}


def load_report(csv_path):
    """Parse an emitted CSV back into MacroRow records."""
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
        if header != _CSV_FIELDS:
            raise ValueError(f"unexpected report header: {header}")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            kwargs = {}
            for name, cell in zip(_CSV_FIELDS, cells):
                if name in _INT_FIELDS:
                    kwargs[name] = int(cell)
                elif name in ("estimator", "sampling"):
                    kwargs[name] = cell
                else:
                    kwargs[name] = float(cell)
            rows.append(MacroRow(**kwargs))
    return rows


# -- pilot entry point ------------------------------------------------------


def run_pilot(model_name, m, seed=0, settings=None, san_topology=None):
    """Run the variance-ratio pilot on a fresh dataset from the true model."""
    settings = settings or PilotSettings()
    testbed = make_testbed(model_name, san_topology=san_topology)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0, 99]))
    data = testbed.input_model.sample(testbed.true_theta, rng, size=m)
    theta_hat = testbed.input_model.mle(data)

    def sample_param(count, rng_):
        return bootstrap_params(testbed.input_model, theta_hat, m, count, rng_).params

    def simulate(theta, runs, rng_):
        batch = testbed.simulate(theta, runs, rng_, collect_stats=False)
        return batch.y, batch.a

    return anova_select_r(
        sample_param,
        simulate,
        b=settings.b,
        s0=settings.s0,
        ds=settings.ds,
        c_zeta=settings.c_zeta,
        max_s=settings.max_s,
        rng=rng,
    )
