"""Replicated sweeps over (q, gamma, p_v, method, mode) and their summaries.

Each replicate draws a fresh process and simulates one long path; shorter
lengths ``q`` reuse its prefix (``q + tau`` raw rows), so every ``q`` in a
replicate observes the same process for a different length. Per-replicate
ratios (TP/K, FP/K, FP/m) are averaged arithmetically across replicates.
"""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import _backend
from .errors import InvalidArgumentError, SparseCausalError
from .estimators import GLASSO_MAX_ITER, GLASSO_TOL, METHODS, covariance, estimate
from .infotheory import te_matrix
from .simulator import (
    build_lagged_panel,
    generate_process_spec,
    replicate_seeds,
    simulate,
    true_network,
)
from .validation import (
    ValidationParams,
    confusion,
    hypergeometric_pvalue,
    inference_network,
    validated_network,
)

MODES = ("conditional", "unconditional", "inference")
FULL_Q_GRID = [10, 20, 30, 50, 200, 300, 1000, 20000]
FULL_GAMMA_GRID = [1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5]
STAR_P = 0.05
DOUBLE_STAR_P = 1e-8
CELL_FIELDS = ["method", "mode", "q", "gamma", "pv", "tp_rate", "fp_over_n",
               "fp_rate", "sig_flag", "n_replicates"]
ROC_FIELDS = ["method", "mode", "q", "gamma", "pv", "fp_rate", "tp_rate"]
REPLICATE_FIELDS = ["replicate", "method", "mode", "q", "gamma", "pv",
                    "TP", "FP", "FN", "TN", "hyper_p", "error"]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentConfig",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "p": {"type": "integer", "minimum": 2},
        "tau": {"type": "integer", "minimum": 1},
        "n_links": {"type": ["integer", "null"], "minimum": 1},
        "self_links": {"type": ["integer", "null"], "minimum": 0},
        "replicates": {"type": "integer", "minimum": 1},
        "q_grid": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 2}},
        "gamma_grid": {"type": "array", "minItems": 1,
                       "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "pv_grid": {"type": "array", "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
        "methods": {"type": "array", "minItems": 1, "uniqueItems": True,
                    "items": {"enum": list(METHODS)}},
        "modes": {"type": "array", "minItems": 1, "uniqueItems": True,
                  "items": {"enum": list(MODES)}},
        "bonferroni": {"type": "boolean"},
        "master_seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": ["string", "null"]},
        "burn_in": {"type": ["integer", "null"], "minimum": 0},
        "standardize": {"type": "boolean"},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "unconditional_source": {"enum": ["local", "global"]},
        "glasso_tol": {"type": "number", "exclusiveMinimum": 0},
        "glasso_max_iter": {"type": "integer", "minimum": 1},
        "n_jobs": {"type": "integer", "minimum": 1},
    },
}


@dataclass
class ExperimentConfig:
    p: int = 100
    tau: int = 5
    n_links: int | None = None
    self_links: int | None = None
    replicates: int = 100
    q_grid: list = field(default_factory=lambda: list(FULL_Q_GRID))
    gamma_grid: list = field(default_factory=lambda: list(FULL_GAMMA_GRID))
    pv_grid: list = field(default_factory=lambda: [0.01])
    methods: list = field(default_factory=lambda: list(METHODS))
    modes: list = field(default_factory=lambda: list(MODES))
    bonferroni: bool = False
    master_seed: int = 0
    output_dir: str | None = None
    burn_in: int | None = None
    standardize: bool = True
    r: float = 2.0
    unconditional_source: str = "local"
    glasso_tol: float = GLASSO_TOL
    glasso_max_iter: int = GLASSO_MAX_ITER
    n_jobs: int = 1

    def __post_init__(self):
        validate_config(asdict(self))
        if self.n_links is None:
            self.n_links = min(self.p, self.p * (self.p - 1) // 2)
        if self.n_links > self.p * (self.p - 1) // 2:
            raise InvalidArgumentError(f"n_links={self.n_links} exceeds p(p-1)/2")
        if self.self_links is not None and self.self_links > self.p:
            raise InvalidArgumentError(f"self_links={self.self_links} exceeds p={self.p}")

    @classmethod
    def from_dict(cls, data):
        validate_config(data)
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidArgumentError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)


def validate_config(data):
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise InvalidArgumentError(f"config error at {where}: {exc.message}") from exc


def desk_preset(**overrides):
    """p=20, tau=3, 20 links, 20 replicates, q in {30, 100, 1000}, gamma=0.1, p_v=0.01."""
    base = dict(p=20, tau=3, n_links=20, replicates=20, q_grid=[30, 100, 1000],
                gamma_grid=[0.1], pv_grid=[0.01], master_seed=2024)
    base.update(overrides)
    return ExperimentConfig(**base)


def full_scale_preset(**overrides):
    """Full-scale settings: p=100, tau=5, 100 links, no self coefficients, gamma=0.1, p_v=0.01."""
    base = dict(p=100, tau=5, n_links=100, self_links=0, replicates=100, gamma_grid=[0.1],
                pv_grid=[0.01])
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass
class CellResult:
    method: str
    mode: str
    q: int
    gamma: float
    pv: float
    tp_rate: float
    fp_over_n: float
    fp_rate: float
    sig_flag: str  # "none", "star" or "double-star"
    n_replicates: int
    failures: list = field(default_factory=list)

    @property
    def key(self):
        return (self.method, self.mode, self.q, self.gamma, self.pv)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list
    records: list  # one dict per (replicate, cell)
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)

    def cell(self, method, mode, q, gamma=None, pv=None):
        for c in self.cells:
            if (c.method, c.mode, c.q) == (method, mode, q) and \
                    (gamma is None or math.isclose(c.gamma, gamma, rel_tol=1e-9)) and \
                    (pv is None or math.isclose(c.pv, pv, rel_tol=1e-9)):
                return c
        raise KeyError((method, mode, q, gamma, pv))

    def replicate_records(self, method, mode, q, gamma=None, pv=None):
        return [r for r in self.records
                if (r["method"], r["mode"], r["q"]) == (method, mode, q)
                and (gamma is None or math.isclose(r["gamma"], gamma, rel_tol=1e-9))
                and (pv is None or math.isclose(r["pv"], pv, rel_tol=1e-9))]


def _record(rep, method, mode, q, gamma, pv, counts=None, p=None, error=None):
    rec = {"replicate": rep, "method": method, "mode": mode, "q": q, "gamma": gamma,
           "pv": pv, "TP": None, "FP": None, "FN": None, "TN": None,
           "hyper_p": None, "error": error}
    if counts is not None:
        rec.update(TP=counts.TP, FP=counts.FP, FN=counts.FN, TN=counts.TN,
                   hyper_p=hypergeometric_pvalue(counts.TP, counts.n, counts.K, p))
    return rec


def run_replicate(config, rep):
    """Every cell of one replicate, as a list of record dicts."""
    cfg = config
    spec_seed, noise_seed = replicate_seeds(cfg.master_seed, rep)
    records = []
    cells = [(m, mode, pv) for m in cfg.methods for mode in cfg.modes for pv in cfg.pv_grid]

    def fail_all(q, gammas, methods, msg):
        for g in gammas:
            for m, mode, pv in cells:
                if m in methods:
                    records.append(_record(rep, m, mode, q, g, pv, error=msg))

    try:
        spec = generate_process_spec(cfg.p, cfg.tau, cfg.n_links, spec_seed, cfg.self_links)
        truth = true_network(spec)
        panel = simulate(spec, max(cfg.q_grid) + cfg.tau, cfg.burn_in, noise_seed)
    except SparseCausalError as exc:
        for q in cfg.q_grid:
            fail_all(q, cfg.gamma_grid, cfg.methods, f"simulation: {exc}")
        return records

    for q in sorted(cfg.q_grid):
        try:
            lagged = build_lagged_panel(panel.head(q + cfg.tau), cfg.tau)
            model = covariance(lagged, standardize=cfg.standardize)
        except SparseCausalError as exc:
            fail_all(q, cfg.gamma_grid, cfg.methods, f"covariance: {exc}")
            continue
        for method in cfg.methods:
            kwargs = ({"tol": cfg.glasso_tol, "max_iter": cfg.glasso_max_iter}
                      if method == "glasso" else {})
            for gamma in cfg.gamma_grid:
                try:
                    prec = estimate(model, method, gamma, **kwargs)
                except SparseCausalError as exc:
                    fail_all(q, [gamma], [method], f"{method}: {type(exc).__name__}: {exc}")
                    continue
                for mode in cfg.modes:
                    try:
                        if mode == "inference":
                            net = inference_network(prec, cfg.tau)
                            nets = {pv: net for pv in cfg.pv_grid}
                        else:
                            if mode == "conditional":
                                te = te_matrix(prec, mode="conditional", tau=cfg.tau)
                            else:
                                te = te_matrix(prec, mode="unconditional", tau=cfg.tau,
                                               method=method, gamma=gamma, model=model,
                                               unconditional_source=cfg.unconditional_source,
                                               **kwargs)
                            nets = {pv: validated_network(
                                        te, lagged.q, cfg.tau,
                                        ValidationParams(p_v=pv, r=cfg.r, bonferroni=cfg.bonferroni))
                                    for pv in cfg.pv_grid}
                    except SparseCausalError as exc:
                        for pv in cfg.pv_grid:
                            records.append(_record(rep, method, mode, q, gamma, pv,
                                                   error=f"{mode}: {type(exc).__name__}: {exc}"))
                        continue
                    for pv in cfg.pv_grid:
                        counts = confusion(nets[pv], truth)
                        records.append(_record(rep, method, mode, q, gamma, pv, counts, cfg.p))
    return records


def _run_replicate_star(args):
    return run_replicate(*args)


def _flag(pvals, n_total):
    if len(pvals) < n_total or not pvals:
        return "none"
    if all(pv < DOUBLE_STAR_P for pv in pvals):
        return "double-star"
    if all(pv < STAR_P for pv in pvals):
        return "star"
    return "none"


def aggregate(config, records):
    """Average per-replicate ratios into one :class:`CellResult` per cell."""
    order = []
    for method in config.methods:
        for mode in config.modes:
            for q in sorted(config.q_grid):
                for gamma in config.gamma_grid:
                    for pv in config.pv_grid:
                        order.append((method, mode, q, gamma, pv))
    groups = {k: [] for k in order}
    for r in records:
        groups[(r["method"], r["mode"], r["q"], r["gamma"], r["pv"])].append(r)
    cells = []
    for key in order:
        rs = groups[key]
        ok = [r for r in rs if r["error"] is None]
        failures = sorted({r["error"] for r in rs if r["error"] is not None})
        if ok:
            K = np.array([r["TP"] + r["FN"] for r in ok], dtype=float)
            m = np.array([r["FP"] + r["TN"] for r in ok], dtype=float)
            tp = np.array([r["TP"] for r in ok], dtype=float)
            fp = np.array([r["FP"] for r in ok], dtype=float)
            tp_rate = float(np.mean(tp / K))
            fp_over_n = float(np.mean(fp / K))
            fp_rate = float(np.mean(fp / m))
        else:
            tp_rate = fp_over_n = fp_rate = float("nan")
        flag = _flag([r["hyper_p"] for r in ok], config.replicates)
        cells.append(CellResult(*key, tp_rate, fp_over_n, fp_rate, flag, len(ok), failures))
    return cells


def run_experiment(config, progress=None):
    """Run every replicate and aggregate; never aborts on a per-cell failure."""
    start = time.perf_counter()
    reps = range(config.replicates)
    if config.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            per_rep = list(pool.map(_run_replicate_star, [(config, r) for r in reps]))
    else:
        per_rep = []
        for r in reps:
            per_rep.append(run_replicate(config, r))
            if progress:
                progress(r + 1, config.replicates)
    records = [rec for rs in per_rep for rec in rs]
    cells = aggregate(config, records)
    warnings = []
    for c in cells:
        for f in c.failures:
            warnings.append(f"{c.method}/{c.mode} q={c.q} gamma={c.gamma:g} pv={c.pv:g}: {f}")
    return ExperimentResult(config, cells, records, time.perf_counter() - start, warnings)


def fmt(x):
    """Six significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def write_cells(cells, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELL_FIELDS)
        for c in cells:
            w.writerow([fmt(getattr(c, f)) for f in CELL_FIELDS])


def read_cells(path):
    cells = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CELL_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise InvalidArgumentError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            cells.append(CellResult(
                method=row["method"], mode=row["mode"], q=int(row["q"]),
                gamma=float(row["gamma"]), pv=float(row["pv"]),
                tp_rate=float(row["tp_rate"]), fp_over_n=float(row["fp_over_n"]),
                fp_rate=float(row["fp_rate"]), sig_flag=row["sig_flag"],
                n_replicates=int(row["n_replicates"])))
    return cells


def roc_points(cells):
    """One ROC row per cell: ``(method, mode, q, gamma, pv, FP/m, TP/n)``."""
    if not cells:
        raise InvalidArgumentError("roc_points needs at least one cell")
    return [(c.method, c.mode, c.q, c.gamma, c.pv, c.fp_rate, c.tp_rate) for c in cells]


def write_roc(cells, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROC_FIELDS)
        for row in roc_points(cells):
            w.writerow([fmt(x) for x in row])


def write_records(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPLICATE_FIELDS)
        for r in records:
            w.writerow(["" if r[f] is None else fmt(r[f]) for f in REPLICATE_FIELDS])


def write_report(result, path):
    cfg = result.config
    lines = [
        "sparsecausal experiment report",
        f"kernels: {_backend.NAME}",
        f"wall time: {result.wall_time:.6g} s",
        "length handling: prefix reuse (each q uses the first q + tau rows of one path per replicate)",
        "config:",
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True),
        f"warnings: {len(result.warnings)}",
    ]
    lines += [f"  {w}" for w in result.warnings]
    Path(path).write_text("\n".join(lines) + "\n")


def write_outputs(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cells(result.cells, out / "cells.csv")
    write_roc(result.cells, out / "roc.csv")
    write_records(result.records, out / "replicates.csv")
    write_report(result, out / "report.txt")
    return out


_FLAG_MARK = {"none": "", "star": "*", "double-star": "**"}
_METHOD_LABEL = {"ridge": "ridge", "glasso": "Glasso", "logo": "LoGo"}


def format_table(cells, gamma, pv, mode="conditional"):
    """Rows ``<method> TP/n`` and ``<method> FP/n`` against columns ``q``.

    TP/n cells carry ``*`` when every replicate had hypergeometric P < 0.05
    and ``**`` when every replicate had P < 1e-8.
    """
    sel = [c for c in cells if c.mode == mode
           and math.isclose(c.gamma, gamma, rel_tol=1e-5)
           and math.isclose(c.pv, pv, rel_tol=1e-5)]
    if not sel:
        raise InvalidArgumentError(f"no cells for mode={mode}, gamma={gamma:g}, pv={pv:g}")
    qs = sorted({c.q for c in sel})
    by = {(c.method, c.q): c for c in sel}
    methods = [m for m in METHODS if any(c.method == m for c in sel)]
    width = 10
    lines = ["q".ljust(14) + "".join(str(q).rjust(width) for q in qs)]
    for m in methods:
        tp_row, fp_row = f"{_METHOD_LABEL[m]} TP/n".ljust(14), f"{_METHOD_LABEL[m]} FP/n".ljust(14)
        for q in qs:
            c = by.get((m, q))
            if c is None or math.isnan(c.tp_rate):
                tp_row += "-".rjust(width)
                fp_row += "-".rjust(width)
                continue
            tp_row += (f"{c.tp_rate:.2f}" + _FLAG_MARK.get(c.sig_flag, "")).rjust(width)
            fp_row += f"{c.fp_over_n:.2f}".rjust(width)
        lines += [tp_row, fp_row]
    lines.append("*  P < 0.05 for every replicate;  **  P < 1e-8 for every replicate")
    return "\n".join(lines)
