"""Factorial experiment harness.

An :class:`ExperimentPlan` names one benchmark experiment and the grids
to cross: weight functions, proposal configurations, candidate counts M,
and a target-parameter axis whose meaning depends on the experiment
(banana: log10 of the curvature B; funnel: log10 of 1/beta; mixture: the
dimension; regression: the dataset index; lighthouse and eight-schools
have no parameter axis). Plans serialise to a flat key/value text file:

    # one "key = value" pair per line, '#' starts a comment
    experiment = banana
    weights = proportional, importance, jump-distance(3), locally-balanced
    proposals = hom-full, het-full, hom-cw, het-cw
    m = 1, 5, 10, 15, 20
    params = -2, -1.75, -1.5, -1.25, -1, -0.75, -0.5
    replicates = 50
    budget_iterations = 2000        # or budget_seconds = 10
    master_seed = 1
    dim = 10                        # optional keys: data_file,
                                    # baseline_size, scaling, het_spread

List-valued keys take comma-separated entries; ``params = none`` marks
experiments without a parameter axis.

``expand_plan`` crosses the grids into cells, dropping combinations that
cannot run (het-cw needs at least two candidates). Every run's seed is
derived by hashing (master_seed, cell id, run index), so any cell can be
reproduced in isolation and parallel execution cannot change results:
rows are computed independently and sorted canonically before writing.

The result CSV has one row per (run, metric) with the schema

    experiment,target_param,proposal,weight,M,run,seed,n_iter,n_accept,
    burn_in,wall_s,metric,value

plus aggregate rows (run = -1) for across-run statistics such as the
Monte Carlo standard error of posterior means. ``wall_s`` is a timing
and is excluded from the determinism contract. A failed chain yields a
``failed`` metric row rather than aborting the sweep.
"""

from __future__ import annotations

import hashlib
import math
import os
import platform
import json
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import diagnostics
from .kernels import KernelConfig, run_chain
from .proposals import ProposalKind, make_proposal_state, parse_proposal_config
from .targets import (
    BananaParams,
    EightSchoolsData,
    FunnelParams,
    LighthouseData,
    MixtureParams,
    banana_target,
    eight_schools_target,
    funnel_target,
    lighthouse_target,
    make_regression_dataset,
    mixture_target,
    regression_target,
)
from .weights import parse_weight_spec

__all__ = [
    "ExperimentPlan",
    "Cell",
    "ResultRow",
    "SummaryRow",
    "EXPERIMENTS",
    "PAPER_BUDGET_SECONDS",
    "default_plan",
    "write_plan_file",
    "read_plan_file",
    "expand_plan",
    "plan_counts",
    "derive_seed",
    "run_cell",
    "run_plan",
    "write_results_csv",
    "read_results_csv",
    "summarize",
    "write_summary_csv",
]

EXPERIMENTS = ("banana", "funnel", "mixture", "regression", "lighthouse", "eight-schools")

PAPER_BUDGET_SECONDS = {
    "banana": 10.0,
    "funnel": 10.0,
    "mixture": 30.0,
    "regression": 90.0,
    "lighthouse": 20.0,
    "eight-schools": 45.0,
}

_DEFAULT_WEIGHTS = ("proportional", "importance", "jump-distance(3)", "locally-balanced")
_DEFAULT_PROPOSALS = ("hom-full", "het-full", "hom-cw", "het-cw")

_DEFAULT_M = {
    "banana": (1, 5, 10, 15, 20),
    "funnel": (1, 5, 10, 15, 20),
    "mixture": (1, 5, 10, 15, 20),
    "regression": (1, 2, 4, 6, 8, 10),
    "lighthouse": (1, 10, 20, 30, 40, 50),
    "eight-schools": (1, 5, 10, 15, 20),
}

_DEFAULT_PARAMS = {
    "banana": (-2.0, -1.75, -1.5, -1.25, -1.0, -0.75, -0.5),
    "funnel": (-0.5, -0.25, 0.0, 0.25, 0.5),
    "mixture": (2, 4, 6, 8, 10),
    "regression": tuple(range(10)),
    "lighthouse": (None,),
    "eight-schools": (None,),
}

RESULT_COLUMNS = (
    "experiment", "target_param", "proposal", "weight", "M", "run", "seed",
    "n_iter", "n_accept", "burn_in", "wall_s", "metric", "value",
)

SUMMARY_COLUMNS = (
    "experiment", "target_param", "proposal", "weight", "M", "metric",
    "count", "median", "q25", "q75", "q05", "q95",
)


@dataclass(frozen=True)
class ExperimentPlan:
    """One experiment's grids and budgets; see the module docstring."""

    experiment: str
    weights: tuple
    proposals: tuple
    m_values: tuple
    params: tuple
    replicates: int
    master_seed: int = 1
    budget_iterations: int | None = None
    budget_seconds: float | None = None
    dim: int | None = None
    data_file: str | None = None
    baseline_size: int = 100_000
    scaling: float = 2.38
    het_spread: float = 1.0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if (self.budget_iterations is None) == (self.budget_seconds is None):
            raise ValueError("set exactly one of budget_iterations / budget_seconds")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        for w in self.weights:
            parse_weight_spec(w)
        for p in self.proposals:
            parse_proposal_config(p, M=2)


@dataclass(frozen=True)
class Cell:
    """One factorial setting: everything but the run index."""

    experiment: str
    param: object
    proposal: str
    weight: str
    M: int

    def cell_id(self) -> str:
        return (f"{self.experiment}|param={_format_param(self.param)}"
                f"|proposal={self.proposal}|weight={self.weight}|M={self.M}")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    target_param: str
    proposal: str
    weight: str
    M: int
    run: int
    seed: int
    n_iter: int
    n_accept: int
    burn_in: int
    wall_s: float
    metric: str
    value: float


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    target_param: str
    proposal: str
    weight: str
    M: int
    metric: str
    count: int
    median: float
    q25: float
    q75: float
    q05: float
    q95: float


def _format_param(param) -> str:
    if param is None:
        return ""
    if isinstance(param, (int, np.integer)):
        return str(int(param))
    return repr(float(param))


def _parse_param(text: str):
    if text == "" or text.lower() == "none":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a sequence of identifying parts."""
    joined = "|".join(str(p) for p in parts)
    digest = hashlib.blake2b(joined.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


# ---------------------------------------------------------------------------
# plans


def default_plan(experiment: str, scale: str = "desk", master_seed: int = 1) -> ExperimentPlan:
    """The experiment's standard grids at desk or paper scale.

    Desk scale swaps the wall-clock budgets for a short deterministic
    iteration budget and fewer replicates so sweeps finish in minutes.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    if scale not in ("desk", "paper"):
        raise ValueError("scale must be 'desk' or 'paper'")
    common = dict(
        experiment=experiment,
        weights=_DEFAULT_WEIGHTS,
        proposals=_DEFAULT_PROPOSALS,
        m_values=_DEFAULT_M[experiment],
        params=_DEFAULT_PARAMS[experiment],
        master_seed=master_seed,
        dim={"banana": 10, "funnel": 9}.get(experiment),
    )
    if scale == "paper":
        return ExperimentPlan(replicates=50,
                              budget_seconds=PAPER_BUDGET_SECONDS[experiment],
                              **common)
    return ExperimentPlan(replicates=5, budget_iterations=2000, **common)


def write_plan_file(plan: ExperimentPlan, path) -> None:
    def fmt(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [
        f"experiment = {plan.experiment}",
        f"weights = {', '.join(plan.weights)}",
        f"proposals = {', '.join(plan.proposals)}",
        f"m = {', '.join(str(m) for m in plan.m_values)}",
        "params = " + (", ".join(_format_param(p) for p in plan.params)
                       if plan.params != (None,) else "none"),
        f"replicates = {plan.replicates}",
        f"master_seed = {plan.master_seed}",
    ]
    if plan.budget_iterations is not None:
        lines.append(f"budget_iterations = {plan.budget_iterations}")
    else:
        lines.append(f"budget_seconds = {fmt(plan.budget_seconds)}")
    if plan.dim is not None:
        lines.append(f"dim = {plan.dim}")
    if plan.data_file is not None:
        lines.append(f"data_file = {plan.data_file}")
    lines.append(f"baseline_size = {plan.baseline_size}")
    lines.append(f"scaling = {fmt(plan.scaling)}")
    lines.append(f"het_spread = {fmt(plan.het_spread)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_plan_file(path) -> ExperimentPlan:
    entries = {}
    for raw_line in Path(path).read_text().splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad plan line (expected key = value): {raw_line!r}")
        key, value = line.split("=", 1)
        entries[key.strip().lower()] = value.strip()

    def split_list(text):
        return tuple(part.strip() for part in text.split(",") if part.strip())

    missing = {"experiment", "weights", "proposals", "m", "params", "replicates"} - set(entries)
    if missing:
        raise ValueError(f"plan file missing keys: {sorted(missing)}")

    params_text = entries["params"]
    if params_text.lower() == "none":
        params = (None,)
    else:
        params = tuple(_parse_param(p) for p in split_list(params_text))

    kwargs = dict(
        experiment=entries["experiment"],
        weights=split_list(entries["weights"]),
        proposals=split_list(entries["proposals"]),
        m_values=tuple(int(m) for m in split_list(entries["m"])),
        params=params,
        replicates=int(entries["replicates"]),
        master_seed=int(entries.get("master_seed", "1")),
    )
    if "budget_iterations" in entries:
        kwargs["budget_iterations"] = int(entries["budget_iterations"])
    if "budget_seconds" in entries:
        kwargs["budget_seconds"] = float(entries["budget_seconds"])
    if "dim" in entries:
        kwargs["dim"] = int(entries["dim"])
    if "data_file" in entries:
        kwargs["data_file"] = entries["data_file"]
    if "baseline_size" in entries:
        kwargs["baseline_size"] = int(entries["baseline_size"])
    if "scaling" in entries:
        kwargs["scaling"] = float(entries["scaling"])
    if "het_spread" in entries:
        kwargs["het_spread"] = float(entries["het_spread"])
    return ExperimentPlan(**kwargs)


def expand_plan(plan: ExperimentPlan) -> list[Cell]:
    """Cross the plan's grids into runnable cells, in a fixed order."""
    cells = []
    for param in plan.params:
        for proposal in plan.proposals:
            for weight in plan.weights:
                for m in plan.m_values:
                    if proposal == ProposalKind.HET_CW.value and m < 2:
                        continue
                    cells.append(Cell(plan.experiment, param, proposal, weight, m))
    if not cells:
        raise ValueError("plan expands to no runnable cells")
    return cells


def plan_counts(plan: ExperimentPlan) -> tuple[int, int]:
    """(settings in the full cross, runnable cells after exclusions)."""
    pre = (len(plan.params) * len(plan.proposals) * len(plan.weights)
           * len(plan.m_values))
    return pre, len(expand_plan(plan))


# ---------------------------------------------------------------------------
# running cells


_POSTERIOR_PARAM_NAMES = {
    "regression": ("beta0", "beta1", "beta2", "beta3", "beta4", "sigma"),
    "lighthouse": ("x0", "y"),
    "eight-schools": ("mu", "tau", "theta1", "theta2", "theta3", "theta4",
                      "theta5", "theta6", "theta7", "theta8"),
}

_baseline_cache: dict = {}


def _build_target(plan: ExperimentPlan, cell: Cell):
    """Target distribution and start point for one cell."""
    exp = plan.experiment
    if exp == "banana":
        d = plan.dim or 10
        target = banana_target(BananaParams(B=10.0 ** float(cell.param), d=d))
        return target, np.zeros(d)
    if exp == "funnel":
        d = plan.dim or 9
        target = funnel_target(FunnelParams(beta=10.0 ** (-float(cell.param)), d=d))
        return target, np.zeros(d + 1)
    if exp == "mixture":
        d = int(cell.param)
        return mixture_target(MixtureParams(d=d)), np.zeros(d)
    if exp == "regression":
        data_seed = derive_seed(plan.master_seed, "dataset", int(cell.param))
        target = regression_target(make_regression_dataset(data_seed))
        x0 = np.zeros(target.dim)
        x0[-1] = 1.0
        return target, x0
    if exp == "lighthouse":
        data = (LighthouseData.read_csv(plan.data_file) if plan.data_file
                else None)
        return lighthouse_target(data), np.array([0.0, 1.0])
    if exp == "eight-schools":
        data = (EightSchoolsData.read_csv(plan.data_file) if plan.data_file
                else None)
        x0 = np.zeros(10)
        x0[1] = 1.0
        return eight_schools_target(data), x0
    raise ValueError(f"unknown experiment {exp!r}")


def _mixture_baseline(plan: ExperimentPlan, d: int) -> np.ndarray:
    seed = derive_seed(plan.master_seed, "mixture-baseline", d)
    key = (d, seed, plan.baseline_size)
    if key not in _baseline_cache:
        _baseline_cache[key] = diagnostics.mixture_direct_sample(
            MixtureParams(d=d), plan.baseline_size, seed
        )
    return _baseline_cache[key]


def _run_metrics(plan: ExperimentPlan, cell: Cell, run) -> tuple[list, int]:
    """Per-run (metric, value) pairs and the burn-in used (-1 if none)."""
    exp = plan.experiment
    if exp == "banana":
        cut = diagnostics.auto_burn_in(run.states)
        out = []
        try:
            m = diagnostics.mess(cut.retained)
            out.append(("mess", m))
            out.append(("mess_per_iter", m / max(run.n_iterations, 1)))
        except diagnostics.DegenerateSampleError:
            out.append(("failed", math.nan))
        return out, cut.burn_in
    if exp == "funnel":
        cut = diagnostics.auto_burn_in(run.states)
        return [("mean_y", float(np.mean(cut.retained[:, 0])))], cut.burn_in
    if exp == "mixture":
        baseline = _mixture_baseline(plan, int(cell.param))
        return [("best_ks", diagnostics.best_ks_over_burnins(run.states, baseline))], -1
    names = _POSTERIOR_PARAM_NAMES[exp]
    cut = diagnostics.auto_burn_in(run.states)
    means = np.mean(cut.retained, axis=0)
    return [(f"posterior_mean_{nm}", float(means[k])) for k, nm in enumerate(names)], cut.burn_in


def run_cell(plan: ExperimentPlan, cell: Cell) -> list[ResultRow]:
    """All replicates of one cell, including aggregate rows."""
    rows = []
    for r in range(plan.replicates):
        rows.extend(_run_one(plan, cell, r))
    rows.extend(_aggregate_rows(plan, cell, rows))
    return rows


def _run_one(plan: ExperimentPlan, cell: Cell, r: int) -> list[ResultRow]:
    seed = derive_seed(plan.master_seed, cell.cell_id(), r)
    param_str = _format_param(cell.param)
    base = dict(experiment=plan.experiment, target_param=param_str,
                proposal=cell.proposal, weight=cell.weight, M=cell.M,
                run=r, seed=seed)
    try:
        target, x0 = _build_target(plan, cell)
        pconf = parse_proposal_config(cell.proposal, M=cell.M,
                                      scaling=plan.scaling,
                                      het_spread=plan.het_spread)
        config = KernelConfig(
            target=target,
            proposal=pconf,
            state=make_proposal_state(pconf, target.dim, x0),
            weight=parse_weight_spec(cell.weight),
        )
        run = run_chain(config, x0, iterations=plan.budget_iterations,
                        seconds=plan.budget_seconds, seed=seed)
        metrics, burn = _run_metrics(plan, cell, run)
        return [
            ResultRow(**base, n_iter=run.n_iterations,
                      n_accept=run.n_updates, burn_in=burn,
                      wall_s=run.wall_seconds, metric=metric, value=value)
            for metric, value in metrics
        ]
    except Exception:
        return [ResultRow(**base, n_iter=0, n_accept=0, burn_in=-1,
                          wall_s=0.0, metric="failed", value=math.nan)]


def _aggregate_rows(plan: ExperimentPlan, cell: Cell, per_run_rows) -> list[ResultRow]:
    """MCSE rows over per-run posterior means, outliers filtered first."""
    if plan.experiment not in _POSTERIOR_PARAM_NAMES:
        return []
    out = []
    param_str = _format_param(cell.param)
    names = _POSTERIOR_PARAM_NAMES[plan.experiment]
    by_metric: dict[str, list[float]] = {}
    for row in per_run_rows:
        if row.metric.startswith("posterior_mean_") and math.isfinite(row.value):
            by_metric.setdefault(row.metric, []).append(row.value)
    for nm in names:
        values = np.asarray(by_metric.get(f"posterior_mean_{nm}", []), dtype=float)
        if values.size >= 4:
            values, _ = diagnostics.iqr_outlier_filter(values)
        if values.size < 2:
            continue
        out.append(ResultRow(
            experiment=plan.experiment, target_param=param_str,
            proposal=cell.proposal, weight=cell.weight, M=cell.M,
            run=-1, seed=0, n_iter=0, n_accept=0, burn_in=-1, wall_s=0.0,
            metric=f"mcse_{nm}", value=diagnostics.mcse_across_runs(values),
        ))
    return out


def _job(args) -> list[ResultRow]:
    plan, cell, r = args
    return _run_one(plan, cell, r)


def _sort_key(row: ResultRow):
    return (row.experiment, row.target_param, row.proposal, row.weight,
            row.M, row.metric, row.run)


def run_plan(plan: ExperimentPlan, out_path, workers: int = 1) -> list[ResultRow]:
    """Run every cell of the plan and write the result CSV.

    ``workers > 1`` fans the (cell, run) jobs over a process pool; the
    row content is identical to a serial run because each row depends
    only on its derived seed.
    """
    cells = expand_plan(plan)
    jobs = [(plan, cell, r) for cell in cells for r in range(plan.replicates)]
    if workers > 1:
        with get_context("spawn").Pool(workers) as pool:
            chunks = pool.map(_job, jobs)
    else:
        chunks = [_job(job) for job in jobs]

    rows: list[ResultRow] = []
    per_cell: dict[Cell, list[ResultRow]] = {}
    for (plan_, cell, _r), chunk in zip(jobs, chunks):
        rows.extend(chunk)
        per_cell.setdefault(cell, []).extend(chunk)
    for cell in cells:
        rows.extend(_aggregate_rows(plan, cell, per_cell[cell]))
    rows.sort(key=_sort_key)
    write_results_csv(rows, out_path)
    if plan.budget_seconds is not None:
        _write_hardware_metadata(out_path)
    return rows


def _write_hardware_metadata(out_path) -> None:
    # wall-clock budgets make iteration counts hardware-dependent, so
    # record where the numbers came from
    meta = {
        "platform": platform.platform(),
        "processor": platform.processor(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
    }
    Path(str(out_path) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


# ---------------------------------------------------------------------------
# result serialisation and summaries


def write_results_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                f"{row.experiment},{row.target_param},{row.proposal},{row.weight},"
                f"{row.M},{row.run},{row.seed},{row.n_iter},{row.n_accept},"
                f"{row.burn_in},{row.wall_s!r},{row.metric},{row.value!r}\n"
            )


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header: {header}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(RESULT_COLUMNS):
                raise ValueError(f"bad results row: {line!r}")
            rows.append(ResultRow(
                experiment=parts[0], target_param=parts[1], proposal=parts[2],
                weight=parts[3], M=int(parts[4]), run=int(parts[5]),
                seed=int(parts[6]), n_iter=int(parts[7]), n_accept=int(parts[8]),
                burn_in=int(parts[9]), wall_s=float(parts[10]),
                metric=parts[11], value=float(parts[12]),
            ))
    return rows


def summarize(rows) -> list[SummaryRow]:
    """Across-run quantile summaries per (cell, metric).

    Only finite values enter the quantiles; ``count`` reports how many
    did. Quantiles use linear interpolation.
    """
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row.experiment, row.target_param, row.proposal, row.weight,
               row.M, row.metric)
        groups.setdefault(key, []).append(row.value)
    out = []
    for key in sorted(groups):
        values = np.asarray([v for v in groups[key] if math.isfinite(v)], dtype=float)
        if values.size:
            med, q25, q75, q05, q95 = np.quantile(values, [0.5, 0.25, 0.75, 0.05, 0.95])
        else:
            med = q25 = q75 = q05 = q95 = math.nan
        out.append(SummaryRow(*key, count=int(values.size), median=float(med),
                              q25=float(q25), q75=float(q75), q05=float(q05),
                              q95=float(q95)))
    return out


def write_summary_csv(summary_rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for s in summary_rows:
            fh.write(
                f"{s.experiment},{s.target_param},{s.proposal},{s.weight},{s.M},"
                f"{s.metric},{s.count},{s.median!r},{s.q25!r},{s.q75!r},"
                f"{s.q05!r},{s.q95!r}\n"
            )
