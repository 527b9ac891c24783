"""
Seeded experiment sweeps and their CSV/JSON outputs.

Every row draws from its own seed substream, and rows are sorted before
writing, so output does not depend on the worker count.
"""
import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from backend.api.config import settings
from backend.core.linalg import rel_fro
from backend.models import (
    ArchitectureEntry,
    ArchitectureFamily,
    EquivalenceReport,
    ExperimentRecord,
    MIMOScenario,
    ParameterKind,
    PortPartition,
    ScatterRow,
    ScenarioConfig,
    SummaryRow,
    SweepResult,
)
from backend.optimizers import optimize_s_group, optimize_y_forest, optimize_z_group_mc
from backend.harness.scenario import channel_seed, derive_seed, solver_seed, synthesize_scenario
from backend.ris_service.analysis import los_delta, monte_carlo_powers
from backend.ris_service.channel import general_channel
from backend.ris_service.netparams import convert, random_passive_network, random_passive_terminations

SCHEMA_VERSION = 1

RECORD_FIELDS = ["n_i", "architecture", "coupling", "trial", "seed", "solver_seed",
                 "power_w", "power_db", "iterations", "converged", "wall_time"]
SUMMARY_FIELDS = ["n_i", "architecture", "coupling", "trials", "mean_power_w",
                  "mean_power_db", "se_power_w", "nonconverged"]
SCATTER_FIELDS = ["ni", "mean_pr_db", "mean_prp_db", "delta_emp", "delta_closed"]


def power_db(p: float) -> float:
    """10 log10(P / 1 W); zero power maps to -inf."""
    return float(10 * np.log10(p)) if p > 0 else float("-inf")


def select_solver(entry: ArchitectureEntry, coupling: bool) -> Tuple[Callable, str]:
    """Solver and formulation ('z', 'y' or 's') for one architecture row."""
    if coupling:
        return optimize_z_group_mc, "z"
    if entry.family in (ArchitectureFamily.TREE, ArchitectureFamily.FOREST):
        return optimize_y_forest, "y"
    return optimize_s_group, "s"


def run_trial(cfg: ScenarioConfig, n_i: int, arch_index: int, trial: int) -> ExperimentRecord:
    entry = cfg.architectures[arch_index]
    seed = channel_seed(cfg.master_seed, n_i, trial)
    s_seed = solver_seed(cfg.master_seed, n_i, arch_index, trial)
    scenarios = synthesize_scenario(cfg, seed, n_i)
    solver, formulation = select_solver(entry, cfg.coupling)
    scn: MIMOScenario = getattr(scenarios, formulation)
    opts = cfg.solver.model_copy(update={"seed": s_seed})

    started = time.perf_counter()
    solution = solver(scn, entry.to_spec(n_i), opts)
    elapsed = time.perf_counter() - started

    return ExperimentRecord(
        n_i=n_i,
        architecture=entry.label,
        coupling=cfg.coupling,
        trial=trial,
        seed=seed,
        solver_seed=s_seed,
        power_w=solution.power,
        power_db=power_db(solution.power),
        iterations=solution.iterations,
        converged=solution.converged,
        wall_time=elapsed,
    )


def summarize(records: List[ExperimentRecord], cfg: ScenarioConfig) -> List[SummaryRow]:
    order = {entry.label: k for k, entry in enumerate(cfg.architectures)}
    groups: Dict[Tuple[int, str], List[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.n_i, rec.architecture), []).append(rec)

    rows = []
    for (n_i, label), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        powers = np.array([r.power_w for r in recs])
        se = float(powers.std(ddof=1) / np.sqrt(powers.size)) if powers.size > 1 else 0.0
        mean = float(powers.mean())
        rows.append(SummaryRow(
            n_i=n_i, architecture=label, coupling=cfg.coupling, trials=len(recs),
            mean_power_w=mean, mean_power_db=power_db(mean), se_power_w=se,
            nonconverged=sum(not r.converged for r in recs),
        ))
    return rows


def run_optimize_sweep(cfg: ScenarioConfig, verbose: bool = False) -> SweepResult:
    tasks = [(n_i, k, trial)
             for n_i in cfg.n_i_list
             for k in range(len(cfg.architectures))
             for trial in range(cfg.trials)]
    if verbose or settings.debug:
        print(f"🚀 Optimization sweep: {len(tasks)} runs on {cfg.workers} workers (seed {cfg.master_seed})")

    def work(task):
        return run_trial(cfg, *task)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            records = list(executor.map(work, tasks))
    else:
        records = [work(task) for task in tasks]

    index = {entry.label: k for k, entry in enumerate(cfg.architectures)}
    records.sort(key=lambda r: (r.n_i, index[r.architecture], r.trial))
    return SweepResult(master_seed=cfg.master_seed, records=records, summary=summarize(records, cfg))


def run_scatter_sweep(cfg: ScenarioConfig, verbose: bool = False) -> SweepResult:
    rows = []
    for n_i in cfg.n_i_list:
        if verbose or settings.debug:
            print(f"📡 Structural scattering: N_I={n_i}, {cfg.trials} trials")
        mc = monte_carlo_powers(n_i, cfg.trials, derive_seed(cfg.master_seed, n_i),
                                model=cfg.channel_model, workers=cfg.workers)
        closed = los_delta(n_i) if cfg.channel_model == "los_random_phase" else None
        rows.append(ScatterRow(ni=n_i, mean_pr_db=power_db(mc.mean_pr), mean_prp_db=power_db(mc.mean_prp),
                               delta_emp=mc.delta_emp, delta_closed=closed))
    return SweepResult(master_seed=cfg.master_seed, scatter=rows)


def run_sweep(cfg: ScenarioConfig, verbose: bool = False) -> SweepResult:
    """Run the configured experiment and write its outputs when ``cfg.output`` is set."""
    if cfg.experiment == "scatter":
        result = run_scatter_sweep(cfg, verbose)
    else:
        result = run_optimize_sweep(cfg, verbose)
    if cfg.output:
        outputs = write_outputs(result, cfg.output, cfg.format)
        result = result.model_copy(update={"outputs": outputs})
    return result


def json_safe(value):
    """Replace non-finite floats (zero power in dB) with None for strict JSON."""
    if isinstance(value, float):
        return value if np.isfinite(value) else None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def _header(master_seed: int) -> str:
    return f"# schema={SCHEMA_VERSION} master_seed={master_seed} power_db=10*log10(P/1W)\n"


def _cell(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else value


def _write_csv(path: Path, master_seed: int, fields: List[str], rows: List[dict]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write(_header(master_seed))
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def summary_path(out: Path) -> Path:
    return out.with_name(f"{out.stem}_summary{out.suffix or '.csv'}")


def write_outputs(result: SweepResult, output: str, fmt: str = "csv") -> List[str]:
    """Write the sweep to ``output`` (plus a summary file for optimization sweeps)."""
    out = Path(output)
    if fmt == "json":
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            payload = json_safe(result.model_dump(exclude={"outputs"}))
            payload["schema"] = SCHEMA_VERSION
            out.write_text(json.dumps(payload, indent=2, allow_nan=False))
        except OSError as e:
            raise OSError(f"cannot write {out}: {e.strerror or e}") from e
        return [str(out)]

    if result.scatter:
        _write_csv(out, result.master_seed, SCATTER_FIELDS, [r.model_dump() for r in result.scatter])
        return [str(out)]

    _write_csv(out, result.master_seed, RECORD_FIELDS, [r.model_dump() for r in result.records])
    summary = summary_path(out)
    _write_csv(summary, result.master_seed, SUMMARY_FIELDS, [r.model_dump() for r in result.summary])
    return [str(out), str(summary)]


def run_equivalence_check(seed: int, fixtures: int = 100,
                          partition: Optional[PortPartition] = None) -> EquivalenceReport:
    """Largest relative deviation among Z-, Y- and S-derived general channels."""
    partition = partition or PortPartition(n_t=2, n_i=2, n_r=2)
    worst = 0.0
    for k in range(fixtures):
        net = random_passive_network(partition, derive_seed(seed, k, 0))
        terms = random_passive_terminations(partition, derive_seed(seed, k, 1))
        h = {kind: general_channel(kind, convert(net, kind), terms).h for kind in ParameterKind}
        worst = max(
            worst,
            rel_fro(h[ParameterKind.Y], h[ParameterKind.Z]),
            rel_fro(h[ParameterKind.S], h[ParameterKind.Z]),
            rel_fro(h[ParameterKind.S], h[ParameterKind.Y]),
        )
    return EquivalenceReport(seed=seed, fixtures=fixtures, max_deviation=worst)
