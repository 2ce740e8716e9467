"""Command-line front end: run experiment matrices, evaluate and export
circuits, analyze result sets.

Verbs: run, eval, export-verilog, analyze. Experiment configuration is a
strictly validated JSON file; results land in a schema-versioned CSV plus
per-run JSON/Verilog artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import jsonschema

from .analysis import (
    METRIC_COLUMNS,
    RESULTS_COLUMNS,
    RESULTS_SCHEMA,
    correlation_matrix,
    load_results_csv,
    matrix_to_csv,
    pareto_front,
    pareto_points_to_csv,
    points_from_rows,
    significance_matrix,
)
from .circuit import (
    CgpParams,
    GateFunction,
    GenomeFormatError,
    decode_active,
    export_verilog,
    genome_from_dict,
    genome_to_dict,
)
from .cost import DEFAULT_COST_TABLE, CostTable, load_cost_table
from .golden import GoldenSpec, generate_golden, required_nodes
from .metrics import (
    GaussSpec,
    error_profile,
    error_stddev,
    gauss_satisfied,
    profile_to_dict,
    relative_profile,
)
from .search import (
    Constraint,
    ConstraintSet,
    Metric,
    RunOutcome,
    SearchConfig,
    run_matrix,
    run_result_to_dict,
)
from .simulator import build_input_planes, evaluate_genome


class ConfigError(ValueError):
    """Experiment configuration rejected; message carries the JSON path."""


_CONSTRAINT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["metric"],
    "properties": {
        "metric": {"enum": [m.value for m in Metric]},
        "threshold_pct": {"type": "number", "minimum": 0},
        "sigma": {"type": "number", "minimum": 1},
        "amplitude_mode": {"enum": ["mass-normalized", "count-normalized"]},
    },
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["golden", "cgp", "search", "constraint_grid"],
    "properties": {
        "golden": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "width"],
            "properties": {
                "kind": {"enum": ["adder", "multiplier"]},
                "width": {"type": "integer", "minimum": 1},
            },
        },
        "cgp": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_nodes"],
            "properties": {
                "n_nodes": {"type": "integer", "minimum": 1},
                "levels_back": {"type": ["integer", "null"], "minimum": 1},
                "gate_set": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"enum": [fn.value for fn in GateFunction]},
                },
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "required": ["budget_evals"],
            "properties": {
                "budget_evals": {"type": "integer", "minimum": 1},
                "lambda": {"type": "integer", "minimum": 1},
                "h": {"type": "integer", "minimum": 1},
                "wall_clock_secs": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "repeats": {"type": "integer", "minimum": 1},
                "base_seed": {"type": "integer"},
            },
        },
        "constraint_grid": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "constraints"],
                "properties": {
                    "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.+-]+$"},
                    "constraints": {"type": "array", "minItems": 1, "items": _CONSTRAINT_SCHEMA},
                },
            },
        },
        "cost_table": {"type": ["string", "null"]},
        "output_dir": {"type": ["string", "null"]},
    },
}


@dataclass
class ExperimentConfig:
    golden: GoldenSpec
    params: CgpParams
    base: SearchConfig
    grid: list[ConstraintSet]
    repeats: int
    output_dir: str | None


def _constraint_from_entry(entry: dict, where: str) -> Constraint:
    metric = Metric(entry["metric"])
    if metric is Metric.GAUSS:
        if "sigma" not in entry:
            raise ConfigError(f"{where}: gauss constraint requires 'sigma'")
        if "threshold_pct" in entry:
            raise ConfigError(f"{where}: gauss constraint takes 'sigma', not 'threshold_pct'")
        return Constraint(metric, gauss=GaussSpec(
            sigma=float(entry["sigma"]),
            amplitude_mode=entry.get("amplitude_mode", "mass-normalized"),
        ))
    if "sigma" in entry or "amplitude_mode" in entry:
        raise ConfigError(f"{where}: 'sigma'/'amplitude_mode' only apply to the gauss metric")
    if metric is Metric.ACC0:
        return Constraint(metric)
    if "threshold_pct" not in entry:
        raise ConfigError(f"{where}: {metric.value} constraint requires 'threshold_pct'")
    return Constraint(metric, threshold_pct=float(entry["threshold_pct"]))


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Parse and fully validate an experiment file before any run starts."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(raw, EXPERIMENT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{path}: at {exc.json_path}: {exc.message}") from exc

    golden = GoldenSpec(kind=raw["golden"]["kind"], width=raw["golden"]["width"])
    cgp = raw["cgp"]
    gate_set = tuple(GateFunction(name) for name in cgp["gate_set"]) if "gate_set" in cgp \
        else CgpParams.__dataclass_fields__["gate_set"].default
    try:
        params = CgpParams(
            n_inputs=golden.n_inputs,
            n_outputs=golden.n_outputs,
            n_nodes=cgp["n_nodes"],
            levels_back=cgp.get("levels_back"),
            gate_set=gate_set,
        )
        needed = required_nodes(golden, gate_set)
        if params.n_nodes < needed:
            raise ConfigError(
                f"{path}: at $.cgp.n_nodes: the exact {golden.kind} needs {needed} nodes, "
                f"got {params.n_nodes}"
            )
        grid = []
        for gi, entry in enumerate(raw["constraint_grid"]):
            where = f"{path}: at $.constraint_grid[{gi}]"
            constraints = tuple(
                _constraint_from_entry(c, f"{where}.constraints[{ci}]")
                for ci, c in enumerate(entry["constraints"])
            )
            grid.append(ConstraintSet(constraints, name=entry["name"]))
        names = [cs.name for cs in grid]
        if len(set(names)) != len(names):
            raise ConfigError(f"{path}: at $.constraint_grid: duplicate constraint-set names")

        cost_table = DEFAULT_COST_TABLE
        if raw.get("cost_table"):
            table_path = Path(raw["cost_table"])
            if not table_path.is_absolute():
                table_path = path.parent / table_path
            cost_table = load_cost_table(table_path)

        search = raw["search"]
        base = SearchConfig(
            golden=golden,
            params=params,
            constraints=grid[0],
            budget_evals=search["budget_evals"],
            lambda_=search.get("lambda", 4),
            h=search.get("h", 5),
            wall_clock_secs=search.get("wall_clock_secs"),
            seed=search.get("base_seed", 0),
            cost_table=cost_table,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig(
        golden=golden,
        params=params,
        base=base,
        grid=grid,
        repeats=search.get("repeats", 1),
        output_dir=raw.get("output_dir"),
    )


def _csv_row(outcome: RunOutcome, grid_by_name: dict[str, ConstraintSet]) -> str:
    result = outcome.result
    rel = relative_profile(result.best_profile)
    gauss_specs = [c.gauss for c in grid_by_name[outcome.config_name].constraints
                   if c.metric is Metric.GAUSS]
    gauss_ok = "" if not gauss_specs else str(gauss_satisfied(result.best_profile, gauss_specs[0]))
    cells = (
        outcome.config_name, str(outcome.seed), str(result.evaluations_used),
        repr(result.relative_power), repr(rel.wce_pct), repr(rel.mae_pct),
        repr(rel.er_pct), repr(rel.mre_pct), repr(rel.avg_pct),
        str(result.best_profile.acc0), repr(error_stddev(result.best_profile)), gauss_ok,
    )
    return ",".join(cells)


def write_results_csv(path: Path, outcomes: list[RunOutcome],
                      grid: list[ConstraintSet]) -> None:
    """Create or append; the schema comment and header are written only once."""
    grid_by_name = {cs.name: cs for cs in grid}
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    fresh = not path.exists()
    with open(path, "a", newline="") as fh:
        if fresh:
            fh.write(f"# schema={RESULTS_SCHEMA}\n")
            fh.write(",".join(RESULTS_COLUMNS) + "\n")
        fh.write(f"# generated={stamp}\n")
        for outcome in outcomes:
            if outcome.result is not None:
                fh.write(_csv_row(outcome, grid_by_name) + "\n")


def _artifact_stem(outcome: RunOutcome) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.+-]", "_", outcome.config_name)
    return f"{safe}_s{outcome.seed}"


def cmd_run(args) -> int:
    try:
        cfg = load_experiment_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    base = cfg.base
    if args.seed is not None:
        base = replace(base, seed=args.seed)
    if args.budget_evals is not None:
        base = replace(base, budget_evals=args.budget_evals)
    if args.wall_clock_secs is not None:
        base = replace(base, wall_clock_secs=args.wall_clock_secs)
    if args.cost_table is not None:
        base = replace(base, cost_table=load_cost_table(args.cost_table))

    out_dir = Path(args.out_dir or cfg.output_dir or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)

    outcomes = run_matrix(base, cfg.grid, cfg.repeats, workers=workers)
    write_results_csv(out_dir / "results.csv", outcomes, cfg.grid)

    failures = 0
    for outcome in outcomes:
        if outcome.result is None:
            failures += 1
            print(f"run {outcome.config_name} seed {outcome.seed} failed: {outcome.error}",
                  file=sys.stderr)
            continue
        stem = _artifact_stem(outcome)
        result = outcome.result
        (out_dir / f"{stem}.json").write_text(
            json.dumps(run_result_to_dict(result), indent=2) + "\n")
        (out_dir / f"{stem}.genome.json").write_text(
            json.dumps(genome_to_dict(result.best_genome), indent=2) + "\n")
        netlist = decode_active(result.best_genome)
        (out_dir / f"{stem}.v").write_text(export_verilog(netlist, re.sub(r"[.+-]", "_", stem)))
        print(f"{outcome.config_name} seed {outcome.seed}: relative power "
              f"{result.relative_power:.4f} after {result.evaluations_used} evaluations")
    print(f"wrote {out_dir / 'results.csv'}")
    return 0 if failures == 0 else 1


def _parse_golden_arg(text: str) -> GoldenSpec:
    m = re.fullmatch(r"(adder|multiplier):(\d+)", text)
    if not m:
        raise ValueError(f"--golden must look like 'multiplier:8' or 'adder:4', got {text!r}")
    return GoldenSpec(kind=m.group(1), width=int(m.group(2)))


def _load_genome_file(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read genome file: {exc}", file=sys.stderr)
        return None
    try:
        return genome_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        print(f"error: {path}: line {exc.lineno} column {exc.colno} (byte offset {exc.pos}): "
              f"{exc.msg}", file=sys.stderr)
        return None
    except GenomeFormatError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None


def cmd_eval(args) -> int:
    genome = _load_genome_file(args.genome)
    if genome is None:
        return 2
    try:
        spec = _parse_golden_arg(args.golden)
        golden_genome = generate_golden(spec, genome.params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    planes = build_input_planes(genome.params.n_inputs)
    golden_ints = evaluate_genome(golden_genome, planes)
    cand_ints = evaluate_genome(genome, planes)
    profile = error_profile(golden_ints, cand_ints)
    rel = relative_profile(profile)
    payload = {
        "profile": profile_to_dict(profile),
        "relative_pct": {
            "wce": rel.wce_pct, "mae": rel.mae_pct, "er": rel.er_pct,
            "mre": rel.mre_pct, "avg": rel.avg_pct,
        },
    }
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 0


def cmd_export_verilog(args) -> int:
    genome = _load_genome_file(args.genome)
    if genome is None:
        return 2
    try:
        text = export_verilog(decode_active(genome), args.module_name)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_analyze(args) -> int:
    try:
        rows = load_results_csv(args.results)
    except OSError as exc:
        print(f"error: cannot read results CSV: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not rows:
        print("error: results CSV has no data rows", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir or "analysis")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if args.mode == "pareto":
        points = points_from_rows(rows)
        for metric in METRIC_COLUMNS:
            front = pareto_front(points, metric)
            target = out_dir / f"pareto_{metric}.csv"
            target.write_text(pareto_points_to_csv(front))
            written.append(target)
            if args.plot:
                from .plots import write_pareto_svg
                svg = out_dir / f"pareto_{metric}.svg"
                write_pareto_svg(points, front, metric, svg)
                written.append(svg)
    elif args.mode == "correlation":
        labels, matrix = correlation_matrix(rows)
        target = out_dir / "correlation.csv"
        target.write_text(matrix_to_csv(labels, matrix))
        written.append(target)
        if args.plot:
            from .plots import write_correlation_svg
            svg = out_dir / "correlation.svg"
            write_correlation_svg(labels, matrix, svg)
            written.append(svg)
    else:  # significance
        labels, matrix = significance_matrix(rows)
        target = out_dir / "significance.csv"
        target.write_text(matrix_to_csv(labels, matrix))
        written.append(target)

    for target in written:
        print(f"wrote {target}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axcirc",
        description="Evolve and analyze approximate arithmetic circuits under error constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the experiment matrix from a config file")
    p_run.add_argument("--config", required=True, help="experiment JSON file")
    p_run.add_argument("--out-dir", help="artifact directory (default: config output_dir or 'results')")
    p_run.add_argument("--workers", type=int, help="parallel runs (default: logical CPUs)")
    p_run.add_argument("--seed", type=int, help="override the config base seed")
    p_run.add_argument("--budget-evals", type=int, help="override the evaluation budget")
    p_run.add_argument("--wall-clock-secs", type=float, help="override the per-run wall-clock limit")
    p_run.add_argument("--cost-table", help="override the cost table JSON file")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="print the error profile of a stored genome")
    p_eval.add_argument("genome", help="genome JSON file")
    p_eval.add_argument("--golden", required=True, help="reference circuit, e.g. multiplier:8")
    p_eval.set_defaults(func=cmd_eval)

    p_export = sub.add_parser("export-verilog", help="emit a genome's active netlist as Verilog")
    p_export.add_argument("genome", help="genome JSON file")
    p_export.add_argument("--module-name", default="circuit")
    p_export.add_argument("-o", "--output", help="output file (default: stdout)")
    p_export.set_defaults(func=cmd_export_verilog)

    p_an = sub.add_parser("analyze", help="fronts, metric correlations or config significance")
    p_an.add_argument("results", help="results CSV produced by 'run'")
    p_an.add_argument("--mode", choices=["pareto", "correlation", "significance"], required=True)
    p_an.add_argument("--out-dir", help="artifact directory (default: 'analysis')")
    p_an.add_argument("--plot", action="store_true", help="also write SVG plots")
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
