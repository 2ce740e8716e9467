"""Error-oriented (1+lambda) search: minimize gate cost, errors as hard limits.

Fitness is the candidate's estimated power when its error profile satisfies
every enabled constraint, and infeasible (ordered worse than any finite
cost) otherwise. The parent starts from the exact circuit, so the search
never has to find feasibility first; offspring with equal fitness replace
the parent to keep neutral drift alive.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .circuit import (
    CgpGenome,
    CgpParams,
    InvalidGenomeError,
    active_nodes_from_genes,
    genome_to_dict,
    mutate,
    validate_genome,
)
from .cost import DEFAULT_COST_TABLE, CostTable
from .golden import GoldenSpec, generate_golden
from .metrics import ErrorProfile, GaussSpec, error_profile, gauss_satisfied, profile_to_dict
from .simulator import (
    OutputInts,
    PackedPlanes,
    build_input_planes,
    evaluate_active,
    evaluate_genome,
    plane_mask,
    planes_to_ints,
    values_from_plane_ints,
)

#: Fitness of a candidate violating any constraint; worse than every cost.
INFEASIBLE = math.inf


class Metric(Enum):
    WCE = "wce"
    MAE = "mae"
    ER = "er"
    MRE = "mre"
    ACC0 = "acc0"
    AVG = "avg"
    GAUSS = "gauss"


@dataclass(frozen=True)
class Constraint:
    """One error bound: metric plus threshold in relative percent.

    Magnitude metrics (wce, mae, avg) are a percentage of the 2^m output
    range; er is a percentage of inputs; mre is the plain mean relative
    error in percent. acc0 ignores the threshold (it must equal 1) and
    gauss carries its own envelope spec instead.
    """

    metric: Metric
    threshold_pct: float = 0.0
    gauss: GaussSpec | None = None

    def __post_init__(self):
        if self.metric is Metric.GAUSS:
            if self.gauss is None:
                raise ValueError("gauss constraint requires a GaussSpec")
        elif self.gauss is not None:
            raise ValueError(f"{self.metric.value} constraint must not carry a GaussSpec")
        if self.threshold_pct < 0:
            raise ValueError("threshold_pct must be >= 0")


@dataclass(frozen=True)
class ConstraintSet:
    """Conjunction of constraints; a candidate must satisfy every one."""

    constraints: tuple[Constraint, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise ValueError("constraint set must not be empty")
        metrics = [c.metric for c in self.constraints]
        if len(set(metrics)) != len(metrics):
            raise ValueError("duplicate metrics in constraint set")


def constraint_satisfied(profile: ErrorProfile, constraint: Constraint) -> bool:
    """Boundary-inclusive check of one constraint against a profile."""
    m = constraint.metric
    if m is Metric.ACC0:
        return profile.acc0 == 1
    if m is Metric.GAUSS:
        return gauss_satisfied(profile, constraint.gauss) == 1
    if m is Metric.ER:
        return profile.er <= constraint.threshold_pct / 100.0
    if m is Metric.MRE:
        return profile.mre <= constraint.threshold_pct / 100.0
    bound = constraint.threshold_pct / 100.0 * (1 << profile.n_output_bits)
    if m is Metric.WCE:
        return profile.wce <= bound
    if m is Metric.MAE:
        return profile.mae <= bound
    return abs(profile.avg) <= bound  # AVG


def satisfies_all(profile: ErrorProfile, cset: ConstraintSet) -> bool:
    return all(constraint_satisfied(profile, c) for c in cset.constraints)


@dataclass(frozen=True)
class SearchConfig:
    """Everything one run needs; (config, seed) fully determines the result."""

    golden: GoldenSpec
    params: CgpParams
    constraints: ConstraintSet
    budget_evals: int
    lambda_: int = 4
    h: int = 5
    wall_clock_secs: float | None = None
    seed: int = 0
    cost_table: CostTable = DEFAULT_COST_TABLE

    def __post_init__(self):
        if self.lambda_ < 1:
            raise ValueError("lambda_ must be >= 1")
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if self.budget_evals < 1:
            raise ValueError("budget_evals must be >= 1")
        if self.wall_clock_secs is not None and self.wall_clock_secs <= 0:
            raise ValueError("wall_clock_secs must be positive")


@dataclass(frozen=True)
class RunResult:
    """Champion of one run plus enough context to reproduce and audit it."""

    best_genome: CgpGenome
    best_cost: float
    best_profile: ErrorProfile
    relative_power: float
    trajectory: tuple[tuple[int, float], ...]
    evaluations_used: int
    seed: int
    config_name: str = ""


class GenomeEvaluator:
    """Reusable per-run machinery: simulate, profile, and cost a candidate.

    Holds the prebuilt input planes and golden outputs so per-candidate work
    is only the active-node evaluation itself.
    """

    def __init__(self, params: CgpParams, golden_ints: OutputInts,
                 cost_table: CostTable = DEFAULT_COST_TABLE,
                 planes: PackedPlanes | None = None):
        if planes is None:
            planes = build_input_planes(params.n_inputs)
        elif planes.n_inputs != params.n_inputs:
            raise ValueError("planes do not match params.n_inputs")
        self.params = params
        self.golden_ints = golden_ints
        self._input_ints = planes_to_ints(planes)
        self._mask = plane_mask(params.n_inputs)
        # complete weight vector up front so a missing entry fails early
        self._weights = [cost_table.weight(fn) for fn in params.gate_set]

    def evaluate(self, genome: CgpGenome) -> tuple[float, ErrorProfile]:
        p = self.params
        genes = genome.genes.tolist()
        active = active_nodes_from_genes(genes, p)
        values = evaluate_active(genes, active, p.gate_set, p.n_inputs,
                                 self._input_ints, self._mask)
        outs = [values[s] for s in genes[3 * p.n_nodes :]]
        cand = OutputInts(values_from_plane_ints(outs, p.n_inputs), p.n_outputs)
        profile = error_profile(self.golden_ints, cand)
        weights = self._weights
        cost = 0.0
        for j in active:
            cost += weights[genes[3 * j + 2]]
        return cost, profile


def fitness(genome: CgpGenome, cfg: SearchConfig, golden_ints: OutputInts) -> float:
    """Estimated power if the candidate meets every constraint, else INFEASIBLE."""
    cost, profile = GenomeEvaluator(cfg.params, golden_ints, cfg.cost_table).evaluate(genome)
    return cost if satisfies_all(profile, cfg.constraints) else INFEASIBLE


def evolve(cfg: SearchConfig,
           start_genome: CgpGenome | None = None,
           on_evaluation: Callable[[int, CgpGenome, ErrorProfile, float], None] | None = None,
           ) -> RunResult:
    """Run one (1+lambda) search and return the best feasible individual.

    The parent is the generated exact circuit unless `start_genome` is
    given. Each generation draws lambda offspring by h-gene point mutation;
    the best offspring replaces the parent when its fitness is no worse
    (ties included, so neutral mutations spread). Stops when the evaluation
    budget cannot fit another full generation or the wall clock runs out.

    `on_evaluation(eval_index, genome, profile, fitness)` is invoked for
    every evaluated candidate, including the initial parent.
    """
    planes = build_input_planes(cfg.params.n_inputs)
    golden_genome = generate_golden(cfg.golden, cfg.params)
    golden_ints = evaluate_genome(golden_genome, planes)
    evaluator = GenomeEvaluator(cfg.params, golden_ints, cfg.cost_table, planes=planes)
    golden_cost, _ = evaluator.evaluate(golden_genome)

    if start_genome is None:
        parent = golden_genome
    else:
        violations = validate_genome(start_genome)
        if violations:
            raise InvalidGenomeError(violations)
        if start_genome.params != cfg.params:
            raise ValueError("start genome was built under different parameters")
        parent = start_genome

    rng = np.random.default_rng(cfg.seed)
    deadline = None
    if cfg.wall_clock_secs is not None:
        deadline = time.monotonic() + cfg.wall_clock_secs

    parent_cost, parent_profile = evaluator.evaluate(parent)
    parent_fit = parent_cost if satisfies_all(parent_profile, cfg.constraints) else INFEASIBLE
    evaluations = 1
    if on_evaluation is not None:
        on_evaluation(evaluations, parent, parent_profile, parent_fit)
    if parent is golden_genome and parent_fit == INFEASIBLE:
        # zero error satisfies any threshold >= 0, so this cannot happen for
        # generated goldens; kept as a guard for malformed constraint code
        raise RuntimeError("exact circuit violates the constraint set")

    best_genome: CgpGenome | None = None
    best_fit = INFEASIBLE
    trajectory: list[tuple[int, float]] = []
    if parent_fit != INFEASIBLE:
        best_genome, best_fit = parent, parent_fit
        trajectory.append((evaluations, parent_fit))

    lam = cfg.lambda_
    while evaluations + lam <= cfg.budget_evals:
        if deadline is not None and time.monotonic() >= deadline:
            break
        gen_best = None
        gen_best_fit = INFEASIBLE
        gen_best_profile = None
        for _ in range(lam):
            child = mutate(parent, cfg.h, rng)
            cost, profile = evaluator.evaluate(child)
            fit = cost if satisfies_all(profile, cfg.constraints) else INFEASIBLE
            evaluations += 1
            if on_evaluation is not None:
                on_evaluation(evaluations, child, profile, fit)
            # strict < keeps the lowest-index offspring on ties
            if gen_best is None or fit < gen_best_fit:
                gen_best, gen_best_fit, gen_best_profile = child, fit, profile
        if gen_best_fit <= parent_fit:
            parent, parent_fit, parent_profile = gen_best, gen_best_fit, gen_best_profile
            if parent_fit < best_fit:
                best_genome, best_fit = parent, parent_fit
                trajectory.append((evaluations, parent_fit))

    if best_genome is None:
        raise RuntimeError("no feasible individual found within the budget")

    # re-derive the champion's profile from scratch before handing it out
    final_ints = evaluate_genome(best_genome, build_input_planes(cfg.params.n_inputs))
    final_profile = error_profile(golden_ints, final_ints)
    if not satisfies_all(final_profile, cfg.constraints):
        raise RuntimeError("champion failed constraint re-verification")

    return RunResult(
        best_genome=best_genome,
        best_cost=best_fit,
        best_profile=final_profile,
        relative_power=best_fit / golden_cost,
        trajectory=tuple(trajectory),
        evaluations_used=evaluations,
        seed=cfg.seed,
        config_name=cfg.constraints.name,
    )


@dataclass(frozen=True)
class RunOutcome:
    """One matrix cell: either a result or the error that stopped the run."""

    config_name: str
    seed: int
    result: RunResult | None
    error: str | None = None


def derive_seed(base_seed: int, config_index: int, repeats: int, repeat_index: int) -> int:
    """Per-run seed: base + config_index * repeats + repeat_index (all distinct)."""
    return base_seed + config_index * repeats + repeat_index


def _run_job(cfg: SearchConfig) -> RunOutcome:
    try:
        return RunOutcome(cfg.constraints.name, cfg.seed, evolve(cfg))
    except Exception as exc:  # a failed run must not abort the matrix
        return RunOutcome(cfg.constraints.name, cfg.seed, None, f"{type(exc).__name__}: {exc}")


def run_matrix(base: SearchConfig, grid: list[ConstraintSet], repeats: int,
               workers: int = 1) -> list[RunOutcome]:
    """`repeats` independent runs per constraint set, seeds derived from base.seed.

    Outcomes come back in grid-major order regardless of worker scheduling.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    jobs = [
        replace(base, constraints=cset, seed=derive_seed(base.seed, ci, repeats, ri))
        for ci, cset in enumerate(grid)
        for ri in range(repeats)
    ]
    if workers <= 1:
        return [_run_job(cfg) for cfg in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def run_result_to_dict(result: RunResult) -> dict:
    """JSON-ready dump of a run: genome, metrics, trajectory, bookkeeping."""
    return {
        "config_name": result.config_name,
        "seed": result.seed,
        "evaluations_used": result.evaluations_used,
        "best_cost": result.best_cost,
        "relative_power": result.relative_power,
        "trajectory": [[idx, fit] for idx, fit in result.trajectory],
        "profile": profile_to_dict(result.best_profile),
        "genome": genome_to_dict(result.best_genome),
    }
