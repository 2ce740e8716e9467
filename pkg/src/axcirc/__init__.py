"""axcirc: evolutionary synthesis of approximate arithmetic circuits.

Gate-level circuits are evolved from an exact starting point toward lower
power under hard error constraints (worst-case, mean, rate, relative, the
multiply-by-zero property, signed mean, and a Gaussian error-distribution
envelope), with exhaustive bit-parallel error evaluation and analysis
helpers for trade-off fronts and metric statistics.
"""

from .analysis import (
    MannWhitneyResult,
    ParetoPoint,
    correlation_matrix,
    load_results_csv,
    mann_whitney_u,
    pareto_front,
    pearson,
    points_from_rows,
    significance_matrix,
)
from .circuit import (
    BASIC_GATE_SET,
    DEFAULT_GATE_SET,
    CgpGenome,
    CgpParams,
    Gate,
    GateFunction,
    GenomeFormatError,
    InvalidGenomeError,
    Netlist,
    active_nodes,
    count_gates,
    decode_active,
    export_verilog,
    genome_from_dict,
    genome_from_nodes,
    genome_to_dict,
    mutate,
    validate_genome,
)
from .cost import DEFAULT_COST_TABLE, CostTable, load_cost_table, power_estimate, relative_power
from .golden import GoldenSpec, generate_golden, required_nodes
from .metrics import (
    ErrorProfile,
    GaussSpec,
    RelativeProfile,
    error_profile,
    error_stddev,
    gauss_satisfied,
    histogram_to_csv,
    profile_to_dict,
    relative_profile,
)
from .search import (
    INFEASIBLE,
    Constraint,
    ConstraintSet,
    GenomeEvaluator,
    Metric,
    RunOutcome,
    RunResult,
    SearchConfig,
    constraint_satisfied,
    derive_seed,
    evolve,
    fitness,
    run_matrix,
    run_result_to_dict,
    satisfies_all,
)
from .simulator import (
    MAX_INPUT_BITS,
    OutputInts,
    PackedPlanes,
    build_input_planes,
    evaluate_genome,
    extract_output_ints,
    simulate,
)

__version__ = "0.1.0"
