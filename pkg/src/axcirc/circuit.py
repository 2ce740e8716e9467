"""Integer-encoded gate-level circuits and the operators that manipulate them.

A candidate circuit is a fixed-length array of integers: one (x1, x2, f)
triple per configurable node followed by one gene per primary output.
Node fan-ins may reference any primary input or the output of a node at
most `levels_back` positions earlier, so every genome describes a
feed-forward netlist.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np

NODE_ARITY = 2

GENOME_FORMAT = "axcirc-genome"
GENOME_FORMAT_VERSION = 1


class GateFunction(Enum):
    """Single-output gate primitives a node can implement."""

    BUF = "BUF"
    INV = "INV"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NAND = "NAND"
    NOR = "NOR"
    XNOR = "XNOR"
    CONST0 = "CONST0"
    CONST1 = "CONST1"

    @property
    def arity(self) -> int:
        return _ARITY[self]


_ARITY = {
    GateFunction.CONST0: 0,
    GateFunction.CONST1: 0,
    GateFunction.BUF: 1,
    GateFunction.INV: 1,
    GateFunction.AND: 2,
    GateFunction.OR: 2,
    GateFunction.XOR: 2,
    GateFunction.NAND: 2,
    GateFunction.NOR: 2,
    GateFunction.XNOR: 2,
}

#: Full function set: every two-input primitive plus buffers, inverters and
#: constants (constants let the search tie outputs to fixed levels).
DEFAULT_GATE_SET = (
    GateFunction.BUF,
    GateFunction.INV,
    GateFunction.AND,
    GateFunction.OR,
    GateFunction.XOR,
    GateFunction.NAND,
    GateFunction.NOR,
    GateFunction.XNOR,
    GateFunction.CONST0,
    GateFunction.CONST1,
)

#: Classic four-function set (function codes 0..3: INV, AND, OR, XOR).
BASIC_GATE_SET = (
    GateFunction.INV,
    GateFunction.AND,
    GateFunction.OR,
    GateFunction.XOR,
)


class InvalidGenomeError(ValueError):
    """Raised when an operation is handed a genome that fails validation."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid genome: " + "; ".join(violations))
        self.violations = violations


class GenomeFormatError(ValueError):
    """Raised when serialized genome data cannot be decoded."""


@dataclass(frozen=True)
class CgpParams:
    """Shape of the search space: I/O counts, node budget and connectivity.

    `levels_back` limits how many node positions a fan-in may look back;
    primary inputs are always reachable. ``None`` means unrestricted.
    """

    n_inputs: int
    n_outputs: int
    n_nodes: int
    levels_back: int | None = None
    gate_set: tuple[GateFunction, ...] = DEFAULT_GATE_SET

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1 or self.n_nodes < 1:
            raise ValueError("n_inputs, n_outputs and n_nodes must all be >= 1")
        if self.levels_back is None:
            object.__setattr__(self, "levels_back", self.n_nodes)
        if not 1 <= self.levels_back <= self.n_nodes:
            raise ValueError(f"levels_back must be in [1, {self.n_nodes}], got {self.levels_back}")
        object.__setattr__(self, "gate_set", tuple(self.gate_set))
        if not self.gate_set:
            raise ValueError("gate_set must not be empty")
        if len(set(self.gate_set)) != len(self.gate_set):
            raise ValueError("gate_set contains duplicate functions")

    @property
    def n_signals(self) -> int:
        return self.n_inputs + self.n_nodes

    @property
    def genome_length(self) -> int:
        return self.n_nodes * (NODE_ARITY + 1) + self.n_outputs

    def fanin_choice_count(self, node: int) -> int:
        """Number of distinct signals node `node` may legally reference."""
        return self.n_inputs + min(node, self.levels_back)

    def fanin_from_choice(self, node: int, choice: int) -> int:
        """Map a uniform draw in [0, fanin_choice_count) to a signal index."""
        if choice < self.n_inputs:
            return choice
        return self.n_inputs + (node - min(node, self.levels_back)) + (choice - self.n_inputs)

    def is_legal_fanin(self, node: int, signal: int) -> bool:
        if 0 <= signal < self.n_inputs:
            return True
        lo = self.n_inputs + max(0, node - self.levels_back)
        return lo <= signal < self.n_inputs + node


@dataclass(frozen=True, eq=False)
class CgpGenome:
    """An immutable candidate circuit: flat gene array plus its parameters."""

    params: CgpParams
    genes: np.ndarray

    def __post_init__(self):
        genes = np.asarray(self.genes, dtype=np.int64)
        if genes.shape != (self.params.genome_length,):
            raise ValueError(
                f"genome must have {self.params.genome_length} genes, got shape {genes.shape}"
            )
        genes = genes.copy()
        genes.setflags(write=False)
        object.__setattr__(self, "genes", genes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CgpGenome):
            return NotImplemented
        return self.params == other.params and bool(np.array_equal(self.genes, other.genes))

    def __hash__(self) -> int:
        return hash((self.params, self.genes.tobytes()))

    def node_gene(self, node: int) -> tuple[int, int, int]:
        """(x1, x2, function_code) of the node at position `node`."""
        base = 3 * node
        g = self.genes
        return int(g[base]), int(g[base + 1]), int(g[base + 2])

    @property
    def output_genes(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.genes[3 * self.params.n_nodes :])


class Gate(NamedTuple):
    fn: GateFunction
    fan_ins: tuple[int, ...]


@dataclass(frozen=True)
class Netlist:
    """Active logic only: gates in topological order, fan-ins by signal index.

    Signals 0..n_inputs-1 are the primary inputs; gate k drives signal
    n_inputs + k. Acyclicity is implied by construction order.
    """

    n_inputs: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)


def validate_genome(genome: CgpGenome) -> list[str]:
    """Check every gene against the encoding invariants.

    Returns a list of human-readable violations, one per offending gene;
    an empty list means the genome is well-formed. Fan-in genes are checked
    even for functions that ignore them, since mutation may later activate
    them.
    """
    p = genome.params
    genes = genome.genes
    violations: list[str] = []
    n_fn = len(p.gate_set)
    for j in range(p.n_nodes):
        base = 3 * j
        for slot in (0, 1):
            v = int(genes[base + slot])
            if not p.is_legal_fanin(j, v):
                violations.append(
                    f"gene {base + slot} (node {j} fan-in {slot + 1}): signal {v} is not a "
                    "primary input or an earlier node within levels-back "
                    "(feedback/forward reference)"
                )
        f = int(genes[base + 2])
        if not 0 <= f < n_fn:
            violations.append(
                f"gene {base + 2} (node {j} function): function index {f} out of range "
                f"[0, {n_fn})"
            )
    for k in range(p.n_outputs):
        pos = 3 * p.n_nodes + k
        v = int(genes[pos])
        if not 0 <= v < p.n_signals:
            violations.append(
                f"gene {pos} (output {k}): signal {v} out of range [0, {p.n_signals})"
            )
    return violations


def active_nodes(genome: CgpGenome) -> list[int]:
    """Node positions backward-reachable from the outputs, ascending.

    Only fan-ins a function actually reads are followed, so e.g. the second
    fan-in of an inverter does not keep its referenced node alive.
    """
    return active_nodes_from_genes(genome.genes.tolist(), genome.params)


_ARITY_CACHE: dict[tuple[GateFunction, ...], tuple[int, ...]] = {}


def _arities(gate_set: tuple[GateFunction, ...]) -> tuple[int, ...]:
    table = _ARITY_CACHE.get(gate_set)
    if table is None:
        table = _ARITY_CACHE[gate_set] = tuple(fn.arity for fn in gate_set)
    return table


def active_nodes_from_genes(genes: list[int], params: CgpParams) -> list[int]:
    """active_nodes on an already-unpacked gene list (evaluation hot path).

    Fan-ins point strictly backward, so one descending sweep propagates
    reachability completely.
    """
    p = params
    n_in = p.n_inputs
    arities = _arities(p.gate_set)
    visited = bytearray(p.n_nodes)
    for s in genes[3 * p.n_nodes :]:
        if s >= n_in:
            visited[s - n_in] = 1
    active: list[int] = []
    for j in range(p.n_nodes - 1, -1, -1):
        if visited[j]:
            active.append(j)
            base = 3 * j
            arity = arities[genes[base + 2]]
            if arity:
                x = genes[base]
                if x >= n_in:
                    visited[x - n_in] = 1
                if arity == 2:
                    x = genes[base + 1]
                    if x >= n_in:
                        visited[x - n_in] = 1
    active.reverse()
    return active


def decode_active(genome: CgpGenome) -> Netlist:
    """Strip inactive nodes and renumber the survivors into a dense netlist."""
    violations = validate_genome(genome)
    if violations:
        raise InvalidGenomeError(violations)
    p = genome.params
    n_in = p.n_inputs
    active = active_nodes(genome)
    remap = {j: n_in + rank for rank, j in enumerate(active)}

    def _signal(v: int) -> int:
        return v if v < n_in else remap[v - n_in]

    gates = []
    for j in active:
        x1, x2, f = genome.node_gene(j)
        fn = p.gate_set[f]
        # truncate to arity first: unused fan-ins may point at inactive nodes
        fan_ins = tuple(_signal(v) for v in (x1, x2)[: fn.arity])
        gates.append(Gate(fn, fan_ins))
    outputs = tuple(_signal(v) for v in genome.output_genes)
    return Netlist(n_inputs=n_in, gates=tuple(gates), outputs=outputs)


def mutate(genome: CgpGenome, h: int, rng: np.random.Generator) -> CgpGenome:
    """Point-mutate `h` distinct gene positions, resampled over their legal ranges.

    Resampling may redraw the parent's value, so fewer than `h` genes can
    actually change (silent mutations are how neutral drift happens).
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    p = genome.params
    n_genes = p.genome_length
    h = min(h, n_genes)
    positions = list(dict.fromkeys(rng.integers(n_genes, size=h).tolist()))
    while len(positions) < h:
        extra = int(rng.integers(n_genes))
        if extra not in positions:
            positions.append(extra)
    node_genes_end = 3 * p.n_nodes
    # one legal-range size per chosen position, drawn in a single batch
    highs = []
    for pos in positions:
        if pos < node_genes_end:
            j, slot = divmod(pos, 3)
            highs.append(len(p.gate_set) if slot == 2 else p.fanin_choice_count(j))
        else:
            highs.append(p.n_signals)
    draws = rng.integers(0, highs).tolist()
    genes = genome.genes.copy()
    for pos, draw in zip(positions, draws):
        if pos < node_genes_end and pos % 3 != 2:
            genes[pos] = p.fanin_from_choice(pos // 3, draw)
        else:
            genes[pos] = draw
    return CgpGenome(p, genes)


def count_gates(netlist: Netlist) -> dict[GateFunction, int]:
    """Gate counts per function over all GateFunction members (zeros included)."""
    counts = {fn: 0 for fn in GateFunction}
    for gate in netlist.gates:
        counts[gate.fn] += 1
    return counts


_VERILOG_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")

_VERILOG_EXPR = {
    GateFunction.BUF: "{0}",
    GateFunction.INV: "~{0}",
    GateFunction.AND: "{0} & {1}",
    GateFunction.OR: "{0} | {1}",
    GateFunction.XOR: "{0} ^ {1}",
    GateFunction.NAND: "~({0} & {1})",
    GateFunction.NOR: "~({0} | {1})",
    GateFunction.XNOR: "~({0} ^ {1})",
    GateFunction.CONST0: "1'b0",
    GateFunction.CONST1: "1'b1",
}


def export_verilog(netlist: Netlist, module_name: str) -> str:
    """Emit the netlist as a structural Verilog-2001 module.

    Inputs arrive as one bus ``in[n-1:0]``, outputs leave as ``out[m-1:0]``;
    every gate becomes a continuous assignment to a one-bit wire.
    """
    if not netlist.outputs:
        raise ValueError("netlist has no outputs")
    if not _VERILOG_IDENT.match(module_name):
        raise ValueError(f"{module_name!r} is not a valid Verilog identifier")

    def _ref(signal: int) -> str:
        if signal < netlist.n_inputs:
            return f"in[{signal}]"
        return f"n{signal - netlist.n_inputs}"

    lines = [
        f"module {module_name} (",
        f"  input  wire [{netlist.n_inputs - 1}:0] in,",
        f"  output wire [{netlist.n_outputs - 1}:0] out",
        ");",
    ]
    for k in range(netlist.n_gates):
        lines.append(f"  wire n{k};")
    for k, gate in enumerate(netlist.gates):
        expr = _VERILOG_EXPR[gate.fn].format(*(_ref(s) for s in gate.fan_ins))
        lines.append(f"  assign n{k} = {expr};")
    for k, signal in enumerate(netlist.outputs):
        lines.append(f"  assign out[{k}] = {_ref(signal)};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def genome_to_dict(genome: CgpGenome) -> dict:
    """JSON-ready representation: params header plus the flat gene array."""
    p = genome.params
    return {
        "format": GENOME_FORMAT,
        "version": GENOME_FORMAT_VERSION,
        "params": {
            "n_inputs": p.n_inputs,
            "n_outputs": p.n_outputs,
            "n_nodes": p.n_nodes,
            "levels_back": p.levels_back,
            "gate_set": [fn.value for fn in p.gate_set],
        },
        "genes": [int(v) for v in genome.genes],
    }


def genome_from_dict(data: dict) -> CgpGenome:
    """Inverse of genome_to_dict; raises GenomeFormatError naming the bad field."""
    if not isinstance(data, dict):
        raise GenomeFormatError("genome data must be a JSON object")
    if data.get("format") != GENOME_FORMAT:
        raise GenomeFormatError(f"field 'format': expected {GENOME_FORMAT!r}, got {data.get('format')!r}")
    if data.get("version") != GENOME_FORMAT_VERSION:
        raise GenomeFormatError(f"field 'version': unsupported version {data.get('version')!r}")
    raw_params = data.get("params")
    if not isinstance(raw_params, dict):
        raise GenomeFormatError("field 'params': missing or not an object")
    for key in ("n_inputs", "n_outputs", "n_nodes"):
        if not isinstance(raw_params.get(key), int):
            raise GenomeFormatError(f"field 'params.{key}': missing or not an integer")
    lb = raw_params.get("levels_back")
    if lb is not None and not isinstance(lb, int):
        raise GenomeFormatError("field 'params.levels_back': must be an integer or null")
    raw_set = raw_params.get("gate_set")
    if not isinstance(raw_set, list) or not raw_set:
        raise GenomeFormatError("field 'params.gate_set': missing or not a non-empty list")
    try:
        gate_set = tuple(GateFunction(name) for name in raw_set)
    except ValueError as exc:
        raise GenomeFormatError(f"field 'params.gate_set': {exc}") from exc
    genes = data.get("genes")
    if not isinstance(genes, list) or not all(isinstance(v, int) for v in genes):
        raise GenomeFormatError("field 'genes': missing or not a list of integers")
    try:
        params = CgpParams(
            n_inputs=raw_params["n_inputs"],
            n_outputs=raw_params["n_outputs"],
            n_nodes=raw_params["n_nodes"],
            levels_back=lb,
            gate_set=gate_set,
        )
        return CgpGenome(params, np.asarray(genes, dtype=np.int64))
    except ValueError as exc:
        raise GenomeFormatError(str(exc)) from exc


def genome_from_nodes(params: CgpParams, node_genes: Iterable[tuple[int, int, int]],
                      output_genes: Iterable[int]) -> CgpGenome:
    """Assemble a genome from per-node triples; unlisted nodes get inert filler.

    Filler nodes reference input 0 with function code 0; they are valid but
    inactive unless an output or live node points at them.
    """
    p = params
    genes = np.zeros(p.genome_length, dtype=np.int64)
    for j, (x1, x2, f) in enumerate(node_genes):
        if j >= p.n_nodes:
            raise ValueError(f"construction needs more than n_nodes={p.n_nodes} nodes")
        genes[3 * j : 3 * j + 3] = (x1, x2, f)
    outputs = list(output_genes)
    if len(outputs) != p.n_outputs:
        raise ValueError(f"expected {p.n_outputs} output genes, got {len(outputs)}")
    genes[3 * p.n_nodes :] = outputs
    return CgpGenome(p, genes)
