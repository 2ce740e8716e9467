"""Exact reference circuits, emitted directly as genomes.

The search starts from the accurate circuit and degrades it, so the adders
and multipliers here are generated in genome form rather than imported from
an external netlist. Construction is deliberately plain: ripple-carry adders
and a column-compressed partial-product array for multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import (
    CgpGenome,
    CgpParams,
    DEFAULT_GATE_SET,
    GateFunction,
    genome_from_nodes,
    validate_genome,
)

_KINDS = ("adder", "multiplier")


@dataclass(frozen=True)
class GoldenSpec:
    """Which exact circuit to generate: unsigned add or multiply of two operands."""

    kind: str
    width: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.width < 1:
            raise ValueError("operand width must be >= 1")

    @property
    def n_inputs(self) -> int:
        return 2 * self.width

    @property
    def n_outputs(self) -> int:
        return self.width + 1 if self.kind == "adder" else 2 * self.width


class _NetBuilder:
    """Accumulates node triples; signal indices are global (inputs first)."""

    def __init__(self, n_inputs: int, gate_set: tuple[GateFunction, ...]):
        self.n_inputs = n_inputs
        self.nodes: list[tuple[int, int, int]] = []
        self._codes = {fn: i for i, fn in enumerate(gate_set)}

    def gate(self, fn: GateFunction, x1: int, x2: int = 0) -> int:
        if fn not in self._codes:
            raise ValueError(f"gate set does not provide {fn.value}")
        self.nodes.append((x1, x2, self._codes[fn]))
        return self.n_inputs + len(self.nodes) - 1

    def half_adder(self, a: int, b: int) -> tuple[int, int]:
        return self.gate(GateFunction.XOR, a, b), self.gate(GateFunction.AND, a, b)

    def full_adder(self, a: int, b: int, cin: int) -> tuple[int, int]:
        # 2 XOR + 2 AND + 1 OR
        s1 = self.gate(GateFunction.XOR, a, b)
        c1 = self.gate(GateFunction.AND, a, b)
        s = self.gate(GateFunction.XOR, s1, cin)
        c2 = self.gate(GateFunction.AND, s1, cin)
        return s, self.gate(GateFunction.OR, c1, c2)

    def zero(self) -> int:
        """A constant-0 signal; synthesized as x^x when CONST0 is unavailable."""
        if GateFunction.CONST0 in self._codes:
            return self.gate(GateFunction.CONST0, 0, 0)
        return self.gate(GateFunction.XOR, 0, 0)


def _build_adder(b: _NetBuilder, width: int) -> list[int]:
    # operand A in inputs 0..w-1, operand B in inputs w..2w-1, LSB first;
    # stage 0 has no carry-in, so it is a half adder
    sums = []
    s, carry = b.half_adder(0, width)
    sums.append(s)
    for i in range(1, width):
        s, carry = b.full_adder(i, width + i, carry)
        sums.append(s)
    return sums + [carry]


def _build_multiplier(b: _NetBuilder, width: int) -> list[int]:
    # one spare column: a top-column compression step may emit a carry wire
    # there, which is constant 0 by value preservation and safely ignored
    columns: list[list[int]] = [[] for _ in range(2 * width + 1)]
    for i in range(width):
        for j in range(width):
            columns[i + j].append(b.gate(GateFunction.AND, i, width + j))
    outputs = []
    for k in range(2 * width):
        col = columns[k]
        while len(col) > 1:
            if len(col) >= 3:
                s, carry = b.full_adder(col.pop(0), col.pop(0), col.pop(0))
            else:
                s, carry = b.half_adder(col.pop(0), col.pop(0))
            col.append(s)
            columns[k + 1].append(carry)
        outputs.append(col[0] if col else b.zero())
    return outputs


def _build(spec: GoldenSpec, gate_set: tuple[GateFunction, ...]) -> tuple[list[tuple[int, int, int]], list[int]]:
    builder = _NetBuilder(spec.n_inputs, gate_set)
    if spec.kind == "adder":
        outputs = _build_adder(builder, spec.width)
    else:
        outputs = _build_multiplier(builder, spec.width)
    return builder.nodes, outputs


def required_nodes(spec: GoldenSpec, gate_set: tuple[GateFunction, ...] = DEFAULT_GATE_SET) -> int:
    """Node count the exact construction needs under the given gate set."""
    nodes, _ = _build(spec, gate_set)
    return len(nodes)


def generate_golden(spec: GoldenSpec, params: CgpParams) -> CgpGenome:
    """Genome computing the exact function of `spec` for all input vectors.

    Nodes past the construction are inert filler so mutation sees a uniform
    full-length genome.
    """
    if params.n_inputs != spec.n_inputs or params.n_outputs != spec.n_outputs:
        raise ValueError(
            f"{spec.kind} width {spec.width} needs n_inputs={spec.n_inputs}, "
            f"n_outputs={spec.n_outputs}; params have {params.n_inputs}/{params.n_outputs}"
        )
    nodes, outputs = _build(spec, params.gate_set)
    if len(nodes) > params.n_nodes:
        raise ValueError(
            f"construction requires {len(nodes)} nodes but n_nodes={params.n_nodes}"
        )
    genome = genome_from_nodes(params, nodes, outputs)
    violations = validate_genome(genome)
    if violations:
        raise ValueError(
            "levels_back too small for the exact construction: " + violations[0]
        )
    return genome
