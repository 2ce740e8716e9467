"""Static gate-cost model standing in for a synthesis-flow power estimate.

Weights default to static-CMOS transistor counts, which preserves the
ordering of gate-dominated designs; substitute a library-derived table via
JSON when absolute numbers matter. No wire load or switching activity is
modeled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import GateFunction, Netlist

_DEFAULT_WEIGHTS = {
    GateFunction.CONST0: 0.0,
    GateFunction.CONST1: 0.0,
    GateFunction.INV: 2.0,
    GateFunction.BUF: 4.0,
    GateFunction.NAND: 4.0,
    GateFunction.NOR: 4.0,
    GateFunction.AND: 6.0,
    GateFunction.OR: 6.0,
    GateFunction.XOR: 8.0,
    GateFunction.XNOR: 8.0,
}


@dataclass(frozen=True)
class CostTable:
    """Relative power units per gate function; missing entries fail at use."""

    weights: dict[GateFunction, float] = field(default_factory=lambda: dict(_DEFAULT_WEIGHTS))

    def __post_init__(self):
        for fn, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight for {fn.value}")

    def weight(self, fn: GateFunction) -> float:
        try:
            return self.weights[fn]
        except KeyError:
            raise ValueError(f"cost table has no weight for gate function {fn.value}") from None


DEFAULT_COST_TABLE = CostTable()


def load_cost_table(path: str | Path) -> CostTable:
    """Read a {function name: weight} JSON object."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("cost table JSON must be an object of function-name -> weight")
    weights = {}
    for name, value in raw.items():
        try:
            fn = GateFunction(name)
        except ValueError:
            raise ValueError(f"unknown gate function {name!r} in cost table") from None
        if not isinstance(value, (int, float)):
            raise ValueError(f"weight for {name} must be a number")
        weights[fn] = float(value)
    return CostTable(weights)


def power_estimate(netlist: Netlist, table: CostTable = DEFAULT_COST_TABLE) -> float:
    """Sum of per-gate weights over the active gates."""
    return sum(table.weight(gate.fn) for gate in netlist.gates)


def relative_power(cand: Netlist, golden: Netlist, table: CostTable = DEFAULT_COST_TABLE) -> float:
    golden_power = power_estimate(golden, table)
    if golden_power <= 0:
        raise ValueError("golden netlist has zero estimated power")
    return power_estimate(cand, table) / golden_power
