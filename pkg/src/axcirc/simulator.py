"""Exhaustive evaluation of genomes over every input combination.

Each signal's behavior is a bit-plane: bit k holds the signal's value under
input vector k, for all 2^n input vectors at once. Planes travel between
functions as arrays of 64-bit words (`PackedPlanes`); gate evaluation itself
runs on arbitrary-precision integers, which are the same packed words under
the hood and keep single-word circuits and 65536-bit planes on one code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CgpGenome, GateFunction, active_nodes_from_genes

#: Exhaustive simulation only; refuse inputs wider than this.
MAX_INPUT_BITS = 24


@dataclass(frozen=True)
class PackedPlanes:
    """A stack of bit-planes, one row of 64-bit words per signal.

    `n_inputs` fixes the plane length: 2^n_inputs valid bits, zero-padded to
    a whole number of words. Bits past the valid range must stay zero.
    """

    n_inputs: int
    words: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_inputs <= MAX_INPUT_BITS:
            raise ValueError(
                f"exhaustive simulation cap exceeded: n_inputs must be in [1, {MAX_INPUT_BITS}]"
            )
        words = np.asarray(self.words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != self.words_per_plane:
            raise ValueError(
                f"expected plane shape (*, {self.words_per_plane}), got {words.shape}"
            )
        pad = -(1 << self.n_inputs) % 64
        if pad and np.any(words[:, -1] >> np.uint64(64 - pad)):
            raise ValueError("bits beyond 2^n_inputs must be zero")
        words = words.copy()
        words.setflags(write=False)
        object.__setattr__(self, "words", words)

    @property
    def n_planes(self) -> int:
        return self.words.shape[0]

    @property
    def words_per_plane(self) -> int:
        return ((1 << self.n_inputs) + 63) // 64


@dataclass(frozen=True)
class OutputInts:
    """Integer interpretation of the outputs, one value per input vector."""

    values: np.ndarray
    width: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if len(values) and (values.min() < 0 or values.max() >= 1 << self.width):
            raise ValueError(f"values exceed {self.width}-bit range")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def plane_mask(n_inputs: int) -> int:
    """All 2^n_inputs valid plane bits set, as an integer."""
    return (1 << (1 << n_inputs)) - 1


def planes_to_ints(planes: PackedPlanes) -> list[int]:
    """One arbitrary-precision integer per plane (bit k = input vector k)."""
    return [int.from_bytes(row.tobytes(), "little") for row in planes.words]


def ints_to_planes(plane_ints: list[int], n_inputs: int) -> PackedPlanes:
    n_bytes = (((1 << n_inputs) + 63) // 64) * 8
    buf = b"".join(v.to_bytes(n_bytes, "little") for v in plane_ints)
    words = np.frombuffer(buf, dtype=np.uint64).reshape(len(plane_ints), -1)
    return PackedPlanes(n_inputs, words)


def build_input_planes(n_inputs: int) -> PackedPlanes:
    """Planes for the primary inputs: bit k of plane i equals bit i of k.

    Plane i therefore repeats 2^i zeros followed by 2^i ones; for i < 6 that
    is a constant within-word mask (0xAAAA..., 0xCCCC..., ...), for i >= 6
    whole words alternate between all-zero and all-one.
    """
    if not 1 <= n_inputs <= MAX_INPUT_BITS:
        raise ValueError(
            f"exhaustive simulation cap exceeded: n_inputs must be in [1, {MAX_INPUT_BITS}]"
        )
    total_bits = 1 << n_inputs
    planes = []
    for i in range(n_inputs):
        half = 1 << i
        plane = ((1 << half) - 1) << half
        span = 2 * half
        while span < total_bits:
            plane |= plane << span
            span <<= 1
        planes.append(plane)
    return ints_to_planes(planes, n_inputs)


def evaluate_active(genes: list[int], active: list[int], gate_set: tuple[GateFunction, ...],
                    n_inputs: int, input_ints: list[int], mask: int) -> list[int]:
    """Evaluate active nodes in index order; returns the full signal table.

    Low-level entry point for callers that already unpacked the genome.
    Entries for inactive nodes stay None. Inverting functions are computed
    as XOR with the valid-bit mask so padding bits remain zero.
    """
    values: list[int | None] = [None] * (n_inputs + len(genes) // 3)
    values[:n_inputs] = input_ints
    buf = GateFunction.BUF
    inv = GateFunction.INV
    and_ = GateFunction.AND
    or_ = GateFunction.OR
    xor = GateFunction.XOR
    nand = GateFunction.NAND
    nor = GateFunction.NOR
    xnor = GateFunction.XNOR
    const0 = GateFunction.CONST0
    for j in active:
        base = 3 * j
        fn = gate_set[genes[base + 2]]
        if fn is and_:
            v = values[genes[base]] & values[genes[base + 1]]
        elif fn is xor:
            v = values[genes[base]] ^ values[genes[base + 1]]
        elif fn is or_:
            v = values[genes[base]] | values[genes[base + 1]]
        elif fn is inv:
            v = values[genes[base]] ^ mask
        elif fn is nand:
            v = (values[genes[base]] & values[genes[base + 1]]) ^ mask
        elif fn is nor:
            v = (values[genes[base]] | values[genes[base + 1]]) ^ mask
        elif fn is xnor:
            v = (values[genes[base]] ^ values[genes[base + 1]]) ^ mask
        elif fn is buf:
            v = values[genes[base]]
        elif fn is const0:
            v = 0
        else:
            v = mask
        values[n_inputs + j] = v
    return values


def _output_plane_ints(genome: CgpGenome, input_ints: list[int], mask: int) -> list[int]:
    genes = genome.genes.tolist()
    active = active_nodes_from_genes(genes, genome.params)
    values = evaluate_active(genes, active, genome.params.gate_set,
                             genome.params.n_inputs, input_ints, mask)
    return [values[s] for s in genes[3 * genome.params.n_nodes :]]


def simulate(genome: CgpGenome, planes: PackedPlanes) -> PackedPlanes:
    """Bit-parallel evaluation of a (valid) genome over prebuilt input planes.

    Returns one plane per primary output. Only active nodes are evaluated.
    """
    if planes.n_inputs != genome.params.n_inputs:
        raise ValueError(
            f"planes were built for {planes.n_inputs} inputs, genome has {genome.params.n_inputs}"
        )
    outs = _output_plane_ints(genome, planes_to_ints(planes), plane_mask(planes.n_inputs))
    return ints_to_planes(outs, planes.n_inputs)


_WEIGHT_CACHE: dict[int, np.ndarray] = {}


def values_from_plane_ints(plane_ints: list[int], n_inputs: int) -> np.ndarray:
    """Integer value per input vector from least-significant-first bit planes."""
    n_bits = 1 << n_inputs
    n_bytes = ((n_bits + 63) // 64) * 8
    buf = b"".join(v.to_bytes(n_bytes, "little") for v in plane_ints)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    bits = bits.reshape(len(plane_ints), n_bytes * 8)[:, :n_bits]
    weights = _WEIGHT_CACHE.get(len(plane_ints))
    if weights is None:
        weights = np.int64(1) << np.arange(len(plane_ints), dtype=np.int64)
        _WEIGHT_CACHE[len(plane_ints)] = weights
    return weights @ bits.astype(np.int64)


def extract_output_ints(planes: PackedPlanes, width: int) -> OutputInts:
    """Combine `width` output planes into per-input unsigned integers.

    Plane j carries bit j of the value: values[k] = sum_j bit_k(plane_j) * 2^j.
    """
    if planes.n_planes != width:
        raise ValueError(f"expected {width} planes, got {planes.n_planes}")
    return OutputInts(values_from_plane_ints(planes_to_ints(planes), planes.n_inputs), width)


def evaluate_genome(genome: CgpGenome, planes: PackedPlanes) -> OutputInts:
    """simulate + extract_output_ints in one step, skipping the word round-trip."""
    if planes.n_inputs != genome.params.n_inputs:
        raise ValueError(
            f"planes were built for {planes.n_inputs} inputs, genome has {genome.params.n_inputs}"
        )
    outs = _output_plane_ints(genome, planes_to_ints(planes), plane_mask(planes.n_inputs))
    return OutputInts(values_from_plane_ints(outs, planes.n_inputs), genome.params.n_outputs)
