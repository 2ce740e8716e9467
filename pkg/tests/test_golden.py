import numpy as np
import pytest

from axcirc import (
    BASIC_GATE_SET,
    CgpParams,
    GateFunction,
    GoldenSpec,
    build_input_planes,
    count_gates,
    decode_active,
    error_profile,
    evaluate_genome,
    generate_golden,
    required_nodes,
    validate_genome,
)


def params_for(spec: GoldenSpec, extra: int = 0, **kwargs) -> CgpParams:
    return CgpParams(
        n_inputs=spec.n_inputs,
        n_outputs=spec.n_outputs,
        n_nodes=required_nodes(spec, kwargs.get("gate_set", CgpParams.__dataclass_fields__["gate_set"].default)) + extra,
        **kwargs,
    )


@pytest.mark.parametrize("width", [1, 2, 3, 4, 5])
def test_multiplier_is_exact(width):
    spec = GoldenSpec("multiplier", width)
    g = generate_golden(spec, params_for(spec))
    vals = evaluate_genome(g, build_input_planes(spec.n_inputs)).values
    k = np.arange(1 << spec.n_inputs)
    assert np.array_equal(vals, (k & ((1 << width) - 1)) * (k >> width))


@pytest.mark.parametrize("width", [1, 2, 4, 6])
def test_adder_is_exact(width):
    spec = GoldenSpec("adder", width)
    g = generate_golden(spec, params_for(spec))
    vals = evaluate_genome(g, build_input_planes(spec.n_inputs)).values
    k = np.arange(1 << spec.n_inputs)
    assert np.array_equal(vals, (k & ((1 << width) - 1)) + (k >> width))


def test_golden_genomes_validate():
    for spec in (GoldenSpec("adder", 3), GoldenSpec("multiplier", 3)):
        assert validate_genome(generate_golden(spec, params_for(spec, extra=7))) == []


def test_width_one_multiplier_is_a_single_and():
    spec = GoldenSpec("multiplier", 1)
    g = generate_golden(spec, params_for(spec))
    vals = evaluate_genome(g, build_input_planes(2)).values
    assert vals.tolist() == [0, 0, 0, 1]
    counts = count_gates(decode_active(g))
    assert counts[GateFunction.AND] == 1
    assert counts[GateFunction.CONST0] == 1  # the always-zero high output


def test_four_function_gate_set_synthesizes_zero_without_consts():
    spec = GoldenSpec("multiplier", 1)
    g = generate_golden(spec, params_for(spec, gate_set=BASIC_GATE_SET))
    vals = evaluate_genome(g, build_input_planes(2)).values
    assert vals.tolist() == [0, 0, 0, 1]
    counts = count_gates(decode_active(g))
    assert counts[GateFunction.XOR] == 1  # x^x stands in for constant 0


def test_adder_structural_counts():
    # half adder (2 gates) + (w-1) full adders (5 gates each)
    for width in (1, 2, 4, 6):
        spec = GoldenSpec("adder", width)
        counts = count_gates(decode_active(generate_golden(spec, params_for(spec))))
        assert counts[GateFunction.XOR] == 2 * width - 1
        assert counts[GateFunction.AND] == 2 * width - 1
        assert counts[GateFunction.OR] == width - 1
        assert sum(counts.values()) == 5 * width - 3


@pytest.mark.parametrize("width", [2, 3, 4, 6, 8])
def test_multiplier_structural_counts(width):
    # w^2 partial products plus adder cells: every XOR belongs to a half or
    # full adder that brings exactly one more AND, so AND = w^2 + XOR
    spec = GoldenSpec("multiplier", width)
    counts = count_gates(decode_active(generate_golden(spec, params_for(spec))))
    n_full = counts[GateFunction.OR]
    n_half = counts[GateFunction.XOR] - 2 * n_full
    assert n_half >= 0
    assert counts[GateFunction.AND] == width * width + 2 * n_full + n_half
    assert sum(counts.values()) == width * width + 5 * n_full + 2 * n_half


def test_two_bit_multiplier_hand_counts():
    # 4 partial-product ANDs reduced by two half adders
    spec = GoldenSpec("multiplier", 2)
    counts = count_gates(decode_active(generate_golden(spec, params_for(spec))))
    assert counts[GateFunction.AND] == 6
    assert counts[GateFunction.XOR] == 2
    assert sum(counts.values()) == 8


def test_golden_error_profile_is_all_zero():
    spec = GoldenSpec("multiplier", 3)
    g = generate_golden(spec, params_for(spec))
    out = evaluate_genome(g, build_input_planes(6))
    profile = error_profile(out, out)
    assert (profile.wce, profile.mae, profile.er, profile.mre, profile.avg) == (0, 0, 0, 0, 0)
    assert profile.acc0 == 1
    assert profile.histogram == {0: 64}


def test_too_few_nodes_error_names_requirement():
    spec = GoldenSpec("multiplier", 4)
    needed = required_nodes(spec)
    params = CgpParams(n_inputs=8, n_outputs=8, n_nodes=needed - 1)
    with pytest.raises(ValueError, match=f"requires {needed} nodes"):
        generate_golden(spec, params)


def test_dimension_mismatch_is_rejected():
    spec = GoldenSpec("multiplier", 4)
    with pytest.raises(ValueError, match="n_inputs"):
        generate_golden(spec, CgpParams(n_inputs=6, n_outputs=8, n_nodes=100))


def test_levels_back_too_small_is_rejected():
    spec = GoldenSpec("multiplier", 4)
    params = CgpParams(n_inputs=8, n_outputs=8, n_nodes=80, levels_back=3)
    with pytest.raises(ValueError, match="levels_back"):
        generate_golden(spec, params)


def test_golden_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        GoldenSpec("divider", 4)
    with pytest.raises(ValueError, match="width"):
        GoldenSpec("adder", 0)


def test_filler_nodes_are_inactive():
    spec = GoldenSpec("adder", 2)
    params = params_for(spec, extra=10)
    g = generate_golden(spec, params)
    netlist = decode_active(g)
    assert netlist.n_gates == required_nodes(spec)
