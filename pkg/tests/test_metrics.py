import math

import numpy as np
import pytest

from axcirc import (
    CgpParams,
    ErrorProfile,
    GaussSpec,
    OutputInts,
    build_input_planes,
    error_profile,
    error_stddev,
    evaluate_genome,
    gauss_satisfied,
    histogram_to_csv,
    profile_to_dict,
    relative_profile,
)
from oracles import naive_genome_table, naive_profile, random_genome, truncated_mult2


def ints(values, width):
    return OutputInts(np.asarray(values, dtype=np.int64), width)


def profile_of(histogram: dict[int, int], n_bits: int, m_bits: int) -> ErrorProfile:
    """Hand-build a profile from a histogram (for the distribution checks)."""
    n = 1 << n_bits
    assert sum(histogram.values()) == n
    wce = max(abs(e) for e in histogram)
    mae = sum(abs(e) * c for e, c in histogram.items()) / n
    er = 1 - histogram.get(0, 0) / n
    avg = sum(e * c for e, c in histogram.items()) / n
    return ErrorProfile(wce=wce, mae=mae, er=er, mre=0.0, acc0=1, avg=avg,
                        histogram=dict(histogram), n_input_bits=n_bits, n_output_bits=m_bits)


def test_identity_profile_is_all_zero():
    vals = ints([3, 1, 4, 1, 5, 9, 2, 6], 4)
    p = error_profile(vals, vals)
    assert (p.wce, p.mae, p.er, p.mre, p.acc0, p.avg) == (0, 0, 0, 0, 1, 0)
    assert p.histogram == {0: 8}


def test_truncated_two_bit_multiplier_profile():
    golden, cand = truncated_mult2()
    planes = build_input_planes(4)
    p = error_profile(evaluate_genome(golden, planes), evaluate_genome(cand, planes))
    assert p.wce == 1
    assert p.mae == 0.25
    assert p.er == 0.25
    assert p.acc0 == 1
    assert p.avg == 0.25
    assert math.isclose(p.mre, 16 / 144, rel_tol=1e-12)
    assert p.histogram == {0: 12, 1: 4}


def test_length_and_width_mismatch_are_rejected():
    with pytest.raises(ValueError, match="length"):
        error_profile(ints([0, 0], 2), ints([0, 0, 0, 0], 2))
    with pytest.raises(ValueError, match="width"):
        error_profile(ints([0, 0], 2), ints([0, 0], 3))


def test_zero_golden_uses_denominator_one():
    golden = ints([0, 0, 2, 4], 3)
    cand = ints([5, 0, 2, 4], 3)
    p = error_profile(golden, cand)
    assert math.isclose(p.mre, (5 / 1) / 4, rel_tol=1e-15)
    assert p.acc0 == 0  # golden 0, candidate 5


def test_acc0_detects_violation_only_on_golden_zero():
    golden = ints([0, 1, 2, 3], 2)
    assert error_profile(golden, ints([0, 3, 1, 0], 2)).acc0 == 1
    assert error_profile(golden, ints([1, 1, 2, 3], 2)).acc0 == 0


def test_profile_matches_naive_reference_on_random_pairs():
    rng = np.random.default_rng(21)
    params = CgpParams(n_inputs=6, n_outputs=5, n_nodes=25)
    planes = build_input_planes(6)
    for _ in range(20):
        a = random_genome(params, rng)
        b = random_genome(params, rng)
        got = error_profile(evaluate_genome(a, planes), evaluate_genome(b, planes))
        want = naive_profile(naive_genome_table(a), naive_genome_table(b))
        assert got.wce == want["wce"]
        assert got.acc0 == want["acc0"]
        assert got.histogram == want["histogram"]
        assert got.mae == want["mae"]  # exact: integer sum over a power of two
        assert got.er == want["er"]
        assert got.avg == want["avg"]
        assert math.isclose(got.mre, float(want["mre"]), rel_tol=1e-12, abs_tol=1e-12)


def test_metrics_recomputable_from_histogram():
    rng = np.random.default_rng(33)
    params = CgpParams(n_inputs=7, n_outputs=4, n_nodes=20)
    planes = build_input_planes(7)
    n = 128
    for _ in range(10):
        a = random_genome(params, rng)
        b = random_genome(params, rng)
        p = error_profile(evaluate_genome(a, planes), evaluate_genome(b, planes))
        assert sum(p.histogram.values()) == n
        assert p.wce == max(abs(e) for e in p.histogram)
        assert p.mae == sum(abs(e) * c for e, c in p.histogram.items()) / n
        assert p.er == 1 - p.histogram.get(0, 0) / n
        assert p.avg == sum(e * c for e, c in p.histogram.items()) / n


def test_metric_lattice_invariants_on_random_pairs():
    rng = np.random.default_rng(55)
    params = CgpParams(n_inputs=8, n_outputs=8, n_nodes=30)
    planes = build_input_planes(8)
    for _ in range(50):
        a = random_genome(params, rng)
        b = random_genome(params, rng)
        p = error_profile(evaluate_genome(a, planes), evaluate_genome(b, planes))
        assert p.mae <= p.wce
        assert abs(p.avg) <= p.mae
        assert 0 <= p.er <= 1
        assert (p.er == 0) == (p.wce == 0)
        if p.er == 0:
            assert p.mae == p.mre == p.avg == 0 and p.acc0 == 1


def test_relative_profile_scaling():
    p = profile_of({0: 256}, 8, 16)
    r = relative_profile(p)
    assert (r.wce_pct, r.mae_pct, r.er_pct, r.mre_pct, r.avg_pct) == (0, 0, 0, 0, 0)

    q = ErrorProfile(wce=655, mae=655.36, er=0.30, mre=0.0147, acc0=1, avg=-655.36,
                     histogram={}, n_input_bits=16, n_output_bits=16)
    r = relative_profile(q)
    assert math.isclose(r.mae_pct, 1.0, rel_tol=1e-12)
    assert math.isclose(r.er_pct, 30.0, rel_tol=1e-12)
    assert math.isclose(r.mre_pct, 1.47, rel_tol=1e-12)
    assert math.isclose(r.avg_pct, 1.0, rel_tol=1e-12)  # |avg| is used
    assert math.isclose(r.wce_pct, 100 * 655 / 65536, rel_tol=1e-12)


def test_stddev_identity_and_truncated_case():
    golden, cand = truncated_mult2()
    planes = build_input_planes(4)
    out = evaluate_genome(golden, planes)
    assert error_stddev(error_profile(out, out)) == 0.0
    p = error_profile(out, evaluate_genome(cand, planes))
    assert math.isclose(error_stddev(p), math.sqrt(0.25 - 0.0625), rel_tol=1e-12)


def test_stddev_symmetric_histogram():
    # {-1: k, +1: k, 0: rest}: mean 0, stddev sqrt(2k / 2^n)
    k, n_bits = 12, 6
    p = profile_of({-1: k, 1: k, 0: (1 << n_bits) - 2 * k}, n_bits, 4)
    assert p.avg == 0
    assert math.isclose(error_stddev(p), math.sqrt(2 * k / (1 << n_bits)), rel_tol=1e-12)


def test_gauss_spec_validation():
    with pytest.raises(ValueError, match="sigma"):
        GaussSpec(sigma=0.5)
    with pytest.raises(ValueError, match="amplitude_mode"):
        GaussSpec(sigma=2.0, amplitude_mode="other")


def test_error_free_circuit_satisfies_any_sigma():
    p = profile_of({0: 256}, 8, 8)
    for sigma in (1.0, 2.5, 10.0, 100.0):
        assert gauss_satisfied(p, GaussSpec(sigma)) == 1


def test_far_spike_violates_the_envelope():
    # nearly all inputs err at e = 10 sigma: the tail bin exceeds the envelope
    sigma = 4.0
    p = profile_of({0: 1, 40: 255}, 8, 8)
    assert gauss_satisfied(p, GaussSpec(sigma)) == 0
    assert gauss_satisfied(p, GaussSpec(sigma, "count-normalized")) == 0


def test_small_symmetric_errors_fit_under_the_envelope():
    p = profile_of({0: 200, 1: 28, -1: 28}, 8, 8)
    assert gauss_satisfied(p, GaussSpec(1.0)) == 1


def test_amplitude_mode_changes_the_verdict():
    # 56 erroneous inputs out of 256: the count-normalized envelope is ~4.6x
    # lower and the +-1 bins no longer fit under it
    p = profile_of({0: 200, 1: 28, -1: 28}, 8, 8)
    assert gauss_satisfied(p, GaussSpec(1.0, "mass-normalized")) == 1
    assert gauss_satisfied(p, GaussSpec(1.0, "count-normalized")) == 0


def test_gauss_excludes_zero_errors_from_the_center_bin():
    # zero-error mass is huge but must not count against the center bin
    p = profile_of({0: 250, 2: 3, -2: 3}, 8, 8)
    assert gauss_satisfied(p, GaussSpec(3.0)) == 1


def test_profile_serialization_and_histogram_csv():
    golden, cand = truncated_mult2()
    planes = build_input_planes(4)
    p = error_profile(evaluate_genome(golden, planes), evaluate_genome(cand, planes))
    d = profile_to_dict(p)
    assert d["wce"] == 1 and d["acc0"] == 1
    assert d["histogram"] == {"0": 12, "1": 4}
    assert math.isclose(d["stddev"], error_stddev(p), rel_tol=1e-15)
    assert histogram_to_csv(p) == "error,count\n0,12\n1,4\n"
