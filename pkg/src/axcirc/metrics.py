"""Arithmetic error metrics between a golden circuit and a candidate.

All metrics are computed over the exhaustive signed error e(x) =
int(golden(x)) - int(candidate(x)). Sums of integers divided by the
power-of-two input count are exact in binary floating point, so wce, mae,
er, avg and acc0 carry no rounding error at all; mre is a correctly-rounded
float (fsum over integer-exact per-value numerators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulator import OutputInts

# above this output magnitude, per-value grouping falls back to a dense scan
_BINCOUNT_LIMIT = 1 << 20


@dataclass(frozen=True)
class ErrorProfile:
    """Every supported error metric plus the signed-error histogram.

    histogram maps signed error (golden minus candidate) to the number of
    input vectors producing it; counts sum to 2^n_input_bits.
    """

    wce: int
    mae: float
    er: float
    mre: float
    acc0: int
    avg: float
    histogram: dict[int, int]
    n_input_bits: int
    n_output_bits: int


@dataclass(frozen=True)
class RelativeProfile:
    """Metrics scaled to percent: magnitudes over the 2^m output range,
    er over the input count, mre as plain percent."""

    wce_pct: float
    mae_pct: float
    er_pct: float
    mre_pct: float
    avg_pct: float


@dataclass(frozen=True)
class GaussSpec:
    """Target bell envelope for the error distribution: mean 0, given sigma.

    amplitude_mode fixes the envelope height, which the constraint itself
    leaves open: "mass-normalized" makes the envelope integrate (over all
    integer errors) to the input count 2^n; "count-normalized" to the number
    of erroneous inputs only.
    """

    sigma: float
    amplitude_mode: str = "mass-normalized"

    def __post_init__(self):
        if not self.sigma >= 1:
            raise ValueError("sigma must be >= 1 (bins cover at least one integer error)")
        if self.amplitude_mode not in ("mass-normalized", "count-normalized"):
            raise ValueError(f"unknown amplitude_mode {self.amplitude_mode!r}")


def error_profile(golden: OutputInts, cand: OutputInts) -> ErrorProfile:
    """Exhaustive error metrics of a candidate against the golden outputs."""
    if len(golden.values) != len(cand.values):
        raise ValueError(
            f"output length mismatch: golden {len(golden.values)}, candidate {len(cand.values)}"
        )
    if golden.width != cand.width:
        raise ValueError(f"output width mismatch: golden {golden.width}, candidate {cand.width}")
    n_vectors = len(golden.values)
    n_bits = n_vectors.bit_length() - 1
    if 1 << n_bits != n_vectors:
        raise ValueError(f"output length {n_vectors} is not a power of two")

    g = golden.values
    e = g - cand.values
    abs_e = np.abs(e)
    wce = int(abs_e.max())
    mae = int(abs_e.sum()) / n_vectors
    n_wrong = int(np.count_nonzero(e))
    er = n_wrong / n_vectors
    avg = int(e.sum()) / n_vectors
    zero_golden = g == 0
    acc0 = int(not np.any(cand.values[zero_golden] != 0))

    # group |e| by golden value: partial sums are integers, exact in float64
    if int(g.max()) < _BINCOUNT_LIMIT:
        sums = np.bincount(g, weights=abs_e)
        nz = np.nonzero(sums)[0]
        terms = sums[nz] / np.maximum(nz, 1)
        mre = math.fsum(terms.tolist()) / n_vectors
    else:
        mre = math.fsum((abs_e / np.maximum(g, 1)).tolist()) / n_vectors

    if wce < _BINCOUNT_LIMIT:
        counts = np.bincount(e + wce, minlength=2 * wce + 1)
        present = np.nonzero(counts)[0]
        histogram = {int(v) - wce: int(counts[v]) for v in present}
    else:
        errors, counts = np.unique(e, return_counts=True)
        histogram = {int(err): int(cnt) for err, cnt in zip(errors, counts)}
    return ErrorProfile(
        wce=wce,
        mae=mae,
        er=er,
        mre=mre,
        acc0=acc0,
        avg=avg,
        histogram=histogram,
        n_input_bits=n_bits,
        n_output_bits=golden.width,
    )


def relative_profile(profile: ErrorProfile) -> RelativeProfile:
    out_range = 1 << profile.n_output_bits
    return RelativeProfile(
        wce_pct=100.0 * profile.wce / out_range,
        mae_pct=100.0 * profile.mae / out_range,
        er_pct=100.0 * profile.er,
        mre_pct=100.0 * profile.mre,
        avg_pct=100.0 * abs(profile.avg) / out_range,
    )


def error_stddev(profile: ErrorProfile) -> float:
    """Population standard deviation of the signed error over all inputs."""
    n_vectors = 1 << profile.n_input_bits
    second_moment = sum(err * err * cnt for err, cnt in profile.histogram.items()) / n_vectors
    var = second_moment - profile.avg * profile.avg
    return math.sqrt(max(var, 0.0))


def _envelope_sum(sigma: float, lo: int, hi: int) -> float:
    """Sum of exp(-e^2 / 2 sigma^2) over integer e in [lo, hi]."""
    inv = 1.0 / (2.0 * sigma * sigma)
    return math.fsum(math.exp(-(e * e) * inv) for e in range(lo, hi + 1))


def _bin_bounds(k: int, sigma: float) -> tuple[int, int]:
    """Integer errors inside bin k = [(k-0.5) sigma, (k+0.5) sigma)."""
    lo = math.ceil((k - 0.5) * sigma)
    hi = math.ceil((k + 0.5) * sigma) - 1
    return lo, hi


def gauss_satisfied(profile: ErrorProfile, spec: GaussSpec) -> int:
    """1 iff the nonzero-error histogram stays below the Gaussian envelope.

    The error axis is split into half-open bins of width sigma centered on
    zero; within each bin the observed count per integer error (averaged
    over the bin) must not exceed the envelope averaged over the same
    integer points. Error 0 is excluded throughout.
    """
    sigma = spec.sigma
    nonzero = {e: c for e, c in profile.histogram.items() if e != 0}
    if not nonzero:
        return 1

    # envelope amplitude: scale so total envelope mass matches the chosen base
    reach = int(math.ceil(12 * sigma))
    total_envelope = _envelope_sum(sigma, -reach, reach)
    if spec.amplitude_mode == "mass-normalized":
        mass = float(1 << profile.n_input_bits)
    else:
        mass = float(sum(nonzero.values()))
    amplitude = mass / total_envelope

    bins: dict[int, int] = {}
    for e, c in nonzero.items():
        k = math.floor(e / sigma + 0.5)
        bins[k] = bins.get(k, 0) + c
    for k, observed in bins.items():
        lo, hi = _bin_bounds(k, sigma)
        points = hi - lo + 1
        envelope = amplitude * _envelope_sum(sigma, lo, hi)
        if k == 0 and lo <= 0 <= hi:
            points -= 1
            envelope -= amplitude  # envelope value at e=0 is exactly A
        if points <= 0:
            continue
        # same positive divisor on both sides, so compare the bin totals
        if observed > envelope:
            return 0
    return 1


def profile_to_dict(profile: ErrorProfile) -> dict:
    """JSON-ready form; histogram keys become strings, stddev is included."""
    return {
        "wce": profile.wce,
        "mae": profile.mae,
        "er": profile.er,
        "mre": profile.mre,
        "acc0": profile.acc0,
        "avg": profile.avg,
        "stddev": error_stddev(profile),
        "n_input_bits": profile.n_input_bits,
        "n_output_bits": profile.n_output_bits,
        "histogram": {str(e): c for e, c in sorted(profile.histogram.items())},
    }


def histogram_to_csv(profile: ErrorProfile) -> str:
    """Two-column CSV (error, count), ascending by error."""
    lines = ["error,count"]
    lines += [f"{e},{c}" for e, c in sorted(profile.histogram.items())]
    return "\n".join(lines) + "\n"
