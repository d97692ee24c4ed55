"""Fixed-point bit-width search under a verification oracle.

Nine typedefs start at 64-bit doubles. Accumulator-role types are pinned
at 64 bits (rounding error compounds across accumulation), coupled types
are reported untouched, and every candidate is shrunk by binary search
with verification at each probe.
"""

from hlskit.bitwidth import (
    ROLE_ACCUMULATOR,
    ROLE_CANDIDATE,
    ROLE_COUPLED,
    FixedPointFormat,
    TraceQuantizationOracle,
    TypeBudget,
    min_integer_bits,
    precision_first_probe,
    quantize,
    search_widths,
)

# Value traces stand in for instrumented runs of the kernel: the observed
# ranges fix the integer bits, the finest-grained feature fixes the
# fractional bits each type can survive with.
TRACES = {
    "BondOrder_t": [0.0, 2.9971, 1.0 + 2**-14],
    "Angle_t": [-3.14159265, 3.14159265, 0.5 + 2**-18],
    "Param_t": [-80.0, 80.0, 1.0 + 2**-15],
    "Calc_t": [-420000.0, 380000.0, 1.0 + 2**-24],
}

BUDGETS = [
    TypeBudget("Energy_t", ROLE_ACCUMULATOR, -5.0e5, 5.0e5),
    TypeBudget("AtomDeriv_t", ROLE_ACCUMULATOR, -9.0e4, 9.0e4),
    TypeBudget("BondDeriv_t", ROLE_ACCUMULATOR, -7.0e4, 7.0e4),
    TypeBudget("BondOrder_t", ROLE_CANDIDATE, 0.0, 2.9971),
    TypeBudget("Angle_t", ROLE_CANDIDATE, -3.14159265, 3.14159265),
    TypeBudget("Param_t", ROLE_CANDIDATE, -80.0, 80.0),
    TypeBudget("Calc_t", ROLE_CANDIDATE, -420000.0, 380000.0),
    TypeBudget("Distance_t", ROLE_COUPLED, -50.0, 50.0,
               coupling="vector ops interface with AtomDeriv_t"),
    TypeBudget("Real_t", ROLE_COUPLED, -1.0, 1.0,
               coupling="vector ops interface with AtomDeriv_t"),
]

oracle = TraceQuantizationOracle(TRACES, tolerance=1e-5)
report = search_widths(BUDGETS, oracle)
print(report.render_text())

total_before = sum(e.before_bits for e in report.entries)
total_after = sum(e.after_bits for e in report.entries)
print(f"total bits {total_before} -> {total_after} "
      f"({100 * (total_before - total_after) / total_before:.1f}% reduction)\n")

# Precision beats range: at a fixed 64-bit width, the accumulated small
# term needs more fractional bits than a 32-integer-bit split leaves.
probe_oracle = TraceQuantizationOracle(
    {"Calc_t": [-500000.0, 500000.0, 1.05e-9]}, tolerance=1e-3
)
wide = probe_oracle.evaluate({"Calc_t": FixedPointFormat(64, 32, signed=True)})
print(f"(64, 32): relative error {wide.relative_error:.3f} -> "
      f"{'pass' if wide.passed else 'FAIL'}")
floor = min_integer_bits(-500000, 500000, signed=True)
best = precision_first_probe("Calc_t", FixedPointFormat(64, 32, signed=True), probe_oracle, floor)
print(f"probe at fixed W=64 settles on I={best.integer_bits} (F={best.fractional_bits})")

# Quantization saturates, never wraps: 600000 exceeds the +-2^19 range of
# a (64, 20) format and clamps exactly one step below the bound (the gap
# is 2^-44, too small for float64 to display but exact in the result).
fmt = FixedPointFormat(64, 20, signed=True)
gap = 2**19 - quantize(600000, fmt)
print(f"\nquantize(600000, W=64, I=20) saturates to 2^19 - {gap} (= 2^19 - 2^-{fmt.fractional_bits})")
