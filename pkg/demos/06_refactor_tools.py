"""Deterministic HLS-compatibility refactoring on a toy kernel.

Three transforms run in sequence: dynamic memory becomes statically sized
arrays, numeric literals gain explicit typedef casts, and loops get
unique labels for directive targeting. All three are span-local edits
with everything else byte-preserved, and each is idempotent.
"""

from hlskit.refactor import (
    SizeMap,
    emit_ioquery,
    label_loops,
    literal_typecast,
    parse_subset,
    static_mem,
    suggest_capacity,
)

KERNEL = """\
double *atom_positions;
int **bond_partners;

void torsion_energy(double *forces, int n_atoms) {
    atom_positions = new double[n_atoms];
    for (int i = 0; i < n_atoms; i++) {
        for (int j = 0; j < bond_partners[i][0]; j++) {
            double theta = 0.5 * angle(i, j);
            forces[i] = forces[i] + 2.0 * theta;
        }
    }
    delete [] atom_positions;
}
"""

# capacities: observed workload sizes, over-provisioned to the next power
# of two at 10x (168 atoms -> 2048)
print("suggest_capacity(168) =", suggest_capacity(168))
print("suggest_capacity(40320) =", suggest_capacity(40320))
print()

sizes = SizeMap.from_json({
    "atom_positions": [2048],
    "bond_partners": [2048, 32],
    "forces": [2048],
})

step1 = static_mem(parse_subset(KERNEL), sizes).apply(KERNEL)
step2 = literal_typecast(parse_subset(step1), "Calc_t").apply(step1)
step3 = label_loops(parse_subset(step2), "Torsion_Angles").apply(step2)

print("--- after static_mem + literal_typecast + label_loops ---")
print(step3)

# idempotence: a second pass of each transform finds nothing to do
assert static_mem(parse_subset(step3), sizes).is_empty
assert literal_typecast(parse_subset(step3), "Calc_t").is_empty
assert label_loops(parse_subset(step3), "Torsion_Angles").is_empty
print("second application of every transform: no edits (idempotent)\n")

# the I/O-footprint static-analysis query for this kernel
print("--- I/O footprint query ---")
print(emit_ioquery("torsion_energy", "torsion_kernel.cpp"), end="")
