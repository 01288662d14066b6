"""Matchgates, their circuits and where they sit in the Weyl chamber."""
import numpy as np

from mgforge.compiler import decompose_general, decompose_symmetric, random_matchgate, simulate_circuit
from mgforge.linalg import phase_distance
from mgforge.matchgate import compose_matchgate, cz_from_matchgates, named_matchgate
from mgforge.weyl import is_perfect_entangler, kak_coordinates

np.set_printoptions(precision=4, suppress=True)

# CZ from four matchgates
print("G_HH SWAP G_XX G_HH =\n", cz_from_matchgates().real)

# a symmetric matchgate needs a single CZ_theta
dec = decompose_symmetric(named_matchgate("G_HH"))
print(f"G_HH: theta = {dec.theta:.6f}, residual {dec.residual:.1e}")

# general matchgates: two CNOTs and one controlled unitary
rng = np.random.default_rng(1)
m = random_matchgate(rng)
circuit = decompose_general(m).circuit
print("ops:", [op.kind for op in circuit.ops])
print("roundtrip error:", phase_distance(simulate_circuit(circuit), compose_matchgate(m)))

# symmetric matchgates lie on the [gamma, 0, 0] line; only G_HH is a perfect entangler
for name in ("G_HH", "G_XX", "G_TT"):
    c = kak_coordinates(compose_matchgate(named_matchgate(name)))
    print(f"{name}: c = {np.round(c, 4)}, perfect entangler {is_perfect_entangler(c)}")
