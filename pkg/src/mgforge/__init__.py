"""Matchgate compilation, Weyl-chamber analysis and two-qubit process tomography."""
__version__ = "0.1.0"

from .compiler import decompose_general, decompose_symmetric, simulate_circuit
from .matchgate import Matchgate, compose_matchgate, named_gate, recognize_matchgate
from .nonlocal_map import build_chamber_grid, fidelity_map, local_orbit_fidelity, locate_maximum, volume_fraction
from .process import ProcessMatrix, process_fidelity, process_purity, unitary_to_chi
from .tomography import bootstrap_errors, mle_reconstruct, simulate_counts
from .weyl import WeylPoint, canonical_unitary, kak_coordinates, makhlin_invariants, nonlocal_distance
