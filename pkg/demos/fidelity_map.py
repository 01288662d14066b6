"""Locally optimised fidelity map of an ideal CZ and a noisy one."""
import numpy as np

from mgforge.matchgate import CZ
from mgforge.nonlocal_map import build_chamber_grid, fidelity_map, locate_maximum, volume_fraction
from mgforge.process import compose, depolarizing, unitary_to_chi

target = (np.pi / 2, 0, 0)
grid = build_chamber_grid(target_count=200)
print(f"{len(grid)} grid points, spacing {grid.spacing:.4f}")

for p in (0.0, 0.1):
    x = compose(unitary_to_chi(CZ), depolarizing(p))
    fmap = fidelity_map(x, grid, restarts=8)
    best = locate_maximum(fmap, x, target)
    print(f"depolarizing {p}: f_max {best.f_max:.4f} at {np.round(best.point, 4)}, "
          f"delta_nl {best.delta_nl:.1e}, vf(0.9) {volume_fraction(fmap, 0.9):.3f}, "
          f"min {fmap.f.min():.3f}")
