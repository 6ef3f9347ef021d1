"""Scan the (kappa, gamma_minus) plane and report where the EP flag fires.

Usage: python demos/scan_plane.py [topology]
"""

import sys

import numpy as np

from bosonic_eps import Topology
from bosonic_eps.degeneracy_atlas import ScanGrid, hp_locus, scan_plane

topology = Topology.parse(sys.argv[1] if len(sys.argv) > 1 else "four_mode_linear_l2")
grid = ScanGrid(kappa=(-1.5, 1.5, 151), gamma_minus=(-1.5, 1.5, 151))
table = scan_plane(topology, grid=grid)
k = table.column("kappa_over_eps")[table.flagged]
g = table.column("gamma_minus_over_eps")[table.flagged]
print(f"{topology.value}: {k.size} of {table.data.shape[0]} grid points flagged")
for ellipse in hp_locus(topology, include_unlisted=True):
    d = ellipse.distance(k, g)
    near = int(np.sum(d <= 1.5 * grid.step))
    print(f"  branch {ellipse.branch} (c={ellipse.c}, listed={ellipse.listed}): {near} flagged points within 1.5 steps")
