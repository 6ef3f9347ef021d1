"""Walk the two-mode system onto its exceptional ellipse.

Prints the closed-form spectrum next to LAPACK's at a regular point, the
Jordan clusters at a point on the ellipse, and the linear growth of the
propagator there.
"""

import numpy as np

from bosonic_eps import PlanePoint, Topology, params_from_plane
from bosonic_eps.analytic_spectra import assemble_full_spectrum
from bosonic_eps.degeneracy_atlas import classify_point, hp_locus
from bosonic_eps.network_models import build_full_matrix
from bosonic_eps.numeric_engine import eigvals, match_spectra, propagate

regular = params_from_plane(Topology.TWO_MODE, 1.0, PlanePoint(0.4, 0.7, 0.1))
closed = [e.value for e in assemble_full_spectrum(regular)]
_, err = match_spectra(closed, eigvals(build_full_matrix(regular).entries))
print("regular point eigenvalues:")
for lam in closed:
    print(f"  {lam.real:+.6f} {lam.imag:+.6f}i")
print(f"max |closed form - numeric| = {err:.2e}")

(ellipse,) = hp_locus(Topology.TWO_MODE)
pt = ellipse.point(0.8)
ep = params_from_plane(Topology.TWO_MODE, 1.0, pt)
print(f"\npoint on the ellipse: kappa/eps={pt.kappa_over_eps:.4f}, gamma_minus/eps={pt.gamma_minus_over_eps:.4f}")
for c in classify_point(ep):
    print(f"  eigenvalue {c.eigenvalue:.4f}: alg {c.algebraic}, geo {c.geometric}, blocks {c.blocks}")

M = build_full_matrix(ep).entries
print("\n|U(t)| on the ellipse:")
for t in (1, 10, 100):
    print(f"  t={t:>3}: {np.linalg.norm(propagate(M, t), 2):.3f}")
