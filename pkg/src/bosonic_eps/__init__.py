"""Exceptional and hybrid degeneracies of coupled bosonic mode networks.

The package builds the dynamical matrices of seven small networks,
evaluates their spectra in closed form, checks them against a dense
numerical oracle, and classifies degeneracies (including Jordan block
structure) of the first- and second-order moment dynamics.
"""

__version__ = "0.1.0"

from .core_blocks import CouplingBlock, RateBlock, principal_sqrt, xi_eigensystem, xi_matrix  # noqa: E402
from .errors import (BosonicEpsError, ConstraintViolation, DefectiveXi, IllConditioned,  # noqa: E402
                     LengthMismatch, NonConvergence, SingularP)
from .network_models import (PlanePoint, SystemParams, Topology, build_full_matrix,  # noqa: E402
                             build_reduced_matrix, params_from_plane, validate_rates)
from .numeric_engine import (DEFAULT_POLICY, FOM_POLICY, STRICT_POLICY, JordanProfile,  # noqa: E402
                             TolerancePolicy, diagonalize, jordan_profiles, jordan_structure,
                             match_spectra, propagate)
from .analytic_spectra import (assemble_full_spectrum, derived_quantities, full_eigenvalues,  # noqa: E402
                               reduced_eigenvalues, reduced_spectrum)
from .degeneracy_atlas import (DegeneracyCluster, LocusSpec, PointClass, ScanGrid, classify_point,  # noqa: E402
                               hp_locus, locus_residual, scan_plane)
from .fom_lattice import fom2_classify, fom2_matrix, moment_basis, table_fixture, verify_table  # noqa: E402
