"""Exception types shared across the package."""


class BosonicEpsError(Exception):
    """Base class for every error raised by this package."""


class ConstraintViolation(BosonicEpsError, ValueError):
    """A rate vector does not satisfy the equalities required by its topology."""

    def __init__(self, topology, equality, residual):
        self.topology = topology
        self.equality = equality
        self.residual = residual
        super().__init__(f"{topology}: rate constraint {equality} violated (residual {residual:.3e})")


class DefectiveXi(BosonicEpsError):
    """The 2x2 coupling block is defective (kappa = +-epsilon), so the Kronecker assembly is undefined."""


class NonConvergence(BosonicEpsError):
    """A dense eigensolver failed to converge."""


class IllConditioned(BosonicEpsError):
    """The rank staircase of a cluster is inconsistent under the active tolerance policy."""

    def __init__(self, message, eigenvalue=None, staircase=None):
        self.eigenvalue = eigenvalue
        self.staircase = staircase
        super().__init__(message)


class SingularP(BosonicEpsError):
    """The eigenvector matrix is numerically singular; the point is (near) defective."""


class LengthMismatch(BosonicEpsError, ValueError):
    """Two spectra of different lengths were passed to a matching routine."""
