"""Network topologies, their rate constraints, and the dynamical matrices.

A network of ``n`` modes has a ``2n x 2n`` dynamical matrix made of 2x2
blocks: ``xi`` wherever two modes are coupled, ``-i * diag(gamma_j / 2)``
on the diagonal, zero elsewhere.  Replacing ``xi`` by one of its
eigenvalues gives the ``n x n`` reduced matrix; the full spectrum is the
union of the two reduced spectra.

Every closed-form result requires the rates to satisfy a
topology-specific set of equalities, after which they are summarised by
two numbers ``gamma_plus`` and ``gamma_minus``::

    4 * gamma_plus  = gamma_a + gamma_b
    4 * gamma_minus = gamma_a - gamma_b

where ``a`` and ``b`` are the topology's two distinguished mode groups.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core_blocks import CouplingBlock, xi_matrix
from .errors import ConstraintViolation

RATE_RTOL = 1e-12


class Topology(enum.Enum):
    """The seven supported networks; the value is the CLI name."""

    TWO_MODE = "two_mode"
    THREE_MODE_LINEAR = "three_mode_linear"
    FOUR_MODE_LINEAR_L1 = "four_mode_linear_l1"
    FOUR_MODE_LINEAR_L2 = "four_mode_linear_l2"
    FOUR_MODE_CIRCULAR = "four_mode_circular"
    FIVE_MODE_LINEAR = "five_mode_linear"
    FIVE_MODE_PYRAMID = "five_mode_pyramid"

    @property
    def n(self):
        return _N_MODES[self]

    @property
    def is_chain(self):
        return self in (Topology.TWO_MODE, Topology.THREE_MODE_LINEAR, Topology.FOUR_MODE_LINEAR_L1,
                        Topology.FOUR_MODE_LINEAR_L2, Topology.FIVE_MODE_LINEAR)

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        for t in cls:
            if key in (t.value, t.name.lower()):
                return t
        raise ValueError(f"unknown topology {name!r}; choose from {[t.value for t in cls]}")


_N_MODES = {
    Topology.TWO_MODE: 2,
    Topology.THREE_MODE_LINEAR: 3,
    Topology.FOUR_MODE_LINEAR_L1: 4,
    Topology.FOUR_MODE_LINEAR_L2: 4,
    Topology.FOUR_MODE_CIRCULAR: 4,
    Topology.FIVE_MODE_LINEAR: 5,
    Topology.FIVE_MODE_PYRAMID: 5,
}

# 0-based edge lists
_EDGES = {
    Topology.TWO_MODE: [(0, 1)],
    Topology.THREE_MODE_LINEAR: [(0, 1), (1, 2)],
    Topology.FOUR_MODE_LINEAR_L1: [(0, 1), (1, 2), (2, 3)],
    Topology.FOUR_MODE_LINEAR_L2: [(0, 1), (1, 2), (2, 3)],
    Topology.FOUR_MODE_CIRCULAR: [(0, 1), (1, 2), (2, 3), (3, 0)],
    Topology.FIVE_MODE_LINEAR: [(0, 1), (1, 2), (2, 3), (3, 4)],
    Topology.FIVE_MODE_PYRAMID: [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3), (2, 4), (3, 4)],
}

# each constraint: (label, coefficients c with sum_j c_j * gamma_j == 0)
_CONSTRAINTS = {
    Topology.TWO_MODE: [],
    Topology.THREE_MODE_LINEAR: [("2*g2 = g1 + g3", (-1, 2, -1))],
    Topology.FOUR_MODE_LINEAR_L1: [("g1 = g2", (1, -1, 0, 0)), ("g3 = g4", (0, 0, 1, -1))],
    Topology.FOUR_MODE_LINEAR_L2: [("g1 = g3", (1, 0, -1, 0)), ("g2 = g4", (0, 1, 0, -1))],
    Topology.FOUR_MODE_CIRCULAR: [("g1 = g2", (1, -1, 0, 0)), ("g3 = g4", (0, 0, 1, -1))],
    Topology.FIVE_MODE_LINEAR: [("g1 = g2", (1, -1, 0, 0, 0)), ("g4 = g5", (0, 0, 0, 1, -1)),
                                ("2*g3 = g1 + g4", (-1, 0, 2, -1, 0))],
    Topology.FIVE_MODE_PYRAMID: [("g1 = g2", (1, -1, 0, 0, 0)), ("g3 = g4", (0, 0, 1, -1, 0)),
                                 ("2*g5 = g1 + g3", (-1, 0, -1, 0, 2))],
}

# (a, b) mode groups entering 4*gamma_pm = gamma_a +- gamma_b; a group's
# rate is the single common value of its members
_GROUPS = {
    Topology.TWO_MODE: ((0,), (1,)),
    Topology.THREE_MODE_LINEAR: ((0,), (2,)),
    Topology.FOUR_MODE_LINEAR_L1: ((0, 1), (2, 3)),
    Topology.FOUR_MODE_LINEAR_L2: ((0, 2), (1, 3)),
    Topology.FOUR_MODE_CIRCULAR: ((0, 1), (2, 3)),
    Topology.FIVE_MODE_LINEAR: ((0, 1), (3, 4)),
    Topology.FIVE_MODE_PYRAMID: ((0, 1), (2, 3)),
}


@dataclass(frozen=True)
class SystemParams:
    """Full physical input: topology, couplings and per-mode rates."""

    topology: Topology
    epsilon: float
    kappa: float
    gammas: tuple

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        CouplingBlock(self.epsilon, self.kappa)
        if len(self.gammas) != self.topology.n:
            raise ValueError(f"{self.topology.value} needs {self.topology.n} rates, got {len(self.gammas)}")
        if not all(math.isfinite(g) for g in self.gammas):
            raise ValueError("rates must be finite")

    @property
    def n(self):
        return self.topology.n

    @property
    def block(self):
        return CouplingBlock(self.epsilon, self.kappa)

    @property
    def zeta(self):
        return self.block.zeta


@dataclass(frozen=True)
class PlanePoint:
    """Dimensionless coordinates of the reduced parameter plane."""

    kappa_over_eps: float
    gamma_minus_over_eps: float
    gamma_plus_over_eps: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.kappa_over_eps, self.gamma_minus_over_eps,
                                              self.gamma_plus_over_eps)):
            raise ValueError("plane coordinates must be finite")


@dataclass(frozen=True)
class DynamicalMatrix:
    entries: np.ndarray
    topology: Topology

    @property
    def dim(self):
        return self.entries.shape[0]

    def block(self, i, j):
        return self.entries[2 * i:2 * i + 2, 2 * j:2 * j + 2]


def adjacency(topology):
    """Symmetric boolean coupling matrix of a topology."""
    topology = Topology.parse(topology)
    A = np.zeros((topology.n, topology.n), dtype=bool)
    for i, j in _EDGES[topology]:
        A[i, j] = A[j, i] = True
    return A


def validate_rates(params):
    """Check the rate equalities and return ``(gamma_plus, gamma_minus)``.

    Raises
    ------
    ConstraintViolation
        Naming the first equality that fails by more than
        ``1e-12 * max|gamma|``.
    """
    g = np.asarray(params.gammas)
    scale = np.max(np.abs(g)) if g.size else 0.0
    for label, coeffs in _CONSTRAINTS[params.topology]:
        r = float(np.dot(coeffs, g))
        if abs(r) > RATE_RTOL * scale:
            raise ConstraintViolation(params.topology.value, label, r)
    a, b = _GROUPS[params.topology]
    ga, gb = g[a[0]], g[b[0]]
    return (ga + gb) / 4, (ga - gb) / 4


def rate_diagonal(params):
    return -0.5j * np.asarray(params.gammas, dtype=complex)


def build_full_matrix(params):
    """The ``2n x 2n`` dynamical matrix ``kron(A, xi) + kron(-i*diag(gamma)/2, I2)``."""
    validate_rates(params)
    A = adjacency(params.topology).astype(complex)
    M = np.kron(A, xi_matrix(params.block)) + np.kron(np.diag(rate_diagonal(params)), np.eye(2))
    return DynamicalMatrix(entries=M, topology=params.topology)


def build_reduced_matrix(params, xi):
    """The ``n x n`` matrix obtained by replacing the block ``xi`` with the scalar ``xi``."""
    validate_rates(params)
    A = adjacency(params.topology).astype(complex)
    return A * complex(xi) + np.diag(rate_diagonal(params))


def rates_from_plane(topology, gamma_plus, gamma_minus):
    """Rate vector realising ``(gamma_plus, gamma_minus)`` for a topology.

    Group ``a`` gets ``2*(g+ + g-)``, group ``b`` gets ``2*(g+ - g-)`` and any
    remaining mode sits at the midpoint ``2*g+``.
    """
    topology = Topology.parse(topology)
    a, b = _GROUPS[topology]
    g = [2.0 * gamma_plus] * topology.n
    for i in a:
        g[i] = 2.0 * (gamma_plus + gamma_minus)
    for i in b:
        g[i] = 2.0 * (gamma_plus - gamma_minus)
    return tuple(g)


def params_from_plane(topology, epsilon, point):
    """Inverse of the plane reduction, ``kappa = eps * kappa_over_eps`` etc."""
    topology = Topology.parse(topology)
    gammas = rates_from_plane(topology, epsilon * point.gamma_plus_over_eps,
                              epsilon * point.gamma_minus_over_eps)
    return SystemParams(topology, float(epsilon), float(epsilon * point.kappa_over_eps), gammas)
