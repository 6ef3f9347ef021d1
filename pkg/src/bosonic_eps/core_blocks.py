"""The 2x2 building blocks shared by every network.

Each mode pair coupled in a network contributes the same block

    xi = [[eps, kappa], [-kappa, -eps]]

to the dynamical matrix, and each mode contributes ``-i * gamma / 2`` on
its diagonal.  ``xi`` has eigenvalues ``-zeta`` and ``+zeta`` with
``zeta = sqrt(eps**2 - kappa**2)`` and is defective when ``kappa = +-eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def principal_sqrt(z):
    """Principal square root that ignores the sign of a zero imaginary part.

    ``numpy.sqrt(complex(-1, -0.0))`` returns ``-1j``; here every negative
    real argument maps to the positive imaginary axis.  Works elementwise on
    arrays.

    Examples
    --------
    >>> principal_sqrt(-1)
    1j
    """
    z = np.asarray(z, dtype=complex)
    z = np.where(z.imag == 0, z.real + 0j, z)
    out = np.sqrt(z)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CouplingBlock:
    """Linear (``epsilon``) and nonlinear (``kappa``) coupling strengths."""

    epsilon: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and math.isfinite(self.kappa)):
            raise ValueError("coupling strengths must be finite")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def zeta(self):
        return complex(principal_sqrt(self.epsilon ** 2 - self.kappa ** 2))

    @property
    def kappa_floor(self):
        return 1e-12 * self.epsilon


@dataclass(frozen=True)
class RateBlock:
    """Damping (``gamma > 0``) or amplification (``gamma < 0``) rate of one mode."""

    gamma: float

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise ValueError("rate must be finite")

    def matrix(self):
        return np.diag([self.gamma / 2, self.gamma / 2]).astype(complex)


@dataclass(frozen=True)
class XiEigenSystem:
    """Eigenpairs of ``xi`` ordered as ``(-zeta, +zeta)``.

    Attributes
    ----------
    zeta : complex
    values : tuple of complex
    vectors : tuple of ndarray
        Unit-norm eigenvectors matching ``values``.  When the block is
        defective both entries hold the single eigenvector.
    defective : bool
    """

    zeta: complex
    values: tuple
    vectors: tuple
    defective: bool = False

    @property
    def pairs(self):
        return tuple(zip(self.values, self.vectors))


def xi_matrix(block):
    """The coupling block ``[[eps, kappa], [-kappa, -eps]]``."""
    e, k = block.epsilon, block.kappa
    return np.array([[e, k], [-k, -e]], dtype=complex)


def xi_vectors(epsilon, kappa, zeta):
    """Unnormalized eigenvectors of ``xi`` for ``-zeta`` and ``+zeta``.

    The textbook components carry a factor ``1 / kappa``; multiplying
    through by ``kappa / (eps + zeta)`` gives an equivalent pair that stays
    finite at ``kappa = 0`` (``eps + zeta`` never vanishes because
    ``eps > 0`` and ``Re zeta >= 0``).  Works on broadcastable arrays.
    """
    r = kappa / (epsilon + zeta)
    one = np.ones_like(r)
    minus = np.stack([-r, one], axis=-1)
    plus = np.stack([-one, r], axis=-1)
    return minus, plus


def xi_eigensystem(block):
    """Eigenvalues ``(-zeta, +zeta)`` of ``xi`` with unit eigenvectors.

    At ``|kappa| <= 1e-12 * eps`` the block is treated as exactly diagonal
    and the canonical basis ``([0, 1], [1, 0])`` is returned.  At
    ``zeta = 0`` only one eigenvector exists and ``defective`` is set.
    """
    e, k = block.epsilon, block.kappa
    zeta = block.zeta
    if abs(k) <= block.kappa_floor:
        vecs = (np.array([0, 1], dtype=complex), np.array([1, 0], dtype=complex))
        return XiEigenSystem(zeta=complex(e), values=(-complex(e), complex(e)), vectors=vecs)
    minus, plus = xi_vectors(e, k, zeta)
    minus = minus / np.linalg.norm(minus)
    plus = plus / np.linalg.norm(plus)
    if zeta == 0:
        return XiEigenSystem(zeta=0j, values=(0j, 0j), vectors=(minus, minus), defective=True)
    return XiEigenSystem(zeta=zeta, values=(-zeta, zeta), vectors=(minus, plus))
