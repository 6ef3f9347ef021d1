"""Closed-form spectra of the reduced matrices and the full Kronecker assembly.

All eigenvalues are written as ``-i*gamma_plus + f(xi, gamma_minus)``;
``gamma_plus`` is a pure imaginary shift that never touches eigenvectors.
Square roots take the principal branch.  The eigenvalue *multisets* do
not depend on that choice because every root appears with both signs.

Eigenvectors
------------
Two-mode, three-mode, l2, circular and pyramid eigenvectors are explicit
rational expressions in the derived symbols.  For the l1 chain and the
non-trivial five-mode chain vectors the explicit coefficient list is
replaced by back substitution along the chain: fixing the last component
to one, the rows of ``(M_red - lam) y = 0`` give every other component
as a polynomial in ``lam`` divided by a power of ``xi``.  This is still
closed form (no eigensolver involved).

Whenever a coefficient is not finite or exceeds ``1e12`` in magnitude
(``xi -> 0``, ``gamma_minus -> 0`` in the pyramid), the numeric eigenvector
of the reduced matrix is substituted and the pair is flagged
``numeric_fallback``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_blocks import principal_sqrt, xi_eigensystem
from .errors import DefectiveXi
from .network_models import Topology, build_reduced_matrix, validate_rates
from . import numeric_engine

COEFF_LIMIT = 1e12
COALESCE_REL = 1e-10
SQRT5 = np.sqrt(5.0)

T = Topology


def branch_quantities(topology, xi, gamma_minus):
    """The quantities whose vanishing marks a degeneracy locus.

    Parameters
    ----------
    topology : Topology
    xi, gamma_minus : complex or ndarray
        Broadcastable.

    Returns
    -------
    dict
        Branch label to (array of) complex value: ``beta`` for two-mode,
        three-mode, circular and five-mode linear; ``mu`` for l1;
        ``alpha_plus``/``alpha_minus`` for l2; ``beta1``/``beta2`` for the
        pyramid, plus ``beta2_xi = sqrt(beta2**2 - xi**2)`` which vanishes
        where ``beta2 = +-xi``.
    """
    topology = Topology.parse(topology)
    xi = np.asarray(xi, dtype=complex)
    g2 = np.asarray(gamma_minus, dtype=complex) ** 2
    x2 = xi * xi
    if topology in (T.TWO_MODE, T.FOUR_MODE_CIRCULAR):
        return {"beta": principal_sqrt(x2 - g2)}
    if topology is T.THREE_MODE_LINEAR:
        return {"beta": principal_sqrt(2 * x2 - g2)}
    if topology is T.FOUR_MODE_LINEAR_L1:
        return {"mu": principal_sqrt(4 * x2 * (5 * x2 / 16 - g2))}
    if topology is T.FOUR_MODE_LINEAR_L2:
        return {"alpha_plus": principal_sqrt(1.5 * x2 - g2 + SQRT5 * x2 / 2),
                "alpha_minus": principal_sqrt(1.5 * x2 - g2 - SQRT5 * x2 / 2)}
    if topology is T.FIVE_MODE_LINEAR:
        return {"beta": principal_sqrt(x2 / 4 - g2)}
    return {"beta1": principal_sqrt(x2 - g2), "beta2": principal_sqrt(5 * x2 - g2),
            "beta2_xi": principal_sqrt(4 * x2 - g2)}


def reduced_eigenvalues(topology, xi, gamma_plus, gamma_minus):
    """Closed-form reduced eigenvalues in index order, vectorised.

    Inputs broadcast against each other; the result has a trailing axis of
    length ``n``.
    """
    topology = Topology.parse(topology)
    xi = np.asarray(xi, dtype=complex)
    gm = np.asarray(gamma_minus, dtype=complex)
    shift = -1j * np.asarray(gamma_plus, dtype=complex)
    x2 = xi * xi
    g2 = gm * gm
    zero = np.zeros(np.broadcast(xi, gm, shift).shape, dtype=complex)
    if topology is T.TWO_MODE:
        b = principal_sqrt(x2 - g2)
        parts = [-b, b]
    elif topology is T.THREE_MODE_LINEAR:
        b = principal_sqrt(2 * x2 - g2)
        parts = [zero, -b, b]
    elif topology is T.FOUR_MODE_LINEAR_L1:
        b2 = 1.5 * x2 - g2
        mu = principal_sqrt(4 * x2 * (5 * x2 / 16 - g2))
        ap, am = principal_sqrt(b2 + mu), principal_sqrt(b2 - mu)
        parts = [am, -am, ap, -ap]
    elif topology is T.FOUR_MODE_LINEAR_L2:
        ap = principal_sqrt(1.5 * x2 - g2 + SQRT5 * x2 / 2)
        am = principal_sqrt(1.5 * x2 - g2 - SQRT5 * x2 / 2)
        parts = [ap, -ap, am, -am]
    elif topology is T.FOUR_MODE_CIRCULAR:
        b = principal_sqrt(x2 - g2)
        ap, am = b + xi, b - xi
        parts = [-ap, -am, am, ap]
    elif topology is T.FIVE_MODE_LINEAR:
        b = principal_sqrt(x2 / 4 - g2)
        ap = principal_sqrt(b * b + 7 * x2 / 4 + 2 * b * xi)
        am = principal_sqrt(b * b + 7 * x2 / 4 - 2 * b * xi)
        parts = [zero, am, -am, ap, -ap]
    else:
        b1 = principal_sqrt(x2 - g2)
        b2 = principal_sqrt(5 * x2 - g2)
        parts = [zero, -xi + b1, -xi - b1, xi + b2, xi - b2]
    return np.stack([shift + p for p in np.broadcast_arrays(*parts)], axis=-1)


@dataclass(frozen=True)
class DerivedQuantities:
    """Auxiliary symbols of one topology at one ``xi``.

    Fields that a topology does not use are ``None``.  ``chi`` maps names
    such as ``"chi"``, ``"chi+"``, ``"chi1"`` to values and ``extra`` holds
    the remaining eigenvector coefficients (``kappa+``, ``sigma-``, ...).
    """

    topology: Topology
    xi: complex
    zeta: complex
    gamma_plus: float
    gamma_minus: float
    beta: complex | None = None
    alpha_plus: complex | None = None
    alpha_minus: complex | None = None
    mu: complex | None = None
    beta1: complex | None = None
    beta2: complex | None = None
    chi: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def derived_quantities(params, xi):
    gp, gm = validate_rates(params)
    t = params.topology
    xi = complex(xi)
    x2, g2 = xi * xi, gm * gm
    sq = lambda z: complex(principal_sqrt(z))  # noqa: E731
    kw = dict(topology=t, xi=xi, zeta=params.zeta, gamma_plus=gp, gamma_minus=gm)
    if t in (T.TWO_MODE, T.FOUR_MODE_CIRCULAR):
        b = sq(x2 - g2)
        kw.update(beta=b, chi={"chi": 1j * gm + b, "chi*": b - 1j * gm})
        if t is T.FOUR_MODE_CIRCULAR:
            kw.update(alpha_plus=b + xi, alpha_minus=b - xi)
    elif t is T.THREE_MODE_LINEAR:
        kw.update(beta=sq(2 * x2 - g2))
    elif t is T.FOUR_MODE_LINEAR_L1:
        b = sq(1.5 * x2 - g2)
        mu = sq(4 * x2 * (5 * x2 / 16 - g2))
        ap, am = sq(b * b + mu), sq(b * b - mu)
        kw.update(beta=b, mu=mu, alpha_plus=ap, alpha_minus=am,
                  chi={"chi+": 1j * gm + ap, "chi-": 1j * gm + am})
    elif t is T.FOUR_MODE_LINEAR_L2:
        ap = sq(1.5 * x2 - g2 + SQRT5 * x2 / 2)
        am = sq(1.5 * x2 - g2 - SQRT5 * x2 / 2)
        kw.update(alpha_plus=ap, alpha_minus=am,
                  chi={"chi+": 1j * gm + ap, "chi-": 1j * gm + am,
                       "chi+*": ap - 1j * gm, "chi-*": am - 1j * gm},
                  extra={"kappa+": (SQRT5 + 1) / 2, "kappa-": (1 - SQRT5) / 2})
    elif t is T.FIVE_MODE_LINEAR:
        b = sq(x2 / 4 - g2)
        ap = sq(b * b + 7 * x2 / 4 + 2 * b * xi)
        am = sq(b * b + 7 * x2 / 4 - 2 * b * xi)
        kw.update(beta=b, alpha_plus=ap, alpha_minus=am,
                  chi={"chi+": 1j * gm + ap, "chi-": 1j * gm + am})
    else:
        b1, b2 = sq(x2 - g2), sq(5 * x2 - g2)
        c1, c2 = b1 - 1j * gm, b2 - 1j * gm
        kw.update(beta1=b1, beta2=b2,
                  chi={"chi1": c1, "chi2": c2, "chi1*": b1 + 1j * gm, "chi2*": b2 + 1j * gm},
                  extra={"sigma+": (xi + c2) / (4 * xi) if xi else complex("nan"),
                         "sigma-": (xi - c2) / (4 * xi) if xi else complex("nan"),
                         "sigma+*": (xi + b2 + 1j * gm) / (4 * xi) if xi else complex("nan"),
                         "sigma-*": (xi - b2 - 1j * gm) / (4 * xi) if xi else complex("nan")})
    return DerivedQuantities(**kw)


@dataclass(frozen=True)
class ReducedEigenpair:
    index: int
    value: complex
    vector: np.ndarray
    numeric_fallback: bool = False
    defective: bool = False


@dataclass(frozen=True)
class FullEigenpair:
    index: int
    value: complex
    vector: np.ndarray
    parity: int  # 1 for xi = -zeta, 2 for xi = +zeta
    numeric_fallback: bool = False
    defective: bool = False


def chain_vector(diagonal, xi, lam):
    """Back substitution along a chain with uniform coupling ``xi``.

    Solves the rows of ``(M_red - lam) y = 0`` from the last one upward
    with ``y[-1] = 1``.
    """
    n = len(diagonal)
    y = np.zeros(n, dtype=complex)
    y[-1] = 1.0
    y[-2] = (lam - diagonal[-1]) / xi
    for k in range(n - 2, 0, -1):
        y[k - 1] = ((lam - diagonal[k]) * y[k] - xi * y[k + 1]) / xi
    return y


def _formula_vectors(dq, diagonal, lams):
    """Unnormalised closed-form eigenvectors, one per eigenvalue in ``lams``."""
    t, xi, gm = dq.topology, dq.xi, dq.gamma_minus
    ig = 1j * gm
    if t is T.TWO_MODE:
        b = dq.beta
        return [np.array([-(ig + b) / xi, 1]), np.array([-(ig - b) / xi, 1])]
    if t is T.THREE_MODE_LINEAR:
        b = dq.beta
        out = [np.array([-1, -ig / xi, 1])]
        for s in (b, -b):
            out.append(np.array([1 + ig * (ig + s) / xi ** 2, -(ig + s) / xi, 1]))
        return out
    if t is T.FOUR_MODE_LINEAR_L2:
        kp, km = dq.extra["kappa+"], dq.extra["kappa-"]
        out = []
        for alpha, k_same, k_other in ((dq.alpha_plus, kp, km), (dq.alpha_minus, km, kp)):
            c, cs = ig + alpha, alpha - ig
            out.append(np.array([-k_other * cs / xi, k_same, cs / xi, 1]))
            out.append(np.array([k_other * c / xi, k_same, -c / xi, 1]))
        return out
    if t is T.FOUR_MODE_CIRCULAR:
        c, cs = dq.chi["chi"], dq.chi["chi*"]
        return [np.array([-c / xi, c / xi, -1, 1]), np.array([-c / xi, -c / xi, 1, 1]),
                np.array([cs / xi, -cs / xi, -1, 1]), np.array([cs / xi, cs / xi, 1, 1])]
    if t is T.FIVE_MODE_PYRAMID:
        c1, c1s = dq.chi["chi1"], dq.chi["chi1*"]
        sp, sm = dq.extra["sigma+"], dq.extra["sigma-"]
        sps, sms = dq.extra["sigma+*"], dq.extra["sigma-*"]
        r = 1j * xi / gm if gm else complex("inf")
        return [np.array([-r, -r, r, r, 1]),
                np.array([c1 / xi, -c1 / xi, -1, 1, 0]),
                np.array([-c1s / xi, c1s / xi, -1, 1, 0]),
                np.array([sp, sp, sps, sps, 1]),
                np.array([sms, sms, sm, sm, 1])]
    out = [chain_vector(diagonal, xi, lam) for lam in lams]
    if t is T.FIVE_MODE_LINEAR:
        out[0] = np.array([1, ig / xi, -(gm / xi) ** 2 - 1, -ig / xi, 1])
    return out


def reduced_spectrum(params, xi):
    """Closed-form reduced eigenpairs at one ``xi`` in index order.

    Returns
    -------
    list of ReducedEigenpair
        Unit-norm vectors.  Pairs whose eigenvalue coalesces with another
        (within ``1e-10 * max(1, |M_red|)``) are flagged ``defective``.
    """
    gp, gm = validate_rates(params)
    xi = complex(xi)
    dq = derived_quantities(params, xi)
    lams = reduced_eigenvalues(params.topology, xi, gp, gm)
    M_red = build_reduced_matrix(params, xi)
    diagonal = np.diag(M_red)
    with np.errstate(all="ignore"):
        try:
            vecs = _formula_vectors(dq, diagonal, lams)
        except ZeroDivisionError:
            vecs = [np.full(params.n, np.nan, dtype=complex) for _ in lams]
    thr = COALESCE_REL * max(1.0, np.linalg.norm(M_red, 2))
    gaps = np.abs(lams[:, None] - lams[None, :]) + np.diag(np.full(len(lams), np.inf))
    numeric = None
    out = []
    for k, (lam, v) in enumerate(zip(lams, vecs)):
        v = np.asarray(v, dtype=complex)
        fallback = not np.all(np.isfinite(v)) or np.max(np.abs(v)) > COEFF_LIMIT
        if fallback:
            if numeric is None:
                numeric = numeric_engine.eig(M_red)
            w, V = numeric
            v = V[:, int(np.argmin(np.abs(w - lam)))]
        v = v / np.linalg.norm(v)
        out.append(ReducedEigenpair(index=k + 1, value=complex(lam), vector=v,
                                    numeric_fallback=bool(fallback),
                                    defective=bool(np.min(gaps[k]) <= thr)))
    return out


def assemble_full_spectrum(params):
    """Full ``2n`` eigenpairs from the two reduced spectra.

    ``Lambda[2j-1] = lambda_j(-zeta)``, ``Lambda[2j] = lambda_j(+zeta)`` and
    ``Y = kron(y_j, y_xi)`` (1-based indices as in the labelling).

    Raises
    ------
    DefectiveXi
        When ``zeta = 0`` and the coupling block has a single eigenvector.
    """
    xs = xi_eigensystem(params.block)
    if xs.defective or abs(xs.zeta) <= 1e-12 * params.epsilon:
        raise DefectiveXi(f"kappa = {params.kappa} makes the coupling block defective")
    branches = [reduced_spectrum(params, x) for x in xs.values]
    out = []
    for j in range(params.n):
        for parity in (1, 2):
            r = branches[parity - 1][j]
            y = np.kron(r.vector, xs.vectors[parity - 1])
            out.append(FullEigenpair(index=2 * j + parity, value=r.value, vector=y / np.linalg.norm(y),
                                     parity=parity, numeric_fallback=r.numeric_fallback,
                                     defective=r.defective))
    return out


def full_eigenvalues(topology, epsilon, kappa, gamma_plus, gamma_minus):
    """Vectorised full spectrum, ordered as in :func:`assemble_full_spectrum`."""
    zeta = principal_sqrt(np.asarray(epsilon, dtype=complex) ** 2 - np.asarray(kappa, dtype=complex) ** 2)
    lo = reduced_eigenvalues(topology, -zeta, gamma_plus, gamma_minus)
    hi = reduced_eigenvalues(topology, zeta, gamma_plus, gamma_minus)
    return np.stack([lo, hi], axis=-1).reshape(lo.shape[:-1] + (2 * lo.shape[-1],))


__all__ = [
    "branch_quantities", "reduced_eigenvalues", "DerivedQuantities", "derived_quantities",
    "ReducedEigenpair", "FullEigenpair", "chain_vector", "reduced_spectrum",
    "assemble_full_spectrum", "full_eigenvalues",
]
