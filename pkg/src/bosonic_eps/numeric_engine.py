"""Brute-force numerical oracle.

Everything here works on plain dense complex matrices and knows nothing
about topologies.  It is the independent route that the closed forms in
:mod:`bosonic_eps.analytic_spectra` are checked against.

Jordan structure
----------------
A defective eigenvalue of multiplicity ``m`` with largest block ``b`` is
split by roundoff into a ring of radius roughly ``(u * |M|) ** (1 / b)``,
so the eigenvalues returned by LAPACK cannot be compared with a tight
threshold.  The mean of the ring, however, is accurate to ``O(u)``.  The
analysis therefore

1. groups eigenvalues with a generous clustering radius,
2. reorders the complex Schur form so that the cluster occupies the
   leading ``m x m`` triangle ``T11`` (this restriction of ``M`` to the
   cluster's invariant subspace is well conditioned whenever the cluster
   is separated from the rest of the spectrum),
3. forms ``N = T11 - mean * I`` and reads the kernel dimensions of its
   powers from a unitary staircase reduction (repeated SVD deflation),
   using a threshold scaled by machine precision instead of by the ring
   radius.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack
from scipy.optimize import linear_sum_assignment

from .errors import IllConditioned, LengthMismatch, NonConvergence, SingularP

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical thresholds used by every classification call.

    Attributes
    ----------
    cluster_rel : float
        Eigenvalues closer than ``cluster_rel * max(1, |M|_2)`` are grouped
        (single linkage).
    rank_safety : float
        Singular values below ``rank_safety * u * m * max(1, |M|_2)``
        count as zero in the staircase reduction of a cluster of size ``m``.
    singular_cond : float
        ``diagonalize`` raises :class:`SingularP` above this condition number.
    """

    cluster_rel: float = 1e-4
    rank_safety: float = 1e3
    singular_cond: float = 1e12

    def cluster_radius(self, norm):
        return self.cluster_rel * max(1.0, norm)

    def with_(self, **changes):
        values = {"cluster_rel": self.cluster_rel, "rank_safety": self.rank_safety,
                  "singular_cond": self.singular_cond}
        values.update(changes)
        return TolerancePolicy(**values)


DEFAULT_POLICY = TolerancePolicy()
# second-order moment matrices carry blocks up to size 5; their roundoff
# rings reach ~5e-4 of the matrix scale, while distinct clusters at the
# locus points used for verification sit at least ~7e-2 apart
FOM_POLICY = TolerancePolicy(cluster_rel=1e-2)
# the radius the public contract quotes; only suitable for diagonalizable input
STRICT_POLICY = TolerancePolicy(cluster_rel=1e-8)


@dataclass(frozen=True)
class JordanProfile:
    """Jordan data of one eigenvalue cluster."""

    eigenvalue: complex
    algebraic: int
    geometric: int
    blocks: tuple
    staircase: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if sum(self.blocks) != self.algebraic or len(self.blocks) != self.geometric:
            raise ValueError("inconsistent Jordan profile")

    @property
    def max_block(self):
        return max(self.blocks)


@dataclass(frozen=True)
class DiagonalizationResult:
    P: np.ndarray
    Lambda: np.ndarray
    P_inv: np.ndarray
    residual: float
    condition: float


def _as_matrix(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def eig(M):
    """Eigenvalues and unit-norm right eigenvectors (columns).

    Raises
    ------
    NonConvergence
        If LAPACK's QR iteration fails.
    """
    M = _as_matrix(M)
    try:
        w, v = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    return w, v


def eigvals(M):
    M = _as_matrix(M)
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def rank(M, tol_policy=DEFAULT_POLICY, *, scale=None):
    """Numerical rank from singular values.

    The default threshold is ``sigma_max * dim * u * rank_safety``; pass
    ``scale`` to replace ``sigma_max`` by an external reference size.
    """
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    ref = s[0] if scale is None else scale
    tol = ref * max(M.shape) * EPS * tol_policy.rank_safety
    return int(np.sum(s > tol))


def cluster_eigenvalues(values, radius):
    """Single-linkage grouping of a list of complex numbers.

    Returns a list of index arrays, ordered by the (real, imag) of the
    cluster means so that output is deterministic.
    """
    values = np.asarray(values, dtype=complex)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(values[:, None] - values[None, :])
    for i, j in zip(*np.nonzero(np.triu(dist <= radius, 1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = [np.array(g) for g in groups.values()]
    out.sort(key=lambda g: (round(values[g].mean().real, 9), round(values[g].mean().imag, 9)))
    return out


def _leading_block(M, select):
    """Schur-reorder ``M`` so the selected eigenvalues lead; return T11."""
    T, Z = scipy.linalg.schur(M, output="complex")
    sel = np.array([select(T[i, i]) for i in range(T.shape[0])], dtype=np.int32)
    m = int(sel.sum())
    if m == 0:
        raise IllConditioned("no eigenvalue selected for the Schur reordering")
    ts, _, _, mm, _, _, info = lapack.ztrsen(sel, T, Z, job="N")
    if info != 0:
        raise IllConditioned(f"Schur reordering failed (info={info})")
    return ts[:m, :m]


def _nullity_staircase(N, tol):
    """Nullities of the unitary staircase reduction of a nilpotent ``N``.

    Each step takes the SVD ``A = U S W^H``, counts singular values at or
    below ``tol`` (the new null directions), rotates ``A`` by ``W`` so
    those directions come last, and continues with the leading block.
    The k-th count equals ``dim ker N^k - dim ker N^(k-1)``, the number of
    Jordan blocks of size ``>= k``, without ever forming a matrix power.
    """
    counts = []
    A = N
    while A.shape[0]:
        _, sv, Wh = np.linalg.svd(A)
        null = int(np.sum(sv <= tol))
        if null == 0:
            return counts, False
        counts.append(null)
        W = Wh.conj().T
        r = A.shape[0] - null
        A = (W.conj().T @ A @ W)[:r, :r]
    return counts, True


def _profile_from_block(T11, center, norm, tol_policy):
    m = T11.shape[0]
    N = T11 - center * np.eye(m)
    tol = tol_policy.rank_safety * EPS * m * max(1.0, norm)
    d, nilpotent = _nullity_staircase(N, tol)
    kernel = tuple(np.concatenate([[0], np.cumsum(d)]).astype(int))
    if not nilpotent or np.any(np.diff(d) > 0):
        raise IllConditioned(
            f"non-monotone rank staircase {list(kernel)} at eigenvalue {center:.6g}",
            eigenvalue=center, staircase=kernel)
    counts = list(d) + [0]
    blocks = []
    for size in range(1, len(d) + 1):
        blocks += [size] * int(counts[size - 1] - counts[size])
    blocks.sort(reverse=True)
    return JordanProfile(eigenvalue=complex(center), algebraic=m, geometric=int(d[0]),
                         blocks=tuple(blocks), staircase=kernel)


def jordan_structure(M, lam, tol_policy=DEFAULT_POLICY):
    """Jordan profile of the eigenvalue cluster of ``M`` containing ``lam``.

    Parameters
    ----------
    M : array_like
        Square complex matrix.
    lam : complex
        Any point within the clustering radius of an eigenvalue of ``M``.
    tol_policy : TolerancePolicy

    Returns
    -------
    JordanProfile
        The representative eigenvalue is the cluster mean.
    """
    M = _as_matrix(M)
    norm = np.linalg.norm(M, 2)
    radius = tol_policy.cluster_radius(norm)
    w = eigvals(M)
    groups = cluster_eigenvalues(w, radius)
    hit = [g for g in groups if np.min(np.abs(w[g] - lam)) <= radius]
    if not hit:
        raise ValueError(f"{lam} is not within {radius:.3g} of any eigenvalue")
    group = min(hit, key=lambda g: np.min(np.abs(w[g] - lam)))
    return _profile_for_group(M, w, group, norm, tol_policy)


def _profile_for_group(M, w, group, norm, tol_policy):
    members = w[group]
    others = np.delete(w, group)
    center = members.mean()

    def select(z):
        # nearest-cluster rule, robust to the small drift of diagonal entries
        d_in = np.min(np.abs(members - z))
        d_out = np.min(np.abs(others - z)) if others.size else np.inf
        return d_in < d_out

    T11 = _leading_block(M, select)
    if T11.shape[0] != len(group):
        raise IllConditioned(
            f"Schur reordering selected {T11.shape[0]} of {len(group)} eigenvalues near {center:.6g}",
            eigenvalue=center)
    center = np.trace(T11) / T11.shape[0]
    return _profile_from_block(T11, center, norm, tol_policy)


def jordan_profiles(M, tol_policy=DEFAULT_POLICY):
    """Jordan profiles of every eigenvalue cluster of ``M``."""
    M = _as_matrix(M)
    norm = np.linalg.norm(M, 2)
    w = eigvals(M)
    groups = cluster_eigenvalues(w, tol_policy.cluster_radius(norm))
    return [_profile_for_group(M, w, g, norm, tol_policy) for g in groups]


def diagonalize(M, eigenvectors=None, tol_policy=DEFAULT_POLICY):
    """Similarity transform to diagonal form, ``P^-1 M P = Lambda``.

    Raises
    ------
    SingularP
        When ``cond(P)`` exceeds ``tol_policy.singular_cond``.
    """
    M = _as_matrix(M)
    if eigenvectors is None:
        _, P = eig(M)
    else:
        P = np.asarray(eigenvectors, dtype=complex)
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > tol_policy.singular_cond:
        raise SingularP(f"eigenvector matrix condition number {cond:.3e}")
    P_inv = np.linalg.inv(P)
    D = P_inv @ M @ P
    Lam = np.diag(np.diag(D))
    residual = np.linalg.norm(D - Lam) / max(np.linalg.norm(M), EPS)
    return DiagonalizationResult(P=P, Lambda=Lam, P_inv=P_inv, residual=float(residual),
                                 condition=float(cond))


def propagate(M, t):
    """``U(t) = exp(-i M t)`` by scaling and squaring (``scipy.linalg.expm``)."""
    M = _as_matrix(M)
    return scipy.linalg.expm(-1j * float(t) * M)


def match_spectra(a, b):
    """Optimal pairing of two eigenvalue multisets under ``|a_i - b_j|``.

    Returns
    -------
    pairing : ndarray of int
        ``b[pairing[i]]`` is matched to ``a[i]``.
    max_abs_error : float
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"cannot match {a.size} values with {b.size}")
    if a.size == 0:
        return np.zeros(0, dtype=int), 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairing = np.empty(a.size, dtype=int)
    pairing[rows] = cols
    return pairing, float(cost[rows, cols].max())


def block_multiset(profiles):
    """Counter of block sizes over a list of profiles."""
    c = Counter()
    for p in profiles:
        c.update(p.blocks)
    return c
