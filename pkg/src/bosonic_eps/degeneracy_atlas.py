"""Classification of spectral points and the degeneracy loci of each network.

A cluster of coinciding eigenvalues is

* ``REGULAR`` if it is simple,
* a diabolical point (``DP``) if every Jordan block has size one,
* an exceptional point (``EP``) if it has a single Jordan chain of length >= 2,
* a hybrid point (``HP``) if it has several chains and at least one is
  longer than one.

The exceptional degeneracy (ED) of a cluster is its largest block and the
diabolical degeneracy (DD) its number of blocks.

Every locus is an ellipse ``(kappa/eps)**2 + (gamma_minus/eps)**2 / c = 1``
on which one branch quantity vanishes.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic_spectra import branch_quantities, reduced_eigenvalues
from .core_blocks import principal_sqrt
from .network_models import (PlanePoint, Topology, adjacency, build_full_matrix, params_from_plane,
                             rates_from_plane)
from .numeric_engine import DEFAULT_POLICY, jordan_profiles

T = Topology


class PointClass(enum.Enum):
    REGULAR = "regular"
    DP = "DP"
    EP = "EP"
    HP = "HP"


def classify_blocks(blocks):
    blocks = tuple(blocks)
    if sum(blocks) == 1:
        return PointClass.REGULAR
    if max(blocks) == 1:
        return PointClass.DP
    if len(blocks) == 1:
        return PointClass.EP
    return PointClass.HP


@dataclass(frozen=True)
class DegeneracyCluster:
    eigenvalue: complex
    algebraic: int
    geometric: int
    blocks: tuple
    classification: PointClass

    @property
    def ed(self):
        return max(self.blocks)

    @property
    def dd(self):
        return self.geometric

    @property
    def defective(self):
        return self.ed > 1

    @classmethod
    def from_profile(cls, profile):
        return cls(eigenvalue=profile.eigenvalue, algebraic=profile.algebraic,
                   geometric=profile.geometric, blocks=tuple(profile.blocks),
                   classification=classify_blocks(profile.blocks))

    def as_dict(self):
        return {"eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag], "alg": self.algebraic,
                "geo": self.geometric, "blocks": list(self.blocks),
                "class": self.classification.value, "ED": self.ed, "DD": self.dd}


@dataclass(frozen=True)
class ExpectedCluster:
    algebraic: int
    ed: int
    dd: int
    blocks: tuple


@dataclass(frozen=True)
class LocusSpec:
    """An ellipse ``k**2 + g**2 / c = 1`` and what to expect on it.

    ``expected`` lists the defective clusters of the full matrix at a
    generic point of the ellipse (points with ``kappa = +-eps`` or
    ``gamma_minus = 0`` are excluded), as found by the numeric oracle.
    ``listed`` is False for loci that the closed-form eigenvalue
    conditions of the model imply but which are not among the branch
    quantities' own zero sets (see ``hp_locus``).
    """

    topology: Topology
    c: float
    branch: str
    expected: tuple
    listed: bool = True

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("ellipse coefficient must be positive")

    def point(self, theta, gamma_plus=0.0):
        return PlanePoint(float(np.cos(theta)), float(np.sqrt(self.c) * np.sin(theta)), gamma_plus)

    def sample(self, count=32, gamma_plus=0.0):
        """``count`` points at angles ``pi * (2k + 1) / count``, clear of the corners."""
        thetas = np.pi * (2 * np.arange(count) + 1) / count
        return [self.point(t, gamma_plus) for t in thetas]

    def distance(self, kappa_over_eps, gamma_minus_over_eps, samples=8192):
        """Euclidean distance in the plane from points to this ellipse (dense sampling)."""
        k = np.atleast_1d(np.asarray(kappa_over_eps, dtype=float))
        g = np.atleast_1d(np.asarray(gamma_minus_over_eps, dtype=float))
        th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
        ek, eg = np.cos(th), np.sqrt(self.c) * np.sin(th)
        out = np.empty(k.shape)
        for i in range(0, k.size, 1024):
            sl = slice(i, i + 1024)
            out[sl] = np.hypot(k[sl, None] - ek, g[sl, None] - eg).min(axis=-1)
        return out


def _cluster(alg, blocks):
    blocks = tuple(blocks)
    return ExpectedCluster(algebraic=alg, ed=max(blocks), dd=len(blocks), blocks=blocks)


_HP22 = _cluster(4, (2, 2))
_EP2 = _cluster(2, (2,))
_GOLDEN_PLUS = (3 + np.sqrt(5)) / 2
_GOLDEN_MINUS = (3 - np.sqrt(5)) / 2

_LOCI = {
    T.TWO_MODE: [("beta", 1.0, (_HP22,))],
    T.THREE_MODE_LINEAR: [("beta", 2.0, (_cluster(6, (3, 3)),))],
    T.FOUR_MODE_LINEAR_L1: [("mu", 5 / 16, (_HP22, _HP22))],
    T.FOUR_MODE_LINEAR_L2: [("alpha_plus", _GOLDEN_PLUS, (_HP22,)),
                            ("alpha_minus", _GOLDEN_MINUS, (_HP22,))],
    T.FOUR_MODE_CIRCULAR: [("beta", 1.0, (_HP22, _HP22))],
    T.FIVE_MODE_LINEAR: [("beta", 0.25, (_HP22, _HP22))],
    # on beta1 = 0 also beta2 = 2 xi, so xi - beta2 joins the double root -xi
    T.FIVE_MODE_PYRAMID: [("beta1", 1.0, (_cluster(3, (2, 1)), _cluster(3, (2, 1)))),
                          ("beta2", 5.0, (_EP2, _EP2)),
                          # beta2 = +-xi puts +-(xi - beta2) on top of lambda_1 = 0
                          ("beta2_xi", 4.0, (_HP22,), False)],
}


def hp_locus(topology, include_unlisted=False):
    """Degeneracy ellipses of a topology, one per vanishing branch quantity.

    The pyramid has a third ellipse ``c = 4`` where ``beta2 = +-xi`` and
    the zero eigenvalue meets ``+-(xi - beta2)``; it is returned only with
    ``include_unlisted=True``.
    """
    topology = Topology.parse(topology)
    out = []
    for branch, c, expected, *rest in _LOCI[topology]:
        listed = rest[0] if rest else True
        if listed or include_unlisted:
            out.append(LocusSpec(topology, c, branch, expected, listed))
    return out


def locus_residual(topology, point):
    """Branch quantities at ``xi = zeta`` for a plane point (``eps = 1``)."""
    zeta = principal_sqrt(1.0 - point.kappa_over_eps ** 2)
    return {k: complex(v) for k, v in branch_quantities(topology, zeta, point.gamma_minus_over_eps).items()}


def on_locus(topology, point, tol=1e-12):
    """Branch labels whose locus contains ``point``.

    The test is ``|q**2| <= tol`` on the squared branch quantity, which is
    polynomial in the inputs; ``|q|`` itself carries the square root of
    the rounding error.
    """
    return [k for k, v in locus_residual(topology, point).items() if abs(v * v) <= tol]


def classify_point(params, tol_policy=DEFAULT_POLICY):
    """Cluster the full-matrix spectrum and attach Jordan data to each cluster.

    Raises
    ------
    IllConditioned
        When a cluster's rank staircase is inconsistent.
    """
    M = build_full_matrix(params).entries
    return [DegeneracyCluster.from_profile(p) for p in jordan_profiles(M, tol_policy)]


def defective_clusters(clusters):
    return [c for c in clusters if c.defective]


def locus_agreement(ellipse, clusters):
    """Does a classification match ``ellipse.expected`` (order-free)?"""
    got = sorted((c.algebraic, c.ed, c.dd, c.blocks) for c in defective_clusters(clusters))
    want = sorted((e.algebraic, e.ed, e.dd, e.blocks) for e in ellipse.expected)
    return got == want


# ---------------------------------------------------------------- plane scan

@dataclass(frozen=True)
class ScanGrid:
    kappa: tuple = (0.0, 1.5, 301)
    gamma_minus: tuple = (-1.5, 1.5, 301)
    gamma_plus: float = 0.0

    def __post_init__(self):
        for lo, hi, n in (self.kappa, self.gamma_minus):
            if int(n) < 2 or not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError("grid axes need finite bounds and at least two points")

    @property
    def kappa_values(self):
        lo, hi, n = self.kappa
        return np.linspace(lo, hi, int(n))

    @property
    def gamma_minus_values(self):
        lo, hi, n = self.gamma_minus
        return np.linspace(lo, hi, int(n))

    @property
    def step(self):
        """Largest grid spacing along either axis."""
        return max(np.diff(self.kappa_values).max(), np.diff(self.gamma_minus_values).max())


@dataclass
class ScanTable:
    """Row-major scan output with named columns."""

    columns: list
    data: np.ndarray
    meta: dict

    def column(self, name):
        return self.data[:, self.columns.index(name)]

    @property
    def flagged(self):
        return self.column("degenerate_flag").astype(bool)


def _scan_branches(topology):
    return (1.0, -1.0) if topology is T.FIVE_MODE_PYRAMID else (1.0,)


def _reduced_stack(topology, xi, gp, gm):
    """Reduced matrices for arrays of ``xi``/``gamma_minus`` at fixed ``gamma_plus``."""
    A = adjacency(topology).astype(complex)
    n = topology.n
    # rates are affine in gamma_minus: gamma_j = base_j + gamma_minus * slope_j
    base = np.array(rates_from_plane(topology, gp, 0.0))
    slope = np.array(rates_from_plane(topology, gp, 1.0)) - base
    diag = -0.5j * (base[None, :] + gm[:, None] * slope[None, :])
    M = xi[:, None, None] * A[None, :, :]
    M[:, np.arange(n), np.arange(n)] += diag
    return M


# an exact double eigenvalue of a diagonalizable matrix is resolved to
# roundoff, and LAPACK then returns an arbitrary (often nearly parallel)
# basis of the eigenspace; pairs this close are settled by a rank test
_EXACT_GAP = 1e-11


def _ep_signature(mats, threshold, overlap):
    """Flag matrices with two eigenvalues closer than ``threshold`` whose
    eigenvectors are nearly parallel (the signature of an exceptional point;
    diabolical crossings have orthogonal eigenvectors and are not flagged).

    Matrices with a pair closer than ``1e-11`` times their spectral scale
    get an explicit Jordan analysis instead of the overlap test.
    """
    w, v = np.linalg.eig(mats)
    n = w.shape[-1]
    gaps = np.abs(w[:, :, None] - w[:, None, :])
    gaps[:, np.arange(n), np.arange(n)] = np.inf
    scale = np.maximum(1.0, np.abs(w).max(axis=-1))
    exact = gaps.min(axis=(1, 2)) <= _EXACT_GAP * scale
    close = (gaps < threshold) & (gaps > _EXACT_GAP * scale[:, None, None])
    ov = np.abs(np.einsum("bki,bkj->bij", v.conj(), v))
    flags = np.any(close & (ov > overlap), axis=(1, 2))
    for b in np.nonzero(exact)[0]:
        flags[b] = any(p.max_block > 1 for p in jordan_profiles(mats[b], DEFAULT_POLICY))
    return flags, gaps.min(axis=(1, 2))


def _scan_rows(topology, epsilon, kappas, gms, gp, flag_threshold, adaptive_threshold, overlap):
    K, G = np.meshgrid(kappas, gms, indexing="ij")
    K, G = K.ravel(), G.ravel()
    zeta = principal_sqrt(1.0 - K ** 2)  # in units of eps
    cols = [K, G]
    flags = np.zeros(K.shape, dtype=bool)
    for sign in _scan_branches(topology):
        lam = reduced_eigenvalues(topology, sign * zeta, gp, G) * epsilon
        cols += list(lam.real.T) + list(lam.imag.T)
        mats = _reduced_stack(topology, sign * zeta * epsilon, gp * epsilon, G * epsilon)
        if flag_threshold is None:
            f, _ = _ep_signature(mats, adaptive_threshold * epsilon, overlap)
        else:
            w = np.linalg.eigvals(mats)
            gaps = np.abs(w[:, :, None] - w[:, None, :])
            gaps[:, np.arange(topology.n), np.arange(topology.n)] = np.inf
            f = gaps.min(axis=(1, 2)) < flag_threshold * max(1.0, epsilon)
        flags |= f
    for v in branch_quantities(topology, zeta, G).values():
        cols.append(np.abs(v))
    cols.append(flags.astype(float))
    return np.column_stack(cols)


def scan_columns(topology):
    topology = Topology.parse(topology)
    n = topology.n
    cols = ["kappa_over_eps", "gamma_minus_over_eps"]
    for b, _ in enumerate(_scan_branches(topology)):
        idx = range(b * n + 1, (b + 1) * n + 1)
        cols += [f"re_lambda_{i}" for i in idx] + [f"im_lambda_{i}" for i in idx]
    cols += [f"residual_{entry[0]}" for entry in _LOCI[topology]]
    return cols + ["degenerate_flag"]


def scan_plane(topology, epsilon=1.0, grid=None, tol_policy=DEFAULT_POLICY, *, flag_threshold=None,
               overlap=0.5, workers=1, chunk=64):
    """Evaluate reduced spectra, branch residuals and a degeneracy flag on a grid.

    Parameters
    ----------
    topology : Topology or str
    epsilon : float
    grid : ScanGrid, optional
        Defaults to ``kappa/eps in [0, 1.5]``, ``gamma_minus/eps in [-1.5, 1.5]``, 301 x 301.
    tol_policy : TolerancePolicy
        Recorded in the metadata; the flag uses its own thresholds.
    flag_threshold : float, optional
        Absolute eigenvalue-gap threshold (times ``max(1, eps)``).  When
        omitted, a point is flagged if two eigenvalues of one reduced matrix
        are closer than ``1.2 * eps * sqrt(h)`` (``h`` the grid step) and
        their eigenvectors overlap by more than ``overlap``.  An eigenvalue
        gap near an exceptional point grows like the square root of the
        distance, so this band keeps about a fifth of a grid step on either
        side of each ellipse.
    workers : int
        Threads used for row chunks; output order does not depend on it.

    Returns
    -------
    ScanTable
        Rows ordered by kappa then gamma_minus.  Eigenvalue columns hold the
        closed-form reduced spectrum at ``xi = +zeta`` (for the pyramid
        also ``-zeta``, numbered ``n+1 .. 2n``).
    """
    topology = Topology.parse(topology)
    grid = grid or ScanGrid()
    kappas, gms = grid.kappa_values, grid.gamma_minus_values
    adaptive = 1.2 * np.sqrt(grid.step)
    chunks = [kappas[i:i + chunk] for i in range(0, len(kappas), chunk)]

    def run(ks):
        return _scan_rows(topology, float(epsilon), ks, gms, grid.gamma_plus, flag_threshold, adaptive, overlap)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(ks) for ks in chunks]
    meta = {"topology": topology.value, "epsilon": float(epsilon), "kappa": list(grid.kappa),
            "gamma_minus": list(grid.gamma_minus), "gamma_plus": grid.gamma_plus,
            "flag": "gap" if flag_threshold is not None else "ep_signature",
            "flag_threshold": flag_threshold if flag_threshold is not None else float(adaptive),
            "cluster_rel": tol_policy.cluster_rel}
    return ScanTable(columns=scan_columns(topology), data=np.vstack(parts), meta=meta)


def classify_plane_point(topology, point, epsilon=1.0, tol_policy=DEFAULT_POLICY):
    return classify_point(params_from_plane(topology, epsilon, point), tol_policy)
