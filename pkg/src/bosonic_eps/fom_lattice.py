"""Second-order field-operator moments.

For first-order fields ``a`` obeying ``da/dt = -i M a`` the products
``a_i a_j`` obey ``d(a_i a_j)/dt = -i sum_k (M_ik a_k a_j + M_jk a_i a_k)``,
so their generator is the Kronecker sum ``M (x) I + I (x) M``.

* **induced** moments: all ordered pairs, dimension ``(2n)**2``.
* **genuine** moments: unordered pairs, i.e. the swap-symmetric subspace,
  dimension ``n (2n + 1)``.

Moments are indexed in the original ``(a, a^dagger)`` slot basis.  At a
degeneracy the diagonal basis does not exist, and the construction here
is similar to any basis one would use instead.

The reference tables are stored per first-order Jordan block ``B_j``
(value and size) and per moment family (a set of products ``B_j B_k``
with its listed genuine and induced block multisets).  Families whose
values agree symbolically are merged into one expected cluster.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analytic_spectra import derived_quantities
from .degeneracy_atlas import DegeneracyCluster, hp_locus
from .network_models import DynamicalMatrix, Topology, build_full_matrix, params_from_plane
from .numeric_engine import FOM_POLICY, jordan_profiles

T = Topology
VARIANTS = ("genuine", "induced")


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


@dataclass(frozen=True)
class MomentBasis:
    """Labels of the second-order moments over ``d = 2n`` first-order slots.

    Labels are 0-based slot pairs: ``(i, j)`` with ``i <= j`` for genuine
    moments, every ordered pair for induced ones.
    """

    variant: str
    slots: int
    labels: tuple

    @property
    def dimension(self):
        return len(self.labels)


def moment_basis(n_modes, variant):
    _check_variant(variant)
    d = 2 * int(n_modes)
    if variant == "genuine":
        labels = tuple((i, j) for i in range(d) for j in range(i, d))
    else:
        labels = tuple((i, j) for i in range(d) for j in range(d))
    return MomentBasis(variant=variant, slots=d, labels=labels)


def symmetric_isometry(d):
    """Orthonormal ``d**2 x d(d+1)/2`` basis of the swap-symmetric subspace.

    Column ``(i, j)`` is ``e_i (x) e_i`` for ``i == j`` and
    ``(e_i (x) e_j + e_j (x) e_i) / sqrt(2)`` otherwise, in the order of
    :func:`moment_basis`.
    """
    cols = []
    r = 1 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i, d):
            v = np.zeros(d * d)
            if i == j:
                v[i * d + i] = 1.0
            else:
                v[i * d + j] = v[j * d + i] = r
            cols.append(v)
    return np.array(cols).T


def fom2_matrix(M, variant):
    """Generator of the second-order moments.

    Parameters
    ----------
    M : DynamicalMatrix or array_like
        First-order dynamical matrix (``2n x 2n``).
    variant : {"genuine", "induced"}

    Returns
    -------
    ndarray
        ``M (x) I + I (x) M`` (induced) or its restriction ``S^T K S`` to
        the symmetric subspace (genuine).
    """
    _check_variant(variant)
    if isinstance(M, DynamicalMatrix):
        M = M.entries
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    eye = np.eye(d)
    K = np.kron(M, eye) + np.kron(eye, M)
    if variant == "induced":
        return K
    S = symmetric_isometry(d)
    return S.T @ K @ S


def fom2_classify(params, variant, tol_policy=FOM_POLICY):
    """Jordan clusters of the second-order generator at ``params``."""
    K = fom2_matrix(build_full_matrix(params), variant)
    return [DegeneracyCluster.from_profile(p) for p in jordan_profiles(K, tol_policy)]


# ---------------------------------------------------------------- fixtures

@dataclass(frozen=True)
class FirstOrderBlock:
    """A first-order Jordan block ``B_j``: value (symbolic) and size.

    ``value`` maps symbol names to rational coefficients; ``{}`` is zero.
    The common ``-i gamma_plus`` shift is implicit.
    """

    label: int
    value: tuple
    size: int


@dataclass(frozen=True)
class MomentFamily:
    """Products ``B_j B_k`` that the tables list in one row group."""

    members: tuple
    genuine: tuple
    induced: tuple

    def blocks(self, variant):
        return self.genuine if variant == "genuine" else self.induced


@dataclass(frozen=True)
class FixtureCluster:
    """Expected second-order cluster: imaginary shift ``-i * 2 * gamma_plus``
    plus the real combination ``symbol`` of first-order values."""

    symbol: str
    coefficients: tuple
    blocks: tuple
    families: tuple
    imag_gamma_plus: int = 2

    @property
    def dd(self):
        return len(self.blocks)

    @property
    def ed(self):
        return max(self.blocks)

    @property
    def algebraic(self):
        return sum(self.blocks)

    def value(self, symbols, gamma_plus):
        v = sum(float(c) * symbols[name] for name, c in self.coefficients)
        return complex(v) - 1j * self.imag_gamma_plus * gamma_plus


@dataclass(frozen=True)
class TableFixture:
    topology: Topology
    variant: str
    branch: str
    first_order: tuple
    families: tuple
    clusters: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "clusters", _merge_families(self.first_order, self.families, self.variant))
        dim = moment_basis(self.topology.n, self.variant).dimension
        total = sum(c.algebraic for c in self.clusters)
        if total != dim:
            raise ValueError(f"{self.topology.value} {self.variant} fixture covers {total} of {dim} moments")


def _add(a, b):
    out = defaultdict(Fraction)
    for k, v in a + b:
        out[k] += Fraction(v)
    return tuple(sorted((k, v) for k, v in out.items() if v != 0))


def _symbol(coeffs):
    if not coeffs:
        return "0"
    parts = []
    for name, c in coeffs:
        mag = abs(c)
        txt = name if mag == 1 else f"{mag}*{name}"
        parts.append(("-" if c < 0 else "+") + txt)
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


def _merge_families(first_order, families, variant):
    by_label = {b.label: b for b in first_order}
    groups = {}
    for fam in families:
        values = {_add(by_label[j].value, by_label[k].value) for j, k in fam.members}
        if len(values) != 1:
            raise ValueError(f"family {fam.members} mixes eigenvalues")
        key = values.pop()
        blocks, names = groups.get(key, ((), ()))
        groups[key] = (blocks + tuple(fam.blocks(variant)), names + (fam.members,))
    out = [FixtureCluster(symbol=_symbol(k), coefficients=k, blocks=tuple(sorted(b, reverse=True)),
                          families=names)
           for k, (b, names) in groups.items()]
    out.sort(key=lambda c: c.symbol)
    return tuple(out)


def _b(label, size, **value):
    return FirstOrderBlock(label, tuple(sorted((k, Fraction(v)) for k, v in value.items())), size)


def _fam(members, genuine, induced):
    return MomentFamily(tuple(members), tuple(genuine), tuple(induced))


def _rep(count, size):
    return (size,) * count


def _square_and_cross(pairs_sq, pairs_cross, sq=(3, 4), cross=(4, 4)):
    """Families of two-by-two-block tables: squares ``1x3/1x4`` and products ``1x4/2x4``."""
    fams = [_fam([p], (sq[0],), (sq[1],)) for p in pairs_sq]
    fams += [_fam([p], (cross[0],), _rep(2, cross[1])) for p in pairs_cross]
    return fams


def _table_two_mode():
    blocks = (_b(1, 2), _b(2, 2))
    return blocks, _square_and_cross([(1, 1), (2, 2)], [(1, 2)])


def _table_three_mode():
    blocks = (_b(1, 3), _b(2, 3))
    return blocks, [_fam([(1, 1)], (6,), (9,)), _fam([(2, 1)], (9,), (9, 9)), _fam([(2, 2)], (6,), (9,))]


def _table_l1():
    blocks = (_b(1, 2, alpha=1), _b(2, 2, alpha=1), _b(3, 2, alpha=-1), _b(4, 2, alpha=-1))
    return blocks, _square_and_cross([(1, 1), (2, 2), (3, 3), (4, 4)],
                                     [(1, 2), (3, 1), (4, 2), (3, 2), (4, 1), (3, 4)])


def _table_l2():
    blocks = (_b(1, 2), _b(2, 2), _b(3, 1, alpha_minus=1), _b(4, 1, alpha_minus=1),
              _b(5, 1, alpha_minus=-1), _b(6, 1, alpha_minus=-1))
    fams = _square_and_cross([(1, 1), (2, 2)], [(1, 2)])
    # products of a size-2 and a size-1 block; see the ledger for the genuine entry
    for p in ((1, 3), (1, 4), (2, 3), (2, 4), (1, 5), (1, 6), (2, 5), (2, 6)):
        fams.append(_fam([p], (2,), (2, 2)))
    fams.append(_fam([(3, 3), (4, 4), (3, 4)], _rep(3, 1), _rep(4, 1)))
    fams.append(_fam([(5, 5), (6, 6), (5, 6)], _rep(3, 1), _rep(4, 1)))
    fams.append(_fam([(5, 3), (6, 4), (5, 4), (3, 6)], _rep(4, 1), _rep(8, 1)))
    return blocks, fams


def _table_circular():
    blocks = (_b(1, 2, zeta=1), _b(2, 2, zeta=1), _b(3, 2, zeta=-1), _b(4, 2, zeta=-1))
    return blocks, _square_and_cross([(1, 1), (2, 2), (3, 3), (4, 4)],
                                     [(1, 2), (3, 1), (4, 2), (3, 2), (4, 1), (3, 4)])


def _table_five_linear():
    blocks = (_b(1, 2, alpha=1), _b(2, 2, alpha=1), _b(3, 2, alpha=-1), _b(4, 2, alpha=-1),
              _b(5, 1), _b(6, 1))
    fams = _square_and_cross([(1, 1), (2, 2), (3, 3), (4, 4)],
                             [(1, 2), (3, 1), (4, 2), (3, 2), (4, 1), (3, 4)])
    for j in (1, 2, 3, 4):
        for k in (5, 6):
            fams.append(_fam([(j, k)], (2,), (2, 2)))
    fams.append(_fam([(5, 5), (6, 6), (6, 5)], _rep(3, 1), _rep(4, 1)))
    return blocks, fams


def _table_pyramid():
    blocks = (_b(1, 2, zeta=-1), _b(2, 2, zeta=1),
              _b(3, 1, zeta=1, beta1=-1), _b(4, 1, zeta=-1, beta1=1),
              _b(5, 1, zeta=-1, beta1=-1), _b(6, 1, zeta=1, beta1=1),
              _b(7, 1), _b(8, 1))
    fams = [_fam([(1, 1)], (3,), (4,)), _fam([(2, 2)], (3,), (4,))]
    fams += [_fam([(j, j)], (1,), (1,)) for j in (3, 4, 5, 6)]
    fams.append(_fam([(7, 7), (8, 8), (8, 7)], _rep(3, 1), _rep(4, 1)))
    fams.append(_fam([(2, 1)], (4,), (4, 4)))
    for p in ((1, 3), (2, 3), (4, 1), (4, 2), (1, 5), (2, 5), (6, 1), (6, 2)):
        fams.append(_fam([p], (1, 1), _rep(4, 1)))
    fams.append(_fam([(7, 1), (8, 1)], (2, 2), _rep(4, 2)))
    fams.append(_fam([(7, 2), (8, 2)], (2, 2), _rep(4, 2)))
    for p in ((4, 3), (5, 3), (6, 3), (4, 5), (4, 6), (6, 5)):
        fams.append(_fam([p], (1,), (1, 1)))
    for members in (((7, 3), (8, 3)), ((4, 7), (4, 8)), ((7, 5), (8, 5)), ((6, 7), (6, 8))):
        fams.append(_fam(members, (1, 1), _rep(4, 1)))
    return blocks, fams


# topology -> (locus branch the table assumes, builder)
_TABLES = {
    T.TWO_MODE: ("beta", _table_two_mode),
    T.THREE_MODE_LINEAR: ("beta", _table_three_mode),
    T.FOUR_MODE_LINEAR_L1: ("mu", _table_l1),
    T.FOUR_MODE_LINEAR_L2: ("alpha_plus", _table_l2),
    T.FOUR_MODE_CIRCULAR: ("beta", _table_circular),
    T.FIVE_MODE_LINEAR: ("beta", _table_five_linear),
    T.FIVE_MODE_PYRAMID: ("beta2", _table_pyramid),
}


def table_fixture(topology, variant):
    """Reference second-order cluster structure for one topology.

    Raises
    ------
    ValueError
        If the transcription does not account for every moment.
    """
    topology = Topology.parse(topology)
    _check_variant(variant)
    branch, build = _TABLES[topology]
    blocks, fams = build()
    return TableFixture(topology=topology, variant=variant, branch=branch,
                        first_order=tuple(blocks), families=tuple(fams))


def _table_symbols(params):
    """Numeric values of the symbols used by the fixture of ``params.topology``."""
    dq = derived_quantities(params, params.zeta)
    t = params.topology
    if t in (T.FOUR_MODE_LINEAR_L1, T.FIVE_MODE_LINEAR):
        return {"alpha": dq.alpha_plus}
    if t is T.FOUR_MODE_LINEAR_L2:
        return {"alpha_minus": dq.alpha_minus}
    if t is T.FOUR_MODE_CIRCULAR:
        return {"zeta": params.zeta}
    if t is T.FIVE_MODE_PYRAMID:
        return {"zeta": params.zeta, "beta1": dq.beta1}
    return {}


# ---------------------------------------------------------------- verification

@dataclass
class TableComparison:
    gamma_plus: float
    symbol: str
    eigenvalue: complex
    expected: tuple
    observed: tuple | None

    @property
    def match(self):
        return self.observed is not None and tuple(self.observed) == tuple(self.expected)

    @property
    def algebraic_match(self):
        return self.observed is not None and sum(self.observed) == sum(self.expected)

    def as_dict(self):
        obs = None if self.observed is None else {"dd": len(self.observed), "blocks": list(self.observed)}
        return {"gamma_plus": self.gamma_plus, "symbol": self.symbol,
                "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
                "expected": {"dd": len(self.expected), "blocks": list(self.expected)},
                "observed": obs, "match": self.match, "algebraic_match": self.algebraic_match}


@dataclass
class TableReport:
    topology: Topology
    variant: str
    point: object
    entries: list
    unexpected: list

    @property
    def matched(self):
        return all(e.match for e in self.entries) and not self.unexpected

    @property
    def algebraic_matched(self):
        return all(e.algebraic_match for e in self.entries) and not self.unexpected

    def as_dict(self):
        return {"topology": self.topology.value, "variant": self.variant,
                "kappa_over_eps": self.point.kappa_over_eps,
                "gamma_minus_over_eps": self.point.gamma_minus_over_eps,
                "clusters": [e.as_dict() for e in self.entries],
                "unexpected": [c.as_dict() for c in self.unexpected],
                "match": self.matched, "algebraic_match": self.algebraic_matched}

    def to_json(self, **kw):
        return json.dumps(self.as_dict(), **kw)


def verification_point(topology, gamma_plus=0.0, theta=0.7):
    """A generic point on the locus branch assumed by the topology's table."""
    topology = Topology.parse(topology)
    branch = _TABLES[topology][0]
    ellipse = next(s for s in hp_locus(topology) if s.branch == branch)
    return ellipse.point(theta, gamma_plus)


def verify_table(topology, variant, tol_policy=FOM_POLICY, *, gamma_plus_values=(0.0, 0.3), theta=0.7,
                 epsilon=1.0):
    """Compare second-order clusters with the reference fixture.

    For each ``gamma_plus`` the fixture clusters are evaluated at a generic
    locus point and paired with the nearest observed cluster (within the
    clustering radius).  Observed clusters left unpaired are listed under
    ``unexpected``.

    Returns
    -------
    list of TableReport
        One per ``gamma_plus`` value.
    """
    topology = Topology.parse(topology)
    fixture = table_fixture(topology, variant)
    reports = []
    for gp in gamma_plus_values:
        point = verification_point(topology, gp, theta)
        params = params_from_plane(topology, epsilon, point)
        K = fom2_matrix(build_full_matrix(params), variant)
        radius = tol_policy.cluster_radius(np.linalg.norm(K, 2))
        observed = [DegeneracyCluster.from_profile(p) for p in jordan_profiles(K, tol_policy)]
        symbols = _table_symbols(params)
        used = set()
        entries = []
        for c in fixture.clusters:
            value = c.value(symbols, gp * epsilon)
            dist = [abs(o.eigenvalue - value) for o in observed]
            k = int(np.argmin(dist))
            hit = observed[k] if dist[k] <= radius and k not in used else None
            if hit is not None:
                used.add(k)
            entries.append(TableComparison(gamma_plus=gp, symbol=c.symbol, eigenvalue=value,
                                           expected=c.blocks, observed=None if hit is None else hit.blocks))
        extra = [o for i, o in enumerate(observed) if i not in used]
        reports.append(TableReport(topology, variant, point, entries, extra))
    return reports
