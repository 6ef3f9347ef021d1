"""Hypothesis-driven invariants across modules."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bosonic_eps import PlanePoint, Topology, params_from_plane
from bosonic_eps.analytic_spectra import assemble_full_spectrum, reduced_spectrum
from bosonic_eps.core_blocks import CouplingBlock, principal_sqrt, xi_eigensystem, xi_matrix
from bosonic_eps.network_models import build_full_matrix, build_reduced_matrix, validate_rates
from bosonic_eps.numeric_engine import eigvals, match_spectra, propagate

SETTINGS = settings(max_examples=60, deadline=None)
coord = st.floats(-1.5, 1.5, allow_nan=False)
topologies = st.sampled_from(list(Topology))
plane = st.builds(PlanePoint, coord, coord, st.floats(-1.0, 1.0, allow_nan=False))
epsilons = st.floats(0.05, 20.0, allow_nan=False)


def regular(point):
    return abs(1 - point.kappa_over_eps ** 2) > 1e-6


@SETTINGS
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_principal_sqrt_squares_back(z):
    r = complex(principal_sqrt(z))
    assert r.real >= 0
    assert abs(r * r - z) <= 4e-16 * max(1.0, abs(z))


@SETTINGS
@given(epsilons, st.floats(-3, 3, allow_nan=False))
def test_xi_eigensystem_residual(eps, ratio):
    b = CouplingBlock(eps, eps * ratio)
    xs = xi_eigensystem(b)
    m = xi_matrix(b)
    for lam, y in xs.pairs:
        assert np.linalg.norm(m @ y - lam * y) <= 1e-12 * max(eps, abs(eps * ratio))


@SETTINGS
@given(topologies, epsilons, plane)
def test_plane_round_trip(topology, eps, point):
    gp, gm = validate_rates(params_from_plane(topology, eps, point))
    assert np.isclose(gp, eps * point.gamma_plus_over_eps, rtol=1e-12, atol=1e-14 * eps)
    assert np.isclose(gm, eps * point.gamma_minus_over_eps, rtol=1e-12, atol=1e-14 * eps)


@SETTINGS
@given(topologies, epsilons, plane)
def test_trace_identity(topology, eps, point):
    assume(regular(point))
    p = params_from_plane(topology, eps, point)
    total = sum(e.value for e in assemble_full_spectrum(p))
    assert abs(total + 1j * sum(p.gammas)) <= 1e-10 * max(1.0, eps)


@SETTINGS
@given(topologies, plane)
def test_full_spectrum_is_union_of_reduced(topology, point):
    p = params_from_plane(topology, 1.0, point)
    full = eigvals(build_full_matrix(p).entries)
    red = np.concatenate([eigvals(build_reduced_matrix(p, x)) for x in (-p.zeta, p.zeta)])
    # eigenvalues near an exceptional point are only accurate to sqrt(u)
    assert match_spectra(full, red)[1] < 1e-6


@SETTINGS
@given(topologies, plane, st.floats(-1, 1, allow_nan=False))
def test_gamma_plus_shift(topology, point, shift):
    assume(regular(point))
    moved = PlanePoint(point.kappa_over_eps, point.gamma_minus_over_eps, point.gamma_plus_over_eps + shift)
    a = assemble_full_spectrum(params_from_plane(topology, 1.0, point))
    b = assemble_full_spectrum(params_from_plane(topology, 1.0, moved))
    for x, y in zip(a, b):
        assert abs((y.value - x.value) + 1j * shift) < 1e-12
        # a coalesced eigenvalue has no unique eigenvector to compare
        if not x.defective:
            assert abs(abs(np.vdot(x.vector, y.vector)) - 1) < 1e-10


@SETTINGS
@given(st.sampled_from([t for t in Topology if t is not Topology.FIVE_MODE_PYRAMID]), plane)
def test_xi_parity(topology, point):
    assume(regular(point))
    p = params_from_plane(topology, 1.0, point)
    a = [e.value for e in reduced_spectrum(p, p.zeta)]
    b = [e.value for e in reduced_spectrum(p, -p.zeta)]
    assert match_spectra(a, b)[1] < 1e-9


@SETTINGS
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1,
                max_size=8), st.randoms(use_true_random=False))
def test_match_spectra_permutation(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    pairing, err = match_spectra(values, shuffled)
    assert err == 0
    assert np.array_equal(np.asarray(shuffled)[pairing], np.asarray(values, dtype=complex))


@settings(max_examples=30, deadline=None)
@given(topologies, plane, st.floats(0, 10, allow_nan=False), st.floats(0, 10, allow_nan=False))
def test_propagator_semigroup_forward(topology, point, s, t):
    M = build_full_matrix(params_from_plane(topology, 1.0, point)).entries
    U = propagate(M, s + t)
    assert np.linalg.norm(propagate(M, s) @ propagate(M, t) - U) <= 1e-8 * np.linalg.norm(U)


@settings(max_examples=30, deadline=None)
@given(topologies, plane, st.floats(-10, 10, allow_nan=False), st.floats(-10, 10, allow_nan=False))
def test_propagator_group_law_to_roundoff(topology, point, s, t):
    # with opposite signs the factors can be far larger than their product,
    # and rounding their entries alone costs u * |U(s)| * |U(t)|
    M = build_full_matrix(params_from_plane(topology, 1.0, point)).entries
    Us, Ut = propagate(M, s), propagate(M, t)
    err = np.linalg.norm(Us @ Ut - propagate(M, s + t))
    assert err <= 1e-8 * np.linalg.norm(Us) * np.linalg.norm(Ut)
