import itertools

import numpy as np
import pytest

from conftest import HESSE_FIDUCIAL, QUBIT_FIDUCIAL
from sicqb.errors import DimensionMismatchError, NormalizationError
from sicqb.hilbert import eigh, normalize, random_pure_vector
from sicqb.sic import (
    SearchConfig,
    SicPovm,
    SicVerificationError,
    WrongCountError,
    as_complex,
    as_real,
    effects,
    frame_potential,
    frame_potential_and_gradient,
    gram_matrix,
    search_fiducial,
    verify_sic,
)
from sicqb.weyl_heisenberg import WhGroup, orbit


def all_pair_overlaps(vectors):
    """|<psi_i|psi_j>|^2 for i < j by explicit double loop."""
    return [abs(np.vdot(vectors[i], vectors[j])) ** 2
            for i, j in itertools.combinations(range(len(vectors)), 2)]


# verification ---------------------------------------------------------------

def test_qubit_tetrahedron():
    vecs = orbit(WhGroup(2), QUBIT_FIDUCIAL)
    overlaps = all_pair_overlaps(vecs)
    assert len(overlaps) == 6
    np.testing.assert_allclose(overlaps, 1 / 3, atol=1e-15)
    assert verify_sic(vecs).residual < 1e-12


def test_hesse_fiducial():
    vecs = orbit(WhGroup(3), HESSE_FIDUCIAL)
    overlaps = all_pair_overlaps(vecs)
    assert len(overlaps) == 36
    np.testing.assert_allclose(overlaps, 1 / 4, atol=1e-15)
    assert verify_sic(vecs).residual < 1e-12


def test_orthonormal_copies_fail_with_pair():
    vecs = [[1, 0], [0, 1], [1, 0], [0, 1]]
    with pytest.raises(SicVerificationError) as info:
        verify_sic(vecs)
    i, j = info.value.pair
    assert abs(np.vdot(vecs[i], vecs[j])) ** 2 == 1
    assert info.value.deviation == pytest.approx(2 / 3)


def test_distinct_input_errors():
    with pytest.raises(WrongCountError):
        verify_sic(orbit(WhGroup(2), QUBIT_FIDUCIAL)[:3])
    with pytest.raises(DimensionMismatchError):
        verify_sic([[1, 0], [0, 1], [1, 0], [1, 0, 0]])
    with pytest.raises(NormalizationError):
        verify_sic(2 * orbit(WhGroup(2), QUBIT_FIDUCIAL))


@pytest.mark.parametrize("d", range(2, 9))
def test_golden_sics_satisfy_identities(golden_sics, d):
    s = golden_sics[d]
    assert s.residual <= 1e-10
    assert np.max(np.abs(s.projectors.sum(axis=0) - d * np.eye(d))) <= 1e-10
    assert s.gram_min_singular_value > 1e-8


# effects and Gram matrix ----------------------------------------------------------

@pytest.mark.parametrize("d", range(2, 9))
def test_effects_form_a_povm(golden_sics, d):
    h = effects(golden_sics[d]).effects
    assert np.max(np.abs(h.sum(axis=0) - np.eye(d))) <= 1e-10
    np.testing.assert_allclose(np.trace(h, axis1=1, axis2=2), 1 / d, atol=1e-14)
    for op in h:
        assert eigh(op)[0][-1] >= -1e-12


def test_qubit_effects_are_rank_one(qubit_sic):
    for op in effects(qubit_sic).effects:
        assert abs(eigh(op)[0][-1]) <= 1e-12


def test_qubit_gram_entries(qubit_sic):
    g = gram_matrix(qubit_sic)
    np.testing.assert_allclose(np.diag(g), 1, atol=1e-15)
    np.testing.assert_allclose(g[~np.eye(4, dtype=bool)], 1 / 3, atol=1e-12)


@pytest.mark.parametrize("d", range(2, 9))
def test_gram_spectrum(golden_sics, d):
    # G = (1 - c) I + c J with c = 1/(d+1): eigenvalue d once, d/(d+1) otherwise
    w = eigh(gram_matrix(golden_sics[d]))[0]
    assert w[0] == pytest.approx(d, abs=1e-9)
    np.testing.assert_allclose(w[1:], d / (d + 1), atol=1e-9)
    assert w[-1] > 1e-8


# frame potential --------------------------------------------------------------

def test_frame_potential_examples():
    assert frame_potential(WhGroup(2), QUBIT_FIDUCIAL) < 1e-24
    # overlaps with X, Z, XZ are 0, 1, 0
    assert frame_potential(WhGroup(2), [1, 0]) == pytest.approx(2 / 3, abs=1e-15)


@pytest.mark.parametrize("d", range(2, 9))
def test_frame_potential_nonnegative_and_scale_invariant(d):
    g = WhGroup(d)
    v = random_pure_vector(d, seed=d)
    f = frame_potential(g, v)
    assert f >= 0
    assert frame_potential(g, 3.7j * v) == pytest.approx(f, rel=1e-12)


def central_difference(g, x, h=1e-6):
    r = as_real(x)
    out = np.empty_like(r)
    for k in range(r.size):
        e = np.zeros_like(r)
        e[k] = h
        out[k] = (frame_potential(g, as_complex(r + e)) - frame_potential(g, as_complex(r - e))) / (2 * h)
    return out


@pytest.mark.parametrize("d", [2, 3, 4, 5, 8])
def test_gradient_matches_finite_differences(d):
    g = WhGroup(d)
    rng = np.random.default_rng(d)
    for _ in range(10):
        x = rng.normal(size=d) + 1j * rng.normal(size=d)
        _, grad = frame_potential_and_gradient(g, x)
        fd = central_difference(g, x)
        assert np.linalg.norm(as_real(grad) - fd) <= 1e-5 * np.linalg.norm(fd)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("eps", [1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2])
def test_frame_potential_consistent_with_verification(golden_sics, d, eps):
    g = WhGroup(d)
    tol = 1e-9
    rng = np.random.default_rng(int(1e3 * d + eps * 1e12) % 2**32)
    fid = golden_sics[d].vectors[0]
    x = normalize(fid + eps * (rng.normal(size=d) + 1j * rng.normal(size=d)))
    f = frame_potential(g, x)
    try:
        verify_sic(orbit(g, x), tol)
        passed = True
    except SicVerificationError:
        passed = False
    if passed:
        assert f <= d**4 * tol**2
    if f > d**4 * tol**2:
        assert not passed
    if not passed:
        assert f > tol**2


# search -------------------------------------------------------------------------

def test_search_qubit_verifies():
    rep = search_fiducial(2, SearchConfig(max_restarts=50, seed=1))
    assert rep.converged and rep.objective <= 1e-16
    assert verify_sic(orbit(WhGroup(2), rep.fiducial), 1e-10).residual <= 1e-10


def test_search_zero_budget():
    rep = search_fiducial(3, SearchConfig(max_restarts=0))
    assert not rep.converged
    assert rep.restarts_used == 0


def test_search_unconverged_reports_best_restart():
    rep = search_fiducial(5, SearchConfig(max_restarts=2, max_iters=3, seed=4))
    assert not rep.converged
    assert rep.restarts_used == 2
    assert rep.objective == pytest.approx(frame_potential(WhGroup(5), rep.fiducial), rel=1e-12)
    assert rep.objective > 1e-16


def test_search_deterministic():
    a = search_fiducial(4, SearchConfig(seed=99))
    b = search_fiducial(4, SearchConfig(seed=99))
    assert a.fiducial.tobytes() == b.fiducial.tobytes()
    assert (a.objective, a.iterations, a.restarts_used) == (b.objective, b.iterations, b.restarts_used)


def test_search_rejects_small_dimension():
    with pytest.raises(ValueError):
        search_fiducial(1)


def test_sic_from_fiducial_roundtrip():
    s = SicPovm.from_fiducial(HESSE_FIDUCIAL)
    assert s.dim == 3 and s.vectors.shape == (9, 3)
