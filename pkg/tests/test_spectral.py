import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from lowtrotter.pauli_model import heisenberg_chain, shift_groups_psd, tfim_chain
from lowtrotter.spectral import (NotHermitian, eigendecompose, evolve, leakage_norm,
                                 projector_gt, projector_leq, restricted_norm, spectral_norm)


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def test_diagonal():
    c = eigendecompose(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(c.eigenvalues, [1, 2])
    np.testing.assert_allclose(np.abs(c.eigenvectors), np.eye(2))


def test_pauli_x():
    c = eigendecompose(np.array([[0, 1], [1, 0]], dtype=float))
    np.testing.assert_allclose(c.eigenvalues, [-1, 1])


def test_tfim2_against_quartic_roots():
    m = tfim_chain(2).matrix
    roots = np.sort(np.roots(np.poly(m)).real)
    np.testing.assert_allclose(eigendecompose(m).eigenvalues, roots, atol=1e-9)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eigendecompose(np.array([[0, 1], [0, 0]], dtype=float))
    with pytest.raises(ValueError):
        eigendecompose(np.ones((2, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31))
def test_cache_invariants(n, seed):
    A = random_hermitian(1 << n, np.random.default_rng(seed))
    c = eigendecompose(A)
    v = c.eigenvectors
    assert np.all(np.diff(c.eigenvalues) >= 0)
    assert spectral_norm(c.reconstruct() - A) <= 1e-10 * max(1, spectral_norm(A))
    assert spectral_norm(v.conj().T @ v - np.eye(len(A))) <= 1e-10
    assert not c.eigenvalues.flags.writeable


def test_projector_edges():
    c = eigendecompose(np.diag([0.0, 1.0]))
    np.testing.assert_array_equal(projector_leq(c, -1), np.zeros((2, 2)))
    np.testing.assert_allclose(projector_leq(c, 5), np.eye(2))
    np.testing.assert_allclose(np.abs(projector_leq(c, 0.5)), np.diag([1, 0]))


def test_cutoff_tie_is_included():
    c = eigendecompose(np.diag([0.0, 1.0, 2.0]))
    assert c.n_below(1.0) == 2
    assert c.n_below(1.0 - 5e-13) == 2
    assert c.n_below(1.0 - 1e-9) == 1


def test_projector_algebra():
    rng = np.random.default_rng(7)
    c = eigendecompose(random_hermitian(32, rng))
    for lo, hi in [(-2, 0.5), (0, 0), (-1, 3)]:
        P, Q = projector_leq(c, lo), projector_leq(c, hi)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P, P.conj().T, atol=1e-12)
        np.testing.assert_allclose(P @ Q, P, atol=1e-12)
        np.testing.assert_allclose(projector_gt(c, hi) @ P, 0, atol=1e-12)


def test_evolve_examples():
    z = eigendecompose(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(evolve(z, 0), np.eye(2))
    np.testing.assert_allclose(evolve(z, np.pi / 2), np.diag([np.exp(-0.5j * np.pi),
                                                              np.exp(0.5j * np.pi)]), atol=1e-15)
    x = eigendecompose(np.array([[0, 1], [1, 0]], dtype=float))
    np.testing.assert_allclose(evolve(x, np.pi), -np.eye(2), atol=1e-12)


@pytest.mark.parametrize("s", [0.0, 0.3, -1.7, 5.0])
def test_evolve_against_expm(s):
    H = heisenberg_chain(4).matrix
    c = eigendecompose(H)
    U = evolve(c, s)
    np.testing.assert_allclose(U, scipy.linalg.expm(-1j * s * H), atol=1e-10)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(16), atol=1e-10)
    np.testing.assert_allclose(U @ evolve(c, -s), np.eye(16), atol=1e-10)
    P = projector_leq(c, c.percentile(40))
    np.testing.assert_allclose(U @ P, P @ U, atol=1e-10)


def test_spectral_norm_examples():
    assert spectral_norm(np.zeros((3, 3))) == 0
    assert spectral_norm(np.zeros((0, 0))) == 0
    assert spectral_norm(np.array([[0, -1j], [1j, 0]])) == pytest.approx(1)
    assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5)


def test_restricted_norm_examples():
    c = eigendecompose(np.diag([0.0, 1.0, 2.0]))
    A = np.diag([5.0, 7.0, 9.0])
    assert restricted_norm(A, c, 1.5) == pytest.approx(7)
    assert restricted_norm(A, c, -1) == 0
    assert restricted_norm(A, c, 10) == pytest.approx(spectral_norm(A))
    with pytest.raises(ValueError):
        restricted_norm(np.eye(2), c, 1.0)


def test_restricted_norm_monotone_randomized():
    rng = np.random.default_rng(11)
    for trial in range(200):
        n = int(rng.integers(1, 9))
        dim = 1 << n
        c = eigendecompose(random_hermitian(dim, rng))
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        lo, hi = np.sort(rng.uniform(c.e_min - 1, c.e_max + 1, 2))
        a, b = restricted_norm(A, c, lo), restricted_norm(A, c, hi)
        assert a <= b + 1e-12
        assert b <= spectral_norm(A) + 1e-12


def test_leakage_norm_zero_on_commuting_operator():
    c = eigendecompose(tfim_chain(4).matrix)
    assert leakage_norm(tfim_chain(4).matrix, c, 0.0, 0.0) < 1e-12


@pytest.mark.parametrize("H", [shift_groups_psd(heisenberg_chain(6)),
                               shift_groups_psd(heisenberg_chain(8))])
def test_psd_groups_restricted_norm_at_most_cutoff(H):
    """With every group PSD, ||H_m||_{<= L} <= L for L >= E_min."""
    c = eigendecompose(H.matrix)
    for q in [0, 5, 25, 50, 75, 100]:
        cut = c.percentile(q)
        for m in H.group_matrices:
            assert restricted_norm(m, c, cut) <= cut + 1e-10


def test_frustration_free_projector_chain():
    """Singlet projectors on even and odd bonds: every group PSD, ground energy 0."""
    from lowtrotter.pauli_model import PartitionedHamiltonian, TermGroup, term
    n = 6
    groups = []
    for start in (0, 1):
        terms = []
        for i in range(start, n - 1, 2):
            terms.append(term(n, "I", 0.25))
            terms += [term(n, f"{p}{i} {p}{i + 1}", -0.25) for p in "XYZ"]
        groups.append(TermGroup(tuple(terms), n_qubits=n))
    H = PartitionedHamiltonian(n, tuple(groups))
    c = eigendecompose(H.matrix)
    assert c.e_min == pytest.approx(0.0, abs=1e-12)
    for m in H.group_matrices:
        assert np.linalg.eigvalsh(m)[0] >= -1e-12
    for q in [0, 30, 60, 100]:
        cut = c.percentile(q)
        for m in H.group_matrices:
            assert restricted_norm(m, c, cut) <= cut + 1e-10


def test_percentile_validation():
    c = eigendecompose(np.diag([0.0, 1.0]))
    assert c.percentile(50) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        c.percentile(120)
