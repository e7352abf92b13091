import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lueq import numerics as nx
from lueq.errors import NonFinite, NonHermitian, NonSquare
from lueq.numerics import Tolerance

rng = np.random.default_rng(1234)


def rand_complex(rows, cols, gen=rng):
    return gen.normal(size=(rows, cols)) + 1j * gen.normal(size=(rows, cols))


def rand_hermitian(n, gen=rng):
    g = rand_complex(n, n, gen)
    return 0.5 * (g + g.conj().T)


complex_matrices = st.tuples(
    st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1)
).map(lambda t: rand_complex(t[0], t[1], np.random.default_rng(t[2])))

hermitian_matrices = st.tuples(st.integers(1, 7), st.integers(0, 2**32 - 1)).map(
    lambda t: rand_hermitian(t[0], np.random.default_rng(t[1]))
)


def test_tolerance_defaults():
    tol = Tolerance()
    assert (tol.eps_zero, tol.eps_eig, tol.eps_match) == (1e-9, 1e-7, 1e-8)


@pytest.mark.parametrize(
    "kwargs",
    [dict(eps_zero=0.0), dict(eps_eig=-1.0), dict(eps_match=float("nan")), dict(eps_zero=1e-6)],
)
def test_tolerance_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        Tolerance(**kwargs)


def test_as_matrix_rejects_nan():
    with pytest.raises(NonFinite):
        nx.as_matrix([[1.0, np.nan], [0.0, 1.0]])


def test_eig_identity():
    lam, v = nx.hermitian_eig(nx.identity(2))
    np.testing.assert_allclose(lam, [1.0, 1.0])
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-12)


def test_eig_diagonal():
    lam, v = nx.hermitian_eig(np.diag([0.3, 0.7]))
    np.testing.assert_allclose(lam, [0.7, 0.3])
    # Identity up to a column permutation and phases.
    np.testing.assert_allclose(np.abs(v), [[0, 1], [1, 0]], atol=1e-14)


def test_eig_random_4x4():
    h = rand_hermitian(4)
    lam, v = nx.hermitian_eig(h)
    assert nx.frobenius_norm(v @ np.diag(lam) @ v.conj().T - h) < 1e-10 * nx.frobenius_norm(h)


def test_eig_matches_lapack():
    h = rand_hermitian(6)
    lam, _ = nx.hermitian_eig(h)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(h)[::-1], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitian):
        nx.hermitian_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_eig_rejects_non_square():
    with pytest.raises(NonSquare):
        nx.hermitian_eig(np.zeros((2, 3)))


@settings(max_examples=60, deadline=None)
@given(hermitian_matrices)
def test_eig_reassembly(h):
    lam, v = nx.hermitian_eig(h)
    scale = max(1.0, nx.frobenius_norm(h))
    assert nx.frobenius_norm(v @ np.diag(lam) @ v.conj().T - h) <= 1e-10 * scale
    assert nx.frobenius_norm(v.conj().T @ v - np.eye(len(lam))) <= 1e-12
    assert np.all(np.diff(lam) <= 0)


def test_svd_zero_matrix():
    _, s, _ = nx.svd(np.zeros((3, 2)))
    np.testing.assert_array_equal(s, [0.0, 0.0])


def test_svd_diagonal():
    u, s, v = nx.svd(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(s, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(u), [[0, 1], [1, 0]], atol=1e-14)
    np.testing.assert_allclose(np.abs(v), [[0, 1], [1, 0]], atol=1e-14)


def test_svd_values_match_eig_of_gram():
    m = rand_complex(3, 2)
    s = nx.singular_values(m)
    lam, _ = nx.hermitian_eig(m.conj().T @ m)
    np.testing.assert_allclose(s, np.sqrt(lam), atol=1e-10)


def test_svd_phase_convention():
    _, _, v = nx.svd(rand_complex(4, 3))
    for col in v.T:
        big = col[np.argmax(np.abs(col))]
        assert big.imag == 0.0 and big.real > 0


@settings(max_examples=80, deadline=None)
@given(complex_matrices)
def test_svd_reassembly(m):
    u, s, v = nx.svd(m)
    k = s.size
    recon = u[:, :k] @ np.diag(s) @ v[:, :k].conj().T
    assert nx.frobenius_norm(recon - m) <= 1e-10 * max(1.0, nx.frobenius_norm(m))
    assert nx.frobenius_norm(u.conj().T @ u - np.eye(u.shape[0])) <= 1e-12
    assert nx.frobenius_norm(v.conj().T @ v - np.eye(v.shape[0])) <= 1e-12
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)


def test_svd_rank_deficient():
    m = rand_complex(4, 1) @ rand_complex(1, 5) + rand_complex(4, 1) @ rand_complex(1, 5)
    u, s, v = nx.svd(m)
    assert s[2] < 1e-12 * s[0]
    recon = u[:, :4] @ np.diag(s) @ v[:, :4].conj().T
    assert nx.frobenius_norm(recon - m) < 1e-10 * nx.frobenius_norm(m)


def test_det_identity():
    assert nx.det(nx.identity(3)) == 1


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_det_matches_numpy(n):
    m = rand_complex(n, n)
    assert abs(nx.det(m) - np.linalg.det(m)) < 1e-10 * max(1.0, abs(np.linalg.det(m)))


def test_det_singular():
    assert nx.det([[1.0, 2.0], [2.0, 4.0]]) == 0


def test_det_non_square():
    with pytest.raises(NonSquare):
        nx.det(np.zeros((2, 3)))


def test_rank_threshold():
    assert nx.rank(np.diag([1.0, 1e-15])) == 1
    assert nx.rank(np.zeros((2, 2))) == 0


def test_commutator_of_diagonals_is_zero():
    c = nx.commutator(np.diag([1.0, 2.0]), np.diag([5.0, -3.0]))
    np.testing.assert_array_equal(c, np.zeros((2, 2)))


def test_commutator_shape_mismatch():
    with pytest.raises(NonSquare):
        nx.commutator(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_trace_cyclic(n, seed):
    gen = np.random.default_rng(seed)
    a, b = rand_complex(n, n, gen), rand_complex(n, n, gen)
    bound = 1e-12 * nx.frobenius_norm(a) * nx.frobenius_norm(b)
    assert abs(nx.trace(nx.matmul(a, b)) - nx.trace(nx.matmul(b, a))) <= bound


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_rank_unitary_invariant(n, r, seed):
    gen = np.random.default_rng(seed)
    r = min(r, n)
    m = rand_complex(n, r, gen) @ rand_complex(r, n, gen)
    q1, _ = np.linalg.qr(rand_complex(n, n, gen))
    q2, _ = np.linalg.qr(rand_complex(n, n, gen))
    assert nx.rank(q1 @ m @ q2) == nx.rank(m) == r


def test_polar_unitary_is_unitary():
    p = nx.polar_unitary(rand_complex(4, 4))
    assert nx.is_unitary(p)


def test_dagger():
    m = rand_complex(2, 3)
    np.testing.assert_array_equal(nx.dagger(m), m.conj().T)
