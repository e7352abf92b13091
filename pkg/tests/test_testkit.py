import numpy as np
import pytest

from lueq import numerics as nx
from lueq.errors import GenerationFailed
from lueq.invariants import Genericity, analyze, compute_invariants
from lueq.states import eigensystem, partial_trace_a, pure_state
from lueq.testkit import (
    Xoshiro256,
    haar_unitary,
    nonlocal_hermitian,
    oracle_invariants,
    perturb_nonlocal,
    random_chg_state,
    random_chg_tripartite,
    random_lu_pair,
    random_spectrum,
    random_state,
    splitmix64,
)


def test_xoshiro_reference_outputs():
    # Reference sequence of the xoshiro256** C implementation for state {1, 2, 3, 4}.
    rng = Xoshiro256(state=(1, 2, 3, 4))
    assert [rng.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_splitmix_reference_output():
    _, out = splitmix64(0)
    assert out == 0xE220A8397B1DCDAF


def test_xoshiro_rejects_zero_state():
    with pytest.raises(ValueError):
        Xoshiro256(state=(0, 0, 0, 0))


def test_uniform_range_and_determinism():
    a = Xoshiro256(5).uniforms(1000)
    b = Xoshiro256(5).uniforms(1000)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0 and a.max() < 1
    assert abs(a.mean() - 0.5) < 0.05


def test_normals_moments():
    z = Xoshiro256(11).normals(4000)
    assert abs(z.mean()) < 0.06
    assert abs(z.std() - 1) < 0.06


def test_haar_dim_one():
    u = haar_unitary(1, 3)
    assert u.shape == (1, 1)
    assert abs(abs(u[0, 0]) - 1) < 1e-14


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_haar_unitary(dim):
    u = haar_unitary(dim, 7)
    assert nx.frobenius_norm(u.conj().T @ u - np.eye(dim)) < 1e-12
    np.testing.assert_array_equal(u, haar_unitary(dim, 7))


def test_random_spectrum_gap():
    lam = random_spectrum(5, seed=1, min_gap=1e-3)
    assert abs(lam.sum() - 1) < 1e-14
    assert np.all(-np.diff(lam) >= 1e-3)
    lam = random_spectrum(4, seed=1, degenerate=True)
    assert lam[0] == lam[1]


@pytest.mark.parametrize("dims, rank", [((2, 2), 1), ((2, 2), 2), ((2, 3), 2), ((2, 3), 3), ((3, 3), 3), ((2, 4), 4)])
def test_chg_generator_postcondition(dims, rank):
    s = random_chg_state(*dims, rank, seed=rank)
    an = analyze(s)
    assert an.genericity.label == Genericity.CHG
    # Independent re-check of the raw conditions.
    rhos = an.family.rhos
    for i in range(rank):
        assert np.linalg.matrix_rank(rhos[i], tol=1e-9) == dims[0]
        for j in range(i):
            assert np.linalg.norm(rhos[i] @ rhos[j] - rhos[j] @ rhos[i]) < 1e-9
    assert np.all(-np.diff(an.eigensystem.lambdas) >= 1e-6)


def test_chg_generator_rank_two_on_2x3_has_full_rank_rhos():
    an = analyze(random_chg_state(2, 3, 2, seed=0))
    assert an.genericity.min_rho_rank == 2
    for t in an.family.thetas:
        assert nx.rank(t) <= 2


@pytest.mark.parametrize("args", [(3, 2, 1), (2, 2, 5), (2, 2, 3)])
def test_chg_generator_rejects_impossible(args):
    with pytest.raises(ValueError):
        random_chg_state(*args, seed=0)


def test_chg_generator_reproducible():
    a = random_chg_state(2, 3, 3, seed=42)
    b = random_chg_state(2, 3, 3, seed=42)
    np.testing.assert_array_equal(a.rho, b.rho)


def test_chg_generator_degenerate_mode():
    es = eigensystem(random_chg_state(2, 2, 2, seed=4, degenerate=True))
    assert es.degeneracy_blocks == ((0, 1),)


def test_generation_failed():
    with pytest.raises(GenerationFailed):
        random_spectrum(4, seed=0, min_gap=0.5)


def test_lu_pair_preserves_moments():
    s = random_state(3, 3, 4, seed=2)
    s2, u, w = random_lu_pair(s, seed=3)
    assert nx.is_unitary(u) and nx.is_unitary(w)
    np.testing.assert_allclose(
        compute_invariants(eigensystem(s2)).j_moments,
        compute_invariants(eigensystem(s)).j_moments,
        atol=1e-10,
    )


def test_nonlocal_hermitian_has_no_local_part():
    h = nonlocal_hermitian(2, 3, seed=1)
    t = h.reshape(2, 3, 2, 3)
    assert abs(nx.frobenius_norm(h) - 1) < 1e-12
    assert nx.frobenius_norm(np.einsum("albl->ab", t)) < 1e-12
    assert nx.frobenius_norm(np.einsum("kakb->ab", t)) < 1e-12


def test_perturb_preserves_spectrum():
    bell = pure_state([1, 0, 0, 1], (2, 2))
    p = perturb_nonlocal(bell, 0.3, seed=5)
    es = eigensystem(p)
    assert es.n == 1
    assert abs(es.lambdas[0] - 1) < 1e-12


def test_perturb_small_magnitude_is_close():
    s = random_chg_state(2, 2, 2, seed=1)
    for eps in (1e-2, 1e-4):
        assert nx.frobenius_norm(perturb_nonlocal(s, eps, seed=2).rho - s.rho) < 10 * eps


def test_perturb_reproducible_and_validated():
    s = random_chg_state(2, 2, 2, seed=1)
    np.testing.assert_array_equal(perturb_nonlocal(s, 0.3, 9).rho, perturb_nonlocal(s, 0.3, 9).rho)
    with pytest.raises(ValueError):
        perturb_nonlocal(s, 1.5, 9)


def test_oracle_bell_and_product():
    bell = oracle_invariants(pure_state([1, 0, 0, 1], (2, 2)))
    assert abs(bell.omega[0, 0] - 0.5) < 1e-12
    prod = oracle_invariants(pure_state([1, 0, 0, 0], (2, 2)))
    assert abs(prod.x_tensor[0, 0, 0] - 1) < 1e-12


def test_oracle_agrees_rank3():
    s = random_state(2, 2, 3, seed=8)
    main = compute_invariants(eigensystem(s))
    orc = oracle_invariants(s)
    for field in ("j_moments", "omega", "theta_mat", "x_tensor", "y_tensor"):
        np.testing.assert_allclose(getattr(main, field), getattr(orc, field), atol=1e-10)


def test_chg_tripartite_reduction():
    t = random_chg_tripartite(2, 2, 3, 2, seed=1)
    assert analyze(partial_trace_a(t)).genericity.chg
    with pytest.raises(ValueError):
        random_chg_tripartite(1, 2, 3, 2, seed=1)
