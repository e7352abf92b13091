import logging

import numpy as np
import pytest

from lueq import numerics as nx
from lueq.equivalence import (
    Conditional,
    Equivalent,
    Inconclusive,
    Inequivalent,
    decide_bipartite,
    decide_tripartite,
    extract_witness,
    joint_eigenbasis,
    ordering_candidates,
    witness_residual,
)
from lueq.errors import DimensionMismatch, TooManyOrderings, WitnessNotFound
from lueq.states import eigensystem, local_apply_pure, local_conjugate, pure_state, validate
from lueq.testkit import (
    haar_unitary,
    perturb_nonlocal,
    random_chg_state,
    random_chg_tripartite,
    random_lu_pair,
    random_state,
)


def diag_state(*lam):
    return validate(np.diag(lam), (2, 2))


@pytest.mark.parametrize(
    "lam1, lam2, count",
    [
        ((0.5, 0.3, 0.2, 0.0), (0.5, 0.3, 0.2, 0.0), 1),
        ((0.5, 0.25, 0.25, 0.0), (0.5, 0.25, 0.25, 0.0), 2),
        ((0.6, 0.4, 0.0, 0.0), (0.5, 0.5, 0.0, 0.0), 0),
        ((0.25, 0.25, 0.25, 0.25), (0.25, 0.25, 0.25, 0.25), 24),
    ],
)
def test_ordering_candidates(lam1, lam2, count):
    cands = ordering_candidates(eigensystem(diag_state(*lam1)), eigensystem(diag_state(*lam2)))
    assert len(cands) == count
    if count:
        assert cands[0] == tuple(range(len(cands[0])))


def test_ordering_cap():
    es = eigensystem(diag_state(0.25, 0.25, 0.25, 0.25))
    with pytest.raises(TooManyOrderings):
        ordering_candidates(es, es, max_orderings=10)


def test_joint_eigenbasis_commuting_family():
    q = haar_unitary(3, 1)
    fam = [q @ np.diag(d) @ q.conj().T for d in ([1.0, 1.0, 0.2], [0.5, 0.1, 0.5])]
    basis, clusters = joint_eigenbasis(fam)
    for f in fam:
        d = basis.conj().T @ f @ basis
        assert nx.frobenius_norm(d - np.diag(np.diag(d))) < 1e-12
    assert sorted(k for c in clusters for k in c) == [0, 1, 2]


@pytest.mark.parametrize("dims, rank", [((2, 2), 1), ((2, 2), 2), ((2, 3), 3), ((3, 3), 3), ((2, 4), 4)])
def test_reflexive(dims, rank):
    s = random_chg_state(*dims, rank, seed=rank + 10)
    v = decide_bipartite(s, s)
    assert isinstance(v, Equivalent)
    assert v.witness.residual < 1e-12


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("dims, rank", [((2, 2), 2), ((2, 3), 3), ((3, 4), 4), ((2, 4), 3)])
def test_lu_pairs_equivalent(dims, rank, seed):
    s = random_chg_state(*dims, rank, seed)
    s2, _, _ = random_lu_pair(s, seed + 1000)
    v = decide_bipartite(s, s2)
    assert isinstance(v, Equivalent), v
    wit = v.witness
    assert wit.residual <= 1e-8
    assert nx.is_unitary(wit.u) and nx.is_unitary(wit.w)
    assert witness_residual(s.rho, s2.rho, wit.u, wit.w) == pytest.approx(wit.residual, abs=1e-14)


def test_witness_identity():
    es = eigensystem(random_chg_state(2, 3, 3, seed=1))
    wit = extract_witness(es, es, (0, 1, 2))
    assert wit.residual < 1e-12
    # The action is the identity; u and w themselves are fixed only up to a phase.
    k = np.kron(wit.u, wit.w)
    assert nx.frobenius_norm(k - k[0, 0] * np.eye(6)) < 1e-10


def test_witness_diagonal_phases():
    s = random_chg_state(2, 2, 2, seed=5)
    u = np.diag(np.exp(1j * np.array([0.3, -1.1])))
    w = np.diag(np.exp(1j * np.array([2.0, 0.4])))
    s2 = local_conjugate(s, u, w)
    wit = extract_witness(eigensystem(s), eigensystem(s2), (0, 1))
    assert witness_residual(s.rho, s2.rho, wit.u, wit.w) < 1e-8


def test_witness_singular_value_mismatch():
    es1 = eigensystem(random_chg_state(2, 2, 1, seed=1))
    es2 = eigensystem(random_chg_state(2, 2, 1, seed=2))
    with pytest.raises(WitnessNotFound):
        extract_witness(es1, es2, (0,))


@pytest.mark.parametrize("seed", range(8))
def test_perturbed_pairs_inequivalent(seed):
    s = random_chg_state(2, 2 + seed % 2, 2, seed)
    v = decide_bipartite(s, perturb_nonlocal(s, 0.3, seed + 7))
    assert isinstance(v, Inequivalent)
    assert v.invariant in {"Omega", "X", "Theta", "Y", "classification"}
    assert abs(np.asarray(v.value_1) - np.asarray(v.value_2)).max() > 1e-8


def test_spectrum_mismatch():
    s1 = random_chg_state(2, 2, 2, seed=1)
    s2 = random_chg_state(2, 2, 2, seed=2)
    v = decide_bipartite(s1, s2)
    assert isinstance(v, Inequivalent)
    assert v.invariant == "J^s"


def test_rank_mismatch():
    v = decide_bipartite(random_chg_state(2, 2, 1, seed=1), random_chg_state(2, 2, 2, seed=1))
    assert isinstance(v, Inequivalent) and v.invariant == "rank"


def test_symmetry():
    s = random_chg_state(2, 3, 3, seed=4)
    s2, _, _ = random_lu_pair(s, 5)
    v12, v21 = decide_bipartite(s, s2), decide_bipartite(s2, s)
    assert v12.is_equivalent and v21.is_equivalent
    k12 = np.kron(v12.witness.u, v12.witness.w)
    k21 = np.kron(v21.witness.u, v21.witness.w)
    # Mutually inverse actions on the state.
    assert nx.frobenius_norm(k21 @ k12 @ s.rho @ (k21 @ k12).conj().T - s.rho) < 1e-8


def test_non_chg_is_inconclusive():
    v = decide_bipartite(random_state(2, 2, 3, seed=1), random_state(2, 2, 3, seed=1))
    assert isinstance(v, Inconclusive)
    assert v.diagnostics["class_1"] != "CHG"


def test_werner_is_inconclusive():
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    w = validate(0.5 * np.outer(singlet, singlet) + 0.125 * np.eye(4), (2, 2))
    assert isinstance(decide_bipartite(w, w), Inconclusive)


def test_degenerate_spectrum_never_inequivalent():
    s = random_chg_state(2, 3, 3, seed=3, degenerate=True)
    s2, _, _ = random_lu_pair(s, 4)
    assert isinstance(decide_bipartite(s, s2), (Equivalent, Inconclusive))


def test_force_branch():
    s = random_chg_state(2, 2, 2, seed=7)
    s2, _, _ = random_lu_pair(s, 8)
    assert decide_bipartite(s, s2, force_branch="omega").branch == "omega"
    assert decide_bipartite(s, s2, force_branch="theta").branch == "theta"
    with pytest.raises(ValueError):
        decide_bipartite(s, s2, force_branch="both")


def test_theta_degenerate_falls_back_or_inconclusive():
    # dims (2,3) rank 2: Theta_n can be singular, Omega is used.
    s = random_chg_state(2, 3, 2, seed=0)
    s2, _, _ = random_lu_pair(s, 1)
    assert decide_bipartite(s, s2).branch == "omega"


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        decide_bipartite(random_chg_state(2, 2, 1, seed=0), random_chg_state(2, 3, 1, seed=0))


def test_invariants_match_but_witness_fails_logs_warning(monkeypatch, caplog):
    import lueq.equivalence as eq

    def fail(*args, **kwargs):
        raise WitnessNotFound("forced")

    monkeypatch.setattr(eq, "extract_witness", fail)
    s = random_chg_state(2, 2, 2, seed=1)
    with caplog.at_level(logging.WARNING, logger="lueq.equivalence"):
        v = eq.decide_bipartite(s, s)
    assert isinstance(v, Inconclusive)
    assert "witness" in caplog.text


# -- tripartite


def tri_lu(t, seed):
    rng = np.random.default_rng(seed)
    us = []
    for d in t.dims:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        us.append(np.linalg.qr(g)[0])
    return local_apply_pure(t, *us)


def test_tripartite_reflexive_conditional():
    t = random_chg_tripartite(2, 2, 3, 2, seed=1)
    v = decide_tripartite(t, t)
    assert isinstance(v, Conditional)


@pytest.mark.parametrize("seed", range(4))
def test_tripartite_lu_conditional(seed):
    t = random_chg_tripartite(3, 2, 3, 3, seed)
    assert isinstance(decide_tripartite(t, tri_lu(t, seed)), Conditional)


def test_tripartite_spectrum_mismatch():
    t1 = random_chg_tripartite(2, 2, 2, 2, seed=3, spectrum=[0.7, 0.3])
    t2 = random_chg_tripartite(2, 2, 2, 2, seed=3, spectrum=[0.6, 0.4])
    v = decide_tripartite(t1, t2)
    assert isinstance(v, Inequivalent) and v.invariant == "J^s"


def test_tripartite_external_family():
    t = random_chg_tripartite(2, 2, 3, 2, seed=1)
    t2 = tri_lu(t, 2)
    same = decide_tripartite(t, t2, external_family=lambda s: [1.0, 2.0])
    assert isinstance(same, Equivalent) and same.witness is None
    calls = iter([[1.0, 2.0], [1.0, 2.5]])
    diff = decide_tripartite(t, t2, external_family=lambda s: next(calls))
    assert isinstance(diff, Inequivalent) and diff.invariant == "I^A"


def test_tripartite_restricted_flag():
    t = random_chg_tripartite(2, 2, 3, 2, seed=4)
    v = decide_tripartite(t, tri_lu(t, 5), restricted=True)
    assert isinstance(v, Conditional)


def test_pure_bell_reflexive():
    bell = pure_state([1, 0, 0, 1], (2, 2))
    v = decide_bipartite(bell, bell)
    assert v.is_equivalent
