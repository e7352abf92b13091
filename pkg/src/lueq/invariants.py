"""Local-unitary invariants of bipartite mixed states and genericity classes.

For a state with eigen-decomposition ``rho = sum_i lambda_i |phi_i><phi_i|``
and coefficient matrices ``A_i`` the reduced families are
``rho_i = A_i A_i^dagger`` (on H_A) and ``theta_i = A_i^dagger A_i`` (on H_B).
From them:

* ``omega[i, j] = Tr(rho_i rho_j)``, ``theta_mat[i, j] = Tr(theta_i theta_j)``,
  zero-padded to ``N^2 x N^2`` with ``N = min(dim_a, dim_b)``;
* ``x_tensor[i, j, k] = Tr(rho_i rho_j rho_k)`` and the analogous ``y_tensor``;
* ``j_moments[s-1] = Tr(rho^s)`` for ``s = 1..n``.

All indices here are 0-based; reports convert to 1-based.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import ResidualImaginary
from .numerics import DEFAULT_TOL, Tolerance
from .states import BipartiteState, EigenSystem, eigensystem

_IMAG_LIMIT = 1e-10


@dataclass(frozen=True)
class ReducedFamily:
    rhos: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.rhos.shape[0])


@dataclass(frozen=True)
class InvariantSet:
    j_moments: np.ndarray
    omega: np.ndarray
    theta_mat: np.ndarray
    x_tensor: np.ndarray
    y_tensor: np.ndarray
    n: int
    n_sq: int

    @property
    def omega_n(self) -> np.ndarray:
        return self.omega[: self.n, : self.n]

    @property
    def theta_n(self) -> np.ndarray:
        return self.theta_mat[: self.n, : self.n]


class Genericity(str, enum.Enum):
    NON_GENERIC = "NonGeneric"
    HIGH_GENERIC = "HighGeneric"
    GENERIC = "Generic"
    CHG = "CHG"


@dataclass(frozen=True)
class GenericityClass:
    """Classification plus the diagnostics it was decided from.

    ``label`` is the most specific class: ``CHG`` outranks ``Generic``, which
    outranks ``HighGeneric``. The boolean fields record each condition
    separately, so a CHG state can also be read off as Generic or not.
    """

    label: Genericity
    det_omega: float
    det_theta: float
    max_commutator: float
    min_rho_rank: int
    omega_nondegenerate: bool
    theta_nondegenerate: bool
    generic: bool
    high_generic: bool
    chg: bool


def reduced_family(es: EigenSystem) -> ReducedFamily:
    a = es.coeff_mats
    rhos = np.einsum("ikl,iml->ikm", a, a.conj())
    thetas = np.einsum("ikl,ikm->ilm", a.conj(), a)
    return ReducedFamily(rhos=rhos, thetas=thetas)


def _gram(mats: np.ndarray) -> np.ndarray:
    # Tr(M_i M_j) for Hermitian M equals sum_ab M_i[a, b] conj(M_j[a, b]).
    g = np.einsum("iab,jba->ij", mats, mats)
    imag = float(np.max(np.abs(g.imag))) if g.size else 0.0
    if imag >= _IMAG_LIMIT:
        raise ResidualImaginary(f"trace of Hermitian product has imaginary part {imag:.3e}")
    g = g.real
    return 0.5 * (g + g.T)


def _pad(m: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros((size, size))
    k = m.shape[0]
    out[:k, :k] = m
    return out


def metric_tensors(rf: ReducedFamily, n_sq: int) -> tuple[np.ndarray, np.ndarray]:
    size = max(n_sq, rf.n)
    return _pad(_gram(rf.rhos), size), _pad(_gram(rf.thetas), size)


def trilinear_tensors(rf: ReducedFamily) -> tuple[np.ndarray, np.ndarray]:
    """Complex ``n x n x n`` tensors ``Tr(rho_i rho_j rho_k)`` and ``Tr(theta_i theta_j theta_k)``."""
    x = np.einsum("iab,jbc,kca->ijk", rf.rhos, rf.rhos, rf.rhos)
    y = np.einsum("iab,jbc,kca->ijk", rf.thetas, rf.thetas, rf.thetas)
    return x, y


def j_moments(es: EigenSystem) -> np.ndarray:
    s = np.arange(1, es.n + 1)
    return np.array([np.sum(es.lambdas**k) for k in s])


def compute_invariants(es: EigenSystem, rf: ReducedFamily | None = None) -> InvariantSet:
    rf = rf if rf is not None else reduced_family(es)
    n_sq = min(es.dim_a, es.dim_b) ** 2
    omega, theta_mat = metric_tensors(rf, n_sq)
    x, y = trilinear_tensors(rf)
    return InvariantSet(
        j_moments=j_moments(es),
        omega=omega,
        theta_mat=theta_mat,
        x_tensor=x,
        y_tensor=y,
        n=es.n,
        n_sq=n_sq,
    )


def max_commutator_norm(rf: ReducedFamily) -> float:
    worst = 0.0
    for fam in (rf.rhos, rf.thetas):
        for i in range(rf.n):
            for j in range(i + 1, rf.n):
                worst = max(worst, nx.frobenius_norm(nx.commutator(fam[i], fam[j])))
    return worst


def classify(
    es: EigenSystem,
    rf: ReducedFamily,
    inv: InvariantSet,
    tol: Tolerance = DEFAULT_TOL,
    full_rank: str = "all",
) -> GenericityClass:
    """Decide NonGeneric / HighGeneric / Generic / CHG.

    Determinants are taken on the leading ``n x n`` blocks. ``full_rank``
    selects whether every ``rho_i`` (``"all"``) or at least one (``"any"``)
    must have rank ``dim_a`` for the CHG condition.
    """
    if full_rank not in ("all", "any"):
        raise ValueError(f"full_rank must be 'all' or 'any', got {full_rank!r}")
    det_omega = nx.det(inv.omega_n).real
    det_theta = nx.det(inv.theta_n).real
    omega_ok = abs(det_omega) > tol.eps_zero
    theta_ok = abs(det_theta) > tol.eps_zero
    generic = omega_ok and theta_ok
    high_generic = omega_ok or theta_ok

    max_comm = max_commutator_norm(rf)
    ranks = [nx.rank(r, tol) for r in rf.rhos]
    min_rank = min(ranks)
    rank_ok = (all if full_rank == "all" else any)(r == es.dim_a for r in ranks)
    chg = high_generic and max_comm < tol.eps_zero and rank_ok

    if chg:
        label = Genericity.CHG
    elif generic:
        label = Genericity.GENERIC
    elif high_generic:
        label = Genericity.HIGH_GENERIC
    else:
        label = Genericity.NON_GENERIC
    return GenericityClass(
        label=label,
        det_omega=det_omega,
        det_theta=det_theta,
        max_commutator=max_comm,
        min_rho_rank=min_rank,
        omega_nondegenerate=omega_ok,
        theta_nondegenerate=theta_ok,
        generic=generic,
        high_generic=high_generic,
        chg=chg,
    )


@dataclass(frozen=True)
class Analysis:
    """Everything computed for one bipartite state, bundled for reuse."""

    state: BipartiteState
    eigensystem: EigenSystem
    family: ReducedFamily
    invariants: InvariantSet
    genericity: GenericityClass


def analyze(state: BipartiteState, tol: Tolerance = DEFAULT_TOL, full_rank: str = "all") -> Analysis:
    es = eigensystem(state, tol)
    rf = reduced_family(es)
    inv = compute_invariants(es, rf)
    return Analysis(state, es, rf, inv, classify(es, rf, inv, tol, full_rank))
