"""Bipartite and tripartite state containers, eigensystems and partial traces.

Composite indices are A-major: basis vector ``|e_k> (x) |f_l>`` sits at position
``k * dim_b + l``. Under this convention an eigenvector reshapes row-major into
its coefficient matrix, ``A[k, l] = phi[k * dim_b + l]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import (
    DimensionMismatch,
    NonFinite,
    NotHermitian,
    NotNormalized,
    NotPositive,
    NotUnitTrace,
)
from .numerics import DEFAULT_TOL, Tolerance


@dataclass(frozen=True)
class BipartiteState:
    dim_a: int
    dim_b: int
    rho: np.ndarray = field(repr=False)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def n_sq(self) -> int:
        return min(self.dim_a, self.dim_b) ** 2


@dataclass(frozen=True)
class TripartiteState:
    dim_a: int
    dim_b: int
    dim_c: int
    psi: np.ndarray = field(repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.dim_a, self.dim_b, self.dim_c)


@dataclass(frozen=True)
class EigenSystem:
    """Nonzero part of the spectral decomposition of a bipartite state.

    ``coeff_mats[i]`` is eigenvector ``phis[:, i]`` reshaped to ``dim_a x dim_b``.
    ``degeneracy_blocks`` partitions ``range(n)`` into maximal runs of
    eigenvalues equal within ``eps_eig``.
    """

    dim_a: int
    dim_b: int
    lambdas: np.ndarray
    phis: np.ndarray = field(repr=False)
    coeff_mats: np.ndarray = field(repr=False)
    degeneracy_blocks: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return int(self.lambdas.size)

    @property
    def is_degenerate(self) -> bool:
        return any(len(b) > 1 for b in self.degeneracy_blocks)


def validate(raw, dims, tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Check that ``raw`` is a density matrix on ``C^dims[0] (x) C^dims[1]``."""
    dim_a, dim_b = (int(d) for d in dims)
    if dim_a < 1 or dim_b < 1:
        raise DimensionMismatch(f"dimensions must be positive, got {dims!r}")
    try:
        rho = nx.as_matrix(raw)
    except ValueError as exc:
        raise DimensionMismatch(str(exc)) from exc
    size = dim_a * dim_b
    if rho.shape != (size, size):
        raise DimensionMismatch(
            f"density matrix has shape {rho.shape}, expected ({size}, {size}) for dims {dim_a}x{dim_b}"
        )
    scale = max(1.0, nx.frobenius_norm(rho))
    if nx.frobenius_norm(rho - rho.conj().T) > tol.eps_zero * scale:
        raise NotHermitian("density matrix is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    lam, _ = nx.hermitian_eig(rho, tol)
    if lam[-1] < -tol.eps_zero:
        raise NotPositive(f"density matrix has negative eigenvalue {lam[-1]:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol.eps_zero:
        raise NotUnitTrace(f"density matrix has trace {tr!r}, expected 1")
    return BipartiteState(dim_a, dim_b, rho)


def validate_pure(raw, dims, tol: Tolerance = DEFAULT_TOL) -> TripartiteState:
    dim_a, dim_b, dim_c = (int(d) for d in dims)
    if min(dim_a, dim_b, dim_c) < 1:
        raise DimensionMismatch(f"dimensions must be positive, got {dims!r}")
    psi = np.asarray(raw, dtype=np.complex128).reshape(-1)
    if psi.size != dim_a * dim_b * dim_c:
        raise DimensionMismatch(
            f"state vector has length {psi.size}, expected {dim_a * dim_b * dim_c}"
        )
    if not np.all(np.isfinite(psi)):
        raise NonFinite("state vector contains NaN or Inf entries")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol.eps_zero:
        raise NotNormalized(f"state vector has norm {norm!r}, expected 1")
    return TripartiteState(dim_a, dim_b, dim_c, psi)


def pure_state(vec, dims, tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Projector onto a (normalised) bipartite vector."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return validate(np.outer(v, v.conj()), dims, tol)


def degeneracy_blocks(lambdas, eps_eig: float) -> tuple[tuple[int, ...], ...]:
    blocks: list[list[int]] = []
    for i, lam in enumerate(lambdas):
        if blocks and abs(lambdas[blocks[-1][-1]] - lam) <= eps_eig:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return tuple(tuple(b) for b in blocks)


def eigensystem(state: BipartiteState, tol: Tolerance = DEFAULT_TOL) -> EigenSystem:
    lam, vecs = nx.hermitian_eig(state.rho, tol)
    keep = lam > tol.eps_zero
    lam = lam[keep]
    phis = vecs[:, keep]
    mats = np.stack([phis[:, i].reshape(state.dim_a, state.dim_b) for i in range(lam.size)])
    return EigenSystem(
        dim_a=state.dim_a,
        dim_b=state.dim_b,
        lambdas=lam,
        phis=phis,
        coeff_mats=mats,
        degeneracy_blocks=degeneracy_blocks(lam, tol.eps_eig),
    )


def vector_to_matrix(vec, dim_a: int, dim_b: int) -> np.ndarray:
    return np.asarray(vec, dtype=np.complex128).reshape(dim_a, dim_b)


def matrix_to_vector(mat) -> np.ndarray:
    return np.asarray(mat, dtype=np.complex128).reshape(-1)


def partial_trace_b(state: BipartiteState) -> np.ndarray:
    """Reduced matrix on H_A."""
    r = state.rho.reshape(state.dim_a, state.dim_b, state.dim_a, state.dim_b)
    return np.einsum("albl->ab", r)


def partial_trace_a_bip(state: BipartiteState) -> np.ndarray:
    """Reduced matrix on H_B."""
    r = state.rho.reshape(state.dim_a, state.dim_b, state.dim_a, state.dim_b)
    return np.einsum("kakb->ab", r)


def partial_trace_a(state: TripartiteState, tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Trace out H_A of a tripartite pure state, leaving a state on H_B (x) H_C."""
    t = state.psi.reshape(state.dim_a, state.dim_b * state.dim_c)
    rho = t.T @ t.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return validate(rho, (state.dim_b, state.dim_c), tol)


def local_conjugate(state: BipartiteState, u, w, tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """The state ``(u (x) w) rho (u (x) w)^dagger``."""
    k = np.kron(nx.as_matrix(u), nx.as_matrix(w))
    rho = k @ state.rho @ k.conj().T
    return validate(0.5 * (rho + rho.conj().T), state.dims, tol)


def local_apply_pure(state: TripartiteState, u_a, u_b, u_c) -> TripartiteState:
    k = np.kron(np.kron(nx.as_matrix(u_a), nx.as_matrix(u_b)), nx.as_matrix(u_c))
    psi = k @ state.psi
    return TripartiteState(state.dim_a, state.dim_b, state.dim_c, psi)
