"""Seeded generators and an independent invariant oracle.

Randomness comes from :class:`Xoshiro256`, a xoshiro256** generator seeded
through splitmix64, so fixtures can be reproduced from the seed alone:

* ``random()`` is ``(next_u64() >> 11) * 2**-53``;
* ``normal()`` is Box-Muller on two consecutive uniforms,
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
"""
from __future__ import annotations

import math

import numpy as np

from . import numerics as nx
from .errors import GenerationFailed
from .invariants import InvariantSet, analyze
from .numerics import DEFAULT_TOL, Tolerance
from .states import (
    BipartiteState,
    TripartiteState,
    local_conjugate,
    validate,
    validate_pure,
)

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** pseudo-random generator."""

    def __init__(self, seed: int = 0, *, state: tuple[int, int, int, int] | None = None):
        if state is not None:
            self.s = [int(x) & _MASK for x in state]
        else:
            sm = int(seed) & _MASK
            self.s = []
            for _ in range(4):
                sm, out = splitmix64(sm)
                self.s.append(out)
        if not any(self.s):
            raise ValueError("xoshiro256 state must not be all zero")

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        u1 = self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        return np.array([self.normal() for _ in range(count)]).reshape(shape)

    def uniforms(self, count: int) -> np.ndarray:
        return np.array([self.random() for _ in range(count)])

    def spawn(self) -> "Xoshiro256":
        """Independent child stream seeded from this generator's output."""
        return Xoshiro256(self.next_u64())


def as_rng(seed) -> Xoshiro256:
    if isinstance(seed, Xoshiro256):
        return seed
    return Xoshiro256(int(seed))


def ginibre(rows: int, cols: int, seed) -> np.ndarray:
    rng = as_rng(seed)
    re = rng.normals((rows, cols))
    im = rng.normals((rows, cols))
    return (re + 1j * im) / math.sqrt(2.0)


def haar_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with R's diagonal made positive."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    q, r = np.linalg.qr(ginibre(dim, dim, seed))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_spectrum(rank: int, seed, min_gap: float = 0.0, degenerate: bool = False,
                    max_tries: int = 1000) -> np.ndarray:
    """Descending positive eigenvalues summing to one, pairwise gaps at least ``min_gap``.

    With ``degenerate=True`` the two largest values coincide exactly.
    """
    rng = as_rng(seed)
    for _ in range(max_tries):
        raw = -np.log(1.0 - rng.uniforms(rank))
        if degenerate and rank >= 2:
            raw[1] = raw[0]
        lam = np.sort(raw / raw.sum())[::-1]
        gaps = -np.diff(lam)
        if degenerate and rank >= 2:
            gaps = gaps[1:]
        if gaps.size == 0 or gaps.min() >= min_gap:
            return lam
    raise GenerationFailed(f"could not draw {rank} eigenvalues with gap {min_gap}")


def random_state(dim_a: int, dim_b: int, rank: int, seed, min_gap: float = 1e-2,
                 tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Random density matrix of the given rank with Haar-random eigenvectors."""
    size = dim_a * dim_b
    if not 1 <= rank <= size:
        raise ValueError(f"rank must lie in 1..{size}")
    rng = as_rng(seed)
    basis = haar_unitary(size, rng)[:, :rank]
    lam = random_spectrum(rank, rng, min_gap=min_gap)
    rho = (basis * lam) @ basis.conj().T
    return validate(0.5 * (rho + rho.conj().T), (dim_a, dim_b), tol)


def _orthonormal_rows(count: int, dim: int, rng: Xoshiro256, floor: float) -> np.ndarray | None:
    """``count`` orthonormal real vectors of length ``dim`` with all entries above ``floor`` in size."""
    vecs = rng.uniforms(count * dim).reshape(count, dim) + 0.1
    out = np.zeros_like(vecs)
    for i in range(count):
        v = vecs[i].copy()
        for j in range(i):
            v -= out[j] * (out[j] @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-3:
            return None
        out[i] = v / norm
    if np.min(np.abs(out)) < floor:
        return None
    return out


def chg_coefficient_matrices(dim_a: int, dim_b: int, rank: int, rng: Xoshiro256,
                             floor: float = 0.05) -> np.ndarray | None:
    """Coefficient matrices ``A_i = P D_i Q^dagger`` sharing the bases ``P`` and ``Q``.

    Each ``D_i`` has one nonzero per row, in column ``(k + shift) % dim_b``
    with ``shift`` a multiple of ``dim_a``;
    eigenvectors on the same shift get orthonormal real diagonals, different
    shifts have disjoint supports, so the ``A_i`` are orthonormal and every
    ``A_i A_i^dagger`` and ``A_i^dagger A_i`` is diagonal in the shared bases.
    """
    p = haar_unitary(dim_a, rng)
    q = haar_unitary(dim_b, rng)
    mats = []
    remaining = rank
    shift = 0
    while remaining > 0:
        count = min(remaining, dim_a)
        diag = _orthonormal_rows(count, dim_a, rng, floor)
        if diag is None:
            return None
        for d in diag:
            core = np.zeros((dim_a, dim_b), dtype=np.complex128)
            for k in range(dim_a):
                core[k, (k + shift) % dim_b] = d[k]
            mats.append(p @ core @ q.conj().T)
        remaining -= count
        shift += dim_a
    return np.stack(mats)


def random_chg_state(dim_a: int, dim_b: int, rank: int, seed, max_attempts: int = 100,
                     min_gap: float | None = None, degenerate: bool = False,
                     spectrum=None, tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Random CHG state built in a shared eigenbasis, re-checked with ``classify``.

    ``spectrum`` fixes the eigenvalues (descending, summing to one) instead of
    drawing them.
    """
    if dim_a > dim_b:
        raise ValueError("CHG states need dim_a <= dim_b (full-rank rho_i)")
    if not 1 <= rank <= min(dim_a, dim_b) ** 2:
        raise ValueError(f"rank must lie in 1..{min(dim_a, dim_b) ** 2}")
    if rank > dim_b:
        raise ValueError(f"no CHG state of rank {rank} exists for dims {dim_a}x{dim_b}")
    gap = 10 * tol.eps_eig if min_gap is None else min_gap
    rng = as_rng(seed)
    for _ in range(max_attempts):
        mats = chg_coefficient_matrices(dim_a, dim_b, rank, rng)
        if mats is None:
            continue
        if spectrum is None:
            lam = random_spectrum(rank, rng, min_gap=gap, degenerate=degenerate)
        else:
            lam = np.asarray(spectrum, dtype=float)
            if lam.shape != (rank,):
                raise ValueError(f"spectrum must have {rank} entries")
        phis = mats.reshape(rank, -1).T
        rho = (phis * lam) @ phis.conj().T
        state = validate(0.5 * (rho + rho.conj().T), (dim_a, dim_b), tol)
        if degenerate:
            # A degenerate eigenspace has no preferred basis, so classify may
            # see a rotated family; the construction itself is CHG.
            return state
        if analyze(state, tol).genericity.chg:
            return state
    raise GenerationFailed(f"no CHG state found in {max_attempts} attempts")


def random_lu_pair(state: BipartiteState, seed, tol: Tolerance = DEFAULT_TOL):
    """Return ``(rho', u, w)`` with ``rho' = (u (x) w) rho (u (x) w)^dagger`` for Haar ``u, w``."""
    rng = as_rng(seed)
    u = haar_unitary(state.dim_a, rng)
    w = haar_unitary(state.dim_b, rng)
    return local_conjugate(state, u, w, tol), u, w


def nonlocal_hermitian(dim_a: int, dim_b: int, seed) -> np.ndarray:
    """Random Hermitian with every local component ``X (x) I + I (x) Y`` projected out, unit norm."""
    g = ginibre(dim_a * dim_b, dim_a * dim_b, seed)
    h = 0.5 * (g + g.conj().T)
    t = h.reshape(dim_a, dim_b, dim_a, dim_b)
    h_a = np.einsum("albl->ab", t)
    h_b = np.einsum("kakb->ab", t)
    tr = np.trace(h)
    h = (h - np.kron(h_a, np.eye(dim_b)) / dim_b - np.kron(np.eye(dim_a), h_b) / dim_a
         + tr * np.eye(dim_a * dim_b) / (dim_a * dim_b))
    return h / nx.frobenius_norm(h)


def perturb_nonlocal(state: BipartiteState, magnitude: float, seed,
                     tol: Tolerance = DEFAULT_TOL) -> BipartiteState:
    """Conjugate by ``exp(i * magnitude * H)`` for a random non-local Hermitian ``H``."""
    if not 0 < magnitude < 1:
        raise ValueError("magnitude must lie strictly between 0 and 1")
    h = nonlocal_hermitian(state.dim_a, state.dim_b, seed)
    lam, v = nx.hermitian_eig(h, tol)
    e = (v * np.exp(1j * magnitude * lam)) @ v.conj().T
    rho = e @ state.rho @ e.conj().T
    return validate(0.5 * (rho + rho.conj().T), state.dims, tol)


def random_chg_tripartite(dim_a: int, dim_b: int, dim_c: int, rank: int, seed,
                          spectrum=None, tol: Tolerance = DEFAULT_TOL) -> TripartiteState:
    """Pure state on A (x) B (x) C whose reduction to B (x) C is a random CHG state.

    ``spectrum`` replaces the eigenvalues of the reduced state (same shared
    eigenbasis), which yields spectrum-mismatched partners.
    """
    if rank > dim_a:
        raise ValueError("rank of the reduced state cannot exceed dim_a")
    rng = as_rng(seed)
    reduced = random_chg_state(dim_b, dim_c, rank, rng, tol=tol)
    lam, vecs = nx.hermitian_eig(reduced.rho, tol)
    lam, phis = lam[:rank], vecs[:, :rank]
    if spectrum is not None:
        lam = np.asarray(spectrum, dtype=float)
        if lam.shape != (rank,) or np.any(lam <= 0):
            raise ValueError(f"spectrum must hold {rank} positive values")
    anc = haar_unitary(dim_a, rng)[:, :rank]
    psi = np.einsum("i,ai,xi->ax", np.sqrt(lam), anc, phis).reshape(-1)
    return validate_pure(psi / np.linalg.norm(psi), (dim_a, dim_b, dim_c), tol)


def oracle_invariants(state: BipartiteState, tol: Tolerance = DEFAULT_TOL) -> InvariantSet:
    """Invariants recomputed by a separate route, for cross-checking only.

    Eigenvectors come from LAPACK (``numpy.linalg.eigh``), reduced matrices
    from explicit index sums over ``|phi><phi|`` and every trace from an
    explicit loop; ``J^s`` is the nested partial trace of ``rho^s``.
    """
    da, db = state.dim_a, state.dim_b
    lam, vecs = np.linalg.eigh(state.rho)
    order = np.argsort(lam)[::-1]
    lam, vecs = lam[order], vecs[:, order]
    keep = lam > tol.eps_zero
    lam, vecs = lam[keep], vecs[:, keep]
    n = lam.size

    rhos = np.zeros((n, da, da), dtype=np.complex128)
    thetas = np.zeros((n, db, db), dtype=np.complex128)
    for i in range(n):
        proj = np.outer(vecs[:, i], vecs[:, i].conj())
        for k in range(da):
            for kp in range(da):
                rhos[i, k, kp] = sum(proj[k * db + l, kp * db + l] for l in range(db))
        for l in range(db):
            for lp in range(db):
                thetas[i, l, lp] = np.conj(sum(proj[k * db + l, k * db + lp] for k in range(da)))

    def tr2(a, b):
        d = a.shape[0]
        return sum(a[p, q] * b[q, p] for p in range(d) for q in range(d))

    def tr3(a, b, c):
        d = a.shape[0]
        return sum(a[p, q] * b[q, r] * c[r, p] for p in range(d) for q in range(d) for r in range(d))

    n_sq = min(da, db) ** 2
    size = max(n_sq, n)
    omega = np.zeros((size, size))
    theta_mat = np.zeros((size, size))
    x = np.zeros((n, n, n), dtype=np.complex128)
    y = np.zeros((n, n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            omega[i, j] = tr2(rhos[i], rhos[j]).real
            theta_mat[i, j] = tr2(thetas[i], thetas[j]).real
            for k in range(n):
                x[i, j, k] = tr3(rhos[i], rhos[j], rhos[k])
                y[i, j, k] = tr3(thetas[i], thetas[j], thetas[k])

    moments = []
    power = np.eye(da * db, dtype=np.complex128)
    for _ in range(n):
        power = power @ state.rho
        t = power.reshape(da, db, da, db)
        over_a = sum(t[k, :, k, :] for k in range(da))
        moments.append(sum(over_a[l, l] for l in range(db)).real)

    return InvariantSet(
        j_moments=np.array(moments),
        omega=omega,
        theta_mat=theta_mat,
        x_tensor=x,
        y_tensor=y,
        n=n,
        n_sq=n_sq,
    )
