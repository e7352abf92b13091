"""Dense complex linear algebra for the small matrices used throughout lueq.

Matrices are plain ``numpy`` complex arrays. The eigensolver (cyclic Jacobi)
and the SVD built on top of it are implemented here rather than delegated to
LAPACK, so that results are deterministic and the phase conventions are under
our control.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonHermitian, NonSquare

DEFAULT_EPS_ZERO = 1e-9
DEFAULT_EPS_EIG = 1e-7
DEFAULT_EPS_MATCH = 1e-8

_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Tolerance:
    """Thresholds turning exact conditions into numerical ones.

    eps_zero
        absolute threshold for "numerically zero" (eigenvalue cut, determinants,
        commutator norms, rank).
    eps_eig
        gap below which two eigenvalues count as degenerate.
    eps_match
        tolerance for comparing invariants and for accepting a witness.
    """

    eps_zero: float = DEFAULT_EPS_ZERO
    eps_eig: float = DEFAULT_EPS_EIG
    eps_match: float = DEFAULT_EPS_MATCH

    def __post_init__(self):
        for name in ("eps_zero", "eps_eig", "eps_match"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.eps_zero > self.eps_match:
            raise ValueError("eps_zero must not exceed eps_match")


DEFAULT_TOL = Tolerance()


def as_matrix(m) -> np.ndarray:
    """Convert to a 2-d complex128 array, rejecting NaN/Inf."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m) -> np.ndarray:
    return np.conj(as_matrix(m)).T


def matmul(a, b) -> np.ndarray:
    return as_matrix(a) @ as_matrix(b)


def trace(m) -> complex:
    return complex(np.trace(_square(m)))


def frobenius_norm(m) -> float:
    a = np.asarray(m, dtype=np.complex128)
    return float(np.sqrt(np.sum(a.real**2 + a.imag**2)))


def commutator(a, b) -> np.ndarray:
    a = _square(a)
    b = _square(b)
    if a.shape != b.shape:
        raise NonSquare(f"commutator of mismatched shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def det(m) -> complex:
    """Determinant by LU factorisation with partial pivoting."""
    a = _square(m).copy()
    n = a.shape[0]
    result = 1.0 + 0.0j
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0:
            return 0.0j
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            result = -result
        result *= a[col, col]
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= np.outer(factors, a[col, col:])
    return complex(result)


def hermitian_eig(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as orthonormal columns, so that
    ``m == V @ diag(lam) @ V^dagger``.
    """
    a = _square(m)
    scale = frobenius_norm(a)
    if frobenius_norm(a - a.conj().T) > tol.eps_zero * max(1.0, scale):
        raise NonHermitian("matrix is not Hermitian within eps_zero")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = identity(n)
    if n == 1 or scale == 0.0:
        return _sorted_eig(np.real(np.diag(a)).copy(), v)

    # Off-diagonal mass below this is indistinguishable from round-off.
    threshold = (1e-15 * scale) ** 2
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sum(np.abs(a - np.diag(np.diag(a))) ** 2)
        if off <= threshold:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = a[p, q]
                mag = abs(g)
                if mag == 0.0 or mag**2 <= threshold / (n * n):
                    continue
                rotated = True
                phase = g / mag
                app = a[p, p].real
                aqq = a[q, q].real
                zeta = (aqq - app) / (2.0 * mag)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(zeta * zeta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # Phase rotation on q makes the (p, q) entry real; then a real
                # Jacobi rotation annihilates it.
                rot = np.array(
                    [[c, s], [-s * np.conj(phase), c * np.conj(phase)]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot
        if not rotated:
            break
    return _sorted_eig(np.real(np.diag(a)).copy(), v)


def _sorted_eig(lam: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-lam, kind="stable")
    return lam[order], v[:, order]


def _orthonormal_completion(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full unitary by Gram-Schmidt on e_1, e_2, ..."""
    basis = [cols[:, k] for k in range(cols.shape[1])]
    for k in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        for _ in range(2):
            for b in basis:
                e = e - b * np.vdot(b, e)
        norm = np.linalg.norm(e)
        if norm > 1e-6:
            basis.append(e / norm)
    return np.column_stack(basis) if basis else np.zeros((dim, 0), dtype=np.complex128)


def _gram_schmidt(cols: np.ndarray) -> np.ndarray:
    out = cols.copy()
    for k in range(out.shape[1]):
        for _ in range(2):
            for j in range(k):
                out[:, k] -= out[:, j] * np.vdot(out[:, j], out[:, k])
        out[:, k] /= np.linalg.norm(out[:, k])
    return out


def svd(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``m = U @ diag(s) @ V^dagger`` built on :func:`hermitian_eig`.

    ``U`` is ``rows x rows``, ``V`` is ``cols x cols`` and ``s`` holds the
    ``min(rows, cols)`` singular values in descending order. The phase of every
    right-singular vector is fixed by making its largest-magnitude entry real
    and positive (the matching left vector absorbs the same phase).
    """
    a = as_matrix(m)
    u, s, v = _svd_deflate(a, tol)
    order = np.argsort(-s, kind="stable")
    k = s.size
    s = s[order]
    u[:, :k] = u[:, order]
    v[:, :k] = v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        big = int(np.argmax(np.abs(col)))
        if col[big] == 0:
            continue
        phase = abs(col[big]) / col[big]
        v[:, j] = col * phase
        v[big, j] = abs(col[big])
        if j < k:
            u[:, j] = u[:, j] * phase
    return u, s, v


def _svd_deflate(a: np.ndarray, tol: Tolerance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = a.shape
    k = min(rows, cols)
    if k == 0 or frobenius_norm(a) == 0.0:
        return identity(rows), np.zeros(k), identity(cols)

    lam, v = hermitian_eig(a.conj().T @ a, tol)
    c = a @ v
    norms = np.linalg.norm(c, axis=0)
    # Columns of a v with norm well above sqrt(machine eps) * s_max give
    # accurate left vectors; the remainder is deflated and solved recursively.
    resolved = int(np.sum(norms[:k] > 1e-4 * norms[0]))
    u_lead = _gram_schmidt(c[:, :resolved])
    s_lead = norms[:resolved]
    u = _orthonormal_completion(u_lead, rows)
    if resolved == k:
        return u, s_lead, v
    u_rest = u[:, resolved:]
    v_rest = v[:, resolved:]
    tail = u_rest.conj().T @ a @ v_rest
    ut, st, vt = _svd_deflate(tail, tol)
    u = np.column_stack([u_lead, u_rest @ ut])
    v = np.column_stack([v[:, :resolved], v_rest @ vt])
    return u, np.concatenate([s_lead, st]), v


def singular_values(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    return svd(m, tol)[1]


def rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above ``eps_zero * s_max``."""
    s = singular_values(m, tol)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.eps_zero * s[0]))


def is_unitary(m, atol: float = 1e-10) -> bool:
    a = _square(m)
    return frobenius_norm(a.conj().T @ a - identity(a.shape[0])) <= atol


def polar_unitary(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unitary factor of the polar decomposition (orthogonal Procrustes solution)."""
    u, _, v = svd(m, tol)
    k = min(m.shape)
    if m.shape[0] == m.shape[1]:
        return u @ v.conj().T
    return u[:, :k] @ v[:, :k].conj().T
