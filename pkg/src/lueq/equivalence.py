"""Local-unitary equivalence decisions with constructive witnesses.

Two CHG states are compared through their spectra, ``J^s`` moments and one
invariant pair, either (Omega, X) or (Theta, Y), under every eigenvector
ordering allowed by degenerate eigenvalues. When the invariants agree, a
witness ``(u, w)`` with ``rho' = (u (x) w) rho (u (x) w)^dagger`` is built from
singular value decompositions of the coefficient matrices and checked against
both states before ``Equivalent`` is returned.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import numerics as nx
from .errors import DimensionMismatch, TooManyOrderings, WitnessNotFound
from .invariants import Analysis, analyze
from .numerics import DEFAULT_TOL, Tolerance
from .states import BipartiteState, EigenSystem, TripartiteState, partial_trace_a

log = logging.getLogger(__name__)

DEFAULT_MAX_ORDERINGS = 10_080
MAX_ALIGN_BLOCK = 4
_JOINT_SEED = 0x5EED
_ALS_ITERATIONS = 500
_ENTRY_FLOOR = 1e-6


@dataclass(frozen=True)
class Witness:
    """Local unitaries mapping the first state onto the second.

    ``phases[j]`` is the phase aligning eigenvector ``j`` of the second state
    with ``(u (x) w)`` applied to eigenvector ``j`` of the first (eigenvectors
    carry an arbitrary phase). ``coeff_residual`` is the worst
    ``||A'_j - phases[j] * u A_j w^T||_F``.
    """

    u: np.ndarray
    w: np.ndarray
    residual: float
    coeff_residual: float = 0.0
    phases: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))


@dataclass(frozen=True)
class Verdict:
    kind = "verdict"

    @property
    def is_equivalent(self) -> bool:
        return self.kind == "Equivalent"


@dataclass(frozen=True)
class Equivalent(Verdict):
    witness: Witness | None
    ordering: tuple[int, ...] = ()
    branch: str | None = None
    note: str = ""
    kind = "Equivalent"


@dataclass(frozen=True)
class Inequivalent(Verdict):
    invariant: str
    index: tuple[int, ...]
    value_1: object
    value_2: object
    kind = "Inequivalent"


@dataclass(frozen=True)
class Inconclusive(Verdict):
    reason: str
    diagnostics: dict = field(default_factory=dict)
    kind = "Inconclusive"


@dataclass(frozen=True)
class Conditional(Verdict):
    note: str
    ordering: tuple[int, ...] = ()
    branch: str | None = None
    kind = "Conditional"


# ---------------------------------------------------------------------------
# orderings and invariant comparison


def ordering_candidates(
    es1: EigenSystem,
    es2: EigenSystem,
    tol: Tolerance = DEFAULT_TOL,
    max_orderings: int = DEFAULT_MAX_ORDERINGS,
) -> list[tuple[int, ...]]:
    """Permutations ``perm`` pairing eigenvector ``i`` of ``es1`` with ``perm[i]`` of ``es2``.

    Only indices inside one degeneracy block of ``es1`` are permuted. The
    identity comes first.
    """
    if es1.n != es2.n or np.any(np.abs(es1.lambdas - es2.lambdas) > tol.eps_eig):
        return []
    blocks = es1.degeneracy_blocks
    count = math.prod(math.factorial(len(b)) for b in blocks)
    if count > max_orderings:
        raise TooManyOrderings(f"{count} orderings exceed the cap of {max_orderings}")
    out = []
    for combo in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [0] * es1.n
        for block, image in zip(blocks, combo):
            for i, j in zip(block, image):
                perm[i] = j
        if np.all(np.abs(es1.lambdas - es2.lambdas[perm]) <= tol.eps_eig):
            out.append(tuple(perm))
    return out


def _first_mismatch(a: np.ndarray, b: np.ndarray, eps: float, mask: np.ndarray | None = None):
    diff = np.abs(np.asarray(a) - np.asarray(b))
    bad = diff > eps
    if mask is not None:
        bad &= mask
    if not np.any(bad):
        return None
    idx = tuple(int(i) for i in np.argwhere(bad)[0])
    return idx, a[idx], b[idx]


def _branch_pair(an: Analysis, branch: str, perm=None):
    inv = an.invariants
    if branch == "omega":
        mat, ten = inv.omega_n, inv.x_tensor
    else:
        mat, ten = inv.theta_n, inv.y_tensor
    if perm is not None:
        p = list(perm)
        mat = mat[np.ix_(p, p)]
        ten = ten[np.ix_(p, p, p)]
    return mat, ten


_BRANCH_NAMES = {"omega": ("Omega", "X"), "theta": ("Theta", "Y")}


def compare_branch(an1: Analysis, an2: Analysis, perm, branch: str, tol: Tolerance,
                   restricted: bool = False):
    """First mismatch of the chosen invariant pair under ``perm``, or ``None``.

    With ``restricted`` only index tuples whose eigenvalues all coincide
    (within ``eps_eig``) are compared.
    """
    mat1, ten1 = _branch_pair(an1, branch)
    mat2, ten2 = _branch_pair(an2, branch, perm)
    mat_mask = ten_mask = None
    if restricted:
        lam = an1.eigensystem.lambdas
        same = np.abs(lam[:, None] - lam[None, :]) <= tol.eps_eig
        mat_mask = same
        ten_mask = same[:, :, None] & same[None, :, :]
    name_mat, name_ten = _BRANCH_NAMES[branch]
    hit = _first_mismatch(mat1, mat2, tol.eps_match, mat_mask)
    if hit is not None:
        return (name_mat,) + hit
    hit = _first_mismatch(ten1, ten2, tol.eps_match, ten_mask)
    if hit is not None:
        return (name_ten,) + hit
    return None


def _choose_branch(an1: Analysis, an2: Analysis, force_branch: str | None):
    g1, g2 = an1.genericity, an2.genericity
    omega_ok = g1.omega_nondegenerate and g2.omega_nondegenerate
    theta_ok = g1.theta_nondegenerate and g2.theta_nondegenerate
    if force_branch is not None:
        if force_branch not in _BRANCH_NAMES:
            raise ValueError(f"force_branch must be 'omega' or 'theta', got {force_branch!r}")
        ok = omega_ok if force_branch == "omega" else theta_ok
        return force_branch if ok else None
    if omega_ok:
        return "omega"
    if theta_ok:
        return "theta"
    return None


# ---------------------------------------------------------------------------
# witness extraction


def _cluster_order(tuples: np.ndarray, idxs: list[int], level: int, eps: float) -> list[list[int]]:
    if len(idxs) <= 1 or level == tuples.shape[1]:
        return [idxs]
    ranked = sorted(idxs, key=lambda k: -tuples[k, level])
    runs = [[ranked[0]]]
    for k in ranked[1:]:
        if abs(tuples[runs[-1][-1], level] - tuples[k, level]) <= eps:
            runs[-1].append(k)
        else:
            runs.append([k])
    out = []
    for run in runs:
        out.extend(_cluster_order(tuples, run, level + 1, eps))
    return out


def joint_eigenbasis(family: Sequence[np.ndarray], tol: Tolerance = DEFAULT_TOL,
                     primary: int = 0) -> tuple[np.ndarray, list[list[int]]]:
    """Common eigenbasis of commuting Hermitian matrices in a canonical order.

    A seeded random combination of the family is diagonalised, and any
    eigenspace it leaves degenerate is split with a second combination. The
    basis vectors are ordered by their joint eigenvalues (``family[primary]``
    first, descending, then the others by index), and returned together with
    the clusters of positions whose joint eigenvalues all coincide.
    """
    fam = np.asarray(family, dtype=np.complex128)
    dim = fam.shape[1]
    if fam.shape[0] == 0:
        return nx.identity(dim), [list(range(dim))]
    rng = np.random.default_rng(_JOINT_SEED)
    scale = max(1.0, max(nx.frobenius_norm(f) for f in fam))

    coeffs = rng.uniform(0.5, 1.5, size=fam.shape[0])
    mix = np.einsum("i,iab->ab", coeffs, fam)
    lam, basis = nx.hermitian_eig(mix, tol)
    coeffs2 = rng.uniform(0.5, 1.5, size=fam.shape[0])
    mix2 = np.einsum("i,iab->ab", coeffs2, fam)
    start = 0
    while start < dim:
        stop = start + 1
        while stop < dim and abs(lam[stop] - lam[start]) <= tol.eps_eig * scale:
            stop += 1
        if stop - start > 1:
            sub = basis[:, start:stop]
            _, rot = nx.hermitian_eig(sub.conj().T @ mix2 @ sub, tol)
            basis[:, start:stop] = sub @ rot
        start = stop

    order_keys = [primary] + [j for j in range(fam.shape[0]) if j != primary]
    tuples = np.real(np.einsum("ak,jab,bk->kj", basis.conj(), fam[order_keys], basis))
    clusters = _cluster_order(tuples, list(range(dim)), 0, tol.eps_eig)
    order = [k for c in clusters for k in c]
    remap = {k: pos for pos, k in enumerate(order)}
    return basis[:, order], [[remap[k] for k in c] for c in clusters]


@dataclass
class _Frame:
    u: np.ndarray
    v: np.ndarray
    left_clusters: list[list[int]]
    null_clusters: list[list[int]]
    m: np.ndarray


def _frame(mats: np.ndarray, ref: int, tol: Tolerance) -> _Frame:
    """SVD-like frame of the reference coefficient matrix adapted to the whole family."""
    n, dim_a, dim_b = mats.shape
    rhos = np.einsum("ikl,iml->ikm", mats, mats.conj())
    u, left_clusters = joint_eigenbasis(rhos, tol, primary=ref)
    a_ref = mats[ref]
    cols = a_ref.conj().T @ u
    s = np.linalg.norm(cols, axis=0)
    if s.min() <= math.sqrt(tol.eps_zero):
        raise WitnessNotFound("reference coefficient matrix is not of full row rank")
    v_pos = cols / s

    null = nx.svd(a_ref, tol)[2][:, dim_a:]
    null_clusters: list[list[int]] = []
    if null.shape[1]:
        thetas = np.einsum("ikl,ikm->ilm", mats.conj(), mats)
        compressed = np.einsum("ak,iab,bl->ikl", null.conj(), thetas, null)
        rot, null_clusters = joint_eigenbasis(compressed, tol, primary=ref)
        null = null @ rot
    v = np.column_stack([v_pos, null])
    m = np.einsum("ak,iab,bl->ikl", u.conj(), mats, v)
    return _Frame(u, v, left_clusters, null_clusters, m)


def _propagate_phases(m1: np.ndarray, m2: np.ndarray, dim_a: int, ref: int,
                      null_singletons: Sequence[int] = ()):
    """Phase part of ``m2_j = e^{i a_j} X m1_j Y`` for diagonal ``X`` and ``Y``.

    On the square block ``Y = X^dagger``; on null columns listed in
    ``null_singletons`` ``Y`` carries its own phase ``z_l``. Every entry above
    the floor gives one linear relation between the angles, e.g.
    ``a_j + x_k - x_c = arg(m2 / m1)``. Relations are used from the largest
    entries down, each time a single unknown is left. Returns the phase
    vectors ``(e^{i a}, e^{i x}, {l: e^{i z_l}})``; unconstrained angles are 0.
    """
    n = m1.shape[0]
    known = {("a", ref): 0.0, ("x", 0): 0.0}
    eqs = []
    cols = [(c, "pos") for c in range(dim_a)] + [(l, "null") for l in null_singletons]
    for j in range(n):
        for k in range(dim_a):
            for c, kind in cols:
                mag = abs(m1[j, k, c])
                if mag <= _ENTRY_FLOOR or abs(m2[j, k, c]) <= _ENTRY_FLOOR:
                    continue
                if kind == "null":
                    terms = ((("a", j), 1), (("x", k), 1), (("z", c), 1))
                elif k == c:
                    terms = ((("a", j), 1),)
                else:
                    terms = ((("a", j), 1), (("x", k), 1), (("x", c), -1))
                eqs.append((mag, terms, float(np.angle(m2[j, k, c] / m1[j, k, c]))))
    eqs.sort(key=lambda e: -e[0])

    pending = eqs
    while pending:
        rest = []
        progress = False
        for eq in pending:
            _, terms, phi = eq
            unknown = [(key, sign) for key, sign in terms if key not in known]
            if not unknown:
                continue
            if len(unknown) > 1:
                rest.append(eq)
                continue
            key, sign = unknown[0]
            partial = sum(sgn * known[k] for k, sgn in terms if k in known)
            known[key] = sign * (phi - partial)
            progress = True
        if not progress and rest:
            # Every remaining relation has two unknowns: one of them is free.
            key = next(k for k, _ in rest[0][1] if k not in known)
            known[key] = 0.0
        pending = rest

    alpha = np.exp(1j * np.array([known.get(("a", j), 0.0) for j in range(n)]))
    x = np.exp(1j * np.array([known.get(("x", k), 0.0) for k in range(dim_a)]))
    z = {l: np.exp(1j * known[("z", l)]) for l in null_singletons if ("z", l) in known}
    return alpha, x, z


def _procrustes_blocks(lhs: np.ndarray, rhs: np.ndarray, clusters: list[list[int]], tol) -> np.ndarray:
    """Block-diagonal unitary ``Y`` minimising ``||lhs @ Y - rhs||`` over the given column clusters."""
    size = lhs.shape[1]
    y = np.zeros((size, size), dtype=np.complex128)
    for c in clusters:
        block = lhs[:, c].conj().T @ rhs[:, c]
        if nx.frobenius_norm(block) == 0.0:
            y[np.ix_(c, c)] = np.eye(len(c))
        else:
            y[np.ix_(c, c)] = nx.polar_unitary(block, tol)
    return y


def _gauge_residual(m1, m2, phases, x, y) -> float:
    pred = np.einsum("j,ab,jbc,cd->jad", phases, x, m1, y)
    return max(nx.frobenius_norm(m2[j] - pred[j]) for j in range(m1.shape[0]))


def _solve_gauge(f1: _Frame, f2: _Frame, dim_a: int, ref: int, tol: Tolerance):
    m1, m2 = f1.m, f2.m
    n, _, dim_b = m1.shape
    null_clusters = [[dim_a + k for k in c] for c in f1.null_clusters]

    singletons = [c[0] for c in null_clusters if len(c) == 1]
    phases, xdiag, z = _propagate_phases(m1, m2, dim_a, ref, singletons)
    x = np.diag(xdiag)
    y = np.zeros((dim_b, dim_b), dtype=np.complex128)
    y[:dim_a, :dim_a] = x.conj().T
    for l, phase in z.items():
        y[l, l] = phase
    open_clusters = [c for c in null_clusters if not (len(c) == 1 and c[0] in z)]
    if open_clusters:
        lhs = np.concatenate([phases[j] * (x @ m1[j]) for j in range(n)])
        rhs = np.concatenate([m2[j] for j in range(n)])
        fitted = _procrustes_blocks(lhs, rhs, open_clusters, tol)
        for c in open_clusters:
            y[np.ix_(c, c)] = fitted[np.ix_(c, c)]
    res = _gauge_residual(m1, m2, phases, x, y)
    if res <= 0.1 * tol.eps_match:
        return phases, x, y

    if max(len(c) for c in f1.left_clusters + f1.null_clusters + [[0]]) > MAX_ALIGN_BLOCK:
        return phases, x, y
    # Alternating Procrustes over block-diagonal X, Y and the phases.
    left = f1.left_clusters
    right = [list(c) for c in left] + null_clusters
    for _ in range(_ALS_ITERATIONS):
        my = np.einsum("jab,bc->jac", m1, y)
        phases = np.exp(1j * np.angle(np.einsum("ab,jbc,jac->j", x, my, m2.conj()).conj()))
        lhs_x = np.concatenate([phases[j] * my[j] for j in range(n)], axis=1).conj().T
        rhs_x = np.concatenate([m2[j] for j in range(n)], axis=1).conj().T
        x = _procrustes_blocks(lhs_x, rhs_x, left, tol).conj().T
        xm = np.einsum("ab,jbc->jac", x, m1)
        lhs_y = np.concatenate([phases[j] * xm[j] for j in range(n)])
        rhs_y = np.concatenate([m2[j] for j in range(n)])
        y = _procrustes_blocks(lhs_y, rhs_y, right, tol)
        new = _gauge_residual(m1, m2, phases, x, y)
        if new <= 0.1 * tol.eps_match or abs(res - new) < 1e-15:
            res = new
            break
        res = new
    return phases, x, y


def _reference_index(mats: np.ndarray, tol: Tolerance) -> int:
    best, best_gap = 0, -1.0
    for j, a in enumerate(mats):
        s = nx.singular_values(a, tol)
        gap = min(np.min(-np.diff(s)) if s.size > 1 else np.inf, s[-1])
        if gap > best_gap + 1e-12:
            best, best_gap = j, gap
    return best


def _density(es: EigenSystem) -> np.ndarray:
    return (es.phis * es.lambdas) @ es.phis.conj().T


def witness_residual(rho1: np.ndarray, rho2: np.ndarray, u: np.ndarray, w: np.ndarray) -> float:
    k = np.kron(u, w)
    return nx.frobenius_norm(rho2 - k @ rho1 @ k.conj().T)


def coefficient_alignment(mats1: np.ndarray, mats2: np.ndarray, u: np.ndarray, w: np.ndarray):
    """Per-eigenvector phases and the worst ``||A'_j - phase_j * u A_j w^T||_F``."""
    mapped = np.einsum("ab,jbc,dc->jad", u, mats1, w)
    overlaps = np.einsum("jab,jab->j", mapped.conj(), mats2)
    phases = np.where(np.abs(overlaps) > 0, overlaps / np.maximum(np.abs(overlaps), 1e-300), 1.0)
    worst = max(nx.frobenius_norm(mats2[j] - phases[j] * mapped[j]) for j in range(mats1.shape[0]))
    return phases, worst


def extract_witness(es1: EigenSystem, es2: EigenSystem, ordering: Sequence[int],
                    tol: Tolerance = DEFAULT_TOL) -> Witness:
    """Build ``(u, w)`` with ``A'_j = e^{i a_j} u A_j w^T`` for every ``j``.

    Raises :class:`WitnessNotFound` when the singular values of some pair
    ``A_j, A'_j`` differ or when no candidate passes verification.
    """
    a1 = es1.coeff_mats
    a2 = es2.coeff_mats[list(ordering)]
    n, dim_a, dim_b = a1.shape
    for j in range(n):
        s1 = nx.singular_values(a1[j], tol)
        s2 = nx.singular_values(a2[j], tol)
        if np.max(np.abs(s1 - s2)) > tol.eps_match:
            raise WitnessNotFound(f"singular values of coefficient matrix {j + 1} differ")

    ref = _reference_index(a1, tol)
    candidates = []

    # The bare construction from one reference SVD.
    u1, _, v1 = nx.svd(a1[ref], tol)
    u2, _, v2 = nx.svd(a2[ref], tol)
    candidates.append((u2 @ u1.conj().T, v1 @ v2.conj().T))

    if dim_a <= dim_b:
        f1 = _frame(a1, ref, tol)
        f2 = _frame(a2, ref, tol)
        _, x, y = _solve_gauge(f1, f2, dim_a, ref, tol)
        candidates.append((f2.u @ x @ f1.u.conj().T, f1.v @ y @ f2.v.conj().T))

    rho1 = _density(es1)
    rho2 = _density(es2)
    best = None
    for u, wt in candidates:
        phases, coeff_res = coefficient_alignment(a1, a2, u, wt.T)
        if best is None or coeff_res < best[2]:
            best = (u, wt.T, coeff_res, phases)
        if coeff_res <= tol.eps_match:
            break
    u, w, coeff_res, phases = best
    if coeff_res > tol.eps_match:
        raise WitnessNotFound(f"best alignment leaves coefficient residual {coeff_res:.3e}")
    return Witness(u=u, w=w, residual=witness_residual(rho1, rho2, u, w),
                   coeff_residual=coeff_res, phases=phases)


# ---------------------------------------------------------------------------
# decisions


def _spectral_checks(an1: Analysis, an2: Analysis, tol: Tolerance) -> Inequivalent | None:
    es1, es2 = an1.eigensystem, an2.eigensystem
    if es1.n != es2.n:
        return Inequivalent("rank", (), es1.n, es2.n)
    hit = _first_mismatch(an1.invariants.j_moments, an2.invariants.j_moments, tol.eps_match)
    if hit is not None:
        (s,), v1, v2 = hit
        return Inequivalent("J^s", (s,), float(v1), float(v2))
    hit = _first_mismatch(es1.lambdas, es2.lambdas, tol.eps_eig)
    if hit is not None:
        (i,), v1, v2 = hit
        return Inequivalent("spectrum", (i,), float(v1), float(v2))
    return None


def _chg_gate(an1: Analysis, an2: Analysis, tol: Tolerance) -> Verdict | None:
    g1, g2 = an1.genericity, an2.genericity
    if g1.chg and g2.chg:
        return None
    nondegenerate = not (an1.eigensystem.is_degenerate or an2.eigensystem.is_degenerate)
    if g1.chg != g2.chg and nondegenerate:
        # The class is fixed by the (unique) eigenvectors, hence LU-invariant.
        # Prefer naming a concrete invariant entry that differs.
        ident = tuple(range(an1.eigensystem.n))
        for branch in ("omega", "theta"):
            hit = compare_branch(an1, an2, ident, branch, tol)
            if hit is not None:
                return Inequivalent(*hit)
        return Inequivalent("classification", (), g1.label.value, g2.label.value)
    return Inconclusive(
        "state is not CHG",
        {"class_1": g1.label.value, "class_2": g2.label.value},
    )


def _search(an1: Analysis, an2: Analysis, branch: str, tol: Tolerance, max_orderings: int,
            restricted: bool, on_match):
    """Run ``on_match(perm)`` for each ordering whose invariants agree.

    Returns ``(result, last_mismatch, matched_any)``: ``result`` is the first
    non-``None`` value of ``on_match``.
    """
    es1, es2 = an1.eigensystem, an2.eigensystem
    last = None
    matched = False
    for perm in ordering_candidates(es1, es2, tol, max_orderings):
        mismatch = compare_branch(an1, an2, perm, branch, tol, restricted)
        if mismatch is not None:
            last = mismatch
            continue
        matched = True
        result = on_match(perm)
        if result is not None:
            return result, last, matched
    return None, last, matched


def _exhausted(an1: Analysis, an2: Analysis, last, matched: bool, what: str) -> Verdict:
    if matched:
        log.warning("invariants agree under some ordering but %s failed", what)
        return Inconclusive(f"invariants agree but {what} failed for every ordering")
    if an1.eigensystem.is_degenerate or an2.eigensystem.is_degenerate:
        return Inconclusive(
            "degenerate spectrum: no eigenvector ordering matches, but the basis inside "
            "a degenerate eigenspace is not canonical",
            {"last_mismatch": _mismatch_dict(last)},
        )
    if last is None:
        return Inconclusive("no admissible eigenvector ordering")
    name, idx, v1, v2 = last
    return Inequivalent(name, idx, v1, v2)


def _mismatch_dict(last):
    if last is None:
        return None
    name, idx, v1, v2 = last
    return {"invariant": name, "index": list(idx), "value_1": v1, "value_2": v2}


def decide_bipartite(
    s1: BipartiteState,
    s2: BipartiteState,
    tol: Tolerance = DEFAULT_TOL,
    force_branch: str | None = None,
    max_orderings: int = DEFAULT_MAX_ORDERINGS,
    full_rank: str = "all",
) -> Verdict:
    """Decide whether two bipartite states are related by a local unitary."""
    if s1.dims != s2.dims:
        raise DimensionMismatch(f"states have different dimensions {s1.dims} and {s2.dims}")
    an1 = analyze(s1, tol, full_rank)
    an2 = analyze(s2, tol, full_rank)
    return decide_analyzed(an1, an2, tol, force_branch, max_orderings)


def decide_analyzed(an1: Analysis, an2: Analysis, tol: Tolerance = DEFAULT_TOL,
                    force_branch: str | None = None,
                    max_orderings: int = DEFAULT_MAX_ORDERINGS) -> Verdict:
    early = _spectral_checks(an1, an2, tol) or _chg_gate(an1, an2, tol)
    if early is not None:
        return early
    branch = _choose_branch(an1, an2, force_branch)
    if branch is None:
        return Inconclusive(
            "no metric tensor is non-degenerate on both states"
            + (f" for branch {force_branch!r}" if force_branch else ""),
            {"det_omega": [an1.genericity.det_omega, an2.genericity.det_omega],
             "det_theta": [an1.genericity.det_theta, an2.genericity.det_theta]},
        )

    rho1, rho2 = an1.state.rho, an2.state.rho

    def attempt(perm):
        try:
            wit = extract_witness(an1.eigensystem, an2.eigensystem, perm, tol)
        except WitnessNotFound as exc:
            log.debug("ordering %s: %s", perm, exc)
            return None
        residual = witness_residual(rho1, rho2, wit.u, wit.w)
        if residual > tol.eps_match:
            return None
        wit = Witness(wit.u, wit.w, residual, wit.coeff_residual, wit.phases)
        return Equivalent(wit, tuple(perm), branch)

    result, last, matched = _search(an1, an2, branch, tol, max_orderings, False, attempt)
    if result is not None:
        return result
    return _exhausted(an1, an2, last, matched, "witness extraction")


def decide_tripartite(
    t1: TripartiteState,
    t2: TripartiteState,
    tol: Tolerance = DEFAULT_TOL,
    external_family: Callable[[TripartiteState], Sequence[float]] | None = None,
    restricted: bool = False,
    force_branch: str | None = None,
    max_orderings: int = DEFAULT_MAX_ORDERINGS,
) -> Verdict:
    """Tripartite pure states via their reductions to B (x) C.

    The reduced states must be CHG. Omega/X (or Theta/Y) are compared over
    admissible orderings, on all index tuples or, with ``restricted``, only on
    tuples of equal eigenvalue. ``external_family`` supplies the remaining
    invariant family; without it a passing pair is ``Conditional``.
    """
    if t1.dims != t2.dims:
        raise DimensionMismatch(f"states have different dimensions {t1.dims} and {t2.dims}")
    an1 = analyze(partial_trace_a(t1, tol), tol)
    an2 = analyze(partial_trace_a(t2, tol), tol)
    early = _spectral_checks(an1, an2, tol) or _chg_gate(an1, an2, tol)
    if early is not None:
        return early
    branch = _choose_branch(an1, an2, force_branch)
    if branch is None:
        return Inconclusive("no metric tensor is non-degenerate on both reduced states")

    result, last, matched = _search(an1, an2, branch, tol, max_orderings, restricted,
                                    lambda perm: tuple(perm))
    if result is None:
        return _exhausted(an1, an2, last, matched, "ordering search")
    perm = result
    if external_family is None:
        return Conditional(
            "implemented invariants agree; the external invariant family was not evaluated",
            perm,
            branch,
        )
    ext1 = np.asarray(external_family(t1), dtype=float)
    ext2 = np.asarray(external_family(t2), dtype=float)
    if ext1.shape != ext2.shape:
        return Inequivalent("I^A", (), ext1.size, ext2.size)
    hit = _first_mismatch(ext1, ext2, tol.eps_match)
    if hit is not None:
        idx, v1, v2 = hit
        return Inequivalent("I^A", idx, float(v1), float(v2))
    return Equivalent(None, perm, branch, note="tripartite: no witness is constructed")
