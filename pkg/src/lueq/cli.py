"""``lueq`` command line: invariants, classify, equiv, gen.

Exit codes: 0 Equivalent (or success), 1 Inequivalent, 2 malformed input or
bad parameters, 3 state validation failure, 4 Inconclusive, 5 Conditional,
6 too many orderings, 7 generation failed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .equivalence import DEFAULT_MAX_ORDERINGS, decide_bipartite, decide_tripartite
from .errors import GenerationFailed, LueqError, StateValidationError, TooManyOrderings
from .invariants import analyze
from .numerics import DEFAULT_EPS_EIG, DEFAULT_EPS_MATCH, DEFAULT_EPS_ZERO, Tolerance
from .states import BipartiteState, local_apply_pure, local_conjugate, partial_trace_a
from .testkit import (
    as_rng,
    haar_unitary,
    perturb_nonlocal,
    random_chg_state,
    random_chg_tripartite,
)

EXIT_OK = 0
EXIT_CODES = {
    "Equivalent": 0,
    "Inequivalent": 1,
    "Inconclusive": 4,
    "Conditional": 5,
}
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_TOO_MANY = 6
EXIT_GEN_FAILED = 7
TEXT_LIMIT = 6
ENV_TOL_ZERO = "LUEQ_TOL_ZERO"


class UsageError(LueqError):
    pass


def _tolerance(args) -> Tolerance:
    zero = args.tol_zero
    if zero is None:
        env = os.environ.get(ENV_TOL_ZERO)
        if env:
            try:
                zero = float(env)
            except ValueError as exc:
                raise UsageError(f"{ENV_TOL_ZERO} is not a number: {env!r}") from exc
    try:
        return Tolerance(
            eps_zero=DEFAULT_EPS_ZERO if zero is None else zero,
            eps_eig=DEFAULT_EPS_EIG if args.tol_eig is None else args.tol_eig,
            eps_match=DEFAULT_EPS_MATCH if args.tol_match is None else args.tol_match,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _fmt(z) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _matrix_lines(name: str, m, full: bool) -> list[str]:
    m = np.asarray(m)
    size = m.shape[0] if full else min(m.shape[0], TEXT_LIMIT)
    lines = [f"{name}[{i + 1}][{j + 1}] = {_fmt(m[i, j])}"
             for i in range(size) for j in range(m.shape[1] if full else min(m.shape[1], TEXT_LIMIT))]
    if size < m.shape[0] or (not full and m.shape[1] > TEXT_LIMIT):
        lines.append(f"{name}: showing leading {size}x{size} of {m.shape[0]}x{m.shape[1]} (use --full)")
    return lines


def _tensor_lines(name: str, t, full: bool) -> list[str]:
    n = t.shape[0]
    size = n if full else min(n, TEXT_LIMIT)
    lines = [f"{name}[{i + 1}][{j + 1}][{k + 1}] = {_fmt(t[i, j, k])}"
             for i in range(size) for j in range(size) for k in range(size)]
    if size < n:
        lines.append(f"{name}: showing leading {size}x{size}x{size} of {n}x{n}x{n} (use --full)")
    return lines


def _class_lines(an) -> list[str]:
    g = an.genericity
    return [
        f"class: {g.label.value}",
        f"generic: {g.generic}",
        f"high_generic: {g.high_generic}",
        f"chg: {g.chg}",
        f"det Omega_n = {_fmt(g.det_omega)}",
        f"det Theta_n = {_fmt(g.det_theta)}",
        f"max commutator = {_fmt(g.max_commutator)}",
        f"min rank rho_i = {g.min_rho_rank}",
    ]


def _invariant_lines(an, full: bool) -> list[str]:
    inv = an.invariants
    lines = [f"dims: {an.state.dim_a}x{an.state.dim_b}", f"rank: {an.eigensystem.n}"]
    lines += [f"lambda[{i + 1}] = {_fmt(v)}" for i, v in enumerate(an.eigensystem.lambdas)]
    lines += _class_lines(an)
    lines += [f"J^{s + 1} = {_fmt(v)}" for s, v in enumerate(inv.j_moments)]
    lines += _matrix_lines("Omega", inv.omega, full)
    lines += _matrix_lines("Theta", inv.theta_mat, full)
    lines += _tensor_lines("X", inv.x_tensor, full)
    lines += _tensor_lines("Y", inv.y_tensor, full)
    return lines


def _load(path, tol):
    """Read a state file; tripartite states are analysed through Tr_A."""
    state, label = io.read_state(path, tol)
    if isinstance(state, BipartiteState):
        return state, analyze(state, tol), label, io.BIPARTITE
    return state, analyze(partial_trace_a(state, tol), tol), label, io.TRIPARTITE


def cmd_invariants(args, out) -> int:
    tol = _tolerance(args)
    _, an, label, kind = _load(args.file, tol)
    if args.json:
        out.write(io.dumps_report(io.analysis_report(an, label, kind)))
    else:
        lines = ([f"label: {label}"] if label else []) + _invariant_lines(an, args.full)
        out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_classify(args, out) -> int:
    tol = _tolerance(args)
    _, an, label, kind = _load(args.file, tol)
    if args.json:
        rep = io.analysis_report(an, label, kind)
        keep = ("schema", "label", "source_kind", "dims", "rank", "eigenvalues", "classification")
        out.write(io.dumps_report({k: rep[k] for k in keep}))
    else:
        out.write("\n".join(_class_lines(an)) + "\n")
    return EXIT_OK


def _verdict_lines(verdict, full: bool) -> list[str]:
    rep = io.verdict_report(verdict)
    lines = [f"verdict: {verdict.kind}"]
    if verdict.kind == "Inequivalent":
        idx = "".join(f"[{i}]" for i in rep["index"])
        lines.append(f"first mismatch: {rep['invariant']}{idx}: {rep['value_1']} vs {rep['value_2']}")
    elif verdict.kind == "Inconclusive":
        lines.append(f"reason: {rep['reason']}")
        lines += [f"{k}: {v}" for k, v in rep["diagnostics"].items()]
    else:
        lines.append(f"branch: {rep['branch']}")
        lines.append(f"ordering: {rep['ordering']}")
        if rep.get("note"):
            lines.append(f"note: {rep['note']}")
        wit = getattr(verdict, "witness", None)
        if wit is not None:
            lines.append(f"residual = {wit.residual:.3e}")
            lines.append(f"coefficient residual = {wit.coeff_residual:.3e}")
            lines += _matrix_lines("u", wit.u, full)
            lines += _matrix_lines("w", wit.w, full)
    return lines


def cmd_equiv(args, out) -> int:
    tol = _tolerance(args)
    s1, an1, label1, kind1 = _load(args.file1, tol)
    s2, an2, label2, kind2 = _load(args.file2, tol)
    if kind1 != kind2:
        raise UsageError(f"cannot compare a {kind1} file with a {kind2} file")
    if s1.dims != s2.dims:
        raise UsageError(f"dimension mismatch: {list(s1.dims)} vs {list(s2.dims)}")
    if kind1 == io.BIPARTITE:
        verdict = decide_bipartite(s1, s2, tol, args.force_branch, args.max_orderings)
    else:
        verdict = decide_tripartite(s1, s2, tol, restricted=args.restricted,
                                    force_branch=args.force_branch,
                                    max_orderings=args.max_orderings)
    if args.json:
        rep = io.pair_report(verdict, io.analysis_report(an1, label1, kind1),
                             io.analysis_report(an2, label2, kind2))
        out.write(io.dumps_report(rep))
    else:
        out.write("\n".join(_verdict_lines(verdict, args.full)) + "\n")
    return EXIT_CODES[verdict.kind]


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--dims must be comma-separated integers, got {text!r}") from exc
    if len(dims) not in (2, 3) or min(dims) < 1:
        raise UsageError("--dims needs 2 or 3 positive integers")
    return dims


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.json'}")


def cmd_gen(args, out) -> int:
    tol = _tolerance(args)
    dims = _parse_dims(args.dims)
    rank = args.rank
    bip = len(dims) == 2
    limit = min(dims) ** 2 if bip else min(dims[1], dims[2]) ** 2
    if not 1 <= rank <= limit:
        raise UsageError(f"rank must lie in 1..{limit} for dims {args.dims}")
    if not bip and rank > dims[0]:
        raise UsageError(f"rank of the reduced state cannot exceed dim_a = {dims[0]}")
    if not 0 < args.magnitude < 1:
        raise UsageError("--magnitude must lie strictly between 0 and 1")
    if args.kind != "chg" and args.out is None:
        raise UsageError(f"--kind {args.kind} writes several files and needs --out")

    rng = as_rng(args.seed)
    tag = f"chg dims={args.dims} rank={rank} seed={args.seed}"
    try:
        if bip:
            state = random_chg_state(dims[0], dims[1], rank, rng, tol=tol)
        else:
            state = random_chg_tripartite(*dims, rank, rng, tol=tol)
    except ValueError as exc:
        if isinstance(exc, LueqError):
            raise
        raise UsageError(str(exc)) from exc

    files: list[tuple[Path | None, str]] = [(args.out, io.dumps_state(state, tag))]
    if args.kind == "haar-pair":
        unitaries = [haar_unitary(d, rng) for d in dims]
        if bip:
            other = local_conjugate(state, *unitaries, tol)
        else:
            other = local_apply_pure(state, *unitaries)
        files.append((_sibling(args.out, "lu"), io.dumps_state(other, tag + " local-unitary conjugate")))
        files.append((_sibling(args.out, "uw"), io.dumps_unitaries(unitaries)))
    elif args.kind == "perturbed":
        if not bip:
            raise UsageError("--kind perturbed needs bipartite --dims")
        other = perturb_nonlocal(state, args.magnitude, rng, tol)
        files.append((_sibling(args.out, "perturbed"),
                      io.dumps_state(other, f"{tag} perturbed magnitude={args.magnitude}")))
    for path, text in files:
        if path is None:
            out.write(text)
        else:
            Path(path).write_text(text)
    return EXIT_OK


def _add_tolerances(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-zero", type=float, default=None,
                   help=f"eps_zero (default {DEFAULT_EPS_ZERO:g}, or ${ENV_TOL_ZERO})")
    p.add_argument("--tol-eig", type=float, default=None, help=f"eps_eig (default {DEFAULT_EPS_EIG:g})")
    p.add_argument("--tol-match", type=float, default=None,
                   help=f"eps_match (default {DEFAULT_EPS_MATCH:g})")


def _add_output(p: argparse.ArgumentParser) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="emit a JSON report")
    fmt.add_argument("--text", dest="json", action="store_false", help="emit text (default)")
    p.add_argument("--full", action="store_true", help="do not truncate matrices above 6x6")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lueq", description="Local-unitary invariants and equivalence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", help="print the invariants and classification of a state")
    p.add_argument("file")
    _add_tolerances(p)
    _add_output(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("classify", help="print the genericity class of a state")
    p.add_argument("file")
    _add_tolerances(p)
    _add_output(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("equiv", help="decide local-unitary equivalence of two states")
    p.add_argument("file1")
    p.add_argument("file2")
    _add_tolerances(p)
    _add_output(p)
    p.add_argument("--force-branch", choices=["omega", "theta"], default=None)
    p.add_argument("--max-orderings", type=int, default=DEFAULT_MAX_ORDERINGS)
    p.add_argument("--restricted", action="store_true",
                   help="tripartite: compare only index tuples of equal eigenvalue")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("gen", help="write seeded test states")
    p.add_argument("--dims", required=True, help="e.g. 2,2 or 2,2,3 for a tripartite pure state")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=["chg", "haar-pair", "perturbed"], default="chg")
    p.add_argument("--magnitude", type=float, default=0.3, help="perturbation strength")
    p.add_argument("--out", type=Path, default=None)
    _add_tolerances(p)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage and 0 for --help.
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except io.MalformedFile as exc:
        print(f"lueq: malformed input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateValidationError as exc:
        print(f"lueq: invalid state ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TooManyOrderings as exc:
        print(f"lueq: {exc}", file=sys.stderr)
        return EXIT_TOO_MANY
    except GenerationFailed as exc:
        print(f"lueq: generation failed: {exc}", file=sys.stderr)
        return EXIT_GEN_FAILED
    except LueqError as exc:
        print(f"lueq: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
