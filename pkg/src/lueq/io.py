"""State files and JSON reports.

State files store complex numbers as ``[re, im]`` pairs of plain JSON numbers.
Python writes floats with the shortest repr that round-trips, so
write-then-read reproduces every double bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import numerics as nx
from .equivalence import Conditional, Equivalent, Inconclusive, Inequivalent, Verdict
from .errors import LueqError
from .invariants import Analysis
from .numerics import DEFAULT_TOL, Tolerance
from .states import BipartiteState, TripartiteState, validate, validate_pure

SCHEMA = 1
BIPARTITE = "bipartite_density"
TRIPARTITE = "tripartite_pure"
UNITARIES = "local_unitaries"

_LAYOUT = {
    BIPARTITE: "data is rho in row-major order as [re, im] pairs; composite index k*dim_b + l "
               "for basis |k>_A |l>_B",
    TRIPARTITE: "data is psi as [re, im] pairs; composite index (a*dim_b + b)*dim_c + c "
                "for basis |a>_A |b>_B |c>_C",
    UNITARIES: "each matrix in row-major order as [re, im] pairs",
}


class MalformedFile(LueqError, ValueError):
    """A file is not valid JSON or does not follow the expected layout."""


def encode_complex(values) -> list[list[float]]:
    flat = np.asarray(values, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def decode_complex(pairs, count: int | None = None) -> np.ndarray:
    try:
        arr = np.array(pairs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedFile(f"data is not an array of [re, im] number pairs: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise MalformedFile("data must be an array of [re, im] pairs")
    if count is not None and arr.shape[0] != count:
        raise MalformedFile(f"data has {arr.shape[0]} entries, expected {count}")
    if not np.all(np.isfinite(arr)):
        raise MalformedFile("data contains non-finite numbers")
    return arr[:, 0] + 1j * arr[:, 1]


def _dump(doc: dict, data_keys=("data",)) -> str:
    # One [re, im] pair per line keeps fixtures diffable.
    parts = []
    for key, value in doc.items():
        if key in data_keys:
            rows = ",\n    ".join(json.dumps(p) for p in value)
            parts.append(f'  {json.dumps(key)}: [\n    {rows}\n  ]')
        else:
            parts.append(f"  {json.dumps(key)}: {json.dumps(value)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def state_document(state: BipartiteState | TripartiteState, label: str | None = None) -> dict:
    if isinstance(state, BipartiteState):
        kind, data = BIPARTITE, state.rho
    else:
        kind, data = TRIPARTITE, state.psi
    doc = {"kind": kind, "dims": list(state.dims)}
    if label is not None:
        doc["label"] = label
    doc["comment"] = _LAYOUT[kind]
    doc["data"] = encode_complex(data)
    return doc


def dumps_state(state, label: str | None = None) -> str:
    return _dump(state_document(state, label))


def write_state(path, state, label: str | None = None) -> None:
    Path(path).write_text(dumps_state(state, label))


def _load_json(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedFile("top-level JSON value must be an object")
    return doc


def _dims(doc: dict, count: tuple[int, ...]) -> tuple[int, ...]:
    dims = doc.get("dims")
    if (not isinstance(dims, list) or len(dims) not in count
            or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims)):
        raise MalformedFile(f"dims must be an array of {' or '.join(map(str, count))} positive integers")
    return tuple(dims)


def loads_state(text: str, tol: Tolerance = DEFAULT_TOL):
    """Parse and validate a state file. Returns ``(state, label)``.

    Layout problems raise :class:`MalformedFile`; physically invalid content
    raises a :class:`~lueq.errors.StateValidationError`.
    """
    doc = _load_json(text)
    kind = doc.get("kind")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise MalformedFile("label must be a string")
    if kind == BIPARTITE:
        dims = _dims(doc, (2,))
        size = dims[0] * dims[1]
        data = decode_complex(doc.get("data"), size * size)
        return validate(data.reshape(size, size), dims, tol), label
    if kind == TRIPARTITE:
        dims = _dims(doc, (3,))
        data = decode_complex(doc.get("data"), dims[0] * dims[1] * dims[2])
        return validate_pure(data, dims, tol), label
    raise MalformedFile(f"unknown kind {kind!r}; expected {BIPARTITE!r} or {TRIPARTITE!r}")


def read_state(path, tol: Tolerance = DEFAULT_TOL):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from exc
    return loads_state(text, tol)


def dumps_unitaries(mats) -> str:
    mats = [nx.as_matrix(m) for m in mats]
    names = ["u", "w"] if len(mats) == 2 else [f"u_{s}" for s in "abc"[: len(mats)]]
    doc = {"kind": UNITARIES, "dims": [m.shape[0] for m in mats], "comment": _LAYOUT[UNITARIES]}
    for name, m in zip(names, mats):
        doc[name] = encode_complex(m)
    return _dump(doc, data_keys=tuple(names))


def loads_unitaries(text: str) -> dict[str, np.ndarray]:
    doc = _load_json(text)
    if doc.get("kind") != UNITARIES:
        raise MalformedFile(f"expected kind {UNITARIES!r}")
    dims = _dims(doc, (2, 3))
    names = ["u", "w"] if len(dims) == 2 else ["u_a", "u_b", "u_c"]
    return {n: decode_complex(doc.get(n), d * d).reshape(d, d) for n, d in zip(names, dims)}


# ---------------------------------------------------------------------------
# reports


def _num(z: complex):
    """Real numbers stay plain floats; complex ones become ``[re, im]``."""
    z = complex(z)
    return float(z.real) if z.imag == 0.0 else [float(z.real), float(z.imag)]


def _matrix(m) -> list:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return [[float(v) for v in row] for row in m]


def _tensor_entries(t) -> dict:
    n = t.shape[0]
    return {
        f"{i + 1},{j + 1},{k + 1}": [float(t[i, j, k].real), float(t[i, j, k].imag)]
        for i in range(n) for j in range(n) for k in range(n)
    }


def analysis_report(an: Analysis, label: str | None = None, kind: str = BIPARTITE) -> dict:
    """Invariants and classification of one state; keys in a fixed order."""
    g = an.genericity
    inv = an.invariants
    return {
        "schema": SCHEMA,
        "label": label,
        "source_kind": kind,
        "dims": list(an.state.dims),
        "rank": an.eigensystem.n,
        "eigenvalues": [float(v) for v in an.eigensystem.lambdas],
        "degeneracy_blocks": [[i + 1 for i in b] for b in an.eigensystem.degeneracy_blocks],
        "classification": {
            "label": g.label.value,
            "generic": g.generic,
            "high_generic": g.high_generic,
            "chg": g.chg,
            "det_omega_n": float(g.det_omega),
            "det_theta_n": float(g.det_theta),
            "max_commutator": float(g.max_commutator),
            "min_rho_rank": g.min_rho_rank,
        },
        "j_moments": [float(v) for v in inv.j_moments],
        "omega": _matrix(inv.omega),
        "theta": _matrix(inv.theta_mat),
        "x": _tensor_entries(inv.x_tensor),
        "y": _tensor_entries(inv.y_tensor),
    }


def _one_based(index) -> list[int]:
    return [int(i) + 1 for i in index]


def verdict_report(verdict: Verdict) -> dict:
    out: dict = {"kind": verdict.kind}
    if isinstance(verdict, Equivalent):
        out["branch"] = verdict.branch
        out["ordering"] = _one_based(verdict.ordering)
        wit = verdict.witness
        if wit is None:
            out["witness"] = None
        else:
            out["witness"] = {
                "u": _matrix(wit.u),
                "w": _matrix(wit.w),
                "residual": float(wit.residual),
                "coeff_residual": float(wit.coeff_residual),
            }
        out["note"] = verdict.note
    elif isinstance(verdict, Inequivalent):
        out["invariant"] = verdict.invariant
        out["index"] = _one_based(verdict.index)
        out["value_1"] = _plain(verdict.value_1)
        out["value_2"] = _plain(verdict.value_2)
    elif isinstance(verdict, Inconclusive):
        out["reason"] = verdict.reason
        out["diagnostics"] = _plain(verdict.diagnostics)
    elif isinstance(verdict, Conditional):
        out["branch"] = verdict.branch
        out["ordering"] = _one_based(verdict.ordering)
        out["note"] = verdict.note
    return out


def _plain(value):
    """Make nested diagnostics JSON-safe (numpy scalars, complex, tuples)."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, complex, np.floating, np.complexfloating)):
        return _num(value)
    return value


def pair_report(verdict: Verdict, first: dict, second: dict) -> dict:
    return {"schema": SCHEMA, "verdict": verdict_report(verdict), "states": [first, second]}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def parse_report(text: str) -> dict:
    """Parse a report and check its schema version."""
    doc = _load_json(text)
    if doc.get("schema") != SCHEMA:
        raise MalformedFile(f"unsupported report schema {doc.get('schema')!r}")
    return doc


def report_matrix(entry) -> np.ndarray:
    """Rebuild a matrix stored in a report (real rows or rows of ``[re, im]``)."""
    arr = np.array(entry, dtype=np.float64)
    if arr.ndim == 3:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def report_tensor(entries: dict) -> np.ndarray:
    n = round(len(entries) ** (1 / 3))
    t = np.zeros((n, n, n), dtype=np.complex128)
    for key, (re, im) in entries.items():
        i, j, k = (int(s) - 1 for s in key.split(","))
        t[i, j, k] = complex(re, im)
    return t
