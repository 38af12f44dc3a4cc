"""JSON matrix files.

Complex entries are ``[re, im]`` pairs of binary64 floats; Python's float repr
round-trips exactly, so a written file re-reads to bitwise-equal arrays.

Kinds
-----
``row_contraction``: ``{"kind", "d", "dim", "matrices": [M_1, ..., M_d]}``
``lifting``: ``{"kind", "d", "dim", "p", "q", "C": [...], "A": [...], "B": [...]}``
``symbol``: ``{"kind", "d", "N", "dom_dim", "cod_dim", "coeffs": [{"word", "matrix"}],
"leakage_bound"[, "tail_profile"]}``
``state``: ``{"kind", "d": 1, "dim", "matrices": [rho]}``
``matrix``: ``{"kind", "rows", "cols", "matrices": [M]}`` for gamma and corner data.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .charfunc import MultiAnalyticSymbol
from .exceptions import FileFormatError
from .lifting import Lifting

KINDS = ("row_contraction", "lifting", "symbol", "state", "matrix")


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(obj, shape=None, where: str = "matrix") -> np.ndarray:
    """Parse a list of rows of ``[re, im]`` pairs; ``shape`` fixes empty matrices."""
    if not isinstance(obj, list):
        raise FileFormatError(f"{where}: expected a list of rows")
    if not obj:
        if shape is None:
            raise FileFormatError(f"{where}: empty matrix without a known shape")
        if shape[0] != 0 and shape[1] != 0:
            raise FileFormatError(f"{where}: empty, expected shape {tuple(shape)}")
        return np.zeros(shape, dtype=complex)
    width = None
    out = []
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise FileFormatError(f"{where}: row {r} is not a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FileFormatError(f"{where}: row {r} has {len(row)} entries, expected {width}")
        vals = []
        for c, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)):
                raise FileFormatError(f"{where}: entry ({r}, {c}) is not a [re, im] pair")
            if not all(math.isfinite(t) for t in z):
                raise FileFormatError(f"{where}: entry ({r}, {c}) is not finite")
            vals.append(complex(float(z[0]), float(z[1])))
        out.append(vals)
    m = np.array(out, dtype=complex).reshape(len(out), width)
    if shape is not None and m.shape != tuple(shape):
        raise FileFormatError(f"{where}: shape {m.shape}, expected {tuple(shape)}")
    return m


def _int(doc, key, where, lo=0):
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise FileFormatError(f"{where}: field '{key}' must be an integer >= {lo}")
    return v


def _mats(doc, key, count, shape, where):
    ms = doc.get(key)
    if not isinstance(ms, list):
        raise FileFormatError(f"{where}: field '{key}' must be a list of matrices")
    if count is not None and len(ms) != count:
        raise FileFormatError(f"{where}: '{key}' holds {len(ms)} matrices, expected {count}")
    return [decode_matrix(m, shape, f"{where}.{key}[{i}]") for i, m in enumerate(ms)]


# ---------------------------------------------------------------------------
# documents


def row_contraction_doc(T) -> dict:
    T = [np.asarray(t, complex) for t in T]
    return {"kind": "row_contraction", "d": len(T), "dim": T[0].shape[0] if T else 0,
            "matrices": [encode_matrix(t) for t in T]}


def lifting_doc(L: Lifting) -> dict:
    return {"kind": "lifting", "d": L.d, "dim": L.p + L.q, "p": L.p, "q": L.q,
            "C": [encode_matrix(c) for c in L.C], "A": [encode_matrix(a) for a in L.A],
            "B": [encode_matrix(b) for b in L.B]}


def symbol_doc(S: MultiAnalyticSymbol) -> dict:
    doc = {"kind": "symbol", "d": S.d, "N": S.N, "dom_dim": S.dom_dim, "cod_dim": S.cod_dim,
           "coeffs": [{"word": list(w), "matrix": encode_matrix(S[w])} for w in S.idx.words],
           "leakage_bound": S.leakage_bound}
    if S.tail_profile is not None:
        doc["tail_profile"] = list(S.tail_profile)
    return doc


def state_doc(rho) -> dict:
    rho = np.asarray(rho, complex)
    return {"kind": "state", "d": 1, "dim": rho.shape[0], "matrices": [encode_matrix(rho)]}


def matrix_doc(m) -> dict:
    m = np.asarray(m, complex)
    return {"kind": "matrix", "rows": m.shape[0], "cols": m.shape[1], "matrices": [encode_matrix(m)]}


def parse_document(doc):
    """Turn a decoded JSON object into ``(kind, value)``.

    Values: list of matrices for ``row_contraction``; :class:`Lifting` (unchecked
    for contractivity) for ``lifting``; :class:`MultiAnalyticSymbol`; a square
    matrix for ``state`` and a matrix for ``matrix``.
    """
    if not isinstance(doc, dict):
        raise FileFormatError("top level must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise FileFormatError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if kind == "row_contraction":
        d = _int(doc, "d", kind, 1)
        n = _int(doc, "dim", kind)
        return kind, _mats(doc, "matrices", d, (n, n), kind)
    if kind == "state":
        n = _int(doc, "dim", kind)
        (rho,) = _mats(doc, "matrices", 1, (n, n), kind)
        return kind, rho
    if kind == "matrix":
        r, c = _int(doc, "rows", kind), _int(doc, "cols", kind)
        (m,) = _mats(doc, "matrices", 1, (r, c), kind)
        return kind, m
    if kind == "lifting":
        d = _int(doc, "d", kind, 1)
        p, q = _int(doc, "p", kind), _int(doc, "q", kind)
        if "dim" in doc and doc["dim"] != p + q:
            raise FileFormatError("lifting: dim must equal p + q")
        C = _mats(doc, "C", d, (p, p), kind)
        A = _mats(doc, "A", d, (q, q), kind)
        B = _mats(doc, "B", d, (q, p), kind)
        return kind, Lifting(C, A, B, check=False)
    d = _int(doc, "d", kind, 1)
    N = _int(doc, "N", kind)
    dom, cod = _int(doc, "dom_dim", kind), _int(doc, "cod_dim", kind)
    coeffs = {}
    entries = doc.get("coeffs")
    if not isinstance(entries, list):
        raise FileFormatError("symbol: 'coeffs' must be a list")
    for k, e in enumerate(entries):
        if not isinstance(e, dict) or "word" not in e or "matrix" not in e:
            raise FileFormatError(f"symbol: coeffs[{k}] needs 'word' and 'matrix'")
        w = e["word"]
        if not isinstance(w, list) or not all(isinstance(a, int) and 1 <= a <= d for a in w):
            raise FileFormatError(f"symbol: coeffs[{k}] has an invalid word {w!r}")
        if len(w) > N:
            raise FileFormatError(f"symbol: coeffs[{k}] word longer than N={N}")
        coeffs[tuple(w)] = decode_matrix(e["matrix"], (cod, dom), f"symbol.coeffs[{k}]")
    leak = doc.get("leakage_bound", 0.0)
    if not isinstance(leak, (int, float)) or not math.isfinite(leak) or leak < 0:
        raise FileFormatError("symbol: leakage_bound must be a finite number >= 0")
    tail = doc.get("tail_profile")
    if tail is not None and (not isinstance(tail, list) or len(tail) != N + 1):
        raise FileFormatError("symbol: tail_profile needs N + 1 numbers")
    return kind, MultiAnalyticSymbol(d, N, coeffs, dom, cod, float(leak), tail)


# ---------------------------------------------------------------------------
# files


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))


def loads(text: str, source: str = "<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_document(doc)
    except FileFormatError as exc:
        raise FileFormatError(f"{source}: {exc}") from None


def read(path, expect=None):
    """Read a file and return ``(kind, value)``; ``expect`` restricts the kind."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from None
    kind, value = loads(text, str(path))
    if expect is not None:
        allowed = (expect,) if isinstance(expect, str) else tuple(expect)
        if kind not in allowed:
            raise FileFormatError(f"{path}: kind {kind!r}, expected {' or '.join(allowed)}")
    return kind, value
