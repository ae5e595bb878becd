"""JSON documents: {"kind", "field", "payload", "format_version": 1}.

Output uses sorted keys and integers only, so equal values serialize to equal
bytes.  Parsing reports the JSON path of the first problem as a FormatError.
"""
from __future__ import annotations

import json

import numpy as np

from . import chain as ch
from . import filt as fl
from .chain import ChainMap, Complex
from .filt import Filtration, SpectralPage
from .fzip import ClassicalFZip, Decomposition, DerivedFZip, rebuild
from .gf import FieldError, FieldSpec
from .pinched import GradedModule, PinchedPerfData, VBCharts

FORMAT_VERSION = 1
KINDS = ("complex", "chainmap", "filtration", "zip", "classical_zip", "pinched", "page",
         "vb_charts", "decomposition")


class FormatError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# ------------------------------------------------------------------ helpers

def _get(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise FormatError(path, "expected an object")
    if key not in obj:
        raise FormatError(path, f"missing key {key!r}")
    val = obj[key]
    if kind is not None and not _is(val, kind):
        raise FormatError(f"{path}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _is(val, kind) -> bool:
    if kind is int:
        return isinstance(val, int) and not isinstance(val, bool)
    return isinstance(val, kind)


def _int(val, path) -> int:
    if not _is(val, int):
        raise FormatError(path, "expected an integer")
    return val


def _list(val, path) -> list:
    if not isinstance(val, list):
        raise FormatError(path, "expected a list")
    return val


def _indexed(val, path, decode):
    """[[k, item], ...] -> {k: decode(item, subpath)} with distinct integer keys."""
    out = {}
    for j, entry in enumerate(_list(val, path)):
        p = f"{path}[{j}]"
        if not isinstance(entry, list) or len(entry) != 2:
            raise FormatError(p, "expected a pair [index, value]")
        k = _int(entry[0], f"{p}[0]")
        if k in out:
            raise FormatError(f"{p}[0]", f"duplicate index {k}")
        out[k] = decode(entry[1], f"{p}[1]")
    return out


# -------------------------------------------------------------------- field

def field_to_json(F: FieldSpec) -> dict:
    return F.to_json()


def field_from_json(obj, path="$.field") -> FieldSpec:
    p = _int(_get(obj, "p", path), f"{path}.p")
    n = _int(_get(obj, "n", path), f"{path}.n")
    mod = _list(_get(obj, "modulus", path), f"{path}.modulus")
    mod = [_int(c, f"{path}.modulus[{i}]") for i, c in enumerate(mod)]
    try:
        return FieldSpec(p, n, tuple(mod))
    except FieldError as e:
        raise FormatError(path, str(e)) from None


# ------------------------------------------------------------------- matrix

def matrix_to_json(M: np.ndarray) -> dict:
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": [int(x) for x in M.reshape(-1)]}


def matrix_from_json(obj, path, F: FieldSpec) -> np.ndarray:
    rows = _int(_get(obj, "rows", path), f"{path}.rows")
    cols = _int(_get(obj, "cols", path), f"{path}.cols")
    data = _list(_get(obj, "data", path), f"{path}.data")
    if rows < 0 or cols < 0:
        raise FormatError(path, "negative matrix size")
    if len(data) != rows * cols:
        raise FormatError(f"{path}.data", f"expected {rows * cols} entries, got {len(data)}")
    for i, x in enumerate(data):
        if not _is(x, int) or not 0 <= x < F.q:
            raise FormatError(f"{path}.data[{i}]", f"entry {x!r} is not an element of {F!r}")
    return np.array(data, dtype=np.int64).reshape(rows, cols)


# ---------------------------------------------------------- complexes, maps

def complex_to_json(C: Complex) -> dict:
    return {
        "lo": C.lo, "hi": C.hi, "dims": list(C.dims),
        "diffs": [[d, matrix_to_json(C.diff(d))] for d in range(C.lo + 1, C.hi + 1)],
    }


def complex_from_json(obj, path, F: FieldSpec) -> Complex:
    lo = _int(_get(obj, "lo", path), f"{path}.lo")
    hi = _int(_get(obj, "hi", path), f"{path}.hi")
    dims = _list(_get(obj, "dims", path), f"{path}.dims")
    dims = [_int(x, f"{path}.dims[{i}]") for i, x in enumerate(dims)]
    if len(dims) != max(hi - lo + 1, 0):
        raise FormatError(f"{path}.dims", f"expected {max(hi - lo + 1, 0)} dimensions")
    if any(x < 0 for x in dims):
        raise FormatError(f"{path}.dims", "negative dimension")
    diffs = _indexed(_get(obj, "diffs", path), f"{path}.diffs", lambda o, p: matrix_from_json(o, p, F))
    for j, (d, m) in enumerate(diffs.items()):
        want = (dims[d - 1 - lo] if lo <= d - 1 <= hi else 0, dims[d - lo] if lo <= d <= hi else 0)
        if m.shape != want and m.size:
            raise FormatError(f"{path}.diffs[{j}][1]", f"shape {m.shape}, expected {want}")
    # d∘d = 0 is a semantic condition reported by `validate`, not a format error
    return Complex(F, lo, dims, {d: m for d, m in diffs.items() if m.size})


def maps_to_json(f: ChainMap) -> list:
    return [[d, matrix_to_json(f.map(d))] for d in f.degrees if f.source.dim(d) and f.target.dim(d)]


def maps_from_json(obj, path, F: FieldSpec, S: Complex, T: Complex) -> ChainMap:
    maps = _indexed(obj, path, lambda o, p: matrix_from_json(o, p, F))
    for j, (d, m) in enumerate(maps.items()):
        want = (T.dim(d), S.dim(d))
        if m.shape != want and m.size:
            raise FormatError(f"{path}[{j}][1]", f"shape {m.shape}, expected {want}")
    return ChainMap(S, T, {d: m for d, m in maps.items() if m.size})


def chainmap_to_json(f: ChainMap) -> dict:
    return {"source": complex_to_json(f.source), "target": complex_to_json(f.target), "maps": maps_to_json(f)}


def chainmap_from_json(obj, path, F: FieldSpec) -> ChainMap:
    S = complex_from_json(_get(obj, "source", path), f"{path}.source", F)
    T = complex_from_json(_get(obj, "target", path), f"{path}.target", F)
    return maps_from_json(_get(obj, "maps", path), f"{path}.maps", F, S, T)


# -------------------------------------------------------------- filtrations

def filtration_to_json(Fl: Filtration) -> dict:
    a, b = Fl.window
    return {
        "direction": Fl.direction,
        "window": [a, b],
        "levels": [complex_to_json(c) for c in Fl.levels],
        "steps": [{"maps": maps_to_json(s)} for s in Fl.steps],
    }


def filtration_from_json(obj, path, F: FieldSpec) -> Filtration:
    direction = _get(obj, "direction", path)
    if direction not in (fl.ASC, fl.DESC):
        raise FormatError(f"{path}.direction", f"expected {fl.ASC!r} or {fl.DESC!r}")
    win = _list(_get(obj, "window", path), f"{path}.window")
    if len(win) != 2:
        raise FormatError(f"{path}.window", "expected [a, b]")
    a, b = _int(win[0], f"{path}.window[0]"), _int(win[1], f"{path}.window[1]")
    levels = _list(_get(obj, "levels", path), f"{path}.levels")
    if len(levels) != max(b - a + 1, 0):
        raise FormatError(f"{path}.levels", f"expected {max(b - a + 1, 0)} levels for window [{a}, {b}]")
    levels = [complex_from_json(c, f"{path}.levels[{i}]", F) for i, c in enumerate(levels)]
    steps = _list(_get(obj, "steps", path), f"{path}.steps")
    if len(steps) != max(len(levels) - 1, 0):
        raise FormatError(f"{path}.steps", f"expected {max(len(levels) - 1, 0)} steps")
    out = []
    for i, s in enumerate(steps):
        if direction == fl.ASC:
            S, T = levels[i], levels[i + 1]
        else:
            S, T = levels[i + 1], levels[i]
        p = f"{path}.steps[{i}]"
        out.append(maps_from_json(_get(s, "maps", p), f"{p}.maps", F, S, T))
    return Filtration(direction, a, levels, out, F)


def page_to_json(P: SpectralPage) -> dict:
    return P.to_json()


def page_from_json(obj, path, F: FieldSpec) -> SpectralPage:
    r = _int(_get(obj, "r", path), f"{path}.r")
    entries = {}
    for j, e in enumerate(_list(_get(obj, "entries", path), f"{path}.entries")):
        p = f"{path}.entries[{j}]"
        if not isinstance(e, list) or len(e) != 3:
            raise FormatError(p, "expected [p, q, dim]")
        entries[(_int(e[0], p), _int(e[1], p))] = _int(e[2], p)
    ab: dict[int, dict[int, int]] = {}
    for j, e in enumerate(_list(_get(obj, "abutment", path), f"{path}.abutment")):
        p = f"{path}.abutment[{j}]"
        if not isinstance(e, list) or len(e) != 3:
            raise FormatError(p, "expected [n, p, dim]")
        ab.setdefault(_int(e[0], p), {})[_int(e[1], p)] = _int(e[2], p)
    return SpectralPage(r, entries, ab)


# --------------------------------------------------------------------- zips

def classical_to_json(M: ClassicalFZip) -> dict:
    return {
        "rank": M.rank,
        "C": [[k, matrix_to_json(M.C[k])] for k in sorted(M.C)],
        "D": [[k, matrix_to_json(M.D[k])] for k in sorted(M.D)],
        "phi": [[k, matrix_to_json(M.phi[k])] for k in sorted(M.phi)],
    }


def classical_from_json(obj, path, F: FieldSpec) -> ClassicalFZip:
    r = _int(_get(obj, "rank", path), f"{path}.rank")
    dec = lambda o, p: matrix_from_json(o, p, F)  # noqa: E731
    C = _indexed(_get(obj, "C", path), f"{path}.C", dec)
    D = _indexed(_get(obj, "D", path), f"{path}.D", dec)
    phi = _indexed(_get(obj, "phi", path), f"{path}.phi", dec)
    for name, flag in (("C", C), ("D", D)):
        for j, (k, m) in enumerate(flag.items()):
            if m.shape[0] != r:
                raise FormatError(f"{path}.{name}[{j}][1]", f"expected {r} rows")
    return ClassicalFZip(F, r, C, D, phi)


def zip_to_json(Z: DerivedFZip) -> dict:
    return {
        "descending": filtration_to_json(Z.C),
        "ascending": filtration_to_json(Z.D),
        "glue": "identity" if Z.glue is None else {"maps": maps_to_json(Z.glue)},
        "twists": [[k, {"maps": maps_to_json(Z.twists[k])}] for k in sorted(Z.twists)],
    }


def _filtrations_and_glue(obj, path, F):
    C = filtration_from_json(_get(obj, "descending", path), f"{path}.descending", F)
    D = filtration_from_json(_get(obj, "ascending", path), f"{path}.ascending", F)
    if C.direction != fl.DESC:
        raise FormatError(f"{path}.descending.direction", "expected 'descending'")
    if D.direction != fl.ASC:
        raise FormatError(f"{path}.ascending.direction", "expected 'ascending'")
    g = _get(obj, "glue", path)
    if g == "identity":
        glue = None
    else:
        glue = maps_from_json(_get(g, "maps", f"{path}.glue"), f"{path}.glue.maps", F, C.colim(), D.colim())
    return C, D, glue


def zip_from_json(obj, path, F: FieldSpec) -> DerivedFZip:
    C, D, glue = _filtrations_and_glue(obj, path, F)
    twists = {}
    for j, entry in enumerate(_list(_get(obj, "twists", path), f"{path}.twists")):
        p = f"{path}.twists[{j}]"
        if not isinstance(entry, list) or len(entry) != 2:
            raise FormatError(p, "expected a pair [index, twist]")
        k = _int(entry[0], f"{p}[0]")
        if k in twists:
            raise FormatError(f"{p}[0]", f"duplicate index {k}")
        S = ch.frobenius_twist(fl.graded(C, k))
        T = fl.graded(D, k)
        twists[k] = maps_from_json(_get(entry[1], "maps", f"{p}[1]"), f"{p}[1].maps", F, S, T)
    return DerivedFZip(C, D, glue, twists)


def pinched_to_json(P: PinchedPerfData) -> dict:
    return {
        "descending": filtration_to_json(P.C),
        "ascending": filtration_to_json(P.D),
        "glue": "identity" if P.glue is None else {"maps": maps_to_json(P.glue)},
        "big_twist": {"maps": maps_to_json(P.big_twist)},
    }


def pinched_from_json(obj, path, F: FieldSpec) -> PinchedPerfData:
    from .pinched import _direct_sum_or_zero, _graded_sums

    C, D, glue = _filtrations_and_glue(obj, path, F)
    win = DerivedFZip(C, D).window()
    src, tgt = _graded_sums(C, D, win)
    S, T = _direct_sum_or_zero(F, src), _direct_sum_or_zero(F, tgt)
    bt = _get(obj, "big_twist", path)
    big = maps_from_json(_get(bt, "maps", f"{path}.big_twist"), f"{path}.big_twist.maps", F, S, T)
    return PinchedPerfData(C, D, glue, big)


def _module_to_json(m: GradedModule) -> dict:
    return {"degree": m.degree, "lo": m.lo, "dims": list(m.dims), "maps": [matrix_to_json(x) for x in m.maps]}


def _module_from_json(obj, path, F) -> GradedModule:
    deg = _int(_get(obj, "degree", path), f"{path}.degree")
    lo = _int(_get(obj, "lo", path), f"{path}.lo")
    dims = [_int(x, f"{path}.dims[{i}]") for i, x in enumerate(_list(_get(obj, "dims", path), f"{path}.dims"))]
    maps = [matrix_from_json(x, f"{path}.maps[{i}]", F)
            for i, x in enumerate(_list(_get(obj, "maps", path), f"{path}.maps"))]
    m = GradedModule(deg, lo, dims, maps)
    errs = m.check()
    if errs:
        raise FormatError(path, errs[0])
    return m


def vb_to_json(X: VBCharts) -> dict:
    return {
        "V": _module_to_json(X.V), "W": _module_to_json(X.W), "glue": matrix_to_json(X.glue),
        "pinch": [[k, matrix_to_json(X.pinch[k])] for k in sorted(X.pinch)],
    }


def vb_from_json(obj, path, F: FieldSpec) -> VBCharts:
    V = _module_from_json(_get(obj, "V", path), f"{path}.V", F)
    W = _module_from_json(_get(obj, "W", path), f"{path}.W", F)
    glue = matrix_from_json(_get(obj, "glue", path), f"{path}.glue", F)
    pinch = _indexed(_get(obj, "pinch", path), f"{path}.pinch", lambda o, p: matrix_from_json(o, p, F))
    return VBCharts(F, V, W, glue, pinch)


def decomposition_to_json(d: Decomposition) -> dict:
    return {"summands": [[n, classical_to_json(M)] for n, M in d.summands], "checks": dict(d.checks)}


def decomposition_from_json(obj, path, F: FieldSpec) -> Decomposition:
    summands = _list(_get(obj, "summands", path), f"{path}.summands")
    out = []
    for j, e in enumerate(summands):
        p = f"{path}.summands[{j}]"
        if not isinstance(e, list) or len(e) != 2:
            raise FormatError(p, "expected [n, classical zip]")
        out.append((_int(e[0], f"{p}[0]"), classical_from_json(e[1], f"{p}[1]", F)))
    checks = _get(obj, "checks", path, dict)
    for k, v in checks.items():
        if not isinstance(v, bool):
            raise FormatError(f"{path}.checks.{k}", "expected a boolean")
    return Decomposition(out, rebuild(out, F), dict(checks))


# ---------------------------------------------------------------- documents

ENCODERS = {
    "complex": complex_to_json, "chainmap": chainmap_to_json, "filtration": filtration_to_json,
    "zip": zip_to_json, "classical_zip": classical_to_json, "pinched": pinched_to_json,
    "page": page_to_json, "vb_charts": vb_to_json, "decomposition": decomposition_to_json,
}
DECODERS = {
    "complex": complex_from_json, "chainmap": chainmap_from_json, "filtration": filtration_from_json,
    "zip": zip_from_json, "classical_zip": classical_from_json, "pinched": pinched_from_json,
    "page": page_from_json, "vb_charts": vb_from_json, "decomposition": decomposition_from_json,
}


def document(kind: str, field: FieldSpec, value) -> dict:
    if kind not in ENCODERS:
        raise ValueError(f"unknown document kind {kind!r}")
    return {"kind": kind, "field": field_to_json(field), "payload": ENCODERS[kind](value),
            "format_version": FORMAT_VERSION}


def dump_document(kind: str, field: FieldSpec, value) -> str:
    return dumps(document(kind, field, value))


def parse_document(obj) -> tuple[str, FieldSpec, object]:
    if not isinstance(obj, dict):
        raise FormatError("$", "expected a document object")
    version = _get(obj, "format_version", "$")
    if version != FORMAT_VERSION:
        raise FormatError("$.format_version", f"unsupported version {version!r}")
    kind = _get(obj, "kind", "$")
    if kind not in DECODERS:
        raise FormatError("$.kind", f"unknown kind {kind!r}")
    F = field_from_json(_get(obj, "field", "$"))
    payload = _get(obj, "payload", "$")
    return kind, F, DECODERS[kind](payload, "$.payload", F)


def loads_document(text: str) -> tuple[str, FieldSpec, object]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"line {e.lineno} column {e.colno}", e.msg) from None
    return parse_document(obj)
