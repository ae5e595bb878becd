"""Sheaf data on the Frobenius-pinched projective line.

Vector bundles are described by two graded modules over the affine charts:
V with degree +1 transitions (built from the ascending flag D) and W with
degree -1 transitions (built from the descending flag C), glued over the
generic point by an isomorphism of their colimits and over the pinch point by
Frobenius-twisted isomorphisms of graded pieces.  Perfect complexes are
described by a pair of filtrations, a glue quasi-isomorphism and one twist map
on the direct sum of all graded pieces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chain as ch
from . import filt as fl
from . import fzip as fz
from . import linalg as la
from .chain import ChainMap, Complex
from .filt import ASC, DESC, Filtration
from .fzip import ClassicalFZip, DerivedFZip
from .gf import FieldSpec


# ------------------------------------------------------------ Koszul pullback

def koszul_pullback(F: Filtration) -> tuple[Complex, dict[int, Complex]]:
    """Pullback to the pinch point: per index the cone of the transition map,
    i.e. the graded piece; returns the total complex and the per-index pieces."""
    pieces = {i: fl.graded(F, i) for i in fl.graded_window(F)} if not F.is_empty() else {}
    if not pieces:
        return Complex(F.field), {}
    return ch.direct_sum(*pieces.values()), pieces


# ------------------------------------------------------ graded chart modules

@dataclass
class GradedModule:
    """Spaces V_i on [lo, lo + len(dims) - 1] with transitions of degree +1 or -1.

    Degree +1: maps[j] is V_{lo+j} -> V_{lo+j+1}; zero below the window and
    stable (identity transitions) above it.  Degree -1: maps[j] is
    V_{lo+j+1} -> V_{lo+j}; stable below the window and zero above it."""
    degree: int
    lo: int
    dims: list[int]
    maps: list[np.ndarray]

    @property
    def hi(self) -> int:
        return self.lo + len(self.dims) - 1

    def dim(self, i: int) -> int:
        if not self.dims:
            return 0
        if i < self.lo:
            return 0 if self.degree == 1 else self.dims[0]
        if i > self.hi:
            return self.dims[-1] if self.degree == 1 else 0
        return self.dims[i - self.lo]

    def check(self) -> list[str]:
        errs = []
        if self.degree not in (1, -1):
            errs.append("transition degree must be +1 or -1")
        if len(self.maps) != max(len(self.dims) - 1, 0):
            errs.append("wrong number of transition maps")
            return errs
        for j, m in enumerate(self.maps):
            a, b = self.lo + j, self.lo + j + 1
            want = (self.dim(b), self.dim(a)) if self.degree == 1 else (self.dim(a), self.dim(b))
            if m.shape != want:
                errs.append(f"transition at {a} has shape {m.shape}, expected {want}")
        return errs

    def to_colimit(self, i: int, F: FieldSpec) -> np.ndarray:
        """The composite transition V_i -> colimit (V_hi for +1, V_lo for -1)."""
        if self.degree == 1:
            m = la.identity(self.dim(i))
            for j in range(max(i, self.lo), self.hi):
                m = la.matmul(F, self.maps[j - self.lo], m)
            if i < self.lo:
                return la.zeros(self.dims[-1], 0)
            return m
        m = la.identity(self.dim(i))
        for j in range(min(i, self.hi), self.lo, -1):
            m = la.matmul(F, self.maps[j - 1 - self.lo], m)
        if i > self.hi:
            return la.zeros(self.dims[0], 0)
        return m

    def incoming(self, i: int) -> np.ndarray:
        """Image of the neighbouring space in V_i (from V_{i-1} for +1, V_{i+1} for -1)."""
        src = i - 1 if self.degree == 1 else i + 1
        if self.lo <= min(i, src) and max(i, src) <= self.hi:
            return self.maps[min(i, src) - self.lo]
        if self.dim(src) == 0:
            return la.zeros(self.dim(i), 0)
        return la.identity(self.dim(i))


@dataclass
class VBCharts:
    """Chart data of a vector bundle: V from D, W from C, the generic glue
    colim W -> colim V, and pinch glue Frob(gr W^i) -> gr V^i in the greedy
    quotient bases of the chart modules."""
    field: FieldSpec
    V: GradedModule
    W: GradedModule
    glue: np.ndarray
    pinch: dict[int, np.ndarray]


def _gr_basis(F: FieldSpec, mod: GradedModule, i: int) -> np.ndarray:
    return la.quotient_basis(F, mod.incoming(i), la.identity(mod.dim(i)))


def _gr_proj(F: FieldSpec, mod: GradedModule, i: int) -> np.ndarray:
    return la.quotient_projector(F, la.colspace(F, mod.incoming(i)), _gr_basis(F, mod, i))


def encode_vb(M: ClassicalFZip) -> VBCharts:
    F = M.field
    r = M.rank
    jumps = M.jumps()
    if not jumps:
        empty = GradedModule(1, 0, [], [])
        return VBCharts(F, empty, GradedModule(-1, 0, [], []), la.zeros(0, 0), {})
    a, b = jumps[0], jumps[-1]
    DB = {k: M.d_at(k) for k in range(a, b + 1)}
    CB = {k: M.c_at(k) for k in range(a, b + 1)}
    V = GradedModule(1, a, [DB[k].shape[1] for k in range(a, b + 1)],
                     [la.solve(F, DB[k + 1], DB[k]) for k in range(a, b)])
    W = GradedModule(-1, a, [CB[k].shape[1] for k in range(a, b + 1)],
                     [la.solve(F, CB[k], CB[k + 1]) for k in range(a, b)])
    glue = la.solve(F, DB[b], CB[a])
    pinch = {}
    for k in jumps:
        # chart gr bases -> zip gr bases, then phi, then back to chart gr coordinates
        A = la.matmul(F, M.proj_c(k), la.matmul(F, CB[k], _gr_basis(F, W, k)))
        lift = la.solve(F, DB[k], M.gr_d_basis(k))
        Q = la.matmul(F, _gr_proj(F, V, k), lift)
        pinch[k] = la.matmul(F, Q, la.matmul(F, M.phi_at(k), la.frob(F, A)))
    return VBCharts(F, V, W, glue, pinch)


def decode_vb(X: VBCharts) -> ClassicalFZip:
    F = X.field
    V, W = X.V, X.W
    errs = V.check() + W.check()
    if V.degree != 1 or W.degree != -1:
        errs.append("V needs degree +1 transitions and W degree -1")
    if errs:
        raise ValueError(errs[0])
    if not V.dims:
        return ClassicalFZip(F, 0, {}, {}, {})
    r = V.dims[-1]
    if X.glue.shape != (r, W.dims[0]) or not la.is_invertible(F, X.glue):
        raise ValueError("generic glue is not invertible")
    lo = min(V.lo, W.lo)
    hi = max(V.hi, W.hi)
    Dm = {k: la.colspace(F, V.to_colimit(k, F)) for k in range(lo, hi + 1)}
    Cm = {k: la.colspace(F, la.matmul(F, X.glue, W.to_colimit(k, F))) for k in range(lo, hi + 1)}
    M = ClassicalFZip(F, r, Cm, Dm, {})
    phi = {}
    for k in M.jumps():
        if k not in X.pinch:
            raise ValueError(f"missing pinch glue at index {k}")
        pk = X.pinch[k]
        if not la.is_invertible(F, pk):
            raise ValueError(f"pinch glue at index {k} is not invertible")
        # zip gr_C basis -> chart W_k -> chart gr coordinates
        U = M.gr_c_basis(k)
        w = la.solve(F, la.matmul(F, X.glue, W.to_colimit(k, F)), U)
        gamma = la.matmul(F, _gr_proj(F, W, k), w)
        # chart gr V basis -> zip gr_D coordinates
        phi_v = la.matmul(F, M.proj_d(k), la.matmul(F, V.to_colimit(k, F), _gr_basis(F, V, k)))
        phi[k] = la.matmul(F, phi_v, la.matmul(F, pk, la.frob(F, gamma)))
    M.phi = phi
    errs = M.check()
    if errs:
        raise ValueError(errs[0])
    return M


def vb_roundtrip(M: ClassicalFZip) -> bool:
    return fz.is_isomorphic(decode_vb(encode_vb(M)), M)


# ----------------------------------------------------------- perfect complexes

@dataclass
class PinchedPerfData:
    C: Filtration
    D: Filtration
    glue: ChainMap | None
    big_twist: ChainMap

    @property
    def field(self) -> FieldSpec:
        return self.C.field

    def window(self) -> range:
        return fz.DerivedFZip(self.C, self.D).window()


def _graded_sums(C: Filtration, D: Filtration, win: range):
    src = [ch.frobenius_twist(fl.graded(C, k)) for k in win]
    tgt = [fl.graded(D, k) for k in win]
    return src, tgt


def _direct_sum_or_zero(F: FieldSpec, cs: list[Complex]) -> Complex:
    return ch.direct_sum(*cs) if cs else Complex(F)


def from_derived_fzip(Z: DerivedFZip) -> PinchedPerfData:
    win = Z.window()
    src, tgt = _graded_sums(Z.C, Z.D, win)
    blocks = {(j, j): Z.twist(k) for j, k in enumerate(win)}
    big = ch.block_chain_map(Z.field, src, tgt, blocks)
    return PinchedPerfData(Z.C, Z.D, Z.glue, big)


def _offsets(cs: list[Complex], d: int) -> list[int]:
    out, off = [], 0
    for c in cs:
        out.append(off)
        off += c.dim(d)
    return out


def to_derived_fzip(P: PinchedPerfData) -> DerivedFZip:
    """Split big_twist into per-index twists; index-mixing data is rejected."""
    F = P.field
    win = P.window()
    src, tgt = _graded_sums(P.C, P.D, win)
    twists = {}
    for d in P.big_twist.degrees:
        so, to = _offsets(src, d), _offsets(tgt, d)
        m = P.big_twist.map(d)
        for a in range(len(win)):
            for b in range(len(win)):
                blk = m[to[a]:to[a] + tgt[a].dim(d), so[b]:so[b] + src[b].dim(d)]
                if a != b and blk.any():
                    raise ValueError(f"big twist mixes indices {win[b]} and {win[a]}; "
                                     "only index-diagonal data is accepted")
    for j, k in enumerate(win):
        maps = {}
        for d in set(src[j].degrees) | set(tgt[j].degrees):
            so, to = _offsets(src, d), _offsets(tgt, d)
            m = P.big_twist.map(d)
            maps[d] = m[to[j]:to[j] + tgt[j].dim(d), so[j]:so[j] + src[j].dim(d)]
        t = ChainMap(src[j], tgt[j], maps)
        if not t.is_zero():
            twists[k] = t
    return DerivedFZip(P.C, P.D, P.glue, twists)


def validate_pinched(P: PinchedPerfData) -> tuple[bool, list[str]]:
    F = P.field
    errs: list[str] = []
    win = P.window()
    # Boundedness: finitely many non-exact graded pieces with finite total
    # Betti data, and the filtrations close up at both ends of the window.
    for f, name in ((P.C, "C"), (P.D, "D")):
        if f.is_empty():
            continue
        a, b = f.window
        small = f.level(b + 1) if f.direction == DESC else f.level(a - 1)
        if not small.is_zero():
            errs.append(f"{name} does not vanish past its window")
        edge = f.step(a - 1) if f.direction == DESC else f.step(b)
        if not ch.is_quasi_iso(edge):
            errs.append(f"{name} does not stabilize past its window")
    total = sum(sum(ch.betti(fl.graded(P.C, k)).values()) for k in win)
    if total != sum(sum(ch.betti(fl.graded(P.D, k)).values()) for k in win):
        errs.append("total graded Betti numbers of C and D differ")
    src, tgt = _graded_sums(P.C, P.D, win)
    S, T = _direct_sum_or_zero(F, src), _direct_sum_or_zero(F, tgt)
    bt = P.big_twist
    if bt.source != S or bt.target != T:
        errs.append("big twist does not map the twisted graded sum of C to the graded sum of D")
    elif bt.check():
        errs.append(f"big twist: {bt.check()[0]}")
    elif not ch.is_quasi_iso(bt):
        errs.append("big twist not a quasi-isomorphism")
    if errs:
        return False, errs
    # the remaining zip conditions apart from the per-index twists
    Z = fz.DerivedFZip(P.C, P.D, P.glue, {})
    ok, zerrs = fz.validate(Z)
    zerrs = [e for e in zerrs if not e.startswith("twist ")]
    return not zerrs, zerrs


def perf_roundtrip(Z: DerivedFZip) -> bool:
    """from/to the pinched presentation preserves validity, type and levelwise Betti data."""
    P = from_derived_fzip(Z)
    if not validate_pinched(P)[0]:
        return False
    Z2 = to_derived_fzip(P)
    win = Z.window()
    w = (win.start, win.stop - 1) if win else (0, -1)
    return (fz.validate(Z2)[0] and fz.zip_type(Z2) == fz.zip_type(Z)
            and fl.levelwise_betti(Z2.C, w) == fl.levelwise_betti(Z.C, w)
            and fl.levelwise_betti(Z2.D, w) == fl.levelwise_betti(Z.D, w))
