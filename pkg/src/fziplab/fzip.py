"""Classical and derived F-zips.

A classical zip of rank r lives on GF(q)^r.  Its descending flag C and
ascending flag D are stored as basis matrices per index; below the stored
range C is everything and D is zero, above it C is zero and D is everything.
For every index k the graded pieces get fixed bases: the greedy columns of
the stored basis of C^k that are independent modulo C^{k+1} (resp. D_k modulo
D_{k-1}).  phi[k] sends the Frobenius twists of the gr_C basis vectors to
gr_D coordinates.

A derived zip is a pair of filtrations (C descending, D ascending), a
quasi-isomorphism between their colimits (None means the colimits are the same
complex and the glue is the identity) and twist maps
frobenius_twist(graded(C, k)) -> graded(D, k).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import chain as ch
from . import filt as fl
from . import linalg as la
from .chain import ChainMap, Complex
from .filt import ASC, DESC, Filtration
from .gf import FieldError, FieldSpec


# ============================================================ classical zips

@dataclass
class ClassicalFZip:
    field: FieldSpec
    rank: int
    C: dict[int, np.ndarray]
    D: dict[int, np.ndarray]
    phi: dict[int, np.ndarray] = dc_field(default_factory=dict)

    def c_at(self, k: int) -> np.ndarray:
        if k in self.C:
            return self.C[k]
        if not self.C or k < min(self.C):
            return la.identity(self.rank)
        if k > max(self.C):
            return la.zeros(self.rank, 0)
        raise ValueError(f"descending flag has a gap at index {k}")

    def d_at(self, k: int) -> np.ndarray:
        if k in self.D:
            return self.D[k]
        if not self.D or k > max(self.D):
            return la.identity(self.rank)
        if k < min(self.D):
            return la.zeros(self.rank, 0)
        raise ValueError(f"ascending flag has a gap at index {k}")

    def index_range(self) -> range:
        keys = list(self.C) + list(self.D)
        if not keys:
            return range(0, 1)
        return range(min(keys) - 1, max(keys) + 2)

    def gr_c_basis(self, k: int) -> np.ndarray:
        return la.quotient_basis(self.field, self.c_at(k + 1), self.c_at(k))

    def gr_d_basis(self, k: int) -> np.ndarray:
        return la.quotient_basis(self.field, self.d_at(k - 1), self.d_at(k))

    def proj_c(self, k: int) -> np.ndarray:
        """Vectors of C^k to gr_C^k coordinates."""
        return la.quotient_projector(self.field, la.colspace(self.field, self.c_at(k + 1)), self.gr_c_basis(k))

    def proj_d(self, k: int) -> np.ndarray:
        return la.quotient_projector(self.field, la.colspace(self.field, self.d_at(k - 1)), self.gr_d_basis(k))

    def jumps(self) -> list[int]:
        return [k for k in self.index_range() if self.gr_c_basis(k).shape[1]]

    def type(self) -> dict[int, int]:
        out = {}
        for k in self.index_range():
            t = self.gr_c_basis(k).shape[1]
            if t:
                out[k] = t
        return out

    def phi_at(self, k: int) -> np.ndarray:
        if k in self.phi:
            return self.phi[k]
        t = self.gr_c_basis(k).shape[1]
        return la.zeros(t, t)

    def check(self) -> list[str]:
        F, r = self.field, self.rank
        errs = []
        for name, flag in (("C", self.C), ("D", self.D)):
            if flag and sorted(flag) != list(range(min(flag), max(flag) + 1)):
                errs.append(f"flag {name} is not stored on a contiguous range")
                return errs
            for k, B in flag.items():
                if B.ndim != 2 or B.shape[0] != r:
                    errs.append(f"flag {name} at {k} has {B.shape[0]} rows, expected {r}")
                elif la.rank(F, B) != B.shape[1]:
                    errs.append(f"flag {name} at {k} has dependent columns")
        if errs:
            return errs
        for k in self.index_range():
            if la.rank(F, np.hstack([self.c_at(k), self.c_at(k + 1)])) != self.c_at(k).shape[1]:
                errs.append(f"C^{k + 1} is not contained in C^{k}")
            if la.rank(F, np.hstack([self.d_at(k), self.d_at(k - 1)])) != self.d_at(k).shape[1]:
                errs.append(f"D_{k - 1} is not contained in D_{k}")
        if errs:
            return errs
        for k in self.index_range():
            tc, td = self.gr_c_basis(k).shape[1], self.gr_d_basis(k).shape[1]
            if tc != td:
                errs.append(f"graded dimensions differ at index {k}: {tc} vs {td}")
                continue
            m = self.phi_at(k)
            if m.shape != (tc, tc):
                errs.append(f"phi at {k} has shape {m.shape}, expected {(tc, tc)}")
            elif not la.is_invertible(F, m):
                errs.append(f"phi at {k} is not invertible")
        extra = [k for k in self.phi if k not in self.index_range() and self.phi[k].size]
        if extra:
            errs.append(f"phi given at indices without graded pieces: {extra}")
        return errs

    def is_valid(self) -> bool:
        return not self.check()


def trivial_classical(field: FieldSpec, k: int = 0, rank: int = 1) -> ClassicalFZip:
    """rank copies of the trivial zip concentrated at index k."""
    I = la.identity(rank)
    return ClassicalFZip(field, rank, {k: I}, {k: I}, {k: I})


def unit_classical(field: FieldSpec) -> ClassicalFZip:
    return trivial_classical(field, 0, 1)


def classical_from_type(field: FieldSpec, tau: dict[int, int], Q: np.ndarray | None = None,
                        R: np.ndarray | None = None, phi: dict | None = None) -> ClassicalFZip:
    """Flags spanned by prefixes of the columns of Q (C) and R (D) realizing tau."""
    ks = sorted(k for k, v in tau.items() if v)
    r = sum(tau[k] for k in ks)
    Q = la.identity(r) if Q is None else Q
    R = la.identity(r) if R is None else R
    if not ks:
        return ClassicalFZip(field, 0, {}, {}, {})
    C, D = {}, {}
    for k in range(ks[0], ks[-1] + 1):
        above = sum(tau.get(j, 0) for j in ks if j >= k)
        below = sum(tau.get(j, 0) for j in ks if j <= k)
        # C^k: the last `above` columns, so that C^k for k small is all of Q
        C[k] = Q[:, r - above:]
        D[k] = R[:, :below]
    if phi is None:
        phi = {k: la.identity(tau[k]) for k in ks}
    return ClassicalFZip(field, r, C, D, dict(phi))


def random_classical(field: FieldSpec, rng: np.random.Generator, rank: int | None = None,
                     max_rank: int = 6, indices: tuple[int, int] = (0, 2)) -> ClassicalFZip:
    if rank is None:
        rank = int(rng.integers(1, max_rank + 1))
    ks = list(range(indices[0], indices[1] + 1))
    tau: dict[int, int] = {}
    for _ in range(rank):
        k = ks[int(rng.integers(len(ks)))]
        tau[k] = tau.get(k, 0) + 1
    Q = la.random_invertible(field, rng, rank)
    R = la.random_invertible(field, rng, rank)
    phi = {k: la.random_invertible(field, rng, v) for k, v in tau.items()}
    return classical_from_type(field, tau, Q, R, phi)


def classical_direct_sum(*ms: ClassicalFZip) -> ClassicalFZip:
    F = ms[0].field
    r = sum(m.rank for m in ms)
    ks = sorted(set().union(*(set(m.index_range()) for m in ms)))
    C, D = {}, {}
    for k in ks:
        C[k] = la.block_diag([m.c_at(k) for m in ms])
        D[k] = la.block_diag([m.d_at(k) for m in ms])
    phi = {k: la.block_diag([m.phi_at(k) for m in ms]) for k in ks}
    return ClassicalFZip(F, r, C, D, {k: v for k, v in phi.items() if v.size})


# --------------------------------------------------------- isomorphisms

def _hom_constraints(M: ClassicalFZip, N: ClassicalFZip):
    """F_p-linear conditions on g in Mat_r(F_q) for g: M -> N to be a morphism.

    g is parametrized by x[i, j, t] with g[i, j] = sum_t x[i, j, t] alpha^t,
    which is exactly the integer encoding of field elements."""
    F = M.field
    ks = sorted(set(M.index_range()) | set(N.index_range()))
    blocks = []  # (A, B, twisted): contributes A g B or A Frob(g) B

    def sub(A, B, twisted=False):
        if A.shape[0] and B.shape[1]:
            blocks.append((A, B, twisted))

    for k in ks:
        sub(la.left_annihilator(F, N.c_at(k)), M.c_at(k))
        sub(la.left_annihilator(F, N.d_at(k)), M.d_at(k))
        UM, VM = M.gr_c_basis(k), M.gr_d_basis(k)
        if UM.shape[1] == 0:
            continue
        PCN, PDN = N.proj_c(k), N.proj_d(k)
        lhs_a = la.matmul(F, N.phi_at(k), la.frob(F, PCN))  # phi^N Frob(P g U)
        lhs_b = la.frob(F, UM)
        sub(lhs_a, lhs_b, True)
        rhs_a = la.mat_neg(F, PDN)  # - P g V phi^M
        rhs_b = la.matmul(F, VM, M.phi_at(k))
        sub(rhs_a, rhs_b, False)
    return blocks


def _morphism_space(M: ClassicalFZip, N: ClassicalFZip) -> np.ndarray:
    """Basis (columns, over GF(p)) of the coefficient vectors of all zip morphisms M -> N."""
    F = M.field
    p, n, r = F.p, F.n, M.rank
    blocks = _hom_constraints(M, N)
    # merge each phi pair into one block of rows: twisted and plain parts for the
    # same k are consecutive and have equal output shapes
    merged = []
    i = 0
    while i < len(blocks):
        A, B, tw = blocks[i]
        if tw:
            A2, B2, _ = blocks[i + 1]
            merged.append([(A, B, True), (A2, B2, False)])
            i += 2
        else:
            merged.append([(A, B, False)])
            i += 1
    unknowns = [(a, b, t) for a in range(r) for b in range(r) for t in range(n)]
    alphas = [p ** t for t in range(n)]
    cols = []
    for a, b, t in unknowns:
        parts = []
        for group in merged:
            acc = None
            for A, B, tw in group:
                coeff = F.frob(alphas[t]) if tw else alphas[t]
                val = F.mul(F.mul(A[:, a][:, None], B[b, :][None, :]), coeff)
                acc = val if acc is None else F.add(acc, val)
            parts.append(acc.reshape(-1))
        vec = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        cols.append(F._digits[vec].reshape(-1) if n > 1 else vec)
    Fp = FieldSpec(p, 1, (0, 1))
    system = np.stack(cols, axis=1) if cols else la.zeros(0, 0)
    return la.nullspace(Fp, system)


def _coeffs_to_matrix(F: FieldSpec, r: int, x: np.ndarray) -> np.ndarray:
    n = F.n
    digits = np.asarray(x, dtype=np.int64).reshape(r, r, n)
    return digits @ (F.p ** np.arange(n, dtype=np.int64))


def find_isomorphism(M: ClassicalFZip, N: ClassicalFZip, seed: int = 0, tries: int = 4096,
                     exhaustive_limit: int = 4096) -> np.ndarray | None:
    """An invertible g with g(C_M) = C_N, g(D_M) = D_N intertwining phi, or None."""
    if M.field != N.field:
        raise FieldError("zips over different fields")
    if M.rank != N.rank or M.type() != N.type():
        return None
    F = M.field
    r = M.rank
    if r == 0:
        return la.zeros(0, 0)
    W = _morphism_space(M, N)
    dim = W.shape[1]
    if dim == 0:
        return None
    p = F.p
    if p ** dim <= exhaustive_limit:
        for idx in range(1, p ** dim):
            coeffs = np.array([(idx // p ** i) % p for i in range(dim)], dtype=np.int64)
            g = _coeffs_to_matrix(F, r, (W @ coeffs) % p)
            if la.is_invertible(F, g):
                return g
        return None
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        coeffs = rng.integers(0, p, size=dim)
        g = _coeffs_to_matrix(F, r, (W @ coeffs) % p)
        if la.is_invertible(F, g):
            return g
    return None


def is_isomorphic(M: ClassicalFZip, N: ClassicalFZip) -> bool:
    return find_isomorphism(M, N) is not None


def is_morphism(M: ClassicalFZip, N: ClassicalFZip, g: np.ndarray) -> bool:
    """Direct check that g respects both flags and intertwines phi."""
    F = M.field
    for k in sorted(set(M.index_range()) | set(N.index_range())):
        for src, tgt in ((M.c_at(k), N.c_at(k)), (M.d_at(k), N.d_at(k))):
            img = la.matmul(F, g, src)
            if la.rank(F, np.hstack([tgt, img])) != la.rank(F, tgt):
                return False
        UM = M.gr_c_basis(k)
        if UM.shape[1] == 0:
            continue
        lhs = la.matmul(F, N.phi_at(k), la.frob(F, la.matmul(F, N.proj_c(k), la.matmul(F, g, UM))))
        rhs = la.matmul(F, N.proj_d(k), la.matmul(F, g, la.matmul(F, M.gr_d_basis(k), M.phi_at(k))))
        if not np.array_equal(lhs, rhs):
            return False
    return True


# ------------------------------------------------------------ exterior powers

def _split_bases(M: ClassicalFZip, rng: np.random.Generator | None):
    """Lifts of the graded bases, optionally moved by random elements of the
    next flag step (a different splitting of the same flags)."""
    F = M.field
    U, V, cw, dw, blocks = [], [], [], [], []
    for k in M.jumps():
        u, v = M.gr_c_basis(k), M.gr_d_basis(k)
        if rng is not None:
            nc, nd = M.c_at(k + 1), M.d_at(k - 1)
            u = la.mat_add(F, u, la.matmul(F, nc, la.random_matrix(F, rng, nc.shape[1], u.shape[1])))
            v = la.mat_add(F, v, la.matmul(F, nd, la.random_matrix(F, rng, nd.shape[1], v.shape[1])))
        U.append(u)
        V.append(v)
        cw += [k] * u.shape[1]
        dw += [k] * v.shape[1]
        blocks.append(M.phi_at(k))
    r = M.rank
    U = np.hstack(U) if U else la.zeros(r, 0)
    V = np.hstack(V) if V else la.zeros(r, 0)
    return U, V, cw, dw, la.block_diag(blocks) if blocks else la.zeros(0, 0)


def exterior_power(M: ClassicalFZip, i: int, seed: int | None = None) -> ClassicalFZip:
    """∧^i M with the flags induced by a splitting; phi is ∧^i of the graded phi."""
    r = M.rank
    if not 0 <= i <= r:
        raise ValueError(f"exterior power {i} out of range for rank {r}")
    F = M.field
    rng = np.random.default_rng(seed) if seed is not None else None
    U, V, cw, dw, Phi = _split_bases(M, rng)
    subsets = list(itertools.combinations(range(r), i))
    wU = la.compound(F, U, i)
    wV = la.compound(F, V, i)
    wPhi = la.compound(F, Phi, i)
    cs = [sum(cw[j] for j in S) for S in subsets]
    ds = [sum(dw[j] for j in S) for S in subsets]
    ks = sorted(set(cs))
    C, D, phi = {}, {}, {}
    for k in range(ks[0], ks[-1] + 1):
        above = [a for a, s in enumerate(cs) if s > k]
        at = [a for a, s in enumerate(cs) if s == k]
        C[k] = wU[:, above + at]
        below = [a for a, s in enumerate(ds) if s < k]
        at_d = [a for a, s in enumerate(ds) if s == k]
        D[k] = wV[:, below + at_d]
        if at:
            phi[k] = wPhi[np.ix_(at_d, at)]
    N = ClassicalFZip(F, len(subsets), C, D, {})
    # the graded bases chosen by N coincide with the wedge vectors of weight k
    N.phi = phi
    return N


# ============================================================== derived zips

@dataclass
class DerivedFZip:
    C: Filtration
    D: Filtration
    glue: ChainMap | None = None
    twists: dict[int, ChainMap] = dc_field(default_factory=dict)

    @property
    def field(self) -> FieldSpec:
        return self.C.field

    def window(self) -> range:
        ws = [f.window for f in (self.C, self.D) if not f.is_empty()]
        if not ws:
            return range(0)
        return range(min(w[0] for w in ws), max(w[1] for w in ws) + 1)

    def twist_source(self, k: int) -> Complex:
        return ch.frobenius_twist(fl.graded(self.C, k))

    def twist(self, k: int) -> ChainMap:
        if k in self.twists:
            return self.twists[k]
        return ch.zero_map(self.twist_source(k), fl.graded(self.D, k))

    def glue_map(self) -> ChainMap:
        if self.glue is None:
            return ch.identity_map(self.C.colim())
        return self.glue


def validate(Z: DerivedFZip) -> tuple[bool, list[str]]:
    """(ok, diagnostics); the first diagnostic names the first failing condition."""
    F = Z.C.field
    parts = [Z.D.field] + ([Z.glue.field] if Z.glue is not None else []) + [t.field for t in Z.twists.values()]
    if any(x != F for x in parts):
        raise FieldError("components of the zip are over different fields")
    errs: list[str] = []
    if Z.C.direction != DESC:
        errs.append("the C filtration must be descending")
    if Z.D.direction != ASC:
        errs.append("the D filtration must be ascending")
    errs += [f"C: {e}" for e in Z.C.check()]
    errs += [f"D: {e}" for e in Z.D.check()]
    if errs:
        return False, errs
    KC, KD = Z.C.colim(), Z.D.colim()
    if Z.glue is None:
        if KC != KD:
            errs.append("glue is the identity but the colimits differ")
    else:
        g = Z.glue
        if g.source != KC or g.target != KD:
            errs.append("glue does not map colim C to colim D")
        elif g.check():
            errs.append(f"glue: {g.check()[0]}")
        elif not ch.is_quasi_iso(g):
            errs.append("glue not a quasi-isomorphism")
    if errs:
        return False, errs
    win = Z.window()
    for k in sorted(Z.twists):
        if k not in win and not (fl.graded(Z.C, k).is_zero() and fl.graded(Z.D, k).is_zero()):
            errs.append(f"twist {k} outside the filtration windows")
    for k in win:
        t = Z.twist(k)
        src, tgt = Z.twist_source(k), fl.graded(Z.D, k)
        if t.source != src or t.target != tgt:
            errs.append(f"twist {k} has the wrong source or target")
        elif t.check():
            errs.append(f"twist {k}: {t.check()[0]}")
        elif not ch.is_quasi_iso(t):
            errs.append(f"twist {k} not a quasi-isomorphism")
    return not errs, errs


def zip_type(Z: DerivedFZip) -> dict[tuple[int, int], int]:
    out = {}
    for k in Z.window():
        for i, v in ch.betti(fl.graded(Z.C, k)).items():
            out[(k, i)] = v
    return out


def euler(Z: DerivedFZip) -> dict[int, int]:
    out: dict[int, int] = {}
    for (k, i), v in zip_type(Z).items():
        out[k] = out.get(k, 0) + (-1) ** (i % 2) * v
    return {k: v for k, v in out.items() if v}


def is_degenerate_zip(Z: DerivedFZip) -> bool:
    return fl.is_degenerate(Z.C) and fl.is_degenerate(Z.D)


def is_strong_zip(Z: DerivedFZip) -> bool:
    return fl.is_strong(Z.C) and fl.is_strong(Z.D)


def synthesize_twists(C: Filtration, D: Filtration) -> dict[int, ChainMap]:
    """Quasi-isomorphisms frob(gr^k C) -> gr^k D matching echelonized homology bases."""
    ks = set()
    for f in (C, D):
        if not f.is_empty():
            ks |= set(fl.graded_window(f))
    out = {}
    for k in sorted(ks):
        src = ch.frobenius_twist(fl.graded(C, k))
        tgt = fl.graded(D, k)
        if ch.betti(src) != ch.betti(tgt):
            raise ValueError(f"graded pieces at index {k} have different Betti numbers")
        t = ch.synthesize_quasi_iso(src, tgt)
        if not t.is_zero():
            out[k] = t
    return out


def zip_from_filtrations(C: Filtration, D: Filtration) -> DerivedFZip:
    """Complete two filtrations to a zip with synthesized glue and twists."""
    KC, KD = C.colim(), D.colim()
    glue = None if KC == KD else ch.synthesize_quasi_iso(KC, KD)
    return DerivedFZip(C, D, glue, synthesize_twists(C, D))


def tensor(Z1: DerivedFZip, Z2: DerivedFZip) -> DerivedFZip:
    if Z1.field != Z2.field:
        raise FieldError("tensor of zips over different fields")
    C = fl.day_convolution(Z1.C, Z2.C)
    D = fl.day_convolution(Z1.D, Z2.D)
    return zip_from_filtrations(C, D)


# ------------------------------------------------- classical <-> derived

def embed(M: ClassicalFZip, n: int) -> DerivedFZip:
    """M placed in homological degree n: C^k and D_k as complexes concentrated in degree n."""
    F = M.field
    r = M.rank
    jumps = M.jumps()
    if not jumps:
        return DerivedFZip(fl.zero_filtration(F, DESC), fl.zero_filtration(F, ASC), None, {})
    a, b = jumps[0], jumps[-1]
    cb = {k: (la.identity(r) if k == a else M.c_at(k)) for k in range(a, b + 1)}
    db = {k: (la.identity(r) if k == b else M.d_at(k)) for k in range(a, b + 1)}
    c_levels = [ch.concentrated(F, cb[k].shape[1], n) for k in range(a, b + 1)]
    d_levels = [ch.concentrated(F, db[k].shape[1], n) for k in range(a, b + 1)]
    c_steps = [ChainMap(c_levels[k + 1 - a], c_levels[k - a], {n: la.solve(F, cb[k], cb[k + 1])})
               for k in range(a, b)]
    d_steps = [ChainMap(d_levels[k - a], d_levels[k + 1 - a], {n: la.solve(F, db[k + 1], db[k])})
               for k in range(a, b)]
    C = Filtration(DESC, a, c_levels, c_steps, F)
    D = Filtration(ASC, a, d_levels, d_steps, F)
    twists = {}
    for k in jumps:
        src = ch.frobenius_twist(fl.graded(C, k))
        tgt = fl.graded(D, k)
        proj = la.matmul(F, M.proj_c(k), cb[k])  # C^k level coordinates -> gr_C coordinates
        lift = la.solve(F, db[k], M.gr_d_basis(k))  # gr_D basis in D_k level coordinates
        f = la.matmul(F, lift, la.matmul(F, M.phi_at(k), la.frob(F, proj)))
        # degree n of each cone is (level k+1 or k-1 in degree n-1 = 0) + (level k)
        twists[k] = ChainMap(src, tgt, {n: f})
    return DerivedFZip(C, D, None, twists)


def unit_zip(field: FieldSpec) -> DerivedFZip:
    return embed(unit_classical(field), 0)


def _homology_lift(f: ChainMap, n: int, u: np.ndarray) -> np.ndarray:
    """Cycles of f.source whose classes map to the classes with coordinates u."""
    F = f.field
    y = la.solve(F, ch.homology_map(f, n), u)
    if y is None:
        raise ValueError("class is not in the image; the filtration is not strong")
    return la.matmul(F, f.source._homology_data(n)[0], y)


def pi(Z: DerivedFZip, n: int) -> ClassicalFZip:
    """The classical zip on H_n of the colimit induced by a degenerate zip."""
    if not is_degenerate_zip(Z):
        raise ValueError("pi needs a degenerate zip")
    F = Z.field
    C, D = Z.C, Z.D
    K = C.colim()
    r = ch.betti(K).get(n, 0)
    if r == 0:
        return ClassicalFZip(F, 0, {}, {}, {})
    g = Z.glue_map()
    glue_inv = la.inverse(F, ch.homology_map(g, n))  # H_n(colim D) -> H_n(colim C)
    cw = range(C.lo, C.hi + 1)
    dw = range(D.lo, D.hi + 1)
    Ct = {k: la.colspace(F, ch.homology_map(C.composite(k, C.lo), n)) for k in cw}
    Dt = {k: la.colspace(F, la.matmul(F, glue_inv, ch.homology_map(D.composite(k, D.hi), n))) for k in dw}
    # make the flags contiguous over a common range
    lo = min(cw.start, dw.start)
    hi = max(cw.stop, dw.stop) - 1
    Cf = {k: (Ct[k] if k in Ct else (la.identity(r) if k < cw.start else la.zeros(r, 0)))
          for k in range(lo, hi + 1)}
    Df = {k: (Dt[k] if k in Dt else (la.zeros(r, 0) if k < dw.start else la.identity(r)))
          for k in range(lo, hi + 1)}
    M = ClassicalFZip(F, r, Cf, Df, {})
    phi = {}
    for k in M.jumps():
        U = M.gr_c_basis(k)
        z = _homology_lift(C.composite(k, C.lo), n, U)  # cycles of C(k)
        grC = fl.graded(C, k)
        top = C.level(k + 1).dim(n - 1)
        cyc = np.vstack([la.zeros(top, U.shape[1]), z])
        w = la.matmul(F, Z.twist(k).map(n), la.frob(F, cyc))  # cycles of gr^k D
        grD = fl.graded(D, k)
        Dk = D.level(k)
        below = D.level(k - 1).dim(n - 1)
        ZD = Dk.cycles(n)
        # find cycles y of D(k) with (0, y) - w a boundary of the cone
        A = np.hstack([np.vstack([la.zeros(below, ZD.shape[1]), ZD]), la.mat_neg(F, grD.diff(n + 1))])
        sol = la.solve(F, A, w)
        if sol is None:
            raise ValueError(f"twist at {k} does not land in the image of D({k})")
        y = la.matmul(F, ZD, sol[:ZD.shape[1]])
        cls = ch.homology_coords(Dk, n, y)
        img = la.matmul(F, glue_inv, la.matmul(F, ch.homology_map(D.composite(k, D.hi), n), cls))
        phi[k] = la.matmul(F, M.proj_d(k), img)
    M.phi = phi
    return M


# ------------------------------------------------------------ direct sums

def _cone_permutation(pieces: list[tuple[int, int]]) -> np.ndarray:
    """Permutation from ⊕ cone(f_i) to cone(⊕ f_i) in one degree, given the
    (source, target) dimensions of each summand's cone in that degree."""
    s_total = sum(s for s, _ in pieces)
    total = s_total + sum(t for _, t in pieces)
    P = la.zeros(total, total)
    col = s_off = 0
    t_off = s_total
    for s, t in pieces:
        for a in range(s):
            P[s_off + a, col + a] = 1
        col += s
        s_off += s
        for a in range(t):
            P[t_off + a, col + a] = 1
        col += t
        t_off += t
    return P


def _cone_dims(f: ChainMap, d: int) -> tuple[int, int]:
    return f.source.dim(d - 1), f.target.dim(d)


def zip_direct_sum(*zs: DerivedFZip) -> DerivedFZip:
    F = zs[0].field
    C = fl.filtration_direct_sum(*(z.C for z in zs))
    D = fl.filtration_direct_sum(*(z.D for z in zs))
    if all(z.glue is None for z in zs):
        glue = None
    else:
        glue = ch.map_direct_sum(*(z.glue_map() for z in zs))
    twists = {}
    for k in set(fl.graded_window(C)) | set(fl.graded_window(D)):
        src = ch.frobenius_twist(fl.graded(C, k))
        tgt = fl.graded(D, k)
        c_steps = [fl.pad(z.C, C.window).step(k) for z in zs]
        d_steps = [fl.pad(z.D, D.window).step(k - 1) for z in zs]
        # a summand keeps its own twist where padding did not change its graded pieces
        own = [fl.graded(z.C, k) == ch.cone(cs) and fl.graded(z.D, k) == ch.cone(ds)
               for z, cs, ds in zip(zs, c_steps, d_steps)]
        maps = {}
        for d in set(src.degrees) | set(tgt.degrees):
            blocks = []
            for z, cs, ds, keep in zip(zs, c_steps, d_steps, own):
                sc, tc = _cone_dims(cs, d)
                sd, td = _cone_dims(ds, d)
                blocks.append(z.twist(k).map(d) if keep else la.zeros(sd + td, sc + tc))
            Pc = _cone_permutation([_cone_dims(cs, d) for cs in c_steps])
            Pd = _cone_permutation([_cone_dims(ds, d) for ds in d_steps])
            maps[d] = la.matmul(F, Pd, la.matmul(F, la.block_diag(blocks), Pc.T))
        t = ChainMap(src, tgt, maps)
        if not t.is_zero():
            twists[k] = t
    return DerivedFZip(C, D, glue, twists)


@dataclass
class Decomposition:
    summands: list[tuple[int, ClassicalFZip]]
    rebuilt: DerivedFZip
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def rebuild(summands: list[tuple[int, ClassicalFZip]], field: FieldSpec) -> DerivedFZip:
    parts = [embed(M, n) for n, M in summands]
    if not parts:
        return DerivedFZip(fl.zero_filtration(field, DESC), fl.zero_filtration(field, ASC), None, {})
    return zip_direct_sum(*parts)


def decompose(Z: DerivedFZip) -> Decomposition:
    """Split a degenerate zip into embedded classical zips, one per homological degree."""
    if not is_degenerate_zip(Z):
        raise ValueError("only degenerate zips decompose into classical pieces")
    degrees = sorted(ch.betti(Z.C.colim()))
    summands = [(n, pi(Z, n)) for n in degrees]
    R = rebuild(summands, Z.field)
    ranges = [w for w in (Z.window(), R.window()) if w]
    lo = min((w.start for w in ranges), default=0)
    hi = max((w.stop for w in ranges), default=0) - 1
    checks = {
        "type": zip_type(R) == zip_type(Z),
        "euler": euler(R) == euler(Z),
        "levels C": fl.levelwise_betti(R.C, (lo, hi)) == fl.levelwise_betti(Z.C, (lo, hi)),
        "levels D": fl.levelwise_betti(R.D, (lo, hi)) == fl.levelwise_betti(Z.D, (lo, hi)),
        "valid": validate(R)[0],
    }
    return Decomposition(summands, R, checks)


# ----------------------------------------------------------- constructions

def _require_type(M: ClassicalFZip, want: dict[int, int], what: str) -> None:
    if M.type() != {k: v for k, v in want.items() if v}:
        raise ValueError(f"{what} needs a classical zip of type {want}, got {M.type()}")


def lift_curve(M: ClassicalFZip) -> DerivedFZip:
    """A[0] ⊕ M[-1] ⊕ A[-2] with the trivial rank-one zips at indices 0 and 1."""
    g = M.rank // 2
    _require_type(M, {0: g, 1: g}, "lift_curve")
    F = M.field
    return zip_direct_sum(embed(trivial_classical(F, 0), 0), embed(M, -1), embed(trivial_classical(F, 1), -2))


def lift_k3(M: ClassicalFZip) -> DerivedFZip:
    """A[0] ⊕ M[-2] ⊕ A[-4] with the trivial rank-one zips at indices 0 and 2."""
    _require_type(M, {0: 1, 1: 20, 2: 1}, "lift_k3")
    F = M.field
    return zip_direct_sum(embed(trivial_classical(F, 0), 0), embed(M, -2), embed(trivial_classical(F, 2), -4))


# ---------------------------------------------------------------- pairings

def pairing_target(Z: DerivedFZip, shift: int) -> Complex:
    return ch.shift(ch.dual(Z.C.colim()), shift)


def standard_pairing(Z: DerivedFZip, shift: int) -> ChainMap:
    """A quasi-isomorphism colim C -> dual(colim C)[shift] built from split forms."""
    return ch.synthesize_quasi_iso(Z.C.colim(), pairing_target(Z, shift))


def check_dr_pairing(Z: DerivedFZip, shift: int, w: ChainMap) -> bool:
    K = Z.C.colim()
    T = pairing_target(Z, shift)
    if not w.source.same_shape(K) or not w.target.same_shape(T):
        raise ValueError("pairing does not map colim C to the shifted dual")
    if w.source != K or w.target != T:
        raise ValueError("pairing source or target differs from colim C and its shifted dual")
    return not w.check() and ch.is_quasi_iso(w)


# ------------------------------------------------------------ random zips

def filtered_basis_zip(K: Complex, c_idx: dict[int, list[int]], d_idx: dict[int, list[int]]) -> DerivedFZip:
    """Filtrations by spans of basis vectors.

    c_idx[d][j] / d_idx[d][j] are the C- and D-indices of the j-th basis vector
    of K_d; C^k is spanned by vectors with C-index >= k and D_k by those with
    D-index <= k.  Both must be subcomplexes.  Glue is the identity and the
    twists are synthesized."""
    F = K.field

    def sub(keep):
        idx = {d: [j for j in range(K.dim(d)) if keep(d, j)] for d in K.degrees}
        dims = {d: len(v) for d, v in idx.items()}
        diffs = {}
        for d in K.degrees:
            if d - 1 in idx:
                full = K.diff(d)
                rows_out = [j for j in range(K.dim(d - 1)) if j not in set(idx[d - 1])]
                if full[np.ix_(rows_out, idx[d])].any():
                    raise ValueError("basis filtration is not closed under the differential")
                diffs[d] = full[np.ix_(idx[d - 1], idx[d])]
        lo = K.lo
        return Complex(F, lo, [dims[d] for d in K.degrees], diffs), idx

    def incl(small, big, degs):
        return {d: la.identity(len(big.get(d, [])))[:, [big[d].index(j) for j in small.get(d, [])]]
                for d in degs}

    all_c = [v for d in K.degrees for v in c_idx.get(d, [])]
    all_d = [v for d in K.degrees for v in d_idx.get(d, [])]
    if not all_c:
        return DerivedFZip(fl.zero_filtration(F, DESC), fl.zero_filtration(F, ASC), None, {})
    ca, cb = min(all_c), max(all_c)
    da, db = min(all_d), max(all_d)
    cl = [sub(lambda d, j, k=k: c_idx[d][j] >= k) for k in range(ca, cb + 1)]
    dl = [sub(lambda d, j, k=k: d_idx[d][j] <= k) for k in range(da, db + 1)]
    c_steps = []
    for k in range(ca, cb):
        (s, si), (t, ti) = cl[k + 1 - ca], cl[k - ca]
        c_steps.append(ChainMap(s, t, incl(si, ti, s.degrees)))
    d_steps = []
    for k in range(da, db):
        (s, si), (t, ti) = dl[k - da], dl[k + 1 - da]
        d_steps.append(ChainMap(s, t, incl(si, ti, s.degrees)))
    C = Filtration(DESC, ca, [c for c, _ in cl], c_steps, F)
    D = Filtration(ASC, da, [c for c, _ in dl], d_steps, F)
    return DerivedFZip(C, D, None, synthesize_twists(C, D))


def cell_zip(field: FieldSpec, cells: list[tuple[int, int, int]],
             edges: list[tuple[int, int]] = ()) -> DerivedFZip:
    """filtered_basis_zip on a complex with one basis vector per cell.

    cells[i] = (degree, C-index, D-index); each edge (t, b) sets the
    differential of cell t to cell b (one degree lower)."""
    degs = sorted({c[0] for c in cells})
    if not degs:
        return DerivedFZip(fl.zero_filtration(field, DESC), fl.zero_filtration(field, ASC), None, {})
    pos, c_idx, d_idx = {}, {}, {}
    for i, (d, c, dd) in enumerate(cells):
        pos[i] = len(c_idx.setdefault(d, []))
        c_idx[d].append(c)
        d_idx.setdefault(d, []).append(dd)
    dims = {d: len(c_idx.get(d, [])) for d in range(degs[0], degs[-1] + 1)}
    diffs = {}
    for t, b in edges:
        d = cells[t][0]
        if cells[b][0] != d - 1:
            raise ValueError("an edge must lower the degree by one")
        m = diffs.setdefault(d, la.zeros(dims.get(d - 1, 0), dims[d]))
        m[pos[b], pos[t]] = 1
    return filtered_basis_zip(ch.from_dims(field, dims, diffs), c_idx, d_idx)


def random_degenerate_zip(field: FieldSpec, rng: np.random.Generator, max_rank: int = 3,
                          degrees: tuple[int, int] = (-2, 0), noise: bool = True) -> DerivedFZip:
    """⊕ embed(M_n, n) for random classical zips, then perturbed levelwise."""
    ns = list(range(degrees[0], degrees[1] + 1))
    picked = sorted(set(int(x) for x in rng.choice(ns, size=int(rng.integers(1, len(ns) + 1)))))
    Z = rebuild([(n, random_classical(field, rng, max_rank=max_rank)) for n in picked], field)
    if not noise:
        return Z
    C = fl.perturb(Z.C, rng, noise_dim=2, degrees=degrees)
    D = fl.perturb(Z.D, rng, noise_dim=2, degrees=degrees)
    return zip_from_filtrations(C, D)


def random_zip(field: FieldSpec, rng: np.random.Generator, degenerate: bool | None = None) -> DerivedFZip:
    """A random zip from a basis-filtered split complex.

    Homology cells and contractible pairs carry equal C- and D-indices.  A
    non-degenerate zip additionally gets a four-cell gadget: an edge u -> v
    with (C, D) indices (k, k+1) -> (k+1, k), balanced by free cells with
    indices (k+1, k) and (k, k+1) in the degrees of u and v."""
    if degenerate is None:
        degenerate = bool(rng.integers(2))
    cells: list[tuple[int, int, int]] = []  # (degree, c, d)
    edges: list[tuple[int, int]] = []  # indices into cells: top -> bottom
    for _ in range(int(rng.integers(1, 4))):
        k = int(rng.integers(0, 3))
        cells.append((int(rng.integers(-2, 1)), k, k))
    for _ in range(int(rng.integers(0, 2))):
        k = int(rng.integers(0, 3))
        e = int(rng.integers(-1, 1))
        cells += [(e, k, k), (e - 1, k, k)]
        edges.append((len(cells) - 2, len(cells) - 1))
    if not degenerate:
        for _ in range(int(rng.integers(1, 3))):
            k = int(rng.integers(0, 2))
            e = int(rng.integers(-1, 1))
            cells += [(e, k, k + 1), (e - 1, k + 1, k), (e, k + 1, k), (e - 1, k, k + 1)]
            edges.append((len(cells) - 4, len(cells) - 3))
    Z = cell_zip(field, cells, edges)
    lo, hi = min(c[0] for c in cells), max(c[0] for c in cells)
    C = fl.perturb(Z.C, rng, noise_dim=2, degrees=(lo, hi))
    D = fl.perturb(Z.D, rng, noise_dim=2, degrees=(lo, hi))
    return zip_from_filtrations(C, D)
