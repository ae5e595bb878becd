"""Bounded chain complexes of finite-dimensional GF(q)-spaces.

Homological indexing: the differential d_d goes from C_d to C_{d-1} and is
stored as a dims[d-1] x dims[d] matrix acting on column vectors.

Sign conventions:
  shift(C, k)_d = C_{d-k}, differential multiplied by (-1)^k
  cone(f)_d = source_{d-1} + target_d,  d(m, t) = (-d m, d t - f m)
  dual(C)_d = (C_{-d})^*, differential (-1)^d times the transpose of d_{-d+1}
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .gf import FieldError, FieldSpec


class Complex:
    """A bounded complex.  Zero spaces at either end are trimmed on construction,
    so two complexes are equal exactly when they agree degreewise."""

    def __init__(self, field: FieldSpec, lo: int = 0, dims=(), diffs: dict | None = None):
        dims = [int(x) for x in dims]
        if any(x < 0 for x in dims):
            raise ValueError("negative dimension")
        first = next((i for i, x in enumerate(dims) if x), None)
        if first is None:
            lo, dims = 0, []
        else:
            last = max(i for i, x in enumerate(dims) if x)
            lo, dims = lo + first, dims[first:last + 1]
        self.field = field
        self.lo = lo
        self.dims = tuple(dims)
        self._diffs: dict[int, np.ndarray] = {}
        for d, m in (diffs or {}).items():
            d = int(d)
            m = np.asarray(m, dtype=np.int64)
            want = (self.dim(d - 1), self.dim(d))
            if m.size == 0 and (want[0] == 0 or want[1] == 0):
                continue
            if m.shape != want:
                raise ValueError(f"differential in degree {d} has shape {m.shape}, expected {want}")
            if m.any():
                self._diffs[d] = m
        self._cache: dict = {}

    @property
    def hi(self) -> int:
        return self.lo + len(self.dims) - 1

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def dim(self, d: int) -> int:
        i = d - self.lo
        return self.dims[i] if 0 <= i < len(self.dims) else 0

    def diff(self, d: int) -> np.ndarray:
        m = self._diffs.get(d)
        if m is None:
            return la.zeros(self.dim(d - 1), self.dim(d))
        return m

    def dims_dict(self) -> dict[int, int]:
        return {d: self.dim(d) for d in self.degrees if self.dim(d)}

    def is_zero(self) -> bool:
        return not self.dims

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def euler(self) -> int:
        return sum((-1) ** (d % 2) * self.dim(d) for d in self.degrees)

    def check(self) -> list[str]:
        """Problems with the complex (empty when d∘d = 0 everywhere)."""
        errs = []
        F = self.field
        for d in range(self.lo + 2, self.hi + 1):
            if la.matmul(F, self.diff(d - 1), self.diff(d)).any():
                errs.append(f"d_{d - 1} d_{d} is not zero")
        return errs

    def same_shape(self, other: "Complex") -> bool:
        return self.field == other.field and self.lo == other.lo and self.dims == other.dims

    def __eq__(self, other):
        if not isinstance(other, Complex) or not self.same_shape(other):
            return False
        return all(np.array_equal(self.diff(d), other.diff(d)) for d in self.degrees)

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return "Complex(0)"
        return f"Complex({self.field!r}, {self.dims_dict()})"

    # ------------------------------------------------------------ cached data

    def rank_diff(self, d: int) -> int:
        key = ("rank", d)
        if key not in self._cache:
            self._cache[key] = la.rank(self.field, self.diff(d))
        return self._cache[key]

    def cycles(self, d: int) -> np.ndarray:
        key = ("Z", d)
        if key not in self._cache:
            self._cache[key] = la.nullspace(self.field, self.diff(d))
        return self._cache[key]

    def _homology_data(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """(representatives H, projector P) with P z = coordinates of [z] for cycles z."""
        key = ("H", d)
        if key in self._cache:
            return self._cache[key]
        F = self.field
        n = self.dim(d)
        Z = self.cycles(d)
        B = la.colspace(F, self.diff(d + 1))
        H = Z[:, la.extend_columns(F, B, Z)]
        rest = la.identity(n)[:, la.extend_columns(F, np.hstack([B, H]), la.identity(n))]
        basis = np.hstack([B, H, rest])
        P = la.inverse(F, basis)[B.shape[1]:B.shape[1] + H.shape[1]] if n else la.zeros(0, 0)
        self._cache[key] = (H, np.ascontiguousarray(P))
        return self._cache[key]


def zero_complex(field: FieldSpec) -> Complex:
    return Complex(field)


def concentrated(field: FieldSpec, dim: int, degree: int = 0) -> Complex:
    return Complex(field, degree, [dim])


def from_dims(field: FieldSpec, dims: dict[int, int], diffs: dict | None = None) -> Complex:
    if not dims:
        return Complex(field)
    lo, hi = min(dims), max(dims)
    return Complex(field, lo, [dims.get(d, 0) for d in range(lo, hi + 1)], diffs)


class ChainMap:
    """Degreewise matrices f_d : source_d -> target_d.  Missing degrees are zero."""

    def __init__(self, source: Complex, target: Complex, maps: dict | None = None):
        if source.field != target.field:
            raise FieldError("chain map between complexes over different fields")
        self.source = source
        self.target = target
        self._maps: dict[int, np.ndarray] = {}
        for d, m in (maps or {}).items():
            d = int(d)
            m = np.asarray(m, dtype=np.int64)
            want = (target.dim(d), source.dim(d))
            if m.size == 0 and (want[0] == 0 or want[1] == 0):
                continue
            if m.shape != want:
                raise ValueError(f"map in degree {d} has shape {m.shape}, expected {want}")
            if m.any():
                self._maps[d] = m

    @property
    def field(self) -> FieldSpec:
        return self.source.field

    def map(self, d: int) -> np.ndarray:
        m = self._maps.get(d)
        if m is None:
            return la.zeros(self.target.dim(d), self.source.dim(d))
        return m

    @property
    def degrees(self) -> list[int]:
        return sorted(set(self.source.degrees) | set(self.target.degrees))

    def check(self) -> list[str]:
        F = self.field
        errs = []
        for d in self.degrees:
            lhs = la.matmul(F, self.map(d - 1), self.source.diff(d))
            rhs = la.matmul(F, self.target.diff(d), self.map(d))
            if not np.array_equal(lhs, rhs):
                errs.append(f"square in degree {d} does not commute")
        return errs

    def is_zero(self) -> bool:
        return not self._maps

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return False
        if self.source != other.source or self.target != other.target:
            return False
        return all(np.array_equal(self.map(d), other.map(d)) for d in self.degrees)

    __hash__ = None

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


def identity_map(C: Complex) -> ChainMap:
    return ChainMap(C, C, {d: la.identity(C.dim(d)) for d in C.degrees})


def zero_map(X: Complex, Y: Complex) -> ChainMap:
    return ChainMap(X, Y)


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """g ∘ f."""
    if not f.target.same_shape(g.source):
        raise ValueError("cannot compose: target of f differs from source of g")
    F = f.field
    return ChainMap(f.source, g.target,
                    {d: la.matmul(F, g.map(d), f.map(d)) for d in f.source.degrees})


def add_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    F = f.field
    return ChainMap(f.source, f.target,
                    {d: la.mat_add(F, f.map(d), g.map(d)) for d in f.degrees})


# --------------------------------------------------------------- homology

@dataclass
class Homology:
    betti: dict[int, int]
    basis: dict[int, np.ndarray]

    def __getitem__(self, d):
        return self.betti.get(d, 0)


def betti(C: Complex) -> dict[int, int]:
    out = {}
    for d in C.degrees:
        h = C.dim(d) - C.rank_diff(d) - C.rank_diff(d + 1)
        if h:
            out[d] = h
    return out


def homology(C: Complex) -> Homology:
    """Betti numbers and, per degree, cycles representing a basis of H_d."""
    b = betti(C)
    return Homology(b, {d: C._homology_data(d)[0] for d in b})


def homology_coords(C: Complex, d: int, z: np.ndarray) -> np.ndarray:
    """Coordinates of the classes of the cycle columns z in the basis of homology(C)."""
    return la.matmul(C.field, C._homology_data(d)[1], z)


def homology_map(f: ChainMap, d: int) -> np.ndarray:
    H = f.source._homology_data(d)[0]
    P = f.target._homology_data(d)[1]
    F = f.field
    return la.matmul(F, P, la.matmul(F, f.map(d), H))


def induced_rank(f: ChainMap, d: int) -> int:
    """rank of H_d(f), from cycles of the source against boundaries of the target."""
    F = f.field
    Z = f.source.cycles(d)
    if Z.shape[1] == 0:
        return 0
    img = la.matmul(F, f.map(d), Z)
    bd = f.target.diff(d + 1)
    return la.rank(F, np.hstack([img, bd])) - f.target.rank_diff(d + 1)


def is_exact(C: Complex) -> bool:
    return not betti(C)


def is_quasi_iso(f: ChainMap) -> bool:
    bs, bt = betti(f.source), betti(f.target)
    if bs != bt:
        return False
    return all(induced_rank(f, d) == h for d, h in bs.items())


def is_monomorphism(f: ChainMap) -> bool:
    return all(induced_rank(f, d) == h for d, h in betti(f.source).items())


def euler(C: Complex) -> int:
    return C.euler()


# ----------------------------------------------------------- constructions

def shift(C: Complex, k: int) -> Complex:
    sign = (-1) ** (k % 2)
    F = C.field
    diffs = {d + k: (C.diff(d) if sign == 1 else la.mat_neg(F, C.diff(d))) for d in C.degrees}
    return Complex(F, C.lo + k, C.dims, diffs)


def shift_map(f: ChainMap, k: int) -> ChainMap:
    return ChainMap(shift(f.source, k), shift(f.target, k),
                    {d + k: f.map(d) for d in f.degrees})


def _span(*cs: Complex) -> range:
    nonzero = [c for c in cs if not c.is_zero()]
    if not nonzero:
        return range(0)
    return range(min(c.lo for c in nonzero), max(c.hi for c in nonzero) + 1)


def cone(f: ChainMap) -> Complex:
    S, T, F = f.source, f.target, f.field
    degs = _span(shift(S, 1), T)
    dims = [S.dim(d - 1) + T.dim(d) for d in degs]
    diffs = {}
    for d in degs:
        top = np.hstack([la.mat_neg(F, S.diff(d - 1)), la.zeros(S.dim(d - 2), T.dim(d))])
        bot = np.hstack([la.mat_neg(F, f.map(d - 1)), T.diff(d)])
        diffs[d] = np.vstack([top, bot])
    return Complex(F, degs.start if degs else 0, dims, diffs)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """The canonical map target -> cone(f)."""
    K = cone(f)
    S, T = f.source, f.target
    return ChainMap(T, K, {d: np.vstack([la.zeros(S.dim(d - 1), T.dim(d)), la.identity(T.dim(d))])
                           for d in T.degrees})


def cone_projection(f: ChainMap) -> ChainMap:
    """The canonical map cone(f) -> shift(source, 1); it induces the connecting maps."""
    K = cone(f)
    S, T = f.source, f.target
    return ChainMap(K, shift(S, 1),
                    {d: np.hstack([la.identity(S.dim(d - 1)), la.zeros(S.dim(d - 1), T.dim(d))])
                     for d in K.degrees})


def connecting_ranks(f: ChainMap) -> dict[int, int]:
    """rank of H_d(cone f) -> H_{d-1}(source) for each d where it is nonzero."""
    proj = cone_projection(f)
    out = {}
    for d in proj.source.degrees:
        r = induced_rank(proj, d)
        if r:
            out[d] = r
    return out


def cone_of_square(f: ChainMap, g: ChainMap, alpha: ChainMap, beta: ChainMap) -> ChainMap:
    """The map cone(f) -> cone(g) induced by a strictly commuting square
    beta ∘ f = g ∘ alpha with alpha: source f -> source g, beta: target f -> target g."""
    K1, K2 = cone(f), cone(g)
    return ChainMap(K1, K2, {d: la.block_diag([alpha.map(d - 1), beta.map(d)]) for d in K1.degrees})


def direct_sum(*cs: Complex) -> Complex:
    if not cs:
        raise ValueError("direct_sum needs at least one complex")
    F = cs[0].field
    if any(c.field != F for c in cs):
        raise FieldError("direct sum of complexes over different fields")
    degs = _span(*cs)
    dims = [sum(c.dim(d) for c in cs) for d in degs]
    diffs = {d: la.block_diag([c.diff(d) for c in cs]) for d in degs}
    return Complex(F, degs.start if degs else 0, dims, diffs)


def map_direct_sum(*fs: ChainMap) -> ChainMap:
    S = direct_sum(*(f.source for f in fs))
    T = direct_sum(*(f.target for f in fs))
    degs = set(S.degrees) | set(T.degrees)
    return ChainMap(S, T, {d: la.block_diag([f.map(d) for f in fs]) for d in degs})


def sum_injection(cs: list[Complex], i: int) -> ChainMap:
    """Inclusion of the i-th summand into direct_sum(*cs)."""
    S = direct_sum(*cs)
    maps = {}
    for d in cs[i].degrees:
        off = sum(c.dim(d) for c in cs[:i])
        m = la.zeros(S.dim(d), cs[i].dim(d))
        m[off:off + cs[i].dim(d)] = la.identity(cs[i].dim(d))
        maps[d] = m
    return ChainMap(cs[i], S, maps)


def block_chain_map(field: FieldSpec, sources: list[Complex], targets: list[Complex],
                    blocks: dict[tuple[int, int], ChainMap]) -> ChainMap:
    """Map between direct sums given by blocks[(target index, source index)]."""
    S = direct_sum(*sources) if sources else Complex(field)
    T = direct_sum(*targets) if targets else Complex(field)
    maps = {}
    for d in set(S.degrees) | set(T.degrees):
        m = la.zeros(T.dim(d), S.dim(d))
        for (ti, si), f in blocks.items():
            ro = sum(c.dim(d) for c in targets[:ti])
            co = sum(c.dim(d) for c in sources[:si])
            blk = f.map(d)
            m[ro:ro + blk.shape[0], co:co + blk.shape[1]] = blk
        maps[d] = m
    return ChainMap(S, T, maps)


def inverse_map(f: ChainMap) -> ChainMap:
    """Inverse of a degreewise invertible chain map."""
    F = f.field
    return ChainMap(f.target, f.source, {d: la.inverse(F, f.map(d)) for d in f.source.degrees})


def random_isomorphic_copy(C: Complex, rng: np.random.Generator) -> ChainMap:
    """A degreewise isomorphism from C onto a random change of basis of C."""
    F = C.field
    P = {d: la.random_invertible(F, rng, C.dim(d)) for d in C.degrees}
    diffs = {}
    for d in C.degrees:
        if d - 1 in P:
            diffs[d] = la.matmul(F, P[d - 1], la.matmul(F, C.diff(d), la.inverse(F, P[d])))
    D = Complex(F, C.lo, C.dims, diffs)
    return ChainMap(C, D, P)


def _tensor_layout(C: Complex, D: Complex, d: int) -> list[tuple[int, int, int, int]]:
    """Blocks (i, j, offset, size) of tensor(C, D)_d, ordered by i."""
    out, off = [], 0
    for i in C.degrees:
        j = d - i
        size = C.dim(i) * D.dim(j)
        if size:
            out.append((i, j, off, size))
            off += size
    return out


def tensor(C: Complex, D: Complex) -> Complex:
    if C.field != D.field:
        raise FieldError("tensor of complexes over different fields")
    F = C.field
    if C.is_zero() or D.is_zero():
        return Complex(F)
    degs = range(C.lo + D.lo, C.hi + D.hi + 1)
    layouts = {d: _tensor_layout(C, D, d) for d in range(degs.start - 1, degs.stop)}
    dims = [sum(b[3] for b in layouts[d]) for d in degs]
    diffs = {}
    for d in degs:
        src, tgt = layouts[d], layouts[d - 1]
        pos = {(i, j): (off, size) for i, j, off, size in tgt}
        m = la.zeros(sum(b[3] for b in tgt), sum(b[3] for b in src))
        for i, j, off, size in src:
            if (i - 1, j) in pos:
                o, s = pos[(i - 1, j)]
                m[o:o + s, off:off + size] = la.kron(F, C.diff(i), la.identity(D.dim(j)))
            if (i, j - 1) in pos:
                o, s = pos[(i, j - 1)]
                blk = la.kron(F, la.identity(C.dim(i)), D.diff(j))
                if i % 2:
                    blk = la.mat_neg(F, blk)
                m[o:o + s, off:off + size] = blk
        diffs[d] = m
    return Complex(F, degs.start, dims, diffs)


def map_tensor(f: ChainMap, g: ChainMap) -> ChainMap:
    """f ⊗ g : tensor(source f, source g) -> tensor(target f, target g)."""
    F = f.field
    S = tensor(f.source, g.source)
    T = tensor(f.target, g.target)
    maps = {}
    for d in S.degrees:
        src = _tensor_layout(f.source, g.source, d)
        pos = {(i, j): (off, size) for i, j, off, size in _tensor_layout(f.target, g.target, d)}
        m = la.zeros(T.dim(d), S.dim(d))
        for i, j, off, size in src:
            if (i, j) in pos:
                o, s = pos[(i, j)]
                m[o:o + s, off:off + size] = la.kron(F, f.map(i), g.map(j))
        maps[d] = m
    return ChainMap(S, T, maps)


def dual(C: Complex) -> Complex:
    F = C.field
    if C.is_zero():
        return Complex(F)
    diffs = {}
    for e in range(-C.hi, -C.lo + 1):
        m = C.diff(-e + 1).T
        diffs[e] = m if e % 2 == 0 else la.mat_neg(F, m)
    return Complex(F, -C.hi, tuple(reversed(C.dims)), diffs)


def frobenius_twist(x):
    """Entrywise p-th power of every matrix of a Complex or ChainMap."""
    if isinstance(x, ChainMap):
        return ChainMap(frobenius_twist(x.source), frobenius_twist(x.target),
                        {d: la.frob(x.field, x.map(d)) for d in x.degrees})
    F = x.field
    return Complex(F, x.lo, x.dims, {d: la.frob(F, x.diff(d)) for d in x.degrees})


def split_target(C: Complex) -> Complex:
    return from_dims(C.field, betti(C))


def split(C: Complex) -> ChainMap:
    """Quasi-isomorphism C -> ⊕ H_d(C)[d] (zero differentials)."""
    T = split_target(C)
    return ChainMap(C, T, {d: C._homology_data(d)[1] for d in T.degrees})


def section(C: Complex) -> ChainMap:
    """Quasi-isomorphism ⊕ H_d(C)[d] -> C sending basis classes to their representatives."""
    S = split_target(C)
    return ChainMap(S, C, {d: C._homology_data(d)[0] for d in S.degrees})


def synthesize_quasi_iso(X: Complex, Y: Complex) -> ChainMap:
    """A quasi-isomorphism X -> Y matching echelonized homology bases."""
    if betti(X) != betti(Y):
        raise ValueError("complexes with different Betti numbers are not quasi-isomorphic")
    s = split(X)
    t = section(Y)
    return ChainMap(X, Y, {d: la.matmul(X.field, t.map(d), s.map(d)) for d in X.degrees})


# ---------------------------------------------------------------- random data

def random_complex(field: FieldSpec, rng: np.random.Generator, lo: int = -1, hi: int = 1,
                   max_dim: int = 4, exact: bool = False) -> Complex:
    """A random complex: a split complex with random homology and contractible
    pieces, conjugated by random changes of basis in every degree."""
    degs = list(range(lo, hi + 1))
    homo = {d: 0 for d in degs}
    disks = {d: 0 for d in degs}  # disk spanning degrees d and d-1
    dims = {d: 0 for d in degs}
    for d in degs:
        homo[d] = 0 if exact else int(rng.integers(0, max_dim + 1))
        dims[d] += homo[d]
    for d in degs[1:]:
        room = max_dim - max(dims[d], dims[d - 1])
        if room > 0:
            disks[d] = int(rng.integers(0, room + 1))
            dims[d] += disks[d]
            dims[d - 1] += disks[d]
    # Basis order in degree d: [tops of disks d | bottoms of disks d+1 | homology]
    diffs = {}
    P = {d: la.random_invertible(field, rng, dims[d]) for d in degs}
    Pinv = {d: la.inverse(field, P[d]) for d in degs}
    for d in degs[1:]:
        m = la.zeros(dims[d - 1], dims[d])
        top_off = 0
        bot_off = disks[d - 1] if d - 1 in disks else 0
        for k in range(disks[d]):
            m[bot_off + k, top_off + k] = 1
        diffs[d] = la.matmul(field, P[d - 1], la.matmul(field, m, Pinv[d]))
    return Complex(field, lo, [dims[d] for d in degs], diffs)


def random_chain_map(X: Complex, Y: Complex, rng: np.random.Generator) -> ChainMap:
    """A random chain map X -> Y.

    Uses a basis of X_d adapted to d: columns outside the kernel (chosen
    freely), boundaries (forced by the degree above), and homology
    representatives (sent to random cycles of Y)."""
    F = X.field
    maps = {}
    tvals: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for d in sorted(X.degrees, reverse=True):
        n = X.dim(d)
        if n == 0:
            continue
        piv = la.independent_columns(F, X.diff(d))
        T = la.identity(n)[:, piv]
        Tv = la.random_matrix(F, rng, Y.dim(d), len(piv))
        up = X.diff(d + 1)
        piv_up = la.independent_columns(F, up)
        B = up[:, piv_up]
        if d + 1 in tvals:
            Bv = la.matmul(F, Y.diff(d + 1), tvals[d + 1][1][:, :len(piv_up)])
        else:
            Bv = la.zeros(Y.dim(d), 0)
        Z = X.cycles(d)
        H = Z[:, la.extend_columns(F, B, Z)]
        ZY = Y.cycles(d)
        Hv = la.matmul(F, ZY, la.random_matrix(F, rng, ZY.shape[1], H.shape[1]))
        basis = np.hstack([T, B, H])
        vals = np.hstack([Tv, Bv, Hv])
        maps[d] = la.matmul(F, vals, la.inverse(F, basis))
        tvals[d] = (T, Tv)
    return ChainMap(X, Y, maps)
