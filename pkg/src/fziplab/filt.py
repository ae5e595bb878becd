"""Bounded filtrations of complexes and their spectral sequences.

A Filtration stores levels F(a), ..., F(b) on its window [a, b] and the maps
between consecutive levels: F(i) -> F(i+1) when ascending, F(i+1) -> F(i)
when descending.  Outside the window the filtration is 0 on the small side
and a constant copy of the extreme level on the large side, so the colimit is
F(b) (ascending) or F(a) (descending).
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import chain as ch
from . import linalg as la
from .chain import ChainMap, Complex
from .gf import FieldError, FieldSpec

ASC = "ascending"
DESC = "descending"


class Filtration:
    def __init__(self, direction: str, lo: int, levels: list[Complex], steps: list[ChainMap],
                 field: FieldSpec | None = None):
        if direction not in (ASC, DESC):
            raise ValueError(f"unknown direction {direction!r}")
        if len(steps) != max(len(levels) - 1, 0):
            raise ValueError("a filtration with m levels needs m-1 steps")
        if field is None:
            if not levels:
                raise ValueError("an empty filtration needs an explicit field")
            field = levels[0].field
        if any(c.field != field for c in levels):
            raise FieldError("filtration levels over different fields")
        self.direction = direction
        self.lo = lo if levels else 0
        self.levels = list(levels)
        self.steps = list(steps)
        self.field = field
        self._composites: dict = {}

    @property
    def window(self) -> tuple[int, int]:
        return self.lo, self.lo + len(self.levels) - 1

    @property
    def hi(self) -> int:
        return self.window[1]

    @property
    def ascending(self) -> bool:
        return self.direction == ASC

    def is_empty(self) -> bool:
        return not self.levels

    def level(self, k: int) -> Complex:
        if not self.levels:
            return Complex(self.field)
        a, b = self.window
        if a <= k <= b:
            return self.levels[k - a]
        small = k < a if self.ascending else k > b
        if small:
            return Complex(self.field)
        return self.levels[-1] if self.ascending else self.levels[0]

    def colim(self) -> Complex:
        return self.level(self.hi) if self.ascending else self.level(self.lo)

    def step(self, k: int) -> ChainMap:
        """Ascending: F(k) -> F(k+1).  Descending: F(k+1) -> F(k)."""
        a, b = self.window
        if self.levels and a <= k < b:
            return self.steps[k - a]
        if self.ascending:
            src, tgt = self.level(k), self.level(k + 1)
        else:
            src, tgt = self.level(k + 1), self.level(k)
        if src.is_zero():
            return ch.zero_map(src, tgt)
        return ch.identity_map(tgt)

    def composite(self, i: int, j: int) -> ChainMap:
        """The map F(i) -> F(j) (i <= j ascending, i >= j descending)."""
        key = (i, j)
        if key in self._composites:
            return self._composites[key]
        if i == j:
            f = ch.identity_map(self.level(i))
        elif self.ascending:
            if i > j:
                raise ValueError("ascending composites go upward")
            f = ch.compose(self.step(j - 1), self.composite(i, j - 1))
        else:
            if i < j:
                raise ValueError("descending composites go downward")
            f = ch.compose(self.step(j), self.composite(i, j + 1))
        self._composites[key] = f
        return f

    def check(self) -> list[str]:
        errs = []
        for k, c in zip(range(self.lo, self.hi + 1), self.levels):
            errs += [f"level {k}: {e}" for e in c.check()]
        for k in range(self.lo, self.hi):
            f = self.step(k)
            if self.ascending:
                src, tgt = self.level(k), self.level(k + 1)
            else:
                src, tgt = self.level(k + 1), self.level(k)
            if f.source != src or f.target != tgt:
                errs.append(f"step {k}: source or target does not match the levels")
                continue
            errs += [f"step {k}: {e}" for e in f.check()]
        return errs

    def __repr__(self):
        return f"Filtration({self.direction}, window={list(self.window)})"


def zero_filtration(field: FieldSpec, direction: str) -> Filtration:
    return Filtration(direction, 0, [], [], field)


def one_step(C: Complex, direction: str = ASC, index: int = 0) -> Filtration:
    """0 ⊂ C with C appearing at the given index."""
    return Filtration(direction, index, [C], [])


def unit_filtration(field: FieldSpec, direction: str) -> Filtration:
    """The field in degree 0 at indices >= 0 (ascending) or <= 0 (descending)."""
    return one_step(ch.concentrated(field, 1, 0), direction, 0)


def mirror(F: Filtration) -> Filtration:
    """G(i) = F(-i): swaps the direction, keeps every complex and map."""
    a, b = F.window
    other = DESC if F.ascending else ASC
    if F.is_empty():
        return zero_filtration(F.field, other)
    return Filtration(other, -b, list(reversed(F.levels)), list(reversed(F.steps)), F.field)


def pad(F: Filtration, window: tuple[int, int]) -> Filtration:
    """Same filtration presented on a larger window."""
    a, b = window
    if F.is_empty():
        if a > b:
            return F
        zero = Complex(F.field)
        zmap = ch.zero_map(zero, zero)
        return Filtration(F.direction, a, [zero] * (b - a + 1), [zmap] * (b - a), F.field)
    fa, fb = F.window
    if a > fa or b < fb:
        raise ValueError("padding window must contain the original window")
    levels = [F.level(k) for k in range(a, b + 1)]
    steps = [F.step(k) for k in range(a, b)]
    return Filtration(F.direction, a, levels, steps, F.field)


def graded(F: Filtration, i: int) -> Complex:
    """gr^i: cone(F(i+1) -> F(i)) descending, cone(F(i-1) -> F(i)) ascending.
    Outside the window the graded piece is returned as the zero complex."""
    a, b = F.window
    if F.is_empty() or not a <= i <= b:
        return Complex(F.field)
    return ch.cone(F.step(i - 1) if F.ascending else F.step(i))


def graded_window(F: Filtration) -> range:
    return range(F.lo, F.hi + 1)


def from_truncations(K: Complex) -> tuple[Filtration, Filtration]:
    """(descending stupid truncations, ascending canonical truncations) of K.

    Descending level p keeps the terms of K in degrees <= -p, so gr^p is K_{-p}
    placed in degree -p.  Ascending level i is the canonical truncation keeping
    homology in degrees >= -i, so gr^i has homology H_{-i}(K) in degree -i."""
    F = K.field
    if K.is_zero():
        return zero_filtration(F, DESC), zero_filtration(F, ASC)
    lo, hi = K.lo, K.hi
    window = (-hi, -lo)

    def stupid(p):
        top = -p
        dims = [K.dim(d) for d in range(lo, top + 1)]
        return Complex(F, lo, dims, {d: K.diff(d) for d in range(lo + 1, top + 1)})

    desc_levels = [stupid(p) for p in range(window[0], window[1] + 1)]
    desc_steps = []
    for p in range(window[0], window[1]):
        src, tgt = desc_levels[p + 1 - window[0]], desc_levels[p - window[0]]
        desc_steps.append(ChainMap(src, tgt, {d: la.identity(src.dim(d)) for d in src.degrees}))
    desc = Filtration(DESC, window[0], desc_levels, desc_steps)

    def canonical(i):
        m = -i
        Z = K.cycles(m)
        dims = [Z.shape[1]] + [K.dim(d) for d in range(m + 1, hi + 1)]
        diffs = {d: K.diff(d) for d in range(m + 2, hi + 1)}
        if m + 1 <= hi:
            diffs[m + 1] = la.solve(F, Z, K.diff(m + 1))
        return Complex(F, m, dims, diffs), Z

    asc_data = [canonical(i) for i in range(window[0], window[1] + 1)]
    asc_levels = [c for c, _ in asc_data]
    asc_steps = []
    for i in range(window[0], window[1]):
        src, Zs = asc_data[i - window[0]]
        tgt, _ = asc_data[i + 1 - window[0]]
        m = -i
        maps = {d: la.identity(K.dim(d)) for d in range(m + 1, hi + 1)}
        maps[m] = Zs
        asc_steps.append(ChainMap(src, tgt, {d: maps[d] for d in src.degrees}))
    asc = Filtration(ASC, window[0], asc_levels, asc_steps)
    return desc, asc


def is_strong(F: Filtration) -> bool:
    return all(ch.is_monomorphism(F.step(k)) for k in range(F.lo, F.hi))


# --------------------------------------------------------- spectral sequence

@dataclass
class SpectralPage:
    r: int
    entries: dict[tuple[int, int], int]
    abutment: dict[int, dict[int, int]]
    bases: dict[tuple[int, int], np.ndarray] = dc_field(default_factory=dict, repr=False)

    def total(self, n: int) -> int:
        return sum(v for (p, q), v in self.entries.items() if p + q == n)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "entries": [[p, q, v] for (p, q), v in sorted(self.entries.items())],
            "abutment": [[n, p, v] for n in sorted(self.abutment)
                         for p, v in sorted(self.abutment[n].items())],
        }


def _descending(F: Filtration) -> tuple[Filtration, int]:
    """Descending presentation and the sign relating its index to F's."""
    return (F, 1) if not F.ascending else (mirror(F), -1)


def _degree_range(*cs: Complex) -> range:
    nonzero = [c for c in cs if not c.is_zero()]
    if not nonzero:
        return range(0)
    return range(min(c.lo for c in nonzero), max(c.hi for c in nonzero) + 1)


def abutment(F: Filtration) -> dict[int, dict[int, int]]:
    """n -> {p: dim im(H_n F(p) -> H_n colim)} for p in the window."""
    out: dict[int, dict[int, int]] = {}
    top = F.hi if F.ascending else F.lo
    colim_betti = ch.betti(F.colim())
    for p in graded_window(F):
        f = F.composite(p, top)
        for n in colim_betti:
            out.setdefault(n, {})[p] = ch.induced_rank(f, n)
    return out


def e_infinity(F: Filtration) -> dict[tuple[int, int], int]:
    """E_∞ dimensions from the abutment subquotients, keyed by (p, q)."""
    ab = abutment(F)
    out = {}
    for n, by_p in ab.items():
        for p, v in by_p.items():
            nxt = by_p.get(p - 1 if F.ascending else p + 1, 0)
            dim = v - nxt
            if dim:
                out[(p, n - p)] = dim
    return out


def e_one(F: Filtration) -> dict[tuple[int, int], int]:
    out = {}
    for p in graded_window(F):
        for n, v in ch.betti(graded(F, p)).items():
            out[(p, n - p)] = v
    return out


def spectral_page(F: Filtration, r: int, with_bases: bool = True) -> SpectralPage:
    """E_r^{p,q} = im(H_{p+q} cone(F(p+r) -> F(p)) -> H_{p+q} cone(F(p+1) -> F(p-r+1)))
    for descending F; ascending filtrations are mirrored and reported in their
    own index, so dim E_1^{p,q} = dim H_{p+q}(gr^p F) either way."""
    if r < 1:
        raise ValueError("page index must be at least 1")
    G, sign = _descending(F)
    entries: dict[tuple[int, int], int] = {}
    bases: dict[tuple[int, int], np.ndarray] = {}
    Fq = F.field
    for p in graded_window(G):
        f = G.composite(p + r, p)
        g = G.composite(p + 1, p - r + 1)
        alpha = G.composite(p + r, p + 1)
        beta = G.composite(p, p - r + 1)
        m = ch.cone_of_square(f, g, alpha, beta)
        for n in _degree_range(m.source, m.target):
            if r == 1:
                dim = ch.betti(m.target).get(n, 0)
            else:
                dim = ch.induced_rank(m, n)
            if not dim:
                continue
            p_out = sign * p
            entries[(p_out, n - p_out)] = dim
            if with_bases:
                bases[(p_out, n - p_out)] = la.colspace(Fq, ch.homology_map(m, n))
    return SpectralPage(r, entries, abutment(F), bases)


def is_degenerate(F: Filtration) -> bool:
    return e_one(F) == e_infinity(F)


# --------------------------------------------------------- Day convolution

def _day_ascending(F: Filtration, G: Filtration) -> Filtration:
    Fq = F.field
    if F.is_empty() or G.is_empty():
        return zero_filtration(Fq, ASC)
    aF, bF = F.window
    aG, bG = G.window
    lo, hi = aF + aG, bF + bG

    def pieces(k):
        peaks = [ch.tensor(F.level(n), G.level(k - n)) for n in range(aF, k - aG + 1)]
        valleys = [ch.tensor(F.level(n), G.level(k - n - 1)) for n in range(aF, k - aG)]
        return peaks, valleys

    def diff_map(k, peaks, valleys):
        blocks = {}
        for j, n in enumerate(range(aF, k - aG)):
            blocks[(j, j)] = ch.map_tensor(ch.identity_map(F.level(n)), G.step(k - n - 1))
            right = ch.map_tensor(F.step(n), ch.identity_map(G.level(k - n - 1)))
            blocks[(j + 1, j)] = ChainMap(right.source, right.target,
                                          {d: la.mat_neg(Fq, right.map(d)) for d in right.degrees})
        return ch.block_chain_map(Fq, valleys, peaks, blocks)

    data = {}
    for k in range(lo, hi + 1):
        peaks, valleys = pieces(k)
        data[k] = (peaks, valleys, diff_map(k, peaks, valleys))
    levels = [ch.cone(data[k][2]) for k in range(lo, hi + 1)]
    steps = []
    for k in range(lo, hi):
        peaks, valleys, phi = data[k]
        peaks2, valleys2, phi2 = data[k + 1]
        alpha = ch.block_chain_map(Fq, valleys, valleys2, {
            (j, j): ch.map_tensor(ch.identity_map(F.level(n)), G.step(k - n - 1))
            for j, n in enumerate(range(aF, k - aG))})
        beta = ch.block_chain_map(Fq, peaks, peaks2, {
            (j, j): ch.map_tensor(ch.identity_map(F.level(n)), G.step(k - n))
            for j, n in enumerate(range(aF, k - aG + 1))})
        steps.append(ch.cone_of_square(phi, phi2, alpha, beta))
    return Filtration(ASC, lo, levels, steps, Fq)


def day_convolution(F: Filtration, G: Filtration) -> Filtration:
    """Tensor product of filtrations: (F⊗G)(k) = hocolim over n+m <= k (ascending)
    of F(n)⊗G(m), computed on the zigzag of the antidiagonal n+m = k."""
    if F.direction != G.direction:
        raise ValueError("Day convolution of filtrations with different directions")
    if F.field != G.field:
        raise FieldError("Day convolution over different fields")
    if F.ascending:
        return _day_ascending(F, G)
    return mirror(_day_ascending(mirror(F), mirror(G)))


def filtration_direct_sum(*fs: Filtration) -> Filtration:
    F0 = fs[0]
    if any(f.direction != F0.direction for f in fs):
        raise ValueError("direct sum of filtrations with different directions")
    nonempty = [f for f in fs if not f.is_empty()]
    if not nonempty:
        return zero_filtration(F0.field, F0.direction)
    a = min(f.lo for f in nonempty)
    b = max(f.hi for f in nonempty)
    padded = [pad(f, (a, b)) for f in fs]
    levels = [ch.direct_sum(*(f.level(k) for f in padded)) for k in range(a, b + 1)]
    steps = [ch.map_direct_sum(*(f.step(k) for f in padded)) for k in range(a, b)]
    return Filtration(F0.direction, a, levels, steps, F0.field)


def levelwise_betti(F: Filtration, window: tuple[int, int] | None = None) -> dict[int, dict[int, int]]:
    a, b = window if window is not None else F.window
    return {k: ch.betti(F.level(k)) for k in range(a, b + 1)}


# ----------------------------------------------------------- random inputs

def _chain_to_filtration(direction: str, lo: int, chain_levels, chain_steps, field) -> Filtration:
    """Build from X_0 -> X_1 -> ... (arrow order)."""
    if direction == ASC:
        return Filtration(ASC, lo, chain_levels, chain_steps, field)
    return Filtration(DESC, lo, list(reversed(chain_levels)), list(reversed(chain_steps)), field)


def random_filtration(field: FieldSpec, rng: np.random.Generator, direction: str | None = None,
                      max_width: int = 4, max_dim: int = 6, degrees: tuple[int, int] = (-1, 1)) -> Filtration:
    """A random bounded filtration whose steps are random chain maps."""
    if direction is None:
        direction = ASC if rng.integers(2) else DESC
    width = int(rng.integers(1, max_width + 1))
    lo = int(rng.integers(-2, 2))
    levels = [ch.random_complex(field, rng, *degrees, max_dim=max_dim)]
    steps = []
    for _ in range(width - 1):
        nxt = ch.random_complex(field, rng, *degrees, max_dim=max_dim)
        steps.append(ch.random_chain_map(levels[-1], nxt, rng))
        levels.append(nxt)
    return _chain_to_filtration(direction, lo, levels, steps, field)


def _arrow_chain(F: Filtration) -> tuple[list[Complex], list[ChainMap]]:
    """Levels and steps in the order the arrows point."""
    if F.ascending:
        return list(F.levels), list(F.steps)
    return list(reversed(F.levels)), list(reversed(F.steps))


def perturb(F: Filtration, rng: np.random.Generator, noise_dim: int = 2,
            degrees: tuple[int, int] | None = None) -> Filtration:
    """Add contractible summands to every level, random off-diagonal terms to
    the steps, and conjugate each level by a random change of basis.  Levelwise
    homology and all induced maps on homology are unchanged."""
    if F.is_empty():
        return F
    field = F.field
    levels, steps = _arrow_chain(F)
    if degrees is None:
        span = _degree_range(*levels)
        degrees = (span.start, span.stop - 1) if span else (0, 0)
    noise = [ch.random_complex(field, rng, *degrees, max_dim=noise_dim, exact=True) for _ in levels]
    big = [ch.direct_sum(x, e) for x, e in zip(levels, noise)]
    new_steps = []
    for j, s in enumerate(steps):
        cross = ch.random_chain_map(levels[j], noise[j + 1], rng)
        nmap = ch.random_chain_map(noise[j], noise[j + 1], rng)
        new_steps.append(ch.block_chain_map(field, [levels[j], noise[j]], [levels[j + 1], noise[j + 1]],
                                            {(0, 0): s, (1, 0): cross, (1, 1): nmap}))
    isos = [ch.random_isomorphic_copy(c, rng) for c in big]
    out_levels = [iso.target for iso in isos]
    out_steps = [ch.compose(isos[j + 1], ch.compose(s, ch.inverse_map(isos[j])))
                 for j, s in enumerate(new_steps)]
    return _chain_to_filtration(F.direction, F.lo, out_levels, out_steps, field)


def random_strong_filtration(field: FieldSpec, rng: np.random.Generator, direction: str | None = None,
                             max_width: int = 4, max_dim: int = 6,
                             degrees: tuple[int, int] = (-1, 1)) -> Filtration:
    """A random strong filtration: nested subspaces of a complex with zero
    differential, perturbed by contractible noise and changes of basis."""
    if direction is None:
        direction = ASC if rng.integers(2) else DESC
    width = int(rng.integers(1, max_width + 1))
    lo = int(rng.integers(-2, 2))
    degs = range(degrees[0], degrees[1] + 1)
    hdim = max(1, max_dim // 2)
    # nondecreasing subspace dimensions along the arrows
    sizes = {}
    for d in degs:
        total = int(rng.integers(0, hdim + 1))
        sizes[d] = sorted(int(x) for x in rng.integers(0, total + 1, size=width - 1)) + [total]
    levels = [ch.from_dims(field, {d: sizes[d][j] for d in degs}) for j in range(width)]
    steps = [ChainMap(levels[j], levels[j + 1],
                      {d: la.identity(levels[j + 1].dim(d))[:, :levels[j].dim(d)] for d in levels[j].degrees})
             for j in range(width - 1)]
    F = _chain_to_filtration(direction, lo, levels, steps, field)
    return perturb(F, rng, noise_dim=max_dim - hdim, degrees=degrees)


def random_any_filtration(field: FieldSpec, rng: np.random.Generator, **kw) -> Filtration:
    """Half strong by construction, half with arbitrary random steps."""
    if rng.integers(2):
        return random_strong_filtration(field, rng, **kw)
    return random_filtration(field, rng, **kw)
