"""Hand-built derived zips with the cohomology of curves, K3 surfaces,
abelian varieties and Enriques surfaces.

Hodge data are written h[(i, j)] = dim H^j(Ω^i).  A class of bidegree (i, j)
sits in filtration index i and homological degree -(i + j), so the zip type
satisfies τ(i, -(i+j)) = h^{i,j}.
"""
from __future__ import annotations

import numpy as np

from . import chain as ch
from . import filt as fl
from . import fzip as fz
from . import linalg as la
from .fzip import ClassicalFZip, DerivedFZip
from .gf import FieldError, FieldSpec, make_field

# Hodge numbers of Enriques surfaces in characteristic 2, listed up to h^{2,0};
# the rest follows from Serre duality h^{i,j} = h^{2-i,2-j}.
ENRIQUES_HODGE = {
    "mu2": {(0, 0): 1, (1, 0): 0, (0, 1): 1, (0, 2): 1, (1, 1): 10, (2, 0): 1},
    "z2": {(0, 0): 1, (1, 0): 1, (0, 1): 0, (0, 2): 0, (1, 1): 12, (2, 0): 0},
    "alpha2": {(0, 0): 1, (1, 0): 1, (0, 1): 1, (0, 2): 1, (1, 1): 12, (2, 0): 1},
}
# de Rham dimensions h^0..h^4 as tabulated for all three types.
ENRIQUES_DE_RHAM_TABLE = (1, 1, 12, 0, 1)


def serre_complete(h: dict[tuple[int, int], int], dim: int = 2) -> dict[tuple[int, int], int]:
    out = dict(h)
    for (i, j), v in h.items():
        out.setdefault((dim - i, dim - j), v)
    return out


def hodge_to_type(h: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    return {(i, -(i + j)): v for (i, j), v in h.items() if v}


def de_rham_dims(Z: DerivedFZip, top: int) -> tuple[int, ...]:
    """dim H_{-m} of the colimit for m = 0..top."""
    b = ch.betti(Z.C.colim())
    return tuple(b.get(-m, 0) for m in range(top + 1))


def e1_totals(Z: DerivedFZip, top: int) -> tuple[int, ...]:
    """Σ_k τ(k, -m) for m = 0..top."""
    t = fz.zip_type(Z)
    return tuple(sum(v for (k, i), v in t.items() if i == -m) for m in range(top + 1))


# ------------------------------------------------------------------ curves

def curve_classical(field: FieldSpec, g: int) -> ClassicalFZip:
    """Ordinary rank-2g zip: C^1 = first g basis vectors, D_0 = last g, phi = 1."""
    if g < 0:
        raise ValueError("genus must be nonnegative")
    if g == 0:
        return ClassicalFZip(field, 0, {}, {}, {})
    I = la.identity(2 * g)
    return ClassicalFZip(field, 2 * g, {0: I, 1: I[:, :g]}, {0: I[:, g:], 1: I},
                         {0: la.identity(g), 1: la.identity(g)})


def curve(field: FieldSpec, g: int = 1) -> DerivedFZip:
    return fz.lift_curve(curve_classical(field, g))


# --------------------------------------------------------------------- K3

def k3_classical(field: FieldSpec) -> ClassicalFZip:
    """Rank 22 with graded dimensions 1, 20, 1 at indices 0, 1, 2."""
    I = la.identity(22)
    C = {0: I, 1: I[:, :21], 2: I[:, :1]}
    D = {0: I[:, 21:], 1: I[:, 1:], 2: I}
    return ClassicalFZip(field, 22, C, D, {0: la.identity(1), 1: la.identity(20), 2: la.identity(1)})


def k3(field: FieldSpec) -> DerivedFZip:
    return fz.lift_k3(k3_classical(field))


# ---------------------------------------------------------------- abelian

def abelian(field: FieldSpec, n: int = 1, M: ClassicalFZip | None = None, seed: int = 0) -> DerivedFZip:
    """⊕_k embed(∧^k M, -k) for a rank-2n zip M of type n at 0 and n at 1."""
    if n < 1:
        raise ValueError("abelian fixture needs dimension at least 1")
    if M is None:
        rng = np.random.default_rng(seed)
        Q = la.random_invertible(field, rng, 2 * n)
        R = la.random_invertible(field, rng, 2 * n)
        phi = {0: la.random_invertible(field, rng, n), 1: la.random_invertible(field, rng, n)}
        M = fz.classical_from_type(field, {0: n, 1: n}, Q, R, phi)
    if M.rank != 2 * n:
        raise ValueError(f"abelian fixture of dimension {n} needs a rank-{2 * n} zip")
    return fz.rebuild([(-k, fz.exterior_power(M, k)) for k in range(2 * n + 1)], field)


# ---------------------------------------------------------------- Enriques

def _require_char2(field: FieldSpec) -> None:
    if field.p != 2:
        raise FieldError("Enriques fixtures live in characteristic 2")


def _zero_differential_cells(h: dict[tuple[int, int], int]) -> list[tuple[int, int, int]]:
    cells = []
    for (i, j), v in sorted(serre_complete(h).items()):
        cells += [(-(i + j), i, i)] * v
    return cells


def enriques_mu2(field: FieldSpec) -> DerivedFZip:
    _require_char2(field)
    return fz.cell_zip(field, _zero_differential_cells(ENRIQUES_HODGE["mu2"]))


def enriques_z2(field: FieldSpec) -> DerivedFZip:
    _require_char2(field)
    return fz.cell_zip(field, _zero_differential_cells(ENRIQUES_HODGE["z2"]))


def enriques_alpha2(field: FieldSpec) -> DerivedFZip:
    """A non-degenerate filtered complex with the α_2 Hodge numbers.

    Cells (degree; C-index, D-index): a (0; 0,0), u (-1; 0,1), x (-1; 1,0),
    s (-2; 0,1), v (-2; 1,0), w (-2; 1,2), ten cells (-2; 1,1), t (-2; 2,1),
    y (-3; 1,2), z (-3; 2,1), e (-4; 2,2), with differentials u -> v and
    w -> z.  Each differential joins two graded pieces, which is what makes
    E_1 larger than E_∞."""
    _require_char2(field)
    cells = [(0, 0, 0), (-1, 0, 1), (-1, 1, 0), (-2, 0, 1), (-2, 1, 0), (-2, 1, 2)]
    cells += [(-2, 1, 1)] * 10
    cells += [(-2, 2, 1), (-3, 1, 2), (-3, 2, 1), (-4, 2, 2)]
    u, v, w, z = 1, 4, 5, 18
    Z = fz.cell_zip(field, cells, [(u, v), (w, z)])
    want = hodge_to_type(serre_complete(ENRIQUES_HODGE["alpha2"]))
    if fz.zip_type(Z) != want:
        raise RuntimeError("alpha2 fixture does not have the alpha2 Hodge numbers")
    if fz.is_degenerate_zip(Z):
        raise RuntimeError("alpha2 fixture unexpectedly degenerates")
    return Z


# ---------------------------------------------------------------- registry

def fixture(name: str, field: FieldSpec | None = None, **params) -> DerivedFZip:
    if field is None:
        field = make_field(2)
    builders = {
        "curve": lambda: curve(field, params.get("g", 1)),
        "k3": lambda: k3(field),
        "abelian": lambda: abelian(field, params.get("n", 1), seed=params.get("seed", 0)),
        "enriques_mu2": lambda: enriques_mu2(field),
        "enriques_z2": lambda: enriques_z2(field),
        "enriques_alpha2": lambda: enriques_alpha2(field),
    }
    if name not in builders:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(builders)}")
    return builders[name]()


NAMES = ("curve", "k3", "abelian", "enriques_mu2", "enriques_z2", "enriques_alpha2")
