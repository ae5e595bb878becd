from __future__ import annotations

import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fziplab import chain as ch
from fziplab import filt as fl
from fziplab import fixtures as fx
from fziplab import fzip as fz
from fziplab import linalg as la
from fziplab.filt import Filtration
from fziplab.fzip import ClassicalFZip, DerivedFZip
from fziplab.gf import make_field


def all_invertible(F, r):
    for entries in itertools.product(range(F.q), repeat=r * r):
        g = np.array(entries, dtype=np.int64).reshape(r, r)
        if la.is_invertible(F, g):
            yield g


def brute_isomorphic(M, N):
    if M.rank != N.rank:
        return False
    return any(fz.is_morphism(M, N, g) for g in all_invertible(M.field, M.rank))


def twist_filtration(X):
    return Filtration(X.direction, X.lo, [ch.frobenius_twist(c) for c in X.levels],
                      [ch.frobenius_twist(s) for s in X.steps], X.field)


# ---------------------------------------------------------- classical zips

def test_classical_check(field):
    assert fz.unit_classical(field).is_valid()
    bad = ClassicalFZip(field, 1, {0: la.identity(1)}, {0: la.identity(1)}, {0: la.zeros(1, 1)})
    assert bad.check() == ["phi at 0 is not invertible"]
    mismatch = ClassicalFZip(field, 2, {0: la.identity(2), 1: la.identity(2)[:, :1]},
                             {0: la.identity(2)}, {0: la.identity(1)})
    assert not mismatch.is_valid()


def test_random_classical_is_valid(field, rng):
    for _ in range(20):
        M = fz.random_classical(field, rng)
        assert M.is_valid()
        assert sum(M.type().values()) == M.rank


@pytest.mark.parametrize("pn,r", [((2, 1), 2), ((2, 1), 3), ((3, 1), 2), ((2, 2), 2)])
def test_isomorphism_matches_brute_force(pn, r):
    F = make_field(*pn)
    rng = np.random.default_rng(11)
    outcomes = set()
    for _ in range(12):
        M = fz.random_classical(F, rng, rank=r, indices=(0, 1))
        if rng.integers(2):
            # a random isomorphic copy: push the data through an invertible g
            g = la.random_invertible(F, rng, r)
            N = ClassicalFZip(F, r, {k: la.matmul(F, g, B) for k, B in M.C.items()},
                              {k: la.matmul(F, g, B) for k, B in M.D.items()}, {})
            N.phi = {k: _transport_phi(M, N, g, k) for k in M.jumps()}
        else:
            N = fz.random_classical(F, rng, rank=r, indices=(0, 1))
        want = brute_isomorphic(M, N)
        outcomes.add(want)
        assert fz.is_isomorphic(M, N) == want
        g = fz.find_isomorphism(M, N)
        if g is not None:
            assert fz.is_morphism(M, N, g) and la.is_invertible(F, g)
    assert True in outcomes


def _transport_phi(M, N, g, k):
    F = M.field
    # phi_N = proj_D^N g gr_D^M phi_M (proj_C^N g gr_C^M)^(1) inverse
    a = la.matmul(F, N.proj_c(k), la.matmul(F, g, M.gr_c_basis(k)))
    b = la.matmul(F, N.proj_d(k), la.matmul(F, g, M.gr_d_basis(k)))
    return la.matmul(F, b, la.matmul(F, M.phi_at(k), la.inverse(F, la.frob(F, a))))


# ------------------------------------------------------------ derived zips

def test_unit_zip(field):
    U = fz.unit_zip(field)
    assert fz.validate(U) == (True, [])
    assert fz.zip_type(U) == {(0, 0): 1}
    assert fz.euler(U) == {0: 1}
    assert fz.is_strong_zip(U) and fz.is_degenerate_zip(U)
    assert ch.betti(U.C.colim()) == {0: 1}


def test_zero_twist_is_rejected(field):
    Z = fx.curve(field, 1)
    k = sorted(Z.twists)[0]
    bad = DerivedFZip(Z.C, Z.D, Z.glue, {j: t for j, t in Z.twists.items() if j != k})
    ok, errs = fz.validate(bad)
    assert not ok and errs[0] == f"twist {k} not a quasi-isomorphism"


def test_wrong_directions_rejected(field):
    U = fz.unit_zip(field)
    ok, errs = fz.validate(DerivedFZip(U.D, U.C, None, {}))
    assert not ok and "descending" in errs[0]


def test_types_and_euler_consistency(field, rng):
    for _ in range(10):
        Z = fz.random_zip(field, rng)
        assert fz.validate(Z)[0]
        t = fz.zip_type(Z)
        e = fz.euler(Z)
        for k in {k for k, _ in t}:
            assert e.get(k, 0) == sum((-1) ** (i % 2) * v for (kk, i), v in t.items() if kk == k)
        assert sum(e.values()) == ch.euler(Z.C.colim())


def test_random_zips_strong_iff_degenerate(field, rng):
    seen = set()
    for _ in range(15):
        Z = fz.random_zip(field, rng)
        s = fz.is_strong_zip(Z)
        seen.add(s)
        assert s == fz.is_degenerate_zip(Z)
    assert seen == {True, False}


def test_type_invariant_under_frobenius(field, rng):
    Z = fz.random_zip(field, rng)
    for X in (Z.C, Z.D):
        Y = twist_filtration(X)
        for k in fl.graded_window(X):
            assert ch.betti(fl.graded(Y, k)) == ch.betti(fl.graded(X, k))


# ----------------------------------------------------------------- tensor

def test_tensor_with_unit(field, rng):
    Z = fz.random_zip(field, rng)
    T = fz.tensor(Z, fz.unit_zip(field))
    assert fz.validate(T)[0]
    assert fz.zip_type(T) == fz.zip_type(Z)
    assert fl.levelwise_betti(T.C) == fl.levelwise_betti(Z.C)


def test_tensor_of_rank_one(field):
    a = fz.embed(fz.trivial_classical(field, 1), 0)
    b = fz.embed(fz.trivial_classical(field, 2), 0)
    assert fz.zip_type(fz.tensor(a, b)) == {(3, 0): 1}


def test_tensor_euler_convolution(field, rng):
    for _ in range(4):
        Z1, Z2 = fz.random_zip(field, rng), fz.random_zip(field, rng)
        T = fz.tensor(Z1, Z2)
        assert fz.validate(T)[0]
        want: dict = {}
        for a, x in fz.euler(Z1).items():
            for b, y in fz.euler(Z2).items():
                want[a + b] = want.get(a + b, 0) + x * y
        assert fz.euler(T) == {k: v for k, v in want.items() if v}
        wt: dict = {}
        for (k1, i1), x in fz.zip_type(Z1).items():
            for (k2, i2), y in fz.zip_type(Z2).items():
                wt[(k1 + k2, i1 + i2)] = wt.get((k1 + k2, i1 + i2), 0) + x * y
        assert fz.zip_type(T) == wt


# -------------------------------------------------------- embed and pi

def test_embed_unit_is_unit_zip(field):
    assert fz.zip_type(fz.embed(fz.unit_classical(field), 0)) == fz.zip_type(fz.unit_zip(field))


def test_embed_type_slice_and_pi_section(field, rng):
    for _ in range(10):
        M = fz.random_classical(field, rng)
        n = int(rng.integers(-3, 3))
        Z = fz.embed(M, n)
        assert fz.validate(Z)[0]
        assert fz.is_strong_zip(Z) and fz.is_degenerate_zip(Z)
        assert fz.zip_type(Z) == {(k, n): v for k, v in M.type().items()}
        back = fz.pi(Z, n)
        assert back.is_valid()
        assert fz.is_isomorphic(back, M)


def test_pi_rank_on_random_degenerate(field, rng):
    for _ in range(6):
        Z = fz.random_degenerate_zip(field, rng)
        assert fz.is_degenerate_zip(Z)
        for n in range(-3, 2):
            M = fz.pi(Z, n)
            assert M.is_valid()
            assert M.rank == sum(v for (k, i), v in fz.zip_type(Z).items() if i == n)
            assert M.type() == {k: v for (k, i), v in fz.zip_type(Z).items() if i == n}


def test_pi_rejects_non_degenerate(field, rng):
    Z = fz.random_zip(field, rng, degenerate=False)
    assert not fz.is_degenerate_zip(Z)
    with pytest.raises(ValueError):
        fz.pi(Z, 0)
    with pytest.raises(ValueError):
        fz.decompose(Z)


# -------------------------------------------------------------- decompose

def test_decompose_unit(field):
    d = fz.decompose(fz.unit_zip(field))
    assert d.ok
    assert [n for n, _ in d.summands] == [0]
    assert fz.is_isomorphic(d.summands[0][1], fz.unit_classical(field))


def test_decompose_curve(field):
    d = fz.decompose(fx.curve(field, 1))
    assert d.ok
    assert [(n, M.rank) for n, M in d.summands] == [(-2, 1), (-1, 2), (0, 1)]
    assert dict(d.summands)[-2].type() == {1: 1}
    assert dict(d.summands)[0].type() == {0: 1}


def test_decompose_random(field, rng):
    for _ in range(8):
        d = fz.decompose(fz.random_degenerate_zip(field, rng))
        assert d.ok, d.checks


# ---------------------------------------------------------- constructions

def test_lift_curve_genus_zero(field):
    Z = fz.lift_curve(fx.curve_classical(field, 0))
    assert fz.zip_type(Z) == {(0, 0): 1, (1, -2): 1}


def test_lift_curve_round_trip(field, rng):
    for g in (1, 2):
        M = fz.classical_from_type(field, {0: g, 1: g}, la.random_invertible(field, rng, 2 * g),
                                   la.random_invertible(field, rng, 2 * g),
                                   {0: la.random_invertible(field, rng, g), 1: la.random_invertible(field, rng, g)})
        Z = fz.lift_curve(M)
        assert fz.validate(Z)[0] and fz.is_strong_zip(Z)
        assert fz.zip_type(Z) == {(0, 0): 1, (1, -2): 1, (0, -1): g, (1, -1): g}
        assert fz.is_isomorphic(fz.pi(Z, -1), M)


def test_lift_wrong_type(field):
    with pytest.raises(ValueError):
        fz.lift_curve(fz.trivial_classical(field, 0, 2))
    with pytest.raises(ValueError):
        fz.lift_k3(fx.curve_classical(field, 1))


def test_lift_k3_type(field):
    Z = fz.lift_k3(fx.k3_classical(field))
    assert fz.zip_type(Z) == {(0, 0): 1, (0, -2): 1, (1, -2): 20, (2, -2): 1, (2, -4): 1}
    assert fz.is_strong_zip(Z)


# -------------------------------------------------------- exterior powers

def brute_wedge_type(tau, i):
    weights = [k for k, v in tau.items() for _ in range(v)]
    out: dict = {}
    for S in itertools.combinations(range(len(weights)), i):
        w = sum(weights[j] for j in S)
        out[w] = out.get(w, 0) + 1
    return out


def test_exterior_power_examples(field, rng):
    M = fz.random_classical(field, rng, rank=4)
    assert fz.is_isomorphic(fz.exterior_power(M, 0), fz.unit_classical(field))
    top = fz.exterior_power(M, 4)
    assert top.type() == {sum(k * v for k, v in M.type().items()): 1}
    two = fz.classical_from_type(field, {0: 1, 1: 1}, la.random_invertible(field, rng, 2),
                                 la.random_invertible(field, rng, 2))
    assert fz.exterior_power(two, 2).type() == {1: 1}
    with pytest.raises(ValueError):
        fz.exterior_power(M, 5)


def test_exterior_power_type_and_splitting_independence(field, rng):
    for _ in range(4):
        M = fz.random_classical(field, rng, max_rank=4)
        for i in range(M.rank + 1):
            W = fz.exterior_power(M, i)
            assert W.is_valid()
            assert W.rank == comb(M.rank, i)
            assert W.type() == brute_wedge_type(M.type(), i)
            assert fz.is_isomorphic(W, fz.exterior_power(M, i, seed=5))


# ---------------------------------------------------------------- pairing

def test_pairing_examples(field):
    U = fz.unit_zip(field)
    K = U.C.colim()
    w = ch.ChainMap(K, fz.pairing_target(U, 0), {0: la.identity(1)})
    assert fz.check_dr_pairing(U, 0, w)
    assert not fz.check_dr_pairing(U, 0, ch.zero_map(K, fz.pairing_target(U, 0)))
    Z = fx.k3(field)
    assert fz.check_dr_pairing(Z, -4, fz.standard_pairing(Z, -4))
    with pytest.raises(ValueError):
        fz.check_dr_pairing(Z, -2, fz.standard_pairing(Z, -4))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2)]))
def test_property_section(seed, pn):
    F = make_field(*pn)
    rng = np.random.default_rng(seed)
    M = fz.random_classical(F, rng, max_rank=5)
    n = int(rng.integers(-2, 3))
    assert fz.is_isomorphic(fz.pi(fz.embed(M, n), n), M)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([(2, 1), (3, 1)]))
def test_property_zip_biconditional(seed, pn):
    F = make_field(*pn)
    Z = fz.random_zip(F, np.random.default_rng(seed))
    assert fz.validate(Z)[0]
    assert fz.is_strong_zip(Z) == fz.is_degenerate_zip(Z)
